//! Steepest-descent optimisation of Gaussian exponents in log space.

use serde::{Deserialize, Serialize};

use crate::assembly::Numerics;
use crate::basis::{AxialBasis, BasisSpec, Model, Particles};
use crate::error::{domain, Result};
use crate::exec::Execution;
use crate::hf::{HfProblem, ScfSettings};
use crate::solver::ScaledProblem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Objective {
    Exciton(Model),
    /// Negative trion with a static hole (σ = 0).
    Trion(Model),
    /// HF trion energy at σ = 0.
    HartreeFock(Model),
}

impl Objective {
    fn particles(self) -> Particles {
        match self {
            Objective::Trion(_) => Particles::Two,
            _ => Particles::One,
        }
    }

    fn model(self) -> Model {
        match self {
            Objective::Exciton(m) | Objective::Trion(m) | Objective::HartreeFock(m) => m,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerSettings {
    /// Central-difference step in log-exponent space.
    pub fd_step: f64,
    /// Stop once an accepted step lowers the objective by less than this, Ry*.
    pub energy_tol: f64,
    /// Consecutive accepted steps that must each fall below `energy_tol`.
    /// A single short backtracked step says little about stationarity.
    pub patience: usize,
    pub max_steps: usize,
    /// Largest change of any log-exponent on the first trial step.
    pub initial_step: f64,
    /// Armijo sufficient-decrease constant.
    pub armijo: f64,
    pub max_backtracks: usize,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        OptimizerSettings {
            fd_step: 1e-3,
            energy_tol: 1e-6,
            patience: 5,
            max_steps: 1000,
            initial_step: 0.1,
            armijo: 1e-4,
            max_backtracks: 30,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationRun {
    pub objective: Objective,
    pub r0: f64,
    pub initial: AxialBasis,
    pub final_exponents: AxialBasis,
    /// Objective after each accepted step; entry 0 is the starting value.
    pub history: Vec<f64>,
    pub accepted: usize,
    pub rejected: usize,
    pub converged: bool,
    /// Set when an objective evaluation failed and the run stopped early.
    pub abort_reason: Option<String>,
}

impl OptimizationRun {
    pub fn initial_objective(&self) -> f64 {
        self.history[0]
    }

    pub fn final_objective(&self) -> f64 {
        *self.history.last().expect("history is never empty")
    }
}

/// Which exponent lists share parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Tying {
    /// One-particle basis or all three lists equal.
    Single,
    /// `αi = αj`, `αk` separate.
    PairAndK,
    Independent,
}

struct Parameterisation {
    template: BasisSpec,
    tying: Tying,
}

impl Parameterisation {
    fn new(basis: &BasisSpec) -> Self {
        let a = basis.axial();
        let tying = match basis.particles() {
            Particles::One => Tying::Single,
            Particles::Two if a.alphas_i == a.alphas_j && a.alphas_j == a.alphas_k => Tying::Single,
            Particles::Two if a.alphas_i == a.alphas_j => Tying::PairAndK,
            Particles::Two => Tying::Independent,
        };
        Parameterisation { template: basis.clone(), tying }
    }

    fn initial(&self) -> Vec<f64> {
        let a = self.template.axial();
        let logs = |v: &[f64]| v.iter().map(|x| x.ln()).collect::<Vec<_>>();
        match self.tying {
            Tying::Single => logs(&a.alphas_i),
            Tying::PairAndK => [logs(&a.alphas_i), logs(&a.alphas_k)].concat(),
            Tying::Independent => [logs(&a.alphas_i), logs(&a.alphas_j), logs(&a.alphas_k)].concat(),
        }
    }

    fn axial(&self, x: &[f64]) -> AxialBasis {
        let a = self.template.axial();
        let exp = |v: &[f64]| v.iter().map(|t| t.exp()).collect::<Vec<_>>();
        let (ni, nj) = (a.alphas_i.len(), a.alphas_j.len());
        match (self.tying, self.template.particles()) {
            (Tying::Single, Particles::One) => {
                AxialBasis { alphas_i: exp(x), alphas_j: Vec::new(), alphas_k: Vec::new() }
            }
            (Tying::Single, Particles::Two) => {
                AxialBasis { alphas_i: exp(x), alphas_j: exp(x), alphas_k: exp(x) }
            }
            (Tying::PairAndK, _) => {
                AxialBasis { alphas_i: exp(&x[..ni]), alphas_j: exp(&x[..ni]), alphas_k: exp(&x[ni..]) }
            }
            (Tying::Independent, _) => AxialBasis {
                alphas_i: exp(&x[..ni]),
                alphas_j: exp(&x[ni..ni + nj]),
                alphas_k: exp(&x[ni + nj..]),
            },
        }
    }

    fn basis(&self, x: &[f64]) -> Result<BasisSpec> {
        self.template.with_axial(self.axial(x))
    }
}

fn evaluate(objective: Objective, basis: &BasisSpec, r0: f64, numerics: &Numerics) -> Result<f64> {
    let inner = numerics.with_exec(Execution::Sequential);
    match objective {
        Objective::Exciton(_) | Objective::Trion(_) => {
            let b = basis.at_radius(r0)?;
            ScaledProblem::new(&b, &inner)?.ground_energy(r0, 0.0)
        }
        Objective::HartreeFock(_) => {
            let b = basis.at_radius(r0)?;
            let st = HfProblem::new(&b, r0, &inner)?.scf(&ScfSettings::default())?;
            if !st.converged {
                return domain("SCF did not converge during exponent optimisation");
            }
            Ok(st.e_t_hf)
        }
    }
}

/// Minimise the ground-state energy at `r0` over the exponents of `initial`.
///
/// `initial` carries its own reference radius; its exponents are first
/// rescaled to `r0`. Objective evaluations inside one gradient run through
/// `numerics.exec`.
pub fn optimize(
    objective: Objective,
    initial: &BasisSpec,
    r0: f64,
    settings: &OptimizerSettings,
    numerics: &Numerics,
) -> Result<OptimizationRun> {
    if initial.particles() != objective.particles() || initial.model() != objective.model() {
        return domain("initial basis does not match the objective");
    }
    if !(r0 > 0.0) {
        return domain(format!("reference radius must be positive, got {r0}"));
    }
    let start = initial.at_radius(r0)?;
    let par = Parameterisation::new(&start);
    let f = |x: &[f64]| -> Result<f64> { evaluate(objective, &par.basis(x)?, r0, numerics) };

    let mut x = par.initial();
    let mut run = OptimizationRun {
        objective,
        r0,
        initial: start.axial().clone(),
        final_exponents: start.axial().clone(),
        history: Vec::new(),
        accepted: 0,
        rejected: 0,
        converged: false,
        abort_reason: None,
    };
    let mut fx = f(&x)?;
    run.history.push(fx);
    let h = settings.fd_step;
    let mut step = settings.initial_step;
    let mut quiet = 0;

    'outer: for _ in 0..settings.max_steps {
        let probes: Vec<Vec<f64>> = (0..2 * x.len())
            .map(|i| {
                let mut y = x.clone();
                y[i / 2] += if i % 2 == 0 { h } else { -h };
                y
            })
            .collect();
        let values = numerics.exec.map(&probes, |y| f(y));
        let mut grad = vec![0.0; x.len()];
        for (m, g) in grad.iter_mut().enumerate() {
            match (&values[2 * m], &values[2 * m + 1]) {
                (Ok(up), Ok(down)) => *g = (up - down) / (2.0 * h),
                (Err(e), _) | (_, Err(e)) => {
                    run.abort_reason = Some(e.to_string());
                    break 'outer;
                }
            }
        }
        let gmax = grad.iter().fold(0.0_f64, |a, g| a.max(g.abs()));
        let g2: f64 = grad.iter().map(|g| g * g).sum();
        if gmax == 0.0 {
            run.converged = true;
            break;
        }
        let mut t = step / gmax;
        let mut accepted = false;
        for _ in 0..settings.max_backtracks {
            let y: Vec<f64> = x.iter().zip(&grad).map(|(xi, gi)| xi - t * gi).collect();
            match f(&y) {
                Ok(fy) if fy <= fx - settings.armijo * t * g2 => {
                    let decrease = fx - fy;
                    x = y;
                    fx = fy;
                    run.history.push(fx);
                    run.accepted += 1;
                    accepted = true;
                    step = (t * gmax * 2.0).min(1.0);
                    quiet = if decrease < settings.energy_tol { quiet + 1 } else { 0 };
                    if quiet >= settings.patience.max(1) {
                        run.converged = true;
                    }
                    break;
                }
                // A failed trial (e.g. a singular basis) is just a rejected step.
                _ => {
                    run.rejected += 1;
                    t *= 0.5;
                }
            }
        }
        if !accepted {
            // No descent along the finite-difference gradient: stationary to
            // the resolution of the difference quotient.
            run.converged = true;
            break;
        }
        if run.converged {
            break;
        }
    }
    run.final_exponents = par.axial(&x);
    Ok(run)
}

/// Objective value of a basis without optimising (for comparisons).
pub fn objective_value(objective: Objective, basis: &BasisSpec, r0: f64, numerics: &Numerics) -> Result<f64> {
    evaluate(objective, basis, r0, numerics)
}
