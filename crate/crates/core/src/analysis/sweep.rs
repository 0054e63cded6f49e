use serde::{Deserialize, Serialize};

use crate::assembly::{Charge, Numerics};
use crate::basis::{BasisSpec, Model, PresetKind};
use crate::error::{domain, Result};
use crate::exec::Execution;
use crate::hf::{scf, ScfSettings};
use crate::solver::BindingSolver;
use crate::tb::{effective_masses, enumerate_species, radius, ChiralIndex, EffectiveMasses, TightBindingParams};
use crate::units::{dimensionless_radius, effective_units, Environment};

use super::fit::{linspace, log_log_fit, power_law_fit, LogLogFit, PowerLawFit};

/// Room-temperature thermal energy used as the detectability threshold.
pub const DETECTION_THRESHOLD_MEV: f64 = 26.0;

const MAX_SWEEP_RADIUS: f64 = 0.35;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "full")]
    Full,
    #[serde(rename = "hf")]
    HartreeFock,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::Full => "full",
            Method::HartreeFock => "hf",
        }
    }
}

pub fn default_r_grid() -> Vec<f64> {
    linspace(0.02, 0.3, 30)
}

pub fn default_epsilon_grid() -> Vec<f64> {
    linspace(2.0, 5.0, 13)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaCase {
    pub sigma: f64,
    pub charge: Charge,
}

/// One point of a model/method comparison. Energies are in Ry*; `e_x` is
/// the signed exciton energy. A failed point keeps its coordinates, leaves
/// the energies empty and stores the message in `error`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelRow {
    pub r: f64,
    pub sigma: f64,
    pub model: Model,
    pub method: Method,
    pub charge: Charge,
    pub e_x: Option<f64>,
    pub e_t: Option<f64>,
    pub e_b: Option<f64>,
    /// SCF convergence for HF rows; always true for full rows.
    pub converged: bool,
    pub error: Option<String>,
}

struct Job {
    r: f64,
    case: SigmaCase,
    model: Model,
    method: Method,
}

/// Rows ordered by model, then method, then σ case, then radius.
///
/// HF rows exist only for the static-hole negative trion (σ = 0, S⁻); other
/// cases are skipped for that method.
pub fn sweep_model_comparison(
    r_grid: &[f64],
    cases: &[SigmaCase],
    models: &[Model],
    methods: &[Method],
    numerics: &Numerics,
) -> Result<Vec<ModelRow>> {
    if let Some(r) = r_grid.iter().find(|r| !(**r > 0.0 && **r <= MAX_SWEEP_RADIUS)) {
        return domain(format!("sweep radius {r} outside (0, {MAX_SWEEP_RADIUS}]"));
    }
    let solvers = models
        .iter()
        .map(|&m| Ok((m, BindingSolver::preset(m, numerics)?)))
        .collect::<Result<Vec<_>>>()?;
    let mut jobs = Vec::new();
    for &model in models {
        for &method in methods {
            for &case in cases {
                if method == Method::HartreeFock && !(case.sigma == 0.0 && case.charge == Charge::Negative) {
                    continue;
                }
                jobs.extend(r_grid.iter().map(|&r| Job { r, case, model, method }));
            }
        }
    }
    let inner = numerics.with_exec(Execution::Sequential);
    let settings = ScfSettings::default();
    let rows = numerics.exec.map(&jobs, |job| {
        let solver = &solvers.iter().find(|(m, _)| *m == job.model).expect("solver per model").1;
        let mut row = ModelRow {
            r: job.r,
            sigma: job.case.sigma,
            model: job.model,
            method: job.method,
            charge: job.case.charge,
            e_x: None,
            e_t: None,
            e_b: None,
            converged: true,
            error: None,
        };
        let outcome = (|| -> Result<(f64, f64, bool)> {
            let e_x = solver.exciton_energy(job.r)?;
            match job.method {
                Method::Full => Ok((e_x, solver.trion_energy(job.r, job.case.sigma, job.case.charge)?, true)),
                Method::HartreeFock => {
                    let st = scf(&BasisSpec::preset(PresetKind::hf(job.model)), job.r, &settings, &inner)?;
                    Ok((e_x, st.e_t_hf, st.converged))
                }
            }
        })();
        match outcome {
            Ok((e_x, e_t, converged)) => {
                row.e_x = Some(e_x);
                row.e_t = Some(e_t);
                row.e_b = Some(e_x - e_t);
                row.converged = converged;
            }
            Err(e) => {
                row.converged = false;
                row.error = Some(e.to_string());
            }
        }
        row
    });
    Ok(rows)
}

/// Largest relative deviation of the S⁻ binding energy over `sigmas` from its
/// value at σ = 0; returns `(deviation, σ where it occurs)`.
pub fn sigma_spread(solver: &BindingSolver, r: f64, sigmas: &[f64]) -> Result<(f64, f64)> {
    let reference = solver.solve(r, 0.0, Charge::Negative)?.e_b;
    let mut worst = (0.0, 0.0);
    for &s in sigmas {
        let d = ((solver.solve(r, s, Charge::Negative)?.e_b - reference) / reference).abs();
        if d > worst.0 {
            worst = (d, s);
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonRow {
    pub epsilon: f64,
    pub rydberg_ev: f64,
    pub bohr_a: f64,
    /// Radius in units of a_B*.
    pub r: f64,
    /// Signed exciton energy, Ry*.
    pub e_x: f64,
    pub e_t: f64,
    pub e_b: f64,
    /// Exciton binding energy `-e_x·Ry*`, meV.
    pub exciton_binding_mev: f64,
    pub e_b_mev: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonSweep {
    pub chirality: ChiralIndex,
    pub masses: EffectiveMasses,
    pub rows: Vec<EpsilonRow>,
    /// `E_B(ε) ≈ A ε^p + C` with `A`, `C` in eV; `None` if the fit failed.
    pub fit: Option<PowerLawFit>,
    /// Log-log fit of the exciton binding energy in eV.
    pub exciton_fit: Option<LogLogFit>,
    pub fit_error: Option<String>,
}

/// Static-hole negative trion (2D model) of one tube across dielectric
/// constants, with curve fits of the physical binding energies.
pub fn sweep_epsilon(
    ch: ChiralIndex,
    eps_grid: &[f64],
    tb: &TightBindingParams,
    numerics: &Numerics,
) -> Result<EpsilonSweep> {
    let masses = effective_masses(ch, tb)?;
    let radius_a = radius(ch, tb.a);
    let solver = BindingSolver::preset(Model::TwoD, numerics)?;
    let rows = numerics.exec.try_map(eps_grid, |&eps| {
        let u = effective_units(masses.mu, Environment::new(eps)?)?;
        let r = dimensionless_radius(radius_a, &u)?;
        let res = solver.solve(r, 0.0, Charge::Negative)?;
        Ok(EpsilonRow {
            epsilon: eps,
            rydberg_ev: u.rydberg,
            bohr_a: u.bohr,
            r,
            e_x: res.e_x,
            e_t: res.e_t,
            e_b: res.e_b,
            exciton_binding_mev: -res.e_x * u.rydberg * 1e3,
            e_b_mev: res.e_b * u.rydberg * 1e3,
        })
    })?;
    let eps: Vec<f64> = rows.iter().map(|r| r.epsilon).collect();
    let e_b: Vec<f64> = rows.iter().map(|r| r.e_b_mev * 1e-3).collect();
    let e_x: Vec<f64> = rows.iter().map(|r| r.exciton_binding_mev * 1e-3).collect();
    let mut errors = Vec::new();
    let fit = power_law_fit(&eps, &e_b).map_err(|e| errors.push(format!("trion fit: {e}"))).ok();
    let exciton_fit = log_log_fit(&eps, &e_x).map_err(|e| errors.push(format!("exciton fit: {e}"))).ok();
    Ok(EpsilonSweep {
        chirality: ch,
        masses,
        rows,
        fit,
        exciton_fit,
        fit_error: if errors.is_empty() { None } else { Some(errors.join("; ")) },
    })
}

/// Binding energies of one model for a species, meV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeciesEnergies {
    pub exciton_binding_mev: f64,
    pub negative_mev: f64,
    pub positive_mev: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeciesRow {
    pub chirality: ChiralIndex,
    pub radius_a: f64,
    pub masses: Option<EffectiveMasses>,
    pub rydberg_ev: Option<f64>,
    pub bohr_a: Option<f64>,
    pub r: Option<f64>,
    pub one_d: Option<SpeciesEnergies>,
    pub two_d: Option<SpeciesEnergies>,
    /// `(E_B2D - E_B1D)/E_B2D` of S⁻ in percent, when both models ran.
    pub improvement_percent: Option<f64>,
    /// S⁻ binding energy above the threshold, using the 2D model when it ran.
    pub detectable: Option<bool>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeciesSummary {
    pub species: usize,
    pub failures: usize,
    pub improvement_max_percent: Option<f64>,
    pub improvement_mean_percent: Option<f64>,
    pub detectable: usize,
    /// Midpoint between the largest detectable radius and the smallest
    /// undetectable one, Å.
    pub boundary_radius_a: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeciesSweep {
    pub epsilon: f64,
    pub rows: Vec<SpeciesRow>,
    pub summary: SpeciesSummary,
}

/// All semiconducting tubes with radius in `[r_min, r_max]` Å at one
/// dielectric constant, each at its own mass fraction.
pub fn sweep_species(
    r_min: f64,
    r_max: f64,
    epsilon: f64,
    models: &[Model],
    tb: &TightBindingParams,
    numerics: &Numerics,
) -> Result<SpeciesSweep> {
    if !(r_min > 0.0 && r_max > r_min) {
        return domain(format!("invalid radius range [{r_min}, {r_max}]"));
    }
    tb.validate()?;
    let env = Environment::new(epsilon)?;
    let solvers = models
        .iter()
        .map(|&m| Ok((m, BindingSolver::preset(m, numerics)?)))
        .collect::<Result<Vec<_>>>()?;
    let species = enumerate_species(r_min, r_max, tb);
    let rows = numerics.exec.map(&species, |&(ch, radius_a)| {
        let mut row = SpeciesRow {
            chirality: ch,
            radius_a,
            masses: None,
            rydberg_ev: None,
            bohr_a: None,
            r: None,
            one_d: None,
            two_d: None,
            improvement_percent: None,
            detectable: None,
            error: None,
        };
        if let Err(e) = fill_species(&mut row, env, &solvers, tb) {
            row.error = Some(e.to_string());
        }
        row
    });
    let summary = summarise(&rows);
    Ok(SpeciesSweep { epsilon, rows, summary })
}

fn fill_species(
    row: &mut SpeciesRow,
    env: Environment,
    solvers: &[(Model, BindingSolver)],
    tb: &TightBindingParams,
) -> Result<()> {
    let masses = effective_masses(row.chirality, tb)?;
    row.masses = Some(masses);
    let u = effective_units(masses.mu, env)?;
    row.rydberg_ev = Some(u.rydberg);
    row.bohr_a = Some(u.bohr);
    let r = dimensionless_radius(row.radius_a, &u)?;
    row.r = Some(r);
    let mev = u.rydberg * 1e3;
    for (model, solver) in solvers {
        let e_x = solver.exciton_energy(r)?;
        let e = SpeciesEnergies {
            exciton_binding_mev: -e_x * mev,
            negative_mev: (e_x - solver.trion_energy(r, masses.sigma, Charge::Negative)?) * mev,
            positive_mev: (e_x - solver.trion_energy(r, masses.sigma, Charge::Positive)?) * mev,
        };
        match model {
            Model::OneD => row.one_d = Some(e),
            Model::TwoD => row.two_d = Some(e),
        }
    }
    if let (Some(a), Some(b)) = (row.one_d, row.two_d) {
        row.improvement_percent = Some(100.0 * (b.negative_mev - a.negative_mev) / b.negative_mev);
    }
    row.detectable = row.two_d.or(row.one_d).map(|e| e.negative_mev > DETECTION_THRESHOLD_MEV);
    Ok(())
}

fn summarise(rows: &[SpeciesRow]) -> SpeciesSummary {
    let imp: Vec<f64> = rows.iter().filter_map(|r| r.improvement_percent).collect();
    let largest_detectable = rows
        .iter()
        .filter(|r| r.detectable == Some(true))
        .map(|r| r.radius_a)
        .fold(None, |a: Option<f64>, x| Some(a.map_or(x, |a| a.max(x))));
    let smallest_undetectable = rows
        .iter()
        .filter(|r| r.detectable == Some(false))
        .map(|r| r.radius_a)
        .fold(None, |a: Option<f64>, x| Some(a.map_or(x, |a| a.min(x))));
    SpeciesSummary {
        species: rows.len(),
        failures: rows.iter().filter(|r| r.error.is_some()).count(),
        improvement_max_percent: imp.iter().copied().reduce(f64::max),
        improvement_mean_percent: (!imp.is_empty()).then(|| imp.iter().sum::<f64>() / imp.len() as f64),
        detectable: rows.iter().filter(|r| r.detectable == Some(true)).count(),
        boundary_radius_a: match (largest_detectable, smallest_undetectable) {
            (Some(a), Some(b)) => Some(0.5 * (a + b)),
            _ => None,
        },
    }
}
