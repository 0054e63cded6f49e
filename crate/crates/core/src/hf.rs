//! Closed-shell Hartree-Fock for the negative trion with an infinitely heavy
//! hole (σ = 0): two electrons share one orbital χ.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::assembly::{
    assemble_one_particle_kinetic, assemble_one_particle_potential, assemble_overlap, eri_weight,
    MomentTable, Numerics,
};
use crate::basis::{BasisSpec, Model, Particles, PresetKind};
use crate::error::{domain, Result};
use crate::solver::{exciton_energy, solve_generalized};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScfSettings {
    /// Weight of the new density in linear density mixing.
    pub mixing: f64,
    /// Convergence threshold on the orbital energy, Ry*.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for ScfSettings {
    fn default() -> Self {
        ScfSettings { mixing: 0.5, tol: 1e-8, max_iter: 200 }
    }
}

impl ScfSettings {
    fn validate(&self) -> Result<()> {
        if !(self.mixing > 0.0 && self.mixing <= 1.0) {
            return domain(format!("mixing must be in (0, 1], got {}", self.mixing));
        }
        if !(self.tol > 0.0) {
            return domain("SCF tolerance must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HFState {
    /// Orbital in the one-particle basis at radius `r`, with `cᵀ S c = 1`.
    pub orbital_coeffs: Vec<f64>,
    /// Orbital energy, Ry*.
    pub epsilon0: f64,
    /// `2 ε₀ - ⟨χ|V_H|χ⟩`, Ry*.
    pub e_t_hf: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Orbital energy per iteration; entry 0 is the `V_H = 0` starting guess.
    pub history: Vec<f64>,
    /// Change of ε₀ when the Fock matrix is rebuilt from the final orbital.
    pub residual: f64,
}

/// One-particle matrices and two-electron integrals at a fixed radius.
#[derive(Debug, Clone)]
pub struct HfProblem {
    n: usize,
    s: DMatrix<f64>,
    core: DMatrix<f64>,
    /// `(ab|cd)` stored densely, index `((a·n+b)·n+c)·n+d`.
    eri: Vec<f64>,
    drop_tol: f64,
}

impl HfProblem {
    /// `basis` must be a one-particle basis whose exponents already refer
    /// to radius `r`.
    pub fn new(basis: &BasisSpec, r: f64, numerics: &Numerics) -> Result<Self> {
        if basis.particles() != Particles::One {
            return domain("Hartree-Fock needs a one-particle orbital basis");
        }
        let s = assemble_overlap(basis);
        let core = assemble_one_particle_kinetic(basis, r)? + assemble_one_particle_potential(basis, r, numerics)?;
        let n = basis.len();
        let fns: Vec<(f64, usize)> = (0..n).map(|i| {
            let (a, _, _, l) = basis.exponents_of(i);
            (a, l)
        }).collect();
        let pair = |a: usize, b: usize| (fns[a].0 + fns[b].0, fns[a].1 + fns[b].1);
        let kappa = |p: f64, q: f64| 2.0 * r * r * p * q / (p + q);

        let mut kappas = Vec::new();
        for a in 0..n {
            for b in a..n {
                for c in 0..n {
                    for d in c..n {
                        let (p, _) = pair(a, b);
                        let (q, _) = pair(c, d);
                        kappas.push((kappa(p, q), format!("two-electron integral ({a}{b}|{c}{d})")));
                    }
                }
            }
        }
        let table = MomentTable::build(kappas, &numerics.quad, numerics.exec)?;
        let norm = 1.0 / (2.0 * PI * PI);
        let eri_rows = numerics.exec.map_range(n * n, |ab| {
            let (a, b) = (ab / n, ab % n);
            let (p, p1) = pair(a.min(b), a.max(b));
            let mut row = Vec::with_capacity(n * n);
            for c in 0..n {
                for d in 0..n {
                    let (q, p2) = pair(c.min(d), c.max(d));
                    let j = table.get(kappa(p, q));
                    let w = eri_weight(p1, p2);
                    let v = w[0] * j[0] + w[1] * j[1] + w[2] * j[2] + w[3] * j[3];
                    row.push((PI / (p + q)).sqrt() * norm * v);
                }
            }
            row
        });
        Ok(HfProblem { n, s, core, eri: eri_rows.concat(), drop_tol: numerics.drop_tol })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Two-electron integral `(ab|cd)` in Ry*.
    pub fn eri(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        self.eri[((a * self.n + b) * self.n + c) * self.n + d]
    }

    pub fn overlap(&self) -> &DMatrix<f64> {
        &self.s
    }

    pub fn core_hamiltonian(&self) -> &DMatrix<f64> {
        &self.core
    }

    /// `J_ab = Σ_cd (ab|cd) P_cd` for a density matrix `P`.
    pub fn hartree_from_density(&self, p: &DMatrix<f64>) -> DMatrix<f64> {
        let n = self.n;
        let pv: Vec<f64> = (0..n * n).map(|cd| p[(cd / n, cd % n)]).collect();
        DMatrix::from_fn(n, n, |a, b| {
            let base = (a * n + b) * n * n;
            self.eri[base..base + n * n].iter().zip(&pv).map(|(x, y)| x * y).sum()
        })
    }

    /// Matrix of the Hartree potential of a singly occupied orbital.
    pub fn hartree_matrix(&self, orbital: &[f64]) -> DMatrix<f64> {
        let c = DVector::from_column_slice(orbital);
        self.hartree_from_density(&(&c * c.transpose()))
    }

    fn lowest(&self, f: &DMatrix<f64>) -> Result<(f64, DVector<f64>)> {
        let sp = solve_generalized(f, &self.s, self.drop_tol)?;
        Ok((sp.energies[0], sp.coefficients.column(0).into_owned()))
    }

    /// Ground orbital of the core Hamiltonian (no Hartree term).
    pub fn core_orbital(&self) -> Result<(f64, Vec<f64>)> {
        let (e, c) = self.lowest(&self.core)?;
        Ok((e, c.iter().copied().collect()))
    }

    /// Self-consistent field iteration with linear density mixing.
    /// Non-convergence is reported through `converged = false`.
    pub fn scf(&self, settings: &ScfSettings) -> Result<HFState> {
        settings.validate()?;
        let (mut eps, mut c) = self.lowest(&self.core)?;
        let mut density = &c * c.transpose();
        let mut history = vec![eps];
        let mut converged = false;
        let mut residual = f64::INFINITY;
        let mut iterations = 0;
        while iterations < settings.max_iter {
            iterations += 1;
            let fock = &self.core + self.hartree_from_density(&density);
            let (e_new, c_new) = self.lowest(&fock)?;
            let delta = (e_new - eps).abs();
            eps = e_new;
            c = c_new;
            history.push(eps);
            let pure = &c * c.transpose();
            if delta < settings.tol {
                let (e_check, _) = self.lowest(&(&self.core + self.hartree_from_density(&pure)))?;
                residual = (e_check - eps).abs();
                if residual < settings.tol {
                    converged = true;
                    break;
                }
            }
            density = pure * settings.mixing + density * (1.0 - settings.mixing);
        }
        if !converged {
            let pure = &c * c.transpose();
            let (e_check, _) = self.lowest(&(&self.core + self.hartree_from_density(&pure)))?;
            residual = (e_check - eps).abs();
        }
        let orbital: Vec<f64> = c.iter().copied().collect();
        let vh = self.hartree_matrix(&orbital);
        let e_t_hf = 2.0 * eps - (c.transpose() * vh * &c)[(0, 0)];
        Ok(HFState { orbital_coeffs: orbital, epsilon0: eps, e_t_hf, iterations, converged, history, residual })
    }
}

/// Hartree potential matrix of `orbital` in `basis` (exponents at `r`).
pub fn hartree_matrix(orbital: &[f64], basis: &BasisSpec, r: f64, numerics: &Numerics) -> Result<DMatrix<f64>> {
    let prob = HfProblem::new(basis, r, numerics)?;
    if orbital.len() != prob.len() {
        return domain(format!("orbital has {} coefficients, basis has {}", orbital.len(), prob.len()));
    }
    Ok(prob.hartree_matrix(orbital))
}

/// SCF in `basis` with exponents scaled from its reference radius to `r`.
pub fn scf(basis: &BasisSpec, r: f64, settings: &ScfSettings, numerics: &Numerics) -> Result<HFState> {
    HfProblem::new(&basis.at_radius(r)?, r, numerics)?.scf(settings)
}

/// Which exciton energy the HF binding energy is measured from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExcitonReference {
    /// The full variational exciton of the same model.
    ExactVariational,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HfResult {
    pub e_t_hf: f64,
    /// Signed exciton ground energy, Ry*.
    pub e_x: f64,
    pub e_b_hf: f64,
    pub model: Model,
    pub r: f64,
    /// Always 0: the HF comparison is defined for a static hole.
    pub sigma: f64,
    pub exciton_reference: ExcitonReference,
    pub converged: bool,
    pub iterations: usize,
}

/// HF binding energy `E_X - E_T^HF` with preset bases of `model`.
pub fn hf_binding_energy(r: f64, model: Model, settings: &ScfSettings, numerics: &Numerics) -> Result<HfResult> {
    let hf_basis = BasisSpec::preset(PresetKind::hf(model));
    let ex_basis = BasisSpec::preset(PresetKind::exciton(model));
    let state = scf(&hf_basis, r, settings, numerics)?;
    let e_x = exciton_energy(r, model, &ex_basis, numerics)?;
    Ok(HfResult {
        e_t_hf: state.e_t_hf,
        e_x,
        e_b_hf: e_x - state.e_t_hf,
        model,
        r,
        sigma: 0.0,
        exciton_reference: ExcitonReference::ExactVariational,
        converged: state.converged,
        iterations: state.iterations,
    })
}
