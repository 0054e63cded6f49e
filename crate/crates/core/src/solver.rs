//! Generalized symmetric eigenproblems and the exciton/trion energies built
//! on them.
//!
//! Under `α → α (r0/r)²` with `λ = r/r0`, the two-particle matrices scale as
//! `S = λ² S0`, `K = K0`, `U = λ U0` and the one-particle ones as
//! `S = λ S0`, `K = K0/λ`, `U = U0`. In both cases the energies are
//! `eig(K0 + λ U0, S0) / λ²`, so a problem assembled once at `r0` answers
//! every radius with a single dense eigen solve.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::assembly::{
    assemble_exciton, assemble_trion, mixed_weight, Charge, MatrixTriple, Numerics,
};
use crate::basis::{BasisSpec, Model, Particles, PresetKind};
use crate::error::{domain, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// Ascending eigenvalues, Ry*.
    pub energies: Vec<f64>,
    /// Eigenvectors as columns, normalised to `cᵀ S c = 1`. Each column's
    /// largest-magnitude component is positive.
    pub coefficients: DMatrix<f64>,
    pub retained_dim: usize,
}

impl Spectrum {
    pub fn ground_energy(&self) -> f64 {
        self.energies[0]
    }

    pub fn ground_state(&self) -> Vec<f64> {
        self.coefficients.column(0).iter().copied().collect()
    }
}

fn max_asymmetry(m: &DMatrix<f64>) -> f64 {
    let mut worst = 0.0_f64;
    for i in 0..m.nrows() {
        for j in 0..i {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

fn check_symmetric(m: &DMatrix<f64>) -> Result<()> {
    if !m.is_square() {
        return domain(format!("matrix is {}x{}, not square", m.nrows(), m.ncols()));
    }
    let scale = m.amax();
    let asym = max_asymmetry(m);
    if asym > 1e-12 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::NotSymmetric { max_asymmetry: asym });
    }
    Ok(())
}

/// Ascending eigenpairs of a symmetric matrix.
fn sorted_eigen(m: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Canonical orthogonalisation `X = U_kept Λ_kept^{-1/2}` so that `Xᵀ S X = 1`.
fn canonical_transform(s: &DMatrix<f64>, drop_tol: f64) -> Result<DMatrix<f64>> {
    let (vals, vecs) = sorted_eigen(s.clone());
    let top = vals.iter().fold(0.0_f64, |a, &b| a.max(b));
    let kept: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] > drop_tol * top).collect();
    if kept.is_empty() || !(top > 0.0) {
        return Err(Error::EmptySubspace);
    }
    Ok(DMatrix::from_fn(s.nrows(), kept.len(), |r, c| {
        vecs[(r, kept[c])] / vals[kept[c]].sqrt()
    }))
}

fn fix_signs(c: &mut DMatrix<f64>) {
    for mut col in c.column_iter_mut() {
        let mut best = 0.0_f64;
        for &v in col.iter() {
            if v.abs() > best.abs() {
                best = v;
            }
        }
        if best < 0.0 {
            col.neg_mut();
        }
    }
}

/// Solve `H c = E S c` by canonical orthogonalisation, dropping overlap
/// eigenvalues below `drop_tol` times the largest.
pub fn solve_generalized(h: &DMatrix<f64>, s: &DMatrix<f64>, drop_tol: f64) -> Result<Spectrum> {
    check_symmetric(h)?;
    check_symmetric(s)?;
    if h.shape() != s.shape() {
        return domain(format!("H is {:?} but S is {:?}", h.shape(), s.shape()));
    }
    let x = canonical_transform(s, drop_tol)?;
    solve_in_subspace(&x, &(x.transpose() * h * &x), 1.0)
}

/// Solve in a prepared orthonormal subspace; `scale` multiplies the
/// back-transformed vectors.
fn solve_in_subspace(x: &DMatrix<f64>, h_sub: &DMatrix<f64>, scale: f64) -> Result<Spectrum> {
    // Symmetrise away rounding from the triple product.
    let h_sub = (h_sub + h_sub.transpose()) * 0.5;
    let (energies, y) = sorted_eigen(h_sub);
    let mut coefficients = x * y * scale;
    fix_signs(&mut coefficients);
    Ok(Spectrum { energies, retained_dim: x.ncols(), coefficients })
}

/// Ground state energy of an assembled triple.
pub fn ground_energy(t: &MatrixTriple, drop_tol: f64) -> Result<f64> {
    Ok(solve_generalized(&t.hamiltonian(), &t.s, drop_tol)?.ground_energy())
}

/// A problem assembled once at the basis reference radius `r0`, solvable at
/// any radius with the exponents scaled by `(r0/r)²`.
#[derive(Debug, Clone)]
pub struct ScaledProblem {
    r0: f64,
    particles: Particles,
    x0: DMatrix<f64>,
    base: DMatrix<f64>,
    mixed: Option<DMatrix<f64>>,
    potential: DMatrix<f64>,
}

impl ScaledProblem {
    pub fn new(basis: &BasisSpec, numerics: &Numerics) -> Result<Self> {
        let r0 = basis.r0();
        let (s, base, mixed, u) = match basis.particles() {
            Particles::One => {
                let t = assemble_exciton(basis, r0, numerics)?;
                (t.s, t.k, None, t.u)
            }
            Particles::Two => {
                let t = assemble_trion(basis, r0, numerics)?;
                (t.s, t.kinetic.base, Some(t.kinetic.mixed), t.u)
            }
        };
        let x0 = canonical_transform(&s, numerics.drop_tol)?;
        let project = |m: &DMatrix<f64>| x0.transpose() * m * &x0;
        Ok(ScaledProblem {
            r0,
            particles: basis.particles(),
            base: project(&base),
            mixed: mixed.as_ref().map(project),
            potential: project(&u),
            x0,
        })
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }

    pub fn retained_dim(&self) -> usize {
        self.x0.ncols()
    }

    /// Spectrum at radius `r` with mixed-term weight `w`; coefficients refer
    /// to the basis scaled to `r`.
    pub fn spectrum(&self, r: f64, w: f64) -> Result<Spectrum> {
        if !(r > 0.0) || !r.is_finite() {
            return domain(format!("radius must be positive, got {r}"));
        }
        let lam = r / self.r0;
        let mut h = &self.base + &self.potential * lam;
        if let Some(m) = &self.mixed {
            h += m * w;
        }
        let norm = match self.particles {
            Particles::One => lam.sqrt(),
            Particles::Two => lam,
        };
        let mut sp = solve_in_subspace(&self.x0, &h, 1.0 / norm)?;
        let inv = 1.0 / (lam * lam);
        sp.energies.iter_mut().for_each(|e| *e *= inv);
        Ok(sp)
    }

    pub fn ground_energy(&self, r: f64, w: f64) -> Result<f64> {
        Ok(self.spectrum(r, w)?.ground_energy())
    }
}

/// Matching exciton and trion bases of one model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelBases {
    pub exciton: BasisSpec,
    pub trion: BasisSpec,
}

impl ModelBases {
    pub fn preset(model: Model) -> Self {
        ModelBases {
            exciton: BasisSpec::preset(PresetKind::exciton(model)),
            trion: BasisSpec::preset(PresetKind::trion(model)),
        }
    }

    fn check(&self, model: Model) -> Result<()> {
        for (name, b, p) in [("exciton", &self.exciton, Particles::One), ("trion", &self.trion, Particles::Two)] {
            if b.model() != model || b.particles() != p {
                return domain(format!("{name} basis does not match the {} model", model.label()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrionResult {
    /// Trion ground energy, Ry*.
    pub e_t: f64,
    /// Exciton ground energy (negative), Ry*.
    pub e_x: f64,
    /// `e_x - e_t`; positive for a bound trion.
    pub e_b: f64,
    pub model: Model,
    pub sigma: f64,
    pub charge: Charge,
    pub r: f64,
}

impl TrionResult {
    pub fn is_stable(&self) -> bool {
        self.e_b > 0.0
    }
}

/// Exciton and trion problems of one model, prepared for repeated solves.
#[derive(Debug, Clone)]
pub struct BindingSolver {
    model: Model,
    exciton: ScaledProblem,
    trion: ScaledProblem,
}

impl BindingSolver {
    pub fn new(model: Model, bases: &ModelBases, numerics: &Numerics) -> Result<Self> {
        bases.check(model)?;
        Ok(BindingSolver {
            model,
            exciton: ScaledProblem::new(&bases.exciton, numerics)?,
            trion: ScaledProblem::new(&bases.trion, numerics)?,
        })
    }

    pub fn preset(model: Model, numerics: &Numerics) -> Result<Self> {
        Self::new(model, &ModelBases::preset(model), numerics)
    }

    pub fn model(&self) -> Model {
        self.model
    }

    /// Signed exciton ground energy, Ry*.
    pub fn exciton_energy(&self, r: f64) -> Result<f64> {
        self.exciton.ground_energy(r, 0.0)
    }

    pub fn exciton_spectrum(&self, r: f64) -> Result<Spectrum> {
        self.exciton.spectrum(r, 0.0)
    }

    pub fn trion_spectrum(&self, r: f64, sigma: f64, charge: Charge) -> Result<Spectrum> {
        self.trion.spectrum(r, mixed_weight(sigma, charge)?)
    }

    pub fn trion_energy(&self, r: f64, sigma: f64, charge: Charge) -> Result<f64> {
        Ok(self.trion_spectrum(r, sigma, charge)?.ground_energy())
    }

    pub fn solve(&self, r: f64, sigma: f64, charge: Charge) -> Result<TrionResult> {
        let e_t = self.trion_energy(r, sigma, charge)?;
        let e_x = self.exciton_energy(r)?;
        Ok(TrionResult { e_t, e_x, e_b: e_x - e_t, model: self.model, sigma, charge, r })
    }
}

/// Signed exciton ground energy at radius `r`; the binding energy of the
/// exciton is its negative.
pub fn exciton_energy(r: f64, model: Model, basis: &BasisSpec, numerics: &Numerics) -> Result<f64> {
    if basis.model() != model || basis.particles() != Particles::One {
        return domain("exciton basis does not match the requested model");
    }
    ScaledProblem::new(basis, numerics)?.ground_energy(r, 0.0)
}

pub fn trion_energy(
    r: f64,
    sigma: f64,
    charge: Charge,
    model: Model,
    basis: &BasisSpec,
    numerics: &Numerics,
) -> Result<f64> {
    if basis.model() != model || basis.particles() != Particles::Two {
        return domain("trion basis does not match the requested model");
    }
    let w = mixed_weight(sigma, charge)?;
    ScaledProblem::new(basis, numerics)?.ground_energy(r, w)
}

pub fn binding_energy(
    r: f64,
    sigma: f64,
    charge: Charge,
    model: Model,
    bases: &ModelBases,
    numerics: &Numerics,
) -> Result<TrionResult> {
    BindingSolver::new(model, bases, numerics)?.solve(r, sigma, charge)
}
