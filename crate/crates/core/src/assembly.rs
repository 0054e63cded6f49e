//! Overlap, kinetic and potential matrices of the generalized eigenproblem.
//!
//! Coulomb elements are reduced analytically: the axial Gaussian integrals
//! collapse, via `∫ exp(-p x²) 2/sqrt(x²+d²) dx = 2 e^z K0(z)` with
//! `z = p d²/2`, to a single angular integral of `e^z K0(z)` against a weight
//! that is itself a closed-form combination of `{1, s(θ), cos θ, g(θ)}`. Only
//! four one-dimensional integrals per distinct `κ` are needed, and they are
//! computed once and shared by every element.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::io::{BufRead, Write};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::basis::{
    angular_kernels0, axial_kernels, exciton_angular_kernels0, half_sine, BasisSpec, Particles,
};
use crate::error::{domain, Error, QuadratureFailure, Result};
use crate::exec::Execution;
use crate::numeric::{k0e, AdaptiveIntegrator};

/// Tolerances of the angular integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    /// Gauss-Legendre nodes per adaptive panel.
    pub angular_order: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec { rel_tol: 1e-8, abs_tol: 1e-12, max_subdivisions: 2000, angular_order: 64 }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return domain("quadrature tolerances must be positive");
        }
        if self.angular_order < 8 {
            return domain(format!("angular_order must be >= 8, got {}", self.angular_order));
        }
        Ok(())
    }
}

/// Everything numerical that is not physics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Numerics {
    pub quad: QuadratureSpec,
    /// Relative eigenvalue cut-off of the overlap matrix.
    pub drop_tol: f64,
    pub exec: Execution,
}

impl Default for Numerics {
    fn default() -> Self {
        Numerics { quad: QuadratureSpec::default(), drop_tol: 1e-10, exec: Execution::default() }
    }
}

impl Numerics {
    pub fn with_exec(self, exec: Execution) -> Self {
        Numerics { exec, ..self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Charge {
    /// Two electrons and a hole.
    #[serde(rename = "-")]
    Negative,
    /// Two holes and an electron; obtained by `σ → 1/σ`.
    #[serde(rename = "+")]
    Positive,
}

impl Charge {
    pub fn symbol(self) -> &'static str {
        match self {
            Charge::Negative => "-",
            Charge::Positive => "+",
        }
    }
}

/// Weight `2σ'/(1+σ')` of the mixed-derivative terms, with `σ' = σ` for the
/// negative trion and `σ' = 1/σ` for the positive one.
pub fn mixed_weight(sigma: f64, charge: Charge) -> Result<f64> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return domain(format!("mass fraction must be >= 0, got {sigma}"));
    }
    match charge {
        Charge::Negative => Ok(2.0 * sigma / (1.0 + sigma)),
        Charge::Positive if sigma == 0.0 => domain("positive trion needs sigma > 0 (1/sigma undefined)"),
        Charge::Positive => Ok(2.0 / (1.0 + sigma)),
    }
}

/// The moments `J_f(κ) = ∫_{-π}^{π} e^z K0(z) f(θ) dθ`, `z = κ sin²(θ/2)`,
/// for `f ∈ {1, s(θ), cos θ, g(θ)}` with `g(θ) = 2 s(θ) + (π-|θ|) cos(θ/2)`.
#[derive(Debug, Clone)]
pub struct AngularMoments {
    integrator: AdaptiveIntegrator,
}

pub type Moments = [f64; 4];

/// `∫_{-π}^{π} s(u) s(u-θ) du`.
pub fn g_weight(theta: f64) -> f64 {
    let t = theta.abs();
    2.0 * half_sine(t) + (PI - t) * (0.5 * t).cos()
}

impl AngularMoments {
    pub fn new(q: &QuadratureSpec) -> Self {
        AngularMoments {
            integrator: AdaptiveIntegrator::new(q.angular_order, q.rel_tol, q.abs_tol, q.max_subdivisions),
        }
    }

    pub fn moments(&self, kappa: f64) -> std::result::Result<Moments, QuadratureFailure> {
        // θ = π u² removes most of the logarithmic endpoint singularity; the
        // integrand is even, so integrate [0, π] and double.
        self.integrator
            .integrate(0.0, 1.0, |u| {
                let th = PI * u * u;
                let s = (0.5 * th).sin();
                let jac = 4.0 * PI * u * k0e(kappa * s * s);
                [jac, jac * s, jac * th.cos(), jac * g_weight(th)]
            })
    }
}

fn dot4(c: &Moments, j: &Moments) -> f64 {
    c[0] * j[0] + c[1] * j[1] + c[2] * j[2] + c[3] * j[3]
}

const TWO_PI: f64 = 2.0 * PI;

/// Angular weight of the attraction on particle 1, integrated over θ2, as
/// coefficients of `{1, s, cos, g}` in θ1 (zero-based labels, no 1/2π).
fn attraction1_weight(l: usize, lp: usize) -> Moments {
    let (l, lp) = (l.min(lp), l.max(lp));
    match (l, lp) {
        (0, 0) => [TWO_PI, 0.0, 0.0, 0.0],
        (0, 1) => [0.0, TWO_PI, 0.0, 0.0],
        (0, 2) | (0, 3) => [4.0, 0.0, 0.0, 0.0],
        (1, 1) => [PI, 0.0, -PI, 0.0],
        (1, 2) | (1, 3) => [0.0, 4.0, 0.0, 0.0],
        (2, 2) | (3, 3) => [PI, 0.0, 0.0, 0.0],
        (2, 3) => [0.0, 0.0, 0.0, 1.0],
        _ => unreachable!(),
    }
}

fn swap12(l: usize) -> usize {
    match l {
        1 => 2,
        2 => 1,
        x => x,
    }
}

fn attraction2_weight(l: usize, lp: usize) -> Moments {
    attraction1_weight(swap12(l), swap12(lp))
}

/// Weight of the repulsion as a function of θ1-θ2.
fn repulsion_weight(l: usize, lp: usize) -> Moments {
    let (l, lp) = (l.min(lp), l.max(lp));
    match (l, lp) {
        (0, 0) => [TWO_PI, 0.0, 0.0, 0.0],
        (0, 1) | (0, 2) => [4.0, 0.0, 0.0, 0.0],
        (0, 3) => [0.0, TWO_PI, 0.0, 0.0],
        (1, 1) | (2, 2) => [PI, 0.0, 0.0, 0.0],
        (1, 2) => [0.0, 0.0, 0.0, 1.0],
        (1, 3) | (2, 3) => [0.0, 4.0, 0.0, 0.0],
        (3, 3) => [PI, 0.0, -PI, 0.0],
        _ => unreachable!(),
    }
}

/// Weight of the one-particle attraction, `φ_l φ_l'` without the 1/2π.
fn exciton_weight(l: usize, lp: usize) -> Moments {
    match (l.min(lp), l.max(lp)) {
        (0, 0) => [1.0, 0.0, 0.0, 0.0],
        (0, 1) => [0.0, 1.0, 0.0, 0.0],
        _ => [0.5, 0.0, -0.5, 0.0],
    }
}

/// Weight of the two-electron integral for orbital angular labels with
/// `p1` and `p2` factors of `s` on particles 1 and 2.
pub(crate) fn eri_weight(p1: usize, p2: usize) -> Moments {
    match (p1.min(p2), p1.max(p2)) {
        (0, 0) => [TWO_PI, 0.0, 0.0, 0.0],
        (0, 1) => [4.0, 0.0, 0.0, 0.0],
        (0, 2) => [PI, 0.0, 0.0, 0.0],
        (1, 1) => [0.0, 0.0, 0.0, 1.0],
        (1, 2) => [2.0, 0.0, 2.0 / 3.0, 0.0],
        (2, 2) => [0.5 * PI, 0.0, 0.25 * PI, 0.0],
        _ => unreachable!(),
    }
}

/// Which Coulomb term of the trion Hamiltonian an element refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PotentialKind {
    /// `-V(x1, θ1) - V(x2, θ2)`.
    Attraction,
    /// `+V(x1-x2, θ1-θ2)`.
    Repulsion,
}

/// Pair sums `(a, b, c)` of the axial exponents of two basis functions.
fn pair_sums(basis: &BasisSpec, p: usize, q: usize) -> (f64, f64, f64, usize, usize) {
    let (ai, aj, ak, l) = basis.exponents_of(p);
    let (bi, bj, bk, lp) = basis.exponents_of(q);
    (ai + bi, aj + bj, ak + bk, l, lp)
}

/// The three `(β, κ, weight, sign)` terms of a two-particle Coulomb element.
fn trion_terms(a: f64, b: f64, c: f64, l: usize, lp: usize, r: f64) -> [(f64, f64, Moments, f64); 3] {
    let d = a * b + b * c + c * a;
    let k = |beta: f64| 2.0 * r * r * d / beta;
    [
        (b + c, k(b + c), attraction1_weight(l, lp), -1.0),
        (a + c, k(a + c), attraction2_weight(l, lp), -1.0),
        (a + b, k(a + b), repulsion_weight(l, lp), 1.0),
    ]
}

const TRION_NORM: f64 = 1.0 / (2.0 * PI * PI);

fn require_particles(basis: &BasisSpec, want: Particles) -> Result<()> {
    if basis.particles() != want {
        return domain(format!("expected a {want:?}-particle basis, got {:?}", basis.particles()));
    }
    Ok(())
}

fn require_radius(r: f64) -> Result<()> {
    if !(r > 0.0) || !r.is_finite() {
        return domain(format!("radius must be positive, got {r}"));
    }
    Ok(())
}

fn quad_error(context: String) -> impl FnOnce(QuadratureFailure) -> Error {
    move |failure| Error::Quadrature { context, failure }
}

/// One Coulomb element of a two-particle basis, computed directly without
/// any caching.
pub fn potential_element(
    kind: PotentialKind,
    p: usize,
    q: usize,
    basis: &BasisSpec,
    r: f64,
    quad: &QuadratureSpec,
) -> Result<f64> {
    require_particles(basis, Particles::Two)?;
    require_radius(r)?;
    quad.validate()?;
    if p >= basis.len() || q >= basis.len() {
        return domain(format!("element ({p},{q}) out of range for N={}", basis.len()));
    }
    let m = AngularMoments::new(quad);
    let (a, b, c, l, lp) = pair_sums(basis, p, q);
    let terms = trion_terms(a, b, c, l, lp, r);
    let selected: &[(f64, f64, Moments, f64)] = match kind {
        PotentialKind::Attraction => &terms[..2],
        PotentialKind::Repulsion => &terms[2..],
    };
    let mut v = 0.0;
    for &(beta, kappa, w, sign) in selected {
        let j = m.moments(kappa).map_err(quad_error(format!("{kind:?} element ({p},{q})")))?;
        v += sign * (PI / beta).sqrt() * TRION_NORM * dot4(&w, &j);
    }
    Ok(v)
}

/// Moments for a list of `κ` values, computed once per distinct value.
#[derive(Debug, Clone, Default)]
pub struct MomentTable {
    map: HashMap<u64, Moments>,
}

impl MomentTable {
    /// `kappas` carries a context label used in error messages.
    pub fn build(kappas: Vec<(f64, String)>, quad: &QuadratureSpec, exec: Execution) -> Result<Self> {
        let mut kappas = kappas;
        kappas.sort_by(|x, y| x.0.total_cmp(&y.0));
        kappas.dedup_by(|x, y| x.0.to_bits() == y.0.to_bits());
        let m = AngularMoments::new(quad);
        let values = exec.try_map(&kappas, |(k, ctx)| m.moments(*k).map_err(quad_error(ctx.clone())))?;
        Ok(MomentTable {
            map: kappas.iter().map(|(k, _)| k.to_bits()).zip(values).collect(),
        })
    }

    pub fn get(&self, kappa: f64) -> &Moments {
        &self.map[&kappa.to_bits()]
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

/// Fill a symmetric matrix from its upper triangle, rows in parallel.
fn symmetric_from_rows<F>(n: usize, exec: Execution, f: F) -> DMatrix<f64>
where
    F: Fn(usize, usize) -> f64 + Sync + Send,
{
    let rows = exec.map_range(n, |p| (p..n).map(|q| f(p, q)).collect::<Vec<f64>>());
    let mut m = DMatrix::zeros(n, n);
    for (p, row) in rows.into_iter().enumerate() {
        for (off, v) in row.into_iter().enumerate() {
            m[(p, p + off)] = v;
            m[(p + off, p)] = v;
        }
    }
    m
}

pub fn assemble_overlap(basis: &BasisSpec) -> DMatrix<f64> {
    let n = basis.len();
    match basis.particles() {
        Particles::Two => symmetric_from_rows(n, Execution::Sequential, |p, q| {
            let (ai, aj, ak, l) = basis.exponents_of(p);
            let (bi, bj, bk, lp) = basis.exponents_of(q);
            axial_kernels(ai, bi, aj, bj, ak, bk).overlap * angular_kernels0(l, lp).overlap
        }),
        Particles::One => symmetric_from_rows(n, Execution::Sequential, |p, q| {
            let (a, _, _, l) = basis.exponents_of(p);
            let (b, _, _, lp) = basis.exponents_of(q);
            (PI / (a + b)).sqrt() * exciton_angular_kernels0(l, lp).0
        }),
    }
}

/// Kinetic matrix split as `base + w * mixed`, where `w` is the mass weight.
#[derive(Debug, Clone, PartialEq)]
pub struct KineticParts {
    pub base: DMatrix<f64>,
    pub mixed: DMatrix<f64>,
}

impl KineticParts {
    pub fn combine(&self, w: f64) -> DMatrix<f64> {
        &self.base + &self.mixed * w
    }
}

/// Two-particle kinetic matrix parts at radius `r`.
pub fn assemble_kinetic_parts(basis: &BasisSpec, r: f64) -> Result<KineticParts> {
    require_particles(basis, Particles::Two)?;
    require_radius(r)?;
    let n = basis.len();
    let inv_r2 = 1.0 / (r * r);
    let entry = |p: usize, q: usize| {
        let (ai, aj, ak, l) = basis.exponents_of(p);
        let (bi, bj, bk, lp) = basis.exponents_of(q);
        let t = axial_kernels(ai, bi, aj, bj, ak, bk);
        let t_swap = axial_kernels(aj, bj, ai, bi, ak, bk);
        let c = angular_kernels0(l, lp);
        let base = t.overlap * c.kinetic * inv_r2 + (t.kinetic + t_swap.kinetic) * c.overlap;
        let mixed = t.overlap * c.mixed * inv_r2 + t.mixed * c.overlap;
        (base, mixed)
    };
    Ok(KineticParts {
        base: symmetric_from_rows(n, Execution::Sequential, |p, q| entry(p, q).0),
        mixed: symmetric_from_rows(n, Execution::Sequential, |p, q| entry(p, q).1),
    })
}

pub fn assemble_kinetic(basis: &BasisSpec, sigma: f64, r: f64, charge: Charge) -> Result<DMatrix<f64>> {
    let w = mixed_weight(sigma, charge)?;
    Ok(assemble_kinetic_parts(basis, r)?.combine(w))
}

/// Two-particle potential matrix (both attractions plus the repulsion).
pub fn assemble_potential(basis: &BasisSpec, r: f64, numerics: &Numerics) -> Result<DMatrix<f64>> {
    require_particles(basis, Particles::Two)?;
    require_radius(r)?;
    numerics.quad.validate()?;
    let n = basis.len();
    let l_len = basis.angular().len();
    // κ depends only on the axial part, so collect it on the axial grid.
    let n_ax = n / l_len;
    let mut kappas = Vec::new();
    for pa in 0..n_ax {
        for qa in pa..n_ax {
            let (a, b, c, _, _) = pair_sums(basis, pa * l_len, qa * l_len);
            for (t, (_, kappa, _, _)) in trion_terms(a, b, c, 0, 0, r).into_iter().enumerate() {
                let kind = if t < 2 { "attraction" } else { "repulsion" };
                kappas.push((kappa, format!("{kind} element ({},{})", pa * l_len, qa * l_len)));
            }
        }
    }
    let table = MomentTable::build(kappas, &numerics.quad, numerics.exec)?;
    Ok(symmetric_from_rows(n, numerics.exec, |p, q| {
        let (a, b, c, l, lp) = pair_sums(basis, p, q);
        trion_terms(a, b, c, l, lp, r)
            .iter()
            .map(|&(beta, kappa, w, sign)| sign * (PI / beta).sqrt() * TRION_NORM * dot4(&w, table.get(kappa)))
            .sum()
    }))
}

/// `S`, `K`, `U` of one generalized eigenproblem.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixTriple {
    pub s: DMatrix<f64>,
    pub k: DMatrix<f64>,
    pub u: DMatrix<f64>,
}

impl MatrixTriple {
    pub fn hamiltonian(&self) -> DMatrix<f64> {
        &self.k + &self.u
    }
}

/// Two-particle matrices with the kinetic term still split by mass weight.
#[derive(Debug, Clone, PartialEq)]
pub struct TrionMatrices {
    pub s: DMatrix<f64>,
    pub kinetic: KineticParts,
    pub u: DMatrix<f64>,
}

impl TrionMatrices {
    pub fn triple(&self, w: f64) -> MatrixTriple {
        MatrixTriple { s: self.s.clone(), k: self.kinetic.combine(w), u: self.u.clone() }
    }
}

pub fn assemble_trion(basis: &BasisSpec, r: f64, numerics: &Numerics) -> Result<TrionMatrices> {
    Ok(TrionMatrices {
        s: assemble_overlap(basis),
        kinetic: assemble_kinetic_parts(basis, r)?,
        u: assemble_potential(basis, r, numerics)?,
    })
}

/// One-particle kinetic matrix: axial Gaussian kinetic energy plus the
/// angular term with its `1/r²`.
pub fn assemble_one_particle_kinetic(basis: &BasisSpec, r: f64) -> Result<DMatrix<f64>> {
    require_particles(basis, Particles::One)?;
    require_radius(r)?;
    let inv_r2 = 1.0 / (r * r);
    Ok(symmetric_from_rows(basis.len(), Execution::Sequential, |p, q| {
        let (a, _, _, l) = basis.exponents_of(p);
        let (b, _, _, lp) = basis.exponents_of(q);
        let s = a + b;
        let (so, ko) = exciton_angular_kernels0(l, lp);
        2.0 * a * b * PI.sqrt() / (s * s.sqrt()) * so + (PI / s).sqrt() * ko * inv_r2
    }))
}

/// One-particle attraction `⟨-V(x, θ)⟩`.
pub fn assemble_one_particle_potential(basis: &BasisSpec, r: f64, numerics: &Numerics) -> Result<DMatrix<f64>> {
    require_particles(basis, Particles::One)?;
    require_radius(r)?;
    numerics.quad.validate()?;
    let alphas = &basis.axial().alphas_i;
    let mut kappas = Vec::new();
    for (i, a) in alphas.iter().enumerate() {
        for (j, b) in alphas.iter().enumerate().skip(i) {
            kappas.push((2.0 * r * r * (a + b), format!("exciton element ({i},{j})")));
        }
    }
    let table = MomentTable::build(kappas, &numerics.quad, numerics.exec)?;
    Ok(symmetric_from_rows(basis.len(), numerics.exec, |p, q| {
        let (a, _, _, l) = basis.exponents_of(p);
        let (b, _, _, lp) = basis.exponents_of(q);
        -dot4(&exciton_weight(l, lp), table.get(2.0 * r * r * (a + b))) / PI
    }))
}

pub fn assemble_exciton(basis: &BasisSpec, r: f64, numerics: &Numerics) -> Result<MatrixTriple> {
    Ok(MatrixTriple {
        s: assemble_overlap(basis),
        k: assemble_one_particle_kinetic(basis, r)?,
        u: assemble_one_particle_potential(basis, r, numerics)?,
    })
}

/// Write `"N rows symmetric"` followed by the row-major lower triangle at 17
/// significant digits.
pub fn write_matrix_dump<W: Write>(m: &DMatrix<f64>, mut out: W) -> std::io::Result<()> {
    writeln!(out, "{} rows symmetric", m.nrows())?;
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..=i).map(|j| format!("{:.16e}", m[(i, j)])).collect();
        writeln!(out, "{}", row.join(" "))?;
    }
    Ok(())
}

pub fn read_matrix_dump<R: BufRead>(input: R) -> Result<DMatrix<f64>> {
    let mut lines = input.lines();
    let bad = |msg: &str| Error::Domain(format!("malformed matrix dump: {msg}"));
    let header = lines.next().ok_or_else(|| bad("empty"))?.map_err(|e| bad(&e.to_string()))?;
    let n: usize = header
        .strip_suffix(" rows symmetric")
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| bad("header"))?;
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        let line = lines.next().ok_or_else(|| bad("truncated"))?.map_err(|e| bad(&e.to_string()))?;
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| bad("number")))
            .collect::<Result<_>>()?;
        if vals.len() != i + 1 {
            return Err(bad("row length"));
        }
        for (j, v) in vals.into_iter().enumerate() {
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    Ok(m)
}
