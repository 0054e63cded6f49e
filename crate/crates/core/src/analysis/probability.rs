use std::f64::consts::PI;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::assembly::assemble_overlap;
use crate::basis::{angular_function, axial_kernels, exciton_angular_function, BasisSpec, Model, Particles};
use crate::error::{domain, Result};

use super::fit::linspace;
use super::sweep::Method;

/// Angular probability density on a uniform grid over `[-π, π]` (both ends
/// included).
///
/// Values are rescaled so that their trapezoidal integral is exactly 1; the
/// integral before rescaling is kept in `raw_integral`. The continuous
/// density is normalised analytically, so `raw_integral` differs from 1 only
/// by the trapezoid error at the kinks of `|sin|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityGrid {
    pub theta: Vec<f64>,
    /// Row-major `values[i * n + j] = P(θ_i, θ_j)` for two particles, or
    /// `values[i] = P(θ_i)` for one.
    pub values: Vec<f64>,
    pub two_dimensional: bool,
    pub raw_integral: f64,
    pub r: f64,
    pub model: Model,
    pub method: Method,
}

impl ProbabilityGrid {
    pub fn size(&self) -> usize {
        self.theta.len()
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.size() + j]
    }

    /// Trapezoidal integral over the grid.
    pub fn integral(&self) -> f64 {
        let w = trapezoid_weights(self.size());
        if self.two_dimensional {
            let n = self.size();
            (0..n).map(|i| (0..n).map(|j| w[i] * w[j] * self.at(i, j)).sum::<f64>()).sum()
        } else {
            w.iter().zip(&self.values).map(|(a, b)| a * b).sum()
        }
    }

    /// `max/min` of the density; closer to 1 means more delocalised.
    pub fn contrast(&self) -> f64 {
        let max = self.values.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        let min = self.values.iter().fold(f64::INFINITY, |a, &b| a.min(b));
        max / min
    }
}

fn trapezoid_weights(n: usize) -> Vec<f64> {
    let h = 2.0 * PI / (n - 1) as f64;
    (0..n).map(|i| if i == 0 || i == n - 1 { 0.5 * h } else { h }).collect()
}

fn grid(n: usize) -> Result<Vec<f64>> {
    if n < 3 {
        return domain(format!("grid needs at least 3 points, got {n}"));
    }
    Ok(linspace(-PI, PI, n))
}

fn check_normalised(c: &[f64], basis: &BasisSpec) -> Result<()> {
    if c.len() != basis.len() {
        return domain(format!("{} coefficients for a basis of {}", c.len(), basis.len()));
    }
    let v = DVector::from_column_slice(c);
    let norm = (v.transpose() * assemble_overlap(basis) * &v)[(0, 0)];
    if (norm - 1.0).abs() > 1e-6 {
        return domain(format!("state is not normalised (cᵀSc = {norm})"));
    }
    Ok(())
}

fn finish(theta: Vec<f64>, values: Vec<f64>, two_dimensional: bool, r: f64, model: Model, method: Method) -> ProbabilityGrid {
    let mut g = ProbabilityGrid { theta, values, two_dimensional, raw_integral: 1.0, r, model, method };
    let raw = g.integral();
    g.values.iter_mut().for_each(|v| *v /= raw);
    g.raw_integral = raw;
    g
}

/// Angular reduced density matrix `M_{ll'}` of a one-particle state.
fn one_particle_matrix(c: &[f64], basis: &BasisSpec) -> [[f64; 2]; 2] {
    let mut m = [[0.0; 2]; 2];
    for p in 0..basis.len() {
        let (a, _, _, l) = basis.exponents_of(p);
        for q in 0..basis.len() {
            let (b, _, _, lp) = basis.exponents_of(q);
            m[l][lp] += (PI / (a + b)).sqrt() * c[p] * c[q];
        }
    }
    m
}

fn one_particle_density(m: &[[f64; 2]; 2], l_len: usize, t: f64) -> f64 {
    let mut v = 0.0;
    for l in 0..l_len {
        for lp in 0..l_len {
            v += m[l][lp] * exciton_angular_function(l, t) * exciton_angular_function(lp, t);
        }
    }
    v
}

/// `P_T(θ1, θ2)` of a normalised two-particle state. The basis must be the
/// one the state was solved in, i.e. already scaled to the radius.
pub fn trion_probability(c: &[f64], basis: &BasisSpec, grid_size: usize) -> Result<ProbabilityGrid> {
    if basis.particles() != Particles::Two {
        return domain("trion probability needs a two-particle basis");
    }
    check_normalised(c, basis)?;
    let theta = grid(grid_size)?;
    let l_len = basis.angular().len();
    let mut m = [[0.0; 4]; 4];
    for p in 0..basis.len() {
        let (ai, aj, ak, l) = basis.exponents_of(p);
        for q in 0..basis.len() {
            let (bi, bj, bk, lp) = basis.exponents_of(q);
            m[l][lp] += axial_kernels(ai, bi, aj, bj, ak, bk).overlap * c[p] * c[q];
        }
    }
    let n = theta.len();
    let mut values = Vec::with_capacity(n * n);
    for &t1 in &theta {
        for &t2 in &theta {
            let mut v = 0.0;
            for l in 0..l_len {
                for lp in 0..l_len {
                    v += m[l][lp] * angular_function(l, t1, t2) * angular_function(lp, t1, t2);
                }
            }
            values.push(v.max(0.0));
        }
    }
    Ok(finish(theta, values, true, basis.r0(), basis.model(), Method::Full))
}

/// `P_X(θ)` of a normalised one-particle state.
pub fn exciton_probability(c: &[f64], basis: &BasisSpec, grid_size: usize) -> Result<ProbabilityGrid> {
    if basis.particles() != Particles::One {
        return domain("exciton probability needs a one-particle basis");
    }
    check_normalised(c, basis)?;
    let theta = grid(grid_size)?;
    let m = one_particle_matrix(c, basis);
    let l_len = basis.angular().len();
    let values = theta.iter().map(|&t| one_particle_density(&m, l_len, t).max(0.0)).collect();
    Ok(finish(theta, values, false, basis.r0(), basis.model(), Method::Full))
}

/// `P(θ1, θ2) = ρ(θ1) ρ(θ2)` of the HF product state with orbital `c`.
pub fn hf_probability(c: &[f64], basis: &BasisSpec, grid_size: usize) -> Result<ProbabilityGrid> {
    if basis.particles() != Particles::One {
        return domain("HF probability needs the one-particle orbital basis");
    }
    check_normalised(c, basis)?;
    let theta = grid(grid_size)?;
    let m = one_particle_matrix(c, basis);
    let l_len = basis.angular().len();
    let rho: Vec<f64> = theta.iter().map(|&t| one_particle_density(&m, l_len, t).max(0.0)).collect();
    let values = rho.iter().flat_map(|a| rho.iter().map(move |b| a * b)).collect();
    Ok(finish(theta, values, true, basis.r0(), basis.model(), Method::HartreeFock))
}

/// Percentage difference `100 (P_HF - P_full) / P_full`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DifferenceGrid {
    pub theta: Vec<f64>,
    pub percent: Vec<f64>,
    /// Points where `P_full < 1e-12`; their difference is reported as 0.
    pub guarded: usize,
}

impl DifferenceGrid {
    pub fn range(&self) -> (f64, f64) {
        self.percent
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }

    /// Grid indices of the largest absolute difference.
    pub fn argmax_abs(&self) -> (usize, usize) {
        let n = self.theta.len();
        let k = (0..self.percent.len())
            .fold(0, |best, k| if self.percent[k].abs() > self.percent[best].abs() { k } else { best });
        (k / n, k % n)
    }
}

pub fn hf_difference(full: &ProbabilityGrid, hf: &ProbabilityGrid) -> Result<DifferenceGrid> {
    if full.theta != hf.theta || !full.two_dimensional || !hf.two_dimensional {
        return domain("difference needs two-particle grids on the same axes");
    }
    let mut guarded = 0;
    let percent = full
        .values
        .iter()
        .zip(&hf.values)
        .map(|(&f, &h)| {
            if f < 1e-12 {
                guarded += 1;
                0.0
            } else {
                100.0 * (h - f) / f
            }
        })
        .collect();
    Ok(DifferenceGrid { theta: full.theta.clone(), percent, guarded })
}
