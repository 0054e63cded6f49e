use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::golden_section;

/// `y ≈ a·x^p + c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub a: f64,
    pub p: f64,
    pub c: f64,
    /// Euclidean norm of the residual vector.
    pub residual: f64,
}

impl PowerLawFit {
    pub fn eval(&self, x: f64) -> f64 {
        self.a * x.powf(self.p) + self.c
    }
}

/// `y ≈ prefactor·x^exponent` fitted on logarithms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogLogFit {
    pub prefactor: f64,
    pub exponent: f64,
    /// Residual norm in log space.
    pub residual: f64,
}

fn check_inputs(xs: &[f64], ys: &[f64], min: usize) -> Result<()> {
    if xs.len() != ys.len() {
        return Err(Error::Fit(format!("{} x values but {} y values", xs.len(), ys.len())));
    }
    if xs.len() < min {
        return Err(Error::Fit(format!("need at least {min} points, got {}", xs.len())));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::Fit("non-finite input".into()));
    }
    Ok(())
}

/// Least-squares straight line `y = m x + b`; returns `(m, b, residual)`.
fn line_fit(xs: &[f64], ys: &[f64]) -> Option<(f64, f64, f64)> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let m = sxy / sxx;
    let b = my - m * mx;
    let res = xs.iter().zip(ys).map(|(x, y)| (y - m * x - b).powi(2)).sum::<f64>().sqrt();
    Some((m, b, res))
}

pub fn log_log_fit(xs: &[f64], ys: &[f64]) -> Result<LogLogFit> {
    check_inputs(xs, ys, 2)?;
    if xs.iter().chain(ys).any(|v| *v <= 0.0) {
        return Err(Error::Fit("log-log fit needs positive data".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let (m, b, residual) = line_fit(&lx, &ly).ok_or_else(|| Error::Fit("x values are all equal".into()))?;
    Ok(LogLogFit { prefactor: b.exp(), exponent: m, residual })
}

/// Nonlinear least squares for `a·x^p + c` by variable projection: for each
/// `p` the best `(a, c)` is linear, leaving a 1D search over `p`. The search
/// scans a window around the log-log slope and refines by golden section.
pub fn power_law_fit(xs: &[f64], ys: &[f64]) -> Result<PowerLawFit> {
    check_inputs(xs, ys, 3)?;
    if xs.iter().any(|x| *x <= 0.0) {
        return Err(Error::Fit("power-law fit needs positive x".into()));
    }
    let p0 = if ys.iter().all(|y| *y > 0.0) { log_log_fit(xs, ys)?.exponent } else { -1.0 };
    let project = |p: f64| -> Option<(f64, f64, f64)> {
        let basis: Vec<f64> = xs.iter().map(|x| x.powf(p)).collect();
        line_fit(&basis, ys)
    };
    let cost = |p: f64| project(p).map_or(f64::INFINITY, |(_, _, r)| r);
    let (lo, hi) = (p0 - 3.0, p0 + 3.0);
    let steps = 600;
    let h = (hi - lo) / steps as f64;
    let best = (0..=steps)
        .map(|i| lo + h * i as f64)
        .fold((p0, f64::INFINITY), |acc, p| {
            let c = cost(p);
            if c < acc.1 {
                (p, c)
            } else {
                acc
            }
        });
    if !best.1.is_finite() {
        return Err(Error::Fit("no finite residual in the exponent window".into()));
    }
    let (p, _) = golden_section(best.0 - h, best.0 + h, 1e-10, cost);
    let (a, c, residual) = project(p).ok_or_else(|| Error::Fit("degenerate projection".into()))?;
    Ok(PowerLawFit { a, p, c, residual })
}

/// `n` evenly spaced points from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
    }
}
