//! Slow reference integrators used only by tests.
//!
//! Nothing here calls into the library's quadrature or special functions:
//! Coulomb elements go through `1/√u = (2/√π)∫₀^∞ exp(-u t²) dt` with the
//! t integral done numerically, instead of the closed form the library uses.

#![allow(dead_code)]

use std::f64::consts::PI;

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on the
/// three-term recurrence.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

pub struct Panels {
    rule: Vec<(f64, f64)>,
}

impl Panels {
    pub fn new(order: usize) -> Self {
        Panels { rule: gauss_legendre(order) }
    }

    /// Fixed rule on each consecutive pair of `breaks`.
    pub fn integrate(&self, breaks: &[f64], mut f: impl FnMut(f64) -> f64) -> f64 {
        let mut total = 0.0;
        for w in breaks.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b <= a {
                continue;
            }
            let (m, h) = (0.5 * (a + b), 0.5 * (b - a));
            total += h * self.rule.iter().map(|(x, wt)| wt * f(m + h * x)).sum::<f64>();
        }
        total
    }

    /// `[-π, π]` split at the given interior kinks.
    pub fn periodic(&self, kinks: &[f64], f: impl FnMut(f64) -> f64) -> f64 {
        let mut b: Vec<f64> = kinks.iter().map(|k| wrap(*k)).collect();
        b.push(-PI);
        b.push(PI);
        b.sort_by(f64::total_cmp);
        b.dedup();
        self.integrate(&b, f)
    }

    /// `[-π, π]` with panels graded geometrically towards θ = 0, for
    /// integrands with a logarithmic singularity there.
    pub fn graded(&self, f: impl FnMut(f64) -> f64) -> f64 {
        let mut b = vec![0.0];
        for k in (0..48).rev() {
            b.push(PI * 0.5f64.powi(k));
        }
        let mut pos: Vec<f64> = b.iter().map(|x| -x).rev().collect();
        pos.pop();
        pos.extend(b);
        self.integrate(&pos, f)
    }
}

pub fn wrap(t: f64) -> f64 {
    let mut t = t % (2.0 * PI);
    if t > PI {
        t -= 2.0 * PI;
    }
    if t < -PI {
        t += 2.0 * PI;
    }
    t
}

pub fn s(t: f64) -> f64 {
    (0.5 * t).sin().abs()
}

/// `∫ dx exp(-γ x²) · 2/√(x² + q²)` with the Gaussian-transform integral in
/// `t = e^y` evaluated by the trapezoid rule (exponentially convergent for
/// this analytic integrand).
pub fn axial_coulomb(gamma: f64, q: f64) -> f64 {
    let h = 0.05;
    let y_lo = -40.0;
    let y_hi = 40.0f64.max(5.0 - q.max(1e-300).ln());
    let n = ((y_hi - y_lo) / h).ceil() as usize;
    let mut sum = 0.0;
    for i in 0..=n {
        let y = y_lo + i as f64 * h;
        let t = y.exp();
        sum += t * (-q * q * t * t).exp() / (gamma + t * t).sqrt();
    }
    4.0 * h * sum
}

/// Two-particle angular function, zero-based label, with the 1/2π.
pub fn phi(l: usize, t1: f64, t2: f64) -> f64 {
    let v = match l {
        0 => 1.0,
        1 => s(t1),
        2 => s(t2),
        3 => s(t1 - t2),
        _ => unreachable!(),
    };
    v / (2.0 * PI)
}

/// `(∂θ1 φ_l, ∂θ2 φ_l)` away from the kinks.
pub fn dphi(l: usize, t1: f64, t2: f64) -> (f64, f64) {
    let ds = |t: f64| 0.5 * (0.5 * t).cos() * (0.5 * t).sin().signum();
    let (a, b) = match l {
        0 => (0.0, 0.0),
        1 => (ds(t1), 0.0),
        2 => (0.0, ds(t2)),
        3 => (ds(t1 - t2), -ds(t1 - t2)),
        _ => unreachable!(),
    };
    (a / (2.0 * PI), b / (2.0 * PI))
}

/// One-particle angular function with the 1/√(2π).
pub fn chi(l: usize, t: f64) -> f64 {
    (if l == 0 { 1.0 } else { s(t) }) / (2.0 * PI).sqrt()
}

pub struct TrionFn {
    pub ai: f64,
    pub aj: f64,
    pub ak: f64,
    pub l: usize,
}

/// `⟨p| -V(x1,θ1) - V(x2,θ2) + V(x1-x2, θ1-θ2) |q⟩` by the slow route.
pub fn trion_potential(p: &TrionFn, q: &TrionFn, r: f64) -> f64 {
    let (att, rep) = trion_potential_terms(p, q, r);
    att + rep
}

/// Attraction and repulsion parts separately.
pub fn trion_potential_terms(p: &TrionFn, q: &TrionFn, r: f64) -> (f64, f64) {
    let (a, b, c) = (p.ai + q.ai, p.aj + q.aj, p.ak + q.ak);
    let d = a * b + b * c + c * a;
    let inner = Panels::new(24);
    let outer = Panels::new(16);
    let pp = |t1: f64, t2: f64| phi(p.l, t1, t2) * phi(q.l, t1, t2);

    let att1 = {
        let beta = b + c;
        let f = |t1: f64| inner.periodic(&[0.0, t1], |t2| pp(t1, t2));
        -(PI / beta).sqrt() * outer.graded(|t1| f(t1) * axial_coulomb(d / beta, 2.0 * r * s(t1)))
    };
    let att2 = {
        let beta = a + c;
        let f = |t2: f64| inner.periodic(&[0.0, t2], |t1| pp(t1, t2));
        -(PI / beta).sqrt() * outer.graded(|t2| f(t2) * axial_coulomb(d / beta, 2.0 * r * s(t2)))
    };
    let rep = {
        let beta = a + b;
        // θ1 = θ2 + u; kinks where θ2 = 0 or θ1 = 0.
        let g = |u: f64| inner.periodic(&[0.0, -u], |t2| pp(wrap(t2 + u), t2));
        (PI / beta).sqrt() * outer.graded(|u| g(u) * axial_coulomb(d / beta, 2.0 * r * s(u)))
    };
    (att1 + att2, rep)
}

/// `⟨a| -V(x,θ) |b⟩` for one-particle functions `(α, l)`.
pub fn exciton_potential(a: (f64, usize), b: (f64, usize), r: f64) -> f64 {
    let outer = Panels::new(16);
    -outer.graded(|t| chi(a.1, t) * chi(b.1, t) * axial_coulomb(a.0 + b.0, 2.0 * r * s(t)))
}

/// `(ab|cd) = ∫∫ χa χb(1) V(1-2) χc χd(2)` for one-particle functions.
pub fn two_electron(a: (f64, usize), b: (f64, usize), c: (f64, usize), d: (f64, usize), r: f64) -> f64 {
    let (p, q) = (a.0 + b.0, c.0 + d.0);
    let inner = Panels::new(24);
    let outer = Panels::new(16);
    let g = |u: f64| {
        inner.periodic(&[0.0, -u], |t2| {
            let t1 = wrap(t2 + u);
            chi(a.1, t1) * chi(b.1, t1) * chi(c.1, t2) * chi(d.1, t2)
        })
    };
    (PI / (p + q)).sqrt() * outer.graded(|u| g(u) * axial_coulomb(p * q / (p + q), 2.0 * r * s(u)))
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

/// Lowest eigenvalue of `-∂x² - r⁻²∂θ² - 2/√(x² + 4r² sin²(θ/2))` on a
/// uniform `nx × nt` grid over `[-half_length, half_length] × [-π, π)`
/// (Dirichlet in x, periodic in θ). Nodes are offset by half a cell so none
/// sits on the Coulomb singularity. Plain Lanczos plus Sturm bisection.
pub fn exciton_grid_energy(nx: usize, nt: usize, half_length: f64, r: f64, lanczos_steps: usize) -> f64 {
    let hx = 2.0 * half_length / nx as f64;
    let ht = 2.0 * PI / nt as f64;
    let xs: Vec<f64> = (0..nx).map(|i| -half_length + (i as f64 + 0.5) * hx).collect();
    let ts: Vec<f64> = (0..nt).map(|j| -PI + (j as f64 + 0.5) * ht).collect();
    let n = nx * nt;
    let mut diag = vec![0.0; n];
    let (cx, ct) = (1.0 / (hx * hx), 1.0 / (r * r * ht * ht));
    for i in 0..nx {
        for j in 0..nt {
            let (x, t) = (xs[i], ts[j]);
            let v = -2.0 / (x * x + 4.0 * r * r * (0.5 * t).sin().powi(2)).sqrt();
            diag[i * nt + j] = 2.0 * cx + 2.0 * ct + v;
        }
    }
    let apply = |u: &[f64], out: &mut [f64]| {
        for i in 0..nx {
            for j in 0..nt {
                let k = i * nt + j;
                let mut acc = diag[k] * u[k];
                if i > 0 {
                    acc -= cx * u[k - nt];
                }
                if i + 1 < nx {
                    acc -= cx * u[k + nt];
                }
                acc -= ct * (u[i * nt + (j + nt - 1) % nt] + u[i * nt + (j + 1) % nt]);
                out[k] = acc;
            }
        }
    };
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();

    let mut q: Vec<f64> = (0..n).map(|k| (-xs[k / nt].powi(2)).exp()).collect();
    let nq = dot(&q, &q).sqrt();
    q.iter_mut().for_each(|x| *x /= nq);
    let mut q_prev = vec![0.0; n];
    let mut w = vec![0.0; n];
    let (mut alpha, mut beta) = (Vec::new(), Vec::new());
    let mut b_prev = 0.0;
    for _ in 0..lanczos_steps {
        apply(&q, &mut w);
        let a = dot(&w, &q);
        for k in 0..n {
            w[k] -= a * q[k] + b_prev * q_prev[k];
        }
        let b = dot(&w, &w).sqrt();
        alpha.push(a);
        beta.push(b);
        std::mem::swap(&mut q_prev, &mut q);
        for k in 0..n {
            q[k] = w[k] / b;
        }
        b_prev = b;
    }
    // Number of eigenvalues of the tridiagonal matrix below x.
    let below = |x: f64| {
        let mut count = 0;
        let mut d = 1.0;
        for i in 0..alpha.len() {
            let off = if i == 0 { 0.0 } else { beta[i - 1] * beta[i - 1] / d };
            d = alpha[i] - x - off;
            if d == 0.0 {
                d = 1e-300;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    };
    let (mut lo, mut hi) = (diag.iter().fold(0.0f64, |a, b| a.min(*b)) - 4.0 * (cx + ct), 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if below(mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Aitken Δ² limit of three successive approximations.
pub fn aitken(x0: f64, x1: f64, x2: f64) -> f64 {
    let (d1, d2) = (x1 - x0, x2 - x1);
    x2 - d2 * d2 / (d2 - d1)
}

/// Cyclic coordinate search with golden-section line minimisation on each
/// coordinate in turn, bracket `[x_i - 0.5, x_i + 0.5]`. Stops once a full
/// sweep gains less than `sweep_tol`.
pub fn coordinate_search(mut x: Vec<f64>, f: impl Fn(&[f64]) -> f64, sweep_tol: f64, max_sweeps: usize) -> (Vec<f64>, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut fx = f(&x);
    for _ in 0..max_sweeps {
        let before = fx;
        for i in 0..x.len() {
            let (mut a, mut b) = (x[i] - 0.5, x[i] + 0.5);
            let mut at = |v: f64| {
                let old = x[i];
                x[i] = v;
                let r = f(&x);
                x[i] = old;
                r
            };
            let (mut c, mut d) = (b - g * (b - a), a + g * (b - a));
            let (mut fc, mut fd) = (at(c), at(d));
            while b - a > 1e-6 {
                if fc < fd {
                    b = d;
                    d = c;
                    fd = fc;
                    c = b - g * (b - a);
                    fc = at(c);
                } else {
                    a = c;
                    c = d;
                    fc = fd;
                    d = a + g * (b - a);
                    fd = at(d);
                }
            }
            let m = 0.5 * (a + b);
            let fm = at(m);
            if fm < fx {
                x[i] = m;
                fx = fm;
            }
        }
        if before - fx < sweep_tol {
            break;
        }
    }
    (x, fx)
}
