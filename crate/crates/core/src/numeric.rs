//! Numerical building blocks: the scaled Bessel function `e^z K0(z)`,
//! Gauss-Legendre rules, a vector-valued adaptive integrator and a bracketed
//! scalar minimiser.

use crate::error::QuadratureFailure;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Exponentially scaled modified Bessel function of the second kind, `e^z K0(z)`.
///
/// Uses the power series for `z <= 1`, the trapezoid rule on
/// `∫_0^∞ exp(-2z sinh²(t/2)) dt` for moderate `z`, and the asymptotic
/// expansion for `z >= 25`. Relative accuracy is close to machine precision.
///
/// # Panics
/// Panics if `z <= 0` or is not finite.
pub fn k0e(z: f64) -> f64 {
    assert!(z > 0.0 && z.is_finite(), "k0e requires finite z > 0, got {z}");
    if z <= 1.0 {
        let q = 0.25 * z * z;
        let mut term = 1.0;
        let mut i0 = 1.0;
        let mut harmonic = 0.0;
        let mut tail = 0.0;
        for k in 1..40 {
            let kf = k as f64;
            term *= q / (kf * kf);
            harmonic += 1.0 / kf;
            i0 += term;
            tail += term * harmonic;
            if term < 1e-18 * i0 {
                break;
            }
        }
        let k0 = -((0.5 * z).ln() + EULER_GAMMA) * i0 + tail;
        k0 * z.exp()
    } else if z < 25.0 {
        let h = 0.1;
        let mut sum = 0.5;
        let mut k = 1;
        loop {
            let s = (0.5 * h * k as f64).sinh();
            let v = (-2.0 * z * s * s).exp();
            sum += v;
            if v < 1e-18 * sum {
                break;
            }
            k += 1;
        }
        h * sum
    } else {
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..60 {
            let kf = k as f64;
            let next = -term * (2.0 * kf - 1.0).powi(2) / (8.0 * kf * z);
            if next.abs() >= term.abs() {
                break;
            }
            term = next;
            sum += term;
            if term.abs() < 1e-17 * sum.abs() {
                break;
            }
        }
        (std::f64::consts::PI / (2.0 * z)).sqrt() * sum
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes by Newton iteration on `P_n`, ascending.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    /// Apply the rule on `[a, b]` to a scalar function.
    pub fn integrate(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }

    fn integrate_vec<const M: usize>(&self, a: f64, b: f64, f: &impl Fn(f64) -> [f64; M]) -> [f64; M] {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = [0.0; M];
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            let v = f(mid + half * x);
            for m in 0..M {
                acc[m] += w * v[m];
            }
        }
        acc.map(|v| v * half)
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Globally adaptive bisection with a Gauss-Legendre rule per panel.
///
/// The error on each panel is the difference between the `order`-point
/// rule and an independent `order/2`-point rule, a deliberately pessimistic
/// estimate. The worst panel is bisected until the summed error falls below
/// `max(abs_tol, rel_tol * |I|)`, where `|I|` is the largest component.
#[derive(Debug, Clone)]
pub struct AdaptiveIntegrator {
    fine: GaussLegendre,
    coarse: GaussLegendre,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

struct Panel<const M: usize> {
    a: f64,
    b: f64,
    value: [f64; M],
    error: f64,
}

impl AdaptiveIntegrator {
    pub fn new(order: usize, rel_tol: f64, abs_tol: f64, max_subdivisions: usize) -> Self {
        assert!(order >= 2);
        AdaptiveIntegrator {
            fine: GaussLegendre::new(order),
            coarse: GaussLegendre::new((order / 2).max(1)),
            rel_tol,
            abs_tol,
            max_subdivisions,
        }
    }

    fn panel<const M: usize>(&self, a: f64, b: f64, f: &impl Fn(f64) -> [f64; M]) -> Panel<M> {
        let value = self.fine.integrate_vec(a, b, f);
        let rough = self.coarse.integrate_vec(a, b, f);
        let error = value
            .iter()
            .zip(&rough)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        Panel { a, b, value, error }
    }

    /// Integrate a vector-valued function over `[a, b]`.
    pub fn integrate<const M: usize>(
        &self,
        a: f64,
        b: f64,
        f: impl Fn(f64) -> [f64; M],
    ) -> Result<[f64; M], QuadratureFailure> {
        let mut panels = vec![self.panel(a, b, &f)];
        let mut subdivisions = 0;
        loop {
            let mut total = [0.0; M];
            let mut err = 0.0;
            for p in &panels {
                for m in 0..M {
                    total[m] += p.value[m];
                }
                err += p.error;
            }
            let scale = total.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
            let tol = self.abs_tol.max(self.rel_tol * scale);
            if err <= tol {
                return Ok(total);
            }
            let (worst, _) = panels
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |best, (i, p)| {
                    if p.error > best.1 {
                        (i, p.error)
                    } else {
                        best
                    }
                });
            if subdivisions >= self.max_subdivisions {
                let p = &panels[worst];
                return Err(QuadratureFailure {
                    worst_interval: (p.a, p.b),
                    worst_error: p.error,
                    total_error: err,
                    tolerance: tol,
                    subdivisions,
                });
            }
            let p = panels.swap_remove(worst);
            let mid = 0.5 * (p.a + p.b);
            panels.push(self.panel(p.a, mid, &f));
            panels.push(self.panel(mid, p.b, &f));
            subdivisions += 1;
        }
    }
}

/// Golden-section minimisation of a unimodal function on `[a, b]`.
///
/// Returns `(x_min, f(x_min))`.
pub fn golden_section(mut a: f64, mut b: f64, tol: f64, f: impl Fn(f64) -> f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    // Reference values from scipy.special.k0e.
    const K0E_REF: [(f64, f64); 14] = [
        (1e-8, 18.536612444976903),
        (1e-3, 7.030716002378253),
        (0.1, 2.6823261022628944),
        (0.5, 1.5241093857739092),
        (1.0, 1.1444630798068947),
        (1.5, 0.9582100532948961),
        (2.0, 0.8415682150707712),
        (5.0, 0.547807564313519),
        (10.0, 0.39163193443659866),
        (24.9, 0.24993215015402473),
        (25.0, 0.2494366045755967),
        (30.0, 0.22788666561625373),
        (100.0, 0.1251756216591266),
        (1e4, 0.012532984717699288),
    ];

    #[test]
    fn k0e_matches_reference_table() {
        for (z, v) in K0E_REF {
            assert_relative_eq!(k0e(z), v, max_relative = 2e-14);
        }
    }

    #[test]
    fn k0e_is_continuous_across_branch_switches() {
        for z in [1.0, 25.0] {
            let lo = k0e(z * (1.0 - 4e-16));
            let hi = k0e(z * (1.0 + 4e-16));
            assert_relative_eq!(lo, hi, max_relative = 2e-14);
        }
    }

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let gl = GaussLegendre::new(8);
        // degree 15 is the limit for 8 nodes
        let v = gl.integrate(-1.0, 2.0, |x| x.powi(15) + 3.0 * x.powi(4));
        let exact = (2f64.powi(16) - 1.0) / 16.0 + 3.0 * (32.0 + 1.0) / 5.0;
        assert_relative_eq!(v, exact, max_relative = 1e-13);
        let sum: f64 = GaussLegendre::new(64).weights.iter().sum();
        assert_relative_eq!(sum, 2.0, max_relative = 1e-14);
    }

    #[test]
    fn adaptive_handles_log_singularity() {
        let q = AdaptiveIntegrator::new(16, 1e-12, 1e-15, 200);
        let v = q.integrate(0.0, 1.0, |x| [x.ln(), 1.0 / x.sqrt()]).unwrap();
        assert_relative_eq!(v[0], -1.0, max_relative = 1e-10);
        assert_relative_eq!(v[1], 2.0, max_relative = 1e-10);
    }

    #[test]
    fn adaptive_reports_failure_with_worst_panel() {
        let q = AdaptiveIntegrator::new(8, 1e-14, 1e-16, 3);
        let err = q.integrate(0.0, 1.0, |x| [1.0 / x.sqrt()]).unwrap_err();
        assert_eq!(err.subdivisions, 3);
        assert!(err.worst_interval.0 == 0.0);
        assert!(err.total_error > err.tolerance);
    }

    #[test]
    fn golden_section_finds_parabola_minimum() {
        let (x, fx) = golden_section(-3.0, 5.0, 1e-10, |x| (x - 1.25).powi(2) + 2.0);
        // f is flat to machine precision within ~sqrt(eps) of the minimum
        assert!((x - 1.25).abs() < 1e-7);
        assert_relative_eq!(fx, 2.0, max_relative = 1e-14);
    }
}
