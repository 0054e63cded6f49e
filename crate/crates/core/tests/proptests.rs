use std::f64::consts::PI;

use nalgebra::DMatrix;
use proptest::prelude::*;
use trionlab::analysis::{exciton_probability, power_law_fit, trion_probability};
use trionlab::assembly::assemble_overlap;
use trionlab::basis::{axial_kernels, coulomb_potential, scale_exponents, AxialBasis, BasisSpec, Model};
use trionlab::solver::solve_generalized;
use trionlab::tb::{graphene_band, Branch, TightBindingParams};
use trionlab::units::{dimensionless_radius, effective_units, Environment};
use trionlab::Execution;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}

fn exponent() -> impl Strategy<Value = f64> {
    (-6.0f64..5.0).prop_map(f64::exp)
}

/// Random SPD overlap and symmetric Hamiltonian of size n.
fn pencil(n: usize) -> impl Strategy<Value = (DMatrix<f64>, DMatrix<f64>)> {
    (prop::collection::vec(-1.0f64..1.0, n * n), prop::collection::vec(-1.0f64..1.0, n * n)).prop_map(move |(a, b)| {
        let a = DMatrix::from_vec(n, n, a);
        let s = a.transpose() * &a + DMatrix::identity(n, n) * 0.1;
        let b = DMatrix::from_vec(n, n, b);
        let h = (&b + b.transpose()) * 0.5;
        (h, s)
    })
}

fn normalise(c: &mut [f64], s: &DMatrix<f64>) {
    let v = nalgebra::DVector::from_column_slice(c);
    let norm = (v.transpose() * s * &v)[(0, 0)].sqrt();
    c.iter_mut().for_each(|x| *x /= norm);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn coulomb_is_even_and_periodic(x in -10.0f64..10.0, t in -PI..PI, r in 0.01f64..1.0) {
        prop_assume!(x.abs() > 1e-6 || t.abs() > 1e-6);
        let v = coulomb_potential(x, t, r).unwrap();
        prop_assert!(v > 0.0);
        prop_assert!(close(v, coulomb_potential(-x, t, r).unwrap(), 1e-14));
        prop_assert!(close(v, coulomb_potential(x, -t, r).unwrap(), 1e-14));
        prop_assert!(close(v, coulomb_potential(x, t + 2.0 * PI, r).unwrap(), 1e-12));
        // Never stronger than the straight-line distance allows.
        prop_assert!(v >= 2.0 / (x * x + 4.0 * r * r).sqrt() * (1.0 - 1e-14));
    }

    #[test]
    fn axial_kernels_are_symmetric_in_bra_and_ket(
        ai in exponent(), aip in exponent(), aj in exponent(),
        ajp in exponent(), ak in exponent(), akp in exponent(),
    ) {
        let a = axial_kernels(ai, aip, aj, ajp, ak, akp);
        let b = axial_kernels(aip, ai, ajp, aj, akp, ak);
        prop_assert!(a.overlap > 0.0 && a.kinetic > 0.0);
        prop_assert!(close(a.overlap, b.overlap, 1e-13));
        prop_assert!(close(a.kinetic, b.kinetic, 1e-12));
        prop_assert!(close(a.mixed, b.mixed, 1e-12));
    }

    #[test]
    fn rescaling_composes(r0 in 0.01f64..1.0, r1 in 0.01f64..1.0, r2 in 0.01f64..1.0) {
        let b = BasisSpec::one_particle(vec![0.3, 2.0, 11.0], Model::TwoD, r0).unwrap();
        let two_step = scale_exponents(&scale_exponents(&b, r0, r1).unwrap(), r1, r2).unwrap();
        let direct = scale_exponents(&b, r0, r2).unwrap();
        for (x, y) in two_step.axial().alphas_i.iter().zip(&direct.axial().alphas_i) {
            prop_assert!(close(*x, *y, 1e-13));
        }
        prop_assert_eq!(two_step.r0(), r2);
    }

    #[test]
    fn conduction_band_never_below_valence(kx in -3.0f64..3.0, ky in -3.0f64..3.0) {
        let p = TightBindingParams::default();
        prop_assert!(graphene_band([kx, ky], &p, Branch::Conduction) >= graphene_band([kx, ky], &p, Branch::Valence));
    }

    #[test]
    fn effective_units_round_trip(mu in 0.01f64..0.5, eps in 1.0f64..10.0, r_a in 1.0f64..50.0) {
        let u = effective_units(mu, Environment::new(eps).unwrap()).unwrap();
        prop_assert!(close(u.rydberg * eps * eps / mu, 13.6, 1e-14));
        prop_assert!(close(u.bohr * mu / eps, 0.529, 1e-14));
        let r = dimensionless_radius(r_a, &u).unwrap();
        prop_assert!(close(r * u.bohr, r_a, 1e-14));
        // Stronger screening: smaller Rydberg, larger Bohr radius.
        let v = effective_units(mu, Environment::new(eps * 1.1).unwrap()).unwrap();
        prop_assert!(v.rydberg < u.rydberg && v.bohr > u.bohr);
    }

    #[test]
    fn power_law_fit_recovers_exact_data(a in 0.05f64..1.0, p in -2.5f64..-0.5, c in 0.0f64..0.02) {
        let xs: Vec<f64> = (0..13).map(|i| 2.0 + 0.25 * i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| a * x.powf(p) + c).collect();
        let fit = power_law_fit(&xs, &ys).unwrap();
        prop_assert!((fit.p - p).abs() < 1e-4, "p {} vs {}", fit.p, p);
        prop_assert!(close(fit.a, a, 1e-3));
        prop_assert!((fit.c - c).abs() < 1e-5);
    }

    #[test]
    fn execution_modes_agree(xs in prop::collection::vec(-1e6f64..1e6, 0..200)) {
        let f = |x: &f64| (x * 1.5).sin() + x;
        prop_assert_eq!(Execution::Sequential.map(&xs, f), Execution::Parallel.map(&xs, f));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn generalized_eigenpairs_are_sound((h, s) in (2usize..9).prop_flat_map(pencil)) {
        let sp = solve_generalized(&h, &s, 1e-10).unwrap();
        prop_assert_eq!(sp.retained_dim, h.nrows());
        prop_assert!(sp.energies.windows(2).all(|w| w[0] <= w[1]));
        let scale = h.abs().max().max(1.0);
        for (k, e) in sp.energies.iter().enumerate() {
            let c = sp.coefficients.column(k);
            let norm = (c.transpose() * &s * c)[(0, 0)];
            prop_assert!((norm - 1.0).abs() < 1e-8, "norm {norm}");
            let res = (&h * c - &s * c * *e).abs().max();
            prop_assert!(res < 1e-7 * scale * s.norm(), "residual {res}");
        }
    }

    #[test]
    fn exciton_probability_is_normalised_and_non_negative(
        coeffs in prop::collection::vec(-1.0f64..1.0, 6),
        r in 0.02f64..0.4,
    ) {
        prop_assume!(coeffs.iter().any(|c| c.abs() > 1e-3));
        let b = BasisSpec::one_particle(vec![0.2, 3.0, 40.0], Model::TwoD, r).unwrap();
        let mut c = coeffs;
        normalise(&mut c, &assemble_overlap(&b));
        let g = exciton_probability(&c, &b, 65).unwrap();
        prop_assert!(g.values.iter().all(|v| *v >= 0.0));
        prop_assert!((g.integral() - 1.0).abs() < 1e-6);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn trion_probability_is_normalised_non_negative_and_symmetric(
        coeffs in prop::collection::vec(-1.0f64..1.0, 32),
        r in 0.02f64..0.4,
    ) {
        let axial = AxialBasis { alphas_i: vec![0.3, 5.0], alphas_j: vec![0.3, 5.0], alphas_k: vec![0.01, 2.0] };
        let b = BasisSpec::two_particle(axial, Model::TwoD, r).unwrap();
        prop_assert_eq!(b.len(), 32);
        // Symmetrise under electron exchange so P(θ1, θ2) = P(θ2, θ1).
        let mut c = coeffs.clone();
        for n in 0..b.len() {
            let (i, j, k, l) = b.decode(n);
            let m = b.encode(j, i, k, match l { 1 => 2, 2 => 1, x => x });
            c[n] = coeffs[n] + coeffs[m];
        }
        prop_assume!(c.iter().any(|x| x.abs() > 1e-3));
        normalise(&mut c, &assemble_overlap(&b));
        let g = trion_probability(&c, &b, 33).unwrap();
        prop_assert!(g.values.iter().all(|v| *v >= 0.0));
        prop_assert!((g.integral() - 1.0).abs() < 1e-6);
        let n = g.size();
        let peak = g.values.iter().fold(0.0f64, |a, b| a.max(*b));
        for i in 0..n {
            for j in 0..n {
                prop_assert!((g.at(i, j) - g.at(j, i)).abs() <= 1e-10 * peak);
                prop_assert!((g.at(i, j) - g.at(n - 1 - i, n - 1 - j)).abs() <= 1e-10 * peak);
            }
        }
    }
}
