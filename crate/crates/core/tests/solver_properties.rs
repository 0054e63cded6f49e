use nalgebra::DMatrix;
use trionlab::analysis::{linspace, log_log_fit, sweep_model_comparison, Method, SigmaCase};
use trionlab::assembly::{assemble_exciton, Charge, Numerics};
use trionlab::basis::{AxialBasis, BasisSpec, Model, PresetKind};
use trionlab::hf::{scf, ScfSettings};
use trionlab::solver::{solve_generalized, BindingSolver, ModelBases};
use trionlab::Execution;

fn numerics() -> Numerics {
    Numerics::default()
}

fn remove(m: &DMatrix<f64>, k: usize) -> DMatrix<f64> {
    m.clone().remove_row(k).remove_column(k)
}

#[test]
fn duplicated_function_is_dropped_and_spectrum_kept() {
    let r = 0.1;
    let mut alphas = vec![0.143, 1.16, 4.98, 29.0, 250.0];
    let reduced = assemble_exciton(&BasisSpec::one_particle(alphas.clone(), Model::TwoD, r).unwrap(), r, &numerics())
        .unwrap();
    alphas.insert(3, 4.98);
    let dup = assemble_exciton(&BasisSpec::one_particle(alphas, Model::TwoD, r).unwrap(), r, &numerics()).unwrap();

    let a = solve_generalized(&reduced.hamiltonian(), &reduced.s, 1e-10).unwrap();
    let b = solve_generalized(&dup.hamiltonian(), &dup.s, 1e-10).unwrap();
    // Two angular functions per Gaussian: the duplicate adds two dependent columns.
    assert_eq!(b.retained_dim, dup.s.nrows() - 2);
    assert_eq!(b.retained_dim, a.retained_dim);
    for (x, y) in a.energies.iter().zip(&b.energies) {
        assert!((x - y).abs() < 1e-8 * x.abs().max(1.0), "{x} vs {y}");
    }
}

#[test]
fn constructed_rank_deficient_pencil_matches_reduced_solve() {
    // S = Tᵀ S0 T and H = Tᵀ H0 T with T copying column 1 into a new column.
    let s0 = DMatrix::from_row_slice(3, 3, &[2.0, 0.3, 0.1, 0.3, 1.5, 0.2, 0.1, 0.2, 1.0]);
    let h0 = DMatrix::from_row_slice(3, 3, &[-1.0, 0.4, 0.0, 0.4, 0.5, -0.2, 0.0, -0.2, 2.0]);
    let t = DMatrix::from_row_slice(3, 4, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0]);
    let s = t.transpose() * &s0 * &t;
    let h = t.transpose() * &h0 * &t;
    let full = solve_generalized(&h, &s, 1e-10).unwrap();
    let reduced = solve_generalized(&h0, &s0, 1e-10).unwrap();
    assert_eq!(full.retained_dim, 3);
    for (x, y) in full.energies.iter().zip(&reduced.energies) {
        assert!((x - y).abs() < 1e-12);
    }
    let c = full.coefficients.column(0);
    let norm = (c.transpose() * &s * c)[(0, 0)];
    assert!((norm - 1.0).abs() < 1e-12);
}

#[test]
fn ground_state_is_symmetric_under_electron_exchange() {
    for (model, sigma) in [(Model::TwoD, 0.0), (Model::TwoD, 0.7), (Model::OneD, 0.4)] {
        let solver = BindingSolver::preset(model, &numerics()).unwrap();
        let basis = BasisSpec::preset(PresetKind::trion(model));
        let c = solver.trion_spectrum(0.12, sigma, Charge::Negative).unwrap().ground_state();
        let cmax = c.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        for n in 0..basis.len() {
            let (i, j, k, l) = basis.decode(n);
            let l_swapped = match l {
                1 => 2,
                2 => 1,
                x => x,
            };
            let m = basis.encode(j, i, k, l_swapped);
            assert!((c[n] - c[m]).abs() < 1e-6 * cmax, "{model:?} σ={sigma}: c[{n}]={} c[{m}]={}", c[n], c[m]);
        }
    }
}

#[test]
fn removing_basis_functions_never_lowers_the_energy() {
    let r = 0.15;
    for (kind, model) in [(PresetKind::Trion1D, Model::OneD), (PresetKind::Trion2D, Model::TwoD)] {
        let basis = BasisSpec::preset(kind).at_radius(r).unwrap();
        let t = trionlab::assembly::assemble_trion(&basis, r, &numerics()).unwrap().triple(0.5);
        let (h, s) = (t.hamiltonian(), t.s.clone());
        let full = solve_generalized(&h, &s, 1e-10).unwrap().ground_energy();
        for k in [0, 7, basis.len() / 2, basis.len() - 1] {
            let e = solve_generalized(&remove(&h, k), &remove(&s, k), 1e-10).unwrap().ground_energy();
            assert!(e >= full - 1e-9, "{model:?}: removing {k} gave {e} < {full}");
        }
    }
    // Dropping whole exponents from the exciton basis through the public path.
    let full = trionlab::solver::exciton_energy(0.1, Model::TwoD, &BasisSpec::preset(PresetKind::Exciton2D), &numerics())
        .unwrap();
    let mut alphas = vec![0.143, 1.16, 4.98, 29.0, 250.0];
    while alphas.len() > 1 {
        alphas.remove(alphas.len() / 2);
        let b = BasisSpec::one_particle(alphas.clone(), Model::TwoD, 0.1).unwrap();
        let e = trionlab::solver::exciton_energy(0.1, Model::TwoD, &b, &numerics()).unwrap();
        assert!(e >= full - 1e-12);
    }
}

#[test]
fn exciton_binding_follows_power_law_in_radius() {
    let solver = BindingSolver::preset(Model::TwoD, &numerics()).unwrap();
    let rs = linspace(0.05, 0.25, 9);
    let ex: Vec<f64> = rs.iter().map(|&r| -solver.exciton_energy(r).unwrap()).collect();
    assert!(ex.iter().all(|e| *e > 0.0));
    let fit = log_log_fit(&rs, &ex).unwrap();
    assert!((fit.exponent + 0.6).abs() <= 0.05, "slope {}", fit.exponent);
}

#[test]
fn trions_are_bound_in_both_models_at_every_radius() {
    let one = BindingSolver::preset(Model::OneD, &numerics()).unwrap();
    let two = BindingSolver::preset(Model::TwoD, &numerics()).unwrap();
    for r in trionlab::analysis::default_r_grid() {
        for s in [&one, &two] {
            let t = s.solve(r, 0.0, Charge::Negative).unwrap();
            assert!(t.is_stable() && t.e_x < 0.0, "r={r}: {t:?}");
        }
    }
}

/// Model ordering with the same axial functions on both sides, so the only
/// difference is the angular freedom.
#[test]
fn angular_freedom_raises_binding_and_matters_less_at_small_radius() {
    let set = vec![0.0651, 0.145, 1.68, 9.65, 48.7];
    let axial = AxialBasis { alphas_i: set.clone(), alphas_j: set.clone(), alphas_k: set };
    let bases = |model| ModelBases {
        exciton: BasisSpec::preset(PresetKind::exciton(model)),
        trion: BasisSpec::two_particle(axial.clone(), model, 0.1).unwrap(),
    };
    let one = BindingSolver::new(Model::OneD, &bases(Model::OneD), &numerics()).unwrap();
    let two = BindingSolver::new(Model::TwoD, &bases(Model::TwoD), &numerics()).unwrap();
    let mut last_gap = f64::INFINITY;
    for r in trionlab::analysis::default_r_grid().into_iter().rev() {
        let (a, b) = (one.solve(r, 0.0, Charge::Negative).unwrap(), two.solve(r, 0.0, Charge::Negative).unwrap());
        assert!(b.e_t <= a.e_t, "r={r}");
        assert!(b.e_b >= a.e_b, "r={r}: 2D {} < 1D {}", b.e_b, a.e_b);
        let gap = (b.e_b - a.e_b) / b.e_b;
        assert!(gap <= last_gap + 1e-12, "r={r}: gap {gap} grew from {last_gap}");
        last_gap = gap;
    }
}

/// The same ordering through the stock bases, which are tuned at r = 0.1
/// and only rescaled. Known to fail below r ≈ 0.045; see the README.
#[test]
fn preset_bases_keep_the_model_ordering_at_every_radius() {
    let one = BindingSolver::preset(Model::OneD, &numerics()).unwrap();
    let two = BindingSolver::preset(Model::TwoD, &numerics()).unwrap();
    let mut last_gap = f64::INFINITY;
    let mut violations = Vec::new();
    for r in trionlab::analysis::default_r_grid().into_iter().rev() {
        let (a, b) = (one.solve(r, 0.0, Charge::Negative).unwrap(), two.solve(r, 0.0, Charge::Negative).unwrap());
        let gap = (b.e_b - a.e_b) / b.e_b;
        if b.e_b < a.e_b || gap > last_gap + 1e-12 {
            violations.push(format!("r={r:.4}: E_B 1D {:.5} 2D {:.5} gap {:.2}%", a.e_b, b.e_b, 100.0 * gap));
        }
        last_gap = gap;
    }
    assert!(violations.is_empty(), "ordering violated:\n{}", violations.join("\n"));
}

#[test]
fn charge_conjugation_at_equal_masses() {
    let solver = BindingSolver::preset(Model::TwoD, &numerics()).unwrap();
    let a = solver.trion_energy(0.2, 1.0, Charge::Negative).unwrap();
    let b = solver.trion_energy(0.2, 1.0, Charge::Positive).unwrap();
    assert_eq!(a, b);
    // σ → 1/σ maps S⁺ at σ onto S⁻ at 1/σ.
    let c = solver.trion_energy(0.2, 0.5, Charge::Positive).unwrap();
    let d = solver.trion_energy(0.2, 2.0, Charge::Negative).unwrap();
    assert!((c - d).abs() < 1e-12 * c.abs());
}

#[test]
fn mass_fraction_changes_binding_only_slightly() {
    let solver = BindingSolver::preset(Model::TwoD, &numerics()).unwrap();
    let a = solver.solve(0.1, 0.8, Charge::Negative).unwrap().e_b;
    let b = solver.solve(0.1, 1.0, Charge::Negative).unwrap().e_b;
    assert!(((a - b) / b).abs() < 0.10);
}

#[test]
fn hartree_fock_underbinds_and_stays_above_the_full_energy() {
    let settings = ScfSettings::default();
    for model in [Model::OneD, Model::TwoD] {
        let solver = BindingSolver::preset(model, &numerics()).unwrap();
        let hf_basis = BasisSpec::preset(PresetKind::hf(model));
        for r in [0.05, 0.1, 0.2, 0.3] {
            let st = scf(&hf_basis, r, &settings, &numerics()).unwrap();
            assert!(st.converged && st.residual < settings.tol);
            let full = solver.solve(r, 0.0, Charge::Negative).unwrap();
            assert!(st.e_t_hf >= full.e_t, "{model:?} r={r}");
            assert!(full.e_x - st.e_t_hf < full.e_b, "{model:?} r={r}");
        }
    }
}

/// A trion basis whose axial lists cover both stock sets, adequate down to
/// r ≈ 0.03 where the stock 2D set is already too compact.
fn wide_trion_basis() -> BasisSpec {
    let pair = vec![0.0651, 0.145, 0.165, 1.68, 9.65, 48.7];
    let axial = AxialBasis { alphas_i: pair.clone(), alphas_j: pair, alphas_k: vec![0.0000171, 0.0651, 0.145, 1.68, 9.98, 48.7] };
    BasisSpec::two_particle(axial, Model::TwoD, 0.1).unwrap()
}

#[test]
fn hartree_fock_ratio_falls_monotonically_towards_small_radius() {
    let bases = ModelBases { exciton: BasisSpec::preset(PresetKind::Exciton2D), trion: wide_trion_basis() };
    let solver = BindingSolver::new(Model::TwoD, &bases, &numerics()).unwrap();
    let mut last = f64::INFINITY;
    for r in linspace(0.05, 0.3, 11).into_iter().rev() {
        let hf = trionlab::hf::hf_binding_energy(r, Model::TwoD, &ScfSettings::default(), &numerics()).unwrap();
        let ratio = hf.e_b_hf / solver.solve(r, 0.0, Charge::Negative).unwrap().e_b;
        assert!(ratio <= last, "r={r}: ratio {ratio} above {last}");
        last = ratio;
    }
    assert!((0.4..0.5).contains(&last), "{last}");
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(f)
}

#[test]
fn sweeps_are_identical_across_thread_counts_and_modes() {
    let grid = [0.05, 0.1, 0.2];
    let cases = [
        SigmaCase { sigma: 0.0, charge: Charge::Negative },
        SigmaCase { sigma: 0.8, charge: Charge::Positive },
    ];
    let run = |exec: Execution| {
        let n = numerics().with_exec(exec);
        format!(
            "{:?}",
            sweep_model_comparison(&grid, &cases, &[Model::OneD, Model::TwoD], &[Method::Full, Method::HartreeFock], &n)
                .unwrap()
        )
    };
    let seq = run(Execution::Sequential);
    assert_eq!(seq, in_pool(1, || run(Execution::Parallel)));
    assert_eq!(seq, in_pool(4, || run(Execution::Parallel)));
}

#[test]
fn scf_history_is_identical_across_thread_counts() {
    let b = BasisSpec::preset(PresetKind::Hf2D);
    let run = || format!("{:?}", scf(&b, 0.15, &ScfSettings::default(), &numerics()).unwrap());
    assert_eq!(in_pool(1, run), in_pool(3, run));
}
