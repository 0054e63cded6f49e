//! One function per subcommand, each producing a [`Table`].

use trionlab::analysis::{
    exciton_probability, hf_difference, hf_probability, linspace, sweep_epsilon, sweep_model_comparison,
    sweep_species, trion_probability, Method, SigmaCase, SpeciesEnergies,
};
use trionlab::assembly::{Charge, Numerics, QuadratureSpec};
use trionlab::basis::{BasisSpec, Model, PresetKind};
use trionlab::hf::{hf_binding_energy, scf, ScfSettings};
use trionlab::optimize::{optimize, Objective, OptimizerSettings};
use trionlab::solver::BindingSolver;
use trionlab::tb::{
    band_edges, effective_masses, radius, ChiralIndex, CuttingLines, EffectiveMasses, MassConvention,
    TightBindingParams,
};
use trionlab::units::{dimensionless_radius, effective_units, EffectiveUnits, Environment};
use trionlab::{Error, Result};

use crate::args::{
    ChargeArg, Chirality, Command, MassConventionArg, MethodArg, ModelArg, PhysicsOptions, ProbabilityKind,
    ProblemArg, RadiusSource,
};
use crate::output::{Cell, Table};

const ENERGY_UNITS: &str = "Ry = effective Rydberg Ry*, aB = effective Bohr radius a_B*, A = angstrom";
const SIGN_NOTE: &str = "E_X_Ry and E_T_Ry are signed ground-state energies; binding energies are positive";

pub fn tb_params(p: &PhysicsOptions) -> TightBindingParams {
    TightBindingParams {
        t: p.hopping,
        s: p.overlap,
        a: p.lattice_constant,
        mass_convention: match p.mass_convention {
            MassConventionArg::Lattice => MassConvention::LatticeUnits,
            MassConventionArg::Physical => MassConvention::Physical,
        },
        ..TightBindingParams::default()
    }
}

pub fn numerics(p: &PhysicsOptions) -> Result<Numerics> {
    let quad = QuadratureSpec {
        rel_tol: p.rel_tol,
        abs_tol: p.abs_tol,
        max_subdivisions: p.max_subdivisions,
        angular_order: p.angular_order,
    };
    quad.validate()?;
    if !(p.drop_tol > 0.0 && p.drop_tol < 1.0) {
        return Err(Error::Domain(format!("drop_tol must be in (0, 1), got {}", p.drop_tol)));
    }
    Ok(Numerics { quad, drop_tol: p.drop_tol, ..Numerics::default() })
}

fn model(m: ModelArg) -> Model {
    match m {
        ModelArg::OneD => Model::OneD,
        ModelArg::TwoD => Model::TwoD,
    }
}

fn charge(c: ChargeArg) -> Charge {
    match c {
        ChargeArg::Negative => Charge::Negative,
        ChargeArg::Positive => Charge::Positive,
    }
}

fn chiral(c: Chirality) -> Result<ChiralIndex> {
    ChiralIndex::new(c.0, c.1)
}

struct Tube {
    ch: ChiralIndex,
    epsilon: f64,
    masses: EffectiveMasses,
    units: EffectiveUnits,
}

/// Dimensionless radius, plus the tube it came from if any.
fn resolve(src: &RadiusSource, tb: &TightBindingParams) -> Result<(f64, Option<Tube>)> {
    match (src.r, src.chirality) {
        (Some(r), _) => Ok((r, None)),
        (None, Some(c)) => {
            let ch = chiral(c)?;
            let masses = effective_masses(ch, tb)?;
            let units = effective_units(masses.mu, Environment::new(src.epsilon)?)?;
            let r = dimensionless_radius(radius(ch, tb.a), &units)?;
            Ok((r, Some(Tube { ch, epsilon: src.epsilon, masses, units })))
        }
        (None, None) => Err(Error::Domain("either --r or --chirality is required".into())),
    }
}

/// `n, m, epsilon, Ry_star_eV` cells, empty without a tube.
fn tube_cells(t: &Option<Tube>) -> Vec<Cell> {
    match t {
        Some(t) => vec![t.ch.n().into(), t.ch.m().into(), t.epsilon.into(), t.units.rydberg.into()],
        None => vec![Cell::Empty; 4],
    }
}

/// Band-edge masses of the tube, for reference next to the energies.
fn tube_notes(t: &mut Table, tube: &Option<Tube>) {
    if let Some(tube) = tube {
        t.note("m_e_m0", tube.masses.m_e);
        t.note("m_h_m0", tube.masses.m_h);
        t.note("mu_m0", tube.masses.mu);
        t.note("tube_sigma", tube.masses.sigma);
    }
}

fn to_mev(e: f64, t: &Option<Tube>) -> Cell {
    t.as_ref().map(|t| e * t.units.rydberg * 1e3).into()
}

pub fn run(cmd: &Command, phys: &PhysicsOptions) -> Result<Table> {
    let tb = tb_params(phys);
    tb.validate()?;
    let num = numerics(phys)?;
    match cmd {
        Command::Masses { chirality, epsilon } => masses(*chirality, *epsilon, &tb),
        Command::Bands { chirality, points, subbands } => bands(*chirality, *points, *subbands, &tb),
        Command::Exciton { radius, model: m } => exciton(radius, model(*m), &tb, &num),
        Command::Trion { radius, model: m, sigma, charge: c } => trion(radius, model(*m), *sigma, charge(*c), &tb, &num),
        Command::Hf { radius, model: m } => hf(radius, model(*m), &tb, &num),
        Command::Optimize { problem, model: m, r0, max_steps, energy_tol } => {
            run_optimizer(*problem, model(*m), *r0, *max_steps, *energy_tol, &num)
        }
        Command::Probability { kind, r, model: m, grid } => probability(*kind, *r, model(*m), *grid, &num),
        Command::SweepRadius { from, to, points, models, methods, sigmas, charge: c } => {
            sweep_radius(linspace(*from, *to, *points), models, methods, sigmas, charge(*c), &num)
        }
        Command::SweepSigma { r, from, to, points, models, charge: c } => {
            sweep_sigma(*r, linspace(*from, *to, *points), models, charge(*c), &num)
        }
        Command::SweepEpsilon { chirality, from, to, points } => {
            epsilon_table(*chirality, linspace(*from, *to, *points), &tb, &num)
        }
        Command::SweepSpecies { r_min, r_max, epsilon } => species_table(*r_min, *r_max, *epsilon, &tb, &num),
    }
}

fn masses(c: Chirality, epsilon: f64, tb: &TightBindingParams) -> Result<Table> {
    let ch = chiral(c)?;
    let edges = band_edges(ch, tb)?;
    let m = effective_masses(ch, tb)?;
    let u = effective_units(m.mu, Environment::new(epsilon)?)?;
    let rad = radius(ch, tb.a);
    let mut t = Table::new(&[
        "n", "m", "radius_A", "gap_eV", "m_e_m0", "m_h_m0", "mu_m0", "sigma", "epsilon", "Ry_star_eV", "aB_star_A",
        "r_aB",
    ]);
    t.unit("masses in free-electron masses m0; Ry_star_eV and aB_star_A are the effective units at epsilon");
    t.push(vec![
        ch.n().into(),
        ch.m().into(),
        rad.into(),
        edges.gap.into(),
        m.m_e.into(),
        m.m_h.into(),
        m.mu.into(),
        m.sigma.into(),
        epsilon.into(),
        u.rydberg.into(),
        u.bohr.into(),
        dimensionless_radius(rad, &u)?.into(),
    ]);
    Ok(t)
}

fn bands(c: Chirality, points: usize, subbands: usize, tb: &TightBindingParams) -> Result<Table> {
    let ch = chiral(c)?;
    if points < 2 || subbands == 0 {
        return Err(Error::Domain("need at least 2 points and 1 subband".into()));
    }
    let lines = CuttingLines::new(ch.n(), ch.m(), tb);
    let ks = lines.k_samples(points);
    // Lines mu and N - mu are time-reversal partners; keep one of each.
    let mut gaps: Vec<(f64, usize)> = (0..=lines.count / 2)
        .map(|mu| {
            let g = ks.iter().map(|&k| {
                let (v, c) = lines.energies(mu, k, tb);
                c - v
            });
            (g.fold(f64::INFINITY, f64::min), mu)
        })
        .collect();
    gaps.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut t = Table::new(&["subband_rank", "line", "k_per_A", "E_valence_eV", "E_conduction_eV"]);
    t.unit("k along the tube axis in 1/A over the 1D zone [-pi/T, pi/T)");
    t.note("line_count", lines.count);
    t.note("period_A", lines.period);
    for (rank, &(_, mu)) in gaps.iter().take(subbands).enumerate() {
        for &k in &ks {
            let (v, c) = lines.energies(mu, k, tb);
            t.push(vec![(rank + 1).into(), mu.into(), k.into(), v.into(), c.into()]);
        }
    }
    Ok(t)
}

fn exciton(src: &RadiusSource, m: Model, tb: &TightBindingParams, num: &Numerics) -> Result<Table> {
    let (r, tube) = resolve(src, tb)?;
    let e_x = BindingSolver::preset(m, num)?.exciton_energy(r)?;
    let mut t = Table::new(&["n", "m", "epsilon", "Ry_star_eV", "r_aB", "model", "E_X_Ry", "exciton_binding_meV"]);
    t.unit(ENERGY_UNITS);
    t.unit(SIGN_NOTE);
    tube_notes(&mut t, &tube);
    let mut row = tube_cells(&tube);
    row.extend([r.into(), m.label().into(), e_x.into(), to_mev(-e_x, &tube)]);
    t.push(row);
    Ok(t)
}

fn trion(src: &RadiusSource, m: Model, sigma: f64, c: Charge, tb: &TightBindingParams, num: &Numerics) -> Result<Table> {
    let (r, tube) = resolve(src, tb)?;
    let res = BindingSolver::preset(m, num)?.solve(r, sigma, c)?;
    let mut t = Table::new(&[
        "n", "m", "epsilon", "Ry_star_eV", "r_aB", "model", "sigma", "charge", "E_X_Ry", "E_T_Ry", "E_B_Ry", "stable",
        "E_B_meV",
    ]);
    t.unit(ENERGY_UNITS);
    t.unit(SIGN_NOTE);
    tube_notes(&mut t, &tube);
    let mut row = tube_cells(&tube);
    row.extend([
        r.into(),
        m.label().into(),
        sigma.into(),
        c.symbol().into(),
        res.e_x.into(),
        res.e_t.into(),
        res.e_b.into(),
        res.is_stable().into(),
        to_mev(res.e_b, &tube),
    ]);
    t.push(row);
    Ok(t)
}

fn hf(src: &RadiusSource, m: Model, tb: &TightBindingParams, num: &Numerics) -> Result<Table> {
    let (r, tube) = resolve(src, tb)?;
    let res = hf_binding_energy(r, m, &ScfSettings::default(), num)?;
    let mut t = Table::new(&[
        "n", "m", "epsilon", "Ry_star_eV", "r_aB", "model", "E_X_Ry", "E_T_HF_Ry", "E_B_HF_Ry", "iterations",
        "converged", "E_B_HF_meV",
    ]);
    t.unit(ENERGY_UNITS);
    t.unit(SIGN_NOTE);
    t.note("exciton_reference", "full variational exciton of the same model");
    t.note("sigma", 0.0);
    tube_notes(&mut t, &tube);
    let mut row = tube_cells(&tube);
    row.extend([
        r.into(),
        m.label().into(),
        res.e_x.into(),
        res.e_t_hf.into(),
        res.e_b_hf.into(),
        res.iterations.into(),
        res.converged.into(),
        to_mev(res.e_b_hf, &tube),
    ]);
    t.push(row);
    Ok(t)
}

fn run_optimizer(p: ProblemArg, m: Model, r0: f64, max_steps: usize, energy_tol: f64, num: &Numerics) -> Result<Table> {
    let (objective, kind) = match p {
        ProblemArg::Exciton => (Objective::Exciton(m), PresetKind::exciton(m)),
        ProblemArg::Trion => (Objective::Trion(m), PresetKind::trion(m)),
        ProblemArg::Hf => (Objective::HartreeFock(m), PresetKind::hf(m)),
    };
    let settings = OptimizerSettings { max_steps, energy_tol, ..OptimizerSettings::default() };
    let run = optimize(objective, &BasisSpec::preset(kind), r0, &settings, num)?;
    let mut t = Table::new(&["list", "index", "initial_per_aB2", "final_per_aB2"]);
    t.unit("exponents in 1/a_B*^2 at r0; objectives in Ry*");
    t.note("r0_aB", r0);
    t.note("initial_objective_Ry", run.initial_objective());
    t.note("final_objective_Ry", run.final_objective());
    t.note("accepted_steps", run.accepted);
    t.note("rejected_steps", run.rejected);
    t.note("converged", run.converged);
    t.note("abort_reason", run.abort_reason.clone());
    let lists = [
        ("i", &run.initial.alphas_i, &run.final_exponents.alphas_i),
        ("j", &run.initial.alphas_j, &run.final_exponents.alphas_j),
        ("k", &run.initial.alphas_k, &run.final_exponents.alphas_k),
    ];
    for (name, a, b) in lists {
        for (idx, (x, y)) in a.iter().zip(b.iter()).enumerate() {
            t.push(vec![name.into(), (idx + 1).into(), (*x).into(), (*y).into()]);
        }
    }
    Ok(t)
}

fn probability(kind: ProbabilityKind, r: f64, m: Model, grid: usize, num: &Numerics) -> Result<Table> {
    let solver = BindingSolver::preset(m, num)?;
    let at = |k: PresetKind| BasisSpec::preset(k).at_radius(r);
    let mut t;
    match kind {
        ProbabilityKind::Exciton => {
            let c = solver.exciton_spectrum(r)?.ground_state();
            let g = exciton_probability(&c, &at(PresetKind::exciton(m))?, grid)?;
            t = Table::new(&["theta_rad", "P_per_rad"]);
            t.note("raw_integral", g.raw_integral);
            for (th, v) in g.theta.iter().zip(&g.values) {
                t.push(vec![(*th).into(), (*v).into()]);
            }
        }
        ProbabilityKind::Trion => {
            let c = solver.trion_spectrum(r, 0.0, Charge::Negative)?.ground_state();
            let g = trion_probability(&c, &at(PresetKind::trion(m))?, grid)?;
            t = Table::new(&["theta1_rad", "theta2_rad", "P_per_rad2"]);
            t.note("raw_integral", g.raw_integral);
            t.note("contrast_max_over_min", g.contrast());
            for i in 0..g.size() {
                for j in 0..g.size() {
                    t.push(vec![g.theta[i].into(), g.theta[j].into(), g.at(i, j).into()]);
                }
            }
        }
        ProbabilityKind::HfDifference => {
            let c = solver.trion_spectrum(r, 0.0, Charge::Negative)?.ground_state();
            let full = trion_probability(&c, &at(PresetKind::trion(m))?, grid)?;
            let st = scf(&BasisSpec::preset(PresetKind::hf(m)), r, &ScfSettings::default(), num)?;
            if !st.converged {
                return Err(Error::Domain(format!("SCF did not converge at r={r}")));
            }
            let hf = hf_probability(&st.orbital_coeffs, &at(PresetKind::hf(m))?, grid)?;
            let d = hf_difference(&full, &hf)?;
            let (lo, hi) = d.range();
            let (i, j) = d.argmax_abs();
            t = Table::new(&["theta1_rad", "theta2_rad", "difference_percent"]);
            t.note("min_percent", lo);
            t.note("max_percent", hi);
            t.note("largest_at_theta1_rad", d.theta[i]);
            t.note("largest_at_theta2_rad", d.theta[j]);
            t.note("guarded_points", d.guarded);
            let n = d.theta.len();
            for a in 0..n {
                for b in 0..n {
                    t.push(vec![d.theta[a].into(), d.theta[b].into(), d.percent[a * n + b].into()]);
                }
            }
        }
    }
    t.unit("densities normalised to unit trapezoidal integral over [-pi, pi] per angle");
    t.note("r_aB", r);
    t.note("model", m.label());
    Ok(t)
}

const MODEL_ROW_COLUMNS: [&str; 10] =
    ["r_aB", "sigma", "model", "method", "charge", "E_X_Ry", "E_T_Ry", "E_B_Ry", "converged", "error"];

fn model_row_cells(r: &trionlab::analysis::ModelRow) -> Vec<Cell> {
    vec![
        r.r.into(),
        r.sigma.into(),
        r.model.label().into(),
        r.method.label().into(),
        r.charge.symbol().into(),
        r.e_x.into(),
        r.e_t.into(),
        r.e_b.into(),
        r.converged.into(),
        r.error.clone().into(),
    ]
}

fn sweep_radius(
    grid: Vec<f64>,
    models: &[ModelArg],
    methods: &[MethodArg],
    sigmas: &[f64],
    c: Charge,
    num: &Numerics,
) -> Result<Table> {
    let models: Vec<Model> = models.iter().map(|m| model(*m)).collect();
    let methods: Vec<Method> = methods
        .iter()
        .map(|m| match m {
            MethodArg::Full => Method::Full,
            MethodArg::Hf => Method::HartreeFock,
        })
        .collect();
    let cases: Vec<SigmaCase> = sigmas.iter().map(|&sigma| SigmaCase { sigma, charge: c }).collect();
    let rows = sweep_model_comparison(&grid, &cases, &models, &methods, num)?;
    let mut t = Table::new(&MODEL_ROW_COLUMNS);
    t.unit(ENERGY_UNITS);
    t.unit(SIGN_NOTE);
    t.note("hf_rows", "static-hole negative trion only (sigma = 0, charge -)");
    for r in &rows {
        t.push(model_row_cells(r));
    }
    Ok(t)
}

fn sweep_sigma(r: f64, sigmas: Vec<f64>, models: &[ModelArg], c: Charge, num: &Numerics) -> Result<Table> {
    let models: Vec<Model> = models.iter().map(|m| model(*m)).collect();
    let cases: Vec<SigmaCase> = sigmas.iter().map(|&sigma| SigmaCase { sigma, charge: c }).collect();
    let rows = sweep_model_comparison(&[r], &cases, &models, &[Method::Full], num)?;
    let mut columns = MODEL_ROW_COLUMNS.to_vec();
    columns.push("E_B_deviation_percent");
    let mut t = Table::new(&columns);
    t.unit(ENERGY_UNITS);
    t.unit("E_B_deviation_percent relative to sigma = 0, charge - of the same model");
    for &m in &models {
        let reference = BindingSolver::preset(m, num)?.solve(r, 0.0, Charge::Negative)?.e_b;
        let mut worst: f64 = 0.0;
        for row in rows.iter().filter(|x| x.model == m) {
            let dev = row.e_b.map(|e| 100.0 * (e - reference) / reference);
            worst = worst.max(dev.unwrap_or(0.0).abs());
            let mut cells = model_row_cells(row);
            cells.push(dev.into());
            t.push(cells);
        }
        t.note(&format!("max_abs_deviation_percent_{}", m.label()), worst);
    }
    Ok(t)
}

fn epsilon_table(c: Chirality, grid: Vec<f64>, tb: &TightBindingParams, num: &Numerics) -> Result<Table> {
    let s = sweep_epsilon(chiral(c)?, &grid, tb, num)?;
    let mut t = Table::new(&[
        "epsilon", "Ry_star_eV", "aB_star_A", "r_aB", "E_X_Ry", "E_T_Ry", "E_B_Ry", "exciton_binding_meV", "E_B_meV",
    ]);
    t.unit(ENERGY_UNITS);
    t.unit("2D model, negative trion with a static hole (sigma = 0)");
    t.note("chirality", format!("{},{}", s.chirality.n(), s.chirality.m()));
    t.note("m_e_m0", s.masses.m_e);
    t.note("m_h_m0", s.masses.m_h);
    t.note("mu_m0", s.masses.mu);
    if let Some(f) = s.fit {
        t.note("fit", "E_B_eV = A * epsilon^p + C");
        t.note("fit_A_eV", f.a);
        t.note("fit_p", f.p);
        t.note("fit_C_eV", f.c);
        t.note("fit_residual_eV", f.residual);
        t.note("fit_at_epsilon_3.5_meV", f.eval(3.5) * 1e3);
    }
    if let Some(x) = s.exciton_fit {
        t.note("exciton_fit", "exciton_binding_eV = prefactor * epsilon^exponent");
        t.note("exciton_fit_prefactor_eV", x.prefactor);
        t.note("exciton_fit_exponent", x.exponent);
    }
    t.note("fit_error", s.fit_error.clone());
    for r in &s.rows {
        t.push(vec![
            r.epsilon.into(),
            r.rydberg_ev.into(),
            r.bohr_a.into(),
            r.r.into(),
            r.e_x.into(),
            r.e_t.into(),
            r.e_b.into(),
            r.exciton_binding_mev.into(),
            r.e_b_mev.into(),
        ]);
    }
    Ok(t)
}

fn species_table(r_min: f64, r_max: f64, epsilon: f64, tb: &TightBindingParams, num: &Numerics) -> Result<Table> {
    let s = sweep_species(r_min, r_max, epsilon, &[Model::OneD, Model::TwoD], tb, num)?;
    let mut t = Table::new(&[
        "n",
        "m",
        "radius_A",
        "m_e_m0",
        "m_h_m0",
        "mu_m0",
        "sigma",
        "Ry_star_eV",
        "aB_star_A",
        "r_aB",
        "exciton_binding_1d_meV",
        "E_B_minus_1d_meV",
        "E_B_plus_1d_meV",
        "exciton_binding_2d_meV",
        "E_B_minus_2d_meV",
        "E_B_plus_2d_meV",
        "improvement_percent",
        "detectable",
        "error",
    ]);
    t.unit("minus/plus = negative/positive trion at the tube's own mass fraction");
    t.unit("improvement_percent = 100 * (E_B_2d - E_B_1d) / E_B_2d for the negative trion");
    t.unit("detectable = 2D negative-trion E_B above k_B T = 26 meV");
    t.note("epsilon", epsilon);
    let sum = &s.summary;
    t.note("species", sum.species);
    t.note("failures", sum.failures);
    t.note("improvement_max_percent", sum.improvement_max_percent);
    t.note("improvement_mean_percent", sum.improvement_mean_percent);
    t.note("detectable_species", sum.detectable);
    t.note("detectability_boundary_A", sum.boundary_radius_a);
    let energies = |e: &Option<SpeciesEnergies>| -> [Cell; 3] {
        match e {
            Some(e) => [e.exciton_binding_mev.into(), e.negative_mev.into(), e.positive_mev.into()],
            None => [Cell::Empty, Cell::Empty, Cell::Empty],
        }
    };
    for r in &s.rows {
        let mut row: Vec<Cell> = vec![r.chirality.n().into(), r.chirality.m().into(), r.radius_a.into()];
        match r.masses {
            Some(m) => row.extend([m.m_e.into(), m.m_h.into(), m.mu.into(), m.sigma.into()]),
            None => row.extend([Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty]),
        }
        row.extend([r.rydberg_ev.into(), r.bohr_a.into(), r.r.into()]);
        row.extend(energies(&r.one_d));
        row.extend(energies(&r.two_d));
        row.extend([r.improvement_percent.into(), r.detectable.map_or(Cell::Empty, Cell::Bool), r.error.clone().into()]);
        t.push(row);
    }
    Ok(t)
}
