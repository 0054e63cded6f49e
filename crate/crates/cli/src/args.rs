use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "trionlab", version, about = "Exciton and trion binding energies on a cylinder")]
#[command(args_override_self = true)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// File of `key = value` lines; flags given on the command line win.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Write here instead of standard output.
    #[arg(long, short, global = true, value_name = "PATH")]
    pub output: Option<PathBuf>,
    /// Emit JSON instead of CSV.
    #[arg(long, global = true)]
    pub json: bool,
    /// Result cache directory [env: TRIONLAB_CACHE].
    #[arg(long, global = true, value_name = "DIR")]
    pub cache_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    pub no_cache: bool,
    /// Worker threads for sweeps; 0 means one per core.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    #[command(flatten)]
    pub physics: PhysicsOptions,
}

/// Options that change results and therefore enter the cache key.
#[derive(Debug, Clone, Args, Serialize)]
pub struct PhysicsOptions {
    #[arg(long, global = true, value_enum, default_value_t = MassConventionArg::Lattice)]
    pub mass_convention: MassConventionArg,
    /// Transfer integral t, eV.
    #[arg(long, global = true, default_value_t = -2.89, allow_negative_numbers = true)]
    pub hopping: f64,
    /// Overlap integral s.
    #[arg(long, global = true, default_value_t = 0.1)]
    pub overlap: f64,
    /// Lattice constant, Å.
    #[arg(long, global = true, default_value_t = 2.46)]
    pub lattice_constant: f64,
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub rel_tol: f64,
    #[arg(long, global = true, default_value_t = 1e-12)]
    pub abs_tol: f64,
    #[arg(long, global = true, default_value_t = 64)]
    pub angular_order: usize,
    #[arg(long, global = true, default_value_t = 2000)]
    pub max_subdivisions: usize,
    /// Relative cut-off on overlap eigenvalues.
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub drop_tol: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MassConventionArg {
    /// Kinetic unit ħ²/(m0 a²) taken as 1 eV.
    Lattice,
    /// CODATA ħ²/m0.
    Physical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum ModelArg {
    #[value(name = "1d")]
    #[serde(rename = "1d")]
    OneD,
    #[value(name = "2d")]
    #[serde(rename = "2d")]
    TwoD,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum ChargeArg {
    #[value(name = "-", alias = "negative")]
    #[serde(rename = "-")]
    Negative,
    #[value(name = "+", alias = "positive")]
    #[serde(rename = "+")]
    Positive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    Full,
    Hf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemArg {
    Exciton,
    Trion,
    Hf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProbabilityKind {
    Exciton,
    Trion,
    /// Percent difference of the HF product density from the full one.
    HfDifference,
}

/// A tube `n,m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Chirality(pub u32, pub u32);

impl std::str::FromStr for Chirality {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (n, m) = s.split_once(',').ok_or_else(|| format!("expected n,m, got {s:?}"))?;
        let p = |x: &str| x.trim().parse::<u32>().map_err(|e| format!("{x:?}: {e}"));
        Ok(Chirality(p(n)?, p(m)?))
    }
}

/// Where the dimensionless radius comes from.
#[derive(Debug, Clone, Args, Serialize)]
pub struct RadiusSource {
    /// Radius in a_B*.
    #[arg(long, conflicts_with = "chirality")]
    pub r: Option<f64>,
    /// Tube `n,m`; the radius follows from its masses and --epsilon.
    #[arg(long, required_unless_present = "r")]
    pub chirality: Option<Chirality>,
    #[arg(long, default_value_t = 3.5)]
    pub epsilon: f64,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case", tag = "command")]
pub enum Command {
    /// Band-edge masses and effective units of one tube.
    Masses {
        #[arg(long)]
        chirality: Chirality,
        #[arg(long, default_value_t = 3.5)]
        epsilon: f64,
    },
    /// Zone-folded subbands closest to the gap.
    Bands {
        #[arg(long)]
        chirality: Chirality,
        #[arg(long, default_value_t = 201)]
        points: usize,
        #[arg(long, default_value_t = 2)]
        subbands: usize,
    },
    /// Exciton ground state.
    Exciton {
        #[command(flatten)]
        radius: RadiusSource,
        #[arg(long, value_enum, default_value_t = ModelArg::TwoD)]
        model: ModelArg,
    },
    /// Trion ground state and binding energy.
    Trion {
        #[command(flatten)]
        radius: RadiusSource,
        #[arg(long, value_enum, default_value_t = ModelArg::TwoD)]
        model: ModelArg,
        /// Mass fraction m_e/m_h.
        #[arg(long, default_value_t = 0.0)]
        sigma: f64,
        #[arg(long, value_enum, default_value_t = ChargeArg::Negative, allow_hyphen_values = true)]
        charge: ChargeArg,
    },
    /// Restricted Hartree-Fock trion with a static hole.
    Hf {
        #[command(flatten)]
        radius: RadiusSource,
        #[arg(long, value_enum, default_value_t = ModelArg::TwoD)]
        model: ModelArg,
    },
    /// Steepest-descent optimisation of the stock exponents.
    Optimize {
        #[arg(long, value_enum)]
        problem: ProblemArg,
        #[arg(long, value_enum, default_value_t = ModelArg::TwoD)]
        model: ModelArg,
        #[arg(long, default_value_t = 0.1)]
        r0: f64,
        #[arg(long, default_value_t = 1000)]
        max_steps: usize,
        /// Stop after this many consecutive steps gaining less, Ry*.
        #[arg(long, default_value_t = 1e-6)]
        energy_tol: f64,
    },
    /// Angular probability density on a uniform grid over [-π, π].
    Probability {
        #[arg(long, value_enum)]
        kind: ProbabilityKind,
        #[arg(long)]
        r: f64,
        #[arg(long, value_enum, default_value_t = ModelArg::TwoD)]
        model: ModelArg,
        #[arg(long, default_value_t = 61)]
        grid: usize,
    },
    /// Binding energies across radii.
    SweepRadius {
        #[arg(long, default_value_t = 0.02)]
        from: f64,
        #[arg(long, default_value_t = 0.3)]
        to: f64,
        #[arg(long, default_value_t = 30)]
        points: usize,
        #[arg(long, value_enum, value_delimiter = ',', default_values_t = [ModelArg::OneD, ModelArg::TwoD])]
        models: Vec<ModelArg>,
        #[arg(long, value_enum, value_delimiter = ',', default_values_t = [MethodArg::Full])]
        methods: Vec<MethodArg>,
        #[arg(long, value_delimiter = ',', default_values_t = [0.0])]
        sigmas: Vec<f64>,
        #[arg(long, value_enum, default_value_t = ChargeArg::Negative, allow_hyphen_values = true)]
        charge: ChargeArg,
    },
    /// Binding energies across mass fractions at one radius.
    SweepSigma {
        #[arg(long, default_value_t = 0.1)]
        r: f64,
        #[arg(long, default_value_t = 0.0)]
        from: f64,
        #[arg(long, default_value_t = 1.0)]
        to: f64,
        #[arg(long, default_value_t = 11)]
        points: usize,
        #[arg(long, value_enum, value_delimiter = ',', default_values_t = [ModelArg::OneD, ModelArg::TwoD])]
        models: Vec<ModelArg>,
        #[arg(long, value_enum, default_value_t = ChargeArg::Negative, allow_hyphen_values = true)]
        charge: ChargeArg,
    },
    /// Physical binding energies of one tube across dielectric constants.
    SweepEpsilon {
        #[arg(long)]
        chirality: Chirality,
        #[arg(long, default_value_t = 2.0)]
        from: f64,
        #[arg(long, default_value_t = 5.0)]
        to: f64,
        #[arg(long, default_value_t = 13)]
        points: usize,
    },
    /// All semiconducting tubes in a radius window.
    SweepSpecies {
        /// Å.
        #[arg(long, default_value_t = 3.0)]
        r_min: f64,
        /// Å.
        #[arg(long, default_value_t = 15.0)]
        r_max: f64,
        #[arg(long, default_value_t = 3.5)]
        epsilon: f64,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Masses { .. } => "masses",
            Command::Bands { .. } => "bands",
            Command::Exciton { .. } => "exciton",
            Command::Trion { .. } => "trion",
            Command::Hf { .. } => "hf",
            Command::Optimize { .. } => "optimize",
            Command::Probability { .. } => "probability",
            Command::SweepRadius { .. } => "sweep-radius",
            Command::SweepSigma { .. } => "sweep-sigma",
            Command::SweepEpsilon { .. } => "sweep-epsilon",
            Command::SweepSpecies { .. } => "sweep-species",
        }
    }
}
