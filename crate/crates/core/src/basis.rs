//! Variational basis: axial Gaussians times a small set of angular functions.
//!
//! Two-particle functions are
//! `exp(-αi x1²) exp(-αj x2²) exp(-αk (x1-x2)²) φ_l(θ1, θ2)` with
//! `φ_l = (1/2π) {1, s(θ1), s(θ2), s(θ1-θ2)}` and `s(θ) = |sin(θ/2)|`.
//! One-particle functions are `exp(-α x²) {1, s(θ)} / sqrt(2π)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Reference radius (a_B*) at which the preset exponents were optimised.
pub const PRESET_R0: f64 = 0.1;

const EXCITON_EXPONENTS: [f64; 5] = [0.143, 1.16, 4.98, 29.0, 250.0];
const TRION_1D_EXPONENTS: [f64; 5] = [0.0651, 0.145, 1.68, 9.65, 48.7];
const TRION_2D_IJ_EXPONENTS: [f64; 4] = [0.165, 1.68, 9.65, 48.7];
const TRION_2D_K_EXPONENTS: [f64; 4] = [0.0000171, 1.68, 9.98, 48.7];
const HF_EXPONENTS: [f64; 7] = [0.0648, 0.195, 1.04, 5.28, 27.5, 99.3, 250.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Model {
    /// Angularly constant wave function (carriers delocalised around the tube).
    #[serde(rename = "1d")]
    OneD,
    #[serde(rename = "2d")]
    TwoD,
}

impl Model {
    pub fn label(self) -> &'static str {
        match self {
            Model::OneD => "1d",
            Model::TwoD => "2d",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AngularSet {
    /// `l = 1` only.
    Constant,
    /// One particle: `{1, s(θ)}`.
    ExcitonPair,
    /// Two particles: `{1, s(θ1), s(θ2), s(θ1-θ2)}`.
    Full4,
}

impl AngularSet {
    pub fn len(self) -> usize {
        match self {
            AngularSet::Constant => 1,
            AngularSet::ExcitonPair => 2,
            AngularSet::Full4 => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Particles {
    One,
    Two,
}

/// Axial exponent lists in a_B*⁻². One-particle bases only use `alphas_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxialBasis {
    pub alphas_i: Vec<f64>,
    pub alphas_j: Vec<f64>,
    pub alphas_k: Vec<f64>,
}

impl AxialBasis {
    fn scaled(&self, f: f64) -> AxialBasis {
        let sc = |v: &[f64]| v.iter().map(|a| a * f).collect();
        AxialBasis {
            alphas_i: sc(&self.alphas_i),
            alphas_j: sc(&self.alphas_j),
            alphas_k: sc(&self.alphas_k),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisSpec {
    axial: AxialBasis,
    angular: AngularSet,
    model: Model,
    particles: Particles,
    /// Radius (a_B*) the exponents refer to.
    r0: f64,
}

fn check_exponents(name: &str, v: &[f64]) -> Result<()> {
    if v.is_empty() {
        return domain(format!("exponent list {name} is empty"));
    }
    if let Some(a) = v.iter().find(|a| !(**a > 0.0) || !a.is_finite()) {
        return domain(format!("exponent list {name} contains non-positive value {a}"));
    }
    Ok(())
}

impl BasisSpec {
    pub fn one_particle(alphas: Vec<f64>, model: Model, r0: f64) -> Result<Self> {
        check_exponents("alpha", &alphas)?;
        check_radius(r0)?;
        Ok(BasisSpec {
            axial: AxialBasis { alphas_i: alphas, alphas_j: Vec::new(), alphas_k: Vec::new() },
            angular: match model {
                Model::OneD => AngularSet::Constant,
                Model::TwoD => AngularSet::ExcitonPair,
            },
            model,
            particles: Particles::One,
            r0,
        })
    }

    pub fn two_particle(axial: AxialBasis, model: Model, r0: f64) -> Result<Self> {
        check_exponents("alpha_i", &axial.alphas_i)?;
        check_exponents("alpha_j", &axial.alphas_j)?;
        check_exponents("alpha_k", &axial.alphas_k)?;
        check_radius(r0)?;
        Ok(BasisSpec {
            axial,
            angular: match model {
                Model::OneD => AngularSet::Constant,
                Model::TwoD => AngularSet::Full4,
            },
            model,
            particles: Particles::Two,
            r0,
        })
    }

    pub fn preset(kind: PresetKind) -> BasisSpec {
        let v = |s: &[f64]| s.to_vec();
        let r0 = PRESET_R0;
        let b = match kind {
            PresetKind::Exciton1D => BasisSpec::one_particle(v(&EXCITON_EXPONENTS), Model::OneD, r0),
            PresetKind::Exciton2D => BasisSpec::one_particle(v(&EXCITON_EXPONENTS), Model::TwoD, r0),
            PresetKind::Hf1D => BasisSpec::one_particle(v(&HF_EXPONENTS), Model::OneD, r0),
            PresetKind::Hf2D => BasisSpec::one_particle(v(&HF_EXPONENTS), Model::TwoD, r0),
            PresetKind::Trion1D => BasisSpec::two_particle(
                AxialBasis {
                    alphas_i: v(&TRION_1D_EXPONENTS),
                    alphas_j: v(&TRION_1D_EXPONENTS),
                    alphas_k: v(&TRION_1D_EXPONENTS),
                },
                Model::OneD,
                r0,
            ),
            PresetKind::Trion2D => BasisSpec::two_particle(
                AxialBasis {
                    alphas_i: v(&TRION_2D_IJ_EXPONENTS),
                    alphas_j: v(&TRION_2D_IJ_EXPONENTS),
                    alphas_k: v(&TRION_2D_K_EXPONENTS),
                },
                Model::TwoD,
                r0,
            ),
        };
        b.expect("preset exponents are valid")
    }

    pub fn axial(&self) -> &AxialBasis {
        &self.axial
    }

    pub fn angular(&self) -> AngularSet {
        self.angular
    }

    pub fn model(&self) -> Model {
        self.model
    }

    pub fn particles(&self) -> Particles {
        self.particles
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }

    /// Same angular set and model with new exponents.
    pub fn with_axial(&self, axial: AxialBasis) -> Result<Self> {
        match self.particles {
            Particles::One => BasisSpec::one_particle(axial.alphas_i, self.model, self.r0),
            Particles::Two => BasisSpec::two_particle(axial, self.model, self.r0),
        }
    }

    /// Number of basis functions.
    pub fn len(&self) -> usize {
        let a = &self.axial;
        let axial = match self.particles {
            Particles::One => a.alphas_i.len(),
            Particles::Two => a.alphas_i.len() * a.alphas_j.len() * a.alphas_k.len(),
        };
        axial * self.angular.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Decode a two-particle index `((i·N2+j)·N3+k)·L+l` into `(i, j, k, l)`,
    /// all zero-based. For one-particle bases `j = k = 0`.
    pub fn decode(&self, n: usize) -> (usize, usize, usize, usize) {
        let l_len = self.angular.len();
        let (l, rest) = (n % l_len, n / l_len);
        match self.particles {
            Particles::One => (rest, 0, 0, l),
            Particles::Two => {
                let n3 = self.axial.alphas_k.len();
                let n2 = self.axial.alphas_j.len();
                let k = rest % n3;
                let rest = rest / n3;
                (rest / n2, rest % n2, k, l)
            }
        }
    }

    pub fn encode(&self, i: usize, j: usize, k: usize, l: usize) -> usize {
        let l_len = self.angular.len();
        match self.particles {
            Particles::One => i * l_len + l,
            Particles::Two => {
                let n3 = self.axial.alphas_k.len();
                let n2 = self.axial.alphas_j.len();
                ((i * n2 + j) * n3 + k) * l_len + l
            }
        }
    }

    /// Exponents of function `n` as `(αi, αj, αk, l)`; unused slots are zero.
    pub fn exponents_of(&self, n: usize) -> (f64, f64, f64, usize) {
        let (i, j, k, l) = self.decode(n);
        let a = &self.axial;
        match self.particles {
            Particles::One => (a.alphas_i[i], 0.0, 0.0, l),
            Particles::Two => (a.alphas_i[i], a.alphas_j[j], a.alphas_k[k], l),
        }
    }

    /// Exponents rescaled from `self.r0` to radius `r`.
    pub fn at_radius(&self, r: f64) -> Result<Self> {
        scale_exponents(self, self.r0, r)
    }
}

fn check_radius(r: f64) -> Result<()> {
    if !(r > 0.0) || !r.is_finite() {
        return domain(format!("radius must be positive, got {r}"));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PresetKind {
    Exciton1D,
    Exciton2D,
    Trion1D,
    Trion2D,
    Hf1D,
    Hf2D,
}

impl PresetKind {
    pub fn exciton(model: Model) -> Self {
        match model {
            Model::OneD => PresetKind::Exciton1D,
            Model::TwoD => PresetKind::Exciton2D,
        }
    }

    pub fn trion(model: Model) -> Self {
        match model {
            Model::OneD => PresetKind::Trion1D,
            Model::TwoD => PresetKind::Trion2D,
        }
    }

    pub fn hf(model: Model) -> Self {
        match model {
            Model::OneD => PresetKind::Hf1D,
            Model::TwoD => PresetKind::Hf2D,
        }
    }
}

pub fn preset_basis(kind: PresetKind) -> BasisSpec {
    BasisSpec::preset(kind)
}

/// Multiply every exponent by `(r0/r)²` and retag the basis with `r`.
pub fn scale_exponents(basis: &BasisSpec, r0: f64, r: f64) -> Result<BasisSpec> {
    check_radius(r0)?;
    check_radius(r)?;
    let f = (r0 / r).powi(2);
    Ok(BasisSpec { axial: basis.axial.scaled(f), r0: r, ..basis.clone() })
}

/// Coulomb interaction on a cylinder of radius `r`, in Ry*.
pub fn coulomb_potential(x: f64, theta: f64, r: f64) -> Result<f64> {
    check_radius(r)?;
    let s = (0.5 * theta).sin();
    let d2 = x * x + 4.0 * r * r * s * s;
    if d2 == 0.0 {
        return Err(Error::Domain(format!("Coulomb potential is singular at x={x}, theta={theta}")));
    }
    Ok(2.0 / d2.sqrt())
}

/// Closed-form axial kernels of one pair of two-particle Gaussians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxialKernels {
    /// Overlap `S^T`.
    pub overlap: f64,
    /// Kinetic energy of particle 1, `K^T`.
    pub kinetic: f64,
    /// Mixed-derivative kernel `K^TM = ∫ ∂x1 g ∂x2 g'`.
    pub mixed: f64,
}

/// Axial kernels for exponent pairs `(αi, αi')`, `(αj, αj')`, `(αk, αk')`.
///
/// With `a = αi+αi'`, `b = αj+αj'`, `c = αk+αk'` and `D = ab+bc+ca`, the
/// overlap is `π/sqrt(D)`.
pub fn axial_kernels(ai: f64, aip: f64, aj: f64, ajp: f64, ak: f64, akp: f64) -> AxialKernels {
    let a = ai + aip;
    let b = aj + ajp;
    let c = ak + akp;
    let d = a * b + b * c + c * a;
    let d32 = d * d.sqrt();
    let kk = ak * akp * (a + b);
    AxialKernels {
        overlap: PI / d.sqrt(),
        kinetic: 2.0 * PI * (kk + ai * aip * (b + c) + b * (ai * akp + aip * ak)) / d32,
        mixed: -2.0 * PI * (kk + ai * aj * akp + aip * ajp * ak) / d32,
    }
}

/// Angular kernels of one pair of two-particle angular functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngularKernels {
    pub overlap: f64,
    /// `⟨φ_l| -∂²θ1 - ∂²θ2 |φ_l'⟩`.
    pub kinetic: f64,
    /// `∫ ∂θ1 φ_l ∂θ2 φ_l'`, entering with the mass weight.
    pub mixed: f64,
}

/// Angular kernels for labels `l, l' ∈ {1, 2, 3, 4}`.
pub fn angular_kernels(l: usize, lp: usize) -> Result<AngularKernels> {
    if !(1..=4).contains(&l) || !(1..=4).contains(&lp) {
        return domain(format!("angular labels must be in 1..=4, got ({l},{lp})"));
    }
    Ok(angular_kernels0(l - 1, lp - 1))
}

/// Zero-based variant used on hot paths.
pub(crate) fn angular_kernels0(l: usize, lp: usize) -> AngularKernels {
    let overlap = if l == lp {
        if l == 0 {
            1.0
        } else {
            0.5
        }
    } else if l == 0 || lp == 0 {
        2.0 / PI
    } else {
        4.0 / (PI * PI)
    };
    let (kinetic, mixed) = match (l, lp) {
        (1, 1) | (2, 2) => (0.125, 0.0),
        (3, 3) => (0.25, -0.125),
        _ => (0.0, 0.0),
    };
    AngularKernels { overlap, kinetic, mixed }
}

/// One-particle angular kernels `(overlap, kinetic)` for zero-based labels
/// `l, l' ∈ {0, 1}` of `{1, s(θ)}/sqrt(2π)`.
pub(crate) fn exciton_angular_kernels0(l: usize, lp: usize) -> (f64, f64) {
    match (l, lp) {
        (0, 0) => (1.0, 0.0),
        (1, 1) => (0.5, 0.125),
        _ => (2.0 / PI, 0.0),
    }
}

/// `|sin(θ/2)|`.
#[inline]
pub fn half_sine(theta: f64) -> f64 {
    (0.5 * theta).sin().abs()
}

/// Value of the two-particle angular function `l ∈ {0..4}` (zero-based),
/// including the `1/(2π)` prefactor.
pub fn angular_function(l: usize, t1: f64, t2: f64) -> f64 {
    let v = match l {
        0 => 1.0,
        1 => half_sine(t1),
        2 => half_sine(t2),
        3 => half_sine(t1 - t2),
        _ => panic!("angular label out of range: {l}"),
    };
    v / (2.0 * PI)
}

/// Value of the one-particle angular function `l ∈ {0, 1}` (zero-based).
pub fn exciton_angular_function(l: usize, t: f64) -> f64 {
    let v = if l == 0 { 1.0 } else { half_sine(t) };
    v / (2.0 * PI).sqrt()
}
