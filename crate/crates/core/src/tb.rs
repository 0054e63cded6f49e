//! Non-orthogonal nearest-neighbour tight binding for graphene, zone-folded
//! onto carbon nanotubes.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::numeric::golden_section;

/// ħ²/m0 in eV·Å² from CODATA 2018 constants.
pub const HBAR2_OVER_M0_EV_A2: f64 = {
    let hbar = 1.054_571_817e-34;
    let m0 = 9.109_383_701_5e-31;
    let ev = 1.602_176_634e-19;
    hbar * hbar / m0 / ev * 1e20
};

/// ħ in eV·s.
pub const HBAR_EV_S: f64 = 6.582_119_569e-16;

const SAMPLES_PER_LINE: usize = 2001;
const MASS_STEP: f64 = 1e-3;

/// Chiral index `(n, m)` with `n >= m >= 0`, not both zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ChiralIndex {
    n: u32,
    m: u32,
}

impl ChiralIndex {
    pub fn new(n: u32, m: u32) -> Result<Self> {
        if m > n {
            return domain(format!("chiral index ({n},{m}) requires n >= m"));
        }
        if n == 0 {
            return domain("chiral index (0,0) is not a tube");
        }
        Ok(ChiralIndex { n, m })
    }

    /// Accepts either ordering; `(m, n)` is the mirror image of `(n, m)` and
    /// has identical bands.
    pub fn canonical(a: u32, b: u32) -> Result<Self> {
        Self::new(a.max(b), a.min(b))
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn m(&self) -> u32 {
        self.m
    }
}

impl std::fmt::Display for ChiralIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.n, self.m)
    }
}

/// How curvature of the band is turned into a mass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum MassConvention {
    /// `m/m0 = a² / (d²E/dk²)` with energies in eV and `k` in 1/Å, i.e. the
    /// kinetic unit ħ²/(m0 a²) is taken as 1 eV. This reproduces the
    /// reference (6,5) masses 0.0803 / 0.0866.
    #[default]
    LatticeUnits,
    /// `m/m0 = (ħ²/m0) / (d²E/dk²)` with the CODATA value of ħ²/m0.
    Physical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TightBindingParams {
    /// Transfer integral, eV (negative).
    pub t: f64,
    /// Overlap integral.
    pub s: f64,
    /// Lattice constant, Å.
    pub a: f64,
    /// On-site energy, eV.
    pub e2p: f64,
    pub mass_convention: MassConvention,
}

impl Default for TightBindingParams {
    fn default() -> Self {
        TightBindingParams {
            t: -2.89,
            s: 0.1,
            a: 2.46,
            e2p: 0.0,
            mass_convention: MassConvention::default(),
        }
    }
}

impl TightBindingParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.t < 0.0) {
            return domain(format!("transfer integral must be negative, got {}", self.t));
        }
        // |f(k)| reaches 3 at Γ, so 3s < 1 keeps the conduction denominator positive.
        if !(self.s >= 0.0 && 3.0 * self.s < 1.0) {
            return domain(format!("overlap must satisfy 0 <= s < 1/3, got {}", self.s));
        }
        if !(self.a > 0.0) || !self.a.is_finite() {
            return domain(format!("lattice constant must be positive, got {}", self.a));
        }
        if !self.e2p.is_finite() {
            return domain("on-site energy must be finite");
        }
        Ok(())
    }

    /// Numerator of `m/m0 = numerator / (d²E/dk²)`, in eV·Å².
    pub fn mass_numerator(&self) -> f64 {
        match self.mass_convention {
            MassConvention::LatticeUnits => self.a * self.a,
            MassConvention::Physical => HBAR2_OVER_M0_EV_A2,
        }
    }

    fn lattice(&self) -> Lattice {
        let a = self.a;
        let r3 = 3f64.sqrt();
        let g = 2.0 * PI / a;
        Lattice {
            a1: [0.5 * r3 * a, 0.5 * a],
            a2: [0.5 * r3 * a, -0.5 * a],
            b1: [g / r3, g],
            b2: [g / r3, -g],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    Valence,
    Conduction,
}

#[derive(Debug, Clone, Copy)]
struct Lattice {
    a1: [f64; 2],
    a2: [f64; 2],
    b1: [f64; 2],
    b2: [f64; 2],
}

fn dot(x: [f64; 2], y: [f64; 2]) -> f64 {
    x[0] * y[0] + x[1] * y[1]
}

fn phase_sum_modulus(k: [f64; 2], lat: &Lattice) -> f64 {
    let p1 = dot(k, lat.a1);
    let p2 = dot(k, lat.a2);
    let re = 1.0 + p1.cos() + p2.cos();
    let im = p1.sin() + p2.sin();
    re.hypot(im)
}

fn bands_from_w(w: f64, p: &TightBindingParams) -> (f64, f64) {
    let lower = (p.e2p + p.t * w) / (1.0 + p.s * w);
    let upper = (p.e2p - p.t * w) / (1.0 - p.s * w);
    (lower.min(upper), lower.max(upper))
}

/// Tube radius in Å: `a·sqrt(n²+nm+m²)/(2π)`.
pub fn radius(ch: ChiralIndex, a: f64) -> f64 {
    let (n, m) = (ch.n as f64, ch.m as f64);
    a * (n * n + n * m + m * m).sqrt() / (2.0 * PI)
}

pub fn is_semiconducting(ch: ChiralIndex) -> bool {
    !(ch.n - ch.m).is_multiple_of(3)
}

/// Graphene band energy in eV at wavevector `k` (1/Å).
///
/// The two roots `(e2p ± t w)/(1 ± s w)` are ordered so that the conduction
/// branch is never below the valence branch.
pub fn graphene_band(k: [f64; 2], p: &TightBindingParams, branch: Branch) -> f64 {
    let w = phase_sum_modulus(k, &p.lattice());
    let (v, c) = bands_from_w(w, p);
    match branch {
        Branch::Valence => v,
        Branch::Conduction => c,
    }
}

/// The K point of the graphene Brillouin zone, 1/Å.
pub fn k_point(p: &TightBindingParams) -> [f64; 2] {
    let lat = p.lattice();
    [(lat.b1[0] - lat.b2[0]) / 3.0, (lat.b1[1] - lat.b2[1]) / 3.0]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveMasses {
    pub m_e: f64,
    pub m_h: f64,
    pub mu: f64,
    pub sigma: f64,
}

impl EffectiveMasses {
    pub fn from_masses(m_e: f64, m_h: f64) -> Result<Self> {
        if !(m_e > 0.0 && m_h > 0.0) {
            return domain(format!("masses must be positive, got m_e={m_e}, m_h={m_h}"));
        }
        Ok(EffectiveMasses {
            m_e,
            m_h,
            mu: 1.0 / (1.0 / m_e + 1.0 / m_h),
            sigma: m_e / m_h,
        })
    }
}

/// Zone-folded band edges of one tube.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandEdges {
    /// Direct gap at the edge, eV.
    pub gap: f64,
    /// Cutting line (subband index) carrying the smallest direct gap.
    pub line: usize,
    /// Number of cutting lines.
    pub line_count: usize,
    /// Conduction minimum and valence maximum along the line, 1/Å.
    pub k_conduction: f64,
    pub k_valence: f64,
    pub curvature_conduction: f64,
    pub curvature_valence: f64,
    /// False when the global conduction minimum or valence maximum lies on a
    /// different line than the smallest direct gap.
    pub edges_on_gap_line: bool,
}

/// Chiral/translation vector construction of the cutting lines.
#[derive(Debug, Clone, Copy)]
pub struct CuttingLines {
    lat: Lattice,
    k1: [f64; 2],
    k2_hat: [f64; 2],
    /// Line count N.
    pub count: usize,
    /// Translation period T, Å.
    pub period: f64,
}

impl CuttingLines {
    /// Works for any ordering of `(n, m)` so mirror images can be compared.
    pub fn new(n: u32, m: u32, p: &TightBindingParams) -> Self {
        let (ni, mi) = (n as i64, m as i64);
        let dr = gcd(2 * mi + ni, 2 * ni + mi);
        let t1 = (2 * mi + ni) / dr;
        let t2 = -(2 * ni + mi) / dr;
        let count = (2 * (ni * ni + ni * mi + mi * mi) / dr) as usize;
        let lat = p.lattice();
        let nf = count as f64;
        let (t1f, t2f, nff, mf) = (t1 as f64, t2 as f64, ni as f64, mi as f64);
        let k1 = [
            (-t2f * lat.b1[0] + t1f * lat.b2[0]) / nf,
            (-t2f * lat.b1[1] + t1f * lat.b2[1]) / nf,
        ];
        let k2 = [
            (mf * lat.b1[0] - nff * lat.b2[0]) / nf,
            (mf * lat.b1[1] - nff * lat.b2[1]) / nf,
        ];
        let k2n = k2[0].hypot(k2[1]);
        let tv = [
            t1f * lat.a1[0] + t2f * lat.a2[0],
            t1f * lat.a1[1] + t2f * lat.a2[1],
        ];
        CuttingLines {
            lat,
            k1,
            k2_hat: [k2[0] / k2n, k2[1] / k2n],
            count,
            period: tv[0].hypot(tv[1]),
        }
    }

    /// `(valence, conduction)` in eV on line `mu` at axial wavevector `k`.
    pub fn energies(&self, mu: usize, k: f64, p: &TightBindingParams) -> (f64, f64) {
        let muf = mu as f64;
        let kv = [
            muf * self.k1[0] + k * self.k2_hat[0],
            muf * self.k1[1] + k * self.k2_hat[1],
        ];
        bands_from_w(phase_sum_modulus(kv, &self.lat), p)
    }

    /// Axial wavevector samples over the 1D Brillouin zone `[-π/T, π/T)`.
    pub fn k_samples(&self, count: usize) -> Vec<f64> {
        let half = PI / self.period;
        let step = 2.0 * half / count as f64;
        (0..count).map(|i| -half + step * i as f64).collect()
    }

    /// Time reversal maps line `mu` onto `N - mu`; use the smaller label.
    fn reduce(&self, mu: usize) -> usize {
        mu.min((self.count - mu) % self.count)
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn second_derivative(f: impl Fn(f64) -> f64, x: f64) -> f64 {
    let d = |h: f64| (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
    (4.0 * d(0.5 * MASS_STEP) - d(MASS_STEP)) / 3.0
}

fn band_edges_raw(n: u32, m: u32, p: &TightBindingParams) -> Result<BandEdges> {
    let lines = CuttingLines::new(n, m, p);
    let ks = lines.k_samples(SAMPLES_PER_LINE);
    let dk = ks[1] - ks[0];

    let mut best_gap = (f64::INFINITY, 0usize, 0.0);
    let mut best_c = (f64::INFINITY, 0usize);
    let mut best_v = (f64::NEG_INFINITY, 0usize);
    for mu in 0..lines.count {
        for &k in &ks {
            let (v, c) = lines.energies(mu, k, p);
            if c - v < best_gap.0 {
                best_gap = (c - v, mu, k);
            }
            if c < best_c.0 {
                best_c = (c, mu);
            }
            if v > best_v.0 {
                best_v = (v, mu);
            }
        }
    }
    let (_, line, k0) = best_gap;
    let (lo, hi) = (k0 - 2.0 * dk, k0 + 2.0 * dk);
    let refine = |sign: f64, pick: fn((f64, f64)) -> f64| {
        let (k, _) = golden_section(lo, hi, 1e-11, |k| sign * pick(lines.energies(line, k, p)));
        k
    };
    let k_conduction = refine(1.0, |e| e.1);
    let k_valence = refine(-1.0, |e| e.0);
    for (name, k) in [("conduction", k_conduction), ("valence", k_valence)] {
        if (k - lo).abs() < 1e-3 * dk || (hi - k).abs() < 1e-3 * dk {
            return Err(Error::BandEdge(format!(
                "{name} extremum of ({n},{m}) not bracketed on line {line}"
            )));
        }
    }
    let curvature_conduction = second_derivative(|k| lines.energies(line, k, p).1, k_conduction);
    let curvature_valence = second_derivative(|k| lines.energies(line, k, p).0, k_valence);
    if !(curvature_conduction > 0.0 && curvature_valence < 0.0) {
        return Err(Error::BandEdge(format!(
            "({n},{m}) edge curvatures have the wrong sign ({curvature_conduction}, {curvature_valence})"
        )));
    }
    let gap = lines.energies(line, k_conduction, p).1 - lines.energies(line, k_valence, p).0;
    let g = lines.reduce(line);
    Ok(BandEdges {
        gap,
        line,
        line_count: lines.count,
        k_conduction,
        k_valence,
        curvature_conduction,
        curvature_valence,
        edges_on_gap_line: lines.reduce(best_c.1) == g && lines.reduce(best_v.1) == g,
    })
}

/// Smallest direct gap over all cutting lines, refined by golden section.
pub fn band_edges(ch: ChiralIndex, p: &TightBindingParams) -> Result<BandEdges> {
    p.validate()?;
    if !is_semiconducting(ch) {
        return domain(format!("{ch} is metallic"));
    }
    band_edges_raw(ch.n, ch.m, p)
}

/// Masses in units of m0 at the band edges of the smallest direct gap.
pub fn effective_masses(ch: ChiralIndex, p: &TightBindingParams) -> Result<EffectiveMasses> {
    let e = band_edges(ch, p)?;
    masses_from_edges(&e, p)
}

pub fn masses_from_edges(e: &BandEdges, p: &TightBindingParams) -> Result<EffectiveMasses> {
    let c = p.mass_numerator();
    EffectiveMasses::from_masses(c / e.curvature_conduction, -c / e.curvature_valence)
}

/// Fermi velocity in m/s: half the conduction-valence splitting slope at K,
/// extrapolated to zero distance.
pub fn fermi_velocity(p: &TightBindingParams) -> Result<f64> {
    p.validate()?;
    let k = k_point(p);
    let slope = |q: f64| {
        let kq = [k[0] + q, k[1]];
        let c = graphene_band(kq, p, Branch::Conduction);
        let v = graphene_band(kq, p, Branch::Valence);
        0.5 * (c - v) / q
    };
    // Richardson table on a halving sequence; the leading error is O(q).
    let mut prev: Vec<f64> = Vec::new();
    let mut q = 1e-2;
    let mut best = f64::NAN;
    for _ in 0..12 {
        let mut row = vec![slope(q)];
        for (j, p_j) in prev.iter().enumerate() {
            let f = 2f64.powi(j as i32 + 1);
            let r = (f * row[j] - p_j) / (f - 1.0);
            row.push(r);
        }
        let est = *row.last().unwrap();
        if (est - best).abs() < 1e-11 * est.abs() {
            best = est;
            break;
        }
        best = est;
        prev = row;
        q *= 0.5;
    }
    // eV·Å / (eV·s) = Å/s
    Ok(best / HBAR_EV_S * 1e-10)
}

/// All semiconducting tubes with radius in `[r_min, r_max]` Å, sorted by
/// radius then `(n, m)`.
pub fn enumerate_species(r_min: f64, r_max: f64, p: &TightBindingParams) -> Vec<(ChiralIndex, f64)> {
    if !(r_min > 0.0 && r_max >= r_min) {
        return Vec::new();
    }
    // radius >= a n / (2π) for m >= 0
    let n_max = (2.0 * PI * r_max / p.a).floor() as u32 + 1;
    let mut out = Vec::new();
    for n in 1..=n_max {
        for m in 0..=n {
            let ch = ChiralIndex { n, m };
            let r = radius(ch, p.a);
            if r >= r_min && r <= r_max && is_semiconducting(ch) {
                out.push((ch, r));
            }
        }
    }
    out.sort_by(|x, y| x.1.total_cmp(&y.1).then(x.0.cmp(&y.0)));
    out
}
