//! Effective Rydberg and Bohr radius for a given reduced mass and screening.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Hydrogen Rydberg in eV, as used for the conversions (not CODATA).
pub const RYDBERG_EV: f64 = 13.6;
/// Hydrogen Bohr radius in Å, as used for the conversions (not CODATA).
pub const BOHR_A: f64 = 0.529;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    /// Relative static dielectric constant.
    pub epsilon: f64,
}

impl Environment {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon >= 1.0) || !epsilon.is_finite() {
            return domain(format!("dielectric constant must be >= 1, got {epsilon}"));
        }
        Ok(Environment { epsilon })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveUnits {
    /// Ry* in eV.
    pub rydberg: f64,
    /// a_B* in Å.
    pub bohr: f64,
}

pub fn effective_units(mu: f64, env: Environment) -> Result<EffectiveUnits> {
    if !(mu > 0.0) || !mu.is_finite() {
        return domain(format!("reduced mass must be positive, got {mu}"));
    }
    let eps = env.epsilon;
    Ok(EffectiveUnits {
        rydberg: RYDBERG_EV * mu / (eps * eps),
        bohr: BOHR_A * eps / mu,
    })
}

/// Radius in units of a_B*.
pub fn dimensionless_radius(r_angstrom: f64, u: &EffectiveUnits) -> Result<f64> {
    if !(r_angstrom > 0.0) {
        return domain(format!("radius must be positive, got {r_angstrom}"));
    }
    Ok(r_angstrom / u.bohr)
}

/// Energy in eV from Ry*.
pub fn to_physical_energy(e: f64, u: &EffectiveUnits) -> f64 {
    e * u.rydberg
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn worked_example_units() {
        let u = effective_units(0.0417, Environment::new(3.5).unwrap()).unwrap();
        assert!((u.rydberg - 0.0462).abs() < 5e-4);
        assert!((u.bohr - 44.5).abs() < 0.5);
        let r = dimensionless_radius(3.73, &u).unwrap();
        assert!((r - 0.084).abs() < 1e-3);
        assert!((to_physical_energy(1.28, &u) - 0.0591).abs() < 5e-4);
    }

    #[test]
    fn hydrogenic_limit_and_identities() {
        let u = effective_units(1.0, Environment::new(1.0).unwrap()).unwrap();
        assert_eq!((u.rydberg, u.bohr), (13.6, 0.529));
        assert_eq!(dimensionless_radius(u.bohr, &u).unwrap(), 1.0);
        assert_eq!(to_physical_energy(0.0, &u), 0.0);
    }

    #[test]
    fn chained_conversion_at_epsilon_two() {
        let u = effective_units(0.0417, Environment::new(2.0).unwrap()).unwrap();
        let by_hand = 3.73 / (0.529 * 2.0 / 0.0417);
        assert_relative_eq!(dimensionless_radius(3.73, &u).unwrap(), by_hand, max_relative = 1e-15);
    }

    #[test]
    fn rejects_unphysical_input() {
        assert!(Environment::new(0.5).is_err());
        assert!(effective_units(0.0, Environment::new(2.0).unwrap()).is_err());
        assert!(effective_units(f64::NAN, Environment::new(2.0).unwrap()).is_err());
    }
}
