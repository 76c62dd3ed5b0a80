//! Unit system, physical constants and the parameter records shared by the
//! physics modules, plus the two thermal scale formulas.

use std::fmt;

use crate::error::{require_non_negative, require_positive, Error, Result};

/// Reduced Planck constant in erg·s (CODATA 2018, exact SI conversion).
pub const HBAR_CGS: f64 = 1.054_571_817e-27;
/// Boltzmann constant in erg/K (exact SI conversion).
pub const K_BOLTZMANN_CGS: f64 = 1.380_649e-16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UnitSystem {
    /// ħ = k_B = 1.
    #[default]
    Natural,
    /// Gaussian CGS: g, cm, s, K.
    Cgs,
}

impl fmt::Display for UnitSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UnitSystem::Natural => f.write_str("natural"),
            UnitSystem::Cgs => f.write_str("cgs"),
        }
    }
}

/// ħ and k_B for a chosen unit system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    hbar: f64,
    k_boltzmann: f64,
    unit_system: UnitSystem,
}

impl PhysicalConstants {
    pub const fn natural() -> Self {
        Self {
            hbar: 1.0,
            k_boltzmann: 1.0,
            unit_system: UnitSystem::Natural,
        }
    }

    pub const fn cgs() -> Self {
        Self {
            hbar: HBAR_CGS,
            k_boltzmann: K_BOLTZMANN_CGS,
            unit_system: UnitSystem::Cgs,
        }
    }

    pub const fn for_system(unit_system: UnitSystem) -> Self {
        match unit_system {
            UnitSystem::Natural => Self::natural(),
            UnitSystem::Cgs => Self::cgs(),
        }
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn k_boltzmann(&self) -> f64 {
        self.k_boltzmann
    }

    pub fn unit_system(&self) -> UnitSystem {
        self.unit_system
    }

    /// Thermal energy kT.
    pub fn thermal_energy(&self, temperature: f64) -> f64 {
        self.k_boltzmann * temperature
    }

    /// Temperature at which ħω/kT equals `ratio`. An infinite ratio maps to T = 0.
    pub fn temperature_from_ratio(&self, omega: f64, ratio: f64) -> Result<f64> {
        require_positive("omega", omega)?;
        if ratio.is_nan() || ratio <= 0.0 {
            return Err(Error::invalid(
                "hbar_omega_over_kT",
                format!("must be > 0, got {ratio}"),
            ));
        }
        if ratio.is_infinite() {
            return Ok(0.0);
        }
        Ok(self.hbar * omega / (self.k_boltzmann * ratio))
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::natural()
    }
}

/// Geometry of a two-packet superposition: each Gaussian has variance σ² and
/// the centres are a distance `d` apart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatSpec {
    mass: f64,
    sigma: f64,
    d: f64,
}

impl CatSpec {
    pub fn new(mass: f64, sigma: f64, d: f64) -> Result<Self> {
        Ok(Self {
            mass: require_positive("mass", mass)?,
            sigma: require_positive("sigma", sigma)?,
            d: require_non_negative("d", d)?,
        })
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn sigma_sq(&self) -> f64 {
        self.sigma * self.sigma
    }

    pub fn d(&self) -> f64 {
        self.d
    }
}

/// Ohmic heat bath: decay rate γ and temperature T.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReservoirSpec {
    gamma: f64,
    temperature: f64,
}

impl ReservoirSpec {
    pub fn new(gamma: f64, temperature: f64) -> Result<Self> {
        Ok(Self {
            gamma: require_non_negative("gamma", gamma)?,
            temperature: require_non_negative("temperature", temperature)?,
        })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    /// Friction constant ζ = γm.
    pub fn zeta(&self, mass: f64) -> f64 {
        self.gamma * mass
    }
}

/// λ_th = ħ/√(mkT).
pub fn thermal_de_broglie(mass: f64, temperature: f64, constants: &PhysicalConstants) -> Result<f64> {
    if !(mass > 0.0 && mass.is_finite()) {
        return Err(Error::Domain(format!("mass must be > 0, got {mass}")));
    }
    if !(temperature > 0.0 && temperature.is_finite()) {
        return Err(Error::Domain(format!("temperature must be > 0, got {temperature}")));
    }
    Ok(constants.hbar() / (mass * constants.thermal_energy(temperature)).sqrt())
}

/// kT/(ħγ), evaluated exactly. The commonly quoted shortcut T(K)/γ(10¹¹ s⁻¹)
/// understates this by a factor k/ħ·10⁻¹¹ ≈ 1.31 in CGS.
pub fn classicality_ratio(temperature: f64, gamma: f64, constants: &PhysicalConstants) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(Error::Domain(format!("gamma must be > 0, got {gamma}")));
    }
    if !(temperature >= 0.0) {
        return Err(Error::Domain(format!("temperature must be >= 0, got {temperature}")));
    }
    Ok(constants.thermal_energy(temperature) / (constants.hbar() * gamma))
}

/// A notice that parameters sit near or outside the range where a regime
/// formula is meant to apply. Evaluation still proceeds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegimeWarning {
    pub regime: String,
    pub message: String,
}

impl RegimeWarning {
    pub fn new(regime: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            regime: regime.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for RegimeWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}", self.regime, self.message)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn natural_constants_are_unity() {
        let c = PhysicalConstants::natural();
        assert_eq!(c.hbar(), 1.0);
        assert_eq!(c.k_boltzmann(), 1.0);
        assert_eq!(PhysicalConstants::default(), c);
    }

    #[test]
    fn de_broglie_one_gram_room_temperature() {
        let lambda = thermal_de_broglie(1.0, 300.0, &PhysicalConstants::cgs()).unwrap();
        assert!((lambda / 5.2e-21 - 1.0).abs() < 0.01, "λ_th = {lambda}");
        let ratio = 1.0 / lambda;
        assert!((ratio / 2e20 - 1.0).abs() < 0.05, "d/λ_th = {ratio}");
    }

    #[test]
    fn de_broglie_natural_unity() {
        assert_eq!(thermal_de_broglie(1.0, 1.0, &PhysicalConstants::natural()).unwrap(), 1.0);
    }

    #[test]
    fn de_broglie_rejects_non_positive() {
        let c = PhysicalConstants::natural();
        assert!(matches!(thermal_de_broglie(0.0, 1.0, &c), Err(Error::Domain(_))));
        assert!(matches!(thermal_de_broglie(1.0, 0.0, &c), Err(Error::Domain(_))));
        assert!(matches!(thermal_de_broglie(1.0, -3.0, &c), Err(Error::Domain(_))));
    }

    #[test]
    fn classicality_ratio_cgs() {
        // k·(1 K)/(ħ·1e11 s⁻¹) evaluated with mpmath at 30 digits.
        let expected = 1.309_203_392_072_064;
        let got = classicality_ratio(1.0, 1e11, &PhysicalConstants::cgs()).unwrap();
        assert_relative_eq!(got, expected, max_relative = 1e-14);
    }

    #[test]
    fn classicality_ratio_edges() {
        let c = PhysicalConstants::natural();
        assert_eq!(classicality_ratio(0.0, 3.0, &c).unwrap(), 0.0);
        assert_eq!(classicality_ratio(1.0, 1.0, &c).unwrap(), 1.0);
        assert!(matches!(classicality_ratio(1.0, 0.0, &c), Err(Error::Domain(_))));
    }

    #[test]
    fn spec_validation() {
        assert!(CatSpec::new(1.0, 1.0, 0.0).is_ok());
        assert!(CatSpec::new(0.0, 1.0, 1.0).is_err());
        assert!(CatSpec::new(1.0, 0.0, 1.0).is_err());
        assert!(CatSpec::new(1.0, 1.0, -1.0).is_err());
        assert!(CatSpec::new(1.0, f64::NAN, 1.0).is_err());
        assert!(ReservoirSpec::new(-1.0, 1.0).is_err());
        assert!(ReservoirSpec::new(1.0, -1.0).is_err());
        assert_eq!(ReservoirSpec::new(0.5, 1.0).unwrap().zeta(4.0), 2.0);
    }

    #[test]
    fn temperature_from_ratio_round_trips() {
        let c = PhysicalConstants::cgs();
        let t = c.temperature_from_ratio(2.0e13, 0.7).unwrap();
        assert_relative_eq!(c.hbar() * 2.0e13 / c.thermal_energy(t), 0.7, max_relative = 1e-14);
        assert_eq!(c.temperature_from_ratio(1.0, f64::INFINITY).unwrap(), 0.0);
        assert!(c.temperature_from_ratio(1.0, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn de_broglie_identity(m in 1e-30f64..1e3, t in 1e-6f64..1e6) {
            for c in [PhysicalConstants::natural(), PhysicalConstants::cgs()] {
                let l = thermal_de_broglie(m, t, &c).unwrap();
                let lhs = l * l * m * c.thermal_energy(t);
                let rhs = c.hbar() * c.hbar();
                prop_assert!((lhs / rhs - 1.0).abs() < 1e-12);
            }
        }

        #[test]
        fn natural_rescales_to_cgs(m in 1e-27f64..1e2, t in 1e-3f64..1e4, gamma in 1e3f64..1e14) {
            let nat = PhysicalConstants::natural();
            let cgs = PhysicalConstants::cgs();
            // λ_cgs = ħ · λ_nat(m, kT)
            let l_cgs = thermal_de_broglie(m, t, &cgs).unwrap();
            let l_nat = thermal_de_broglie(m, K_BOLTZMANN_CGS * t, &nat).unwrap();
            prop_assert!((HBAR_CGS * l_nat / l_cgs - 1.0).abs() < 1e-10);
            // kT/ħγ is dimensionless: the natural ratio of (kT, ħγ) matches.
            let r_cgs = classicality_ratio(t, gamma, &cgs).unwrap();
            let r_nat = classicality_ratio(K_BOLTZMANN_CGS * t, HBAR_CGS * gamma, &nat).unwrap();
            prop_assert!((r_nat / r_cgs - 1.0).abs() < 1e-10);
        }
    }
}
