//! Cat state of two coherent oscillator packets in a non-dissipative thermal
//! bath. The attenuation factor
//!
//! ```text
//! a(t) = exp{−mωd²·cos²ωt / (2ħ·sinh(ħω/kT))}
//! ```
//!
//! returns to unity whenever cos ωt = 0.

use std::f64::consts::{FRAC_PI_2, LN_2, PI};

use crate::cat_free::attenuation_high_t;
use crate::error::{require_non_negative, require_positive, Error, Result};
use crate::params::{CatSpec, PhysicalConstants, RegimeWarning};

/// Smallest kT/ħω at which the free-particle limit is expected to hold to 1%.
pub const FREE_LIMIT_MIN_THERMAL_RATIO: f64 = 1e3;
/// Largest ω·δt at which the free-particle limit is expected to hold to 1%.
pub const FREE_LIMIT_MAX_PHASE: f64 = 1e-2;
/// Relative agreement required of the free-particle limit inside its regime.
pub const FREE_LIMIT_TOLERANCE: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorSpec {
    mass: f64,
    omega: f64,
    d: f64,
    temperature: f64,
}

impl OscillatorSpec {
    /// Zero temperature is rejected: the attenuation formula is singular there.
    pub fn new(mass: f64, omega: f64, d: f64, temperature: f64) -> Result<Self> {
        Ok(Self {
            mass: require_positive("mass", mass)?,
            omega: require_positive("omega", omega)?,
            d: require_non_negative("d", d)?,
            temperature: require_positive("temperature", temperature)?,
        })
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    /// ħω/kT.
    pub fn quantum_ratio(&self, constants: &PhysicalConstants) -> f64 {
        constants.hbar() * self.omega / constants.thermal_energy(self.temperature)
    }
}

/// σ² = ħ/(2mω), the width of a coherent state.
pub fn coherent_width(spec: &OscillatorSpec, constants: &PhysicalConstants) -> f64 {
    constants.hbar() / (2.0 * spec.mass * spec.omega)
}

/// ln sinh(x) for x > 0 without overflow.
fn ln_sinh(x: f64) -> f64 {
    if x > 20.0 {
        x - LN_2 + (-(-2.0 * x).exp()).ln_1p()
    } else {
        x.sinh().ln()
    }
}

/// Exponent magnitude mωd²·c/(2ħ sinh(ħω/kT)) for a given c = cos²ωt, in log space.
fn depth(spec: &OscillatorSpec, cos_sq: f64, constants: &PhysicalConstants) -> f64 {
    let prefactor = spec.mass * spec.omega * spec.d * spec.d * cos_sq / (2.0 * constants.hbar());
    if prefactor == 0.0 {
        return 0.0;
    }
    (prefactor.ln() - ln_sinh(spec.quantum_ratio(constants))).exp()
}

pub fn attenuation_oscillator(
    spec: &OscillatorSpec,
    t: f64,
    constants: &PhysicalConstants,
) -> Result<f64> {
    if !t.is_finite() {
        return Err(Error::Domain(format!("time must be finite, got {t}")));
    }
    let c = (spec.omega * t).cos();
    Ok((-depth(spec, c * c, constants)).exp())
}

/// The deepest attenuation, reached when cos²ωt = 1.
pub fn minimum_attenuation(spec: &OscillatorSpec, constants: &PhysicalConstants) -> f64 {
    (-depth(spec, 1.0, constants)).exp()
}

/// The first `n_max` zeros of cos ωt: t_n = (2n+1)π/(2ω).
pub fn revival_times(spec: &OscillatorSpec, n_max: usize) -> Vec<f64> {
    (0..n_max)
        .map(|n| (2 * n + 1) as f64 * FRAC_PI_2 / spec.omega)
        .collect()
}

/// Half period π/ω of a(t).
pub fn attenuation_period(spec: &OscillatorSpec) -> f64 {
    PI / spec.omega
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitRow {
    pub delta_t: f64,
    /// Oscillator a(t₀ + δt), t₀ the first revival.
    pub oscillator: f64,
    /// Free-particle high-temperature a(δt) with σ² = ħ/(2mω).
    pub free_particle: f64,
    pub relative_difference: f64,
}

/// Comparison of the oscillator attenuation just after a revival with the
/// free-particle Gaussian decay, for ω → 0.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitReport {
    pub thermal_ratio: f64,
    pub max_phase: f64,
    pub rows: Vec<LimitRow>,
    pub max_relative_difference: f64,
    pub regime_satisfied: bool,
    pub warnings: Vec<RegimeWarning>,
}

impl LimitReport {
    /// True when the regime holds and the agreement is within 1%. Outside the
    /// regime nothing is claimed and this is false.
    pub fn passed(&self) -> bool {
        self.regime_satisfied && self.max_relative_difference < FREE_LIMIT_TOLERANCE
    }
}

pub fn free_particle_limit_check(
    spec: &OscillatorSpec,
    delta_t_grid: &[f64],
    constants: &PhysicalConstants,
) -> Result<LimitReport> {
    const REGIME: &str = "oscillator-free-limit";
    let thermal_ratio = spec.quantum_ratio(constants).recip();
    let max_phase = delta_t_grid
        .iter()
        .map(|dt| (spec.omega * dt).abs())
        .fold(0.0, f64::max);
    let mut warnings = Vec::new();
    if thermal_ratio < FREE_LIMIT_MIN_THERMAL_RATIO {
        warnings.push(RegimeWarning::new(
            REGIME,
            format!("kT/(hbar*omega) = {thermal_ratio:.3e} is below {FREE_LIMIT_MIN_THERMAL_RATIO:e}"),
        ));
    }
    if max_phase > FREE_LIMIT_MAX_PHASE {
        warnings.push(RegimeWarning::new(
            REGIME,
            format!("omega*delta_t reaches {max_phase:.3e}, above {FREE_LIMIT_MAX_PHASE:e}"),
        ));
    }

    let t0 = revival_times(spec, 1)[0];
    let cat = CatSpec::new(spec.mass, coherent_width(spec, constants).sqrt(), spec.d)?;
    let rows = delta_t_grid
        .iter()
        .map(|&delta_t| {
            let oscillator = attenuation_oscillator(spec, t0 + delta_t, constants)?;
            let free_particle = attenuation_high_t(&cat, spec.temperature, delta_t.abs(), constants)?;
            Ok(LimitRow {
                delta_t,
                oscillator,
                free_particle,
                relative_difference: (oscillator - free_particle).abs() / free_particle,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_relative_difference = rows
        .iter()
        .map(|r| r.relative_difference)
        .fold(0.0, f64::max);
    Ok(LimitReport {
        thermal_ratio,
        max_phase,
        rows,
        max_relative_difference,
        regime_satisfied: warnings.is_empty(),
        warnings,
    })
}
