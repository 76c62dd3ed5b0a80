//! Decoherence of cat states and relaxation of a damped two-level system.
//!
//! * [`cat_free`]: free-particle cat-state density and attenuation factor a(t)
//!   for the no-bath, high-temperature, low-temperature and initially decoupled regimes.
//! * [`cat_oscillator`]: coherent-state cat with periodic revivals of a(t).
//! * [`spin_bloch`]: polarization-vector solution of the damped two-level system.
//! * [`oracle`]: quadrature and RK4 integration of the raw master equation, used
//!   to check the closed forms.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cat_free;
pub mod cat_oscillator;
pub mod error;
pub mod fit;
pub mod linalg;
pub mod oracle;
pub mod params;
pub mod spin_bloch;

pub use error::{Error, Result};
pub use linalg::{Matrix2, Vec3};
pub use params::{
    classicality_ratio, thermal_de_broglie, CatSpec, PhysicalConstants, RegimeWarning, ReservoirSpec,
    UnitSystem,
};
pub use cat_free::{CatField, ReservoirKinematics};
pub use cat_oscillator::OscillatorSpec;
pub use spin_bloch::{BlochState, DensityMatrix2, SpinBathSpec};
