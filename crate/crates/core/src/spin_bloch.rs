//! Two-level system damped by a thermal boson bath, solved through the
//! polarization vector P = Tr(σρ).
//!
//! The frame carries no precession term: the generator is pure damping, so the
//! transverse polarization only decays.

use num_complex::Complex64 as C64;

use crate::error::{require_non_negative, require_positive, Error, Result};
use crate::fit::linear_fit;
use crate::linalg::{Matrix2, Vec3};
use crate::params::PhysicalConstants;

/// Trace and Hermiticity tolerance of a [`DensityMatrix2`].
pub const DENSITY_TOL: f64 = 1e-12;
/// Allowed excursion of eigenvalues outside [0, 1].
pub const EIGENVALUE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinBathSpec {
    gamma: f64,
    omega: f64,
    temperature: f64,
    g_n: Option<f64>,
    mu0: Option<f64>,
}

impl SpinBathSpec {
    pub fn new(gamma: f64, omega: f64, temperature: f64) -> Result<Self> {
        Ok(Self {
            gamma: require_positive("gamma", gamma)?,
            omega: require_positive("omega", omega)?,
            temperature: require_non_negative("temperature", temperature)?,
            g_n: None,
            mu0: None,
        })
    }

    /// Attaches the nuclear g factor and magneton used by [`magnetization`].
    pub fn with_magnetic(mut self, g_n: f64, mu0: f64) -> Result<Self> {
        if !g_n.is_finite() {
            return Err(Error::invalid("g_n", "must be finite"));
        }
        self.g_n = Some(g_n);
        self.mu0 = Some(require_positive("mu0", mu0)?);
        Ok(self)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn g_n(&self) -> Option<f64> {
        self.g_n
    }

    pub fn mu0(&self) -> Option<f64> {
        self.mu0
    }

    /// ħω/kT; infinite at T = 0.
    pub fn quantum_ratio(&self, constants: &PhysicalConstants) -> f64 {
        if self.temperature == 0.0 {
            f64::INFINITY
        } else {
            constants.hbar() * self.omega / constants.thermal_energy(self.temperature)
        }
    }
}

/// Thermal occupation n̄ = 1/(exp(ħω/kT) − 1), exactly 0 at T = 0.
pub fn nbar(omega: f64, temperature: f64, constants: &PhysicalConstants) -> f64 {
    if temperature == 0.0 {
        return 0.0;
    }
    let x = constants.hbar() * omega / constants.thermal_energy(temperature);
    x.exp_m1().recip()
}

fn spec_nbar(spec: &SpinBathSpec, constants: &PhysicalConstants) -> f64 {
    nbar(spec.omega, spec.temperature, constants)
}

/// P₀ = −1/(2n̄ + 1).
pub fn equilibrium_polarization(spec: &SpinBathSpec, constants: &PhysicalConstants) -> f64 {
    -(2.0 * spec_nbar(spec, constants) + 1.0).recip()
}

/// P₀ = −tanh(ħω/2kT), the second closed form.
pub fn equilibrium_polarization_tanh(spec: &SpinBathSpec, constants: &PhysicalConstants) -> f64 {
    -(0.5 * spec.quantum_ratio(constants)).tanh()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelaxationTimes {
    /// Longitudinal (spin-lattice).
    pub t1: f64,
    /// Transverse (dephasing), always 2·T₁.
    pub t2: f64,
}

/// 1/T₁ = γ(2n̄ + 1) = γ·coth(ħω/2kT); T₂ = 2T₁.
pub fn relaxation_times(spec: &SpinBathSpec, constants: &PhysicalConstants) -> RelaxationTimes {
    let t1 = (spec.gamma * (2.0 * spec_nbar(spec, constants) + 1.0)).recip();
    RelaxationTimes { t1, t2: 2.0 * t1 }
}

/// Polarization vector, |P| ≤ 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochState {
    p: Vec3,
}

impl BlochState {
    pub fn new(px: f64, py: f64, pz: f64) -> Result<Self> {
        Self::from_vector(Vec3::new(px, py, pz))
    }

    pub fn from_vector(p: Vec3) -> Result<Self> {
        let norm = p.norm();
        if !(norm <= 1.0 + EIGENVALUE_TOL) {
            return Err(Error::Domain(format!("|P| = {norm} exceeds 1")));
        }
        Ok(Self { p })
    }

    /// Thermal equilibrium (0, 0, P₀).
    pub fn equilibrium(spec: &SpinBathSpec, constants: &PhysicalConstants) -> Self {
        Self {
            p: Vec3::new(0.0, 0.0, equilibrium_polarization(spec, constants)),
        }
    }

    pub fn vector(&self) -> Vec3 {
        self.p
    }

    pub fn px(&self) -> f64 {
        self.p.x()
    }

    pub fn py(&self) -> f64 {
        self.p.y()
    }

    pub fn pz(&self) -> f64 {
        self.p.z()
    }

    pub fn norm(&self) -> f64 {
        self.p.norm()
    }

    pub fn is_pure(&self) -> bool {
        (self.p.norm() - 1.0).abs() <= EIGENVALUE_TOL
    }
}

/// dP/dt = −(γ/2)(2n̄+1)(P + P_z ẑ) − γẑ.
pub fn bloch_rhs(spec: &SpinBathSpec, p: Vec3, constants: &PhysicalConstants) -> Vec3 {
    let rate = spec.gamma * (2.0 * spec_nbar(spec, constants) + 1.0);
    Vec3::new(
        -0.5 * rate * p.x(),
        -0.5 * rate * p.y(),
        -rate * p.z() - spec.gamma,
    )
}

/// Closed-form trajectory: P_z relaxes to P₀ with T₁, the transverse part decays with T₂.
pub fn bloch_evolve(
    spec: &SpinBathSpec,
    initial: &BlochState,
    t: f64,
    constants: &PhysicalConstants,
) -> Result<BlochState> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("time must be finite and >= 0, got {t}")));
    }
    let RelaxationTimes { t1, t2 } = relaxation_times(spec, constants);
    let p0 = equilibrium_polarization(spec, constants);
    let long = (-t / t1).exp();
    let trans = (-t / t2).exp();
    Ok(BlochState {
        p: Vec3::new(
            initial.px() * trans,
            initial.py() * trans,
            p0 + (initial.pz() - p0) * long,
        ),
    })
}

/// Validated 2×2 density matrix in the (+, −) basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix2(Matrix2);

impl DensityMatrix2 {
    pub fn new(m: Matrix2) -> Result<Self> {
        Self::with_tolerance(m, DENSITY_TOL, EIGENVALUE_TOL)
    }

    /// Validates with caller-chosen trace/Hermiticity and eigenvalue tolerances.
    pub fn with_tolerance(m: Matrix2, tol: f64, eig_tol: f64) -> Result<Self> {
        let tr = m.trace();
        if !((tr.re - 1.0).abs() <= tol && tr.im.abs() <= tol) {
            return Err(Error::Invariant(format!("trace {tr} differs from 1")));
        }
        let herm = m.hermiticity_defect();
        if !(herm <= tol) {
            return Err(Error::Invariant(format!("hermiticity defect {herm:e}")));
        }
        let [lo, hi] = m.hermitian_eigenvalues();
        if !(lo >= -eig_tol && hi <= 1.0 + eig_tol) {
            return Err(Error::Invariant(format!("eigenvalues ({lo}, {hi}) outside [0, 1]")));
        }
        Ok(Self(m))
    }

    pub fn matrix(&self) -> &Matrix2 {
        &self.0
    }

    pub fn rho_pp(&self) -> f64 {
        self.0.get(0, 0).re
    }

    pub fn rho_mm(&self) -> f64 {
        self.0.get(1, 1).re
    }

    pub fn rho_pm(&self) -> C64 {
        self.0.get(0, 1)
    }

    pub fn rho_mp(&self) -> C64 {
        self.0.get(1, 0)
    }
}

/// ρ = ½(I + P·σ): ρ₊₊ = ½(1 + P_z), ρ₋₋ = ½(1 − P_z), ρ₊₋ = ½P₋, ρ₋₊ = ½P₊ with
/// P± = P_x ± iP_y.
pub fn density_from_polarization(state: &BlochState) -> DensityMatrix2 {
    let p = state.vector();
    let p_minus = C64::new(p.x(), -p.y());
    DensityMatrix2(Matrix2::new(
        C64::new(0.5 * (1.0 + p.z()), 0.0),
        0.5 * p_minus,
        0.5 * p_minus.conj(),
        C64::new(0.5 * (1.0 - p.z()), 0.0),
    ))
}

/// P_i = Tr(σ_i ρ).
pub fn polarization_from_density(rho: &DensityMatrix2) -> BlochState {
    BlochState {
        p: polarization_of(rho.matrix()),
    }
}

/// Tr(σρ) of an arbitrary matrix, real parts only.
pub fn polarization_of(m: &Matrix2) -> Vec3 {
    Vec3::new(
        (Matrix2::SIGMA_X * *m).trace().re,
        (Matrix2::SIGMA_Y * *m).trace().re,
        (Matrix2::SIGMA_Z * *m).trace().re,
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Magnetization {
    pub vector: Vec3,
    pub z: f64,
    /// Length of the transverse component.
    pub perp: f64,
}

/// ⟨M⟩ = −μ₀(g_n/2)·P.
pub fn magnetization(spec: &SpinBathSpec, state: &BlochState) -> Result<Magnetization> {
    let (Some(g_n), Some(mu0)) = (spec.g_n, spec.mu0) else {
        return Err(Error::Config(
            "magnetization needs g_n and mu0 on the spin bath".into(),
        ));
    };
    let vector = state.vector() * (-mu0 * g_n / 2.0);
    Ok(Magnetization {
        vector,
        z: vector.z(),
        perp: vector.transverse_norm(),
    })
}

/// M₀ = −μ₀(g_n/2)·P₀, the long-time value of ⟨M_z⟩.
pub fn saturation_magnetization(spec: &SpinBathSpec, constants: &PhysicalConstants) -> Result<f64> {
    magnetization(spec, &BlochState::equilibrium(spec, constants)).map(|m| m.z)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayRates {
    /// Fitted rate of ρ₊₊(t) − ρ₊₊(∞).
    pub diagonal: f64,
    /// Fitted rate of |ρ₊₋(t)|.
    pub off_diagonal: f64,
    pub max_residual: f64,
}

impl DecayRates {
    pub fn ratio(&self) -> f64 {
        self.diagonal / self.off_diagonal
    }
}

/// Log-linear fits of the diagonal and off-diagonal density-matrix decay along
/// the analytic trajectory on `[0, t_max]`. The initial state needs
/// P_z(0) ≠ P₀ and a non-zero transverse part.
pub fn fitted_decay_rates(
    spec: &SpinBathSpec,
    initial: &BlochState,
    t_max: f64,
    samples: usize,
    constants: &PhysicalConstants,
) -> Result<DecayRates> {
    if samples < 2 || !(t_max > 0.0) {
        return Err(Error::invalid("samples", "need at least two samples over t_max > 0"));
    }
    let rho_inf = density_from_polarization(&BlochState::equilibrium(spec, constants)).rho_pp();
    let mut times = Vec::with_capacity(samples);
    let mut log_diag = Vec::with_capacity(samples);
    let mut log_off = Vec::with_capacity(samples);
    for i in 0..samples {
        let t = t_max * i as f64 / (samples - 1) as f64;
        let rho = density_from_polarization(&bloch_evolve(spec, initial, t, constants)?);
        let diag = (rho.rho_pp() - rho_inf).abs();
        let off = rho.rho_pm().norm();
        if diag == 0.0 || off == 0.0 {
            return Err(Error::Numerical(format!(
                "decay signal vanished at t = {t}; pick an initial state off equilibrium with transverse polarization"
            )));
        }
        times.push(t);
        log_diag.push(diag.ln());
        log_off.push(off.ln());
    }
    let fd = linear_fit(&times, &log_diag).ok_or_else(|| Error::Numerical("diagonal fit failed".into()))?;
    let fo = linear_fit(&times, &log_off).ok_or_else(|| Error::Numerical("off-diagonal fit failed".into()))?;
    Ok(DecayRates {
        diagonal: -fd.slope,
        off_diagonal: -fo.slope,
        max_residual: fd.max_residual.max(fo.max_residual),
    })
}
