//! Free-particle cat state: the two-packet probability distribution, its
//! interference term and the attenuation factor a(t) in each bath regime.
//!
//! All regimes are described by a [`ReservoirKinematics`]: the real commutator
//! magnitude c(t), with [x(0), x(t)] = i·c(t), and the mean-square displacement
//! s(t). Together they give the single-packet variance
//!
//! ```text
//! w²(t) = σ² + c(t)²/(4σ²) + s(t)
//! a(t)  = exp(−s(t)·d² / (8σ²·w²(t)))
//! ```

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::params::{
    classicality_ratio, thermal_de_broglie, CatSpec, PhysicalConstants, RegimeWarning, ReservoirSpec,
};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Default number of samples in a [`CatField`] grid.
pub const DEFAULT_GRID_POINTS: usize = 2048;
/// Default half-width of the grid beyond each packet centre, in units of w(t).
pub const DEFAULT_GRID_WIDTHS: f64 = 6.0;
/// Ratio below which a "much greater than" regime condition is reported.
pub const REGIME_RATIO_THRESHOLD: f64 = 10.0;

/// Time window on which a kinematics model is meant to hold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Validity {
    pub start: f64,
    pub end: f64,
    pub end_inclusive: bool,
}

impl Validity {
    pub const ALL_TIME: Validity = Validity {
        start: 0.0,
        end: f64::INFINITY,
        end_inclusive: false,
    };

    pub fn contains(&self, t: f64) -> bool {
        t >= self.start && (t < self.end || (self.end_inclusive && t == self.end))
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Model {
    Free {
        hbar_over_m: f64,
    },
    OhmicHighT {
        hbar_over_m: f64,
        kt_over_m: f64,
    },
    Tabulated {
        times: Vec<f64>,
        commutator: Vec<f64>,
        msd: Vec<f64>,
    },
}

/// The pair (c(t), s(t)) that fixes w²(t) and a(t) for one bath regime.
#[derive(Debug, Clone, PartialEq)]
pub struct ReservoirKinematics {
    model: Model,
    validity: Validity,
    label: String,
    keep_commutator: bool,
}

/// No bath: s(t) = 0 and c(t) = ħt/m.
pub fn free_kinematics(mass: f64, constants: &PhysicalConstants) -> Result<ReservoirKinematics> {
    if !(mass > 0.0 && mass.is_finite()) {
        return Err(Error::Domain(format!("mass must be > 0, got {mass}")));
    }
    Ok(ReservoirKinematics {
        model: Model::Free {
            hbar_over_m: constants.hbar() / mass,
        },
        validity: Validity::ALL_TIME,
        label: "free".into(),
        keep_commutator: true,
    })
}

/// Ohmic bath at high temperature and short times: s(t) = (kT/m)t², c(t) = ħt/m,
/// valid for γt < 1. γ = 0 is accepted and leaves the window unbounded.
pub fn ohmic_high_t_kinematics(
    mass: f64,
    temperature: f64,
    gamma: f64,
    constants: &PhysicalConstants,
) -> Result<ReservoirKinematics> {
    if !(mass > 0.0 && mass.is_finite()) {
        return Err(Error::Domain(format!("mass must be > 0, got {mass}")));
    }
    if !(temperature > 0.0 && temperature.is_finite()) {
        return Err(Error::Domain(format!("temperature must be > 0, got {temperature}")));
    }
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(Error::Domain(format!("gamma must be >= 0, got {gamma}")));
    }
    Ok(ReservoirKinematics {
        model: Model::OhmicHighT {
            hbar_over_m: constants.hbar() / mass,
            kt_over_m: constants.thermal_energy(temperature) / mass,
        },
        validity: Validity {
            start: 0.0,
            end: 1.0 / gamma,
            end_inclusive: false,
        },
        label: "ohmic-high-t".into(),
        keep_commutator: true,
    })
}

impl ReservoirKinematics {
    /// User-supplied samples of c(t) and s(t), linearly interpolated. The table
    /// must start at t = 0 with c = s = 0.
    pub fn tabulated(
        label: impl Into<String>,
        times: Vec<f64>,
        commutator: Vec<f64>,
        msd: Vec<f64>,
    ) -> Result<Self> {
        if times.len() < 2 || times.len() != commutator.len() || times.len() != msd.len() {
            return Err(Error::invalid(
                "kinematics table",
                "needs at least two rows and equal column lengths",
            ));
        }
        if times[0] != 0.0 || commutator[0] != 0.0 || msd[0] != 0.0 {
            return Err(Error::invalid(
                "kinematics table",
                "must start at t = 0 with c(0) = s(0) = 0",
            ));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("kinematics table", "times must be strictly increasing"));
        }
        if msd.iter().any(|&s| !(s >= 0.0 && s.is_finite())) {
            return Err(Error::invalid("kinematics table", "s(t) must be finite and >= 0"));
        }
        if commutator.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("kinematics table", "c(t) must be finite"));
        }
        let end = *times.last().unwrap();
        Ok(Self {
            model: Model::Tabulated {
                times,
                commutator,
                msd,
            },
            validity: Validity {
                start: 0.0,
                end,
                end_inclusive: true,
            },
            label: label.into(),
            keep_commutator: true,
        })
    }

    /// The ħ → 0 limit: the commutator contribution to w²(t) is dropped.
    pub fn without_commutator(mut self) -> Self {
        self.keep_commutator = false;
        self.label.push_str("+classical");
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn validity(&self) -> Validity {
        self.validity
    }

    /// c(t), where [x(0), x(t)] = i·c(t).
    pub fn commutator_magnitude(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        if !self.keep_commutator {
            return Ok(0.0);
        }
        match &self.model {
            Model::Free { hbar_over_m } | Model::OhmicHighT { hbar_over_m, .. } => Ok(hbar_over_m * t),
            Model::Tabulated {
                times, commutator, ..
            } => interpolate(times, commutator, t),
        }
    }

    /// Mean-square displacement s(t) = ⟨(x(t) − x(0))²⟩.
    pub fn msd(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        match &self.model {
            Model::Free { .. } => Ok(0.0),
            Model::OhmicHighT { kt_over_m, .. } => Ok(kt_over_m * t * t),
            Model::Tabulated { times, msd, .. } => interpolate(times, msd, t),
        }
    }

    /// A warning when `t` falls outside the validity window.
    pub fn window_warning(&self, t: f64) -> Option<RegimeWarning> {
        if self.validity.contains(t) {
            None
        } else {
            Some(RegimeWarning::new(
                self.label.clone(),
                format!(
                    "t = {t} lies outside the validity window [{}, {})",
                    self.validity.start, self.validity.end
                ),
            ))
        }
    }
}

fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("time must be finite and >= 0, got {t}")))
    }
}

fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> Result<f64> {
    let last = xs.len() - 1;
    if x < xs[0] || x > xs[last] {
        return Err(Error::Domain(format!(
            "t = {x} outside tabulated range [{}, {}]",
            xs[0], xs[last]
        )));
    }
    let i = xs.partition_point(|&xi| xi <= x).clamp(1, last);
    let (x0, x1) = (xs[i - 1], xs[i]);
    let f = (x - x0) / (x1 - x0);
    Ok(ys[i - 1] + f * (ys[i] - ys[i - 1]))
}

/// Single-packet variance w²(t) = σ² + c(t)²/(4σ²) + s(t).
pub fn packet_variance(kin: &ReservoirKinematics, sigma: f64, t: f64) -> Result<f64> {
    let c = kin.commutator_magnitude(t)?;
    let s = kin.msd(t)?;
    let s2 = sigma * sigma;
    let w2 = s2 + c * c / (4.0 * s2) + s;
    if !(w2 > 0.0 && w2.is_finite()) {
        return Err(Error::RegimeBreakdown {
            t,
            reason: format!("packet variance w² = {w2} is not positive"),
        });
    }
    Ok(w2)
}

/// Centred Gaussian density with variance `w2`.
pub fn single_packet_prob(w2: f64, x: f64) -> Result<f64> {
    if !(w2 > 0.0 && w2.is_finite()) {
        return Err(Error::Domain(format!("variance must be > 0, got {w2}")));
    }
    Ok(gaussian(w2, x))
}

#[inline]
fn gaussian(w2: f64, x: f64) -> f64 {
    (-x * x / (2.0 * w2)).exp() / (2.0 * PI * w2).sqrt()
}

/// N = [2(1 + exp(−d²/8σ²))]^{-1/2}.
pub fn normalization_constant(sigma: f64, d: f64) -> f64 {
    debug_assert!(sigma > 0.0);
    (2.0 * (1.0 + overlap_factor(sigma, d))).sqrt().recip()
}

/// exp(−d²/8σ²): the integrated weight of the interference term relative to a direct term.
pub fn overlap_factor(sigma: f64, d: f64) -> f64 {
    (-d * d / (8.0 * sigma * sigma)).exp()
}

/// Components of the cat-state density at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatParts {
    /// N²·P0(x − d/2)
    pub p1: f64,
    /// N²·P0(x + d/2)
    pub p2: f64,
    /// N²·exp(−d²/8w²)·a·P0(x), the interference amplitude P_I.
    pub envelope: f64,
    /// θ = c·x·d / (4σ²w²)
    pub phase: f64,
}

impl CatParts {
    pub fn interference_term(&self) -> f64 {
        self.envelope * self.phase.cos()
    }

    pub fn total(&self) -> f64 {
        self.p1 + self.p2 + 2.0 * self.interference_term()
    }
}

/// The cat-state distribution frozen at one time, evaluable at any x.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatDistribution {
    spec: CatSpec,
    time: f64,
    w2: f64,
    attenuation: f64,
    norm_sq: f64,
    envelope_amplitude: f64,
    phase_rate: f64,
}

impl CatDistribution {
    pub fn new(spec: &CatSpec, kin: &ReservoirKinematics, t: f64) -> Result<Self> {
        let w2 = packet_variance(kin, spec.sigma(), t)?;
        let s = kin.msd(t)?;
        let c = kin.commutator_magnitude(t)?;
        let attenuation = attenuation_from_variance(spec, s, w2)?;
        let n = normalization_constant(spec.sigma(), spec.d());
        let norm_sq = n * n;
        let d = spec.d();
        Ok(Self {
            spec: *spec,
            time: t,
            w2,
            attenuation,
            norm_sq,
            envelope_amplitude: norm_sq * (-d * d / (8.0 * w2)).exp() * attenuation,
            phase_rate: c * d / (4.0 * spec.sigma_sq() * w2),
        })
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn variance(&self) -> f64 {
        self.w2
    }

    pub fn attenuation(&self) -> f64 {
        self.attenuation
    }

    pub fn spec(&self) -> &CatSpec {
        &self.spec
    }

    pub fn parts_at(&self, x: f64) -> CatParts {
        let half = 0.5 * self.spec.d();
        CatParts {
            p1: self.norm_sq * gaussian(self.w2, x - half),
            p2: self.norm_sq * gaussian(self.w2, x + half),
            envelope: self.envelope_amplitude * gaussian(self.w2, x),
            phase: self.phase_rate * x,
        }
    }

    pub fn density_at(&self, x: f64) -> f64 {
        self.parts_at(x).total()
    }

    /// Uniform grid over [−d/2 − k·w, d/2 + k·w].
    pub fn grid(&self, widths: f64, points: usize) -> Vec<f64> {
        let reach = 0.5 * self.spec.d() + widths * self.w2.sqrt();
        uniform_grid(-reach, reach, points)
    }
}

/// `points` evenly spaced samples over [lo, hi], endpoints included.
pub fn uniform_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / (points - 1) as f64;
            (0..points)
                .map(|i| if i == points - 1 { hi } else { lo + step * i as f64 })
                .collect()
        }
    }
}

/// The cat-state density sampled on a grid, with each term kept separately.
#[derive(Debug, Clone, PartialEq)]
pub struct CatField {
    time: f64,
    grid: Vec<f64>,
    values: Vec<f64>,
    p1: Vec<f64>,
    p2: Vec<f64>,
    envelope: Vec<f64>,
    interference: Vec<f64>,
}

impl CatField {
    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    /// P(x, t) = P₁ + P₂ + 2·P_I·cosθ.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn p1(&self) -> &[f64] {
        &self.p1
    }

    pub fn p2(&self) -> &[f64] {
        &self.p2
    }

    /// P_I, the interference amplitude before the cosine.
    pub fn envelope(&self) -> &[f64] {
        &self.envelope
    }

    /// P_I·cosθ.
    pub fn interference_term(&self) -> &[f64] {
        &self.interference
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }
}

/// Samples the cat-state distribution on `x_grid` (strictly increasing).
pub fn cat_probability(
    spec: &CatSpec,
    kin: &ReservoirKinematics,
    t: f64,
    x_grid: &[f64],
) -> Result<CatField> {
    if x_grid.is_empty() {
        return Err(Error::invalid("x_grid", "must not be empty"));
    }
    if x_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid("x_grid", "must be strictly increasing"));
    }
    let dist = CatDistribution::new(spec, kin, t)?;
    let n = x_grid.len();
    let mut field = CatField {
        time: t,
        grid: x_grid.to_vec(),
        values: Vec::with_capacity(n),
        p1: Vec::with_capacity(n),
        p2: Vec::with_capacity(n),
        envelope: Vec::with_capacity(n),
        interference: Vec::with_capacity(n),
    };
    for &x in x_grid {
        let parts = dist.parts_at(x);
        field.values.push(parts.total());
        field.p1.push(parts.p1);
        field.p2.push(parts.p2);
        field.envelope.push(parts.envelope);
        field.interference.push(parts.interference_term());
    }
    Ok(field)
}

/// The default grid: [−d/2 − 6w, d/2 + 6w] with 2048 samples.
pub fn default_grid(spec: &CatSpec, kin: &ReservoirKinematics, t: f64) -> Result<Vec<f64>> {
    Ok(CatDistribution::new(spec, kin, t)?.grid(DEFAULT_GRID_WIDTHS, DEFAULT_GRID_POINTS))
}

/// a(t) = exp(−s·d²/(8σ²w²)) for a given s and w².
pub fn attenuation_from_variance(spec: &CatSpec, msd: f64, w2: f64) -> Result<f64> {
    if !(w2 > 0.0) {
        return Err(Error::Domain(format!("variance must be > 0, got {w2}")));
    }
    let d = spec.d();
    Ok((-msd * d * d / (8.0 * spec.sigma_sq() * w2)).exp())
}

/// The general closed form of a(t) for any kinematics.
pub fn attenuation_exact(spec: &CatSpec, kin: &ReservoirKinematics, t: f64) -> Result<f64> {
    let w2 = packet_variance(kin, spec.sigma(), t)?;
    attenuation_from_variance(spec, kin.msd(t)?, w2)
}

/// a(t) recovered from a sampled field as P_I / √(P₁P₂).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldAttenuation {
    /// Mean of the pointwise ratio.
    pub mean: f64,
    /// Largest |ratio − mean| over the points used.
    pub max_deviation: f64,
    pub points_used: usize,
}

/// Recovers a(t) from the interference amplitude and the two direct terms.
/// Points where any factor underflows are skipped.
pub fn attenuation_from_field(field: &CatField) -> Result<FieldAttenuation> {
    let ratios: Vec<f64> = field
        .p1
        .iter()
        .zip(&field.p2)
        .zip(&field.envelope)
        .filter(|((&p1, &p2), &pi)| {
            p1 >= f64::MIN_POSITIVE && p2 >= f64::MIN_POSITIVE && pi >= f64::MIN_POSITIVE
        })
        .map(|((&p1, &p2), &pi)| pi / (p1.sqrt() * p2.sqrt()))
        .filter(|r| r.is_finite())
        .collect();
    if ratios.is_empty() {
        return Err(Error::Numerical(
            "no grid point with representable P1·P2 and P_I".into(),
        ));
    }
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let max_deviation = ratios.iter().map(|r| (r - mean).abs()).fold(0.0, f64::max);
    Ok(FieldAttenuation {
        mean,
        max_deviation,
        points_used: ratios.len(),
    })
}

/// τ_d = √8·σ² / (√(kT/m)·d) of the high-temperature Ohmic regime.
pub fn high_t_decoherence_time(
    spec: &CatSpec,
    temperature: f64,
    constants: &PhysicalConstants,
) -> Result<f64> {
    require_temperature(temperature)?;
    let thermal_velocity = (constants.thermal_energy(temperature) / spec.mass()).sqrt();
    Ok(8f64.sqrt() * spec.sigma_sq() / (thermal_velocity * spec.d()))
}

/// High temperature, short time, w² ≈ σ²: a(t) = exp(−(t/τ_d)²).
pub fn attenuation_high_t(
    spec: &CatSpec,
    temperature: f64,
    t: f64,
    constants: &PhysicalConstants,
) -> Result<f64> {
    require_temperature(temperature)?;
    check_time(t)?;
    let d = spec.d();
    let s2 = spec.sigma_sq();
    let rate = constants.thermal_energy(temperature) * d * d / (8.0 * spec.mass() * s2 * s2);
    Ok((-rate * t * t).exp())
}

fn require_temperature(temperature: f64) -> Result<()> {
    if temperature > 0.0 && temperature.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("temperature must be > 0, got {temperature}")))
    }
}

fn require_zeta(zeta: f64) -> Result<()> {
    if zeta > 0.0 && zeta.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("zeta must be > 0, got {zeta}")))
    }
}

/// τ₀ = (mσ²/d)·√(8π/(ħζ)) of the low-temperature regime.
pub fn low_t_time_scale(spec: &CatSpec, zeta: f64, constants: &PhysicalConstants) -> Result<f64> {
    require_zeta(zeta)?;
    Ok(spec.mass() * spec.sigma_sq() / spec.d() * (8.0 * PI / (constants.hbar() * zeta)).sqrt())
}

/// Low-temperature Ohmic regime:
/// a(t) = exp{(t/τ₀)²·[ln(ζt/m) + γ_E − 3/2]}, for t < m/ζ.
pub fn attenuation_low_t(
    spec: &CatSpec,
    zeta: f64,
    t: f64,
    constants: &PhysicalConstants,
) -> Result<f64> {
    require_zeta(zeta)?;
    check_time(t)?;
    let m = spec.mass();
    if t >= m / zeta {
        return Err(Error::Domain(format!(
            "low-temperature formula needs t < m/zeta = {}, got t = {t}",
            m / zeta
        )));
    }
    if t == 0.0 || spec.d() == 0.0 {
        return Ok(1.0);
    }
    // (t/τ₀)² = t²·d²·ħζ / (8π·m²·σ⁴), written without forming τ₀.
    let d = spec.d();
    let s2 = spec.sigma_sq();
    let scaled = t * t * d * d * constants.hbar() * zeta / (8.0 * PI * m * m * s2 * s2);
    Ok((scaled * ((zeta * t / m).ln() + EULER_GAMMA - 1.5)).exp())
}

/// τ_d = 3ħ²/(ζkTd²), the point-slit limit of the initially decoupled result.
pub fn decoupled_decoherence_time(
    zeta: f64,
    temperature: f64,
    d: f64,
    constants: &PhysicalConstants,
) -> Result<f64> {
    require_zeta(zeta)?;
    require_temperature(temperature)?;
    let hbar = constants.hbar();
    Ok(3.0 * hbar * hbar / (zeta * constants.thermal_energy(temperature) * d * d))
}

/// System prepared at zero temperature and coupled to a hot Ohmic bath at t = 0:
/// a(t) = exp{−ζkTd²t³ / (12m²σ⁴ + 3ħ²t²)}, for t < m/ζ.
pub fn attenuation_decoupled_high_t(
    spec: &CatSpec,
    zeta: f64,
    temperature: f64,
    t: f64,
    constants: &PhysicalConstants,
) -> Result<f64> {
    if !(zeta >= 0.0 && zeta.is_finite()) {
        return Err(Error::Domain(format!("zeta must be >= 0, got {zeta}")));
    }
    if !(temperature >= 0.0 && temperature.is_finite()) {
        return Err(Error::Domain(format!("temperature must be >= 0, got {temperature}")));
    }
    check_time(t)?;
    let m = spec.mass();
    if zeta > 0.0 && t >= m / zeta {
        return Err(Error::Domain(format!(
            "decoupled formula needs t < m/zeta = {}, got t = {t}",
            m / zeta
        )));
    }
    if t == 0.0 {
        return Ok(1.0);
    }
    let d = spec.d();
    let s2 = spec.sigma_sq();
    let hbar = constants.hbar();
    let numerator = zeta * constants.thermal_energy(temperature) * d * d * t * t * t;
    let denominator = 12.0 * m * m * s2 * s2 + 3.0 * hbar * hbar * t * t;
    Ok((-numerator / denominator).exp())
}

fn ratio_warning(regime: &str, what: &str, ratio: f64) -> Option<RegimeWarning> {
    (ratio < REGIME_RATIO_THRESHOLD).then(|| {
        RegimeWarning::new(
            regime,
            format!("{what} = {ratio:.3e} is below {REGIME_RATIO_THRESHOLD}"),
        )
    })
}

/// Conditions of the high-temperature entangled regime: kT ≫ ħγ, γt ≪ 1, d ≫ λ_th, σ.
pub fn high_t_regime_warnings(
    spec: &CatSpec,
    reservoir: &ReservoirSpec,
    t_max: f64,
    constants: &PhysicalConstants,
) -> Vec<RegimeWarning> {
    const REGIME: &str = "high-t";
    let mut out = Vec::new();
    let temperature = reservoir.temperature();
    if temperature <= 0.0 {
        out.push(RegimeWarning::new(REGIME, "temperature is zero; high-temperature regime does not apply"));
        return out;
    }
    let gamma = reservoir.gamma();
    if gamma > 0.0 {
        if let Ok(r) = classicality_ratio(temperature, gamma, constants) {
            out.extend(ratio_warning(REGIME, "kT/(hbar*gamma)", r));
        }
        if gamma * t_max >= 1.0 {
            out.push(RegimeWarning::new(
                REGIME,
                format!("gamma*t_max = {:.3e} is not small; formula assumes gamma*t << 1", gamma * t_max),
            ));
        }
    }
    if let Ok(lambda) = thermal_de_broglie(spec.mass(), temperature, constants) {
        out.extend(ratio_warning(REGIME, "d/lambda_th", spec.d() / lambda));
    }
    out.extend(ratio_warning(REGIME, "d/sigma", spec.d() / spec.sigma()));
    out
}

/// Conditions of the low-temperature regime. The lower cutoff τ of its window
/// is never given numerically, so a notice about it is always included.
pub fn low_t_regime_warnings(
    reservoir: &ReservoirSpec,
    constants: &PhysicalConstants,
) -> Vec<RegimeWarning> {
    const REGIME: &str = "low-t";
    let mut out = vec![RegimeWarning::new(
        REGIME,
        "validity also requires t >> tau, a bath cutoff time that is not specified; only t < m/zeta is enforced",
    )];
    if reservoir.gamma() > 0.0 {
        if let Ok(r) = classicality_ratio(reservoir.temperature(), reservoir.gamma(), constants) {
            if r * REGIME_RATIO_THRESHOLD > 1.0 {
                out.push(RegimeWarning::new(
                    REGIME,
                    format!("kT/(hbar*gamma) = {r:.3e} is not small; formula assumes kT << hbar*gamma"),
                ));
            }
        }
    }
    out
}

/// Conditions of the initially decoupled high-temperature result: t ≪ m/ζ.
pub fn decoupled_regime_warnings(
    spec: &CatSpec,
    reservoir: &ReservoirSpec,
    t_max: f64,
    constants: &PhysicalConstants,
) -> Vec<RegimeWarning> {
    const REGIME: &str = "decoupled-high-t";
    let mut out = Vec::new();
    let zeta = reservoir.zeta(spec.mass());
    if zeta > 0.0 && t_max > spec.mass() / (REGIME_RATIO_THRESHOLD * zeta) {
        out.push(RegimeWarning::new(
            REGIME,
            format!(
                "t_max = {t_max:.3e} exceeds m/(10*zeta) = {:.3e}; formula assumes t << m/zeta",
                spec.mass() / (REGIME_RATIO_THRESHOLD * zeta)
            ),
        ));
    }
    if reservoir.gamma() > 0.0 {
        if let Ok(r) = classicality_ratio(reservoir.temperature(), reservoir.gamma(), constants) {
            out.extend(ratio_warning(REGIME, "kT/(hbar*gamma)", r));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn nat() -> PhysicalConstants {
        PhysicalConstants::natural()
    }

    #[test]
    fn free_kinematics_values() {
        let k = free_kinematics(1.0, &nat()).unwrap();
        assert_eq!(k.commutator_magnitude(2.0).unwrap(), 2.0);
        assert_eq!(k.msd(2.0).unwrap(), 0.0);
        assert_eq!(k.commutator_magnitude(0.0).unwrap(), 0.0);
        let k2 = free_kinematics(2.0, &nat()).unwrap();
        assert_eq!(k2.commutator_magnitude(1.0).unwrap(), 0.5);
        assert!(k.validity().contains(1e300));
        assert!(free_kinematics(0.0, &nat()).is_err());
    }

    #[test]
    fn ohmic_kinematics_values() {
        let k = ohmic_high_t_kinematics(1.0, 1.0, 0.1, &nat()).unwrap();
        assert_eq!(k.msd(3.0).unwrap(), 9.0);
        assert_eq!(k.msd(0.0).unwrap(), 0.0);
        assert_eq!(k.validity().end, 10.0);
        assert!(!k.validity().contains(10.0));
        assert!(k.window_warning(10.0).is_some());
        assert!(k.window_warning(9.9).is_none());
        assert!(matches!(
            ohmic_high_t_kinematics(1.0, 0.0, 0.1, &nat()),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            ohmic_high_t_kinematics(-1.0, 1.0, 0.1, &nat()),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn negative_time_rejected() {
        let k = free_kinematics(1.0, &nat()).unwrap();
        assert!(matches!(k.msd(-1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn variance_examples() {
        // ħ/m = 2 via m = 0.5
        let k = free_kinematics(0.5, &nat()).unwrap();
        assert_eq!(packet_variance(&k, 1.0, 1.0).unwrap(), 2.0);
        assert_eq!(packet_variance(&k, 1.7, 0.0).unwrap(), 1.7 * 1.7);
        let classical = ohmic_high_t_kinematics(1.0, 1.0, 0.01, &nat())
            .unwrap()
            .without_commutator();
        assert_eq!(packet_variance(&classical, 1.0, 2.0).unwrap(), 5.0);
    }

    #[test]
    fn variance_breakdown_on_bad_table() {
        // A table with s ≥ 0 cannot break down, but a non-finite w² from huge c can.
        let k = ReservoirKinematics::tabulated(
            "huge",
            vec![0.0, 1.0],
            vec![0.0, 1e300],
            vec![0.0, 0.0],
        )
        .unwrap();
        assert!(matches!(
            packet_variance(&k, 1e-10, 1.0),
            Err(Error::RegimeBreakdown { .. })
        ));
    }

    #[test]
    fn tabulated_interpolation_and_validation() {
        let k = ReservoirKinematics::tabulated(
            "table",
            vec![0.0, 1.0, 3.0],
            vec![0.0, 2.0, 4.0],
            vec![0.0, 1.0, 5.0],
        )
        .unwrap();
        assert_eq!(k.commutator_magnitude(0.5).unwrap(), 1.0);
        assert_eq!(k.msd(2.0).unwrap(), 3.0);
        assert_eq!(k.msd(3.0).unwrap(), 5.0);
        assert!(k.validity().contains(3.0));
        assert!(k.msd(3.5).is_err());
        assert!(ReservoirKinematics::tabulated("x", vec![0.0], vec![0.0], vec![0.0]).is_err());
        assert!(ReservoirKinematics::tabulated("x", vec![0.0, 1.0], vec![1.0, 0.0], vec![0.0, 0.0]).is_err());
        assert!(ReservoirKinematics::tabulated("x", vec![0.0, 0.0], vec![0.0, 0.0], vec![0.0, 0.0]).is_err());
        assert!(ReservoirKinematics::tabulated("x", vec![0.0, 1.0], vec![0.0, 0.0], vec![0.0, -1.0]).is_err());
    }

    #[test]
    fn single_packet_values() {
        let p = single_packet_prob(1.0, 0.0).unwrap();
        assert_relative_eq!(p, 0.398_942_280_401_432_7, max_relative = 1e-15);
        for x in [0.3, 1.0, 4.5] {
            assert_eq!(single_packet_prob(2.0, x).unwrap(), single_packet_prob(2.0, -x).unwrap());
        }
        assert!(single_packet_prob(0.0, 1.0).is_err());
    }

    #[test]
    fn normalization_examples() {
        assert_eq!(normalization_constant(1.0, 0.0), 0.5);
        assert!((overlap_factor(1.0, 5.0) / 4.4e-2 - 1.0).abs() < 0.02);
        assert_relative_eq!(normalization_constant(1.0, 1e3), 0.5f64.sqrt(), max_relative = 1e-15);
    }

    #[test]
    fn degenerate_cat_is_single_gaussian() {
        let spec = CatSpec::new(1.0, 0.7, 0.0).unwrap();
        let k = free_kinematics(1.0, &nat()).unwrap();
        let grid = uniform_grid(-3.0, 3.0, 61);
        let field = cat_probability(&spec, &k, 0.0, &grid).unwrap();
        for (&x, &v) in grid.iter().zip(field.values()) {
            assert_relative_eq!(v, gaussian(0.49, x), max_relative = 1e-14);
        }
    }

    #[test]
    fn field_decomposition_holds() {
        let spec = CatSpec::new(1.0, 1.0, 4.0).unwrap();
        let k = ohmic_high_t_kinematics(1.0, 2.0, 0.01, &nat()).unwrap();
        let grid = default_grid(&spec, &k, 0.8).unwrap();
        assert_eq!(grid.len(), DEFAULT_GRID_POINTS);
        let f = cat_probability(&spec, &k, 0.8, &grid).unwrap();
        for i in 0..f.len() {
            assert!(f.p1()[i] >= 0.0 && f.p2()[i] >= 0.0);
            let sum = f.p1()[i] + f.p2()[i] + 2.0 * f.interference_term()[i];
            assert_eq!(f.values()[i], sum);
        }
    }

    #[test]
    fn cat_probability_rejects_bad_grid() {
        let spec = CatSpec::new(1.0, 1.0, 1.0).unwrap();
        let k = free_kinematics(1.0, &nat()).unwrap();
        assert!(cat_probability(&spec, &k, 0.0, &[0.0, 0.0]).is_err());
        assert!(cat_probability(&spec, &k, 0.0, &[]).is_err());
    }

    #[test]
    fn exact_attenuation_examples() {
        let spec = CatSpec::new(1.0, 1.0, 2.0).unwrap();
        let free = free_kinematics(1.0, &nat()).unwrap();
        for t in [0.0, 0.5, 10.0] {
            assert_eq!(attenuation_exact(&spec, &free, t).unwrap(), 1.0);
        }
        // s = 1, w² = 2
        assert_relative_eq!(
            attenuation_from_variance(&spec, 1.0, 2.0).unwrap(),
            (-0.25f64).exp(),
            max_relative = 1e-15
        );
        let ohmic = ohmic_high_t_kinematics(1.0, 3.0, 0.1, &nat()).unwrap();
        assert_eq!(attenuation_exact(&spec, &ohmic, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn field_attenuation_without_reservoir_is_one() {
        let spec = CatSpec::new(1.0, 1.0, 6.0).unwrap();
        let free = free_kinematics(1.0, &nat()).unwrap();
        for t in [0.0, 1.0, 5.0] {
            let grid = default_grid(&spec, &free, t).unwrap();
            let f = cat_probability(&spec, &free, t, &grid).unwrap();
            let a = attenuation_from_field(&f).unwrap();
            assert!((a.mean - 1.0).abs() < 1e-12);
            assert!(a.max_deviation < 1e-12);
        }
    }

    #[test]
    fn high_t_examples() {
        let spec = CatSpec::new(1.0, 1.0, 2.0).unwrap();
        // kT/m = 2
        assert_relative_eq!(high_t_decoherence_time(&spec, 2.0, &nat()).unwrap(), 1.0, max_relative = 1e-15);
        assert_relative_eq!(
            attenuation_high_t(&spec, 2.0, 1.0, &nat()).unwrap(),
            (-1.0f64).exp(),
            max_relative = 1e-15
        );
        assert_eq!(attenuation_high_t(&spec, 2.0, 0.0, &nat()).unwrap(), 1.0);
        assert!(matches!(attenuation_high_t(&spec, 0.0, 1.0, &nat()), Err(Error::Domain(_))));
    }

    #[test]
    fn high_t_matches_exact_with_frozen_width() {
        let spec = CatSpec::new(1.3, 0.4, 3.0).unwrap();
        let k = ohmic_high_t_kinematics(1.3, 2.5, 0.05, &nat()).unwrap();
        for t in [0.0, 0.1, 0.7, 2.0] {
            let s = k.msd(t).unwrap();
            let frozen = attenuation_from_variance(&spec, s, spec.sigma_sq()).unwrap();
            let closed = attenuation_high_t(&spec, 2.5, t, &nat()).unwrap();
            assert_relative_eq!(frozen, closed, max_relative = 1e-12);
        }
    }

    #[test]
    fn euler_constant_matches_quoted_digits() {
        assert!((EULER_GAMMA - 0.577_215_665).abs() < 5e-10);
    }

    #[test]
    fn low_t_examples() {
        let spec = CatSpec::new(1.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(
            low_t_time_scale(&spec, 1.0, &nat()).unwrap(),
            (8.0 * PI).sqrt(),
            max_relative = 1e-15
        );
        // Frozen from a 30-digit evaluation.
        let a = attenuation_low_t(&spec, 1.0, 0.1, &nat()).unwrap();
        assert_relative_eq!(a, 0.998_717_489_401_121_3, max_relative = 1e-13);
        assert_eq!(attenuation_low_t(&spec, 1.0, 0.0, &nat()).unwrap(), 1.0);
        let tiny = attenuation_low_t(&spec, 1.0, 1e-8, &nat()).unwrap();
        assert!((1.0 - tiny) < 1e-15);
        assert!(matches!(attenuation_low_t(&spec, 1.0, 1.0, &nat()), Err(Error::Domain(_))));
        assert!(matches!(attenuation_low_t(&spec, 0.0, 0.5, &nat()), Err(Error::Domain(_))));
    }

    #[test]
    fn low_t_stays_in_unit_interval() {
        let spec = CatSpec::new(2.0, 0.3, 4.0).unwrap();
        for i in 1..100 {
            let t = 0.0199 * i as f64;
            let a = attenuation_low_t(&spec, 1.0, t, &nat()).unwrap();
            assert!(a > 0.0 && a <= 1.0, "a({t}) = {a}");
        }
    }

    #[test]
    fn decoupled_examples() {
        let spec = CatSpec::new(1.0, 1.0, 2.0).unwrap();
        assert_eq!(attenuation_decoupled_high_t(&spec, 0.5, 1.0, 0.0, &nat()).unwrap(), 1.0);
        for t in [0.1, 1.0, 10.0, 1e3] {
            assert_eq!(attenuation_decoupled_high_t(&spec, 0.0, 5.0, t, &nat()).unwrap(), 1.0);
        }
        assert!(matches!(
            attenuation_decoupled_high_t(&spec, 0.5, 1.0, 2.0, &nat()),
            Err(Error::Domain(_))
        ));
        assert!(attenuation_decoupled_high_t(&spec, -0.5, 1.0, 0.1, &nat()).is_err());
    }

    #[test]
    fn decoupled_point_slit_limit() {
        let spec = CatSpec::new(1.0, 1e-6, 2.0).unwrap();
        let (zeta, temp) = (0.01, 3.0);
        let tau = decoupled_decoherence_time(zeta, temp, 2.0, &nat()).unwrap();
        assert_relative_eq!(tau, 3.0 / (0.01 * 3.0 * 4.0), max_relative = 1e-15);
        for t in [0.01, 0.5, 5.0, 50.0] {
            let a = attenuation_decoupled_high_t(&spec, zeta, temp, t, &nat()).unwrap();
            assert_relative_eq!(a, (-t / tau).exp(), max_relative = 1e-8);
        }
    }

    #[test]
    fn warnings_fire_outside_regime() {
        let nat = nat();
        let spec = CatSpec::new(1.0, 1.0, 2.0).unwrap();
        let res = ReservoirSpec::new(1.0, 1.0).unwrap();
        let w = high_t_regime_warnings(&spec, &res, 2.0, &nat);
        assert!(w.iter().any(|w| w.message.contains("kT/(hbar*gamma)")));
        assert!(w.iter().any(|w| w.message.contains("gamma*t_max")));
        assert!(w.iter().any(|w| w.message.contains("d/sigma")));

        let far = CatSpec::new(1.0, 1.0, 1e3).unwrap();
        let hot = ReservoirSpec::new(1e-3, 1e3).unwrap();
        assert!(high_t_regime_warnings(&far, &hot, 1.0, &nat).is_empty());

        let low = low_t_regime_warnings(&ReservoirSpec::new(1.0, 1e-3).unwrap(), &nat);
        assert_eq!(low.len(), 1);
        assert!(low[0].message.contains("cutoff"));

        let dec = decoupled_regime_warnings(&spec, &ReservoirSpec::new(1.0, 100.0).unwrap(), 0.5, &nat);
        assert!(dec.iter().any(|w| w.message.contains("m/(10*zeta)")));
    }
}
