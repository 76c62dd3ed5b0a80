//! Run configuration: sectioned TOML, validated into a [`RunConfig`].
//!
//! ```toml
//! mode = "spin"               # free-cat | oscillator-cat | spin
//! unit_system = "natural"     # natural | cgs
//! verify = false
//! output_dir = "decolab-out"
//! format = "delimited-text"   # delimited-text | structured-text
//!
//! [time]
//! start = 0.0
//! end = 5.0
//! samples = 512
//!
//! [spin]
//! gamma = 1.0
//! omega = 1.0
//! hbar_omega_over_kT = 2.1972245773362196
//! ```

use std::path::PathBuf;

use decolab_core::cat_free::uniform_grid;
use decolab_core::{
    BlochState, CatSpec, OscillatorSpec, PhysicalConstants, ReservoirSpec, SpinBathSpec, UnitSystem,
};
use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

pub const DEFAULT_SAMPLES: usize = 512;
pub const DEFAULT_SNAPSHOTS: usize = 5;
pub const DEFAULT_REVIVALS: usize = 4;
pub const DEFAULT_OUTPUT_DIR: &str = "decolab-out";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    FreeCat,
    OscillatorCat,
    Spin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    /// Comma-separated values with `#` metadata lines.
    #[default]
    DelimitedText,
    /// TOML documents.
    StructuredText,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::DelimitedText => "csv",
            OutputFormat::StructuredText => "toml",
        }
    }
}

/// Attenuation formulas available for a free-particle cat.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FreeRegime {
    /// General closed form with the kinematics implied by (γ, T).
    Exact,
    HighT,
    LowT,
    DecoupledHighT,
}

impl FreeRegime {
    pub fn name(self) -> &'static str {
        match self {
            FreeRegime::Exact => "exact",
            FreeRegime::HighT => "high-t",
            FreeRegime::LowT => "low-t",
            FreeRegime::DecoupledHighT => "decoupled-high-t",
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    mode: Option<Mode>,
    unit_system: Option<RawUnits>,
    verify: Option<bool>,
    output_dir: Option<PathBuf>,
    format: Option<OutputFormat>,
    time: Option<RawTime>,
    grid: Option<RawGrid>,
    free_cat: Option<RawFreeCat>,
    oscillator_cat: Option<RawOscillator>,
    spin: Option<RawSpin>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum RawUnits {
    Natural,
    Cgs,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTime {
    start: Option<f64>,
    end: f64,
    samples: Option<usize>,
    snapshots: Option<usize>,
    snapshot_times: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    points: Option<usize>,
    widths: Option<f64>,
    x_min: Option<f64>,
    x_max: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFreeCat {
    mass: f64,
    sigma: f64,
    d: f64,
    gamma: Option<f64>,
    temperature: Option<f64>,
    regimes: Option<Vec<FreeRegime>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOscillator {
    mass: f64,
    omega: f64,
    d: f64,
    temperature: Option<f64>,
    #[serde(rename = "hbar_omega_over_kT")]
    hbar_omega_over_kt: Option<f64>,
    revivals: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpin {
    gamma: f64,
    omega: f64,
    temperature: Option<f64>,
    #[serde(rename = "hbar_omega_over_kT")]
    hbar_omega_over_kt: Option<f64>,
    initial: Option<[f64; 3]>,
    g_n: Option<f64>,
    mu0: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    pub start: f64,
    pub end: f64,
    pub samples: usize,
    pub snapshot_times: Vec<f64>,
}

impl TimeGrid {
    pub fn times(&self) -> Vec<f64> {
        uniform_grid(self.start, self.end, self.samples)
    }
}

/// How the x grid of a cat-state snapshot is built.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridSpec {
    /// [−d/2 − k·w, d/2 + k·w] around the packets at each snapshot time.
    Widths { widths: f64, points: usize },
    Fixed { x_min: f64, x_max: f64, points: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FreeCatConfig {
    pub cat: CatSpec,
    pub reservoir: ReservoirSpec,
    pub regimes: Vec<FreeRegime>,
    pub grid: GridSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OscillatorCatConfig {
    pub spec: OscillatorSpec,
    pub revivals: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpinConfig {
    pub spec: SpinBathSpec,
    pub initial: BlochState,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModeConfig {
    FreeCat(FreeCatConfig),
    OscillatorCat(OscillatorCatConfig),
    Spin(SpinConfig),
}

impl ModeConfig {
    pub fn name(&self) -> &'static str {
        match self {
            ModeConfig::FreeCat(_) => "free-cat",
            ModeConfig::OscillatorCat(_) => "oscillator-cat",
            ModeConfig::Spin(_) => "spin",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: ModeConfig,
    pub constants: PhysicalConstants,
    pub time: TimeGrid,
    pub verify: bool,
    pub output_dir: PathBuf,
    pub format: OutputFormat,
    /// SHA-256 of the config text, written into every data file header.
    pub config_hash: String,
}

fn invalid(field: &str, e: decolab_core::Error) -> CliError {
    CliError::validation(field, e.to_string())
}

fn temperature(
    section: &str,
    constants: &PhysicalConstants,
    omega: f64,
    temperature: Option<f64>,
    ratio: Option<f64>,
) -> Result<f64> {
    match (temperature, ratio) {
        (Some(t), None) => Ok(t),
        (None, Some(r)) => constants
            .temperature_from_ratio(omega, r)
            .map_err(|e| invalid(&format!("{section}.hbar_omega_over_kT"), e)),
        (Some(_), Some(_)) => Err(CliError::validation(
            format!("{section}.temperature"),
            "give either temperature or hbar_omega_over_kT, not both",
        )),
        (None, None) => Err(CliError::validation(
            format!("{section}.temperature"),
            "one of temperature or hbar_omega_over_kT is required",
        )),
    }
}

/// Parses and validates config text, applying defaults.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;

    let Some(mode) = raw.mode else {
        return Err(CliError::validation("mode", "missing; expected free-cat, oscillator-cat or spin"));
    };
    let constants = match raw.unit_system.unwrap_or(RawUnits::Natural) {
        RawUnits::Natural => PhysicalConstants::for_system(UnitSystem::Natural),
        RawUnits::Cgs => PhysicalConstants::for_system(UnitSystem::Cgs),
    };

    let time = {
        let Some(t) = raw.time else {
            return Err(CliError::validation("time", "missing [time] section"));
        };
        let start = t.start.unwrap_or(0.0);
        if !(start >= 0.0 && start.is_finite()) {
            return Err(CliError::validation("time.start", "must be finite and >= 0"));
        }
        if !(t.end > start && t.end.is_finite()) {
            return Err(CliError::validation("time.end", "must satisfy end > start"));
        }
        let samples = t.samples.unwrap_or(DEFAULT_SAMPLES);
        if samples < 2 {
            return Err(CliError::validation("time.samples", "must be at least 2"));
        }
        let snapshot_times = match (t.snapshot_times, t.snapshots) {
            (Some(_), Some(_)) => {
                return Err(CliError::validation(
                    "time.snapshots",
                    "give either snapshots or snapshot_times, not both",
                ))
            }
            (Some(ts), None) => {
                if ts.iter().any(|&s| !(s >= start && s <= t.end)) {
                    return Err(CliError::validation("time.snapshot_times", "must lie within [start, end]"));
                }
                ts
            }
            (None, n) => uniform_grid(start, t.end, n.unwrap_or(DEFAULT_SNAPSHOTS)),
        };
        TimeGrid {
            start,
            end: t.end,
            samples,
            snapshot_times,
        }
    };

    let present = [
        ("free_cat", raw.free_cat.is_some()),
        ("oscillator_cat", raw.oscillator_cat.is_some()),
        ("spin", raw.spin.is_some()),
    ];
    let expected = match mode {
        Mode::FreeCat => "free_cat",
        Mode::OscillatorCat => "oscillator_cat",
        Mode::Spin => "spin",
    };
    for (name, is_present) in present {
        if is_present && name != expected {
            return Err(CliError::validation(
                name,
                format!("section not allowed in mode `{expected}`; exactly one parameter block must be present"),
            ));
        }
    }

    let grid = raw.grid.unwrap_or_default();
    let mode = match mode {
        Mode::FreeCat => {
            let p = raw.free_cat.ok_or_else(|| CliError::validation("free_cat", "missing [free_cat] section"))?;
            let cat = CatSpec::new(p.mass, p.sigma, p.d).map_err(|e| invalid("free_cat", e))?;
            let reservoir = ReservoirSpec::new(p.gamma.unwrap_or(0.0), p.temperature.unwrap_or(0.0))
                .map_err(|e| invalid("free_cat", e))?;
            let regimes = p.regimes.unwrap_or_else(|| vec![FreeRegime::Exact]);
            if regimes.is_empty() {
                return Err(CliError::validation("free_cat.regimes", "must not be empty"));
            }
            let points = grid.points.unwrap_or(decolab_core::cat_free::DEFAULT_GRID_POINTS);
            if points < 2 {
                return Err(CliError::validation("grid.points", "must be at least 2"));
            }
            let grid = match (grid.x_min, grid.x_max) {
                (Some(x_min), Some(x_max)) => {
                    if grid.widths.is_some() {
                        return Err(CliError::validation("grid.widths", "cannot combine with x_min/x_max"));
                    }
                    if !(x_max > x_min) {
                        return Err(CliError::validation("grid.x_max", "must exceed x_min"));
                    }
                    GridSpec::Fixed { x_min, x_max, points }
                }
                (None, None) => {
                    let widths = grid.widths.unwrap_or(decolab_core::cat_free::DEFAULT_GRID_WIDTHS);
                    if !(widths > 0.0) {
                        return Err(CliError::validation("grid.widths", "must be > 0"));
                    }
                    GridSpec::Widths { widths, points }
                }
                _ => return Err(CliError::validation("grid.x_min", "x_min and x_max must be given together")),
            };
            ModeConfig::FreeCat(FreeCatConfig {
                cat,
                reservoir,
                regimes,
                grid,
            })
        }
        Mode::OscillatorCat => {
            let p = raw
                .oscillator_cat
                .ok_or_else(|| CliError::validation("oscillator_cat", "missing [oscillator_cat] section"))?;
            let temp = temperature("oscillator_cat", &constants, p.omega, p.temperature, p.hbar_omega_over_kt)?;
            let spec = OscillatorSpec::new(p.mass, p.omega, p.d, temp).map_err(|e| invalid("oscillator_cat", e))?;
            ModeConfig::OscillatorCat(OscillatorCatConfig {
                spec,
                revivals: p.revivals.unwrap_or(DEFAULT_REVIVALS),
            })
        }
        Mode::Spin => {
            let p = raw.spin.ok_or_else(|| CliError::validation("spin", "missing [spin] section"))?;
            let temp = temperature("spin", &constants, p.omega, p.temperature, p.hbar_omega_over_kt)?;
            let mut spec = SpinBathSpec::new(p.gamma, p.omega, temp).map_err(|e| invalid("spin", e))?;
            match (p.g_n, p.mu0) {
                (Some(g), Some(mu)) => spec = spec.with_magnetic(g, mu).map_err(|e| invalid("spin", e))?,
                (None, None) => {}
                _ => return Err(CliError::validation("spin.g_n", "g_n and mu0 must be given together")),
            }
            let [x, y, z] = p.initial.unwrap_or([0.0; 3]);
            let initial = BlochState::new(x, y, z).map_err(|e| invalid("spin.initial", e))?;
            ModeConfig::Spin(SpinConfig { spec, initial })
        }
    };

    Ok(RunConfig {
        mode,
        constants,
        time,
        verify: raw.verify.unwrap_or(false),
        output_dir: raw.output_dir.unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR)),
        format: raw.format.unwrap_or_default(),
        config_hash: hash_text(text),
    })
}

fn hash_text(text: &str) -> String {
    Sha256::digest(text.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}
