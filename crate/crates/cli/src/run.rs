//! Dispatch of a validated [`RunConfig`] to the physics modules, with optional
//! oracle verification of every analytic output.

use std::path::PathBuf;

use decolab_core::cat_free::{
    attenuation_decoupled_high_t, attenuation_exact, attenuation_from_field, attenuation_high_t,
    attenuation_low_t, cat_probability, decoupled_regime_warnings, free_kinematics,
    high_t_regime_warnings, low_t_regime_warnings, normalization_constant, ohmic_high_t_kinematics,
    overlap_factor, uniform_grid, CatDistribution,
};
use decolab_core::cat_oscillator::{
    attenuation_oscillator, attenuation_period, free_particle_limit_check, minimum_attenuation,
    revival_times, FREE_LIMIT_MAX_PHASE, FREE_LIMIT_TOLERANCE,
};
use decolab_core::oracle::{integrate_adaptive, integrate_lindblad};
use decolab_core::spin_bloch::{
    bloch_evolve, density_from_polarization, equilibrium_polarization, equilibrium_polarization_tanh,
    fitted_decay_rates, magnetization, nbar, relaxation_times, saturation_magnetization,
};
use decolab_core::oracle::lindblad_rhs;
use decolab_core::{BlochState, Error as CoreError, ReservoirKinematics};
use serde::Serialize;

use crate::config::{
    FreeCatConfig, FreeRegime, GridSpec, ModeConfig, OscillatorCatConfig, RunConfig, SpinConfig,
};
use crate::error::{CliError, Result};
use crate::output::{write_file, Table};

/// Quadrature normalization and term-invariance tolerance.
pub const NORMALIZATION_TOL: f64 = 1e-6;
/// Relative agreement of the field-derived and closed-form attenuation.
pub const IDENTITY_TOL: f64 = 1e-10;
/// Entrywise agreement of the Lindblad oracle with the analytic solution.
pub const LINDBLAD_TOL: f64 = 1e-6;
pub const FIXED_POINT_TOL: f64 = 1e-14;
pub const CLOSED_FORM_TOL: f64 = 1e-12;
pub const REVIVAL_TOL: f64 = 1e-15;
pub const RATE_RATIO_TOL: f64 = 1e-6;

/// Upper bound on RK4 steps in a spin verification; above it the step grows.
const MAX_ORACLE_STEPS: f64 = 5e6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, max_deviation: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            max_deviation,
            tolerance,
            passed: max_deviation <= tolerance,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Verification {
    pub checks: Vec<Check>,
}

impl Verification {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RunReport {
    pub mode: String,
    pub files_written: Vec<PathBuf>,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verification: Option<Verification>,
}

impl RunReport {
    /// False only when verification ran and some check failed.
    pub fn passed(&self) -> bool {
        self.verification.as_ref().is_none_or(Verification::passed)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| CliError::Serialize(e.to_string()))
    }
}

struct Writer<'a> {
    config: &'a RunConfig,
    report: RunReport,
}

impl Writer<'_> {
    fn header(&self, table: Table) -> Table {
        table
            .meta("mode", self.config.mode.name())
            .meta("unit_system", self.config.constants.unit_system())
            .meta("config_sha256", &self.config.config_hash)
    }

    fn table(&mut self, stem: &str, table: Table) -> Result<()> {
        let table = self.header(table);
        let name = format!("{stem}.{}", self.config.format.extension());
        let rendered = table.render(self.config.format);
        self.raw(&name, &rendered)
    }

    fn raw(&mut self, name: &str, contents: &str) -> Result<()> {
        write_file(&self.config.output_dir, name, contents)?;
        self.report.files_written.push(PathBuf::from(name));
        Ok(())
    }

    fn warn(&mut self, w: impl ToString) {
        let w = w.to_string();
        if !self.report.warnings.contains(&w) {
            self.report.warnings.push(w);
        }
    }
}

/// Executes a run, writing data files and `report.toml` into the output directory.
pub fn run(config: &RunConfig) -> Result<RunReport> {
    let mut w = Writer {
        config,
        report: RunReport {
            mode: config.mode.name().to_string(),
            ..Default::default()
        },
    };
    let verification = match &config.mode {
        ModeConfig::FreeCat(fc) => run_free_cat(&mut w, fc)?,
        ModeConfig::OscillatorCat(oc) => run_oscillator(&mut w, oc)?,
        ModeConfig::Spin(sc) => run_spin(&mut w, sc)?,
    };
    w.report.verification = config.verify.then_some(verification);
    let mut report = w.report;
    report.files_written.push(PathBuf::from("report.toml"));
    write_file(&config.output_dir, "report.toml", &report.to_toml()?)?;
    Ok(report)
}

/// Kinematics behind the general closed form: no bath at T = 0 and γ = 0, the
/// high-temperature Ohmic bath at T > 0.
fn exact_kinematics(fc: &FreeCatConfig, config: &RunConfig) -> Result<ReservoirKinematics> {
    let (gamma, temp) = (fc.reservoir.gamma(), fc.reservoir.temperature());
    let mass = fc.cat.mass();
    if temp > 0.0 {
        Ok(ohmic_high_t_kinematics(mass, temp, gamma, &config.constants)?)
    } else if gamma == 0.0 {
        Ok(free_kinematics(mass, &config.constants)?)
    } else {
        Err(CoreError::Domain(
            "exact kinematics at T = 0 with gamma > 0 are not available; use the low-t regime".into(),
        )
        .into())
    }
}

fn regime_value(fc: &FreeCatConfig, config: &RunConfig, regime: FreeRegime, kin: Option<&ReservoirKinematics>, t: f64) -> Result<f64> {
    let c = &config.constants;
    let zeta = fc.reservoir.zeta(fc.cat.mass());
    let temp = fc.reservoir.temperature();
    Ok(match regime {
        FreeRegime::Exact => attenuation_exact(&fc.cat, kin.expect("exact kinematics"), t)?,
        FreeRegime::HighT => attenuation_high_t(&fc.cat, temp, t, c)?,
        FreeRegime::LowT => attenuation_low_t(&fc.cat, zeta, t, c)?,
        FreeRegime::DecoupledHighT => attenuation_decoupled_high_t(&fc.cat, zeta, temp, t, c)?,
    })
}

fn run_free_cat(w: &mut Writer<'_>, fc: &FreeCatConfig) -> Result<Verification> {
    let config = w.config;
    let c = &config.constants;
    let times = config.time.times();
    let t_max = config.time.end;
    let exact_kin = exact_kinematics(fc, config);

    for &regime in &fc.regimes {
        let kin = match regime {
            FreeRegime::Exact => Some(exact_kinematics(fc, config)?),
            _ => None,
        };
        let warnings = match regime {
            FreeRegime::Exact => {
                let k = kin.as_ref().unwrap();
                let mut ws = if fc.reservoir.temperature() > 0.0 {
                    high_t_regime_warnings(&fc.cat, &fc.reservoir, t_max, c)
                } else {
                    Vec::new()
                };
                ws.extend(k.window_warning(t_max));
                ws
            }
            FreeRegime::HighT => high_t_regime_warnings(&fc.cat, &fc.reservoir, t_max, c),
            FreeRegime::LowT => low_t_regime_warnings(&fc.reservoir, c),
            FreeRegime::DecoupledHighT => decoupled_regime_warnings(&fc.cat, &fc.reservoir, t_max, c),
        };
        for warning in warnings {
            w.warn(warning);
        }
        let mut table = Table::new(&["t", "a"])
            .meta("regime", regime.name())
            .meta("kinematics", kin.as_ref().map_or("closed-form", |k| k.label()));
        let mut out_of_domain = false;
        for &t in &times {
            // Times outside a formula's domain are written as nan with a warning.
            let a = match regime_value(fc, config, regime, kin.as_ref(), t) {
                Ok(a) => a,
                Err(CliError::Physics(CoreError::Domain(msg))) => {
                    if !out_of_domain {
                        w.warn(format!("[{}] {msg}; such samples are written as nan", regime.name()));
                        out_of_domain = true;
                    }
                    f64::NAN
                }
                Err(e) => return Err(e),
            };
            table.push(vec![t, a]);
        }
        w.table(&format!("attenuation_{}", regime.name().replace('-', "_")), table)?;
    }

    let mut verification = Verification::default();
    let kin = match exact_kin {
        Ok(k) => k,
        Err(e) => {
            w.warn(format!("[free-cat] cat-state snapshots skipped: {e}"));
            return Ok(verification);
        }
    };

    let n = normalization_constant(fc.cat.sigma(), fc.cat.d());
    let expected_terms = [n * n, n * n, 2.0 * n * n * overlap_factor(fc.cat.sigma(), fc.cat.d())];
    let (mut norm_dev, mut term_dev, mut ident_dev) = (0.0f64, 0.0f64, 0.0f64);
    for (i, &t) in config.time.snapshot_times.iter().enumerate() {
        if let Some(warning) = kin.window_warning(t) {
            w.warn(warning);
        }
        let dist = CatDistribution::new(&fc.cat, &kin, t)?;
        let grid = match fc.grid {
            GridSpec::Widths { widths, points } => dist.grid(widths, points),
            GridSpec::Fixed { x_min, x_max, points } => uniform_grid(x_min, x_max, points),
        };
        let field = cat_probability(&fc.cat, &kin, t, &grid)?;
        let mut table = Table::new(&["x", "P_total", "P1", "P2", "P_interference_term"])
            .meta("time", crate::output::fmt_number(t))
            .meta("kinematics", kin.label())
            .meta("attenuation", crate::output::fmt_number(dist.attenuation()))
            .meta("variance", crate::output::fmt_number(dist.variance()));
        for j in 0..field.len() {
            table.push(vec![
                field.grid()[j],
                field.values()[j],
                field.p1()[j],
                field.p2()[j],
                field.interference_term()[j],
            ]);
        }
        w.table(&format!("field_{i:02}"), table)?;

        if config.verify {
            let reach = 0.5 * fc.cat.d() + 10.0 * dist.variance().sqrt();
            let q = |f: &dyn Fn(f64) -> f64| -> Result<f64> {
                Ok(integrate_adaptive(f, -reach, reach, 1e-11)?.value)
            };
            let terms = [
                q(&|x| dist.parts_at(x).p1)?,
                q(&|x| dist.parts_at(x).p2)?,
                q(&|x| 2.0 * dist.parts_at(x).interference_term())?,
            ];
            norm_dev = norm_dev.max((terms.iter().sum::<f64>() - 1.0).abs());
            for (got, want) in terms.iter().zip(expected_terms) {
                term_dev = term_dev.max((got - want).abs());
            }
            let exact = attenuation_exact(&fc.cat, &kin, t)?;
            let from_field = attenuation_from_field(&field)?;
            ident_dev = ident_dev.max((from_field.mean - exact).abs() / exact);
            ident_dev = ident_dev.max(from_field.max_deviation / exact);
        }
    }
    if config.verify {
        verification.checks.push(Check::new("normalization", norm_dev, NORMALIZATION_TOL));
        verification.checks.push(Check::new("term-invariance", term_dev, NORMALIZATION_TOL));
        verification.checks.push(Check::new("attenuation-identity", ident_dev, IDENTITY_TOL));
    }
    Ok(verification)
}

fn run_oscillator(w: &mut Writer<'_>, oc: &OscillatorCatConfig) -> Result<Verification> {
    let config = w.config;
    let c = &config.constants;
    let spec = &oc.spec;

    let mut curve = Table::new(&["t", "a"]).meta("regime", "oscillator");
    for t in config.time.times() {
        curve.push(vec![t, attenuation_oscillator(spec, t, c)?]);
    }
    w.table("attenuation_oscillator", curve)?;

    let revivals = revival_times(spec, oc.revivals);
    let mut table = Table::new(&["t_revival"]);
    for &t in &revivals {
        table.push(vec![t]);
    }
    w.table("revivals", table)?;

    let mut verification = Verification::default();
    if !config.verify {
        return Ok(verification);
    }
    let revival_dev = revivals
        .iter()
        .map(|&t| attenuation_oscillator(spec, t, c).map(|a| (a - 1.0).abs()))
        .collect::<decolab_core::Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    verification.checks.push(Check::new("revival-unity", revival_dev, REVIVAL_TOL));

    // Direct evaluation, valid while sinh does not overflow.
    let x = spec.quantum_ratio(c);
    if x < 700.0 {
        let closed = (-spec.mass() * spec.omega() * spec.d() * spec.d()
            / (2.0 * c.hbar() * x.sinh()))
        .exp();
        let mut min_dev: f64 = (minimum_attenuation(spec, c) - closed).abs();
        for k in 0..4 {
            let t = k as f64 * attenuation_period(spec);
            min_dev = min_dev.max((attenuation_oscillator(spec, t, c)? - closed).abs());
        }
        verification.checks.push(Check::new("minimum-closed-form", min_dev, CLOSED_FORM_TOL));
    }

    let deltas = uniform_grid(0.0, FREE_LIMIT_MAX_PHASE / spec.omega(), 21);
    let limit = free_particle_limit_check(spec, &deltas, c)?;
    let mut table = Table::new(&["delta_t", "a_oscillator", "a_free", "relative_difference"]);
    for r in &limit.rows {
        table.push(vec![r.delta_t, r.oscillator, r.free_particle, r.relative_difference]);
    }
    w.table("free_limit", table)?;
    if limit.regime_satisfied {
        verification.checks.push(Check::new(
            "free-particle-limit",
            limit.max_relative_difference,
            FREE_LIMIT_TOLERANCE,
        ));
    } else {
        for warning in &limit.warnings {
            w.warn(warning);
        }
        w.warn("[oscillator-free-limit] regime not satisfied; no accuracy claim made");
    }
    Ok(verification)
}

fn run_spin(w: &mut Writer<'_>, sc: &SpinConfig) -> Result<Verification> {
    let config = w.config;
    let c = &config.constants;
    let spec = &sc.spec;
    let rt = relaxation_times(spec, c);
    let p0 = equilibrium_polarization(spec, c);
    let times = config.time.times();

    let mut traj = Table::new(&["t", "P_x", "P_y", "P_z", "rho_pp", "rho_mm", "abs_rho_pm"])
        .meta("T1", crate::output::fmt_number(rt.t1))
        .meta("T2", crate::output::fmt_number(rt.t2));
    let mut states = Vec::with_capacity(times.len());
    for &t in &times {
        let p = bloch_evolve(spec, &sc.initial, t, c)?;
        let rho = density_from_polarization(&p);
        traj.push(vec![t, p.px(), p.py(), p.pz(), rho.rho_pp(), rho.rho_mm(), rho.rho_pm().norm()]);
        states.push(p);
    }
    w.table("bloch_trajectory", traj)?;

    if spec.g_n().is_some() {
        let mut table = Table::new(&["t", "M_z", "M_perp"]);
        for (&t, p) in times.iter().zip(&states) {
            let m = magnetization(spec, p)?;
            table.push(vec![t, m.z, m.perp]);
        }
        w.table("magnetization", table)?;
    }

    let mut eq = toml::Table::new();
    eq.insert("mode".into(), "spin".into());
    eq.insert("config_sha256".into(), config.config_hash.clone().into());
    eq.insert("nbar".into(), nbar(spec.omega(), spec.temperature(), c).into());
    eq.insert("hbar_omega_over_kT".into(), spec.quantum_ratio(c).into());
    eq.insert("P0".into(), p0.into());
    eq.insert("P0_tanh".into(), equilibrium_polarization_tanh(spec, c).into());
    eq.insert("T1".into(), rt.t1.into());
    eq.insert("T2".into(), rt.t2.into());
    if spec.g_n().is_some() {
        eq.insert("M0".into(), saturation_magnetization(spec, c)?.into());
    }
    w.raw("equilibrium.toml", &eq.to_string())?;

    let mut verification = Verification::default();
    if !config.verify {
        return Ok(verification);
    }

    let rho_eq = density_from_polarization(&BlochState::equilibrium(spec, c));
    verification.checks.push(Check::new(
        "lindblad-fixed-point",
        lindblad_rhs(spec, rho_eq.matrix(), c).max_abs() * rt.t1,
        FIXED_POINT_TOL,
    ));
    let tanh_form = equilibrium_polarization_tanh(spec, c);
    verification.checks.push(Check::new(
        "equilibrium-closed-forms",
        if p0 == 0.0 { tanh_form.abs() } else { (tanh_form / p0 - 1.0).abs() },
        CLOSED_FORM_TOL,
    ));
    let probe = BlochState::new(0.5, 0.3, 0.1)?;
    let rates = fitted_decay_rates(spec, &probe, 3.0 * rt.t1, 301, c)?;
    verification.checks.push(Check::new(
        "decay-rate-ratio",
        (rates.ratio() - 2.0).abs(),
        RATE_RATIO_TOL,
    ));

    let dt = (rt.t1 / 1e4).max(config.time.end / MAX_ORACLE_STEPS);
    let mut rho = density_from_polarization(&sc.initial);
    let mut t_prev = 0.0;
    let mut dev: f64 = 0.0;
    for (&t, p) in times.iter().zip(&states) {
        if t > t_prev {
            let seg = integrate_lindblad(spec, &rho, t - t_prev, dt, c)?;
            rho = *seg.last_state().1;
            t_prev = t;
        }
        let analytic = density_from_polarization(p);
        dev = dev.max(rho.matrix().max_abs_diff(analytic.matrix()));
    }
    verification.checks.push(Check::new("lindblad-vs-analytic", dev, LINDBLAD_TOL));
    Ok(verification)
}

/// Writes the entangled-at-all-times and initially-decoupled high-temperature
/// attenuation side by side. Returns the path of the table.
pub fn compare_regimes(config: &RunConfig) -> Result<PathBuf> {
    let ModeConfig::FreeCat(fc) = &config.mode else {
        return Err(CliError::validation("mode", "compare-regimes needs mode = \"free-cat\""));
    };
    let c = &config.constants;
    let temp = fc.reservoir.temperature();
    let zeta = fc.reservoir.zeta(fc.cat.mass());
    let mut table = Table::new(&["t", "a_high_t_entangled", "a_decoupled_hpz"])
        .meta("mode", "free-cat")
        .meta("unit_system", c.unit_system())
        .meta("config_sha256", &config.config_hash)
        .meta("zeta", crate::output::fmt_number(zeta));
    for t in config.time.times() {
        table.push(vec![
            t,
            attenuation_high_t(&fc.cat, temp, t, c)?,
            attenuation_decoupled_high_t(&fc.cat, zeta, temp, t, c)?,
        ]);
    }
    let name = format!("compare_regimes.{}", config.format.extension());
    write_file(&config.output_dir, &name, &table.render(config.format))
}
