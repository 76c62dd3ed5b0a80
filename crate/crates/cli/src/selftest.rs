//! Canned oracle suite behind `decolab selftest`. Each check compares an
//! analytic result against an independent numeric oracle or a reference value.

use decolab_core::cat_free::{
    attenuation_decoupled_high_t, attenuation_exact, attenuation_from_field, attenuation_high_t,
    cat_probability, decoupled_decoherence_time, free_kinematics, high_t_decoherence_time,
    normalization_constant, ohmic_high_t_kinematics, overlap_factor, CatDistribution,
    ReservoirKinematics,
};
use decolab_core::cat_oscillator::{
    attenuation_oscillator, attenuation_period, free_particle_limit_check, minimum_attenuation,
    revival_times, FREE_LIMIT_TOLERANCE,
};
use decolab_core::fit::linear_fit;
use decolab_core::oracle::{integrate_adaptive, integrate_lindblad, integrate_rk4, lindblad_rhs};
use decolab_core::spin_bloch::{
    bloch_evolve, density_from_polarization, equilibrium_polarization, equilibrium_polarization_tanh,
    fitted_decay_rates, relaxation_times,
};
use decolab_core::{
    thermal_de_broglie, BlochState, CatSpec, OscillatorSpec, PhysicalConstants, SpinBathSpec, Vec3,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::run::{
    Check, Verification, CLOSED_FORM_TOL, FIXED_POINT_TOL, IDENTITY_TOL, LINDBLAD_TOL,
    NORMALIZATION_TOL, RATE_RATIO_TOL, REVIVAL_TOL,
};

const NAT: PhysicalConstants = PhysicalConstants::natural();
const SEED: u64 = 0x5eed;

/// Runs every check. Individual failures are recorded, not returned as errors.
pub fn selftest() -> Result<Verification> {
    let mut checks = Vec::new();
    checks.extend(reference_numbers()?);
    checks.extend(cat_sweep()?);
    checks.extend(regime_limits()?);
    checks.extend(oscillator()?);
    checks.extend(spin_analytics()?);
    checks.extend(lindblad_oracle()?);
    Ok(Verification { checks })
}

fn rel(got: f64, want: f64) -> f64 {
    (got / want - 1.0).abs()
}

fn reference_numbers() -> Result<Vec<Check>> {
    let cgs = PhysicalConstants::cgs();
    let lambda = thermal_de_broglie(1.0, 300.0, &cgs)?;
    Ok(vec![
        Check::new("overlap-at-five-widths", rel(overlap_factor(1.0, 5.0), 4.4e-2), 0.02),
        Check::new("thermal-wavelength-cgs", rel(lambda, 5.2e-21), 0.01),
        Check::new("classical-ratio-cgs", rel(1.0 / lambda, 2e20), 0.05),
    ])
}

fn random_cat(rng: &mut ChaCha8Rng) -> Result<(CatSpec, ReservoirKinematics, f64)> {
    let mass = rng.gen_range(0.5..2.0);
    let sigma = rng.gen_range(0.2..2.0);
    let d = sigma * rng.gen_range(0.0..8.0);
    let spec = CatSpec::new(mass, sigma, d)?;
    Ok(if rng.gen_bool(0.5) {
        (spec, free_kinematics(mass, &NAT)?, 3.0)
    } else {
        let gamma: f64 = rng.gen_range(0.01..0.2);
        let kin = ohmic_high_t_kinematics(mass, rng.gen_range(0.1..5.0), gamma, &NAT)?;
        (spec, kin, gamma.recip().min(3.0) * 0.99)
    })
}

/// Quadrature normalization, per-term time invariance and the field-ratio identity
/// over 50 random configurations at 10 times each.
fn cat_sweep() -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let (mut norm, mut terms, mut ident, mut bounds) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..50 {
        let (spec, kin, t_max) = random_cat(&mut rng)?;
        let n = normalization_constant(spec.sigma(), spec.d());
        let expected = [n * n, n * n, 2.0 * n * n * overlap_factor(spec.sigma(), spec.d())];
        for i in 0..10 {
            let t = t_max * i as f64 / 9.0;
            let dist = CatDistribution::new(&spec, &kin, t)?;
            let reach = 0.5 * spec.d() + 10.0 * dist.variance().sqrt();
            let q = |f: &dyn Fn(f64) -> f64| -> Result<f64> {
                Ok(integrate_adaptive(f, -reach, reach, 1e-11)?.value)
            };
            let got = [
                q(&|x| dist.parts_at(x).p1)?,
                q(&|x| dist.parts_at(x).p2)?,
                q(&|x| 2.0 * dist.parts_at(x).interference_term())?,
            ];
            norm = norm.max((got.iter().sum::<f64>() - 1.0).abs());
            for (g, w) in got.iter().zip(expected) {
                terms = terms.max((g - w).abs());
            }

            let a = attenuation_exact(&spec, &kin, t)?;
            let field = cat_probability(&spec, &kin, t, &dist.grid(6.0, 257))?;
            let fa = attenuation_from_field(&field)?;
            ident = ident.max(rel(fa.mean, a)).max(fa.max_deviation / a);
            if i == 0 {
                bounds = bounds.max((a - 1.0).abs());
            }
            if !(a > 0.0 && a <= 1.0) {
                bounds = f64::INFINITY;
            }
        }
    }
    Ok(vec![
        Check::new("normalization", norm, NORMALIZATION_TOL),
        Check::new("term-invariance", terms, NORMALIZATION_TOL),
        Check::new("attenuation-identity", ident, IDENTITY_TOL),
        Check::new("attenuation-bounds", bounds, 0.0),
    ])
}

fn regime_limits() -> Result<Vec<Check>> {
    let (zeta, temp, d) = (0.3, 2.0, 1.5);
    let point = CatSpec::new(1.0, 1e-6, d)?;
    let tau = decoupled_decoherence_time(zeta, temp, d, &NAT)?;
    let mut point_dev: f64 = 0.0;
    let mut undamped: f64 = 0.0;
    for i in 1..=50 {
        let t = 3.0 * i as f64 / 50.0;
        let a = attenuation_decoupled_high_t(&point, zeta, temp, t, &NAT)?;
        point_dev = point_dev.max(rel(a, (-t / tau).exp()));
        let a0 = attenuation_decoupled_high_t(&CatSpec::new(1.0, 0.5, d)?, 0.0, temp, t, &NAT)?;
        undamped = undamped.max((a0 - 1.0).abs());
    }

    let spec = CatSpec::new(1.0, 0.5, 2.0)?;
    let tau_d = high_t_decoherence_time(&spec, temp, &NAT)?;
    let (mut ts, mut logs) = (Vec::new(), Vec::new());
    for i in 0..40 {
        let t = 2.0 * tau_d * i as f64 / 39.0;
        ts.push(t * t);
        logs.push(attenuation_high_t(&spec, temp, t, &NAT)?.ln());
    }
    let fit = linear_fit(&ts, &logs).expect("distinct abscissae");
    Ok(vec![
        Check::new("decoupled-point-slit", point_dev, 1e-8),
        Check::new("decoupled-zero-friction", undamped, 0.0),
        Check::new("high-t-gaussian-fit", fit.max_residual, 1e-10),
        Check::new("high-t-fit-time", rel((-fit.slope).sqrt().recip(), tau_d), 1e-10),
    ])
}

fn oscillator() -> Result<Vec<Check>> {
    let mut revival: f64 = 0.0;
    let mut minimum: f64 = 0.0;
    for &(mass, omega, d, temp) in &[(1.0, 1.0, 2.0, 1.0), (0.5, 3.0, 1.0, 0.2), (2.0, 0.7, 0.4, 5.0)] {
        let spec = OscillatorSpec::new(mass, omega, d, temp)?;
        for t in revival_times(&spec, 8) {
            revival = revival.max((attenuation_oscillator(&spec, t, &NAT)? - 1.0).abs());
        }
        let x = spec.quantum_ratio(&NAT);
        let closed = (-mass * omega * d * d / (2.0 * x.sinh())).exp();
        minimum = minimum.max(rel(minimum_attenuation(&spec, &NAT), closed));
        for k in 0..4 {
            let a = attenuation_oscillator(&spec, k as f64 * attenuation_period(&spec), &NAT)?;
            minimum = minimum.max(rel(a, closed));
        }
    }
    let hot = OscillatorSpec::new(1.0, 1.0, 5.0, 1e3)?;
    let deltas: Vec<f64> = (0..=20).map(|i| i as f64 * 5e-4).collect();
    let limit = free_particle_limit_check(&hot, &deltas, &NAT)?;
    let limit_dev = if limit.regime_satisfied { limit.max_relative_difference } else { f64::INFINITY };
    Ok(vec![
        Check::new("oscillator-revivals", revival, REVIVAL_TOL),
        Check::new("oscillator-minimum", minimum, CLOSED_FORM_TOL),
        Check::new("oscillator-free-limit", limit_dev, FREE_LIMIT_TOLERANCE),
    ])
}

fn spin_analytics() -> Result<Vec<Check>> {
    let mut forms: f64 = 0.0;
    let mut ratio: f64 = 0.0;
    for &(gamma, omega, temp) in &[(1.0, 1.0, 0.5), (0.3, 2.0, 4.0), (2.0, 0.5, 0.05), (1.0, 1.0, 50.0)] {
        let spec = SpinBathSpec::new(gamma, omega, temp)?;
        forms = forms.max(rel(equilibrium_polarization_tanh(&spec, &NAT), equilibrium_polarization(&spec, &NAT)));
        let rt = relaxation_times(&spec, &NAT);
        ratio = ratio.max((rt.t2 / rt.t1 - 2.0).abs());
        let rates = fitted_decay_rates(&spec, &BlochState::new(0.5, 0.3, 0.1)?, 3.0 * rt.t1, 301, &NAT)?;
        ratio = ratio.max((rates.ratio() - 2.0).abs());
    }
    let cold = SpinBathSpec::new(1.7, 1.0, 0.0)?;
    let zero_t = (equilibrium_polarization(&cold, &NAT) + 1.0)
        .abs()
        .max(rel(relaxation_times(&cold, &NAT).t1, 1.0 / 1.7));
    Ok(vec![
        Check::new("equilibrium-closed-forms", forms, CLOSED_FORM_TOL),
        Check::new("zero-temperature-limits", zero_t, CLOSED_FORM_TOL),
        Check::new("decay-rate-ratio", ratio, RATE_RATIO_TOL),
    ])
}

fn lindblad_oracle() -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let (mut traj_dev, mut fixed) = (0.0f64, 0.0f64);
    for _ in 0..20 {
        let spec = SpinBathSpec::new(rng.gen_range(0.1..3.0), rng.gen_range(0.2..5.0), rng.gen_range(0.0..4.0))?;
        let init = loop {
            let v = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            if v.norm() <= 1.0 {
                break BlochState::from_vector(v)?;
            }
        };
        let t1 = relaxation_times(&spec, &NAT).t1;
        let traj = integrate_lindblad(&spec, &density_from_polarization(&init), 5.0 * t1, t1 / 1e4, &NAT)?;
        for (t, rho) in traj.times.iter().zip(&traj.states).step_by(50) {
            let analytic = density_from_polarization(&bloch_evolve(&spec, &init, *t, &NAT)?);
            traj_dev = traj_dev.max(rho.matrix().max_abs_diff(analytic.matrix()));
        }
        let eq = density_from_polarization(&BlochState::equilibrium(&spec, &NAT));
        fixed = fixed.max(lindblad_rhs(&spec, eq.matrix(), &NAT).max_abs() * t1);
    }

    // y' = −y on [0, 1]: halving the step cuts the error by about 2⁴.
    let err = |dt: f64| -> Result<f64> {
        let traj = integrate_rk4(|_, y: f64| -y, 1.0, 1.0, dt)?;
        Ok((traj.last().1 - (-1.0f64).exp()).abs())
    };
    let order_ratio = err(0.1)? / err(0.05)?;
    Ok(vec![
        Check::new("lindblad-vs-analytic", traj_dev, LINDBLAD_TOL),
        Check::new("lindblad-fixed-point", fixed, FIXED_POINT_TOL),
        Check::new("rk4-order", (order_ratio - 16.0).abs(), 4.0),
    ])
}
