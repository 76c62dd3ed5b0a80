//! The closed-form spin relaxation against the raw master equation and finite differences.

use decolab_core::oracle::integrate_lindblad;
use decolab_core::spin_bloch::{
    bloch_evolve, bloch_rhs, density_from_polarization, equilibrium_polarization,
    equilibrium_polarization_tanh, polarization_from_density, relaxation_times,
};
use decolab_core::{BlochState, PhysicalConstants, SpinBathSpec, Vec3};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const NAT: PhysicalConstants = PhysicalConstants::natural();

fn random_ball(rng: &mut ChaCha8Rng) -> BlochState {
    loop {
        let v = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        if v.norm() <= 1.0 {
            return BlochState::from_vector(v).unwrap();
        }
    }
}

fn random_spec(rng: &mut ChaCha8Rng) -> SpinBathSpec {
    SpinBathSpec::new(rng.gen_range(0.1..3.0), rng.gen_range(0.2..5.0), rng.gen_range(0.0..4.0)).unwrap()
}

#[test]
fn lindblad_matches_analytic_solution() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let spec = random_spec(&mut rng);
        let init = random_ball(&mut rng);
        let t1 = relaxation_times(&spec, &NAT).t1;
        let rho0 = density_from_polarization(&init);
        let traj = integrate_lindblad(&spec, &rho0, 5.0 * t1, t1 / 1e4, &NAT).unwrap();
        let mut worst: f64 = 0.0;
        for (t, rho) in traj.times.iter().zip(&traj.states).step_by(97) {
            let analytic = density_from_polarization(&bloch_evolve(&spec, &init, *t, &NAT).unwrap());
            worst = worst.max(rho.matrix().max_abs_diff(analytic.matrix()));
            assert!((rho.matrix().trace().re - 1.0).abs() < 1e-10);
        }
        assert!(worst < 1e-6, "deviation {worst:e}");
    }
}

#[test]
fn analytic_trajectory_solves_the_bloch_equation() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let spec = random_spec(&mut rng);
        let init = random_ball(&mut rng);
        let t1 = relaxation_times(&spec, &NAT).t1;
        let h = 1e-4 * t1;
        for k in 1..20 {
            let t = 0.2 * t1 * k as f64;
            let fwd = bloch_evolve(&spec, &init, t + h, &NAT).unwrap().vector();
            let back = bloch_evolve(&spec, &init, t - h, &NAT).unwrap().vector();
            let deriv = (fwd - back) * (0.5 / h);
            let rhs = bloch_rhs(&spec, bloch_evolve(&spec, &init, t, &NAT).unwrap().vector(), &NAT);
            // Scale by the rate so the check is unit-free.
            assert!(deriv.max_abs_diff(&rhs) * t1 < 1e-8, "residual {:e}", deriv.max_abs_diff(&rhs) * t1);
        }
    }
}

#[test]
fn trajectories_contract_toward_equilibrium() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let spec = random_spec(&mut rng);
        let init = random_ball(&mut rng);
        let bound = init.norm().max(equilibrium_polarization(&spec, &NAT).abs()) + 1e-12;
        let t1 = relaxation_times(&spec, &NAT).t1;
        for k in 0..60 {
            let p = bloch_evolve(&spec, &init, 0.1 * t1 * k as f64, &NAT).unwrap();
            assert!(p.norm() <= bound);
        }
    }
}

#[test]
fn equilibrium_is_a_fixed_point_everywhere() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..200 {
        let spec = random_spec(&mut rng);
        let eq = BlochState::equilibrium(&spec, &NAT);
        assert!(bloch_rhs(&spec, eq.vector(), &NAT).norm() < 1e-14);
        let rt = relaxation_times(&spec, &NAT);
        assert_eq!(rt.t2, 2.0 * rt.t1);
    }
}

proptest! {
    #[test]
    fn equilibrium_closed_forms_agree(ratio in 1e-6f64..700.0, gamma in 0.01f64..10.0) {
        let spec = SpinBathSpec::new(gamma, 1.0, 1.0 / ratio).unwrap();
        let a = equilibrium_polarization(&spec, &NAT);
        let b = equilibrium_polarization_tanh(&spec, &NAT);
        prop_assert!((a / b - 1.0).abs() < 1e-12);
        prop_assert!((-1.0..=0.0).contains(&a));
    }

    #[test]
    fn polarization_density_round_trip(x in -1.0f64..1.0, y in -1.0f64..1.0, z in -1.0f64..1.0) {
        let v = Vec3::new(x, y, z);
        prop_assume!(v.norm() <= 1.0);
        let state = BlochState::from_vector(v).unwrap();
        let rho = density_from_polarization(&state);
        prop_assert!((rho.matrix().trace().re - 1.0).abs() < 1e-12);
        prop_assert!(rho.matrix().hermiticity_defect() < 1e-12);
        let back = polarization_from_density(&rho).vector();
        prop_assert!(back.max_abs_diff(&v) < 1e-14);
    }
}
