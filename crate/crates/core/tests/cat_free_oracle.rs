//! Quadrature checks of the free-particle cat-state distribution.

use decolab_core::cat_free::{
    attenuation_exact, attenuation_from_field, attenuation_high_t, cat_probability, default_grid,
    free_kinematics, normalization_constant, ohmic_high_t_kinematics, overlap_factor, packet_variance,
    single_packet_prob, CatDistribution, ReservoirKinematics,
};
use decolab_core::oracle::integrate_adaptive;
use decolab_core::{CatSpec, PhysicalConstants};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const NAT: PhysicalConstants = PhysicalConstants::natural();

/// ∫ of (P₁, P₂, 2·P_I·cosθ) over ±10 packet widths around the outer centres.
fn term_integrals(dist: &CatDistribution) -> [f64; 3] {
    let reach = 0.5 * dist.spec().d() + 10.0 * dist.variance().sqrt();
    let q = |f: &dyn Fn(f64) -> f64| integrate_adaptive(f, -reach, reach, 1e-11).unwrap().value;
    [
        q(&|x| dist.parts_at(x).p1),
        q(&|x| dist.parts_at(x).p2),
        q(&|x| 2.0 * dist.parts_at(x).interference_term()),
    ]
}

fn random_case(rng: &mut ChaCha8Rng) -> (CatSpec, ReservoirKinematics, f64) {
    let mass = rng.gen_range(0.5..2.0);
    let sigma = rng.gen_range(0.2..2.0);
    let d = sigma * rng.gen_range(0.0..8.0);
    let spec = CatSpec::new(mass, sigma, d).unwrap();
    if rng.gen_bool(0.5) {
        (spec, free_kinematics(mass, &NAT).unwrap(), f64::INFINITY)
    } else {
        let gamma = rng.gen_range(0.01..0.2);
        let k = ohmic_high_t_kinematics(mass, rng.gen_range(0.1..5.0), gamma, &NAT).unwrap();
        (spec, k, 1.0 / gamma)
    }
}

#[test]
fn gaussian_packet_integrates_to_one() {
    for w2 in [0.01, 1.0, 37.0] {
        let w = f64::sqrt(w2);
        let r = integrate_adaptive(|x| single_packet_prob(w2, x).unwrap(), -10.0 * w, 10.0 * w, 1e-11).unwrap();
        assert!((r.value - 1.0).abs() < 1e-8);
    }
}

#[test]
fn normalization_and_time_invariant_terms() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..60 {
        let (spec, kin, t_limit) = random_case(&mut rng);
        let t_max = t_limit.min(3.0) * 0.99;
        let n = normalization_constant(spec.sigma(), spec.d());
        let expected = [n * n, n * n, 2.0 * n * n * overlap_factor(spec.sigma(), spec.d())];
        for i in 0..10 {
            let t = t_max * i as f64 / 9.0;
            let dist = CatDistribution::new(&spec, &kin, t).unwrap();
            let terms = term_integrals(&dist);
            let total: f64 = terms.iter().sum();
            assert!((total - 1.0).abs() < 1e-6, "total {total} at t = {t}");
            for (got, want) in terms.iter().zip(expected) {
                assert!((got - want).abs() < 1e-6, "term {got} vs {want} at t = {t}");
            }
        }
    }
}

#[test]
fn interference_weight_at_five_widths() {
    let spec = CatSpec::new(1.0, 1.0, 5.0).unwrap();
    let kin = ohmic_high_t_kinematics(1.0, 0.5, 0.1, &NAT).unwrap();
    let dist = CatDistribution::new(&spec, &kin, 1.5).unwrap();
    let [p1, _, interference] = term_integrals(&dist);
    let ratio = interference / (2.0 * p1);
    assert!((ratio / 4.4e-2 - 1.0).abs() < 0.02, "ratio = {ratio}");
}

#[test]
fn sampled_field_sums_to_one() {
    // Trapezoid over the default grid is a coarse cross-check of the grid extent.
    let spec = CatSpec::new(1.0, 0.5, 3.0).unwrap();
    let kin = free_kinematics(1.0, &NAT).unwrap();
    let grid = default_grid(&spec, &kin, 0.7).unwrap();
    let f = cat_probability(&spec, &kin, 0.7, &grid).unwrap();
    let h = grid[1] - grid[0];
    let v = f.values();
    let trap: f64 = h * (v.iter().sum::<f64>() - 0.5 * (v[0] + v[v.len() - 1]));
    assert!((trap - 1.0).abs() < 1e-7, "{trap}");
}

#[test]
fn high_t_attenuation_is_non_increasing() {
    let spec = CatSpec::new(1.0, 0.3, 2.0).unwrap();
    let kin = ohmic_high_t_kinematics(1.0, 4.0, 0.05, &NAT).unwrap();
    let mut last_exact = 1.0;
    let mut last_closed = 1.0;
    for i in 0..200 {
        let t = 19.9 * i as f64 / 199.0;
        let a = attenuation_exact(&spec, &kin, t).unwrap();
        let b = attenuation_high_t(&spec, 4.0, t, &NAT).unwrap();
        assert!(a <= last_exact && b <= last_closed);
        last_exact = a;
        last_closed = b;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn field_ratio_matches_closed_form(
        mass in 0.2f64..5.0,
        sigma in 0.1f64..3.0,
        d_over_sigma in 0.0f64..12.0,
        temp in 0.05f64..10.0,
        gamma in 0.001f64..1.0,
        frac in 0.0f64..0.99,
        ohmic in any::<bool>(),
    ) {
        let spec = CatSpec::new(mass, sigma, d_over_sigma * sigma).unwrap();
        let kin = if ohmic {
            ohmic_high_t_kinematics(mass, temp, gamma, &NAT).unwrap()
        } else {
            free_kinematics(mass, &NAT).unwrap()
        };
        let t = frac / gamma;
        let grid = default_grid(&spec, &kin, t).unwrap();
        let field = cat_probability(&spec, &kin, t, &grid).unwrap();
        let from_field = attenuation_from_field(&field).unwrap();
        let exact = attenuation_exact(&spec, &kin, t).unwrap();
        prop_assert!(exact > 0.0 && exact <= 1.0);
        prop_assert!((from_field.mean - exact).abs() <= 1e-10 * exact);
        prop_assert!(from_field.max_deviation <= 1e-10 * exact);
        prop_assert!(packet_variance(&kin, sigma, t).unwrap() >= sigma * sigma);
        prop_assert_eq!(attenuation_exact(&spec, &kin, 0.0).unwrap(), 1.0);
    }
}
