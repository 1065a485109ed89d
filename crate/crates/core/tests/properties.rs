use std::f64::consts::PI;

use holocalc::apps::{omega_p, ContractionModel};
use holocalc::calculus::oracle_matrix;
use holocalc::hoermander::{build_partition, hoermander_norm, HoermanderConfig, Localizer};
use holocalc::operators::random::{random_sectorial, random_strip_type};
use holocalc::operators::DiagonalizableOperator;
use holocalc::sampling::{convolve, fourier_forward, fourier_inverse};
use holocalc::{admissibility_report, weighted_norm, Complex64, Grid, HolFn, SampledFunction, StripFunctionRep, Weight};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn small_grid() -> Grid {
    Grid::new(8.0, 64).unwrap()
}

fn samples(n: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), n).prop_map(|v| v.into_iter().map(|(a, b)| c(a, b)).collect())
}

fn weight() -> impl Strategy<Value = Weight> {
    prop_oneof![
        (0.0..3.0f64).prop_map(|a| Weight::polynomial(a).unwrap()),
        (0.0..2.0f64, 0.0..2.0f64).prop_map(|(a, b)| Weight::polylog(a, b).unwrap()),
    ]
}

fn strongly_admissible() -> impl Strategy<Value = Weight> {
    prop_oneof![
        (0.75..3.0f64).prop_map(|a| Weight::polynomial(a).unwrap()),
        (0.75..2.0f64, 0.0..2.0f64).prop_map(|(a, b)| Weight::polylog(a, b).unwrap()),
    ]
}

fn rel_dev(a: &SampledFunction, b: &SampledFunction) -> f64 {
    a.sub(b).unwrap().norm_l2() / b.norm_l2().max(f64::MIN_POSITIVE)
}

/// Random samples on the middle half of the grid, zero elsewhere.
fn compact(values: Vec<Complex64>, grid: Grid) -> SampledFunction {
    let n = grid.points();
    let full = (0..n)
        .map(|k| if (n / 4..3 * n / 4).contains(&k) { values[k - n / 4] } else { c(0.0, 0.0) })
        .collect();
    SampledFunction::new(grid, full).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn transforms_invert_each_other(v in samples(64)) {
        let f = SampledFunction::new(small_grid(), v).unwrap();
        prop_assert!(rel_dev(&fourier_forward(&fourier_inverse(&f)), &f) < 1e-12);
        prop_assert!(rel_dev(&fourier_inverse(&fourier_forward(&f)), &f) < 1e-12);
    }

    #[test]
    fn plancherel_holds_on_the_grid(v in samples(64)) {
        let f = SampledFunction::new(small_grid(), v).unwrap();
        let lhs = fourier_forward(&f).norm_l2().powi(2);
        let rhs = 2.0 * PI * f.norm_l2().powi(2);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs);
    }

    #[test]
    fn binary_dump_round_trips(v in samples(64)) {
        let f = SampledFunction::new(small_grid(), v).unwrap();
        let back = SampledFunction::from_bytes(&f.to_bytes()).unwrap();
        prop_assert_eq!(back.values(), f.values());
    }

    #[test]
    fn weights_are_at_least_one(v in weight(), s in -1e6..1e6f64) {
        prop_assert!(v.evaluate(s) >= 1.0 && v.evaluate(s).is_finite());
    }

    #[test]
    fn subadditivity_on_a_fresh_lattice(v in weight(), s in -500.0..500.0f64, t in -500.0..500.0f64) {
        let m = admissibility_report(&v, 1e3, 1000).unwrap().m_v_estimate;
        prop_assert!(m >= 0.5);
        prop_assert!(v.evaluate(s + t) <= (m + 1e-6) * (v.evaluate(s) + v.evaluate(t)));
    }

    #[test]
    fn young_inequality(
        v in weight(),
        f in samples(32),
        g in samples(32),
        p in prop_oneof![Just(1.0), Just(2.0)],
        omega in prop_oneof![Just(0.0), Just(0.5)],
    ) {
        let grid = small_grid();
        let (f, g) = (compact(f, grid), compact(g, grid));
        let m = admissibility_report(&v, 1e3, 1000).unwrap().m_v_estimate + 1e-6;
        let lhs = weighted_norm(&convolve(&f, &g).unwrap(), &v, omega, p).unwrap();
        let rhs = 2.0 * m * weighted_norm(&f, &v, omega, 1.0).unwrap() * weighted_norm(&g, &v, omega, p).unwrap();
        prop_assert!(lhs <= rhs * (1.0 + 1e-12));
    }

    #[test]
    fn convolution_algebra(v in strongly_admissible(), f in samples(32), g in samples(32), omega in 0.0..1.0f64) {
        let grid = small_grid();
        let (f, g) = (compact(f, grid), compact(g, grid));
        let m = admissibility_report(&v, 1e3, 1000).unwrap().m_v_estimate + 1e-6;
        let lhs = weighted_norm(&convolve(&f, &g).unwrap(), &v, omega, 2.0).unwrap();
        let rhs = 2.0 * m * v.inverse_l2_on(&grid, 0.0)
            * weighted_norm(&f, &v, omega, 2.0).unwrap()
            * weighted_norm(&g, &v, omega, 2.0).unwrap();
        prop_assert!(lhs <= rhs * (1.0 + 1e-12));
    }

    #[test]
    fn translation_is_an_isometry(s0 in -3.0..3.0f64, t in -10.0..10.0f64, omega in 0.0..1.0f64, v in weight()) {
        let f = StripFunctionRep::modulated_gaussian(s0, Grid::default(), omega, v).unwrap();
        let a = f.sobolev_norm();
        prop_assert!((f.translate(t).sobolev_norm() - a).abs() <= 1e-12 * a);
    }

    #[test]
    fn boundary_ratio_between_one_and_two(s0 in -3.0..3.0f64, re in -2.0..2.0f64, im in 1.2..4.0f64, omega in 0.1..1.0f64) {
        let grid = Grid::default();
        let v = Weight::polynomial(1.0).unwrap();
        let g = StripFunctionRep::modulated_gaussian(s0, grid, omega, v.clone()).unwrap();
        let r = StripFunctionRep::resolvent(c(re, im), grid, omega, v).unwrap();
        for f in [g, r] {
            let q = f.boundary_norm_ratio().unwrap();
            prop_assert!((1.0 - 1e-3..=2.0 * (1.0 + 1e-3)).contains(&q), "{q}");
        }
    }

    #[test]
    fn partition_sums_to_one(t in -5.0..5.0f64) {
        let p = build_partition(1.5, 1.0).unwrap();
        prop_assert!((p.partial_sum(c(t, 0.0), 40) - 1.0).norm() <= 1e-8);
    }

    #[test]
    fn omega_p_is_dual_symmetric(p in 1.01..50.0f64) {
        let w = omega_p(p).unwrap();
        let q = p / (p - 1.0);
        prop_assert!((0.0..PI / 2.0).contains(&w));
        prop_assert!((omega_p(q).unwrap() - w).abs() <= 1e-14);
    }
}

fn model(seed: u64) -> DiagonalizableOperator {
    random_strip_type(&mut ChaCha8Rng::seed_from_u64(seed), 5, 0.5, 2.0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn resolvent_identity(seed in any::<u64>(), l in (-3.0..3.0f64, 1.0..3.0f64), m in (-3.0..3.0f64, -3.0..-1.0f64)) {
        let a = model(seed);
        let (l, m) = (c(l.0, l.1), c(m.0, m.1));
        let (rl, rm) = (a.resolvent(l).unwrap(), a.resolvent(m).unwrap());
        let lhs = rl.sub(&rm).unwrap();
        let rhs = rl.mul(&rm).unwrap().scale(m - l);
        prop_assert!(lhs.relative_deviation(&rhs) <= 1e-9);
    }

    #[test]
    fn oracle_is_multiplicative(seed in any::<u64>(), s0 in -2.0..2.0f64, im in 1.0..3.0f64) {
        let a = model(seed);
        let f = HolFn::gaussian().product(&HolFn::modulation(s0));
        let g = HolFn::resolvent(c(0.0, im));
        let fg = oracle_matrix(&a, &f.product(&g)).unwrap();
        let prod = oracle_matrix(&a, &f).unwrap().mul(&oracle_matrix(&a, &g).unwrap()).unwrap();
        prop_assert!(fg.relative_deviation(&prod) <= 1e-8);
    }

    #[test]
    fn imaginary_power_is_the_group_of_the_logarithm(seed in any::<u64>(), s in -5.0..5.0f64) {
        let a = random_sectorial(&mut ChaCha8Rng::seed_from_u64(seed), 5, 1.0, 2.0).unwrap();
        let lhs = a.imaginary_power(s).unwrap();
        let rhs = a.log().unwrap().group_orbit(s).unwrap();
        prop_assert!(lhs.sub(&rhs).unwrap().entries().iter().all(|d| d.norm() <= 1e-10 * (1.0 + rhs.frobenius())));
    }

    #[test]
    fn operator_json_round_trips(seed in any::<u64>()) {
        let a = model(seed);
        let b = DiagonalizableOperator::from_json(&a.to_json().unwrap()).unwrap();
        prop_assert_eq!(a.eig(), b.eig());
        prop_assert_eq!(a.basis(), b.basis());
    }

    #[test]
    fn semigroups_contract(
        seed in any::<u64>(),
        n in 2usize..7,
        t in 0.01..20.0f64,
        p in prop_oneof![Just(1.0), Just(4.0 / 3.0), Just(2.0), Just(4.0), Just(f64::INFINITY)],
    ) {
        let m = ContractionModel::random(&mut ChaCha8Rng::seed_from_u64(seed), n, 2.0).unwrap();
        prop_assert!(m.semigroup(t).unwrap().norm(p).unwrap().value <= 1.0 + 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn hoermander_is_monotone_in_the_weight(s0 in -2.0..2.0f64, re in -2.0..2.0f64, im in 1.0..3.0f64) {
        let cfg = HoermanderConfig { grid: Grid::new(16.0, 1024).unwrap(), ..Default::default() };
        let f = HolFn::resolvent(c(re, im)).product(&HolFn::modulation(s0));
        let loc = Localizer::gaussian();
        let small = hoermander_norm(&f, &loc, &Weight::constant(), 0.0, &cfg).unwrap().value;
        let large = hoermander_norm(&f, &loc, &Weight::polynomial(1.0).unwrap(), 0.0, &cfg).unwrap().value;
        prop_assert!(small <= large);
    }
}
