//! Property tests for the invariants of each module.

use proptest::prelude::*;
use proptest::strategy::ValueTree;

use directed_ot::cost::{quadruple_margin, CostFunction, ScalingPair};
use directed_ot::distributions::Distribution;
use directed_ot::divergence::{divergence_exact_discrete, divergence_monte_carlo, divergence_quadrature, DivergenceSpec, QuadratureOptions};
use directed_ot::generators::Generator;
use directed_ot::report::{parse_float, JsonFloat};
use directed_ot::transport::{brute_force_min, comonotone_coupling, coupling_cost, lp_lower_bound_check, MongeMap};

fn discrete_law(lo: f64, hi: f64, max: usize) -> impl Strategy<Value = Distribution> {
    prop::collection::vec((lo..hi, 0.05f64..1.0), 1..=max).prop_map(|pairs| {
        let total: f64 = pairs.iter().map(|p| p.1).sum();
        let values: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let mut weights: Vec<f64> = pairs.iter().map(|p| p.1 / total).collect();
        let head: f64 = weights[..weights.len() - 1].iter().sum();
        *weights.last_mut().unwrap() = 1.0 - head;
        Distribution::discrete(&values, &weights).unwrap()
    })
}

fn equal_law(lo: f64, hi: f64, n: usize) -> impl Strategy<Value = Distribution> {
    prop::collection::vec(lo..hi, n).prop_map(|v| Distribution::empirical(&v).unwrap())
}

/// Quasi-antitone builtin costs with a range of atoms inside their domains.
fn builtin_cost() -> impl Strategy<Value = (CostFunction, f64, f64)> {
    let casm = |g: Generator| (CostFunction::new(g, 0.5, ScalingPair::Casm).unwrap(), 0.5, 10.0);
    prop_oneof![
        Just(casm(Generator::power(0.5).unwrap())),
        Just(casm(Generator::power(2.0).unwrap())),
        Just(casm(Generator::power(3.0).unwrap())),
        Just(casm(Generator::kullback_leibler())),
        Just((CostFunction::new(Generator::quadratic(), 0.5, ScalingPair::ClassicalBregman).unwrap(), -10.0, 10.0)),
        Just((CostFunction::new(Generator::quartic(), 0.5, ScalingPair::ClassicalBregman).unwrap(), -3.0, 3.0)),
        (0.0f64..=1.0).prop_map(|c| (CostFunction::new(Generator::total_variation(), c, ScalingPair::TvScaled).unwrap(), 0.5, 10.0)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn quantile_is_a_generalized_inverse(p in discrete_law(-5.0, 5.0, 8), x in 1e-6f64..(1.0 - 1e-6), y in 1e-6f64..(1.0 - 1e-6)) {
        let z = p.quantile(x).unwrap();
        prop_assert!(p.cdf(z) >= x - 1e-15);
        prop_assert!(p.cdf_left(z) <= x + 1e-15);
        let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
        prop_assert!(p.quantile(lo).unwrap() <= p.quantile(hi).unwrap());
    }

    #[test]
    fn kernels_are_nonnegative_and_vanish_on_the_diagonal(s in 0.01f64..20.0, t in 0.01f64..20.0, c in 0.0f64..=1.0) {
        for g in [Generator::power(0.5).unwrap(), Generator::power(2.0).unwrap(), Generator::power(-1.0).unwrap(),
                  Generator::kullback_leibler(), Generator::reverse_kullback_leibler(), Generator::total_variation(),
                  Generator::quadratic(), Generator::quartic()] {
            prop_assert!(g.kernel(c, s, t).unwrap() >= 0.0, "{} at ({s}, {t})", g.name());
            prop_assert_eq!(g.kernel(c, t, t).unwrap(), 0.0);
        }
    }

    #[test]
    fn builtin_costs_are_quasi_antitone((cf, lo, hi) in builtin_cost(), a in 0.0f64..1.0, b in 0.0f64..1.0, c in 0.0f64..1.0, d in 0.0f64..1.0) {
        let at = |x: f64| lo + (hi - lo) * x;
        let (u1, u2) = (at(a.min(b)), at(a.max(b)));
        let (v1, v2) = (at(c.min(d)), at(c.max(d)));
        let m = quadruple_margin(&cf, u1, u2, v1, v2).unwrap();
        let scale = 1.0 + [cf.evaluate(u1, v1), cf.evaluate(u2, v2), cf.evaluate(u2, v1), cf.evaluate(u1, v2)]
            .iter().map(|x| x.clone().unwrap().abs()).fold(0.0, f64::max);
        prop_assert!(m <= 1e-10 * scale, "{} margin {m} at {:?}", cf.name(), (u1, u2, v1, v2));
    }

    #[test]
    fn comonotone_coupling_has_the_right_marginals(p in discrete_law(-5.0, 5.0, 10), q in discrete_law(-5.0, 5.0, 10)) {
        let c = comonotone_coupling(&p, &q).unwrap();
        prop_assert!(c.has_marginals(&p, &q));
        prop_assert!(c.is_comonotone());
        prop_assert!((c.total_mass() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn coupling_cost_equals_exact_divergence(
        (cf, p, q) in builtin_cost().prop_flat_map(|(cf, lo, hi)| (Just(cf), discrete_law(lo, hi, 8), discrete_law(lo, hi, 8)))
    ) {
        let a = coupling_cost(&comonotone_coupling(&p, &q).unwrap(), &cf).unwrap();
        let spec = DivergenceSpec::new(p, q, cf);
        let b = divergence_exact_discrete(&spec).unwrap().value;
        prop_assert!((a - b).abs() <= 1e-10 * (1.0 + a.abs()));
        prop_assert!(b >= 0.0);
        let quad = divergence_quadrature(&spec, &QuadratureOptions::default()).unwrap();
        prop_assert!((quad.value - b).abs() <= 1e-8 * (1.0 + b), "{} vs {b}", quad.value);
    }

    #[test]
    fn comonotone_plan_beats_every_permutation(
        (cf, p, q) in (builtin_cost(), 1usize..=6).prop_flat_map(|((cf, lo, hi), n)| (Just(cf), equal_law(lo, hi, n), equal_law(lo, hi, n)))
    ) {
        let a = coupling_cost(&comonotone_coupling(&p, &q).unwrap(), &cf).unwrap();
        let brute = brute_force_min(&p, &q, &cf).unwrap();
        prop_assert!((a - brute.min_cost).abs() <= 1e-9 * (1.0 + a.abs()), "{a} vs {}", brute.min_cost);
    }

    #[test]
    fn dual_bound_never_exceeds_the_minimum(p in equal_law(-3.0, 3.0, 4), q in equal_law(-3.0, 3.0, 4), seed in any::<u64>()) {
        let sqrt = CostFunction::sqrt_abs_difference();
        let r = lp_lower_bound_check(&p, &q, &sqrt, seed, 300).unwrap();
        let min = brute_force_min(&p, &q, &sqrt).unwrap().min_cost;
        prop_assert!(r.lower_bound <= min + 1e-12, "{} > {min}", r.lower_bound);
        prop_assert!(r.gap >= -1e-12);
    }

    #[test]
    fn monge_map_is_monotone(mean in -2.0f64..2.0, sd in 0.2f64..3.0, rate in 0.2f64..5.0, a in -5.0f64..5.0, b in -5.0f64..5.0) {
        let map = MongeMap::new(Distribution::normal(mean, sd).unwrap(), Distribution::exponential(rate).unwrap()).unwrap();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(map.apply(lo) <= map.apply(hi));
    }

    #[test]
    fn report_floats_round_trip(x in any::<f64>()) {
        let back = parse_float(&x.to_json()).unwrap();
        prop_assert!(back == x || (back.is_nan() && x.is_nan()));
    }
}

fn parametric_pairs() -> Vec<(Distribution, Distribution, CostFunction)> {
    let quad = CostFunction::new(Generator::quadratic(), 0.5, ScalingPair::ClassicalBregman).unwrap();
    let casm = |g| CostFunction::new(g, 0.5, ScalingPair::Casm).unwrap();
    let tv = CostFunction::new(Generator::total_variation(), 0.5, ScalingPair::TvScaled).unwrap();
    let u = |a, b| Distribution::uniform(a, b).unwrap();
    let e = |r| Distribution::exponential(r).unwrap();
    let n = |m, s| Distribution::normal(m, s).unwrap();
    vec![
        (u(0.0, 1.0), u(0.0, 2.0), quad.clone()),
        (n(0.0, 1.0), n(0.5, 1.5), quad.clone()),
        (n(0.0, 1.0), e(1.0), quad),
        (e(1.0), e(2.0), casm(Generator::kullback_leibler())),
        (e(2.0), e(1.0), casm(Generator::reverse_kullback_leibler())),
        (e(1.0), e(0.5), casm(Generator::power(2.0).unwrap())),
        (u(1.0, 2.0), e(1.0), casm(Generator::power(0.5).unwrap())),
        (e(1.0), u(1.0, 4.0), tv.clone()),
        (n(0.0, 1.0), n(1.0, 2.0), tv),
    ]
}

#[test]
fn halving_tolerances_stays_within_the_error_estimate() {
    for (p, q, cf) in parametric_pairs() {
        let spec = DivergenceSpec::new(p, q, cf);
        let coarse = QuadratureOptions { rel_tol: 1e-6, abs_tol: 1e-8, ..Default::default() };
        let fine = QuadratureOptions { rel_tol: 5e-7, abs_tol: 5e-9, ..coarse };
        let a = divergence_quadrature(&spec, &coarse).unwrap();
        let b = divergence_quadrature(&spec, &fine).unwrap();
        assert!((a.value - b.value).abs() <= a.error_estimate.max(1e-15), "{}: {a:?} {b:?}", spec.cost.name());
    }
}

#[test]
fn clipping_is_stable() {
    for (p, q, cf) in parametric_pairs() {
        let spec = DivergenceSpec::new(p, q, cf);
        let base = QuadratureOptions::default();
        let a = divergence_quadrature(&spec, &base).unwrap();
        let b = divergence_quadrature(&spec, &QuadratureOptions { clip_eps: base.clip_eps / 10.0, ..base }).unwrap();
        assert!(a.value.is_finite());
        assert!((a.value - b.value).abs() < base.abs_tol, "{}: {} vs {}", spec.cost.name(), a.value, b.value);
    }
}

#[test]
fn exact_and_monte_carlo_agree_on_discrete_pairs() {
    let mut runner = proptest::test_runner::TestRunner::deterministic();
    let cf = CostFunction::new(Generator::kullback_leibler(), 0.5, ScalingPair::Casm).unwrap();
    for k in 0..20 {
        let p = discrete_law(0.5, 10.0, 6).new_tree(&mut runner).unwrap().current();
        let q = discrete_law(0.5, 10.0, 6).new_tree(&mut runner).unwrap().current();
        let spec = DivergenceSpec::new(p, q, cf.clone());
        let exact = divergence_exact_discrete(&spec).unwrap();
        let mc = divergence_monte_carlo(&spec, 20_000, k).unwrap();
        assert!((exact.value - mc.value).abs() <= 5.0 * mc.error_estimate + 1e-12, "{exact:?} {mc:?}");
    }
}

#[test]
fn quadrature_and_monte_carlo_agree_on_parametric_pairs() {
    let pairs = parametric_pairs();
    let mut agreed = 0;
    for k in 0..30u64 {
        let (p, q, cf) = pairs[k as usize % pairs.len()].clone();
        let spec = DivergenceSpec::new(p, q, cf);
        let quad = divergence_quadrature(&spec, &QuadratureOptions::default()).unwrap();
        let mc = divergence_monte_carlo(&spec, 20_000, 1000 + k).unwrap();
        assert!((quad.value - mc.value).abs() <= 5.0 * (quad.error_estimate + mc.error_estimate), "{quad:?} {mc:?}");
        agreed += 1;
    }
    assert_eq!(agreed, 30);
}
