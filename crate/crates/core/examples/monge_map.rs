// The monotone transport map T = F_q← ∘ F_p for an atomless source.

use directed_ot::prelude::*;
use directed_ot::divergence::divergence_quadrature;

pub fn run_example() -> std::result::Result<(), Box<dyn std::error::Error>> {
    let p = Distribution::normal(0.0, 1.0)?;
    let q = Distribution::normal(1.0, 2.0)?;
    let map = MongeMap::new(p.clone(), q.clone())?;
    for u in [-2.0, -1.0, 0.0, 1.0, 2.0] {
        println!("T({u:+.1}) = {:+.6}", map.apply(u));
    }

    let cf = CostFunction::new(Generator::quadratic(), 0.5, ScalingPair::ClassicalBregman)?;
    let opts = QuadratureOptions::default();
    let cost = map.cost(&cf, &opts)?;
    let d = divergence_quadrature(&DivergenceSpec::new(p, q, cf), &opts)?;
    println!("∫Υ(u, T(u)) dP = {:.12}, D(p, q) = {:.12}", cost.value, d.value);

    let ks = map.pushforward_check(10_000, 1);
    println!("push-forward KS {:.4} (threshold {:.4}): {}", ks.statistic, ks.threshold, ks.passed);
    Ok(())
}

#[allow(dead_code)]
fn main() -> std::result::Result<(), Box<dyn std::error::Error>> {
    run_example()
}
