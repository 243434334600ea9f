// The comonotone coupling is optimal for quasi-antitone costs: its cost
// matches the quantile divergence and the brute-force transport minimum.

use directed_ot::prelude::*;
use directed_ot::divergence::divergence_exact_discrete;
use directed_ot::transport::{brute_force_min, verify_theorem1, TheoremConfig};

pub fn run_example() -> std::result::Result<(), Box<dyn std::error::Error>> {
    let p = Distribution::empirical(&[0.0, 1.0])?;
    let q = Distribution::empirical(&[10.0, 20.0])?;
    let cf = CostFunction::new(Generator::quadratic(), 0.5, ScalingPair::ClassicalBregman)?;

    let plan = comonotone_coupling(&p, &q)?;
    let a = coupling_cost(&plan, &cf)?;
    let b = divergence_exact_discrete(&DivergenceSpec::new(p.clone(), q.clone(), cf.clone()))?.value;
    let c = brute_force_min(&p, &q, &cf)?;
    println!("plan {:?}", plan.plan);
    println!("comonotone cost {a}, divergence {b}, minimum {} at {:?}", c.min_cost, c.permutation);

    for cf in [
        CostFunction::new(Generator::power(0.5)?, 0.5, ScalingPair::Casm)?,
        CostFunction::new(Generator::kullback_leibler(), 0.5, ScalingPair::Casm)?,
        CostFunction::new(Generator::total_variation(), 0.5, ScalingPair::TvScaled)?,
    ] {
        let report = verify_theorem1(&cf, &TheoremConfig { trials: 50, seed: 7, ..Default::default() })?;
        println!("{:<20} {}/{} random instances agree", report.cost, report.passes, report.trials);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> std::result::Result<(), Box<dyn std::error::Error>> {
    run_example()
}
