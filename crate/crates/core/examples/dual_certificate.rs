// Certifying the comonotone plan on unequal-weight instances with a dual bound.

use directed_ot::prelude::*;
use directed_ot::transport::lp_lower_bound_check;

pub fn run_example() -> std::result::Result<(), Box<dyn std::error::Error>> {
    let p = Distribution::parse("discrete:v=-3,0,0.5,4,6;w=0.1,0.3,0.2,0.3,0.1")?;
    let q = Distribution::parse("discrete:v=-1,2,2.5;w=0.45,0.25,0.3")?;
    let cf = CostFunction::new(Generator::quadratic(), 0.5, ScalingPair::ClassicalBregman)?;
    let r = lp_lower_bound_check(&p, &q, &cf, 0, 2_000)?;
    println!("comonotone cost {:.10}, dual bound {:.10}, certified: {}", r.comonotone_cost, r.lower_bound, r.certified);

    // For a cost that is not quasi-antitone the bound stays below the comonotone cost.
    let sqrt = CostFunction::sqrt_abs_difference();
    let r = lp_lower_bound_check(&Distribution::empirical(&[0.0, 1.0])?, &Distribution::empirical(&[2.0, 3.0])?, &sqrt, 0, 5_000)?;
    println!("√|u−v|: comonotone {:.5}, dual bound {:.5}, certified: {}", r.comonotone_cost, r.lower_bound, r.certified);
    Ok(())
}

#[allow(dead_code)]
fn main() -> std::result::Result<(), Box<dyn std::error::Error>> {
    run_example()
}
