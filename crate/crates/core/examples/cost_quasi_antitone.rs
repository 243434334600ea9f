// Transport costs from generator + scaling pairs, and evidence that they
// satisfy the quasi-antitone (Monge) inequality.

use directed_ot::cost::{mixed_partial_sign, quasi_antitone_quadruple_test, CostFunction, ScalingPair};
use directed_ot::generators::Generator;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let costs = [
        CostFunction::new(Generator::power(2.0)?, 0.5, ScalingPair::Casm)?,
        CostFunction::new(Generator::kullback_leibler(), 0.5, "casm".parse()?)?,
        CostFunction::new(Generator::quartic(), 0.5, ScalingPair::ClassicalBregman)?,
        CostFunction::new(Generator::quadratic(), 0.5, "sbd:connector=mean".parse()?)?,
        CostFunction::new(Generator::total_variation(), 0.5, ScalingPair::TvScaled)?,
    ];
    for cf in &costs {
        let (u, v) = cf.default_check_ranges();
        let quad = quasi_antitone_quadruple_test(cf, u, v, 16, 1, 5_000)?;
        let sign = if cf.is_smooth() {
            let s = mixed_partial_sign(cf, u, v, 8)?;
            format!("max ∂²Υ/∂u∂v = {:+.4} ({:?})", s.max_value, s.method)
        } else {
            "non-smooth, quadruples only".to_string()
        };
        println!("{:<22} Υ(2, 1) = {:<8.5} quadruples {:?}, {sign}", cf.name(), cf.evaluate(2.0, 1.0)?, quad.verdict);
    }

    // The 0/0 convention at the origin, and the error away from it.
    let casm = &costs[0];
    println!("CASM Υ(0, 0) = {}", casm.evaluate(0.0, 0.0)?);
    println!("CASM Υ(1, 0): {}", casm.evaluate(1.0, 0.0).unwrap_err());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
