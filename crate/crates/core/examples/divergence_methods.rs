// The directed distance D(p, q) by exact breakpoints, quadrature and Monte Carlo.

use directed_ot::prelude::*;
use directed_ot::divergence::{check_divergence_properties, divergence_monte_carlo, divergence_quadrature};

pub fn run_example() -> std::result::Result<(), Box<dyn std::error::Error>> {
    let opts = QuadratureOptions::default();
    let quadratic = CostFunction::new(Generator::quadratic(), 0.5, ScalingPair::ClassicalBregman)?;

    let discrete = DivergenceSpec::new(
        Distribution::parse("discrete:v=1,3;w=0.5,0.5")?,
        Distribution::parse("discrete:v=2")?,
        CostFunction::new(Generator::total_variation(), 0.5, ScalingPair::TvScaled)?,
    );
    let exact = divergence(&discrete, &opts)?;
    println!("exact:      D = {} ({} cells)", exact.value, exact.nodes_used);

    let uniform = DivergenceSpec::new(Distribution::uniform(0.0, 1.0)?, Distribution::uniform(0.0, 2.0)?, quadratic);
    let quad = divergence_quadrature(&uniform, &opts)?;
    let mc = divergence_monte_carlo(&uniform, 100_000, 42)?;
    println!("quadrature: D = {:.12} ± {:.1e} (exact 1/6)", quad.value, quad.error_estimate);
    println!("MC:         D = {:.6} ± {:.1e}", mc.value, mc.error_estimate);

    // Exp(1) and Exp(2) under KL: the distance is not symmetric.
    let kl = DivergenceSpec::new(
        Distribution::exponential(1.0)?,
        Distribution::exponential(2.0)?,
        CostFunction::new(Generator::kullback_leibler(), 0.5, ScalingPair::Casm)?,
    );
    let props = check_divergence_properties(&kl, 50, 3, &opts)?;
    println!("KL: D(p,q) = {:.6}, D(q,p) = {:.6}, properties pass: {}", props.asymmetry.d_pq, props.asymmetry.d_qp, props.passed);

    // A non-integrable blow-up is reported as an infinite value.
    let blowup = DivergenceSpec::new(
        Distribution::uniform(1.0, 2.0)?,
        Distribution::uniform(0.0, 1.0)?,
        CostFunction::new(Generator::power(3.0)?, 0.5, ScalingPair::Casm)?,
    );
    println!("blow-up:    D = {}", divergence(&blowup, &opts)?.value);
    Ok(())
}

#[allow(dead_code)]
fn main() -> std::result::Result<(), Box<dyn std::error::Error>> {
    run_example()
}
