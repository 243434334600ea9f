// Divergence generators, their kernels ψ(s,t) and the boundary conventions.

use directed_ot::generators::{validate_generator, Generator, Interval};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let kl = Generator::kullback_leibler();
    println!("KL kernel ψ(2, 1) = {:.6}", kl.kernel(0.5, 2.0, 1.0)?);

    // Power generators are extended to the endpoint 0 of their domain.
    for gamma in [0.5, 2.0, 3.0] {
        let g = Generator::power(gamma)?;
        let (value, convention) = g.kernel_traced(0.5, 0.0, 1.0)?;
        let (tangent_at_zero, tangent_convention) = g.kernel_traced(0.5, 1.0, 0.0)?;
        println!(
            "{:<16} ψ(0, 1) = {value:.4} [{}]   ψ(1, 0) = {tangent_at_zero} [{}]",
            g.name(),
            convention.tag(),
            tangent_convention.tag()
        );
    }

    // Total variation has a kink at 1; the weight c selects the subderivative.
    let tv = Generator::total_variation();
    for c in [0.0, 0.5, 1.0] {
        println!("TV with c = {c}: ψ(2, 1) = {}, ψ(0.5, 1) = {}", tv.kernel(c, 2.0, 1.0)?, tv.kernel(c, 0.5, 1.0)?);
    }
    let report = validate_generator(&tv, 0.5, Interval::new(0.1, 3.0), Interval::new(0.1, 3.0))?;
    println!("TV strictly convex: {}, affine stretches found: {}", report.strictly_convex, report.affine_stretches.len());

    // A user-supplied generator: φ(t) = cosh(t) − 1.
    let cosh = Generator::custom("cosh", f64::NEG_INFINITY, f64::INFINITY, |t| t.cosh() - 1.0, f64::sinh)?;
    let report = validate_generator(&cosh, 0.5, Interval::new(-2.0, 2.0), Interval::new(-2.0, 2.0))?;
    assert!(report.usable && report.strictly_convex);
    println!("cosh kernel ψ(1, 0) = {:.6}", cosh.kernel(0.5, 1.0, 0.0)?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
