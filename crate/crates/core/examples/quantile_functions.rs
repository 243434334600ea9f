// Quantile functions of discrete and parametric laws, built from spec strings.

use directed_ot::distributions::{ks_statistic, Distribution};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let coin = Distribution::parse("discrete:v=0,1;w=0.5,0.5")?;
    // At a breakpoint the generalized inverse returns the left atom.
    assert_eq!(coin.quantile(0.5)?, 0.0);
    assert_eq!(coin.quantile(0.5000001)?, 1.0);
    assert!(coin.quantile(1.0).is_err());

    let empirical = Distribution::parse("empirical:3,1,2,2")?;
    let (values, weights) = empirical.atoms().expect("discrete");
    println!("empirical atoms {values:?} with weights {weights:?}");

    for spec in ["uniform:0,2", "exp:1.5", "normal:1,2"] {
        let law = Distribution::parse(spec)?;
        let median = law.quantile(0.5)?;
        let ks = ks_statistic(&law.sample(7, 5_000), &law);
        println!("{:<14} median {median:>8.5}  F(median) = {:.5}  KS(5000 draws) = {ks:.4}", law.describe(), law.cdf(median));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
