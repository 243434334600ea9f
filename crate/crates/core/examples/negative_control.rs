// √|u − v| is not quasi-antitone, and the comonotone plan is not optimal for it.

use directed_ot::cost::{quasi_antitone_quadruple_test, CostFunction};
use directed_ot::distributions::Distribution;
use directed_ot::generators::Interval;
use directed_ot::transport::{brute_force_min, comonotone_coupling, coupling_cost, verify_theorem1, TheoremConfig};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let sqrt = CostFunction::sqrt_abs_difference();
    let quad = quasi_antitone_quadruple_test(&sqrt, Interval::new(0.0, 1.0), Interval::new(2.0, 3.0), 11, 0, 1_000)?;
    println!("quadruple test: {:?}, margin {:.4} at {:?}", quad.verdict, quad.worst_margin, quad.witness);

    let p = Distribution::empirical(&[0.0, 1.0])?;
    let q = Distribution::empirical(&[2.0, 3.0])?;
    let comonotone = coupling_cost(&comonotone_coupling(&p, &q)?, &sqrt)?;
    let best = brute_force_min(&p, &q, &sqrt)?;
    println!("comonotone {comonotone:.5} > minimum {:.5} at {:?}", best.min_cost, best.permutation);

    let refused = verify_theorem1(&sqrt, &TheoremConfig::default());
    println!("verifier: {}", refused.unwrap_err());
    let forced = verify_theorem1(&sqrt, &TheoremConfig { force: true, trials: 50, ..Default::default() })?;
    println!("forced run: {} of {} instances disagree", forced.failures.len(), forced.trials);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
