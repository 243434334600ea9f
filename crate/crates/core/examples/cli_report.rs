// Driving the command-line interface in-process and reading its JSON.

use directed_ot::cli::main_with_args;
use directed_ot::report::parse_float;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let runs: [&[&str]; 3] = [
        &["compute", "--p", "uniform:0,1", "--q", "uniform:0,2", "--gen", "quadratic", "--scaling", "cbd"],
        &["verify-optimality", "--n", "6", "--trials", "20", "--gen", "power:gamma=2", "--scaling", "casm", "--seed", "42"],
        &["check-monge", "--gen", "pointwise:sqrt-abs", "--u-range", "0,1", "--v-range", "2,3", "--n", "11"],
    ];
    for args in runs {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = main_with_args(std::iter::once("directed-ot").chain(args.iter().copied()), &mut out, &mut err);
        let doc: serde_json::Value = serde_json::from_slice(&out)?;
        let headline = match args[0] {
            "compute" => format!("value {}", parse_float(&doc["value"]).unwrap_or(f64::NAN)),
            "verify-optimality" => format!("{} of {} pass", doc["passes"], doc["trials"]),
            _ => format!("verdict {}, witness {}", doc["verdict"], doc["witness"]),
        };
        println!("{:<18} exit {code}: {headline}", args[0]);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
