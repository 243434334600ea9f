//! Every example under `examples/` runs as a test.

mod quantile_functions {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/quantile_functions.rs"));
}

#[test]
fn quantile_functions_runs() {
    quantile_functions::run_example().expect("quantile_functions example should run");
}

mod generator_kernel {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/generator_kernel.rs"));
}

#[test]
fn generator_kernel_runs() {
    generator_kernel::run_example().expect("generator_kernel example should run");
}

mod cost_quasi_antitone {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/cost_quasi_antitone.rs"));
}

#[test]
fn cost_quasi_antitone_runs() {
    cost_quasi_antitone::run_example().expect("cost_quasi_antitone example should run");
}

mod divergence_methods {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/divergence_methods.rs"));
}

#[test]
fn divergence_methods_runs() {
    divergence_methods::run_example().expect("divergence_methods example should run");
}

mod comonotone_theorem {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/comonotone_theorem.rs"));
}

#[test]
fn comonotone_theorem_runs() {
    comonotone_theorem::run_example().expect("comonotone_theorem example should run");
}

mod dual_certificate {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/dual_certificate.rs"));
}

#[test]
fn dual_certificate_runs() {
    dual_certificate::run_example().expect("dual_certificate example should run");
}

mod monge_map {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/monge_map.rs"));
}

#[test]
fn monge_map_runs() {
    monge_map::run_example().expect("monge_map example should run");
}

mod negative_control {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/negative_control.rs"));
}

#[test]
fn negative_control_runs() {
    negative_control::run_example().expect("negative_control example should run");
}

mod cli_report {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/cli_report.rs"));
}

#[test]
fn cli_report_runs() {
    cli_report::run_example().expect("cli_report example should run");
}
