//! Command-line front end: `compute`, `verify-optimality`, `check-monge`,
//! `monge` and `properties`, each writing one JSON document.
//!
//! Exit codes: 0 success, 1 a property or verification failed, 2 usage
//! error, 3 numerical failure (singular scaling, divergent integral).

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::cost::{mixed_partial_sign, quasi_antitone_quadruple_test, CostFunction, QuadrupleReport, ScalingPair, SignReport, Verdict};
use crate::distributions::Distribution;
use crate::divergence::{
    check_divergence_properties, divergence, divergence_exact_discrete, divergence_monte_carlo, divergence_quadrature,
    DivergenceResult, DivergenceSpec, QuadratureOptions,
};
use crate::error::{Error, Result};
use crate::generators::{Generator, Interval};
use crate::report::{error_json, float, to_json};
use crate::transport::{verify_instance, verify_theorem1, InstanceCheck, MongeMap, PushforwardReport, TheoremConfig, Tolerances, TransportCost};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Caps the worker threads used by parallel scans.
pub const THREADS_ENV: &str = "DIRECTED_OT_THREADS";

#[derive(Debug, Parser)]
#[command(name = "directed-ot", version, about = "Directed distances between quantile functions and 1-D optimal transport")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate D(p, q) for a generator and scaling.
    Compute {
        #[command(flatten)]
        laws: Laws,
        #[command(flatten)]
        cost: CostArgs,
        #[command(flatten)]
        tol: TolArgs,
        /// auto (exact for discrete pairs, quadrature otherwise), exact, quadrature or mc.
        #[arg(long, default_value = "auto")]
        method: String,
        /// Monte Carlo sample size.
        #[arg(long, default_value_t = 100_000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Check comonotone cost = divergence = transport minimum.
    VerifyOptimality {
        /// Verify this discrete pair instead of random instances (needs --q).
        #[arg(long)]
        p: Option<String>,
        #[arg(long)]
        q: Option<String>,
        #[command(flatten)]
        cost: CostArgs,
        /// Largest number of atoms per side in random instances.
        #[arg(long, default_value_t = 7)]
        n: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Draw Dirichlet weights and certify through the dual bound.
        #[arg(long)]
        unequal_weights: bool,
        /// Run even if the cost fails the quasi-antitone check.
        #[arg(long)]
        force: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Collect quasi-antitone evidence for a cost.
    CheckMonge {
        #[command(flatten)]
        cost: CostArgs,
        /// `lo,hi`; defaults depend on the scaling.
        #[arg(long)]
        u_range: Option<String>,
        #[arg(long)]
        v_range: Option<String>,
        /// Points per axis of the quadruple grid (at most 31).
        #[arg(long, default_value_t = 21)]
        n: usize,
        /// Additional random quadruples.
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Build the monotone transport map and compare its cost with D(p, q).
    Monge {
        #[command(flatten)]
        laws: Laws,
        #[command(flatten)]
        cost: CostArgs,
        #[command(flatten)]
        tol: TolArgs,
        /// Samples for the push-forward check.
        #[arg(long, default_value_t = 10_000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Check nonnegativity, reflexivity and asymmetry of D.
    Properties {
        #[command(flatten)]
        laws: Laws,
        #[command(flatten)]
        cost: CostArgs,
        #[command(flatten)]
        tol: TolArgs,
        /// Random probe levels beyond the fixed grid.
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Debug, Args)]
struct Laws {
    /// Source law, e.g. `uniform:0,1`, `discrete:v=1,3;w=0.5,0.5`, `empirical:@data.csv`.
    #[arg(long)]
    p: String,
    /// Target law.
    #[arg(long)]
    q: String,
}

#[derive(Debug, Args)]
struct CostArgs {
    /// `power:gamma=<γ>`, `kl`, `revkl`, `tv`, `quadratic`, `quartic` or `pointwise:sqrt-abs`.
    #[arg(long = "gen")]
    generator: String,
    /// `cbd`, `casm`, `tvscaled` or `sbd:connector=<v|u|mean|geomean>`.
    #[arg(long)]
    scaling: Option<String>,
    /// Subderivative weight in [0, 1]; required for non-smooth generators.
    #[arg(long)]
    c: Option<f64>,
}

#[derive(Debug, Args)]
struct TolArgs {
    #[arg(long, default_value_t = 1e-8)]
    rel_tol: f64,
    #[arg(long, default_value_t = 1e-10)]
    abs_tol: f64,
    #[arg(long, default_value_t = 1e-9)]
    clip_eps: f64,
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Write the JSON document here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print a short summary to stderr.
    #[arg(long)]
    human: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComputeMethod {
    Auto,
    Exact,
    Quadrature,
    MonteCarlo,
}

/// A fully validated command.
#[derive(Debug, Clone)]
pub enum Task {
    Compute { spec: DivergenceSpec, method: ComputeMethod, opts: QuadratureOptions, n: usize, seed: u64 },
    VerifyInstance { p: Distribution, q: Distribution, cost: CostFunction },
    VerifyRandom { cost: CostFunction, config: TheoremConfig },
    CheckMonge { cost: CostFunction, u_range: Interval, v_range: Interval, grid_n: usize, trials: usize, seed: u64 },
    Monge { spec: DivergenceSpec, opts: QuadratureOptions, n: usize, seed: u64 },
    Properties { spec: DivergenceSpec, opts: QuadratureOptions, trials: usize, seed: u64 },
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub task: Task,
    pub out: Option<PathBuf>,
    pub human: bool,
}

/// A parsing failure, rendered by clap or by the library.
#[derive(Debug)]
pub enum UsageError {
    Clap(clap::Error),
    Invalid(Error),
}

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            UsageError::Clap(e) => write!(f, "{e}"),
            UsageError::Invalid(e) => write!(f, "{e}"),
        }
    }
}

fn parse_cost(args: &CostArgs) -> Result<CostFunction> {
    if let Some(name) = args.generator.strip_prefix("pointwise:") {
        return match name {
            "sqrt-abs" => Ok(CostFunction::sqrt_abs_difference()),
            other => Err(Error::Parse(format!("unknown pointwise cost `{other}`"))),
        };
    }
    let generator: Generator = args.generator.parse()?;
    let scaling: ScalingPair = args
        .scaling
        .as_deref()
        .ok_or_else(|| Error::Parse(format!("--scaling is required with --gen {}", args.generator)))?
        .parse()?;
    let c = match args.c {
        Some(c) => c,
        None if generator.is_smooth() => 0.5,
        None => return Err(Error::Parse(format!("--c is required for the non-smooth generator {}", generator.name()))),
    };
    CostFunction::new(generator, c, scaling)
}

fn parse_opts(t: &TolArgs) -> Result<QuadratureOptions> {
    let opts = QuadratureOptions { rel_tol: t.rel_tol, abs_tol: t.abs_tol, clip_eps: t.clip_eps };
    opts.validate()?;
    Ok(opts)
}

fn parse_spec(laws: &Laws, cost: &CostArgs) -> Result<DivergenceSpec> {
    Ok(DivergenceSpec::new(Distribution::parse(&laws.p)?, Distribution::parse(&laws.q)?, parse_cost(cost)?))
}

fn parse_range(s: &str) -> Result<Interval> {
    let (lo, hi) = s.split_once(',').ok_or_else(|| Error::Parse(format!("range `{s}` is not `lo,hi`")))?;
    let num = |x: &str| x.trim().parse::<f64>().map_err(|_| Error::Parse(format!("`{x}` is not a number")));
    let r = Interval::new(num(lo)?, num(hi)?);
    if r.is_empty() || !r.lo.is_finite() || !r.hi.is_finite() {
        return Err(Error::Parse(format!("range `{s}` is empty or unbounded")));
    }
    Ok(r)
}

fn into_config(cli: Cli) -> Result<RunConfig> {
    let (task, output) = match cli.command {
        Command::Compute { laws, cost, tol, method, n, seed, output } => {
            let method = match method.as_str() {
                "auto" => ComputeMethod::Auto,
                "exact" => ComputeMethod::Exact,
                "quadrature" => ComputeMethod::Quadrature,
                "mc" => ComputeMethod::MonteCarlo,
                other => return Err(Error::Parse(format!("unknown method `{other}`"))),
            };
            (Task::Compute { spec: parse_spec(&laws, &cost)?, method, opts: parse_opts(&tol)?, n, seed }, output)
        }
        Command::VerifyOptimality { p, q, cost, n, trials, seed, unequal_weights, force, output } => {
            let cost = parse_cost(&cost)?;
            let task = match (p, q) {
                (Some(p), Some(q)) => Task::VerifyInstance { p: Distribution::parse(&p)?, q: Distribution::parse(&q)?, cost },
                (None, None) => {
                    let config = TheoremConfig {
                        trials,
                        seed,
                        max_atoms: n,
                        equal_weights: !unequal_weights,
                        tolerances: Tolerances::default(),
                        force,
                    };
                    Task::VerifyRandom { cost, config }
                }
                _ => return Err(Error::Parse("--p and --q must be given together".into())),
            };
            (task, output)
        }
        Command::CheckMonge { cost, u_range, v_range, n, trials, seed, output } => {
            let cost = parse_cost(&cost)?;
            let (du, dv) = cost.default_check_ranges();
            let u_range = u_range.as_deref().map(parse_range).transpose()?.unwrap_or(du);
            let v_range = v_range.as_deref().map(parse_range).transpose()?.unwrap_or(dv);
            (Task::CheckMonge { cost, u_range, v_range, grid_n: n, trials, seed }, output)
        }
        Command::Monge { laws, cost, tol, n, seed, output } => {
            (Task::Monge { spec: parse_spec(&laws, &cost)?, opts: parse_opts(&tol)?, n, seed }, output)
        }
        Command::Properties { laws, cost, tol, trials, seed, output } => {
            (Task::Properties { spec: parse_spec(&laws, &cost)?, opts: parse_opts(&tol)?, trials, seed }, output)
        }
    };
    Ok(RunConfig { task, out: output.out, human: output.human })
}

/// Parses `argv` (including the program name) into a validated config.
pub fn parse_args<I, T>(argv: I) -> std::result::Result<RunConfig, UsageError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(UsageError::Clap)?;
    into_config(cli).map_err(UsageError::Invalid)
}

#[derive(Serialize)]
struct CheckMongeReport {
    cost: String,
    u_range: Interval,
    v_range: Interval,
    verdict: Verdict,
    #[serde(serialize_with = "float")]
    worst_margin: f64,
    #[serde(serialize_with = "float")]
    witness: Option<[f64; 4]>,
    quadruples: QuadrupleReport,
    mixed_partial: Option<SignReport>,
}

#[derive(Serialize)]
struct MongeProbe {
    #[serde(serialize_with = "float")]
    u: f64,
    #[serde(serialize_with = "float")]
    t: f64,
}

#[derive(Serialize)]
struct Agreement {
    #[serde(serialize_with = "float")]
    difference: f64,
    #[serde(serialize_with = "float")]
    tolerance: f64,
    passed: bool,
}

#[derive(Serialize)]
struct MongeReport {
    source: String,
    target: String,
    cost_function: String,
    probes: Vec<MongeProbe>,
    monotone: bool,
    transport_cost: TransportCost,
    divergence: DivergenceResult,
    agreement: Agreement,
    pushforward: PushforwardReport,
}

#[derive(Serialize)]
struct InstanceReport {
    cost: String,
    #[serde(flatten)]
    check: InstanceCheck,
}

/// JSON document, exit code and a one-line summary.
struct Outcome {
    json: String,
    code: i32,
    summary: String,
}

fn error_code(e: &Error) -> i32 {
    match e {
        Error::SingularScaling { .. } | Error::NonFinite(_) | Error::DivergentAscent(_) => EXIT_NUMERICAL,
        Error::Precondition(_) => EXIT_FAILED,
        Error::Domain(_) | Error::InvalidParameters(_) | Error::Unsupported(_) | Error::Parse(_) | Error::Io(_) => EXIT_USAGE,
    }
}

fn execute(task: &Task) -> Result<Outcome> {
    match task {
        Task::Compute { spec, method, opts, n, seed } => {
            let r = match method {
                ComputeMethod::Auto => divergence(spec, opts)?,
                ComputeMethod::Exact => divergence_exact_discrete(spec)?,
                ComputeMethod::Quadrature => divergence_quadrature(spec, opts)?,
                ComputeMethod::MonteCarlo => divergence_monte_carlo(spec, *n, *seed)?,
            };
            let code = if r.value.is_finite() { EXIT_OK } else { EXIT_NUMERICAL };
            let summary = format!("D = {} ± {:e} ({:?}, {} nodes)", r.value, r.error_estimate, r.method, r.nodes_used);
            Ok(Outcome { json: to_json(&r), code, summary })
        }
        Task::VerifyInstance { p, q, cost } => {
            let check = verify_instance(p, q, cost, &Tolerances::default())?;
            let code = if check.passed { EXIT_OK } else { EXIT_FAILED };
            let summary = format!("A = {}, B = {}, C = {} ({:?}): {}", check.a, check.b, check.c, check.oracle, pass(check.passed));
            Ok(Outcome { json: to_json(&InstanceReport { cost: cost.name(), check }), code, summary })
        }
        Task::VerifyRandom { cost, config } => {
            let r = verify_theorem1(cost, config)?;
            let code = if r.all_passed() { EXIT_OK } else { EXIT_FAILED };
            let summary = format!("{}: {}/{} instances agree", r.cost, r.passes, r.trials);
            Ok(Outcome { json: to_json(&r), code, summary })
        }
        Task::CheckMonge { cost, u_range, v_range, grid_n, trials, seed } => {
            let quad = quasi_antitone_quadruple_test(cost, *u_range, *v_range, *grid_n, *seed, *trials)?;
            let sign = if cost.is_smooth() {
                Some(mixed_partial_sign(cost, *u_range, *v_range, (*grid_n).max(2))?)
            } else {
                None
            };
            let passed = quad.verdict.passed() && sign.as_ref().is_none_or(|s| s.verdict.passed());
            let report = CheckMongeReport {
                cost: cost.name(),
                u_range: *u_range,
                v_range: *v_range,
                verdict: if passed { Verdict::Pass } else { Verdict::Fail },
                worst_margin: quad.worst_margin,
                witness: quad.witness,
                quadruples: quad,
                mixed_partial: sign,
            };
            let summary = format!("{}: {:?}, worst margin {}", report.cost, report.verdict, report.worst_margin);
            let code = if passed { EXIT_OK } else { EXIT_FAILED };
            Ok(Outcome { json: to_json(&report), code, summary })
        }
        Task::Monge { spec, opts, n, seed } => {
            let map = MongeMap::new(spec.p.clone(), spec.q.clone())?;
            let probes: Vec<MongeProbe> = [0.05, 0.25, 0.5, 0.75, 0.95]
                .iter()
                .map(|&x| {
                    let u = spec.p.quantile_unchecked(x);
                    MongeProbe { u, t: map.apply(u) }
                })
                .collect();
            let monotone = probes.windows(2).all(|w| w[0].t <= w[1].t);
            let transport_cost = map.cost(&spec.cost, opts)?;
            let d = divergence_quadrature(spec, opts)?;
            let difference = if transport_cost.value == d.value { 0.0 } else { (transport_cost.value - d.value).abs() };
            let tolerance = 10.0 * (transport_cost.error_estimate + d.error_estimate).max(opts.abs_tol);
            let agreement = Agreement { difference, tolerance, passed: difference <= tolerance };
            let pushforward = map.pushforward_check(*n, *seed);
            let passed = monotone && agreement.passed && pushforward.passed;
            let summary = format!(
                "transport cost {} vs D {}: {}; KS {} < {}: {}",
                transport_cost.value,
                d.value,
                pass(agreement.passed),
                pushforward.statistic,
                pushforward.threshold,
                pass(pushforward.passed)
            );
            let code = if !d.value.is_finite() {
                EXIT_NUMERICAL
            } else if passed {
                EXIT_OK
            } else {
                EXIT_FAILED
            };
            let report = MongeReport {
                source: spec.p.describe(),
                target: spec.q.describe(),
                cost_function: spec.cost.name(),
                probes,
                monotone,
                transport_cost,
                divergence: d,
                agreement,
                pushforward,
            };
            Ok(Outcome { json: to_json(&report), code, summary })
        }
        Task::Properties { spec, opts, trials, seed } => {
            let r = check_divergence_properties(spec, *trials, *seed, opts)?;
            let code = if r.passed { EXIT_OK } else { EXIT_FAILED };
            let summary = format!(
                "NN {}, RE {}, converse {}; D(p,q) = {}, D(q,p) = {}",
                pass(r.nonnegativity),
                pass(r.reflexivity.passed),
                pass(r.converse.passed),
                r.asymmetry.d_pq,
                r.asymmetry.d_qp
            );
            Ok(Outcome { json: to_json(&r), code, summary })
        }
    }
}

fn pass(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "fail"
    }
}

fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse().ok().filter(|n| *n > 0)
}

/// Executes a validated config, writing the JSON document to `--out` or
/// `stdout`. Returns the process exit code.
pub fn run(config: &RunConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let outcome = match thread_cap() {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| execute(&config.task)),
            Err(e) => Err(Error::InvalidParameters(format!("{THREADS_ENV}: {e}"))),
        },
        None => execute(&config.task),
    };
    let outcome = outcome.unwrap_or_else(|e| Outcome { json: error_json(&e), code: error_code(&e), summary: e.to_string() });
    if config.human {
        let _ = writeln!(stderr, "{}", outcome.summary);
    }
    let written = match &config.out {
        Some(path) => std::fs::write(path, &outcome.json).map_err(|e| Error::Io(format!("{}: {e}", path.display()))),
        None => stdout.write_all(outcome.json.as_bytes()).map_err(Error::from),
    };
    match written {
        Ok(()) => outcome.code,
        Err(e) => {
            let _ = writeln!(stderr, "{e}");
            EXIT_USAGE
        }
    }
}

/// Parses and runs `argv`; the entry point of the binary.
pub fn main_with_args<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match parse_args(argv) {
        Ok(config) => run(&config, stdout, stderr),
        Err(UsageError::Clap(e)) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return EXIT_OK;
            }
            let _ = write!(stderr, "{e}");
            let doc = json!({ "error": { "kind": "usage", "detail": e.kind().to_string() } });
            let _ = stdout.write_all(to_json(&doc).as_bytes());
            EXIT_USAGE
        }
        Err(UsageError::Invalid(e)) => {
            let _ = writeln!(stderr, "{e}");
            let _ = stdout.write_all(error_json(&e).as_bytes());
            EXIT_USAGE
        }
    }
}
