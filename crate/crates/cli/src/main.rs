//! `sage`: signomial lower bounds and nonnegativity certificates from the
//! command line.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use sage_core::relax::{DEFAULT_MAX_LEVEL, DEFAULT_STOP_GAP};
use sage_core::{
    backend_by_name, grid_oracle, hierarchy_scan, sage_bound, sage_membership, verify_certificate,
    BoundResult, BoundStatus, ConicError, ConvexSet, Membership, OracleError, SageCertificate,
    SageError, SageOptions, Signomial, SolveOptions, VerifyOptions,
};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

const BACKEND_ENV: &str = "SAGE_BACKEND";

const EXIT_INPUT: u8 = 2;
const EXIT_BACKEND: u8 = 3;

#[derive(Parser)]
#[command(
    name = "sage",
    version,
    about = "SAGE certificates and bounds for signomials"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Lower bound(s) on the minimum of the signomial over the set.
    Bound(BoundArgs),
    /// Decide level-p SAGE membership of the signomial itself.
    Check(CheckArgs),
    /// Re-check a certificate against a problem.
    Verify(VerifyArgs),
    /// Brute-force minimum over a grid (n <= 3, bounded sets).
    Oracle(OracleArgs),
}

#[derive(Args)]
struct SolverFlags {
    /// Primal feasibility tolerance.
    #[arg(long)]
    feas_tol: Option<f64>,
    /// Duality gap tolerance.
    #[arg(long)]
    gap_tol: Option<f64>,
    /// Interior-point iteration limit.
    #[arg(long)]
    max_iter: Option<u32>,
    /// Instantiate every AGE block instead of only the needed ones.
    #[arg(long)]
    no_presolve: bool,
}

#[derive(Args)]
struct BoundArgs {
    problem: PathBuf,
    /// Solve a single level.
    #[arg(long, conflicts_with = "scan")]
    level: Option<usize>,
    /// Solve levels 0..=P, stopping early once bounds settle.
    #[arg(long, value_name = "P")]
    scan: Option<usize>,
    /// Early-stop threshold for --scan.
    #[arg(long, default_value_t = DEFAULT_STOP_GAP)]
    stop_gap: f64,
    /// Write the certificate of the (deepest optimal) level here.
    #[arg(long, value_name = "FILE")]
    certificate: Option<PathBuf>,
    /// Embed certificates in --json output.
    #[arg(long, requires = "json")]
    with_certificates: bool,
    #[arg(long, conflicts_with = "csv")]
    json: bool,
    /// Print `p,bound,status` rows.
    #[arg(long)]
    csv: bool,
    #[command(flatten)]
    solver: SolverFlags,
}

#[derive(Args)]
struct CheckArgs {
    problem: PathBuf,
    #[arg(long)]
    level: Option<usize>,
    #[arg(long, value_name = "FILE")]
    certificate: Option<PathBuf>,
    #[arg(long)]
    json: bool,
    #[command(flatten)]
    solver: SolverFlags,
}

#[derive(Args)]
struct VerifyArgs {
    certificate: PathBuf,
    problem: PathBuf,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct OracleArgs {
    problem: PathBuf,
    #[arg(long, default_value_t = 1e-3)]
    resolution: f64,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemFile {
    signomial: Signomial,
    set: ConvexSet,
    #[serde(default)]
    options: ProblemOptions,
}

#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct ProblemOptions {
    level: Option<usize>,
    p_max: Option<usize>,
    #[serde(default)]
    tolerances: Tolerances,
    seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct Tolerances {
    feas_tol: Option<f64>,
    gap_tol: Option<f64>,
    cert_tol: Option<f64>,
}

/// Failure carrying the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }

    fn backend(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_BACKEND,
            message: message.into(),
        }
    }
}

impl From<SageError> for Failure {
    fn from(e: SageError) -> Self {
        match e {
            SageError::Conic(ConicError::BackendFailure(_)) | SageError::Numerical { .. } => {
                Failure::backend(e.to_string())
            }
            other => Failure::input(other.to_string()),
        }
    }
}

fn load_problem(path: &Path) -> Result<ProblemFile, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    let problem: ProblemFile = serde_json::from_str(&text)
        .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    let n = problem
        .set
        .validate()
        .map_err(|e| Failure::input(format!("{}: set: {e}", path.display())))?;
    if problem.signomial.dim() != n {
        return Err(Failure::input(format!(
            "{}: signomial has n = {} but the set lives in R^{n}",
            path.display(),
            problem.signomial.dim()
        )));
    }
    Ok(problem)
}

fn sage_options(problem: &ProblemFile, flags: &SolverFlags) -> Result<SageOptions, Failure> {
    let tol = &problem.options.tolerances;
    let defaults = SolveOptions::default();
    let solve = SolveOptions {
        feas_tol: flags.feas_tol.or(tol.feas_tol).unwrap_or(defaults.feas_tol),
        gap_tol: flags.gap_tol.or(tol.gap_tol).unwrap_or(defaults.gap_tol),
        max_iter: flags.max_iter.unwrap_or(defaults.max_iter),
    };
    let name = std::env::var(BACKEND_ENV).unwrap_or_else(|_| "clarabel".to_string());
    let backend = backend_by_name(&name).map_err(|e| Failure::input(e.to_string()))?;
    Ok(SageOptions {
        solve,
        presolve: !flags.no_presolve,
        backend: Arc::from(backend),
    })
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).expect("serializable");
    std::fs::write(path, text + "\n")
        .map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn with_timing(mut value: Value, started: Instant) -> String {
    value["timing"] = json!({ "seconds": started.elapsed().as_secs_f64() });
    serde_json::to_string_pretty(&value).expect("serializable")
}

fn status_name(s: BoundStatus) -> &'static str {
    match s {
        BoundStatus::Optimal => "optimal",
        BoundStatus::InfeasibleAllLambda => "infeasible_all_lambda",
        BoundStatus::Unbounded => "unbounded",
        BoundStatus::NumericalTrouble => "numerical_trouble",
    }
}

fn run_bound(args: &BoundArgs) -> Result<u8, Failure> {
    let started = Instant::now();
    let problem = load_problem(&args.problem)?;
    let opts = sage_options(&problem, &args.solver)?;
    let f = &problem.signomial;
    let set = &problem.set;

    let single = match (args.level, args.scan) {
        (Some(p), _) => Some(p),
        (None, Some(_)) => None,
        (None, None) => problem.options.level,
    };
    let (levels, stopped_early, violations) = match single {
        Some(p) => (vec![sage_bound(f, set, p, &opts)?], false, Vec::new()),
        None => {
            let p_max = args
                .scan
                .or(problem.options.p_max)
                .unwrap_or(DEFAULT_MAX_LEVEL);
            let scan = hierarchy_scan(f, set, p_max, args.stop_gap, &opts)?;
            (scan.levels, scan.stopped_early, scan.violations)
        }
    };
    for v in &violations {
        eprintln!(
            "warning: bound decreased at p = {}: {} -> {}",
            v.level, v.previous, v.current
        );
    }

    let best: Option<&BoundResult> = levels.iter().rev().find(|r| r.certificate.is_some());
    if let Some(path) = &args.certificate {
        match best.and_then(|r| r.certificate.as_ref()) {
            Some(cert) => write_json(path, cert)?,
            None => eprintln!("no optimal level; certificate not written"),
        }
    }

    if args.json {
        let rows: Vec<Value> = levels
            .iter()
            .map(|r| {
                let mut row = json!({ "p": r.level, "status": status_name(r.status) });
                if let Some(b) = r.bound {
                    row["bound"] = json!(b);
                }
                if let Some(c) = &r.certificate {
                    row["residual"] = json!(c.residual);
                }
                row
            })
            .collect();
        let mut out = json!({
            "levels": rows,
            "stoppedEarly": stopped_early,
            "violations": violations,
        });
        if args.with_certificates {
            let certs: Vec<Option<&SageCertificate>> =
                levels.iter().map(|r| r.certificate.as_ref()).collect();
            out["certificates"] = json!(certs);
        }
        println!("{}", with_timing(out, started));
    } else if args.csv {
        println!("p,bound,status");
        for r in &levels {
            let b = r.bound.map(|b| format!("{b:.12}")).unwrap_or_default();
            println!("{},{b},{}", r.level, status_name(r.status));
        }
    } else {
        let mut out = format!("{:>3}  {:>18}  {}\n", "p", "bound", "status");
        for r in &levels {
            let b = match (r.bound, r.status) {
                (Some(b), _) => format!("{b:.12}"),
                (None, BoundStatus::InfeasibleAllLambda) => "-inf".to_string(),
                (None, _) => "-".to_string(),
            };
            let _ = writeln!(out, "{:>3}  {b:>18}  {}", r.level, status_name(r.status));
        }
        if stopped_early {
            out.push_str("stopped early: successive bounds agree\n");
        }
        print!("{out}");
    }
    Ok(0)
}

fn run_check(args: &CheckArgs) -> Result<u8, Failure> {
    let started = Instant::now();
    let problem = load_problem(&args.problem)?;
    let opts = sage_options(&problem, &args.solver)?;
    let p = args.level.or(problem.options.level).unwrap_or(0);
    let (label, slack, code) = match sage_membership(&problem.signomial, &problem.set, p, &opts) {
        Ok(Membership::Feasible { witness, slack }) => {
            if let Some(path) = &args.certificate {
                write_json(path, &witness)?;
            }
            ("MEMBER", Some(slack), 0)
        }
        Ok(Membership::Infeasible { slack }) => ("NOT-MEMBER", Some(slack), 1),
        Err(SageError::Numerical { .. }) | Err(SageError::Conic(ConicError::BackendFailure(_))) => {
            ("NUMERICAL", None, EXIT_BACKEND)
        }
        Err(e) => return Err(e.into()),
    };
    if args.json {
        let out = json!({ "level": p, "result": label, "slack": slack });
        println!("{}", with_timing(out, started));
    } else {
        match slack {
            Some(s) => println!("{label} (level {p}, slack {s:.3e})"),
            None => println!("{label} (level {p})"),
        }
    }
    Ok(code)
}

fn run_verify(args: &VerifyArgs) -> Result<u8, Failure> {
    let started = Instant::now();
    let problem = load_problem(&args.problem)?;
    let text = std::fs::read_to_string(&args.certificate)
        .map_err(|e| Failure::input(format!("{}: {e}", args.certificate.display())))?;
    let cert = SageCertificate::from_json(&text)
        .map_err(|e| Failure::input(format!("{}: {e}", args.certificate.display())))?;
    if let Some(level) = problem.options.level {
        if level != cert.level {
            return Err(Failure::input(format!(
                "certificate is for level {} but the problem asks for level {level}",
                cert.level
            )));
        }
    }
    let defaults = VerifyOptions::default();
    let opts = VerifyOptions {
        tol: args
            .tol
            .or(problem.options.tolerances.cert_tol)
            .unwrap_or(defaults.tol),
        samples: args.samples.unwrap_or(defaults.samples),
        seed: args.seed.or(problem.options.seed).unwrap_or(defaults.seed),
    };
    let report = verify_certificate(&cert, &problem.signomial, &problem.set, &opts)?;

    if args.json {
        let out = serde_json::to_value(&report).expect("serializable");
        println!("{}", with_timing(out, started));
    } else {
        // One line per constraint family, worst block shown.
        let mut names: Vec<&str> = Vec::new();
        for c in &report.checks {
            if !names.contains(&c.name.as_str()) {
                names.push(&c.name);
            }
        }
        for name in names {
            let group: Vec<_> = report.checks.iter().filter(|c| c.name == name).collect();
            let worst = group
                .iter()
                .max_by(|a, b| a.violation.total_cmp(&b.violation))
                .expect("non-empty group");
            let ok = group.iter().all(|c| c.passed);
            let detail = match group.iter().filter_map(|c| c.minimum).reduce(f64::min) {
                Some(m) => format!("min {m:.3e}"),
                None => format!("max violation {:.3e}", worst.violation),
            };
            println!("{}  {name}: {detail}", if ok { "ok  " } else { "FAIL" });
        }
        for c in report.failures() {
            match c.block {
                Some(k) => println!(
                    "violated: {} in block {k} (index {})",
                    c.name, cert.blocks[k].index
                ),
                None => println!("violated: {}", c.name),
            }
        }
        if !report.sampled {
            println!("set is unbounded; sampling skipped");
        }
        println!(
            "{}",
            if report.passed {
                "VERIFIED"
            } else {
                "REJECTED"
            }
        );
    }
    Ok(if report.passed { 0 } else { 1 })
}

fn run_oracle(args: &OracleArgs) -> Result<u8, Failure> {
    let started = Instant::now();
    let problem = load_problem(&args.problem)?;
    let value = grid_oracle(&problem.signomial, &problem.set, args.resolution)
        .map_err(|e: OracleError| Failure::input(e.to_string()))?;
    if args.json {
        let out = json!({ "value": value, "resolution": args.resolution });
        println!("{}", with_timing(out, started));
    } else {
        println!("{value:.9}");
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Bound(a) => run_bound(a),
        Command::Check(a) => run_check(a),
        Command::Verify(a) => run_verify(a),
        Command::Oracle(a) => run_oracle(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
