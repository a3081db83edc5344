//! Experiment runner for the Krylov solvability laboratory.
//!
//! Subcommands: `list`, `solve`, `diagnose`, `profile`, and
//! `reproduce-examples`. Reports are JSON documents with a top-level
//! `schema_version`; series can additionally be exported as CSV. Identical
//! configuration and seed produce byte-identical reports up to the
//! `timestamp_unix` field.
//!
//! Exit codes: 0 on success, 2 on validation failure (unknown problem or
//! config key, wrong operator class for the requested method), 3 on
//! numerical failure (non-convergence, failed facts, inconclusive
//! diagnostics).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use krylovlab::cg::{self, SolveReport};
use krylovlab::error::KrylovError;
use krylovlab::facts::{self, DiagnoseOptions};
use krylovlab::gallery::{self, GalleryProblem, ProblemParams};
use krylovlab::spectral;

const SCHEMA_VERSION: u32 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(
    name = "krylovlab",
    version,
    about = "Numerical experiments on Krylov-subspace solvability of inverse linear problems"
)]
struct Cli {
    #[command(subcommand)]
    command: Commands,
}

#[derive(Subcommand)]
enum Commands {
    /// List the problem gallery with ids and default parameters.
    List {
        #[arg(long, value_enum, default_value_t = OutputFormat::Table)]
        format: OutputFormat,
    },
    /// Solve a gallery problem with one of the conjugate-gradient drivers.
    Solve(SolveArgs),
    /// Run the structural diagnostics on a gallery problem.
    Diagnose(DiagnoseArgs),
    /// Emit the spectral profile: measure, growth series, isometry check.
    Profile(ProfileArgs),
    /// Execute every gallery fact and print one PASS/FAIL row each.
    ReproduceExamples(ReproduceArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Table,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
enum MethodArg {
    #[serde(rename = "cg-psd")]
    CgPsd,
    #[serde(rename = "selfadjoint-square")]
    SelfadjointSquare,
    #[serde(rename = "skewadjoint-square")]
    SkewadjointSquare,
}

/// Problem selection and parameters shared by the run subcommands. Values
/// from `--config` fill anything not given as a flag.
#[derive(Args, Clone, Default)]
struct ProblemArgs {
    /// Gallery problem id (see `list`).
    #[arg(long)]
    problem: Option<String>,
    /// Window size / half-window, problem dependent (defaults per problem;
    /// see `list`).
    #[arg(long)]
    m: Option<usize>,
    /// Radial grid size of the annulus discretization [default: 16].
    #[arg(long)]
    n_grid: Option<usize>,
    /// Total quadrature points of the integration rule [default: 256].
    #[arg(long)]
    n_quad: Option<usize>,
    /// Geometric decay of the escape datum [default: 0.5].
    #[arg(long)]
    decay: Option<f64>,
    /// Flat key-value JSON config; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// RNG seed; falls back to KRYLOVLAB_SEED, then 0.
    #[arg(long)]
    seed: Option<u64>,
    /// Report output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    common: ProblemArgs,
    /// Solver driver to use.
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    /// Iteration cap [default: 10 x dimension].
    #[arg(long)]
    max_iter: Option<usize>,
    /// Relative residual tolerance [default: 1e-10].
    #[arg(long)]
    rtol: Option<f64>,
}

#[derive(Args)]
struct DiagnoseArgs {
    #[command(flatten)]
    common: ProblemArgs,
    /// Comma-separated orders for the distance/decay series [default: 5,10,20].
    #[arg(long)]
    ns: Option<String>,
    /// Cosine tolerance of the intersection detector [default: 1e-8].
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args)]
struct ProfileArgs {
    #[command(flatten)]
    common: ProblemArgs,
    /// Largest power of the growth series [default: 40].
    #[arg(long)]
    k_max: Option<usize>,
    /// Largest polynomial degree of the isometry check [default: 10].
    #[arg(long)]
    degree_max: Option<usize>,
    /// Number of random polynomials [default: 50].
    #[arg(long)]
    trials: Option<usize>,
    /// Write the spectral measure as CSV (lambda,weight) to this path.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct ReproduceArgs {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

/// Every key a config file may carry.
const CONFIG_KEYS: &[&str] = &[
    "problem", "m", "n_grid", "n_quad", "decay", "method", "max_iter", "rtol", "ns", "tol",
    "out", "seed", "k_max", "degree_max", "trials", "csv",
];

#[derive(Default, Clone)]
struct FileConfig {
    map: serde_json::Map<String, serde_json::Value>,
}

impl FileConfig {
    fn load(path: Option<&Path>) -> Result<Self, String> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        let value: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| format!("config {} is not valid JSON: {e}", path.display()))?;
        let map = match value {
            serde_json::Value::Object(map) => map,
            _ => return Err(format!("config {} must be a flat JSON object", path.display())),
        };
        for key in map.keys() {
            if !CONFIG_KEYS.contains(&key.as_str()) {
                return Err(format!("unknown config key `{key}`"));
            }
        }
        Ok(Self { map })
    }

    fn string(&self, key: &str) -> Option<String> {
        self.map.get(key).and_then(|v| v.as_str()).map(String::from)
    }

    fn usize(&self, key: &str) -> Option<usize> {
        self.map.get(key).and_then(|v| v.as_u64()).map(|v| v as usize)
    }

    fn u64(&self, key: &str) -> Option<u64> {
        self.map.get(key).and_then(|v| v.as_u64())
    }

    fn f64(&self, key: &str) -> Option<f64> {
        self.map.get(key).and_then(|v| v.as_f64())
    }
}

struct ResolvedProblem {
    problem: GalleryProblem,
    id: String,
    params: ParamsEcho,
    seed: u64,
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct ParamsEcho {
    #[serde(skip_serializing_if = "Option::is_none")]
    m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    n_grid: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    n_quad: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    decay: Option<f64>,
}

fn env_seed() -> Option<u64> {
    std::env::var("KRYLOVLAB_SEED").ok()?.parse().ok()
}

fn resolve_problem(common: &ProblemArgs, cfg: &FileConfig) -> Result<ResolvedProblem, String> {
    let id = common
        .problem
        .clone()
        .or_else(|| cfg.string("problem"))
        .ok_or("no problem selected: pass --problem or set it in the config")?;
    let params = ProblemParams {
        m: common.m.or_else(|| cfg.usize("m")),
        n_grid: common.n_grid.or_else(|| cfg.usize("n_grid")),
        n_quad: common.n_quad.or_else(|| cfg.usize("n_quad")),
        decay: common.decay.or_else(|| cfg.f64("decay")),
    };
    let problem = gallery::by_id(&id, &params).map_err(|e| e.to_string())?;
    let seed = common.seed.or_else(|| cfg.u64("seed")).or_else(env_seed).unwrap_or(0);
    let out = common
        .out
        .clone()
        .or_else(|| cfg.string("out").map(PathBuf::from));
    Ok(ResolvedProblem {
        problem,
        id,
        params: ParamsEcho {
            m: params.m,
            n_grid: params.n_grid,
            n_quad: params.n_quad,
            decay: params.decay,
        },
        seed,
        out,
    })
}

#[derive(Serialize)]
struct Report<T: Serialize> {
    schema_version: u32,
    task: &'static str,
    timestamp_unix: u64,
    seed: u64,
    problem: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    params: Option<ParamsEcho>,
    result: T,
}

fn now_unix() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn emit<T: Serialize>(report: &Report<T>, out: Option<&Path>) -> Result<(), String> {
    let text = serde_json::to_string_pretty(report).map_err(|e| e.to_string())?;
    match out {
        Some(path) => {
            fs::write(path, text.as_bytes()).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
            eprintln!("report written to {}", path.display());
        }
        None => println!("{text}"),
    }
    Ok(())
}

fn exit_code_for(err: &KrylovError) -> u8 {
    match err {
        KrylovError::SpaceMismatch { .. }
        | KrylovError::InvalidParameter(_)
        | KrylovError::EmptyBasis
        | KrylovError::Unsupported(_)
        | KrylovError::WrongOperatorClass { .. }
        | KrylovError::IndefiniteOperator { .. }
        | KrylovError::OracleUnavailable(_) => EXIT_VALIDATION,
        KrylovError::NotInRange(_)
        | KrylovError::Evaluation(_)
        | KrylovError::Numerical(_)
        | KrylovError::NonFinite(_) => EXIT_NUMERICAL,
    }
}

fn fail(message: &str, code: u8) -> ExitCode {
    eprintln!("error: {message}");
    ExitCode::from(code)
}

fn run_list(format: OutputFormat) -> ExitCode {
    #[derive(Serialize)]
    struct Row {
        id: &'static str,
        defaults: &'static str,
        description: &'static str,
    }
    let rows: Vec<Row> = gallery::catalog()
        .into_iter()
        .map(|(id, defaults, description)| Row {
            id,
            defaults,
            description,
        })
        .collect();
    match format {
        OutputFormat::Json => {
            println!("{}", serde_json::to_string_pretty(&rows).unwrap());
        }
        OutputFormat::Table => {
            println!("{:<16} {:<22} DESCRIPTION", "ID", "DEFAULTS");
            for r in &rows {
                println!("{:<16} {:<22} {}", r.id, r.defaults, r.description);
            }
        }
    }
    ExitCode::SUCCESS
}

#[derive(Serialize)]
struct SolveResult {
    method: MethodArg,
    converged: bool,
    iterations: usize,
    final_residual: f64,
    residual_norms: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mismatch_vs_known_solution: Option<f64>,
    solution: krylovlab::HVector,
}

fn run_solve(args: &SolveArgs) -> ExitCode {
    let cfg = match FileConfig::load(args.common.config.as_deref()) {
        Ok(cfg) => cfg,
        Err(e) => return fail(&e, EXIT_VALIDATION),
    };
    let resolved = match resolve_problem(&args.common, &cfg) {
        Ok(r) => r,
        Err(e) => return fail(&e, EXIT_VALIDATION),
    };
    let method = match args.method.or_else(|| match cfg.string("method").as_deref() {
        Some("cg-psd") => Some(MethodArg::CgPsd),
        Some("selfadjoint-square") => Some(MethodArg::SelfadjointSquare),
        Some("skewadjoint-square") => Some(MethodArg::SkewadjointSquare),
        Some(_) | None => None,
    }) {
        Some(m) => m,
        None => return fail("no solver method selected (--method)", EXIT_VALIDATION),
    };
    let max_iter = args
        .max_iter
        .or_else(|| cfg.usize("max_iter"))
        .unwrap_or_else(|| 10 * resolved.problem.truncation.max(10));
    let rtol = args.rtol.or_else(|| cfg.f64("rtol")).unwrap_or(1e-10);

    let op = &resolved.problem.op;
    let g = &resolved.problem.g;
    let outcome: Result<SolveReport, KrylovError> = match method {
        MethodArg::CgPsd => cg::cg_solve(op, g, max_iter, rtol),
        MethodArg::SelfadjointSquare => cg::solve_selfadjoint(op, g, max_iter, rtol),
        MethodArg::SkewadjointSquare => cg::solve_skewadjoint(op, g, max_iter, rtol),
    };
    let report = match outcome {
        Ok(r) => r,
        Err(e) => return fail(&e.to_string(), exit_code_for(&e)),
    };

    let mismatch = resolved.problem.known_solution.as_ref().map(|f| {
        report
            .solution
            .sub(f)
            .map(|d| d.norm())
            .unwrap_or(f64::NAN)
    });
    let converged = report.converged;
    let result = SolveResult {
        method,
        converged,
        iterations: report.iterations,
        final_residual: report.final_residual,
        residual_norms: report.residual_norms,
        mismatch_vs_known_solution: mismatch,
        solution: report.solution,
    };
    let wrapped = Report {
        schema_version: SCHEMA_VERSION,
        task: "solve",
        timestamp_unix: now_unix(),
        seed: resolved.seed,
        problem: Some(resolved.id),
        params: Some(resolved.params),
        result,
    };
    if let Err(e) = emit(&wrapped, resolved.out.as_deref()) {
        return fail(&e, EXIT_VALIDATION);
    }
    if !converged {
        eprintln!("solver did not reach the requested tolerance");
        return ExitCode::from(EXIT_NUMERICAL);
    }
    ExitCode::SUCCESS
}

fn parse_orders(text: &str) -> Result<Vec<usize>, String> {
    let mut orders = Vec::new();
    for part in text.split(',') {
        let n: usize = part
            .trim()
            .parse()
            .map_err(|_| format!("bad order `{part}` in --ns"))?;
        if n == 0 {
            return Err("orders must be positive".into());
        }
        orders.push(n);
    }
    orders.sort_unstable();
    orders.dedup();
    Ok(orders)
}

fn run_diagnose(args: &DiagnoseArgs) -> ExitCode {
    let cfg = match FileConfig::load(args.common.config.as_deref()) {
        Ok(cfg) => cfg,
        Err(e) => return fail(&e, EXIT_VALIDATION),
    };
    let resolved = match resolve_problem(&args.common, &cfg) {
        Ok(r) => r,
        Err(e) => return fail(&e, EXIT_VALIDATION),
    };
    let mut opts = DiagnoseOptions::default();
    let ns_text = args.ns.clone().or_else(|| cfg.string("ns"));
    if let Some(text) = ns_text {
        opts.orders = match parse_orders(&text) {
            Ok(orders) => orders,
            Err(e) => return fail(&e, EXIT_VALIDATION),
        };
    }
    if let Some(tol) = args.tol.or_else(|| cfg.f64("tol")) {
        opts.intersection_tol = tol;
    }
    let report = match facts::diagnose(&resolved.problem, &opts) {
        Ok(r) => r,
        Err(e) => return fail(&e.to_string(), exit_code_for(&e)),
    };
    let inconclusive = report
        .escape
        .as_ref()
        .map(|e| !e.conclusive)
        .unwrap_or(false);
    let wrapped = Report {
        schema_version: SCHEMA_VERSION,
        task: "diagnose",
        timestamp_unix: now_unix(),
        seed: resolved.seed,
        problem: Some(resolved.id),
        params: Some(resolved.params),
        result: report,
    };
    if let Err(e) = emit(&wrapped, resolved.out.as_deref()) {
        return fail(&e, EXIT_VALIDATION);
    }
    if inconclusive {
        eprintln!("escape diagnostic inconclusive: candidate is not close enough to the span");
        return ExitCode::from(EXIT_NUMERICAL);
    }
    ExitCode::SUCCESS
}

#[derive(Serialize)]
struct ProfileResult {
    #[serde(skip_serializing_if = "Option::is_none")]
    measure: Option<spectral::SpectralMeasure>,
    growth: Option<spectral::GrowthSeries>,
    #[serde(skip_serializing_if = "Option::is_none")]
    isometry: Option<spectral::IsometryReport>,
    notes: Vec<String>,
}

fn run_profile(args: &ProfileArgs) -> ExitCode {
    let cfg = match FileConfig::load(args.common.config.as_deref()) {
        Ok(cfg) => cfg,
        Err(e) => return fail(&e, EXIT_VALIDATION),
    };
    let resolved = match resolve_problem(&args.common, &cfg) {
        Ok(r) => r,
        Err(e) => return fail(&e, EXIT_VALIDATION),
    };
    let k_max = args.k_max.or_else(|| cfg.usize("k_max")).unwrap_or(40);
    let degree_max = args
        .degree_max
        .or_else(|| cfg.usize("degree_max"))
        .unwrap_or(10);
    let trials = args.trials.or_else(|| cfg.usize("trials")).unwrap_or(50);
    let csv = args
        .csv
        .clone()
        .or_else(|| cfg.string("csv").map(PathBuf::from));

    let op = &resolved.problem.op;
    let g = &resolved.problem.g;
    let mut notes = resolved.problem.notes.clone();

    let measure = match spectral::spectral_measure(op, g) {
        Ok(m) => Some(m),
        Err(KrylovError::WrongOperatorClass { detail, .. }) => {
            notes.push(format!(
                "no spectral measure: operator is not numerically symmetric ({detail})"
            ));
            None
        }
        Err(e) => return fail(&e.to_string(), exit_code_for(&e)),
    };
    let isometry = if measure.is_some() {
        match spectral::isometry_check(op, g, degree_max, trials, resolved.seed) {
            Ok(r) => Some(r),
            Err(e) => return fail(&e.to_string(), exit_code_for(&e)),
        }
    } else {
        None
    };
    let growth = match spectral::bounded_vector_growth(op, g, k_max) {
        Ok(series) => Some(series),
        Err(e) => return fail(&e.to_string(), exit_code_for(&e)),
    };

    if let Some(path) = &csv {
        match &measure {
            Some(m) => {
                if let Err(e) = fs::write(path, m.to_csv()) {
                    return fail(&format!("cannot write {}: {e}", path.display()), EXIT_VALIDATION);
                }
                eprintln!("measure written to {}", path.display());
            }
            None => {
                return fail(
                    "cannot export a measure CSV: the operator is not symmetric",
                    EXIT_VALIDATION,
                )
            }
        }
    }

    let wrapped = Report {
        schema_version: SCHEMA_VERSION,
        task: "profile",
        timestamp_unix: now_unix(),
        seed: resolved.seed,
        problem: Some(resolved.id),
        params: Some(resolved.params),
        result: ProfileResult {
            measure,
            growth,
            isometry,
            notes,
        },
    };
    if let Err(e) = emit(&wrapped, resolved.out.as_deref()) {
        return fail(&e, EXIT_VALIDATION);
    }
    ExitCode::SUCCESS
}

fn run_reproduce(args: &ReproduceArgs) -> ExitCode {
    let cfg = match FileConfig::load(args.config.as_deref()) {
        Ok(cfg) => cfg,
        Err(e) => return fail(&e, EXIT_VALIDATION),
    };
    let seed = args.seed.or_else(|| cfg.u64("seed")).or_else(env_seed).unwrap_or(0);
    let out = args
        .out
        .clone()
        .or_else(|| cfg.string("out").map(PathBuf::from));
    let report = match facts::reproduce_examples() {
        Ok(r) => r,
        Err(e) => return fail(&e.to_string(), exit_code_for(&e)),
    };
    for row in &report.rows {
        println!(
            "{}  {:<14} {:<26} {}",
            if row.pass { "PASS" } else { "FAIL" },
            row.problem,
            row.fact,
            row.detail
        );
    }
    println!("{} passed, {} failed", report.passed, report.failed);
    let failed = report.failed;
    let wrapped = Report {
        schema_version: SCHEMA_VERSION,
        task: "reproduce-examples",
        timestamp_unix: now_unix(),
        seed,
        problem: None,
        params: None,
        result: report,
    };
    if let Some(path) = out {
        if let Err(e) = emit(&wrapped, Some(&path)) {
            return fail(&e, EXIT_VALIDATION);
        }
    }
    if failed > 0 {
        return ExitCode::from(EXIT_NUMERICAL);
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Commands::List { format } => run_list(*format),
        Commands::Solve(args) => run_solve(args),
        Commands::Diagnose(args) => run_diagnose(args),
        Commands::Profile(args) => run_profile(args),
        Commands::ReproduceExamples(args) => run_reproduce(args),
    }
}
