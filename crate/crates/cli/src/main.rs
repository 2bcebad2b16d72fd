//! `qinfo`: coherent entropy, conservation ledgers and time correlations from the
//! command line.
//!
//! Exit codes: 0 success, 1 validation failure, 2 parse error or invalid spectrum,
//! 3 state invariant violation.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use qinfo::multipartite::ledger_for_parts;
use qinfo::partition::parse_partition_spec;
use qinfo::state::DensityJson;
use qinfo::tables::info_table;
use qinfo::timechannel::{
    entropy_decomposition, intermediates_unitarily_equivalent, mutual_information_12, optimal_protocol,
    protocol_distribution, sample_protocol_sharded,
};
use qinfo::validate::{Suite, Validator};
use qinfo::{
    coherent_entropy, make_named_state, mutual_information, sc_local, shannon_entropy, von_neumann, DensityOperator,
    Error, OptimizerConfig, PartitionLabel, Spectrum, StateName,
};

#[derive(Parser)]
#[command(name = "qinfo", version, about = "Coherent entropy and quantum information bookkeeping")]
struct Cli {
    /// Worker threads for optimizer restarts and Monte Carlo shards.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Entropies, mutual information and conservation ledgers of a state.
    Compute(ComputeArgs),
    /// Per-marginal table of S, S_c, G, L, I and E_f for a named state.
    Table(TableArgs),
    /// Optimal prepare/measure/decohere/measure protocol for a spectrum.
    Tcorr(TcorrArgs),
    /// Locally achievable coherence over product unitaries.
    OptimizeLocal(OptimizeLocalArgs),
    /// Run the invariant suites.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct ComputeArgs {
    /// bell | ghz3 | w3 | mixed:<d> | bloch:<x,y,z> | file:<path.json>
    #[arg(long)]
    state: String,
    /// Comma-separated subset of S, Sc, I, ledger.
    #[arg(long, default_value = "S,Sc")]
    quantities: String,
    /// Pipe-separated subsystem groups, e.g. `0|1|2` or `01|2`. Defaults to one group per subsystem.
    #[arg(long)]
    parts: Option<String>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct TableArgs {
    /// bell | ghz3 | w3
    state: String,
    #[arg(long, value_enum, default_value_t = Format::Markdown)]
    format: Format,
    /// Skip the optimizer-backed rows (G, L).
    #[arg(long)]
    no_optimize: bool,
    #[command(flatten)]
    opt: OptimizerArgs,
}

#[derive(Args)]
struct TcorrArgs {
    /// Eigenvalues of the intermediate state, comma-separated.
    #[arg(long)]
    spectrum: String,
    #[arg(long, value_enum, default_value_t = Mode::Analytic)]
    mode: Mode,
    /// Number of Monte Carlo runs.
    #[arg(long = "n", default_value_t = 100_000)]
    n_samples: u64,
    #[arg(long, env = "QINFO_SEED", default_value_t = 0)]
    seed: u64,
    /// `json` prints the report; `csv` prints joint outcome counts (mc) or probabilities.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the channel's Kraus operators as JSON to this path.
    #[arg(long)]
    channel_out: Option<PathBuf>,
}

#[derive(Args)]
struct OptimizeLocalArgs {
    #[arg(long)]
    state: String,
    /// Pipe-separated subsystem groups. Defaults to one group per subsystem.
    #[arg(long)]
    parts: Option<String>,
    /// Include every restart's trace in the output.
    #[arg(long)]
    trace: bool,
    #[command(flatten)]
    opt: OptimizerArgs,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(default_value = "fast")]
    suite: String,
    #[arg(long, env = "QINFO_SEED")]
    seed: Option<u64>,
}

#[derive(Args)]
struct OptimizerArgs {
    /// JSON object with any of restarts, max_iters, step_tol, obj_tol, seed; inline or a file path.
    #[arg(long)]
    config: Option<String>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    step_tol: Option<f64>,
    #[arg(long)]
    obj_tol: Option<f64>,
    #[arg(long, env = "QINFO_SEED")]
    seed: Option<u64>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Markdown,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Analytic,
    Mc,
}

#[derive(Debug)]
enum Failure {
    Validation(String),
    Parse(String),
    State(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Self::Validation(_) => 1,
            Self::Parse(_) => 2,
            Self::State(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Self::Validation(m) | Self::Parse(m) | Self::State(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidState(_) => Self::State(e.to_string()),
            _ => Self::Parse(e.to_string()),
        }
    }
}

type CmdResult = Result<String, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.max(1))
        .build_global()
    {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let out = match cli.command {
        Command::Compute(a) => compute(a),
        Command::Table(a) => table(a),
        Command::Tcorr(a) => tcorr(a, cli.threads),
        Command::OptimizeLocal(a) => optimize_local(a),
        Command::Validate(a) => validate(a),
    };
    match out {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn load_state(spec: &str) -> Result<DensityOperator, Failure> {
    if let Some(path) = spec.strip_prefix("file:") {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::Parse(format!("{path}: {e}")))?;
        let json: DensityJson =
            serde_json::from_str(&text).map_err(|e| Failure::Parse(format!("{path}: {e}")))?;
        return DensityOperator::from_json(&json).map_err(|e| Failure::State(e.to_string()));
    }
    let name: StateName = spec.parse().map_err(|e: Error| Failure::Parse(e.to_string()))?;
    make_named_state(&name).map_err(|e| Failure::State(e.to_string()))
}

fn load_parts(spec: Option<&str>, n: usize) -> Result<Vec<PartitionLabel>, Failure> {
    match spec {
        Some(s) => parse_partition_spec(s, n).map_err(|e| Failure::Parse(e.to_string())),
        None => (0..n).map(|i| PartitionLabel::single(i, n)).collect::<Result<_, _>>().map_err(Failure::from),
    }
}

fn optimizer_config(a: &OptimizerArgs) -> Result<OptimizerConfig, Failure> {
    let mut cfg = match &a.config {
        Some(src) => {
            let text = if src.trim_start().starts_with('{') {
                src.clone()
            } else {
                std::fs::read_to_string(src).map_err(|e| Failure::Parse(format!("{src}: {e}")))?
            };
            serde_json::from_str(&text).map_err(|e| Failure::Parse(format!("optimizer config: {e}")))?
        }
        None => OptimizerConfig::default(),
    };
    if let Some(v) = a.restarts {
        cfg.restarts = v;
    }
    if let Some(v) = a.max_iters {
        cfg.max_iters = v;
    }
    if let Some(v) = a.step_tol {
        cfg.step_tol = v;
    }
    if let Some(v) = a.obj_tol {
        cfg.obj_tol = v;
    }
    if let Some(v) = a.seed {
        cfg.seed = v;
    }
    cfg.validate().map_err(|e| Failure::Parse(e.to_string()))?;
    Ok(cfg)
}

fn group_name(p: &PartitionLabel) -> String {
    p.to_string()
}

fn to_json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

fn compute(a: ComputeArgs) -> CmdResult {
    let rho = load_state(&a.state)?;
    let parts = load_parts(a.parts.as_deref(), rho.space().n_parts())?;
    let mut report = Map::new();
    let mut rows: Vec<(String, f64)> = Vec::new();
    for q in a.quantities.split(',').map(str::trim).filter(|q| !q.is_empty()) {
        match q {
            "S" => {
                let v = von_neumann(&rho)?.value();
                report.insert("S".into(), json!(v));
                rows.push(("S".into(), v));
            }
            "Sc" => {
                let v = coherent_entropy(&rho)?.value();
                report.insert("Sc".into(), json!(v));
                rows.push(("Sc".into(), v));
            }
            "I" => {
                if parts.len() < 2 {
                    return Err(Failure::Parse("I needs at least two parts".into()));
                }
                if parts.len() == 2 {
                    let v = mutual_information(&rho, &parts[0], &parts[1])?.value();
                    report.insert("I".into(), json!(v));
                    rows.push(("I".into(), v));
                } else {
                    let mut pairs = Map::new();
                    for i in 0..parts.len() {
                        for j in i + 1..parts.len() {
                            let key = format!("{}:{}", group_name(&parts[i]), group_name(&parts[j]));
                            let v = mutual_information(&rho, &parts[i], &parts[j])?.value();
                            rows.push((format!("I[{key}]"), v));
                            pairs.insert(key, json!(v));
                        }
                    }
                    report.insert("I".into(), Value::Object(pairs));
                }
            }
            "ledger" => {
                let ledger = ledger_for_parts(&rho, &parts)?;
                rows.push(("ledger.residual".into(), ledger.residual));
                let mut v = serde_json::to_value(&ledger).expect("ledger serializes");
                v["holds"] = json!(ledger.holds());
                report.insert("ledger".into(), v);
            }
            other => return Err(Failure::Parse(format!("unknown quantity `{other}` (expected S, Sc, I, ledger)"))),
        }
    }
    Ok(match a.format {
        Format::Json => to_json_text(&Value::Object(report)),
        Format::Csv => {
            let mut s = String::from("quantity,value\n");
            for (k, v) in rows {
                let _ = writeln!(s, "{k},{v}");
            }
            s
        }
        Format::Markdown => {
            let mut s = String::from("| quantity | value |\n|---|---|\n");
            for (k, v) in rows {
                let _ = writeln!(s, "| {k} | {v:.6} |");
            }
            s
        }
    })
}

fn table(a: TableArgs) -> CmdResult {
    let name: StateName = a.state.parse().map_err(|e: Error| Failure::Parse(e.to_string()))?;
    if !matches!(name, StateName::Bell | StateName::Ghz(3) | StateName::W3) {
        return Err(Failure::Parse(format!("table supports bell, ghz3 and w3, not `{}`", a.state)));
    }
    let rho = make_named_state(&name)?;
    let cfg = optimizer_config(&a.opt)?;
    let t = info_table(&name.to_string(), &rho, if a.no_optimize { None } else { Some(&cfg) })?;
    Ok(match a.format {
        Format::Markdown => t.to_markdown(),
        Format::Csv => t.to_csv(),
        Format::Json => to_json_text(&serde_json::to_value(&t).expect("table serializes")),
    })
}

fn tcorr(a: TcorrArgs, threads: usize) -> CmdResult {
    let lambda: Vec<f64> = a
        .spectrum
        .split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|_| Failure::Parse(format!("bad number `{x}` in spectrum"))))
        .collect::<Result<_, _>>()?;
    if lambda.len() < 2 {
        return Err(Failure::Parse("spectrum needs at least two entries".into()));
    }
    let spec = Spectrum::from_probabilities(&lambda).map_err(|e| Failure::Parse(e.to_string()))?;
    let p = optimal_protocol(&spec).map_err(|e| Failure::Parse(e.to_string()))?;
    if let Some(path) = &a.channel_out {
        let text = serde_json::to_string_pretty(&p.channel.to_json()).expect("channel serializes");
        std::fs::write(path, text).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))?;
    }
    let dist = protocol_distribution(&p.rho_in, &p.meas1, &p.channel, &p.meas2)?;
    let d = lambda.len();
    let s = shannon_entropy(&lambda);
    let sc = (d as f64).log2() - s;
    let analytic = mutual_information_12(&dist).value();
    let (c1, c2) = entropy_decomposition(&dist);
    let mut report = json!({
        "d": d,
        "spectrum": lambda,
        "S": s,
        "Sc": sc,
        "I_analytic": analytic,
        "deviation": analytic - sc,
        "C1": c1,
        "C2": c2,
        "intermediates_unitarily_equivalent": intermediates_unitarily_equivalent(&p.meas1, &p.channel, 1e-9)?,
        "channel_completeness_defect": p.channel.completeness_defect(),
    });
    let mut counts_csv = None;
    if a.mode == Mode::Mc {
        let emp = sample_protocol_sharded(&p.rho_in, &p.meas1, &p.channel, &p.meas2, a.n_samples, a.seed, threads)?;
        let (est, se) = emp.mutual_information_estimate()?;
        let z = if se > 0.0 { (est.value() - analytic) / se } else { 0.0 };
        report["mc"] = json!({
            "n": a.n_samples,
            "seed": a.seed,
            "shards": threads.max(1),
            "I_estimate": est.value(),
            "standard_error": se,
            "z": z,
            "within_3se": (est.value() - analytic).abs() <= 3.0 * se,
        });
        counts_csv = Some(emp.to_csv());
    }
    Ok(match a.format {
        Format::Csv => counts_csv.unwrap_or_else(|| {
            let mut s = String::from("s1,s2,p\n");
            for (s1, row) in dist.joint().iter().enumerate() {
                for (s2, v) in row.iter().enumerate() {
                    let _ = writeln!(s, "{s1},{s2},{v}");
                }
            }
            s
        }),
        _ => to_json_text(&report),
    })
}

fn optimize_local(a: OptimizeLocalArgs) -> CmdResult {
    let rho = load_state(&a.state)?;
    let parts = load_parts(a.parts.as_deref(), rho.space().n_parts())?;
    let cfg = optimizer_config(&a.opt)?;
    let r = sc_local(&rho, &parts, &cfg)?;
    let mut report = json!({
        "parts": parts.iter().map(group_name).collect::<Vec<_>>(),
        "config": cfg,
        "Sc": r.sc.value(),
        "Sc_loc": r.sc_loc.value(),
        "max_diag": r.max_diag.value(),
        "min_diag": r.min_diag.value(),
        "G": r.gap.value(),
        "I": r.mutual_information.map(|b| b.value()),
        "L": r.local.map(|b| b.value()),
        "converged": r.converged(),
    });
    if a.trace || !r.converged() {
        report["max_search"] = serde_json::to_value(&r.max_search).expect("outcome serializes");
        report["min_search"] = serde_json::to_value(&r.min_search).expect("outcome serializes");
    }
    Ok(to_json_text(&report))
}

fn validate(a: ValidateArgs) -> CmdResult {
    let suite: Suite = a.suite.parse().map_err(Failure::Parse)?;
    let mut v = Validator::default();
    if let Some(seed) = a.seed {
        v.seed = seed;
    }
    let report = v.run(suite)?;
    let text = to_json_text(&serde_json::to_value(&report).expect("report serializes"));
    if report.passed {
        Ok(text)
    } else {
        print!("{text}");
        let names: Vec<&str> = report.failures().iter().map(|c| c.name).collect();
        Err(Failure::Validation(format!("failed checks: {}", names.join(", "))))
    }
}
