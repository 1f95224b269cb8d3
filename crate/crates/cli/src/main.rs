//! `siov`: validate, run and simulate scenarios, and explain audit logs.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 validation failure, 3 I/O
//! failure, 4 audit-log integrity failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use siov_core::audit::{verify_chain, ChainStatus};
use siov_core::{AuditLog, RuleBase};
use siov_scenario::{
    emit_svg, emit_uf_table, explain, parse_document, parse_scenario, replay, run_scenario,
    RunError, RunOptions, Scenario,
};

const EXIT_RUNTIME: u8 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_INTEGRITY: u8 = 4;

#[derive(Parser)]
#[command(name = "siov", version, about = "Ethical decision runs and vehicular network simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Svg,
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// Check a scenario file against the schema and its invariants.
    Validate {
        /// Scenario file, or a directory holding `scenario.json`.
        scenario: PathBuf,
        /// Ignore unknown fields instead of rejecting them.
        #[arg(long)]
        lenient: bool,
    },
    /// Judge a scenario; write the UF table and the audit log.
    Run {
        scenario: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
        /// Overrides the scenario seed and SIOV_SEED.
        #[arg(long)]
        seed: Option<u64>,
        /// Rule base file replacing the scenario's rulebase_ref.
        #[arg(long)]
        rulebase: Option<PathBuf>,
        /// Decision engine by registered name.
        #[arg(long)]
        engine: Option<String>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long)]
        lenient: bool,
    },
    /// Run the scenario's network; write the event trace and a summary.
    Netsim {
        scenario: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        lenient: bool,
    },
    /// Verify an audit log and explain its decisions.
    Report { audit: PathBuf },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate { scenario, lenient } => validate(&scenario, lenient),
        Command::Run {
            scenario,
            out,
            seed,
            rulebase,
            engine,
            format,
            lenient,
        } => run(&scenario, &out, seed, rulebase.as_deref(), engine, format, lenient),
        Command::Netsim {
            scenario,
            out,
            seed,
            lenient,
        } => netsim(&scenario, &out, seed, lenient),
        Command::Report { audit } => report(&audit),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| Failure::new(EXIT_IO, format!("error: cannot read {}: {e}", path.display())))
}

fn scenario_file(path: &Path) -> PathBuf {
    if path.is_dir() {
        path.join("scenario.json")
    } else {
        path.to_path_buf()
    }
}

fn load(path: &Path, lenient: bool) -> Result<Scenario, Failure> {
    let file = scenario_file(path);
    let bytes = read(&file)?;
    parse_scenario(&bytes, !lenient)
        .map_err(|e| Failure::new(EXIT_VALIDATION, format!("error: {}: {e}", file.display())))
}

fn validate(path: &Path, lenient: bool) -> Outcome {
    let s = load(path, lenient)?;
    println!(
        "ok: {} ({} entities, {} candidates{})",
        s.name,
        s.entities.len(),
        s.candidates.len(),
        if s.network.is_some() { ", network" } else { "" }
    );
    Ok(())
}

fn run_error(e: RunError) -> Failure {
    let code = match e {
        RunError::Scenario(_) | RunError::Seed(_) | RunError::Registry(_) => EXIT_VALIDATION,
        _ => EXIT_RUNTIME,
    };
    Failure::new(code, format!("error: {e}"))
}

fn options(seed: Option<u64>) -> RunOptions {
    RunOptions {
        seed,
        ..RunOptions::from_env()
    }
}

fn run(
    path: &Path,
    out: &Path,
    seed: Option<u64>,
    rulebase: Option<&Path>,
    engine: Option<String>,
    format: Format,
    lenient: bool,
) -> Outcome {
    let scenario = load(path, lenient)?;
    let mut opts = options(seed);
    opts.engine = engine;
    if let Some(rb) = rulebase {
        let bytes = read(rb)?;
        let parsed: RuleBase = parse_document(&bytes, !lenient).map_err(|e| {
            Failure::new(EXIT_VALIDATION, format!("error: {}: {e}", rb.display()))
        })?;
        opts.rulebase = Some(parsed);
    }
    let output = run_scenario(&scenario, &opts).map_err(run_error)?;

    let mut files = vec![("audit.log", output.audit.to_bytes())];
    if format != Format::Svg {
        files.push(("report.csv", emit_uf_table(&output.report)));
    }
    if format != Format::Csv {
        files.push(("report.svg", emit_svg(&output.report).into_bytes()));
    }
    write_all(out, &files)?;
    println!(
        "chosen={} tuf_un={}",
        output.report.chosen_id(),
        output.report.chosen_tuf()
    );
    println!(
        "seed={} rulebase_version={} audit_records={}",
        output.report.seed,
        output.report.rulebase_version,
        output.audit.len()
    );
    Ok(())
}

fn netsim(path: &Path, out: &Path, seed: Option<u64>, lenient: bool) -> Outcome {
    let scenario = load(path, lenient)?;
    if scenario.network.is_none() {
        return Err(Failure::new(
            EXIT_VALIDATION,
            format!("error: {}: scenario has no network section", scenario_file(path).display()),
        ));
    }
    let output = run_scenario(&scenario, &options(seed)).map_err(run_error)?;
    let net = output.network.expect("network present");
    let summary = serde_json::json!({
        "seed": output.report.seed,
        "summary": net.summary,
        "baseline": net.baseline,
    });
    let mut summary_bytes = serde_json::to_vec_pretty(&summary).expect("summaries serialize");
    summary_bytes.push(b'\n');
    write_all(
        out,
        &[
            ("trace.jsonl", net.trace_bytes()),
            ("summary.json", summary_bytes),
            ("audit.log", output.audit.to_bytes()),
        ],
    )?;
    let s = &net.summary;
    println!(
        "ticks={} transmissions={} deliveries={} processed={}",
        s.ticks, s.transmissions, s.deliveries, s.processed
    );
    for b in &s.broadcasts {
        println!(
            "broadcast {} nodes_processed={}/{} max_per_node={} transmissions={} bound={}",
            b.key, b.nodes_processed, b.node_count, b.max_processed_per_node, b.transmissions, b.storm_bound
        );
    }
    for t in &s.trips {
        let base = net
            .baseline
            .as_ref()
            .and_then(|b| b.trips.iter().find(|x| x.vehicle == t.vehicle))
            .and_then(|x| x.traversal_ticks);
        println!(
            "trip {} traversal_ticks={} baseline_ticks={} preemption={:?}",
            t.vehicle,
            t.traversal_ticks.map_or("-".into(), |v| v.to_string()),
            base.map_or("-".into(), |v| v.to_string()),
            t.preemption
        );
    }
    Ok(())
}

fn report(path: &Path) -> Outcome {
    let bytes = read(path)?;
    if let ChainStatus::FirstBreakAt(seq) = verify_chain(&bytes) {
        return Err(Failure::new(
            EXIT_INTEGRITY,
            format!("error: {}: audit chain broken\nbreak_at={seq}", path.display()),
        ));
    }
    let log = AuditLog::from_bytes(&bytes)
        .map_err(|e| Failure::new(EXIT_INTEGRITY, format!("error: {}: {e}", path.display())))?;
    let text = explain(&log).map_err(|e| Failure::new(EXIT_RUNTIME, format!("error: {e}")))?;
    print!("{text}");
    let outcomes = replay(&log).map_err(|e| Failure::new(EXIT_RUNTIME, format!("error: {e}")))?;
    for r in &outcomes {
        println!(
            "replay decision {}: recorded={} replayed={} {}",
            r.sequence,
            r.recorded,
            r.replayed,
            if r.reproduced() { "ok" } else { "MISMATCH" }
        );
    }
    if outcomes.iter().any(|r| !r.reproduced()) {
        return Err(Failure::new(EXIT_INTEGRITY, "error: replay did not reproduce the recorded decisions"));
    }
    Ok(())
}

/// Writes every file into a staging directory inside `out`, then renames
/// them into place. On failure the staging directory is removed.
fn write_all(out: &Path, files: &[(&str, Vec<u8>)]) -> Outcome {
    let io = |what: &str, e: std::io::Error| Failure::new(EXIT_IO, format!("error: {what}: {e}"));
    let created = !out.exists();
    fs::create_dir_all(out).map_err(|e| io(&out.display().to_string(), e))?;
    let result = (|| {
        let staging = tempfile::Builder::new()
            .prefix(".siov-staging-")
            .tempdir_in(out)
            .map_err(|e| io("staging directory", e))?;
        for (name, bytes) in files {
            fs::write(staging.path().join(name), bytes).map_err(|e| io(name, e))?;
        }
        for (name, _) in files {
            fs::rename(staging.path().join(name), out.join(name)).map_err(|e| io(name, e))?;
        }
        Ok(())
    })();
    if result.is_err() && created {
        let _ = fs::remove_dir_all(out);
    }
    result
}
