//! Command-line front end.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::evaluator::{evaluate_candidate, Candidate, CandidateId, EvalReport, RunnerConfig};
use crate::heuristics::SeedHeuristic;
use crate::instances::{is_instance_file, load_benchmark, load_instance_file, Instance, InstanceSet, ProblemKind};
use crate::oracles::{solve_exact, OracleError, OracleLimits};
use crate::orchestrator::{self, BackendKind, RunConfig, RunReport};
use crate::seeds::{seed_source, SEED_LANGUAGE};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

const DEFAULT_RUN_DIR: &str = "heurevo-out";

#[derive(Parser, Debug)]
#[command(name = "heurevo", version, about = "Evolve heuristic programs and their mutation prompts")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: GlobalArgs,
}

#[derive(Args, Debug)]
struct GlobalArgs {
    /// Run configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// RNG seed, overriding the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Completion backend, overriding the configuration.
    #[arg(long, global = true, value_parser = ["mock", "live"])]
    backend: Option<String>,
    /// Output file or directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run an evolution experiment.
    Run {
        /// Continue from this checkpoint instead of starting over.
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Evaluate one heuristic on an instance set.
    Eval {
        /// Built-in seed heuristic name.
        #[arg(long, conflicts_with = "candidate", required_unless_present = "candidate")]
        heuristic: Option<String>,
        /// Candidate program file.
        #[arg(long)]
        candidate: Option<PathBuf>,
        #[arg(long, default_value = SEED_LANGUAGE)]
        language: String,
        /// Benchmark directory or single instance file.
        #[arg(long)]
        instances: PathBuf,
        /// Per-instance time limit in seconds.
        #[arg(long, default_value_t = 600.0)]
        timeout: f64,
    },
    /// Solve one small instance exactly.
    Oracle {
        instance: PathBuf,
        /// Wall-clock limit in seconds.
        #[arg(long)]
        time_limit: Option<f64>,
    },
    /// Build a benchmark directory from raw instances the exact solvers can handle.
    Bench {
        raw: PathBuf,
        /// Per-instance solve budget in seconds.
        #[arg(long, default_value_t = 600.0)]
        time_limit: f64,
    },
    /// Tabulate seed and evolved errors from run reports.
    Report {
        #[arg(required = true)]
        reports: Vec<PathBuf>,
    },
}

struct Failure {
    code: i32,
    message: String,
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

fn runtime(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_RUNTIME,
        message: message.into(),
    }
}

type CmdResult = Result<(), Failure>;

/// Parses `args` and runs the command, returning the process exit code.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                EXIT_USAGE
            } else {
                let _ = write!(out, "{text}");
                EXIT_OK
            };
        }
    };
    let result = match cli.command {
        Command::Run { resume } => cmd_run(&cli.global, resume.as_deref(), out),
        Command::Eval {
            heuristic,
            candidate,
            language,
            instances,
            timeout,
        } => cmd_eval(&cli.global, heuristic, candidate, language, &instances, timeout, out, err),
        Command::Oracle { instance, time_limit } => cmd_oracle(&cli.global, &instance, time_limit, out),
        Command::Bench { raw, time_limit } => cmd_bench(&cli.global, &raw, time_limit, out, err),
        Command::Report { reports } => cmd_report(&cli.global, &reports, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn seconds(value: f64, what: &str) -> Result<Duration, Failure> {
    if value > 0.0 {
        Duration::try_from_secs_f64(value).map_err(|_| usage(format!("{what} is out of range")))
    } else {
        Err(usage(format!("{what} must be positive")))
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Failure {
    runtime(format!("{}: {e}", path.display()))
}

fn cmd_run(g: &GlobalArgs, resume: Option<&Path>, out: &mut dyn Write) -> CmdResult {
    let config = g.config.as_ref().ok_or_else(|| usage("`run` needs --config"))?;
    let mut cfg = RunConfig::load(config).map_err(|e| usage(e.to_string()))?;
    if let Some(seed) = g.seed {
        cfg.rng_seed = seed;
    }
    if let Some(b) = &g.backend {
        cfg.backend = b.parse::<BackendKind>().map_err(usage)?;
    }
    if let Some(dir) = &g.out {
        cfg.out = Some(dir.clone());
    }
    if cfg.out.is_none() {
        cfg.out = Some(PathBuf::from(DEFAULT_RUN_DIR));
    }
    let dir = cfg.out.clone().expect("set above");
    let result = match resume {
        Some(cp) => orchestrator::resume(cfg, cp),
        None => orchestrator::run(cfg),
    };
    let report = result.map_err(|e| Failure {
        code: if e.is_config() { EXIT_USAGE } else { EXIT_RUNTIME },
        message: e.to_string(),
    })?;
    let _ = writeln!(out, "dataset {}  seeds {}", report.dataset, report.seeds.join("+"));
    let _ = writeln!(out, "base error {:.2}%  best error {:.2}% ({})", report.base_error, report.best.error, report.best.id);
    for p in &report.trace {
        let _ = writeln!(out, "  generation {:>3}  best {:.2}%", p.generation, p.best_error);
    }
    if let Some(rate) = report.executable_rate {
        let _ = writeln!(out, "executable offspring {rate:.2}%");
    }
    let _ = writeln!(out, "report written to {}", dir.join(orchestrator::REPORT_FILE).display());
    Ok(())
}

/// Loads a benchmark directory or one file; missing optima are filled in
/// by the exact solvers when the instance is small enough.
fn load_eval_set(path: &Path, err: &mut dyn Write) -> Result<InstanceSet, Failure> {
    let mut set = if path.is_dir() {
        load_benchmark(path).map_err(|e| usage(e.to_string()))?
    } else if is_instance_file(path) {
        let inst = load_instance_file(path).map_err(|e| usage(e.to_string()))?;
        InstanceSet::new(vec![inst], path.to_path_buf()).map_err(|e| usage(e.to_string()))?
    } else {
        return Err(usage(format!("{} is neither a benchmark directory nor an instance file", path.display())));
    };
    for inst in &mut set.instances {
        if inst.known_optimal().is_none() {
            let res = solve_exact(inst, &OracleLimits::default())
                .map_err(|e| usage(format!("instance `{}` has no known optimum and {e}", inst.name())))?;
            let _ = writeln!(err, "note: optimum of `{}` computed exactly", inst.name());
            match inst {
                Instance::Tsp(t) => t.known_optimal = Some(res.optimal_value),
                Instance::Bpp(b) => b.known_optimal = Some(res.optimal_value as u64),
            }
        }
    }
    Ok(set)
}

pub fn render_eval(report: &EvalReport) -> String {
    let width = report
        .records
        .iter()
        .map(|r| r.instance.len())
        .max()
        .unwrap_or(0)
        .max("instance".len());
    let mut s = String::new();
    let _ = writeln!(s, "{:<width$}  {:>12}  {:>9}", "instance", "objective", "error %");
    for r in &report.records {
        match (r.objective, r.relative_error, r.failure) {
            (Some(obj), Some(e), _) => {
                let _ = writeln!(s, "{:<width$}  {:>12.2}  {:>9.2}", r.instance, obj, e);
            }
            (_, _, Some(class)) => {
                let _ = writeln!(s, "{:<width$}  {:>12}  {:>9}", r.instance, "-", class.to_string());
            }
            _ => {}
        }
    }
    match report.mean_relative_error {
        Some(m) => {
            let _ = writeln!(s, "{:<width$}  {:>12}  {:>9.2}", "mean", "", m);
        }
        None => {
            let class = report.failure_class.map(|c| c.to_string()).unwrap_or_default();
            let _ = writeln!(s, "failed: {class}\n{}", report.diagnostic);
        }
    }
    s
}

#[allow(clippy::too_many_arguments)]
fn cmd_eval(
    g: &GlobalArgs,
    heuristic: Option<String>,
    candidate: Option<PathBuf>,
    language: String,
    instances: &Path,
    timeout: f64,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> CmdResult {
    let (source, language) = match (heuristic, candidate) {
        (Some(name), _) => {
            let h = SeedHeuristic::from_name(&name).ok_or_else(|| usage(format!("unknown heuristic `{name}`")))?;
            (seed_source(h).to_string(), SEED_LANGUAGE.to_string())
        }
        (None, Some(path)) => (
            std::fs::read_to_string(&path).map_err(|e| usage(format!("{}: {e}", path.display())))?,
            language,
        ),
        (None, None) => return Err(usage("give --heuristic or --candidate")),
    };
    let set = load_eval_set(instances, err)?;
    let cfg = RunnerConfig {
        timeout: seconds(timeout, "timeout")?,
        ..RunnerConfig::default()
    };
    let cand = Candidate::seed(CandidateId(0), source, language, 0);
    let report = evaluate_candidate(&cand, &set, &cfg).map_err(|e| usage(e.to_string()))?;
    let _ = write!(out, "{}", render_eval(&report));
    if let Some(path) = &g.out {
        let text = serde_json::to_string_pretty(&report.without_timing()).expect("reports serialize");
        std::fs::write(path, text).map_err(|e| io_err(path, e))?;
    }
    Ok(())
}

fn format_value(kind: ProblemKind, v: f64) -> String {
    match kind {
        ProblemKind::Bpp => format!("{}", v as u64),
        ProblemKind::Tsp => format!("{v:?}"),
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct WitnessFile {
    instance: String,
    optimal_value: f64,
    witness: crate::oracles::Witness,
}

fn cmd_oracle(g: &GlobalArgs, path: &Path, time_limit: Option<f64>, out: &mut dyn Write) -> CmdResult {
    let inst = load_instance_file(path).map_err(|e| usage(e.to_string()))?;
    let limits = OracleLimits {
        deadline: match time_limit {
            Some(t) => Some(Instant::now() + seconds(t, "time limit")?),
            None => None,
        },
        ..OracleLimits::default()
    };
    let res = solve_exact(&inst, &limits).map_err(|e| runtime(format!("refusing `{}`: {e}", inst.name())))?;
    let _ = writeln!(out, "optimal value: {}", format_value(inst.kind(), res.optimal_value));
    let witness_path = g.out.clone().unwrap_or_else(|| {
        let mut p = path.as_os_str().to_owned();
        p.push(".witness.json");
        PathBuf::from(p)
    });
    let doc = WitnessFile {
        instance: inst.name().to_string(),
        optimal_value: res.optimal_value,
        witness: res.witness,
    };
    std::fs::write(&witness_path, serde_json::to_string_pretty(&doc).expect("witness serializes"))
        .map_err(|e| io_err(&witness_path, e))?;
    let _ = writeln!(out, "witness written to {}", witness_path.display());
    Ok(())
}

fn cmd_bench(g: &GlobalArgs, raw: &Path, time_limit: f64, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let dest = g.out.as_ref().ok_or_else(|| usage("`bench` needs --out"))?;
    let budget = seconds(time_limit, "time limit")?;
    let entries = std::fs::read_dir(raw).map_err(|e| usage(format!("{}: {e}", raw.display())))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| is_instance_file(p))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(usage(format!("{} contains no .tsp or .bpp instances", raw.display())));
    }
    std::fs::create_dir_all(dest).map_err(|e| io_err(dest, e))?;
    let mut optima = String::new();
    let mut excluded = String::new();
    let mut kept = 0;
    for path in &files {
        let file_name = path.file_name().expect("files have names");
        let verdict = load_instance_file(path).map_err(|e| e.to_string()).and_then(|inst| {
            let limits = OracleLimits {
                deadline: Some(Instant::now() + budget),
                ..OracleLimits::default()
            };
            solve_exact(&inst, &limits)
                .map(|r| (inst, r.optimal_value))
                .map_err(|e: OracleError| e.to_string())
        });
        match verdict {
            Ok((inst, value)) => {
                std::fs::copy(path, dest.join(file_name)).map_err(|e| io_err(path, e))?;
                let _ = writeln!(optima, "{} {value}", inst.name());
                kept += 1;
            }
            Err(reason) => {
                let _ = writeln!(err, "excluded {}: {reason}", file_name.to_string_lossy());
                let _ = writeln!(excluded, "{} {reason}", file_name.to_string_lossy());
            }
        }
    }
    let sidecar = dest.join(crate::instances::SIDECAR_FILE);
    std::fs::write(&sidecar, optima).map_err(|e| io_err(&sidecar, e))?;
    let log = dest.join("excluded.txt");
    std::fs::write(&log, &excluded).map_err(|e| io_err(&log, e))?;
    let _ = writeln!(out, "kept {kept} of {} instances in {}", files.len(), dest.display());
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub dataset: String,
    pub seed: String,
    pub base_error: f64,
    pub evolved_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportTable {
    pub rows: Vec<ReportRow>,
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

impl ReportTable {
    pub fn from_reports(reports: &[RunReport]) -> Self {
        let rows = reports
            .iter()
            .map(|r| ReportRow {
                dataset: r.dataset.clone(),
                seed: r.seeds.join("+"),
                // rounded so the text and the export agree digit for digit
                base_error: round2(r.base_error),
                evolved_error: round2(r.best.error),
            })
            .collect();
        Self { rows }
    }

    pub fn render(&self) -> String {
        let dw = self.rows.iter().map(|r| r.dataset.len()).max().unwrap_or(0).max(7);
        let sw = self.rows.iter().map(|r| r.seed.len()).max().unwrap_or(0).max(4);
        let mut s = String::new();
        let _ = writeln!(s, "{:<dw$}  {:<sw$}  {:>9}  {:>9}", "dataset", "seed", "BASE %", "EVOLVED %");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{:<dw$}  {:<sw$}  {:>9.2}  {:>9.2}",
                r.dataset, r.seed, r.base_error, r.evolved_error
            );
        }
        s
    }
}

fn cmd_report(g: &GlobalArgs, paths: &[PathBuf], out: &mut dyn Write) -> CmdResult {
    let mut reports = Vec::new();
    for p in paths {
        let text = std::fs::read_to_string(p).map_err(|e| usage(format!("{}: {e}", p.display())))?;
        let r = RunReport::from_json(&text).map_err(|e| usage(format!("{}: not a run report: {e}", p.display())))?;
        reports.push(r);
    }
    let table = ReportTable::from_reports(&reports);
    let text = table.render();
    let _ = write!(out, "{text}");
    let dir = g.out.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
    let txt = dir.join("report_table.txt");
    std::fs::write(&txt, &text).map_err(|e| io_err(&txt, e))?;
    let json = dir.join("report_table.json");
    std::fs::write(&json, serde_json::to_string_pretty(&table).expect("table serializes"))
        .map_err(|e| io_err(&json, e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = main_with(std::iter::once("heurevo").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn help_and_usage_codes() {
        assert_eq!(run(&["--help"]).0, EXIT_OK);
        assert_eq!(run(&["--version"]).0, EXIT_OK);
        assert_eq!(run(&[]).0, EXIT_USAGE);
        assert_eq!(run(&["frobnicate"]).0, EXIT_USAGE);
        assert_eq!(run(&["run", "--backend", "cloud"]).0, EXIT_USAGE);
        assert_eq!(run(&["run"]).0, EXIT_USAGE);
    }

    #[test]
    fn table_text_and_export_agree() {
        let t = ReportTable {
            rows: vec![ReportRow {
                dataset: "d".into(),
                seed: "nearest-neighbor".into(),
                base_error: round2(24.666),
                evolved_error: round2(4.414),
            }],
        };
        let text = t.render();
        assert!(text.contains("24.67") && text.contains("4.41"));
        let json = serde_json::to_string(&t).unwrap();
        assert!(json.contains("24.67") && json.contains("4.41"));
    }
}
