//! `qaoa-bench` command line: generate a benchmark, run the sweep, analyze
//! the journal, and re-check stored records.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use clap::{Parser, Subcommand};
use log::info;
use serde::{Deserialize, Serialize};

use crate::analysis::{self, Format};
use crate::bench::{self, journal, BenchmarkSpec, Journal, RunSettings};
use crate::error::{Error, Result};

/// Environment variable that replaces `out_dir` from the config.
pub const OUT_DIR_ENV: &str = "QAOA_OUT_DIR";

/// Tolerance for re-simulated values in `check`.
pub const CHECK_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Parser)]
#[command(name = "qaoa-bench", version, about = "QAOA Max-Cut benchmark pipeline")]
pub struct Cli {
    /// TOML or JSON config file; defaults apply when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate the benchmark graphs and write the manifest.
    Generate,
    /// Optimize every (graph, depth) pair missing from the journal.
    Run {
        /// Worker threads; overrides the config.
        #[arg(long)]
        workers: Option<usize>,
        /// Discard the existing journal first.
        #[arg(long)]
        fresh: bool,
        /// Re-simulate every journal record afterwards.
        #[arg(long)]
        check: bool,
    },
    /// Summarize the journal and write plots.
    Analyze {
        #[arg(long, value_enum, default_value_t = Format::Both)]
        format: Format,
    },
    /// Re-simulate every journal record and report mismatches.
    Check,
}

/// Pipeline configuration. Unset paths default to files inside `out_dir`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub out_dir: PathBuf,
    pub manifest: Option<PathBuf>,
    pub journal: Option<PathBuf>,
    pub n: usize,
    pub e_p_values: Vec<f64>,
    pub per_class: usize,
    pub depths: Vec<usize>,
    /// One budget per depth, or a single budget for all depths.
    pub budgets: Vec<u64>,
    pub ftol: f64,
    pub xtol: f64,
    pub master_seed: u64,
    pub workers: usize,
    pub padded_starts: bool,
    pub max_near_optimal: usize,
    /// Concentration keeps points with `f ≥ (1 - threshold)·best_f`.
    pub threshold: f64,
    /// QAOA step plotted in concentration clouds, clamped to each depth.
    pub step: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let b = BenchmarkSpec::default();
        let r = RunSettings::default();
        RunConfig {
            out_dir: PathBuf::from("out"),
            manifest: None,
            journal: None,
            n: b.n,
            e_p_values: b.e_p_values,
            per_class: b.per_class,
            depths: r.depths,
            budgets: r.budgets,
            ftol: r.ftol,
            xtol: r.xtol,
            master_seed: b.master_seed,
            workers: std::thread::available_parallelism().map_or(1, usize::from),
            padded_starts: r.padded_starts,
            max_near_optimal: r.max_near_optimal,
            threshold: 0.01,
            step: 2,
        }
    }
}

impl RunConfig {
    /// Reads a config; `.json` files are JSON, everything else TOML.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: RunConfig = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        } else {
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        };
        Ok(cfg)
    }

    /// Applies the `out_dir` environment override.
    pub fn with_env(mut self) -> Self {
        if let Some(dir) = std::env::var_os(OUT_DIR_ENV).filter(|d| !d.is_empty()) {
            self.out_dir = PathBuf::from(dir);
        }
        self
    }

    pub fn manifest_path(&self) -> PathBuf {
        self.manifest
            .clone()
            .unwrap_or_else(|| self.out_dir.join("manifest.json"))
    }

    pub fn journal_path(&self) -> PathBuf {
        self.journal
            .clone()
            .unwrap_or_else(|| self.out_dir.join("journal.jsonl"))
    }

    pub fn benchmark(&self) -> BenchmarkSpec {
        BenchmarkSpec {
            n: self.n,
            e_p_values: self.e_p_values.clone(),
            per_class: self.per_class,
            master_seed: self.master_seed,
        }
    }

    pub fn settings(&self) -> RunSettings {
        let budgets = match self.budgets.as_slice() {
            [b] => vec![*b; self.depths.len()],
            bs => bs.to_vec(),
        };
        RunSettings {
            depths: self.depths.clone(),
            budgets,
            ftol: self.ftol,
            xtol: self.xtol,
            master_seed: self.master_seed,
            workers: self.workers,
            padded_starts: self.padded_starts,
            max_near_optimal: self.max_near_optimal,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Config(format!("n: {} is below 2", self.n)));
        }
        if self.e_p_values.is_empty() {
            return Err(Error::Config("e_p_values: empty".into()));
        }
        if let Some(bad) = self.e_p_values.iter().find(|&&p| !(p > 0.0 && p <= 1.0)) {
            return Err(Error::Config(format!("e_p_values: {bad} outside (0, 1]")));
        }
        if self.per_class == 0 {
            return Err(Error::Config("per_class: must be at least 1".into()));
        }
        if !(self.threshold > 0.0 && self.threshold < 0.5) {
            return Err(Error::Config(format!("threshold: {} outside (0, 0.5)", self.threshold)));
        }
        if self.step == 0 {
            return Err(Error::Config("step: must be at least 1".into()));
        }
        self.settings().validate()
    }
}

/// Process exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) => 3,
        Error::Io { .. } | Error::Json { .. } | Error::CorruptJournal { .. } => 4,
        Error::Capacity { .. } => 5,
        _ => 1,
    }
}

/// Parses `args`, runs the command, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Runs a parsed command. `Ok` carries the exit code for outcomes that are
/// not errors but still fail, such as check mismatches.
pub fn execute(cli: &Cli) -> Result<i32> {
    let cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    }
    .with_env();
    match &cli.command {
        Command::Generate => cmd_generate(&cfg),
        Command::Run { workers, fresh, check } => {
            let mut cfg = cfg;
            if let Some(w) = workers {
                cfg.workers = *w;
            }
            cmd_run(&cfg, *fresh, *check)
        }
        Command::Analyze { format } => cmd_analyze(&cfg, *format),
        Command::Check => cmd_check(&cfg),
    }
}

pub fn cmd_generate(cfg: &RunConfig) -> Result<i32> {
    cfg.validate()?;
    let graphs = bench::build_benchmark(&cfg.benchmark())?;
    let path = cfg.manifest_path();
    bench::write_manifest(&path, &graphs)?;
    println!("{:>8}  {:>6}  {:>10}", "e_p", "graphs", "mean edges");
    for &e_p in &cfg.e_p_values {
        let class: Vec<_> = graphs.iter().filter(|g| g.e_p() == Some(e_p)).collect();
        let edges = class.iter().map(|g| g.num_edges()).sum::<usize>() as f64 / class.len() as f64;
        println!("{e_p:>8.2}  {:>6}  {edges:>10.2}", class.len());
    }
    println!("wrote {} graphs to {}", graphs.len(), path.display());
    Ok(0)
}

pub fn cmd_run(cfg: &RunConfig, fresh: bool, check: bool) -> Result<i32> {
    cfg.validate()?;
    let manifest = bench::read_manifest(&cfg.manifest_path())?;
    let path = cfg.journal_path();
    let (mut journal, done) = if fresh {
        (Journal::create(&path)?, Vec::new())
    } else {
        Journal::open(&path)?
    };
    if !done.is_empty() {
        info!("resuming: {} records already in {}", done.len(), path.display());
    }
    let best = Mutex::new(f64::NEG_INFINITY);
    let report = |r: &bench::ExperimentRecord, p: bench::Progress| {
        let mut b = best.lock().expect("progress lock");
        *b = b.max(r.ratio);
        eprintln!(
            "[{}/{}] {} p={} ratio={:.4} evals={} (best so far {:.4})",
            p.done, p.total, r.graph_id, r.p, r.ratio, r.evaluations_used, *b
        );
    };
    let summary = bench::run_experiment(&manifest, &cfg.settings(), &mut journal, &done, &report)?;
    println!(
        "{} new records, {} already journaled, {} failed",
        summary.new_records.len(),
        summary.skipped,
        summary.failures.len()
    );
    for (item, e) in &summary.failures {
        println!("  failed {} p={}: {e}", item.graph_id, item.p);
    }
    let code = summary.failures.iter().map(|(_, e)| exit_code(e)).max().unwrap_or(0);
    if check {
        return Ok(code.max(cmd_check(cfg)?));
    }
    Ok(code)
}

pub fn cmd_check(cfg: &RunConfig) -> Result<i32> {
    let manifest = bench::read_manifest(&cfg.manifest_path())?;
    let records = journal::read(&cfg.journal_path())?.records;
    let bad = bench::check_records(&manifest, &records, CHECK_TOLERANCE);
    for m in &bad {
        println!("mismatch {} p={}: {}", m.graph_id, m.p, m.problem);
    }
    println!("checked {} records, {} mismatches", records.len(), bad.len());
    Ok(if bad.is_empty() { 0 } else { 1 })
}

/// Contents of `summary.json`.
#[derive(Debug, Serialize)]
struct Summary<'a> {
    headline: &'a analysis::Headline,
    /// `r_G` is the best ratio over these depths.
    ratio_depths: &'a [usize],
    trend: Option<analysis::LinearFit>,
    by_depth: &'a [analysis::RatioSummary],
    dispersion: Vec<Dispersion>,
}

#[derive(Debug, Serialize)]
struct Dispersion {
    p: usize,
    step: usize,
    points: usize,
    beta: Option<f64>,
    gamma: Option<f64>,
}

pub fn cmd_analyze(cfg: &RunConfig, format: Format) -> Result<i32> {
    cfg.validate()?;
    let path = cfg.journal_path();
    let records = journal::read(&path)?.records;
    if records.is_empty() {
        return Err(Error::Input(format!("{}: no records to analyze", path.display())));
    }
    let manifest = bench::read_manifest(&cfg.manifest_path())?;
    let report = analysis::analyze(&records, &manifest, cfg.threshold, cfg.step)?;
    let files = analysis::emit_plots(&report, &cfg.out_dir, format)?;

    let summary = Summary {
        headline: &report.headline,
        ratio_depths: &report.headline.depths,
        trend: report.fit,
        by_depth: &report.by_depth,
        dispersion: report
            .concentration
            .iter()
            .map(|c| Dispersion {
                p: c.p,
                step: c.step,
                points: c.points.len(),
                beta: c.beta_dispersion,
                gamma: c.gamma_dispersion,
            })
            .collect(),
    };
    let summary_path = cfg.out_dir.join("summary.json");
    let mut text = serde_json::to_string_pretty(&summary).map_err(|e| Error::Json {
        path: summary_path.clone(),
        source: e,
    })?;
    text.push('\n');
    std::fs::write(&summary_path, text).map_err(|e| Error::io(&summary_path, e))?;

    let h = &report.headline;
    println!(
        "{} records over {} graphs, depths {:?}, {} evaluations",
        h.records, h.graphs, h.depths, h.total_evaluations
    );
    println!("mean ratio {:.4}", h.mean_ratio);
    println!("max ratio  {:.4}", h.max_ratio);
    match report.fit {
        Some(f) => println!(
            "trend slope {:.6} (intercept {:.6}, r^2 {:.4})",
            f.slope, f.intercept, f.r_squared
        ),
        None => println!("trend slope n/a (fewer than two graph pairs)"),
    }
    println!("  ratios use the best depth per graph among {:?}", h.depths);
    println!("  reference from the original 90-graph study: mean 0.77, max 0.91");
    for s in &report.by_depth {
        println!(
            "p={:<3} n={:<4} min {:.4}  q1 {:.4}  median {:.4}  q3 {:.4}  max {:.4}",
            s.group, s.count, s.min, s.q1, s.median, s.q3, s.max
        );
    }
    println!("wrote {} files and {}", files.len(), summary_path.display());
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid() {
        let c = RunConfig::default();
        c.validate().unwrap();
        assert_eq!(c.manifest_path(), Path::new("out/manifest.json"));
        assert_eq!(c.settings().budgets.len(), c.depths.len());
    }

    #[test]
    fn single_budget_is_broadcast() {
        let c = RunConfig {
            depths: vec![1, 2, 3],
            budgets: vec![500],
            ..RunConfig::default()
        };
        assert_eq!(c.settings().budgets, vec![500; 3]);
        c.validate().unwrap();
    }

    #[test]
    fn validation_names_the_field() {
        let cases: Vec<(RunConfig, &str)> = vec![
            (
                RunConfig {
                    e_p_values: vec![0.5, 1.5],
                    ..RunConfig::default()
                },
                "e_p_values",
            ),
            (
                RunConfig {
                    threshold: 0.5,
                    ..RunConfig::default()
                },
                "threshold",
            ),
            (
                RunConfig {
                    depths: vec![2, 1],
                    budgets: vec![10],
                    ..RunConfig::default()
                },
                "depths",
            ),
            (
                RunConfig {
                    budgets: vec![1, 0, 1, 1, 1],
                    ..RunConfig::default()
                },
                "budgets",
            ),
        ];
        for (c, field) in cases {
            match c.validate() {
                Err(e @ Error::Config(_)) => {
                    assert!(e.to_string().contains(field), "{e}");
                    assert_eq!(exit_code(&e), 3);
                }
                other => panic!("{field}: {other:?}"),
            }
        }
    }

    #[test]
    fn toml_and_json_configs() {
        let dir = tempfile::tempdir().unwrap();
        let t = dir.path().join("c.toml");
        std::fs::write(
            &t,
            "n = 6\ne_p_values = [0.5]\nper_class = 2\ndepths = [1]\nbudgets = [100]\n",
        )
        .unwrap();
        let c = RunConfig::load(&t).unwrap();
        assert_eq!((c.n, c.per_class, c.depths.clone()), (6, 2, vec![1]));
        let j = dir.path().join("c.json");
        std::fs::write(&j, r#"{"n": 7, "padded_starts": false}"#).unwrap();
        let c = RunConfig::load(&j).unwrap();
        assert_eq!(c.n, 7);
        assert!(!c.padded_starts);
        std::fs::write(&t, "bogus = 1\n").unwrap();
        assert!(matches!(RunConfig::load(&t), Err(Error::Config(_))));
    }

    #[test]
    fn exit_codes_are_distinct() {
        let io = Error::io(Path::new("x"), std::io::Error::other("boom"));
        let cap = Error::Capacity {
            what: "qubits",
            size: 30,
            limit: 24,
        };
        let codes = [
            exit_code(&Error::Config("x".into())),
            exit_code(&io),
            exit_code(&cap),
            exit_code(&Error::Input("x".into())),
        ];
        assert_eq!(codes, [3, 4, 5, 1]);
    }
}
