//! Benchmark construction and journaled (graph, depth) sweeps.

pub mod journal;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;
use std::sync::Mutex;

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::{generate_er, maxcut_bruteforce, Graph};
use crate::optim::{multistart_with_starts, Bounds, LocalOptions};
use crate::rng;
use crate::sim::{CutTable, Evaluator};

pub use journal::Journal;

/// Attempts per benchmark slot before giving up on drawing a graph with at
/// least one edge.
const MAX_REGENERATIONS: u64 = 1000;

/// Near-optimal parameters are those with `f >= (1 - NEAR_OPTIMAL_FRACTION) * best_f`.
pub const NEAR_OPTIMAL_FRACTION: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkSpec {
    pub n: usize,
    pub e_p_values: Vec<f64>,
    pub per_class: usize,
    pub master_seed: u64,
}

impl Default for BenchmarkSpec {
    fn default() -> Self {
        BenchmarkSpec {
            n: 10,
            e_p_values: vec![0.3, 0.4, 0.5, 0.6, 0.7],
            per_class: 10,
            master_seed: 2019,
        }
    }
}

/// Generates `per_class` Erdős–Rényi graphs for every edge probability.
///
/// Graph `i` of class `c` uses seed `derive_seed(master_seed, [c, i, attempt])`,
/// starting at `attempt = 0` and moving to the next attempt whenever the draw
/// has no edges (zero maximum cut).
pub fn build_benchmark(spec: &BenchmarkSpec) -> Result<Vec<Graph>> {
    if spec.n < 2 {
        return Err(Error::Input(format!("benchmark graphs need n >= 2, got {}", spec.n)));
    }
    if spec.e_p_values.is_empty() || spec.per_class == 0 {
        return Err(Error::Input(
            "benchmark needs at least one e_p value and per_class >= 1".into(),
        ));
    }
    if let Some(bad) = spec.e_p_values.iter().find(|&&p| !(p > 0.0 && p <= 1.0)) {
        return Err(Error::Input(format!("e_p value {bad} outside (0, 1]")));
    }
    let mut graphs = Vec::with_capacity(spec.e_p_values.len() * spec.per_class);
    for (c, &e_p) in spec.e_p_values.iter().enumerate() {
        for i in 0..spec.per_class {
            let mut drawn = None;
            for attempt in 0..MAX_REGENERATIONS {
                let seed = rng::derive_seed(spec.master_seed, &[c as u64, i as u64, attempt]);
                let g = generate_er(spec.n, e_p, seed)?;
                if g.num_edges() > 0 {
                    drawn = Some(g);
                    break;
                }
            }
            let g = drawn.ok_or_else(|| {
                Error::Input(format!(
                    "no graph with edges after {MAX_REGENERATIONS} draws at e_p = {e_p}"
                ))
            })?;
            graphs.push(g.with_id(format!("n{}_ep{:.2}_{:02}", spec.n, e_p, i)));
        }
    }
    Ok(graphs)
}

pub fn write_manifest(path: &Path, graphs: &[Graph]) -> Result<()> {
    let mut text = serde_json::to_string_pretty(graphs).map_err(|e| Error::Json {
        path: path.to_path_buf(),
        source: e,
    })?;
    text.push('\n');
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_manifest(path: &Path) -> Result<Vec<Graph>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let graphs: Vec<Graph> = serde_json::from_str(&text).map_err(|e| Error::Json {
        path: path.to_path_buf(),
        source: e,
    })?;
    let mut ids = HashSet::new();
    if let Some(dup) = graphs.iter().find(|g| !ids.insert(g.id())) {
        return Err(Error::Input(format!(
            "{}: duplicate graph id {}",
            path.display(),
            dup.id()
        )));
    }
    Ok(graphs)
}

/// `best_f / ground_truth`.
pub fn approximation_ratio(best_f: f64, ground_truth: usize) -> Result<f64> {
    if ground_truth == 0 {
        return Err(Error::DegenerateInstance(format!("best_f = {best_f}")));
    }
    Ok(best_f / ground_truth as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NearOptimalPoint {
    pub betas: Vec<f64>,
    pub gammas: Vec<f64>,
    pub f: f64,
}

/// Outcome of optimizing one graph at one depth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub graph_id: String,
    pub e_p: Option<f64>,
    pub n: usize,
    pub p: usize,
    pub best_betas: Vec<f64>,
    pub best_gammas: Vec<f64>,
    pub best_f: f64,
    pub ground_truth: usize,
    pub ratio: f64,
    pub evaluations_used: u64,
    pub starts_completed: usize,
    pub converged_starts: usize,
    pub seed: u64,
    /// Whether the previous depth's optimum, padded with zero layers, was
    /// the first start.
    pub padded_start: bool,
    pub near_optimal_params: Vec<NearOptimalPoint>,
}

impl ExperimentRecord {
    pub fn key(&self) -> (&str, usize) {
        (&self.graph_id, self.p)
    }

    pub fn best_point(&self) -> Vec<f64> {
        self.best_betas.iter().chain(&self.best_gammas).copied().collect()
    }
}

/// Run parameters shared by every (graph, depth) task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSettings {
    /// Ascending depths.
    pub depths: Vec<usize>,
    /// Evaluation budget per depth, aligned with `depths`.
    pub budgets: Vec<u64>,
    pub ftol: f64,
    pub xtol: f64,
    pub master_seed: u64,
    pub workers: usize,
    pub padded_starts: bool,
    /// Cap on stored near-optimal points per record; the lowest-valued are
    /// discarded first.
    pub max_near_optimal: usize,
}

impl Default for RunSettings {
    fn default() -> Self {
        RunSettings {
            depths: vec![1, 2, 4, 6, 8],
            budgets: vec![100_000, 100_000, 300_000, 300_000, 300_000],
            ftol: 1e-3,
            xtol: 1e-2,
            master_seed: 2019,
            workers: 1,
            padded_starts: true,
            max_near_optimal: 2000,
        }
    }
}

impl RunSettings {
    pub fn validate(&self) -> Result<()> {
        if self.depths.is_empty() {
            return Err(Error::Config("depths: empty".into()));
        }
        if self.depths.contains(&0) || self.depths.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("depths: must be positive and strictly ascending".into()));
        }
        if self.budgets.len() != self.depths.len() {
            return Err(Error::Config(format!(
                "budgets: {} entries for {} depths",
                self.budgets.len(),
                self.depths.len()
            )));
        }
        if self.budgets.contains(&0) {
            return Err(Error::Config("budgets: must be positive".into()));
        }
        if !(self.ftol > 0.0) {
            return Err(Error::Config("ftol: must be positive".into()));
        }
        if !(self.xtol > 0.0) {
            return Err(Error::Config("xtol: must be positive".into()));
        }
        if self.workers == 0 {
            return Err(Error::Config("workers: must be at least 1".into()));
        }
        Ok(())
    }

    pub fn budget_for(&self, p: usize) -> Option<u64> {
        self.depths.iter().position(|&d| d == p).map(|i| self.budgets[i])
    }
}

/// Multistart seed of one task: `derive_seed(master_seed, [fnv1a(graph_id), p])`.
pub fn record_seed(master_seed: u64, graph_id: &str, p: usize) -> u64 {
    rng::derive_seed(master_seed, &[rng::fnv1a(graph_id.as_bytes()), p as u64])
}

/// Keeps evaluated points within a fraction of the best value seen so far,
/// merging points closer than `min_separation`.
#[derive(Debug)]
pub struct NearOptimalCollector {
    fraction: f64,
    min_separation: f64,
    cap: usize,
    best: f64,
    points: Vec<(f64, Vec<f64>)>,
}

impl NearOptimalCollector {
    pub fn new(fraction: f64, min_separation: f64, cap: usize) -> Self {
        NearOptimalCollector {
            fraction,
            min_separation,
            cap,
            best: f64::NEG_INFINITY,
            points: Vec::new(),
        }
    }

    fn threshold(&self) -> f64 {
        (1.0 - self.fraction) * self.best
    }

    /// Observes a maximization value `f` at `x`.
    pub fn observe(&mut self, x: &[f64], f: f64) {
        if f > self.best {
            self.best = f;
            let t = self.threshold();
            self.points.retain(|(v, _)| *v >= t);
        }
        if f < self.threshold() || self.cap == 0 {
            return;
        }
        let sep2 = self.min_separation * self.min_separation;
        if let Some(slot) = self
            .points
            .iter_mut()
            .find(|(_, y)| y.iter().zip(x).map(|(a, b)| (a - b).powi(2)).sum::<f64>() < sep2)
        {
            if f > slot.0 {
                *slot = (f, x.to_vec());
            }
            return;
        }
        self.points.push((f, x.to_vec()));
        if self.points.len() > self.cap {
            let worst = (0..self.points.len())
                .min_by(|&a, &b| self.points[a].0.total_cmp(&self.points[b].0))
                .unwrap();
            self.points.remove(worst);
        }
    }

    /// Points within the fraction of `best_f`, best first.
    pub fn finish(mut self, best_f: f64) -> Vec<NearOptimalPoint> {
        let t = (1.0 - self.fraction) * best_f;
        self.points.retain(|(v, _)| *v >= t);
        self.points
            .sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.partial_cmp(&b.1).unwrap()));
        self.points
            .into_iter()
            .map(|(f, x)| {
                let (b, g) = x.split_at(x.len() / 2);
                NearOptimalPoint {
                    betas: b.to_vec(),
                    gammas: g.to_vec(),
                    f,
                }
            })
            .collect()
    }
}

/// Optimizes `f` for one graph at depth `p`.
///
/// `warm_start`, if given, is a depth-`p` point run before the random starts.
pub fn run_task(
    graph: &Graph,
    p: usize,
    budget: u64,
    seed: u64,
    settings: &RunSettings,
    warm_start: Option<Vec<f64>>,
) -> Result<ExperimentRecord> {
    let ground_truth = maxcut_bruteforce(graph)?.max_value;
    if ground_truth == 0 {
        return Err(Error::DegenerateInstance(graph.id().to_string()));
    }
    let table = CutTable::build(graph)?;
    let bounds = Bounds::qaoa(p)?;
    let opts = LocalOptions {
        ftol: settings.ftol,
        xtol: settings.xtol,
        max_evals: budget,
    };
    let mut ev = Evaluator::new(&table);
    let mut near = NearOptimalCollector::new(NEAR_OPTIMAL_FRACTION, settings.xtol, settings.max_near_optimal);
    let padded_start = warm_start.is_some();
    let initial: Vec<Vec<f64>> = warm_start.into_iter().collect();
    let result = multistart_with_starts(
        |x: &[f64]| {
            let f = ev.expectation_at(x).expect("point has 2p coordinates");
            near.observe(x, f);
            -f
        },
        &bounds,
        budget,
        seed,
        &opts,
        &initial,
    )?;
    let best_f = -result.best_value;
    let (b, g) = result.best_point.split_at(p);
    Ok(ExperimentRecord {
        graph_id: graph.id().to_string(),
        e_p: graph.e_p(),
        n: graph.n(),
        p,
        best_betas: b.to_vec(),
        best_gammas: g.to_vec(),
        best_f,
        ground_truth,
        ratio: approximation_ratio(best_f, ground_truth)?,
        evaluations_used: result.evaluations_used,
        starts_completed: result.starts_completed,
        converged_starts: result.converged().iter().filter(|&&c| c).count(),
        seed,
        padded_start,
        near_optimal_params: near.finish(best_f),
    })
}

/// A (graph, depth) pair still to be run.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WorkItem {
    pub graph_id: String,
    pub p: usize,
}

/// Work not yet covered by `completed`, in manifest order then ascending depth.
pub fn remaining_work(manifest: &[Graph], depths: &[usize], completed: &[ExperimentRecord]) -> Vec<WorkItem> {
    let done: HashSet<(&str, usize)> = completed.iter().map(ExperimentRecord::key).collect();
    manifest
        .iter()
        .flat_map(|g| depths.iter().map(move |&p| (g, p)))
        .filter(|(g, p)| !done.contains(&(g.id(), *p)))
        .map(|(g, p)| WorkItem {
            graph_id: g.id().to_string(),
            p,
        })
        .collect()
}

/// Reads the journal at `path` and returns the work left for `manifest`.
pub fn resume(path: &Path, manifest: &[Graph], depths: &[usize]) -> Result<Vec<WorkItem>> {
    let parsed = journal::read(path)?;
    Ok(remaining_work(manifest, depths, &parsed.records))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Progress {
    pub done: usize,
    pub total: usize,
}

#[derive(Debug, Default)]
pub struct RunSummary {
    pub new_records: Vec<ExperimentRecord>,
    pub failures: Vec<(WorkItem, Error)>,
    pub skipped: usize,
}

/// Runs every (graph, depth) pair not already in `completed`, appending each
/// new record to `journal` as it finishes.
///
/// Graphs are distributed over `settings.workers` threads; the depths of one
/// graph run in ascending order so that, with `padded_starts`, depth `p` can
/// start from the depth-below optimum padded with `β = γ = 0` layers. A
/// failing task is logged and skipped.
pub fn run_experiment(
    manifest: &[Graph],
    settings: &RunSettings,
    journal: &mut Journal,
    completed: &[ExperimentRecord],
    on_record: &(dyn Fn(&ExperimentRecord, Progress) + Sync),
) -> Result<RunSummary> {
    settings.validate()?;
    let work = remaining_work(manifest, &settings.depths, completed);
    let total = work.len();
    let mut by_graph: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for item in &work {
        by_graph.entry(item.graph_id.as_str()).or_default().push(item.p);
    }
    let known: HashMap<(&str, usize), &ExperimentRecord> = completed.iter().map(|r| (r.key(), r)).collect();

    let sink = Mutex::new((journal, RunSummary::default(), 0usize));
    let tasks: Vec<(&Graph, Vec<usize>)> = manifest
        .iter()
        .filter_map(|g| by_graph.get(g.id()).map(|ps| (g, ps.clone())))
        .collect();

    let body = || {
        tasks.par_iter().for_each(|(graph, depths)| {
            let mut previous: Option<ExperimentRecord> = None;
            for &p in depths {
                let item = WorkItem {
                    graph_id: graph.id().to_string(),
                    p,
                };
                let lower = settings.depths.iter().copied().filter(|&d| d < p).max();
                let warm = if settings.padded_starts {
                    lower.and_then(|d| {
                        previous
                            .as_ref()
                            .filter(|r| r.p == d)
                            .or_else(|| known.get(&(graph.id(), d)).copied())
                            .map(|r| padded_point(r, p))
                    })
                } else {
                    None
                };
                let budget = settings.budget_for(p).expect("depth comes from settings");
                let seed = record_seed(settings.master_seed, graph.id(), p);
                let outcome = run_task(graph, p, budget, seed, settings, warm);
                let mut guard = sink.lock().expect("journal lock");
                let (journal, summary, done) = &mut *guard;
                match outcome {
                    Ok(record) => {
                        if let Err(e) = journal.append(&record) {
                            warn!("{} p={}: {e}", graph.id(), p);
                            summary.failures.push((item, e));
                            continue;
                        }
                        *done += 1;
                        on_record(&record, Progress { done: *done, total });
                        summary.new_records.push(record.clone());
                        previous = Some(record);
                    }
                    Err(e) => {
                        warn!("{} p={}: {e}", graph.id(), p);
                        summary.failures.push((item, e));
                    }
                }
            }
        });
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(settings.workers)
        .build()
        .map_err(|e| Error::Config(format!("workers: {e}")))?;
    pool.install(body);

    let (_, mut summary, _) = sink.into_inner().expect("journal lock");
    summary.skipped = manifest.len() * settings.depths.len() - total;
    info!(
        "{} new records, {} failures, {} already journaled",
        summary.new_records.len(),
        summary.failures.len(),
        summary.skipped
    );
    Ok(summary)
}

/// A record's optimum extended to depth `p` with identity layers.
pub fn padded_point(record: &ExperimentRecord, p: usize) -> Vec<f64> {
    let mut betas = record.best_betas.clone();
    let mut gammas = record.best_gammas.clone();
    betas.resize(p, 0.0);
    gammas.resize(p, 0.0);
    betas.extend(gammas);
    betas
}

/// A record whose stored optimum does not reproduce on re-simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct Mismatch {
    pub graph_id: String,
    pub p: usize,
    pub problem: String,
}

/// Re-simulates every record against `manifest`.
pub fn check_records(manifest: &[Graph], records: &[ExperimentRecord], tol: f64) -> Vec<Mismatch> {
    let graphs: HashMap<&str, &Graph> = manifest.iter().map(|g| (g.id(), g)).collect();
    records
        .par_iter()
        .filter_map(|r| {
            let fail = |problem: String| {
                Some(Mismatch {
                    graph_id: r.graph_id.clone(),
                    p: r.p,
                    problem,
                })
            };
            let Some(g) = graphs.get(r.graph_id.as_str()) else {
                return fail("graph not in manifest".into());
            };
            let table = match CutTable::build(g) {
                Ok(t) => t,
                Err(e) => return fail(e.to_string()),
            };
            if r.best_betas.len() != r.p || r.best_gammas.len() != r.p {
                return fail("parameter vectors do not have length p".into());
            }
            let mut ev = Evaluator::new(&table);
            let f = ev.expectation(&r.best_betas, &r.best_gammas).expect("lengths checked");
            if (f - r.best_f).abs() > tol {
                return fail(format!("best_f {} re-simulates to {f}", r.best_f));
            }
            if r.ground_truth != table.max_value() as usize {
                return fail(format!(
                    "ground truth {} but max cut is {}",
                    r.ground_truth,
                    table.max_value()
                ));
            }
            if (r.ratio - r.best_f / r.ground_truth as f64).abs() > tol || r.ratio > 1.0 + 1e-12 {
                return fail(format!("ratio {} inconsistent", r.ratio));
            }
            for q in &r.near_optimal_params {
                let fq = ev.expectation(&q.betas, &q.gammas).unwrap_or(f64::NAN);
                if !((fq - q.f).abs() <= tol && fq >= (1.0 - NEAR_OPTIMAL_FRACTION) * r.best_f - tol) {
                    return fail(format!("near-optimal point {:?}/{:?} has f = {fq}", q.betas, q.gammas));
                }
            }
            None
        })
        .collect()
}
