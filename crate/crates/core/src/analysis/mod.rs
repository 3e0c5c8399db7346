//! Summaries of journaled records: ratio spreads, ratio difference against
//! graph edit distance, and concentration of near-optimal angles.

mod plot;

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::{PI, TAU};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bench::ExperimentRecord;
use crate::error::{Error, Result};
use crate::graphs::{graph_edit_distance, Graph};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupBy {
    Depth,
    EdgeProbability,
}

/// Five-number summary of the ratios in one group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioSummary {
    pub group: String,
    pub count: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

/// Linear-interpolation quantile of ascending `sorted`, `q` in `[0, 1]`.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

fn summarize(group: String, mut values: Vec<f64>) -> RatioSummary {
    values.sort_by(f64::total_cmp);
    RatioSummary {
        group,
        count: values.len(),
        min: values[0],
        q1: quantile(&values, 0.25),
        median: quantile(&values, 0.5),
        q3: quantile(&values, 0.75),
        max: values[values.len() - 1],
    }
}

/// Per-group ratio summaries in ascending key order. Records without an edge
/// probability are left out of `EdgeProbability` grouping.
pub fn ratio_stats(records: &[ExperimentRecord], by: GroupBy) -> Result<Vec<RatioSummary>> {
    if records.is_empty() {
        return Err(Error::Input("no records to summarize".into()));
    }
    let mut groups: BTreeMap<i64, (String, Vec<f64>)> = BTreeMap::new();
    let mut unlabeled = 0;
    for r in records {
        let (key, label) = match by {
            GroupBy::Depth => (r.p as i64, r.p.to_string()),
            GroupBy::EdgeProbability => match r.e_p {
                Some(e) => ((e * 1e6).round() as i64, format!("{e:.2}")),
                None => {
                    unlabeled += 1;
                    continue;
                }
            },
        };
        groups.entry(key).or_insert_with(|| (label, Vec::new())).1.push(r.ratio);
    }
    if unlabeled > 0 {
        warn!("{unlabeled} records have no edge probability and were not grouped");
    }
    Ok(groups.into_values().map(|(label, v)| summarize(label, v)).collect())
}

/// `r_G`: the best ratio of each graph over the available depths, or at
/// `depth` only.
pub fn graph_ratios(records: &[ExperimentRecord], depth: Option<usize>) -> BTreeMap<&str, f64> {
    let mut out: BTreeMap<&str, f64> = BTreeMap::new();
    for r in records.iter().filter(|r| depth.is_none_or(|p| r.p == p)) {
        let e = out.entry(r.graph_id.as_str()).or_insert(f64::NEG_INFINITY);
        *e = e.max(r.ratio);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistancePair {
    pub g1: String,
    pub g2: String,
    pub ged: usize,
    /// `|r_G1 - r_G2|`.
    pub d: f64,
}

/// Graph edit distances keyed by unordered id pair.
#[derive(Debug, Default)]
pub struct GedCache {
    map: Mutex<HashMap<(String, String), usize>>,
}

impl GedCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.map.lock().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, a: &Graph, b: &Graph) -> Result<usize> {
        let key = if a.id() <= b.id() {
            (a.id().to_string(), b.id().to_string())
        } else {
            (b.id().to_string(), a.id().to_string())
        };
        if let Some(&d) = self.map.lock().expect("cache lock").get(&key) {
            return Ok(d);
        }
        let d = graph_edit_distance(a, b)?;
        self.map.lock().expect("cache lock").insert(key, d);
        Ok(d)
    }
}

/// `(ged, d)` for every unordered pair of graphs that have records, in
/// manifest order. Graphs without records are skipped with a warning.
pub fn pairwise_ratio_diff(
    records: &[ExperimentRecord],
    graphs: &[Graph],
    depth: Option<usize>,
    cache: &GedCache,
) -> Result<Vec<DistancePair>> {
    let ratios = graph_ratios(records, depth);
    let present: Vec<(&Graph, f64)> = graphs
        .iter()
        .filter_map(|g| match ratios.get(g.id()) {
            Some(&r) => Some((g, r)),
            None => {
                warn!("{}: no records, left out of pairwise analysis", g.id());
                None
            }
        })
        .collect();
    let pairs: Vec<(usize, usize)> = (0..present.len())
        .flat_map(|i| (i + 1..present.len()).map(move |j| (i, j)))
        .collect();
    pairs
        .par_iter()
        .map(|&(i, j)| {
            let ((a, ra), (b, rb)) = (present[i], present[j]);
            Ok(DistancePair {
                g1: a.id().to_string(),
                g2: b.id().to_string(),
                ged: cache.get(a, b)?,
                d: (ra - rb).abs(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

impl LinearFit {
    pub fn predict(&self, x: f64) -> f64 {
        self.slope * x + self.intercept
    }
}

/// Ordinary least squares `y ≈ slope·x + intercept`. `r_squared` is 1 when
/// all `y` are equal.
pub fn least_squares_fit(points: &[(f64, f64)]) -> Result<LinearFit> {
    if points.len() < 2 {
        return Err(Error::Input(format!(
            "least squares needs 2 points, got {}",
            points.len()
        )));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Input("least squares: all x values equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    let ss_res: f64 = points.iter().map(|p| (p.1 - slope * p.0 - intercept).powi(2)).sum();
    let r_squared = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok(LinearFit {
        slope,
        intercept,
        r_squared,
    })
}

/// One near-optimal `(β_k, γ_k)` of one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CloudPoint {
    pub graph_id: String,
    pub step: usize,
    pub beta: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Concentration {
    pub p: usize,
    /// 1-based QAOA step.
    pub step: usize,
    pub points: Vec<CloudPoint>,
    /// Circular standard deviation of `β_k` with period `π`.
    pub beta_dispersion: Option<f64>,
    /// Circular standard deviation of `γ_k` with period `2π`.
    pub gamma_dispersion: Option<f64>,
}

/// Circular standard deviation of `values` on a circle of circumference
/// `period`, in the units of `values`. `None` for no values.
pub fn circular_std(values: &[f64], period: f64) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let k = TAU / period;
    let (s, c) = values
        .iter()
        .fold((0.0, 0.0), |(s, c), v| (s + (k * v).sin(), c + (k * v).cos()));
    let r = (s.hypot(c) / values.len() as f64).min(1.0);
    // rounding leaves r a few ulps below 1 for coincident points
    let r = if r > 1.0 - 1e-12 { 1.0 } else { r };
    Some((-2.0 * r.ln()).sqrt() / k)
}

/// Step-`step` angles of every near-optimal point with
/// `f ≥ (1 - threshold)·best_f` among depth-`p` records, sorted by
/// `(graph_id, beta, gamma)`.
pub fn concentration(records: &[ExperimentRecord], threshold: f64, p: usize, step: usize) -> Result<Concentration> {
    if !(threshold > 0.0 && threshold < 0.5) {
        return Err(Error::Input(format!("threshold {threshold} outside (0, 0.5)")));
    }
    if step == 0 || step > p {
        return Err(Error::Input(format!("step {step} outside 1..={p}")));
    }
    let mut points: Vec<CloudPoint> = records
        .iter()
        .filter(|r| r.p == p)
        .flat_map(|r| {
            let cut = (1.0 - threshold) * r.best_f;
            r.near_optimal_params
                .iter()
                .filter(move |q| q.f >= cut)
                .map(move |q| CloudPoint {
                    graph_id: r.graph_id.clone(),
                    step,
                    beta: q.betas[step - 1],
                    gamma: q.gammas[step - 1],
                })
        })
        .collect();
    points.sort_by(|a, b| {
        a.graph_id
            .cmp(&b.graph_id)
            .then(a.beta.total_cmp(&b.beta))
            .then(a.gamma.total_cmp(&b.gamma))
    });
    if points.is_empty() {
        warn!("no near-optimal points at p = {p}");
    }
    let betas: Vec<f64> = points.iter().map(|c| c.beta).collect();
    let gammas: Vec<f64> = points.iter().map(|c| c.gamma).collect();
    Ok(Concentration {
        p,
        step,
        beta_dispersion: circular_std(&betas, PI),
        gamma_dispersion: circular_std(&gammas, TAU),
        points,
    })
}

/// Headline numbers over all graphs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Headline {
    pub records: usize,
    pub graphs: usize,
    pub depths: Vec<usize>,
    /// Mean over graphs of `r_G`.
    pub mean_ratio: f64,
    /// Max over graphs of `r_G`.
    pub max_ratio: f64,
    pub total_evaluations: u64,
}

/// Everything emitted by one analysis pass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub headline: Headline,
    pub by_depth: Vec<RatioSummary>,
    /// Per-depth summaries grouped by edge probability.
    pub by_class: Vec<(usize, Vec<RatioSummary>)>,
    pub pairs: Vec<DistancePair>,
    pub fit: Option<LinearFit>,
    pub concentration: Vec<Concentration>,
}

/// Runs every analysis over `records`. `r_G` is the max over the depths
/// present; `step` is clamped to each depth.
pub fn analyze(records: &[ExperimentRecord], graphs: &[Graph], threshold: f64, step: usize) -> Result<Report> {
    if records.is_empty() {
        return Err(Error::Input("no records to analyze".into()));
    }
    let mut records = records.to_vec();
    records.sort_by(|a, b| a.graph_id.cmp(&b.graph_id).then(a.p.cmp(&b.p)));
    let mut depths: Vec<usize> = records.iter().map(|r| r.p).collect();
    depths.dedup();
    depths.sort_unstable();
    depths.dedup();

    let ratios = graph_ratios(&records, None);
    let headline = Headline {
        records: records.len(),
        graphs: ratios.len(),
        depths: depths.clone(),
        mean_ratio: ratios.values().sum::<f64>() / ratios.len() as f64,
        max_ratio: ratios.values().copied().fold(f64::NEG_INFINITY, f64::max),
        total_evaluations: records.iter().map(|r| r.evaluations_used).sum(),
    };

    let by_class = depths
        .iter()
        .map(|&p| {
            let at: Vec<ExperimentRecord> = records.iter().filter(|r| r.p == p).cloned().collect();
            Ok((p, ratio_stats(&at, GroupBy::EdgeProbability)?))
        })
        .collect::<Result<Vec<_>>>()?;

    let pairs = pairwise_ratio_diff(&records, graphs, None, &GedCache::new())?;
    let fit = if pairs.len() >= 2 {
        let pts: Vec<(f64, f64)> = pairs.iter().map(|d| (d.ged as f64, d.d)).collect();
        least_squares_fit(&pts)
            .inspect_err(|e| warn!("no trend line: {e}"))
            .ok()
    } else {
        None
    };

    let concentration = depths
        .iter()
        .map(|&p| concentration(&records, threshold, p, step.clamp(1, p)))
        .collect::<Result<Vec<_>>>()?;

    Ok(Report {
        headline,
        by_depth: ratio_stats(&records, GroupBy::Depth)?,
        by_class,
        pairs,
        fit,
        concentration,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Svg,
    Csv,
    #[default]
    Both,
}

impl Format {
    fn svg(self) -> bool {
        self != Format::Csv
    }

    fn csv(self) -> bool {
        self != Format::Svg
    }
}

#[derive(Serialize)]
struct BoxRow<'a> {
    group: &'a str,
    min: f64,
    q1: f64,
    median: f64,
    q3: f64,
    max: f64,
}

fn write_csv<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    for row in rows {
        w.serialize(row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let kind = match e.kind() {
        csv::ErrorKind::Io(io) => io.kind(),
        _ => std::io::ErrorKind::Other,
    };
    Error::io(path, std::io::Error::new(kind, e.to_string()))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn box_rows(s: &[RatioSummary]) -> impl Iterator<Item = BoxRow<'_>> {
    s.iter().map(|s| BoxRow {
        group: &s.group,
        min: s.min,
        q1: s.q1,
        median: s.median,
        q3: s.q3,
        max: s.max,
    })
}

/// Writes the plot files of `report` into `out_dir` and returns their paths
/// in writing order. Output bytes depend only on `report`.
pub fn emit_plots(report: &Report, out_dir: &Path, format: Format) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut written = Vec::new();
    let mut emit_box = |stem: &str, title: &str, xlabel: &str, s: &[RatioSummary]| -> Result<()> {
        if format.csv() {
            let path = out_dir.join(format!("{stem}.csv"));
            write_csv(&path, box_rows(s))?;
            written.push(path);
        }
        if format.svg() {
            let path = out_dir.join(format!("{stem}.svg"));
            write_text(&path, &plot::boxplot(title, xlabel, "approximation ratio", s))?;
            written.push(path);
        }
        Ok(())
    };
    emit_box("boxplot_p", "Approximation ratio by depth", "p", &report.by_depth)?;
    for (p, s) in &report.by_class {
        emit_box(
            &format!("boxplot_ep_p{p}"),
            &format!("Approximation ratio by edge probability, p = {p}"),
            "edge probability",
            s,
        )?;
    }

    if format.csv() {
        let path = out_dir.join("scatter_ged.csv");
        write_csv(&path, &report.pairs)?;
        written.push(path);
    }
    if format.svg() {
        let path = out_dir.join("scatter_ged.svg");
        let pts: Vec<(f64, f64)> = report.pairs.iter().map(|d| (d.ged as f64, d.d)).collect();
        let xmax = pts.iter().map(|p| p.0).fold(1.0, f64::max);
        let ymax = pts.iter().map(|p| p.1).fold(0.0, f64::max);
        let svg = plot::scatter(
            &plot::Frame {
                title: "Ratio difference vs graph edit distance",
                xlabel: "graph edit distance",
                ylabel: "|r1 - r2|",
                x: (0.0, xmax),
                y: (0.0, plot::nice_ceil(ymax)),
            },
            &pts,
            report.fit.map(|f| (f.slope, f.intercept)),
        );
        write_text(&path, &svg)?;
        written.push(path);
    }

    for c in &report.concentration {
        let stem = format!("concentration_p{}", c.p);
        if format.csv() {
            let path = out_dir.join(format!("{stem}.csv"));
            write_csv(&path, &c.points)?;
            written.push(path);
        }
        if format.svg() {
            let path = out_dir.join(format!("{stem}.svg"));
            let pts: Vec<(f64, f64)> = c.points.iter().map(|q| (q.beta, q.gamma)).collect();
            let svg = plot::scatter(
                &plot::Frame {
                    title: &format!("Near-optimal angles, p = {}, step {}", c.p, c.step),
                    xlabel: "beta",
                    ylabel: "gamma",
                    x: (0.0, PI),
                    y: (0.0, TAU),
                },
                &pts,
                None,
            );
            write_text(&path, &svg)?;
            written.push(path);
        }
    }
    Ok(written)
}
