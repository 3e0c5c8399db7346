//! Bound-constrained derivative-free minimization.
//!
//! [`local_optimize`] is a trust-region method over a quadratic model that
//! interpolates `2d + 1` points, refit after every evaluation by the
//! least-Frobenius-norm change of its Hessian. [`multistart`] restarts it
//! from uniformly drawn points until an evaluation budget is spent.

mod model;
mod multistart;
mod trsbox;

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use model::QuadraticModel;

pub use multistart::{multistart, multistart_with_starts, random_start};

/// Axis-aligned box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(Error::Input(format!(
                "bounds need matching non-empty vectors, got {} and {}",
                lower.len(),
                upper.len()
            )));
        }
        if let Some(i) =
            (0..lower.len()).find(|&i| !(lower[i] < upper[i]) || !lower[i].is_finite() || !upper[i].is_finite())
        {
            return Err(Error::Input(format!(
                "bound {i} is empty or unbounded: [{}, {}]",
                lower[i], upper[i]
            )));
        }
        Ok(Bounds { lower, upper })
    }

    /// `([0, π] × [0, 2π])^p` ordered `(β_1..β_p, γ_1..γ_p)`.
    pub fn qaoa(p: usize) -> Result<Self> {
        if p == 0 {
            return Err(Error::Input("depth must be at least 1".into()));
        }
        let mut upper = vec![PI; p];
        upper.extend(std::iter::repeat_n(TAU, p));
        Bounds::new(vec![0.0; 2 * p], upper)
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(&self.lower)
                .zip(&self.upper)
                .all(|((v, l), u)| l <= v && v <= u)
    }

    fn min_width(&self) -> f64 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| u - l)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Tolerances and budget for one local run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalOptions {
    /// Absolute change in objective between consecutive accepted iterates.
    pub ftol: f64,
    /// Absolute step length / trust-region radius.
    pub xtol: f64,
    pub max_evals: u64,
}

impl Default for LocalOptions {
    fn default() -> Self {
        LocalOptions {
            ftol: 1e-3,
            xtol: 1e-2,
            max_evals: 10_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Ftol,
    Xtol,
    Budget,
}

/// Outcome of one local run inside a multistart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartRecord {
    pub value: f64,
    pub evaluations: u64,
    /// Accepted (improving) trust-region steps.
    pub iterations: usize,
    pub stop: StopReason,
}

impl StartRecord {
    pub fn converged(&self) -> bool {
        self.stop != StopReason::Budget
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptResult {
    pub best_point: Vec<f64>,
    pub best_value: f64,
    pub evaluations_used: u64,
    pub starts_completed: usize,
    pub history: Vec<StartRecord>,
}

impl OptResult {
    pub fn converged(&self) -> Vec<bool> {
        self.history.iter().map(StartRecord::converged).collect()
    }
}

/// Counts evaluations, tracks the incumbent and rejects non-finite values.
struct Counted<'f, F> {
    objective: &'f mut F,
    evals: u64,
    max_evals: u64,
}

impl<F: FnMut(&[f64]) -> f64> Counted<'_, F> {
    fn exhausted(&self) -> bool {
        self.evals >= self.max_evals
    }

    fn eval(&mut self, x: &[f64]) -> Result<f64> {
        self.evals += 1;
        let v = (self.objective)(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Evaluation {
                point: x.to_vec(),
                value: v,
            })
        }
    }
}

/// Minimizes `objective` from `start` inside `bounds`.
///
/// Every evaluated point lies inside `bounds`, at most `opts.max_evals`
/// evaluations are made, and the returned value never exceeds the value at
/// `start`.
pub fn local_optimize<F>(mut objective: F, start: &[f64], bounds: &Bounds, opts: &LocalOptions) -> Result<OptResult>
where
    F: FnMut(&[f64]) -> f64,
{
    let record = local_run(&mut objective, start, bounds, opts)?;
    Ok(OptResult {
        best_point: record.1,
        best_value: record.0.value,
        evaluations_used: record.0.evaluations,
        starts_completed: 1,
        history: vec![record.0],
    })
}

pub(crate) fn local_run<F>(
    objective: &mut F,
    start: &[f64],
    bounds: &Bounds,
    opts: &LocalOptions,
) -> Result<(StartRecord, Vec<f64>)>
where
    F: FnMut(&[f64]) -> f64,
{
    if !bounds.contains(start) {
        return Err(Error::Input(format!("start {start:?} lies outside the bounds")));
    }
    if !(opts.ftol > 0.0 && opts.xtol > 0.0) {
        return Err(Error::Input("ftol and xtol must be positive".into()));
    }
    if opts.max_evals == 0 {
        return Err(Error::Input("max_evals must be at least 1".into()));
    }
    let mut f = Counted {
        objective,
        evals: 0,
        max_evals: opts.max_evals,
    };
    let mut tr = TrustRegion::new(&mut f, start, bounds, opts)?;
    let stop = tr.iterate(&mut f)?;
    let best = tr.best();
    Ok((
        StartRecord {
            value: tr.values[best],
            evaluations: f.evals,
            iterations: tr.iterations,
            stop,
        },
        tr.points[best].clone(),
    ))
}

struct TrustRegion<'b> {
    bounds: &'b Bounds,
    opts: LocalOptions,
    points: Vec<Vec<f64>>,
    values: Vec<f64>,
    model: QuadraticModel,
    /// Resolution: lower bound on the trust radius, lowered towards `xtol`
    /// only once the model has been validated at the current scale.
    rho: f64,
    /// Trust radius, never below `rho`.
    delta: f64,
    max_delta: f64,
    iterations: usize,
    /// Set when the initial design could not be completed within budget.
    truncated: bool,
}

impl<'b> TrustRegion<'b> {
    fn new<F: FnMut(&[f64]) -> f64>(
        f: &mut Counted<'_, F>,
        start: &[f64],
        bounds: &'b Bounds,
        opts: &LocalOptions,
    ) -> Result<Self> {
        let rho = (0.1 * bounds.min_width()).max(opts.xtol);
        let max_delta = bounds
            .lower
            .iter()
            .zip(&bounds.upper)
            .map(|(l, u)| (u - l).powi(2))
            .sum::<f64>()
            .sqrt();
        let mut tr = TrustRegion {
            bounds,
            opts: *opts,
            points: Vec::new(),
            values: Vec::new(),
            model: QuadraticModel::zero(start),
            rho,
            delta: rho,
            max_delta,
            iterations: 0,
            truncated: false,
        };
        tr.points.push(start.to_vec());
        tr.values.push(f.eval(start)?);
        tr.rebuild_design(f, start)?;
        Ok(tr)
    }

    fn best(&self) -> usize {
        // first index among equal minima
        (0..self.values.len())
            .min_by(|&a, &b| self.values[a].total_cmp(&self.values[b]).then(a.cmp(&b)))
            .unwrap()
    }

    /// Replaces every point but `center` with the coordinate design
    /// `center ± rho·e_i`. A displacement that the box would cut below half
    /// of `rho` is taken on the other side at twice `rho`.
    fn rebuild_design<F: FnMut(&[f64]) -> f64>(&mut self, f: &mut Counted<'_, F>, center: &[f64]) -> Result<()> {
        let k = self
            .points
            .iter()
            .position(|p| p == center)
            .expect("center is an interpolation point");
        let fc = self.values[k];
        self.points = vec![center.to_vec()];
        self.values = vec![fc];
        let (lo, hi) = (&self.bounds.lower, &self.bounds.upper);
        let h = self.rho;
        for i in 0..center.len() {
            let up_room = hi[i] - center[i];
            let down_room = center[i] - lo[i];
            let (a, b) = match (up_room >= 0.5 * h, down_room >= 0.5 * h) {
                (true, true) => (h.min(up_room), -h.min(down_room)),
                (true, false) => (h.min(up_room), (2.0 * h).min(up_room)),
                (false, true) => (-h.min(down_room), -(2.0 * h).min(down_room)),
                (false, false) => (up_room, -down_room),
            };
            for step in [a, b] {
                if f.exhausted() {
                    self.truncated = true;
                    return Ok(());
                }
                let mut y = center.to_vec();
                y[i] = (y[i] + step).clamp(lo[i], hi[i]);
                let v = f.eval(&y)?;
                self.points.push(y);
                self.values.push(v);
            }
        }
        self.model = QuadraticModel::zero(center);
        let base = self.points[self.best()].clone();
        if !self.model.update(&base, &self.points, &self.values, self.rho) {
            self.model = QuadraticModel::zero(&base);
        }
        Ok(())
    }

    /// Refits the model; rebuilds the design if the points are degenerate.
    fn refit<F: FnMut(&[f64]) -> f64>(&mut self, f: &mut Counted<'_, F>) -> Result<()> {
        let base = self.points[self.best()].clone();
        if !self.model.update(&base, &self.points, &self.values, self.delta) {
            self.rebuild_design(f, &base)?;
        }
        Ok(())
    }

    fn farthest_from(&self, x: &[f64], skip: usize) -> (usize, f64) {
        self.points
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != skip)
            .map(|(j, p)| (j, dist(p, x)))
            .fold((skip, -1.0), |acc, c| if c.1 > acc.1 { c } else { acc })
    }

    fn iterate<F: FnMut(&[f64]) -> f64>(&mut self, f: &mut Counted<'_, F>) -> Result<StopReason> {
        loop {
            if self.truncated || f.exhausted() {
                return Ok(StopReason::Budget);
            }
            let kopt = self.best();
            let xopt = self.points[kopt].clone();
            let fopt = self.values[kopt];
            let step = trsbox::bounded_step(&self.model, &self.bounds.lower, &self.bounds.upper, self.delta);
            let step_norm = norm(&step);
            let predicted = -self.model.step_change(&step);

            if !(predicted > 0.0) || step_norm < 0.5 * self.rho {
                // the model sees no progress at this resolution
                self.delta = (0.5 * self.delta).max(self.rho);
                if !self.improve_geometry(f)? && self.reduce_resolution() {
                    return Ok(StopReason::Xtol);
                }
                continue;
            }

            let trial: Vec<f64> = xopt.iter().zip(&step).map(|(x, s)| x + s).collect();
            let ftrial = f.eval(&trial)?;
            let ratio = (fopt - ftrial) / predicted;

            let anchor = if ftrial < fopt { &trial } else { &xopt };
            let (drop, _) = self.farthest_from(anchor, kopt);
            self.points[drop] = trial;
            self.values[drop] = ftrial;
            self.refit(f)?;

            self.delta = if ratio <= 0.1 {
                0.5 * self.delta
            } else if ratio <= 0.7 {
                step_norm.max(0.5 * self.delta)
            } else {
                (2.0 * step_norm).max(0.5 * self.delta).min(self.max_delta)
            };
            if self.delta <= 1.5 * self.rho {
                self.delta = self.rho;
            }

            if ftrial < fopt {
                self.iterations += 1;
                // only a model built from nearby points may end the run
                if fopt - ftrial < self.opts.ftol && !self.improve_geometry(f)? {
                    return Ok(StopReason::Ftol);
                }
                continue;
            }
            if self.improve_geometry(f)? || self.delta > self.rho {
                continue;
            }
            if self.reduce_resolution() {
                return Ok(StopReason::Xtol);
            }
        }
    }

    /// Lowers `rho` towards `xtol`; true if it is already there.
    fn reduce_resolution(&mut self) -> bool {
        let xtol = self.opts.xtol;
        if self.rho <= xtol {
            return true;
        }
        let ratio = self.rho / xtol;
        let next = if ratio <= 16.0 {
            xtol
        } else if ratio <= 250.0 {
            ratio.sqrt() * xtol
        } else {
            0.1 * self.rho
        };
        self.delta = (0.5 * self.rho).max(next);
        self.rho = next;
        false
    }

    /// If some interpolation point lies beyond `2·delta` from the incumbent,
    /// moves the farthest one back along its ray and refits.
    fn improve_geometry<F: FnMut(&[f64]) -> f64>(&mut self, f: &mut Counted<'_, F>) -> Result<bool> {
        let kopt = self.best();
        let xopt = self.points[kopt].clone();
        let (far, d) = self.farthest_from(&xopt, kopt);
        if d <= 2.0 * self.delta || f.exhausted() {
            return Ok(false);
        }
        let t = (0.1 * d).min(self.delta).max(self.rho) / d;
        let y: Vec<f64> = xopt
            .iter()
            .zip(&self.points[far])
            .zip(self.bounds.lower.iter().zip(&self.bounds.upper))
            .map(|((a, b), (l, u))| (a + t * (b - a)).clamp(*l, *u))
            .collect();
        let v = f.eval(&y)?;
        self.points[far] = y;
        self.values[far] = v;
        self.refit(f)?;
        Ok(true)
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}
