use rand::Rng;

use super::{local_run, Bounds, LocalOptions, OptResult};
use crate::error::{Error, Result};
use crate::rng;

/// The `index`-th random start: one uniform draw per coordinate from
/// `ChaCha8Rng` seeded with `derive_seed(seed, [index])`.
pub fn random_start(bounds: &Bounds, seed: u64, index: u64) -> Vec<f64> {
    let mut rng = rng::stream(rng::derive_seed(seed, &[index]));
    bounds
        .lower()
        .iter()
        .zip(bounds.upper())
        .map(|(&l, &u)| l + (u - l) * rng.random::<f64>())
        .collect()
}

/// Restarts [`local_optimize`](super::local_optimize) from uniform random
/// points until `total_budget` evaluations are spent.
pub fn multistart<F>(
    objective: F,
    bounds: &Bounds,
    total_budget: u64,
    seed: u64,
    opts: &LocalOptions,
) -> Result<OptResult>
where
    F: FnMut(&[f64]) -> f64,
{
    multistart_with_starts(objective, bounds, total_budget, seed, opts, &[])
}

/// As [`multistart`], but runs the given `initial` starts before the random
/// ones. `opts.max_evals` is ignored; each start may use whatever budget
/// remains. Ties between starts go to the earlier start.
pub fn multistart_with_starts<F>(
    mut objective: F,
    bounds: &Bounds,
    total_budget: u64,
    seed: u64,
    opts: &LocalOptions,
    initial: &[Vec<f64>],
) -> Result<OptResult>
where
    F: FnMut(&[f64]) -> f64,
{
    if total_budget == 0 {
        return Err(Error::Input("total budget must be at least 1".into()));
    }
    let mut used = 0u64;
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut history = Vec::new();
    let mut random_index = 0u64;

    while used < total_budget {
        let start = match initial.get(history.len()) {
            Some(x) => x.clone(),
            None => {
                let x = random_start(bounds, seed, random_index);
                random_index += 1;
                x
            }
        };
        let local = LocalOptions {
            max_evals: total_budget - used,
            ..*opts
        };
        let (record, point) = local_run(&mut objective, &start, bounds, &local)?;
        used += record.evaluations;
        if best.as_ref().is_none_or(|(v, _)| record.value < *v) {
            best = Some((record.value, point));
        }
        history.push(record);
    }

    let (best_value, best_point) = best.expect("budget >= 1 runs at least one start");
    Ok(OptResult {
        best_point,
        best_value,
        evaluations_used: used,
        starts_completed: history.len(),
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::Graph;
    use crate::sim::{CutTable, Evaluator};

    fn wavy(x: &[f64]) -> f64 {
        x.iter()
            .enumerate()
            .map(|(i, v)| ((i + 2) as f64 * v).sin() * v.cos())
            .sum()
    }

    #[test]
    fn budget_of_one() {
        let b = Bounds::qaoa(1).unwrap();
        let mut seen = Vec::new();
        let r = multistart(
            |x: &[f64]| {
                seen.push(x.to_vec());
                wavy(x)
            },
            &b,
            1,
            5,
            &LocalOptions::default(),
        )
        .unwrap();
        assert_eq!(r.evaluations_used, 1);
        assert_eq!(seen.len(), 1);
        assert_eq!(r.best_point, seen[0]);
        assert_eq!(r.best_value, wavy(&seen[0]));
        assert_eq!(r.converged(), vec![false]);
        assert!(multistart(wavy, &b, 0, 5, &LocalOptions::default()).is_err());
    }

    #[test]
    fn deterministic_given_seed() {
        let b = Bounds::qaoa(2).unwrap();
        let a = multistart(wavy, &b, 3000, 9, &LocalOptions::default()).unwrap();
        let c = multistart(wavy, &b, 3000, 9, &LocalOptions::default()).unwrap();
        assert_eq!(a, c);
        assert_eq!(a.evaluations_used, 3000);
        assert!(a.starts_completed > 1);
        let other = multistart(wavy, &b, 3000, 10, &LocalOptions::default()).unwrap();
        assert_ne!(a.history, other.history);
    }

    #[test]
    fn larger_budget_never_worse() {
        let b = Bounds::qaoa(2).unwrap();
        let mut prev = f64::INFINITY;
        for budget in [10, 100, 500, 2000, 5000] {
            let r = multistart(wavy, &b, budget, 3, &LocalOptions::default()).unwrap();
            assert!(r.best_value <= prev);
            prev = r.best_value;
        }
    }

    #[test]
    fn explicit_starts_run_first() {
        let b = Bounds::qaoa(1).unwrap();
        let mut first = None;
        let start = vec![1.0, 1.0];
        multistart_with_starts(
            |x: &[f64]| {
                first.get_or_insert_with(|| x.to_vec());
                wavy(x)
            },
            &b,
            50,
            1,
            &LocalOptions::default(),
            std::slice::from_ref(&start),
        )
        .unwrap();
        assert_eq!(first.unwrap(), start);
    }

    #[test]
    fn random_starts_fill_the_box() {
        let b = Bounds::qaoa(1).unwrap();
        let pts: Vec<_> = (0..2000).map(|i| random_start(&b, 77, i)).collect();
        assert!(pts.iter().all(|x| b.contains(x)));
        let mean_beta = pts.iter().map(|x| x[0]).sum::<f64>() / 2000.0;
        let mean_gamma = pts.iter().map(|x| x[1]).sum::<f64>() / 2000.0;
        assert!((mean_beta - std::f64::consts::FRAC_PI_2).abs() < 0.1);
        assert!((mean_gamma - std::f64::consts::PI).abs() < 0.2);
    }

    #[test]
    fn single_edge_reaches_optimum() {
        let t = CutTable::build(&Graph::complete(2).unwrap()).unwrap();
        let mut ev = Evaluator::new(&t);
        let r = multistart(
            |x: &[f64]| -ev.expectation_at(x).unwrap(),
            &Bounds::qaoa(1).unwrap(),
            10_000,
            1,
            &LocalOptions::default(),
        )
        .unwrap();
        assert!(-r.best_value >= 1.0 - 1e-3);
    }
}
