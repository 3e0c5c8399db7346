//! Statevector simulation of the QAOA ansatz for Max-Cut.
//!
//! The cost observable is diagonal in the computational basis with
//! eigenvalue equal to the cut value of the basis state (number of cut
//! edges). One ansatz layer applies `exp(-i γ C)` followed by
//! `exp(-i β Σ_i X_i)`, starting from `|+>^n`. Qubit `i` is bit `i` of the
//! amplitude index.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::graphs::Graph;

/// Default qubit capacity of the simulator.
pub const MAX_SIM_QUBITS: usize = 24;

/// Cut value of every basis state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CutTable {
    n: usize,
    values: Vec<u32>,
    max_value: u32,
}

impl CutTable {
    pub fn build(g: &Graph) -> Result<Self> {
        Self::build_with_limit(g, MAX_SIM_QUBITS)
    }

    /// Builds the table one vertex at a time: with vertices `0..k` fixed, the
    /// cut of the induced subgraph on `0..=k` extends the previous table by
    /// the lower neighbours of `k` that land on the other side.
    pub fn build_with_limit(g: &Graph, limit: usize) -> Result<Self> {
        let n = g.n();
        if n > limit.min(32) {
            return Err(Error::Capacity {
                what: "cut table",
                size: n,
                limit: limit.min(32),
            });
        }
        let adj = g.adjacency_masks();
        let mut values = vec![0u32; 1 << n];
        for (k, &nbrs) in adj.iter().enumerate() {
            let half = 1usize << k;
            let lower = nbrs & (half as u64 - 1);
            let (lo, hi) = values[..2 * half].split_at_mut(half);
            for (z, (a, b)) in lo.iter_mut().zip(hi.iter_mut()).enumerate() {
                let z = z as u64;
                let base = *a;
                *a = base + (lower & z).count_ones();
                *b = base + (lower & !z).count_ones();
            }
        }
        let max_value = values.iter().copied().max().unwrap_or(0);
        Ok(CutTable { n, values, max_value })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    pub fn max_value(&self) -> u32 {
        self.max_value
    }
}

/// Depth-`p` angles, wrapped into `β ∈ [0, π)`, `γ ∈ [0, 2π)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QaoaParams {
    betas: Vec<f64>,
    gammas: Vec<f64>,
}

impl QaoaParams {
    pub fn new(betas: Vec<f64>, gammas: Vec<f64>) -> Result<Self> {
        if betas.is_empty() || betas.len() != gammas.len() {
            return Err(Error::Input(format!(
                "need p >= 1 betas and gammas of equal length, got {} and {}",
                betas.len(),
                gammas.len()
            )));
        }
        if let Some(a) = betas.iter().chain(&gammas).find(|a| !a.is_finite()) {
            return Err(Error::Input(format!("non-finite angle {a}")));
        }
        Ok(QaoaParams {
            betas: betas.into_iter().map(|b| wrap(b, PI)).collect(),
            gammas: gammas.into_iter().map(|g| wrap(g, TAU)).collect(),
        })
    }

    pub fn zeros(p: usize) -> Result<Self> {
        Self::new(vec![0.0; p], vec![0.0; p])
    }

    /// Splits an optimizer point `(β_1..β_p, γ_1..γ_p)`.
    pub fn from_point(x: &[f64]) -> Result<Self> {
        if !x.len().is_multiple_of(2) {
            return Err(Error::Input(format!("point of odd length {}", x.len())));
        }
        let (b, g) = x.split_at(x.len() / 2);
        Self::new(b.to_vec(), g.to_vec())
    }

    pub fn to_point(&self) -> Vec<f64> {
        self.betas.iter().chain(&self.gammas).copied().collect()
    }

    pub fn p(&self) -> usize {
        self.betas.len()
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    /// Appends identity layers (`β = γ = 0`) up to depth `p`.
    pub fn padded(&self, p: usize) -> Self {
        let mut out = self.clone();
        out.betas.resize(p.max(self.p()), 0.0);
        out.gammas.resize(p.max(self.p()), 0.0);
        out
    }
}

fn wrap(angle: f64, period: f64) -> f64 {
    let w = angle.rem_euclid(period);
    // rem_euclid can round up to the period itself for tiny negative inputs
    if w >= period {
        0.0
    } else {
        w
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    n: usize,
    amplitudes: Vec<Complex64>,
}

impl Statevector {
    pub fn plus(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_SIM_QUBITS.max(32) {
            return Err(Error::Input(format!("unsupported qubit count {n}")));
        }
        let mut s = Statevector {
            n,
            amplitudes: vec![Complex64::default(); 1 << n],
        };
        s.reset_plus();
        Ok(s)
    }

    /// Builds a state from raw amplitudes; the length must be a power of two.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::Input(format!("amplitude count {len} is not 2^n with n >= 1")));
        }
        Ok(Statevector {
            n: len.trailing_zeros() as usize,
            amplitudes,
        })
    }

    fn reset_plus(&mut self) {
        let a = (self.amplitudes.len() as f64).sqrt().recip();
        self.amplitudes.fill(Complex64::new(a, 0.0));
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Multiplies amplitude `z` by `exp(-i γ values[z])`.
    pub fn apply_phase(&mut self, table: &CutTable, gamma: f64) -> Result<()> {
        if table.n != self.n {
            return Err(Error::Input(format!(
                "cut table on {} qubits applied to a {}-qubit state",
                table.n, self.n
            )));
        }
        self.apply_phase_unchecked(table, gamma);
        Ok(())
    }

    fn apply_phase_unchecked(&mut self, table: &CutTable, gamma: f64) {
        let phases: Vec<Complex64> = (0..=table.max_value)
            .map(|k| Complex64::from_polar(1.0, -gamma * f64::from(k)))
            .collect();
        for (a, &v) in self.amplitudes.iter_mut().zip(&table.values) {
            *a *= phases[v as usize];
        }
    }

    /// Applies `exp(-i β X)` to every qubit: each amplitude pair differing in
    /// bit `i` goes through `[[cos β, -i sin β], [-i sin β, cos β]]`.
    pub fn apply_mixer(&mut self, beta: f64) {
        let (s, c) = beta.sin_cos();
        for i in 0..self.n {
            let stride = 1usize << i;
            for block in self.amplitudes.chunks_exact_mut(2 * stride) {
                let (lo, hi) = block.split_at_mut(stride);
                for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                    let (x, y) = (*a, *b);
                    // -i s y = (s y.im, -s y.re)
                    *a = Complex64::new(c * x.re + s * y.im, c * x.im - s * y.re);
                    *b = Complex64::new(c * y.re + s * x.im, c * y.im - s * x.re);
                }
            }
        }
    }

    /// `Σ_z |a_z|² values[z]`.
    pub fn expectation(&self, table: &CutTable) -> Result<f64> {
        if table.n != self.n {
            return Err(Error::Input("state and cut table dimensions differ".into()));
        }
        Ok(self.expectation_unchecked(table))
    }

    fn expectation_unchecked(&self, table: &CutTable) -> f64 {
        self.amplitudes
            .iter()
            .zip(&table.values)
            .map(|(a, &v)| a.norm_sqr() * f64::from(v))
            .sum()
    }
}

/// `|+>^n`.
pub fn prepare_plus_state(n: usize) -> Result<Statevector> {
    Statevector::plus(n)
}

/// The ansatz state for canonical parameters.
pub fn qaoa_state(table: &CutTable, params: &QaoaParams) -> Statevector {
    qaoa_state_angles(table, &params.betas, &params.gammas).expect("QaoaParams has matching lengths")
}

/// The ansatz state for raw (unwrapped) angles.
pub fn qaoa_state_angles(table: &CutTable, betas: &[f64], gammas: &[f64]) -> Result<Statevector> {
    let mut ev = Evaluator::new(table);
    ev.prepare(betas, gammas)?;
    Ok(ev.state)
}

/// `f(β, γ) = <ψ(β, γ)| C |ψ(β, γ)>`.
pub fn expectation(table: &CutTable, params: &QaoaParams) -> f64 {
    Evaluator::new(table)
        .expectation(&params.betas, &params.gammas)
        .expect("QaoaParams has matching lengths")
}

/// Repeated objective evaluation against one cut table, reusing a private
/// scratch statevector.
#[derive(Debug, Clone)]
pub struct Evaluator<'a> {
    table: &'a CutTable,
    state: Statevector,
}

impl<'a> Evaluator<'a> {
    pub fn new(table: &'a CutTable) -> Self {
        Evaluator {
            table,
            state: Statevector {
                n: table.n,
                amplitudes: vec![Complex64::default(); 1 << table.n],
            },
        }
    }

    pub fn table(&self) -> &CutTable {
        self.table
    }

    fn prepare(&mut self, betas: &[f64], gammas: &[f64]) -> Result<()> {
        if betas.len() != gammas.len() {
            return Err(Error::Input(format!(
                "{} betas but {} gammas",
                betas.len(),
                gammas.len()
            )));
        }
        self.state.reset_plus();
        for (&beta, &gamma) in betas.iter().zip(gammas) {
            self.state.apply_phase_unchecked(self.table, gamma);
            self.state.apply_mixer(beta);
        }
        Ok(())
    }

    pub fn expectation(&mut self, betas: &[f64], gammas: &[f64]) -> Result<f64> {
        self.prepare(betas, gammas)?;
        Ok(self.state.expectation_unchecked(self.table))
    }

    /// Objective at an optimizer point `(β_1..β_p, γ_1..γ_p)`.
    pub fn expectation_at(&mut self, x: &[f64]) -> Result<f64> {
        if !x.len().is_multiple_of(2) {
            return Err(Error::Input(format!("point of odd length {}", x.len())));
        }
        let (b, g) = x.split_at(x.len() / 2);
        self.expectation(b, g)
    }

    pub fn state(&self) -> &Statevector {
        &self.state
    }
}
