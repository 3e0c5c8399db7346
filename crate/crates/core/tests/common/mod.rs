//! Independent reference implementations used as test oracles.
#![allow(dead_code)]

use itertools::Itertools;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use qaoa_core::graphs::Graph;

/// Cut value of basis index `z` by direct per-edge summation.
pub fn cut_of(g: &Graph, z: usize) -> f64 {
    g.edges().iter().filter(|&&(u, v)| (z >> u) & 1 != (z >> v) & 1).count() as f64
}

/// Dense-matrix QAOA simulator: the mixer `exp(-iβ Σ X_i)` is formed from
/// the eigendecomposition of the full `2^n × 2^n` matrix `Σ X_i`.
pub struct DenseQaoa {
    cuts: Vec<f64>,
    eigvecs: DMatrix<f64>,
    eigvals: DVector<f64>,
}

impl DenseQaoa {
    pub fn new(g: &Graph) -> Self {
        let dim = 1usize << g.n();
        let mut b = DMatrix::<f64>::zeros(dim, dim);
        for z in 0..dim {
            for i in 0..g.n() {
                b[(z ^ (1 << i), z)] += 1.0;
            }
        }
        let eig = SymmetricEigen::new(b);
        DenseQaoa {
            cuts: (0..dim).map(|z| cut_of(g, z)).collect(),
            eigvecs: eig.eigenvectors,
            eigvals: eig.eigenvalues,
        }
    }

    fn mixer(&self, beta: f64) -> DMatrix<Complex64> {
        let v = self.eigvecs.map(|x| Complex64::new(x, 0.0));
        let d = DMatrix::from_diagonal(&self.eigvals.map(|l| Complex64::from_polar(1.0, -beta * l)));
        &v * d * v.transpose()
    }

    pub fn state(&self, betas: &[f64], gammas: &[f64]) -> DVector<Complex64> {
        let dim = self.cuts.len();
        let mut psi = DVector::from_element(dim, Complex64::new(1.0 / (dim as f64).sqrt(), 0.0));
        for (&b, &g) in betas.iter().zip(gammas) {
            for (a, c) in psi.iter_mut().zip(&self.cuts) {
                *a *= Complex64::from_polar(1.0, -g * c);
            }
            psi = self.mixer(b) * psi;
        }
        psi
    }

    pub fn expectation(&self, betas: &[f64], gammas: &[f64]) -> f64 {
        self.state(betas, gammas)
            .iter()
            .zip(&self.cuts)
            .map(|(a, c)| a.norm_sqr() * c)
            .sum()
    }
}

/// Graph edit distance by enumerating every vertex bijection after padding
/// the smaller graph with isolated vertices.
pub fn ged_bruteforce(g1: &Graph, g2: &Graph) -> usize {
    let m = g1.n().max(g2.n());
    let adj = |g: &Graph| {
        let mut a = vec![vec![false; m]; m];
        for &(u, v) in g.edges() {
            a[u][v] = true;
            a[v][u] = true;
        }
        a
    };
    let (a, b) = (adj(g1), adj(g2));
    let best = (0..m)
        .permutations(m)
        .map(|pi| {
            (0..m)
                .tuple_combinations()
                .filter(|&(u, v)| a[u][v] != b[pi[u]][pi[v]])
                .count()
        })
        .min()
        .unwrap_or(0);
    best + g1.n().abs_diff(g2.n())
}

/// Maximum of `f` over the `101 × 201` grid on `[0, π] × [0, 2π]`.
pub fn grid_max(mut f: impl FnMut(f64, f64) -> f64) -> (f64, f64, f64) {
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    for i in 0..=100 {
        let beta = std::f64::consts::PI * i as f64 / 100.0;
        for j in 0..=200 {
            let gamma = std::f64::consts::TAU * j as f64 / 200.0;
            let v = f(beta, gamma);
            if v > best.0 {
                best = (v, beta, gamma);
            }
        }
    }
    best
}
