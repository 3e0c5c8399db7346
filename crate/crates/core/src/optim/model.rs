//! Quadratic interpolation model with least-Frobenius-norm Hessian updates.
//!
//! Given interpolation points `y_j` with values `f_j` and a previous model
//! `q`, the updated model is `q + c + g·w + ½ wᵀ D w` (`w = x - base`) where
//! `D = Σ λ_j w_j w_jᵀ` and `(λ, c, g)` solve
//!
//! ```text
//! [ A   Xᵀ ] [ λ     ]   [ f - q(y) ]
//! [ X   0  ] [ (c,g) ] = [ 0        ]
//! ```
//!
//! with `A_jk = ½ (w_j · w_k)²` and `X` the columns `(1, w_j)`. This is the
//! interpolating quadratic whose Hessian changes least in Frobenius norm.
//! The system is assembled in coordinates scaled by the trust-region radius.

#[derive(Debug, Clone)]
pub(crate) struct QuadraticModel {
    pub base: Vec<f64>,
    pub constant: f64,
    pub gradient: Vec<f64>,
    /// Dense symmetric Hessian, row-major `d × d`.
    pub hessian: Vec<f64>,
}

impl QuadraticModel {
    pub fn zero(base: &[f64]) -> Self {
        let d = base.len();
        QuadraticModel {
            base: base.to_vec(),
            constant: 0.0,
            gradient: vec![0.0; d],
            hessian: vec![0.0; d * d],
        }
    }

    pub fn dim(&self) -> usize {
        self.base.len()
    }

    pub fn hess_vec(&self, v: &[f64]) -> Vec<f64> {
        let d = self.dim();
        (0..d)
            .map(|i| self.hessian[i * d..(i + 1) * d].iter().zip(v).map(|(h, x)| h * x).sum())
            .collect()
    }

    /// Model change along `s` from the base: `g·s + ½ sᵀHs`.
    pub fn step_change(&self, s: &[f64]) -> f64 {
        let hs = self.hess_vec(s);
        s.iter()
            .zip(&self.gradient)
            .zip(&hs)
            .map(|((si, gi), hi)| si * gi + 0.5 * si * hi)
            .sum()
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let s: Vec<f64> = x.iter().zip(&self.base).map(|(a, b)| a - b).collect();
        self.constant + self.step_change(&s)
    }

    /// Re-expresses the same quadratic around a new base point.
    pub fn rebase(&mut self, base: &[f64]) {
        let s: Vec<f64> = base.iter().zip(&self.base).map(|(a, b)| a - b).collect();
        let hs = self.hess_vec(&s);
        self.constant += self.step_change(&s);
        for (g, h) in self.gradient.iter_mut().zip(hs) {
            *g += h;
        }
        self.base = base.to_vec();
    }

    /// Least-change update interpolating `(points[j], values[j])` around
    /// `base`. Returns `false` if the interpolation system is singular, in
    /// which case the model is left untouched.
    pub fn update(&mut self, base: &[f64], points: &[Vec<f64>], values: &[f64], scale: f64) -> bool {
        let d = self.dim();
        let m = points.len();
        let mut next = self.clone();
        next.rebase(base);

        let w: Vec<Vec<f64>> = points
            .iter()
            .map(|y| y.iter().zip(base).map(|(a, b)| (a - b) / scale).collect())
            .collect();
        let size = m + d + 1;
        let mut mat = vec![0.0; size * size];
        let mut rhs = vec![0.0; size];
        for j in 0..m {
            for k in 0..m {
                let dot: f64 = w[j].iter().zip(&w[k]).map(|(a, b)| a * b).sum();
                mat[j * size + k] = 0.5 * dot * dot;
            }
            mat[j * size + m] = 1.0;
            mat[m * size + j] = 1.0;
            for i in 0..d {
                mat[j * size + m + 1 + i] = w[j][i];
                mat[(m + 1 + i) * size + j] = w[j][i];
            }
            rhs[j] = values[j] - next.value(&points[j]);
        }
        let Some(sol) = solve(mat, rhs, size) else {
            return false;
        };
        if sol.iter().any(|v| !v.is_finite()) {
            return false;
        }

        next.constant += sol[m];
        for i in 0..d {
            next.gradient[i] += sol[m + 1 + i] / scale;
        }
        let inv_scale2 = 1.0 / (scale * scale);
        for (lambda, wj) in sol[..m].iter().zip(&w) {
            for a in 0..d {
                for b in 0..d {
                    next.hessian[a * d + b] += lambda * wj[a] * wj[b] * inv_scale2;
                }
            }
        }
        *self = next;
        true
    }
}

/// Gaussian elimination with partial pivoting on a dense row-major system.
fn solve(mut a: Vec<f64>, mut b: Vec<f64>, n: usize) -> Option<Vec<f64>> {
    let norm = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if norm == 0.0 {
        return None;
    }
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))
            .unwrap();
        if a[pivot * n + col].abs() <= 1e-13 * norm {
            return None;
        }
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
            }
            b.swap(col, pivot);
        }
        let diag = a[col * n + col];
        for row in col + 1..n {
            let factor = a[row * n + col] / diag;
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[row * n + k] -= factor * a[col * n + k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let tail: f64 = (row + 1..n).map(|k| a[row * n + k] * x[k]).sum();
        x[row] = (b[row] - tail) / a[row * n + row];
    }
    Some(x)
}
