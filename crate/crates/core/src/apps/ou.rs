use gauss_quad::hermite::GaussHermite;
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::{DiagonalizableOperator, NormEstimate, OperatorKind, OperatorMatrix};

pub const MAX_TRUNCATION: usize = 64;
/// Required `‖G - I‖_max` for the Gram matrix of the eigenfunctions.
pub const GRAM_TOL: f64 = 1e-8;

/// One-dimensional Ornstein–Uhlenbeck operator `−½u'' + x u'` on
/// `L²(γ)`, `γ(dx) = π^{-1/2} e^{-x²} dx`, truncated to Hermite degrees `0..=N`.
///
/// Functions are represented by their samples on a `4N`-point Gauss–Hermite
/// grid; `h_k = H_k / √(2^k k!)` are the orthonormal eigenfunctions with
/// eigenvalue `k`.
#[derive(Debug, Clone)]
pub struct OUModel {
    truncation: usize,
    nodes: Vec<f64>,
    /// Quadrature weights for `γ` (sum to 1).
    weights: Vec<f64>,
    /// `values[(i, k)] = h_k(x_i)`
    values: DMatrix<f64>,
    p_index: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OUSummary {
    pub truncation: usize,
    pub grid_points: usize,
    pub gram_defect: f64,
    /// `max_k ‖−½h_k'' + x h_k' − k h_k‖_∞` over the grid, relative to `max |h_k|`.
    pub eigen_residual: f64,
}

/// `h_0..h_{m-1}` at `x` by the three-term recurrence.
fn hermite_row(x: f64, m: usize) -> Vec<f64> {
    let mut h = Vec::with_capacity(m);
    h.push(1.0);
    if m > 1 {
        h.push(std::f64::consts::SQRT_2 * x);
    }
    for k in 1..m.saturating_sub(1) {
        let next = (std::f64::consts::SQRT_2 * x * h[k] - (k as f64).sqrt() * h[k - 1]) / ((k + 1) as f64).sqrt();
        h.push(next);
    }
    h
}

/// Gauss–Hermite nodes polished by Newton on `h_M`, with Christoffel weights
/// `1 / Σ_{k<M} h_k(x)²` (relative accuracy even where `e^{-x²}` underflows
/// the library weights).
fn gauss_grid(m: usize) -> (Vec<f64>, Vec<f64>) {
    let rule = GaussHermite::new(m.try_into().expect("positive size"));
    let mut nodes: Vec<f64> = rule.nodes().copied().collect();
    nodes.sort_by(f64::total_cmp);
    for x in nodes.iter_mut() {
        for _ in 0..3 {
            let h = hermite_row(*x, m + 1);
            let d = (2.0 * m as f64).sqrt() * h[m - 1];
            if d != 0.0 {
                *x -= h[m] / d;
            }
        }
    }
    let weights = nodes
        .iter()
        .map(|&x| 1.0 / hermite_row(x, m).iter().map(|v| v * v).sum::<f64>())
        .collect();
    (nodes, weights)
}

impl OUModel {
    pub fn new(truncation: usize, p_index: f64) -> Result<Self> {
        if truncation == 0 || truncation > MAX_TRUNCATION {
            return Err(Error::Config(format!("truncation must lie in 1..={MAX_TRUNCATION}, got {truncation}")));
        }
        if !(p_index >= 1.0) {
            return Err(Error::Config(format!("p must lie in [1, ∞], got {p_index}")));
        }
        let m = 4 * truncation;
        let (nodes, weights) = gauss_grid(m);
        let values = DMatrix::from_fn(m, truncation + 1, |i, k| hermite_row(nodes[i], truncation + 1)[k]);
        let model = OUModel {
            truncation,
            nodes,
            weights,
            values,
            p_index,
        };
        let defect = model.gram_defect();
        if !(defect <= GRAM_TOL) {
            return Err(Error::Input(format!("Hermite Gram defect {defect:e} exceeds {GRAM_TOL:e}")));
        }
        Ok(model)
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn p_index(&self) -> f64 {
        self.p_index
    }

    /// `max_{j,k} |Σ_i w_i h_j(x_i) h_k(x_i) − δ_jk|`
    pub fn gram_defect(&self) -> f64 {
        let n = self.truncation + 1;
        let mut worst = 0.0f64;
        for j in 0..n {
            for k in j..n {
                let g: f64 = (0..self.nodes.len())
                    .map(|i| self.weights[i] * self.values[(i, j)] * self.values[(i, k)])
                    .sum();
                worst = worst.max((g - if j == k { 1.0 } else { 0.0 }).abs());
            }
        }
        worst
    }

    /// Checks `−½h_k'' + x h_k' = k h_k` at the nodes using
    /// `h_k' = √(2k) h_{k-1}`.
    pub fn eigen_residual(&self) -> f64 {
        let n = self.truncation + 1;
        let mut worst = 0.0f64;
        for (i, &x) in self.nodes.iter().enumerate() {
            let h: Vec<f64> = (0..n).map(|k| self.values[(i, k)]).collect();
            let scale = h.iter().map(|v| v.abs()).fold(1.0, f64::max);
            for k in 0..n {
                let kf = k as f64;
                let d1 = if k >= 1 { (2.0 * kf).sqrt() * h[k - 1] } else { 0.0 };
                let d2 = if k >= 2 { (2.0 * kf).sqrt() * (2.0 * (kf - 1.0)).sqrt() * h[k - 2] } else { 0.0 };
                worst = worst.max((-0.5 * d2 + x * d1 - kf * h[k]).abs() / scale);
            }
        }
        worst
    }

    pub fn summary(&self) -> OUSummary {
        OUSummary {
            truncation: self.truncation,
            grid_points: self.nodes.len(),
            gram_defect: self.gram_defect(),
            eigen_residual: self.eigen_residual(),
        }
    }

    /// The model in Hermite coordinates, an isometry onto the span in `L²(γ)`.
    pub fn spectral_model(&self) -> Result<DiagonalizableOperator> {
        let eig = (0..=self.truncation).map(|k| Complex64::new(k as f64, 0.0)).collect();
        DiagonalizableOperator::diagonal(eig, self.p_index, OperatorKind::Sectorial { omega: 0.0 })
    }

    /// `φ(L)` acting on grid samples: `H diag(φ(k)) Hᵀ W`.
    pub fn grid_operator(&self, phi: impl Fn(f64) -> Complex64) -> Result<OperatorMatrix> {
        let m = self.nodes.len();
        let n = self.truncation + 1;
        let h = self.values.map(|v| Complex64::new(v, 0.0));
        let d = DMatrix::from_fn(n, n, |j, k| if j == k { phi(j as f64) } else { Complex64::new(0.0, 0.0) });
        let right = DMatrix::from_fn(n, m, |k, i| Complex64::new(self.values[(i, k)] * self.weights[i], 0.0));
        OperatorMatrix::new(h * d * right)
    }

    /// `‖φ(L)‖` on the discretised `L^p(γ)`: the grid operator conjugated by
    /// `diag(w_i^{1/p})`.
    pub fn lp_norm(&self, op: &OperatorMatrix, p: f64) -> Result<NormEstimate> {
        let scale: Vec<f64> = self
            .weights
            .iter()
            .map(|w| if p.is_infinite() { 1.0 } else { w.powf(1.0 / p) })
            .collect();
        let m = op.entries();
        let conj = DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * (scale[i] / scale[j]));
        OperatorMatrix::new(conj)?.norm(p)
    }

    /// `‖L^{-is}‖` on the orthogonal complement of the constants.
    pub fn imaginary_power_norm(&self, s: f64, p: f64) -> Result<NormEstimate> {
        let model = self.spectral_model()?.with_p(p)?.injective_part()?;
        if p == 2.0 {
            return model.operator_norm_p(&model.imaginary_power(s)?, 2.0);
        }
        let op = self.grid_operator(|k| {
            if k == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                (Complex64::new(0.0, -s) * k.ln()).exp()
            }
        })?;
        self.lp_norm(&op, p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gram_and_eigen_equation() {
        for n in [4, 16, 64] {
            let m = OUModel::new(n, 2.0).unwrap();
            let s = m.summary();
            assert!(s.gram_defect < GRAM_TOL, "N = {n}: {}", s.gram_defect);
            assert!(s.eigen_residual < 1e-10, "N = {n}: {}", s.eigen_residual);
            assert!((m.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        assert!(OUModel::new(65, 2.0).is_err());
    }

    #[test]
    fn l2_unitarity() {
        let m = OUModel::new(16, 2.0).unwrap();
        for s in [-20.0, -1.0, 0.3, 7.0, 20.0] {
            assert!((m.imaginary_power_norm(s, 2.0).unwrap().value - 1.0).abs() < 1e-8);
        }
        let id = m.grid_operator(|_| Complex64::new(1.0, 0.0)).unwrap();
        // projection onto polynomials of degree ≤ N: an orthogonal projection in L²(γ)
        assert!((m.lp_norm(&id, 2.0).unwrap().value - 1.0).abs() < 1e-8);
    }
}
