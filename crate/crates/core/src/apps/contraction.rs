use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, RngExt};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::{DiagonalizableOperator, OperatorKind, OperatorMatrix};

/// Eigenvalues of `A = I − P` below this are taken as exact zeros.
pub const KERNEL_TOL: f64 = 1e-12;
const STRUCTURE_TOL: f64 = 1e-12;
/// Times at which semigroup contractivity is checked.
pub const CHECK_TIMES: [f64; 3] = [0.1, 1.0, 10.0];

/// `A = I − P` for a symmetric, entrywise nonnegative, substochastic `P` on
/// `{1..n}` with counting measure.
#[derive(Debug, Clone)]
pub struct ContractionModel {
    label: String,
    transition: DMatrix<f64>,
    generator: DiagonalizableOperator,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractivityReport {
    /// `(t, ‖e^{-tA}‖_{1→1}, ‖e^{-tA}‖_{∞→∞})`
    pub norms: Vec<(f64, f64, f64)>,
    pub spectral_radius: f64,
    pub contractive: bool,
}

impl ContractionModel {
    pub fn new(label: impl Into<String>, transition: DMatrix<f64>, p_index: f64) -> Result<Self> {
        let n = transition.nrows();
        if n == 0 || !transition.is_square() {
            return Err(Error::Input("transition matrix must be square and nonempty".into()));
        }
        if transition.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::Input("transition matrix must be finite and entrywise nonnegative".into()));
        }
        if (&transition - transition.transpose()).amax() > STRUCTURE_TOL {
            return Err(Error::Input("transition matrix is not symmetric".into()));
        }
        if let Some(r) = (0..n).map(|i| transition.row(i).sum()).find(|&r| r > 1.0 + STRUCTURE_TOL) {
            return Err(Error::Input(format!("row sum {r} exceeds 1")));
        }
        let a = DMatrix::identity(n, n) - &transition;
        let eig = SymmetricEigen::new(a);
        let values = eig
            .eigenvalues
            .iter()
            .map(|&l| Complex64::new(if l.abs() < KERNEL_TOL { 0.0 } else { l }, 0.0))
            .collect();
        let basis = eig.eigenvectors.map(|x| Complex64::new(x, 0.0));
        let generator = DiagonalizableOperator::new(values, basis, p_index, OperatorKind::Sectorial { omega: 0.0 })?;
        Ok(ContractionModel {
            label: label.into(),
            transition,
            generator,
        })
    }

    /// Lazy random walk on the n-cycle: `P = (S + Sᵀ)/2`.
    pub fn cycle_walk(n: usize, p_index: f64) -> Result<Self> {
        if n < 3 {
            return Err(Error::Config(format!("cycle needs n >= 3, got {n}")));
        }
        let p = DMatrix::from_fn(n, n, |i, j| if (i + 1) % n == j || (j + 1) % n == i { 0.5 } else { 0.0 });
        Self::new(format!("cycle{n}"), p, p_index)
    }

    /// The swap on two points; `ran A` is spanned by `(1, −1)`.
    pub fn swap(p_index: f64) -> Result<Self> {
        Self::new("swap", DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]), p_index)
    }

    /// Sparse symmetric nonnegative weights, scaled to maximal row sum in [0.5, 1].
    pub fn random<R: Rng + ?Sized>(rng: &mut R, n: usize, p_index: f64) -> Result<Self> {
        let mut w = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                if rng.random_bool(0.5) {
                    let x: f64 = rng.random_range(0.0..1.0);
                    w[(i, j)] = x;
                    w[(j, i)] = x;
                }
            }
        }
        let max_row = (0..n).map(|i| w.row(i).sum()).fold(0.0, f64::max);
        if max_row > 0.0 {
            let target: f64 = rng.random_range(0.5..=1.0);
            w *= target / max_row;
            let after = (0..n).map(|i| w.row(i).sum()).fold(0.0, f64::max);
            if after > 1.0 {
                w /= after;
            }
        }
        Self::new(format!("random{n}"), w, p_index)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.transition.nrows()
    }

    pub fn transition(&self) -> &DMatrix<f64> {
        &self.transition
    }

    pub fn generator(&self) -> &DiagonalizableOperator {
        &self.generator
    }

    pub fn p_index(&self) -> f64 {
        self.generator.p_index()
    }

    pub fn with_p(&self, p: f64) -> Result<Self> {
        Ok(ContractionModel {
            generator: self.generator.with_p(p)?,
            ..self.clone()
        })
    }

    /// `e^{-tA}` on the whole space.
    pub fn semigroup(&self, t: f64) -> Result<OperatorMatrix> {
        self.generator.map_spectrum(|l| (-t * l).exp())
    }

    /// ℓ¹ and ℓ^∞ norms of `e^{-tA}` at [`CHECK_TIMES`] and the spectral radius of `P`.
    pub fn contractivity(&self) -> Result<ContractivityReport> {
        let mut norms = Vec::new();
        for t in CHECK_TIMES {
            let s = self.semigroup(t)?;
            norms.push((t, s.norm(1.0)?.value, s.norm(f64::INFINITY)?.value));
        }
        let spectral_radius = self.generator.eig().iter().map(|l| (1.0 - l.re).abs()).fold(0.0, f64::max);
        let contractive = spectral_radius <= 1.0 + 1e-10 && norms.iter().all(|n| n.1 <= 1.0 + 1e-10 && n.2 <= 1.0 + 1e-10);
        Ok(ContractivityReport {
            norms,
            spectral_radius,
            contractive,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn models_are_contractive() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut models = vec![ContractionModel::cycle_walk(8, 2.0).unwrap(), ContractionModel::swap(2.0).unwrap()];
        for n in 2..=8 {
            models.push(ContractionModel::random(&mut rng, n, 2.0).unwrap());
        }
        for m in &models {
            let r = m.contractivity().unwrap();
            assert!(r.contractive, "{}: {r:?}", m.label());
        }
    }

    #[test]
    fn swap_has_one_dimensional_range() {
        let m = ContractionModel::swap(4.0).unwrap();
        let inj = m.generator().injective_part().unwrap();
        assert_eq!(inj.rank(), 1);
        assert!((inj.eig()[0].re - 2.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_transitions() {
        let asym = DMatrix::from_row_slice(2, 2, &[0.0, 0.5, 0.2, 0.0]);
        assert!(ContractionModel::new("a", asym, 2.0).is_err());
        let heavy = DMatrix::from_row_slice(2, 2, &[0.6, 0.6, 0.6, 0.0]);
        assert!(ContractionModel::new("h", heavy, 2.0).is_err());
        let neg = DMatrix::from_row_slice(2, 2, &[0.0, -0.1, -0.1, 0.0]);
        assert!(ContractionModel::new("n", neg, 2.0).is_err());
    }
}
