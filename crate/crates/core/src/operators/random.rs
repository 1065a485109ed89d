//! Seeded random operator models.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, RngExt};

use crate::error::Result;

use super::{DiagonalizableOperator, OperatorKind};

/// Standard complex Gaussian (E|z|² = 1) by Box–Muller.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let u: f64 = rng.random_range(f64::MIN_POSITIVE..1.0);
    let t: f64 = rng.random_range(0.0..2.0 * PI);
    Complex64::from_polar((-u.ln()).sqrt(), t)
}

pub fn complex_gaussian_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DVector<Complex64> {
    DVector::from_fn(n, |_, _| complex_gaussian(rng))
}

/// `V = I + 0.3 G/√n`: non-normal but well conditioned.
pub fn perturbed_identity<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DMatrix<Complex64> {
    let s = 0.3 / (n as f64).sqrt();
    DMatrix::identity(n, n) + DMatrix::from_fn(n, n, |_, _| complex_gaussian(rng) * s)
}

/// Unitary factor of a complex Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(n, n, |_, _| complex_gaussian(rng)).qr().q()
}

/// Eigenvalues with Re ∈ [-2, 2], |Im| ≤ ω, in a perturbed-identity basis.
pub fn random_strip_type<R: Rng + ?Sized>(rng: &mut R, n: usize, omega: f64, p: f64) -> Result<DiagonalizableOperator> {
    let eig = (0..n)
        .map(|_| {
            let im = if omega > 0.0 { rng.random_range(-omega..=omega) } else { 0.0 };
            Complex64::new(rng.random_range(-2.0..=2.0), im)
        })
        .collect();
    DiagonalizableOperator::new(eig, perturbed_identity(rng, n), p, OperatorKind::StripType { omega })
}

/// Real spectrum in [-2, 2], unitary eigenbasis.
pub fn random_self_adjoint<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Result<DiagonalizableOperator> {
    let eig = (0..n).map(|_| Complex64::new(rng.random_range(-2.0..=2.0), 0.0)).collect();
    DiagonalizableOperator::new(eig, random_unitary(rng, n), 2.0, OperatorKind::StripType { omega: 0.0 })
}

/// Eigenvalues r e^{iθ}, log r uniform in [ln 0.2, ln 5], |θ| ≤ ω.
pub fn random_sectorial<R: Rng + ?Sized>(rng: &mut R, n: usize, omega: f64, p: f64) -> Result<DiagonalizableOperator> {
    let eig = (0..n)
        .map(|_| {
            let r = rng.random_range(0.2f64.ln()..=5f64.ln()).exp();
            let t = if omega > 0.0 { rng.random_range(-omega..=omega) } else { 0.0 };
            Complex64::from_polar(r, t)
        })
        .collect();
    DiagonalizableOperator::new(eig, perturbed_identity(rng, n), p, OperatorKind::Sectorial { omega })
}

/// Positive spectrum in [0.2, 5] on a unitary basis.
pub fn random_positive_self_adjoint<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Result<DiagonalizableOperator> {
    let eig = (0..n)
        .map(|_| Complex64::new(rng.random_range(0.2f64.ln()..=5f64.ln()).exp(), 0.0))
        .collect();
    DiagonalizableOperator::new(eig, random_unitary(rng, n), 2.0, OperatorKind::Sectorial { omega: 0.0 })
}
