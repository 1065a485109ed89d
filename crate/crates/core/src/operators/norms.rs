use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::random::complex_gaussian_vector;

const RANDOM_STARTS: usize = 32;
const MAX_ITER: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormMethod {
    ColumnSum,
    RowSum,
    Singular,
    /// Power-type iteration; a lower estimate.
    PowerIteration,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub value: f64,
    pub p: f64,
    pub method: NormMethod,
    /// Exact up to rounding (false for lower estimates).
    pub exact: bool,
    /// Index of the start achieving the max: random starts first, then
    /// coordinate (or basis) vectors.
    pub best_start: Option<usize>,
}

pub fn vector_p_norm(x: &DVector<Complex64>, p: f64) -> f64 {
    if p.is_infinite() {
        x.iter().map(|c| c.norm()).fold(0.0, f64::max)
    } else if p == 1.0 {
        x.iter().map(|c| c.norm()).sum()
    } else if p == 2.0 {
        x.norm()
    } else {
        let m = x.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if m == 0.0 {
            return 0.0;
        }
        m * x.iter().map(|c| (c.norm() / m).powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

/// Norming functional of `y` in ℓ^p: `‖z‖_q = 1`, `⟨z, y⟩ = ‖y‖_p`.
fn dual_vector(y: &DVector<Complex64>, p: f64) -> DVector<Complex64> {
    let n = vector_p_norm(y, p);
    if n == 0.0 {
        return DVector::zeros(y.len());
    }
    y.map(|c| {
        let a = c.norm();
        if a == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            c / a * (a / n).powf(p - 1.0)
        }
    })
}

fn check_p(p: f64) -> Result<()> {
    if !(p >= 1.0) {
        return Err(Error::Config(format!("p must lie in [1, ∞], got {p}")));
    }
    Ok(())
}

/// `‖M‖_{ℓ^p → ℓ^p}`: exact for p ∈ {1, 2, ∞}, otherwise the best of a
/// power-type iteration from random and coordinate starts.
pub fn matrix_p_norm(m: &DMatrix<Complex64>, p: f64, seed: u64) -> Result<NormEstimate> {
    check_p(p)?;
    if m.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::Input("matrix has non-finite entries".into()));
    }
    let exact = |value, method| NormEstimate {
        value,
        p,
        method,
        exact: true,
        best_start: None,
    };
    if m.is_empty() {
        return Ok(exact(0.0, NormMethod::Singular));
    }
    if p == 1.0 {
        let v = m.column_iter().map(|c| c.iter().map(|x| x.norm()).sum::<f64>()).fold(0.0, f64::max);
        return Ok(exact(v, NormMethod::ColumnSum));
    }
    if p.is_infinite() {
        let v = m.row_iter().map(|r| r.iter().map(|x| x.norm()).sum::<f64>()).fold(0.0, f64::max);
        return Ok(exact(v, NormMethod::RowSum));
    }
    if p == 2.0 {
        let v = m.singular_values().max();
        return Ok(exact(v, NormMethod::Singular));
    }
    Ok(power_estimate(m, None, p, seed))
}

/// `sup_{y ∈ Y} ‖M y‖_p / ‖y‖_p` for `Y` spanned by the columns of `basis`.
/// Exact for p = 2; a lower estimate otherwise.
pub fn subspace_p_norm(
    m: &DMatrix<Complex64>,
    basis: &DMatrix<Complex64>,
    p: f64,
    seed: u64,
) -> Result<NormEstimate> {
    check_p(p)?;
    if basis.nrows() != m.ncols() {
        return Err(Error::Input(format!(
            "subspace basis has {} rows, matrix has {} columns",
            basis.nrows(),
            m.ncols()
        )));
    }
    if basis.ncols() == m.ncols() {
        return matrix_p_norm(m, p, seed);
    }
    if basis.ncols() == 0 {
        return Err(Error::Degenerate("empty subspace".into()));
    }
    if p == 2.0 {
        let q = basis.clone().qr().q();
        let v = (m * q).singular_values().max();
        return Ok(NormEstimate {
            value: v,
            p,
            method: NormMethod::Singular,
            exact: true,
            best_start: None,
        });
    }
    Ok(power_estimate(m, Some(basis), p, seed))
}

/// Riesz–Thorin upper bound `‖M‖₁^{1/p} ‖M‖_∞^{1-1/p}`.
pub fn interpolation_upper_bound(m: &DMatrix<Complex64>, p: f64) -> Result<f64> {
    check_p(p)?;
    let one = matrix_p_norm(m, 1.0, 0)?.value;
    let inf = matrix_p_norm(m, f64::INFINITY, 0)?.value;
    if p.is_infinite() {
        return Ok(inf);
    }
    Ok(one.powf(1.0 / p) * inf.powf(1.0 - 1.0 / p))
}

/// Higham-style iteration. With a subspace, iterates are projected back onto
/// it (least squares in the basis) and only ratios of vectors in the
/// subspace are recorded, so every value is attained.
fn power_estimate(m: &DMatrix<Complex64>, basis: Option<&DMatrix<Complex64>>, p: f64, seed: u64) -> NormEstimate {
    let n = m.ncols();
    let q = p / (p - 1.0);
    let project = |x: DVector<Complex64>| -> DVector<Complex64> {
        match basis {
            None => x,
            Some(b) => {
                let c = b.clone().svd(true, true).solve(&x, 1e-13).expect("SVD computed with U and V");
                b * c
            }
        }
    };
    let mut starts: Vec<DVector<Complex64>> = {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..RANDOM_STARTS)
            .map(|_| project(complex_gaussian_vector(&mut rng, n)))
            .collect()
    };
    match basis {
        None => starts.extend((0..n).map(|j| {
            let mut e = DVector::zeros(n);
            e[j] = Complex64::new(1.0, 0.0);
            e
        })),
        Some(b) => starts.extend(b.column_iter().map(|c| c.into_owned())),
    }
    let ratio = |x: &DVector<Complex64>| {
        let d = vector_p_norm(x, p);
        if d == 0.0 {
            0.0
        } else {
            vector_p_norm(&(m * x), p) / d
        }
    };
    let results: Vec<f64> = starts
        .into_par_iter()
        .map(|x0| {
            let mut x = x0;
            let mut best = ratio(&x);
            for _ in 0..MAX_ITER {
                let nx = vector_p_norm(&x, p);
                if nx == 0.0 {
                    break;
                }
                x /= Complex64::new(nx, 0.0);
                let y = m * &x;
                if vector_p_norm(&y, p) == 0.0 {
                    break;
                }
                let z = dual_vector(&y, p);
                let w = m.adjoint() * z;
                let gain = vector_p_norm(&w, q);
                let along = w.dotc(&x).re;
                let next = project(dual_vector(&w, q));
                let r = ratio(&next);
                if r > best {
                    best = r;
                }
                if gain <= along * (1.0 + 1e-12) || vector_p_norm(&(&next - &x), p) < 1e-13 {
                    break;
                }
                x = next;
            }
            best
        })
        .collect();
    let (idx, value) = results
        .iter()
        .copied()
        .enumerate()
        .fold((0, 0.0), |b, (i, v)| if v > b.1 { (i, v) } else { b });
    NormEstimate {
        value,
        p,
        method: NormMethod::PowerIteration,
        exact: false,
        best_start: Some(idx),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngExt;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_and_diagonal() {
        let i = DMatrix::<Complex64>::identity(3, 3);
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![c(2.0, 0.0), c(1.0, 0.0)]));
        for p in [1.0, 1.5, 2.0, 4.0, f64::INFINITY] {
            assert!((matrix_p_norm(&i, p, 1).unwrap().value - 1.0).abs() < 1e-12);
            assert!((matrix_p_norm(&d, p, 1).unwrap().value - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sphere_oracle_p4() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let m = DMatrix::from_fn(2, 2, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let est = matrix_p_norm(&m, 4.0, 0).unwrap();
        let mut oracle = 0.0f64;
        for _ in 0..100_000 {
            let x = complex_gaussian_vector(&mut rng, 2);
            oracle = oracle.max(vector_p_norm(&(&m * &x), 4.0) / vector_p_norm(&x, 4.0));
        }
        assert!(est.value >= oracle * (1.0 - 1e-9));
        assert!((est.value - oracle).abs() <= 5e-3 * oracle, "{} vs {oracle}", est.value);
        assert!(est.value <= interpolation_upper_bound(&m, 4.0).unwrap() * (1.0 + 1e-12));
    }

    #[test]
    fn subspace_norm_two() {
        // M = diag(5, 1) restricted to span(e₂) has norm 1.
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![c(5.0, 0.0), c(1.0, 0.0)]));
        let b = DMatrix::from_column_slice(2, 1, &[c(0.0, 0.0), c(1.0, 0.0)]);
        for p in [1.5, 2.0, 4.0] {
            let e = subspace_p_norm(&m, &b, p, 0).unwrap();
            assert!((e.value - 1.0).abs() < 1e-12, "p = {p}: {}", e.value);
        }
    }
}
