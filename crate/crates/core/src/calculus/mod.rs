//! Four evaluations of `f(A)` on diagonalizable models: the spectral oracle,
//! the Cauchy integral over a strip boundary, the group integral against a
//! Fourier-side coefficient, and the windowed representation
//! `f(A) = ∫ F_s(A) U_s ds`.

mod contour;
mod meda;
mod sobolev;
mod transfer;

use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functions::HolFn;
use crate::operators::{DiagonalizableOperator, OperatorMatrix};

pub use contour::{default_contour_height, elementary_contour, ContourConfig};
pub use meda::{
    gaussian_approximation_harness, meda_hoermander, ApproximationReport, ApproximationRow, MedaBound, MedaConfig,
};
pub use sobolev::{regularizer_profile, sobolev_integral, RegularizerProfile};
pub use transfer::{sector_calculus, StripMethod};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Oracle,
    Contour,
    SobolevIntegral,
    Meda,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum QuadratureMeta {
    None,
    Contour {
        height: f64,
        truncation: f64,
        panels: usize,
        nodes_per_panel: usize,
    },
    SGrid {
        half_width: f64,
        points: usize,
    },
}

#[derive(Debug, Clone)]
pub struct CalculusResult {
    pub matrix: OperatorMatrix,
    pub method: Method,
    pub quadrature: QuadratureMeta,
    /// Relative Frobenius distance to the spectral oracle on the same model.
    pub deviation_from_oracle: f64,
    /// Meda only: the triangle/decay bound chain.
    pub bound: Option<MedaBound>,
}

#[derive(Serialize)]
struct ResultJson<'a> {
    method: Method,
    quadrature: &'a QuadratureMeta,
    deviation_from_oracle: f64,
    dim: usize,
    /// row-major `[re, im]`
    matrix: Vec<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bound: Option<&'a MedaBound>,
}

impl CalculusResult {
    fn new(matrix: OperatorMatrix, method: Method, quadrature: QuadratureMeta, oracle: &OperatorMatrix) -> Self {
        let deviation_from_oracle = matrix.relative_deviation(oracle);
        CalculusResult {
            matrix,
            method,
            quadrature,
            deviation_from_oracle,
            bound: None,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&ResultJson {
            method: self.method,
            quadrature: &self.quadrature,
            deviation_from_oracle: self.deviation_from_oracle,
            dim: self.matrix.dim(),
            matrix: self.matrix.entries().transpose().iter().map(|c| [c.re, c.im]).collect(),
            bound: self.bound.as_ref(),
        })?)
    }

    /// Flattened matrix: `row, col, re, im`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["row", "col", "re", "im"])?;
        let m = self.matrix.entries();
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let c = m[(i, j)];
                wr.write_record([i.to_string(), j.to_string(), format!("{:.17e}", c.re), format!("{:.17e}", c.im)])?;
            }
        }
        wr.flush()?;
        Ok(())
    }

    pub fn save(&self, stem: impl AsRef<Path>) -> Result<()> {
        let stem = stem.as_ref();
        std::fs::write(stem.with_extension("json"), self.to_json()?)?;
        self.write_csv(std::fs::File::create(stem.with_extension("csv"))?)
    }
}

/// `V diag(f(λ_j)) V⁻¹` as a bare matrix.
pub fn oracle_matrix(a: &DiagonalizableOperator, f: &HolFn) -> Result<OperatorMatrix> {
    for &l in a.eig() {
        let v = f.eval(l);
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(Error::Domain(format!("{} is undefined at the eigenvalue {l}", f.label())));
        }
    }
    a.map_spectrum(|l| f.eval(l))
}

pub fn spectral_oracle(a: &DiagonalizableOperator, f: &HolFn) -> Result<CalculusResult> {
    let m = oracle_matrix(a, f)?;
    Ok(CalculusResult {
        matrix: m,
        method: Method::Oracle,
        quadrature: QuadratureMeta::None,
        deviation_from_oracle: 0.0,
        bound: None,
    })
}

/// Strip height actually occupied by the spectrum, or the declared one if larger.
pub(crate) fn spectral_height(a: &DiagonalizableOperator) -> f64 {
    a.eig().iter().map(|l| l.im.abs()).fold(a.kind().omega(), f64::max)
}

fn zeros(n: usize) -> DMatrix<Complex64> {
    DMatrix::zeros(n, n)
}

const SUM_CHUNK: usize = 64;

/// `Σ_k term(k)` over `0..len`, summed in fixed chunks so the rounding (and
/// hence every written artifact) does not depend on thread scheduling.
fn ordered_sum<T: Send>(
    len: usize,
    zero: impl Fn() -> T + Sync,
    term: impl Fn(usize) -> Result<Option<T>> + Sync + Send,
    add: impl Fn(T, T) -> T + Sync + Send,
) -> Result<T> {
    use rayon::prelude::*;
    let parts: Vec<Result<T>> = (0..len)
        .into_par_iter()
        .chunks(SUM_CHUNK)
        .map(|ks| {
            let mut acc = zero();
            for k in ks {
                if let Some(t) = term(k)? {
                    acc = add(acc, t);
                }
            }
            Ok(acc)
        })
        .collect();
    let mut acc = zero();
    for p in parts {
        acc = add(acc, p?);
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::OperatorKind;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn oracle_examples() {
        let strip = OperatorKind::StripType { omega: 0.0 };
        let a = DiagonalizableOperator::diagonal(vec![c(1.0, 0.0), c(-1.0, 0.0)], 2.0, strip).unwrap();
        let lam = c(0.0, 2.0);
        let r = spectral_oracle(&a, &HolFn::resolvent(lam)).unwrap();
        assert!(r.matrix.relative_deviation(&a.resolvent(lam).unwrap()) < 1e-15);
        let one = spectral_oracle(&a, &HolFn::one()).unwrap();
        assert_eq!(one.matrix, OperatorMatrix::identity(2));
        let sect = OperatorKind::Sectorial { omega: 0.0 };
        let d = DiagonalizableOperator::diagonal(vec![c(1.0, 0.0), c(4.0, 0.0)], 2.0, sect).unwrap();
        let sqrt = HolFn::new("sqrt", std::f64::consts::PI, |z| z.sqrt());
        let s = spectral_oracle(&d, &sqrt).unwrap();
        assert!((s.matrix.entries()[(1, 1)] - c(2.0, 0.0)).norm() < 1e-15);
        let bad = spectral_oracle(&a, &HolFn::resolvent(c(1.0, 0.0)));
        assert!(matches!(bad, Err(Error::Domain(_))));
    }

    #[test]
    fn exports() {
        let strip = OperatorKind::StripType { omega: 0.0 };
        let a = DiagonalizableOperator::diagonal(vec![c(0.5, 0.0)], 2.0, strip).unwrap();
        let r = spectral_oracle(&a, &HolFn::gaussian()).unwrap();
        let j: serde_json::Value = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        assert_eq!(j["method"], "oracle");
        assert!((j["matrix"][0][0].as_f64().unwrap() - (-0.25f64).exp()).abs() < 1e-15);
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("row,col,re,im\n0,0,"));
    }
}
