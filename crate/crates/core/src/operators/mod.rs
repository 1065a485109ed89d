//! Diagonalizable finite-dimensional operator models `A = V diag(λ) V⁻¹`.
//!
//! A model may live on a subspace of its ambient space (the injective part
//! of a sectorial model): then `V` is n×k, `V⁻¹` is its k×n left inverse,
//! and operator norms are taken on `ran V` with the ambient ℓ^p norm.

mod norms;
pub mod random;

use std::path::Path;
use std::sync::{Arc, Mutex};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use norms::{
    interpolation_upper_bound, matrix_p_norm, subspace_p_norm, vector_p_norm, NormEstimate, NormMethod,
};

/// `‖V⁻¹V - I‖` must stay below this.
pub const BASIS_TOL: f64 = 1e-10;
/// λ closer than this to an eigenvalue is a collision.
pub const COLLISION_TOL: f64 = 1e-12;
/// Largest exponent allowed in `e^{-isλ}`.
const MAX_EXPONENT: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OperatorKind {
    StripType { omega: f64 },
    Sectorial { omega: f64 },
}

impl OperatorKind {
    pub fn omega(&self) -> f64 {
        match *self {
            OperatorKind::StripType { omega } | OperatorKind::Sectorial { omega } => omega,
        }
    }
}

/// Dense complex matrix with a per-p norm cache.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    entries: DMatrix<Complex64>,
    norm_cache: Arc<Mutex<Vec<NormEstimate>>>,
}

impl PartialEq for OperatorMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.entries == other.entries
    }
}

impl OperatorMatrix {
    pub fn new(entries: DMatrix<Complex64>) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::Input(format!("{}×{} matrix is not square", entries.nrows(), entries.ncols())));
        }
        if entries.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Input("matrix has non-finite entries".into()));
        }
        Ok(OperatorMatrix {
            entries,
            norm_cache: Arc::new(Mutex::new(Vec::new())),
        })
    }

    pub fn identity(n: usize) -> Self {
        Self::new(DMatrix::identity(n, n)).expect("finite")
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<Complex64> {
        self.entries
    }

    /// ℓ^p operator norm on the whole space (cached).
    pub fn norm(&self, p: f64) -> Result<NormEstimate> {
        let mut cache = self.norm_cache.lock().expect("norm cache poisoned");
        if let Some(hit) = cache.iter().find(|e| e.p == p) {
            return Ok(*hit);
        }
        let est = matrix_p_norm(&self.entries, p, 0)?;
        cache.push(est);
        Ok(est)
    }

    pub fn frobenius(&self) -> f64 {
        self.entries.norm()
    }

    pub fn mul(&self, other: &OperatorMatrix) -> Result<OperatorMatrix> {
        OperatorMatrix::new(&self.entries * &other.entries)
    }

    pub fn add(&self, other: &OperatorMatrix) -> Result<OperatorMatrix> {
        OperatorMatrix::new(&self.entries + &other.entries)
    }

    pub fn sub(&self, other: &OperatorMatrix) -> Result<OperatorMatrix> {
        OperatorMatrix::new(&self.entries - &other.entries)
    }

    pub fn scale(&self, c: Complex64) -> OperatorMatrix {
        OperatorMatrix::new(&self.entries * c).expect("finite")
    }

    /// `‖self - other‖_F / max(‖other‖_F, tiny)`
    pub fn relative_deviation(&self, other: &OperatorMatrix) -> f64 {
        (&self.entries - &other.entries).norm() / other.frobenius().max(f64::MIN_POSITIVE)
    }
}

#[derive(Debug, Clone)]
pub struct DiagonalizableOperator {
    eig: Vec<Complex64>,
    basis: DMatrix<Complex64>,
    basis_inv: DMatrix<Complex64>,
    p_index: f64,
    kind: OperatorKind,
}

#[derive(Serialize, Deserialize)]
struct OperatorJson {
    dim: usize,
    eig: Vec<[f64; 2]>,
    /// row-major, `dim` rows of `eig.len()` entries
    basis: Vec<[f64; 2]>,
    p: Option<PIndex>,
    #[serde(flatten)]
    kind: OperatorKind,
}

/// A number, or `"inf"`.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum PIndex {
    Finite(f64),
    Named(String),
}

fn pair(c: Complex64) -> [f64; 2] {
    [c.re, c.im]
}

fn from_pair(p: [f64; 2]) -> Complex64 {
    Complex64::new(p[0], p[1])
}

impl DiagonalizableOperator {
    /// Square basis; V⁻¹ computed and checked.
    pub fn new(eig: Vec<Complex64>, basis: DMatrix<Complex64>, p_index: f64, kind: OperatorKind) -> Result<Self> {
        if !basis.is_square() {
            return Err(Error::Input("eigenvector matrix must be square".into()));
        }
        let basis_inv = basis
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Input("eigenvector matrix is singular".into()))?;
        Self::from_parts(eig, basis, basis_inv, p_index, kind)
    }

    /// A diagonal model on the coordinate basis.
    pub fn diagonal(eig: Vec<Complex64>, p_index: f64, kind: OperatorKind) -> Result<Self> {
        let n = eig.len();
        Self::new(eig, DMatrix::identity(n, n), p_index, kind)
    }

    fn from_parts(
        eig: Vec<Complex64>,
        basis: DMatrix<Complex64>,
        basis_inv: DMatrix<Complex64>,
        p_index: f64,
        kind: OperatorKind,
    ) -> Result<Self> {
        let k = eig.len();
        if basis.ncols() != k || basis_inv.nrows() != k || basis_inv.ncols() != basis.nrows() {
            return Err(Error::Input(format!(
                "{k} eigenvalues do not match a {}×{} basis",
                basis.nrows(),
                basis.ncols()
            )));
        }
        if !(p_index >= 1.0) {
            return Err(Error::Config(format!("p must lie in [1, ∞], got {p_index}")));
        }
        if eig.iter().any(|c| !c.re.is_finite() || !c.im.is_finite())
            || basis.iter().chain(basis_inv.iter()).any(|c| !c.re.is_finite() || !c.im.is_finite())
        {
            return Err(Error::Input("non-finite operator data".into()));
        }
        let defect = (&basis_inv * &basis - DMatrix::identity(k, k)).norm();
        if defect > BASIS_TOL {
            return Err(Error::Input(format!("‖V⁻¹V - I‖ = {defect:e} exceeds {BASIS_TOL:e}")));
        }
        let omega = kind.omega();
        if !(omega >= 0.0) {
            return Err(Error::Config(format!("angle/height must be >= 0, got {omega}")));
        }
        for &l in &eig {
            let inside = match kind {
                OperatorKind::StripType { omega } => l.im.abs() <= omega * (1.0 + 1e-12) + 1e-14,
                OperatorKind::Sectorial { omega } => l.norm() == 0.0 || l.arg().abs() <= omega * (1.0 + 1e-12) + 1e-14,
            };
            if !inside {
                return Err(Error::Input(format!("eigenvalue {l} outside the declared {kind:?} region")));
            }
        }
        Ok(DiagonalizableOperator {
            eig,
            basis,
            basis_inv,
            p_index,
            kind,
        })
    }

    /// Ambient dimension.
    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    /// Number of eigenpairs (equals `dim` unless restricted).
    pub fn rank(&self) -> usize {
        self.eig.len()
    }

    pub fn is_restricted(&self) -> bool {
        self.rank() < self.dim()
    }

    pub fn eig(&self) -> &[Complex64] {
        &self.eig
    }

    pub fn basis(&self) -> &DMatrix<Complex64> {
        &self.basis
    }

    pub fn basis_inv(&self) -> &DMatrix<Complex64> {
        &self.basis_inv
    }

    pub fn p_index(&self) -> f64 {
        self.p_index
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn with_p(&self, p: f64) -> Result<Self> {
        Self::from_parts(self.eig.clone(), self.basis.clone(), self.basis_inv.clone(), p, self.kind)
    }

    /// Whether V has orthonormal columns.
    pub fn is_normal(&self) -> bool {
        let k = self.rank();
        (self.basis.adjoint() * &self.basis - DMatrix::identity(k, k)).norm() <= BASIS_TOL
    }

    /// `V diag(f(λ_j)) V⁻¹`
    pub fn map_spectrum(&self, f: impl Fn(Complex64) -> Complex64) -> Result<OperatorMatrix> {
        let d: Vec<Complex64> = self.eig.iter().map(|&l| f(l)).collect();
        self.map_diagonal(&d)
    }

    /// `V diag(d) V⁻¹`, with `d_j` paired to the j-th eigenvalue.
    pub fn map_diagonal(&self, d: &[Complex64]) -> Result<OperatorMatrix> {
        if d.len() != self.rank() {
            return Err(Error::Input(format!("{} diagonal values for {} eigenvalues", d.len(), self.rank())));
        }
        let d = DVector::from_column_slice(d);
        let mut vd = self.basis.clone();
        for (j, mut col) in vd.column_iter_mut().enumerate() {
            col *= d[j];
        }
        OperatorMatrix::new(vd * &self.basis_inv)
    }

    pub fn matrix(&self) -> OperatorMatrix {
        self.map_spectrum(|l| l).expect("finite data")
    }

    /// Operator norm in the model's ℓ^p, on `ran V` when restricted.
    pub fn operator_norm(&self, m: &OperatorMatrix) -> Result<NormEstimate> {
        self.operator_norm_p(m, self.p_index)
    }

    pub fn operator_norm_p(&self, m: &OperatorMatrix, p: f64) -> Result<NormEstimate> {
        if self.is_restricted() {
            subspace_p_norm(m.entries(), &self.basis, p, 0)
        } else {
            m.norm(p)
        }
    }

    /// Distance from λ to the spectrum.
    pub fn spectral_distance(&self, lambda: Complex64) -> f64 {
        self.eig.iter().map(|&l| (l - lambda).norm()).fold(f64::INFINITY, f64::min)
    }

    /// R(λ, A) = (λ - A)^{-1}
    pub fn resolvent(&self, lambda: Complex64) -> Result<OperatorMatrix> {
        let d = self.spectral_distance(lambda);
        if d <= COLLISION_TOL {
            return Err(Error::SpectralCollision { distance: d });
        }
        self.map_spectrum(|l| 1.0 / (lambda - l))
    }

    /// Max of `‖R(λ, A)‖_p` on Im λ = ±ω′ over a linear lattice around the
    /// spectrum and a logarithmic one out to |Re λ| = 10³; for a normal model
    /// in ℓ² the exact value `1/(ω′ - max|Im λ_j|)` is included.
    pub fn strip_type_constant(&self, omega_prime: f64) -> Result<f64> {
        let height = self.eig.iter().map(|l| l.im.abs()).fold(0.0, f64::max);
        if !(omega_prime > height) {
            return Err(Error::Domain(format!("ω′ = {omega_prime} must exceed max |Im λ| = {height}")));
        }
        let (lo, hi) = self
            .eig
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), l| (a.min(l.re), b.max(l.re)));
        let (lo, hi) = if self.eig.is_empty() { (0.0, 0.0) } else { (lo, hi) };
        let mut xs: Vec<f64> = (0..=2000).map(|k| lo - 5.0 + (hi - lo + 10.0) * k as f64 / 2000.0).collect();
        xs.extend(self.eig.iter().map(|l| l.re));
        for k in 0..=200 {
            let r = 10f64.powf(-3.0 + 6.0 * k as f64 / 200.0);
            xs.push(r);
            xs.push(-r);
        }
        let mut best = 0.0f64;
        for x in xs {
            for y in [omega_prime, -omega_prime] {
                let r = self.resolvent(Complex64::new(x, y))?;
                best = best.max(self.operator_norm(&r)?.value);
            }
        }
        if self.is_normal() && self.p_index == 2.0 {
            best = best.max(1.0 / (omega_prime - height));
        }
        Ok(best)
    }

    /// U_s = e^{-isA}
    pub fn group_orbit(&self, s: f64) -> Result<OperatorMatrix> {
        if let Some(l) = self.eig.iter().find(|l| (l.im * s).abs() > MAX_EXPONENT) {
            return Err(Error::Range(format!("e^{{-isλ}} overflows for s = {s}, λ = {l}")));
        }
        self.map_spectrum(|l| (Complex64::new(0.0, -s) * l).exp())
    }

    fn require_injective(&self) -> Result<()> {
        if let Some(l) = self.eig.iter().find(|l| l.norm() == 0.0) {
            return Err(Error::Domain(format!(
                "eigenvalue {l} present; take the injective part first"
            )));
        }
        Ok(())
    }

    /// A^{-is} = e^{-is log A}, principal logarithm.
    pub fn imaginary_power(&self, s: f64) -> Result<OperatorMatrix> {
        self.require_injective()?;
        self.map_spectrum(|l| (Complex64::new(0.0, -s) * l.ln()).exp())
    }

    /// log A as a strip-type model of height equal to the sector angle.
    pub fn log(&self) -> Result<DiagonalizableOperator> {
        self.require_injective()?;
        let omega = match self.kind {
            OperatorKind::Sectorial { omega } => omega,
            OperatorKind::StripType { .. } => self.eig.iter().map(|l| l.arg().abs()).fold(0.0, f64::max),
        };
        Self::from_parts(
            self.eig.iter().map(|l| l.ln()).collect(),
            self.basis.clone(),
            self.basis_inv.clone(),
            self.p_index,
            OperatorKind::StripType { omega },
        )
    }

    /// Restriction to ran(A): drops eigenpairs with λ = 0. The embedding of
    /// ran(A) is the returned basis.
    pub fn injective_part(&self) -> Result<DiagonalizableOperator> {
        let keep: Vec<usize> = (0..self.rank()).filter(|&j| self.eig[j].norm() > 0.0).collect();
        if keep.is_empty() {
            return Err(Error::Degenerate("A = 0: empty injective part".into()));
        }
        if keep.len() == self.rank() {
            return Ok(self.clone());
        }
        let basis = self.basis.select_columns(&keep);
        let basis_inv = self.basis_inv.select_rows(&keep);
        Self::from_parts(
            keep.iter().map(|&j| self.eig[j]).collect(),
            basis,
            basis_inv,
            self.p_index,
            self.kind,
        )
    }

    pub fn to_json(&self) -> Result<String> {
        let basis = self.basis.transpose().iter().map(|&c| pair(c)).collect();
        let (p, kind) = (self.p_index, self.kind);
        Ok(serde_json::to_string_pretty(&OperatorJson {
            dim: self.dim(),
            eig: self.eig.iter().map(|&c| pair(c)).collect(),
            basis,
            p: Some(if p.is_infinite() { PIndex::Named("inf".into()) } else { PIndex::Finite(p) }),
            kind,
        })?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let j: OperatorJson = serde_json::from_str(text)?;
        let k = j.eig.len();
        if j.basis.len() != j.dim * k {
            return Err(Error::Input(format!(
                "basis has {} entries, expected {}×{k}",
                j.basis.len(),
                j.dim
            )));
        }
        let basis = DMatrix::from_row_iterator(j.dim, k, j.basis.into_iter().map(from_pair));
        let eig = j.eig.into_iter().map(from_pair).collect();
        let p = match j.p {
            None => 2.0,
            Some(PIndex::Finite(p)) => p,
            Some(PIndex::Named(s)) if s == "inf" => f64::INFINITY,
            Some(PIndex::Named(s)) => return Err(Error::Input(format!("unknown p index {s:?}"))),
        };
        if k == j.dim {
            Self::new(eig, basis, p, j.kind)
        } else {
            let pinv = basis
                .clone()
                .pseudo_inverse(1e-14)
                .map_err(|e| Error::Input(format!("basis pseudo-inverse: {e}")))?;
            Self::from_parts(eig, basis, pinv, p, j.kind)
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}
