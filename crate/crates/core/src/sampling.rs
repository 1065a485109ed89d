//! Uniform symmetric grids, sampled functions and the Fourier pair
//!
//! f̂(t) = ∫ f(s) e^{-ist} ds,   f^∨(s) = (1/2π) ∫ f(t) e^{ist} dt.
//!
//! A grid with half-width `L` and `N` points has spacing `h = 2L/N` and
//! samples at `-L + k h`, `k = 0..N`. Its dual grid has spacing `π/L` and
//! half-width `Nπ/(2L)`; transforms map a grid onto its dual.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if forward {
            p.plan_fft_forward(n)
        } else {
            p.plan_fft_inverse(n)
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Grid {
    half_width: f64,
    points: usize,
}

impl Default for Grid {
    fn default() -> Self {
        Grid {
            half_width: 32.0,
            points: 4096,
        }
    }
}

impl Grid {
    pub fn new(half_width: f64, points: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::Config(format!("grid half-width must be positive, got {half_width}")));
        }
        if points < 8 || !points.is_power_of_two() {
            return Err(Error::Config(format!(
                "grid size must be a power of two >= 8, got {points}"
            )));
        }
        Ok(Grid { half_width, points })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.points as f64
    }

    pub fn point(&self, k: usize) -> f64 {
        -self.half_width + k as f64 * self.spacing()
    }

    pub fn abscissae(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.points).map(|k| self.point(k))
    }

    /// Grid on which the transforms of functions on `self` live.
    pub fn dual(&self) -> Grid {
        Grid {
            half_width: self.points as f64 * PI / (2.0 * self.half_width),
            points: self.points,
        }
    }

    /// Same half-width, twice the points.
    pub fn refined(&self) -> Grid {
        Grid {
            half_width: self.half_width,
            points: 2 * self.points,
        }
    }

    /// Equality up to the rounding picked up by `dual().dual()`.
    pub fn same_as(&self, other: &Grid) -> bool {
        self.points == other.points
            && (self.half_width - other.half_width).abs() <= 1e-12 * self.half_width
    }

    /// Index of the sample at `s`, if `s` is a grid point.
    pub fn index_of(&self, s: f64) -> Option<usize> {
        let x = (s + self.half_width) / self.spacing();
        let k = x.round();
        if (x - k).abs() < 1e-9 && k >= 0.0 && (k as usize) < self.points {
            Some(k as usize)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    grid: Grid,
    values: Vec<Complex64>,
}

impl SampledFunction {
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.points() {
            return Err(Error::Input(format!(
                "expected {} samples, got {}",
                grid.points(),
                values.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::Input(format!("non-finite sample at index {k}")));
        }
        Ok(SampledFunction { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        SampledFunction {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.points()],
        }
    }

    /// Samples `f` at every grid point; fails on non-finite output.
    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        Self::new(grid, grid.abscissae().map(f).collect())
    }

    pub fn from_real_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_fn(grid, |s| Complex64::new(f(s), 0.0))
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, Complex64)> + '_ {
        self.grid.abscissae().zip(self.values.iter().copied())
    }

    pub fn map(&self, f: impl Fn(f64, Complex64) -> Complex64) -> Result<Self> {
        Self::new(self.grid, self.iter().map(|(s, v)| f(s, v)).collect())
    }

    pub fn scale(&self, c: Complex64) -> Self {
        SampledFunction {
            grid: self.grid,
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    fn zip_with(&self, other: &Self, op: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Self> {
        check_same_grid(&self.grid, &other.grid)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| op(*a, *b)).collect();
        Self::new(self.grid, values)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn norm_l2(&self) -> f64 {
        (self.grid.spacing() * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt()
    }

    pub fn norm_sup(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Share of the L¹ mass sitting in the outer `edge` fraction of the grid
    /// (both ends together).
    pub fn tail_fraction(&self, edge: f64) -> f64 {
        let n = self.values.len();
        let m = ((n as f64 * edge / 2.0).ceil() as usize).max(1);
        let total: f64 = self.values.iter().map(|v| v.norm()).sum();
        if total == 0.0 {
            return 0.0;
        }
        let tail: f64 = self.values[..m]
            .iter()
            .chain(&self.values[n - m..])
            .map(|v| v.norm())
            .sum();
        tail / total
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["s", "re", "im"])?;
        for (s, v) in self.iter() {
            wr.write_record([s.to_string(), v.re.to_string(), v.im.to_string()])?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let mut s = Vec::new();
        let mut values = Vec::new();
        for rec in rd.records() {
            let rec = rec?;
            let field = |i: usize| -> Result<f64> {
                rec.get(i)
                    .ok_or_else(|| Error::Input(format!("missing column {i}")))?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Input(format!("bad number: {e}")))
            };
            s.push(field(0)?);
            values.push(Complex64::new(field(1)?, field(2)?));
        }
        if s.len() < 2 {
            return Err(Error::Input("too few rows".into()));
        }
        let grid = Grid::new(-s[0], s.len())?;
        let h = grid.spacing();
        if s.iter().enumerate().any(|(k, &x)| (x - grid.point(k)).abs() > 1e-9 * h.max(1.0)) {
            return Err(Error::Input("abscissae do not form a symmetric uniform grid".into()));
        }
        Self::new(grid, values)
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }

    /// `HLAB` | version u32 | N u64 | L f64 | N × (re f64, im f64), little-endian.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(24 + 16 * self.values.len());
        out.extend_from_slice(BINARY_MAGIC);
        out.extend_from_slice(&BINARY_VERSION.to_le_bytes());
        out.extend_from_slice(&(self.grid.points() as u64).to_le_bytes());
        out.extend_from_slice(&self.grid.half_width().to_le_bytes());
        for v in &self.values {
            out.extend_from_slice(&v.re.to_le_bytes());
            out.extend_from_slice(&v.im.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 24 || &bytes[..4] != BINARY_MAGIC {
            return Err(Error::Input("not an HLAB dump".into()));
        }
        let u32_at = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap());
        let u64_at = |i: usize| u64::from_le_bytes(bytes[i..i + 8].try_into().unwrap());
        let f64_at = |i: usize| f64::from_le_bytes(bytes[i..i + 8].try_into().unwrap());
        let version = u32_at(4);
        if version != BINARY_VERSION {
            return Err(Error::Input(format!("unsupported HLAB version {version}")));
        }
        let n = u64_at(8) as usize;
        let grid = Grid::new(f64_at(16), n)?;
        if bytes.len() != 24 + 16 * n {
            return Err(Error::Input("truncated HLAB dump".into()));
        }
        let values = (0..n)
            .map(|k| Complex64::new(f64_at(24 + 16 * k), f64_at(32 + 16 * k)))
            .collect();
        Self::new(grid, values)
    }
}

const BINARY_MAGIC: &[u8; 4] = b"HLAB";
const BINARY_VERSION: u32 = 1;

pub(crate) fn check_same_grid(a: &Grid, b: &Grid) -> Result<()> {
    if a.same_as(b) {
        Ok(())
    } else {
        Err(Error::Input(format!(
            "grid mismatch: (L={}, N={}) vs (L={}, N={})",
            a.half_width, a.points, b.half_width, b.points
        )))
    }
}

fn alternate(k: usize) -> f64 {
    if k.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// f̂ on the dual grid. With `N` a multiple of four the phase of the
/// symmetric domain reduces to `(-1)^{j+k}`.
pub fn fourier_forward(g: &SampledFunction) -> SampledFunction {
    let grid = g.grid;
    let h = grid.spacing();
    let mut buf: Vec<Complex64> = g.values.iter().enumerate().map(|(k, v)| v * alternate(k)).collect();
    plan(grid.points, true).process(&mut buf);
    for (j, v) in buf.iter_mut().enumerate() {
        *v *= h * alternate(j);
    }
    SampledFunction {
        grid: grid.dual(),
        values: buf,
    }
}

/// f^∨ on the dual grid; exact inverse of [`fourier_forward`].
pub fn fourier_inverse(f: &SampledFunction) -> SampledFunction {
    let grid = f.grid;
    let dual = grid.dual();
    let scale = 1.0 / (grid.points as f64 * dual.spacing());
    let mut buf: Vec<Complex64> = f.values.iter().enumerate().map(|(j, v)| v * alternate(j)).collect();
    plan(grid.points, false).process(&mut buf);
    for (k, v) in buf.iter_mut().enumerate() {
        *v *= scale * alternate(k);
    }
    SampledFunction { grid: dual, values: buf }
}

/// Emitted when a transformed function still carries mass at the grid edge.
#[derive(Debug, Clone, PartialEq)]
pub struct TailWarning {
    pub tail_fraction: f64,
    pub threshold: f64,
}

/// [`fourier_forward`] plus a tail check over the outer 5% of the grid.
pub fn fourier_forward_checked(
    g: &SampledFunction,
    threshold: f64,
) -> (SampledFunction, Option<TailWarning>) {
    let tail = g.tail_fraction(0.05);
    let warning = (tail > threshold).then_some(TailWarning {
        tail_fraction: tail,
        threshold,
    });
    (fourier_forward(g), warning)
}

/// Linear convolution `(f∗g)(t) = ∫ f(t-s) g(s) ds` restricted to the grid.
pub fn convolve(f: &SampledFunction, g: &SampledFunction) -> Result<SampledFunction> {
    check_same_grid(&f.grid, &g.grid)?;
    let n = f.grid.points;
    let m = 2 * n;
    let mut a = vec![Complex64::new(0.0, 0.0); m];
    let mut b = a.clone();
    a[..n].copy_from_slice(&f.values);
    b[..n].copy_from_slice(&g.values);
    plan(m, true).process(&mut a);
    plan(m, true).process(&mut b);
    for (x, y) in a.iter_mut().zip(&b) {
        *x *= y;
    }
    plan(m, false).process(&mut a);
    let scale = f.grid.spacing() / m as f64;
    // index k of the output grid sits at lag k + N/2 of the full convolution
    let values = (0..n).map(|k| a[k + n / 2] * scale).collect();
    SampledFunction::new(f.grid, values)
}

/// Trapezoidal rule; the grid is closed periodically, so this is `h Σ f_k`.
pub fn integral(f: &SampledFunction) -> Complex64 {
    f.values.iter().sum::<Complex64>() * f.grid.spacing()
}

/// Quadrature weights of two Romberg steps over the trapezoid (Boole's rule
/// on a periodic grid), or one step when `n` is not a multiple of eight.
///
/// A jump on the coarsest sub-grid whose sample holds the mean of the
/// one-sided limits then costs O(h⁶).
pub fn romberg_weights(n: usize, h: f64) -> Vec<f64> {
    if n.is_multiple_of(8) {
        (0..n)
            .map(|k| match k % 4 {
                0 => 28.0 * h / 45.0,
                2 => 24.0 * h / 45.0,
                _ => 64.0 * h / 45.0,
            })
            .collect()
    } else {
        (0..n).map(|k| if k % 2 == 0 { 2.0 * h / 3.0 } else { 4.0 * h / 3.0 }).collect()
    }
}

/// `Σ w_k f_k` with [`romberg_weights`].
pub fn integral_romberg(values: &[Complex64], h: f64) -> Complex64 {
    values
        .iter()
        .zip(romberg_weights(values.len(), h))
        .map(|(v, w)| v * w)
        .sum()
}

/// τ_t f = f(· - t), realised on the Fourier side as e^{its} f^∨.
pub fn translate(f: &SampledFunction, t: f64) -> SampledFunction {
    let mut coeff = fourier_inverse(f);
    let grid = coeff.grid;
    for (k, v) in coeff.values.iter_mut().enumerate() {
        *v *= Complex64::from_polar(1.0, t * grid.point(k));
    }
    fourier_forward(&coeff)
}

/// Riemann sum over translates `Σ_t τ_t f · g · Δt`, the discrete form of
/// `∫ τ_t f · g dt = (∫ f) g`.
pub fn translate_average(
    f: &dyn Fn(f64) -> Complex64,
    g: &SampledFunction,
    t_range: f64,
    t_step: f64,
) -> Result<SampledFunction> {
    let count = (t_range / t_step).round() as i64;
    g.map(|s, gv| {
        let sum: Complex64 = (-count..=count).map(|i| f(s - i as f64 * t_step)).sum();
        sum * t_step * gv
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn grid_rejects_bad_sizes() {
        assert!(Grid::new(1.0, 12).is_err());
        assert!(Grid::new(1.0, 4).is_err());
        assert!(Grid::new(-1.0, 16).is_err());
        let g = Grid::new(3.0, 64).unwrap();
        assert_eq!(g.spacing() * g.points() as f64, 6.0);
    }

    #[test]
    fn dual_of_dual_is_identity() {
        let g = Grid::default();
        assert!(g.dual().dual().same_as(&g));
        assert!((g.dual().spacing() - PI / g.half_width()).abs() < 1e-15);
    }

    #[test]
    fn non_finite_samples_rejected() {
        let g = Grid::new(1.0, 8).unwrap();
        let mut v = vec![c(0.0); 8];
        v[3] = c(f64::NAN);
        assert!(SampledFunction::new(g, v).is_err());
    }

    #[test]
    fn zero_maps_to_zero() {
        let z = SampledFunction::zeros(Grid::default());
        assert_eq!(fourier_forward(&z).norm_sup(), 0.0);
        assert_eq!(fourier_inverse(&z).norm_sup(), 0.0);
        assert_eq!(integral(&z), c(0.0));
    }

    #[test]
    fn gaussian_pair() {
        let grid = Grid::default();
        let g = SampledFunction::from_real_fn(grid, |s| (-s * s / 4.0).exp() / (2.0 * PI.sqrt())).unwrap();
        let gh = fourier_forward(&g);
        let err = gh.iter().map(|(t, v)| (v - c((-t * t).exp())).norm()).fold(0.0, f64::max);
        assert!(err < 1e-12, "{err}");
        let back = fourier_inverse(&gh);
        let err = back.sub(&g).unwrap().norm_sup();
        assert!(err < 1e-14, "{err}");
    }

    #[test]
    fn half_indicator_gives_sinc() {
        let grid = Grid::default();
        let g = SampledFunction::from_real_fn(grid, |s| {
            if s.abs() < 1.0 {
                0.5
            } else if s.abs() == 1.0 {
                0.25
            } else {
                0.0
            }
        })
        .unwrap();
        let gh = fourier_forward(&g);
        for (t, v) in gh.iter().filter(|(t, _)| t.abs() < 10.0) {
            let exact = if t == 0.0 { 1.0 } else { t.sin() / t };
            // jump terms of the trapezoid rule: O(h²|t|)
            let tol = grid.spacing().powi(2) * (1.0 + t.abs()) / 6.0;
            assert!((v - c(exact)).norm() < tol, "t={t}");
        }
    }

    #[test]
    fn convolution_of_unit_indicators_is_triangle() {
        let grid = Grid::new(4.0, 512).unwrap();
        let ind = SampledFunction::from_real_fn(grid, |s| {
            if s > 0.0 && s < 1.0 {
                1.0
            } else if s == 0.0 || s == 1.0 {
                0.5
            } else {
                0.0
            }
        })
        .unwrap();
        let tri = convolve(&ind, &ind).unwrap();
        let peak = tri.values()[grid.index_of(1.0).unwrap()];
        // the product of two mid-value samples costs h/2 at the peak
        assert!((peak - c(1.0 - grid.spacing() / 2.0)).norm() < 1e-12);
        for (t, v) in tri.iter() {
            let exact = (1.0 - (t - 1.0).abs()).max(0.0);
            assert!((v.re - exact).abs() < 2.0 * grid.spacing(), "t={t}");
        }
    }

    #[test]
    fn integrals() {
        let g = SampledFunction::from_real_fn(Grid::new(8.0, 1024).unwrap(), |s| (-s * s).exp()).unwrap();
        assert!((integral(&g).re - PI.sqrt()).abs() < 1e-8);
        let eta = SampledFunction::from_real_fn(Grid::default(), |x| {
            let e = (-x.abs()).exp();
            e / (1.0 + e).powi(2)
        })
        .unwrap();
        assert!((integral(&eta).re - 1.0).abs() < 1e-8);
    }

    #[test]
    fn translate_shifts_gaussian() {
        let grid = Grid::new(16.0, 512).unwrap();
        let g = SampledFunction::from_real_fn(grid, |s| (-s * s).exp()).unwrap();
        let moved = translate(&g, 1.3);
        let err = moved.iter().map(|(s, v)| (v - c((-(s - 1.3).powi(2)).exp())).norm()).fold(0.0, f64::max);
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn romberg_removes_jump_error() {
        // ∫_0^∞ e^{-2s} ds = 1/2 with the jump at s = 0 stored as its mean
        let grid = Grid::default();
        let g = SampledFunction::from_real_fn(grid, |s| {
            if s > 0.0 {
                (-2.0 * s).exp()
            } else if s == 0.0 {
                0.5
            } else {
                0.0
            }
        })
        .unwrap();
        let plain = integral(&g).re;
        let rich = integral_romberg(g.values(), grid.spacing()).re;
        assert!((plain - 0.5).abs() > 1e-6);
        // h coth(h)/2 expanded: the extrapolated error is 64h⁶/945
        let expected = 64.0 * grid.spacing().powi(6) / 945.0;
        assert!((rich - 0.5 - expected).abs() < 1e-12, "{}", rich - 0.5);
    }

    #[test]
    fn tail_warning_fires_on_flat_input() {
        let grid = Grid::new(4.0, 64).unwrap();
        let flat = SampledFunction::from_real_fn(grid, |_| 1.0).unwrap();
        assert!(fourier_forward_checked(&flat, 1e-6).1.is_some());
        let bump = SampledFunction::from_real_fn(grid, |s| (-4.0 * s * s).exp()).unwrap();
        assert!(fourier_forward_checked(&bump, 1e-6).1.is_none());
    }

    #[test]
    fn csv_and_binary_round_trip() {
        let grid = Grid::new(2.0, 16).unwrap();
        let f = SampledFunction::from_fn(grid, |s| Complex64::new(s.sin(), s * 0.1)).unwrap();
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let back = SampledFunction::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, f);
        let bytes = f.to_bytes();
        assert_eq!(&bytes[..4], b"HLAB");
        assert_eq!(SampledFunction::from_bytes(&bytes).unwrap(), f);
        assert!(SampledFunction::from_bytes(&bytes[..30]).is_err());
    }
}
