//! Function spaces on sectors `S_ω = {|arg w| < ω}`, all handled through
//! the pullback `z ↦ f(e^z)` to the strip `St_ω`.

use std::f64::consts::PI;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functions::HolFn;
use crate::hoermander::{hoermander_norm, HoermanderConfig, HoermanderEstimate, Localizer};
use crate::sampling::{Grid, SampledFunction};
use crate::strip::{classical_sobolev_norm, StripFunctionRep};
use crate::weights::Weight;

/// Pointwise agreement required between `f(w)` and the pullback at `log w`.
pub const CONSISTENCY_TOL: f64 = 1e-8;
/// Dilation grid of [`classical_hoermander_check`]: `Grid(32, 16384)`, fine
/// enough in both `s` and `ξ` for the kink of `(1+|ξ|)^{2α}` at 0.
const CLASSICAL_HALF_WIDTH: f64 = 32.0;
const CLASSICAL_POINTS: usize = 16384;

/// `f` on `S_angle`, stored as `f(e^z)` on `St_angle`.
#[derive(Debug, Clone)]
pub struct SectorFunctionRep {
    pullback: StripFunctionRep,
    angle: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct SectorSidecar {
    angle: f64,
    coords: String,
}

fn check_angle(angle: f64) -> Result<()> {
    if !(0.0..PI).contains(&angle) {
        return Err(Error::Config(format!("sector angle must lie in [0, π), got {angle}")));
    }
    Ok(())
}

impl SectorFunctionRep {
    pub fn from_pullback(pullback: StripFunctionRep) -> Result<Self> {
        let angle = pullback.omega();
        check_angle(angle)?;
        Ok(SectorFunctionRep { pullback, angle })
    }

    /// Fits `f(e^z)` on `St_angle`; `f.height()` is read as the half-angle of
    /// the sector on which `f` is holomorphic.
    pub fn fit(f: &HolFn, grid: Grid, angle: f64, weight: Weight) -> Result<Self> {
        check_angle(angle)?;
        let pullback = StripFunctionRep::fit(&f.sector_pullback(f.height()), grid, angle, weight)?;
        let rep = SectorFunctionRep { pullback, angle };
        rep.check_consistency(f)?;
        Ok(rep)
    }

    fn reference_points(&self) -> [Complex64; 3] {
        let a = self.angle;
        [
            Complex64::new(1.1, 0.0),
            Complex64::from_polar(0.7, 0.5 * a),
            Complex64::from_polar(2.0, -0.5 * a),
        ]
    }

    /// Largest `|f(w) - pullback(log w)|` over the reference points.
    pub fn consistency_error(&self, f: &HolFn) -> f64 {
        self.reference_points()
            .iter()
            .map(|&w| (f.eval(w) - self.pullback.evaluate(w.ln())).norm())
            .fold(0.0, f64::max)
    }

    fn check_consistency(&self, f: &HolFn) -> Result<()> {
        let scale = self
            .reference_points()
            .iter()
            .map(|&w| f.eval(w).norm())
            .fold(1.0, f64::max);
        let err = self.consistency_error(f);
        if !(err <= CONSISTENCY_TOL * scale) {
            return Err(Error::FitVerification {
                max_error: err,
                tolerance: CONSISTENCY_TOL * scale,
            });
        }
        Ok(())
    }

    pub fn pullback(&self) -> &StripFunctionRep {
        &self.pullback
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }

    pub fn label(&self) -> &str {
        self.pullback.label()
    }

    /// `f(w)` for `|arg w| ≤ angle`.
    pub fn evaluate(&self, w: Complex64) -> Result<Complex64> {
        if w == Complex64::new(0.0, 0.0) || w.arg().abs() > self.angle * (1.0 + 1e-12) {
            return Err(Error::Domain(format!("{w} lies outside S_{}", self.angle)));
        }
        Ok(self.pullback.evaluate(w.ln()))
    }

    pub fn sobolev_norm(&self) -> f64 {
        sector_sobolev_norm(self)
    }

    /// Writes the strip pullback at `stem` and adds `{"angle", "coords": "log"}`
    /// to its JSON sidecar.
    pub fn save(&self, stem: impl AsRef<Path>) -> Result<()> {
        let stem = stem.as_ref();
        self.pullback.save(stem)?;
        let path = stem.with_extension("json");
        let mut json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path)?)?;
        let extra = serde_json::to_value(SectorSidecar {
            angle: self.angle,
            coords: "log".into(),
        })?;
        if let (Some(obj), serde_json::Value::Object(add)) = (json.as_object_mut(), extra) {
            obj.extend(add);
        }
        std::fs::write(path, serde_json::to_string_pretty(&json)?)?;
        Ok(())
    }

    pub fn load(stem: impl AsRef<Path>) -> Result<Self> {
        let stem = stem.as_ref();
        let side: SectorSidecar = serde_json::from_str(&std::fs::read_to_string(stem.with_extension("json"))?)?;
        if side.coords != "log" {
            return Err(Error::Input(format!("unknown sector coordinates {:?}", side.coords)));
        }
        let rep = Self::from_pullback(StripFunctionRep::load(stem)?)?;
        if rep.angle != side.angle {
            return Err(Error::Input(format!(
                "sector angle {} disagrees with the pullback height {}",
                side.angle, rep.angle
            )));
        }
        Ok(rep)
    }
}

/// `‖f(e^z)‖_{W²_v(St_ω)}`.
pub fn sector_sobolev_norm(f: &SectorFunctionRep) -> f64 {
    f.pullback.sobolev_norm()
}

/// Sector Sobolev norm of a function given pointwise. A pullback that cannot
/// be represented by an L² coefficient on the grid is reported as divergence.
pub fn sector_sobolev_norm_of(f: &HolFn, grid: Grid, angle: f64, weight: Weight) -> Result<f64> {
    match SectorFunctionRep::fit(f, grid, angle, weight) {
        Ok(rep) => Ok(rep.sobolev_norm()),
        Err(Error::FitVerification { max_error, .. }) => Err(Error::divergence(
            format!("{}(e^z) is not representable in L² on the coefficient grid", f.label()),
            max_error,
        )),
        Err(e) => Err(e),
    }
}

/// `‖f(e^z)‖_{Hör²_v(St_angle)}` for a function given pointwise on the sector.
pub fn sector_hoermander_norm(
    f: &HolFn,
    angle: f64,
    loc: &Localizer,
    v: &Weight,
    cfg: &HoermanderConfig,
) -> Result<HoermanderEstimate> {
    check_angle(angle)?;
    hoermander_norm(&f.sector_pullback(f.height()), loc, v, angle, cfg)
}

/// [`sector_hoermander_norm`] for a stored rep.
pub fn sector_rep_hoermander_norm(
    f: &SectorFunctionRep,
    loc: &Localizer,
    cfg: &HoermanderConfig,
) -> Result<HoermanderEstimate> {
    hoermander_norm(&f.pullback, loc, f.pullback.weight(), f.angle, cfg)
}

/// Normalised smooth bump `exp(1 - 1/(1 - x²))` on `[lo, hi] ⊂ (0, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    lo: f64,
    hi: f64,
}

impl Bump {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(Error::Domain(format!("bump support [{lo}, {hi}] must lie in (0, ∞)")));
        }
        Ok(Bump { lo, hi })
    }

    pub fn support(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn eval(&self, s: f64) -> f64 {
        let x = (2.0 * s - self.lo - self.hi) / (self.hi - self.lo);
        if x.abs() >= 1.0 {
            0.0
        } else {
            (1.0 - 1.0 / (1.0 - x * x)).exp()
        }
    }
}

impl Default for Bump {
    fn default() -> Self {
        Bump { lo: 0.5, hi: 2.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalCheck {
    /// `sup_t ‖η · m(t ·)‖_{W^{α,2}(ℝ)}` over the logarithmic lattice.
    pub dilation_sup: f64,
    pub argmax_t: f64,
    /// `‖m(e^z)‖_{Hör²_{v_α}(ℝ)}`
    pub sector: f64,
    /// `dilation_sup / sector`
    pub ratio: f64,
    /// `(log t, ‖η · m(t ·)‖)`
    pub profile: Vec<(f64, f64)>,
}

/// `(u, ‖η · m(e^u ·)‖_{W^{α,2}(ℝ)})` for each `u`, with `η · m(t ·)` sampled on `grid`.
pub fn dilation_profile(m: &HolFn, alpha: f64, eta: &Bump, log_ts: &[f64], grid: Grid) -> Result<Vec<(f64, f64)>> {
    if eta.hi >= grid.half_width() / 2.0 {
        return Err(Error::Domain(format!(
            "bump support reaches {}, grid half-width {}",
            eta.hi,
            grid.half_width()
        )));
    }
    let bump: Vec<(f64, f64)> = grid.abscissae().map(|s| (s, eta.eval(s))).collect();
    log_ts
        .iter()
        .map(|&u| -> Result<(f64, f64)> {
            let t = u.exp();
            let values = bump
                .iter()
                .map(|&(s, e)| if e > 0.0 { m.eval(Complex64::new(t * s, 0.0)) * e } else { Complex64::new(0.0, 0.0) })
                .collect();
            let samples = SampledFunction::new(grid, values)?;
            Ok((u, classical_sobolev_norm(&samples, alpha)))
        })
        .collect()
}

/// Dilation form of the classical multiplier condition next to the
/// Hörmander estimate of the pullback with `v = (1+|s|)^α` on the line.
/// `t = e^u` runs over the translate lattice `u` of `cfg`.
pub fn classical_hoermander_check(
    m: &HolFn,
    alpha: f64,
    eta: &Bump,
    loc: &Localizer,
    cfg: &HoermanderConfig,
) -> Result<ClassicalCheck> {
    if !(alpha > 0.5) {
        return Err(Error::InvalidWeight(format!("order α must exceed 1/2, got {alpha}")));
    }
    let v = Weight::polynomial(alpha)?;
    let sector = hoermander_norm(&m.sector_pullback(m.height()), loc, &v, 0.0, cfg)?.value;
    let profile = dilation_profile(m, alpha, eta, &cfg.lattice(), Grid::new(CLASSICAL_HALF_WIDTH, CLASSICAL_POINTS)?)?;
    let (argmax_u, dilation_sup) = profile
        .iter()
        .fold((0.0, f64::NEG_INFINITY), |b, &(u, n)| if n > b.1 { (u, n) } else { b });
    Ok(ClassicalCheck {
        dilation_sup,
        argmax_t: argmax_u.exp(),
        sector,
        ratio: if sector > 0.0 { dilation_sup / sector } else { f64::NAN },
        profile,
    })
}

/// Sector estimate next to the two boundary-ray estimates `f(e^{±iω} s)`.
/// Each ray is windowed by the trace of the localizer on its line, which
/// puts the ratio in [1, 2]. `None` marks a value that diverged or kept growing towards the end of
/// the translate lattice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryRayReport {
    pub sector: Option<f64>,
    pub upper: Option<f64>,
    pub lower: Option<f64>,
    /// `(upper² + lower²) / sector²`
    pub ratio: Option<f64>,
    /// Sector finite exactly when both rays are.
    pub consistent: bool,
}

/// Whether an estimate is a genuine sup rather than a lattice edge value.
fn bounded(est: Result<HoermanderEstimate>) -> Result<Option<f64>> {
    match est {
        Ok(e) => {
            let edge = e.t_range - e.t_step;
            let inner = e
                .profile
                .iter()
                .filter(|(t, _)| t.abs() <= 0.5 * e.t_range)
                .map(|p| p.1)
                .fold(0.0, f64::max);
            if e.argmax_t.abs() >= edge && e.value > 1.01 * inner {
                Ok(None)
            } else {
                Ok(Some(e.value))
            }
        }
        Err(Error::Divergence { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

pub fn boundary_ray_check(
    f: &HolFn,
    angle: f64,
    loc: &Localizer,
    v: &Weight,
    cfg: &HoermanderConfig,
) -> Result<BoundaryRayReport> {
    check_angle(angle)?;
    if angle == 0.0 {
        return Err(Error::Domain("boundary rays need ω > 0".into()));
    }
    let pullback = f.sector_pullback(f.height());
    let sector = bounded(hoermander_norm(&pullback, loc, v, angle, cfg))?;
    // f(e^{±iω} e^z) = pullback(z ± iω), windowed by the trace of ψ on the same line
    let ray = |y: f64| -> Result<Option<f64>> {
        let trace = loc.on_line(y)?;
        bounded(hoermander_norm(&pullback.translated(Complex64::new(0.0, -y)), &trace, v, 0.0, cfg))
    };
    let upper = ray(angle)?;
    let lower = ray(-angle)?;
    let ratio = match (sector, upper, lower) {
        (Some(s), Some(u), Some(l)) if s > 0.0 => Some((u * u + l * l) / (s * s)),
        _ => None,
    };
    Ok(BoundaryRayReport {
        sector,
        upper,
        lower,
        ratio,
        consistent: sector.is_some() == (upper.is_some() && lower.is_some()),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityWitness {
    pub atoms: usize,
    pub norm: f64,
    /// Norm of the W²_v-orthogonal projection onto the atom span.
    pub projected_norm: f64,
    /// `‖f - Pf‖ / ‖f‖`
    pub residual: f64,
}

/// Widths of the atoms `w ↦ exp(-(log w - t)²/σ²)`; translates fill `[-6, 6]`.
const ATOM_WIDTHS: [f64; 4] = [0.35, 0.7, 1.4, 2.8];
const ATOM_REACH: f64 = 6.0;

/// Projects `f` onto the span of `atoms` Gaussian pullback atoms (a multiple
/// of 4) in `W²_v(S_ω)` by least squares on the weighted coefficients.
pub fn density_witness(f: &SectorFunctionRep, atoms: usize) -> Result<DensityWitness> {
    if atoms == 0 || !atoms.is_multiple_of(ATOM_WIDTHS.len()) {
        return Err(Error::Config(format!("atom count must be a positive multiple of 4, got {atoms}")));
    }
    let rep = &f.pullback;
    let grid = *rep.grid();
    let h = grid.spacing();
    let v = rep.weight();
    let omega = rep.omega();
    let scale: Vec<f64> = grid.abscissae().map(|s| (h).sqrt() * v.evaluate(s) * (omega * s.abs()).exp()).collect();
    let per = atoms / ATOM_WIDTHS.len();
    let translates: Vec<f64> = (0..per)
        .map(|k| if per == 1 { 0.0 } else { -ATOM_REACH + 2.0 * ATOM_REACH * k as f64 / (per - 1) as f64 })
        .collect();
    let mut columns = Vec::with_capacity(atoms);
    for &sigma in &ATOM_WIDTHS {
        for &t in &translates {
            let col: Vec<Complex64> = grid
                .abscissae()
                .zip(&scale)
                .map(|(s, w)| {
                    let g = sigma * (-(sigma * s).powi(2) / 4.0).exp() / (2.0 * PI.sqrt());
                    Complex64::from_polar(g * w, t * s)
                })
                .collect();
            columns.push(DVector::from_vec(col));
        }
    }
    let a = DMatrix::from_columns(&columns);
    let b = DVector::from_iterator(grid.points(), rep.coeff().values().iter().zip(&scale).map(|(g, w)| g * *w));
    let norm = b.norm();
    if norm == 0.0 {
        return Err(Error::Degenerate("zero function".into()));
    }
    let svd = a.clone().svd(true, true);
    let cutoff = 1e-12 * svd.singular_values.max();
    let coeffs = svd
        .solve(&b, cutoff)
        .map_err(|e| Error::Degenerate(format!("atom least squares failed: {e}")))?;
    let projected = &a * coeffs;
    Ok(DensityWitness {
        atoms,
        norm,
        projected_norm: projected.norm(),
        residual: (&b - &projected).norm() / norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn kernel() -> HolFn {
        HolFn::new("w/(1+w)^2", PI, |w| w / ((1.0 + w) * (1.0 + w)))
    }

    #[test]
    fn modulated_gaussian_pullback() {
        let grid = Grid::default();
        let v = Weight::polynomial(1.0).unwrap();
        let f = HolFn::new("w^{-2i} exp(-log²w)", PI, |w| {
            let l = w.ln();
            (c(0.0, -2.0) * l - l * l).exp()
        });
        let sector = SectorFunctionRep::fit(&f, grid, 0.4, v.clone()).unwrap();
        let strip = StripFunctionRep::modulated_gaussian(2.0, grid, 0.4, v).unwrap();
        assert!((sector.sobolev_norm() - strip.sobolev_norm()).abs() < 1e-10 * strip.sobolev_norm());
        assert!(sector.consistency_error(&f) < 1e-10);
        assert!((sector.evaluate(c(0.0, 1.0)).is_err()));
    }

    #[test]
    fn constants_diverge() {
        let r = sector_sobolev_norm_of(&HolFn::one(), Grid::default(), 0.3, Weight::constant());
        assert!(matches!(r, Err(Error::Divergence { .. })));
        let p = sector_sobolev_norm_of(&HolFn::imaginary_power(2.0), Grid::default(), 0.3, Weight::constant());
        assert!(matches!(p, Err(Error::Divergence { .. })));
    }

    #[test]
    fn kernel_norm_by_quadrature() {
        // w/(1+w)² pulls back to 1/(4cosh²(z/2)), whose coefficient is
        // s/(2 sinh(πs)); the norm squared on St_ω is ∫ e^{2ω|s|} s²/(4 sinh²(πs)) ds.
        let omega = 0.5;
        let grid = Grid::default();
        let rep = SectorFunctionRep::fit(&kernel(), grid, omega, Weight::constant()).unwrap();
        let density = |s: f64| {
            if s == 0.0 {
                1.0 / (4.0 * PI * PI)
            } else {
                (2.0 * omega * s.abs()).exp() * s * s / (4.0 * (PI * s).sinh().powi(2))
            }
        };
        let same_grid = (grid.spacing() * grid.abscissae().map(density).sum::<f64>()).sqrt();
        assert!((rep.sobolev_norm() - same_grid).abs() < 1e-10 * same_grid);
        // the kink of e^{ω|s|} at 0 leaves an O(h²) quadrature error
        let rule = gauss_quad::GaussLegendre::new(200.try_into().unwrap());
        let want = (2.0 * rule.integrate(0.0, 30.0, density)).sqrt();
        assert!((rep.sobolev_norm() - want).abs() < 1e-4 * want, "{} vs {want}", rep.sobolev_norm());
    }

    #[test]
    fn hoermander_of_imaginary_powers() {
        let cfg = HoermanderConfig::default();
        let loc = Localizer::gaussian();
        let v = Weight::polynomial(1.0).unwrap();
        let omega = 0.3;
        let mut ratios = Vec::new();
        for s0 in [0.0, 2.0, 5.0, 10.0] {
            let est = sector_hoermander_norm(&HolFn::imaginary_power(s0), omega, &loc, &v, &cfg).unwrap();
            ratios.push(est.value / ((1.0 + s0) * (omega * s0).exp()));
        }
        let (lo, hi) = ratios.iter().fold((f64::MAX, 0.0f64), |b, &r| (b.0.min(r), b.1.max(r)));
        assert!(hi / lo < 3.0, "{ratios:?}");
        let zero = sector_hoermander_norm(&HolFn::zero(), omega, &loc, &v, &cfg).unwrap();
        assert_eq!(zero.value, 0.0);
        let bounded = HolFn::new("1/(1+w)", PI, |w| (1.0 + w).inv());
        assert!(sector_hoermander_norm(&bounded, 1.0, &loc, &v, &cfg).unwrap().value.is_finite());
    }

    #[test]
    fn bump_support() {
        assert!(matches!(Bump::new(0.0, 2.0), Err(Error::Domain(_))));
        let b = Bump::default();
        assert_eq!(b.eval(1.25), 1.0);
        assert_eq!(b.eval(0.5), 0.0);
    }

    #[test]
    fn classical_check_of_constant() {
        let cfg = HoermanderConfig::default();
        let r = classical_hoermander_check(&HolFn::one(), 1.0, &Bump::default(), &Localizer::gaussian(), &cfg).unwrap();
        let first = r.profile[0].1;
        assert!(r.profile.iter().all(|p| p.1 == first));
        assert!(r.dilation_sup.is_finite() && r.sector > 0.0);
        assert!(classical_hoermander_check(&HolFn::one(), 0.5, &Bump::default(), &Localizer::gaussian(), &cfg).is_err());
    }

    /// 1/(1 + w^{-n}), evaluated without overflow.
    fn step(w: Complex64, n: i32) -> Complex64 {
        if w.norm() >= 1.0 {
            (1.0 + w.powi(-n)).inv()
        } else {
            let p = w.powi(n);
            p / (1.0 + p)
        }
    }

    fn gl(n: usize) -> gauss_quad::GaussLegendre {
        gauss_quad::GaussLegendre::new(n.try_into().unwrap())
    }

    /// Both sides of the classical check for m(λ) = λ^{is₀}, by direct quadrature.
    fn power_oracle(s0: f64, alpha: f64) -> (f64, f64) {
        let eta = Bump::default();
        let fine = gl(400);
        let fhat = |xi: f64| -> Complex64 {
            let pairs = fine.as_node_weight_pairs();
            pairs
                .iter()
                .map(|&(x, w)| {
                    let s = 1.25 + 0.75 * x;
                    let phase = s0 * s.ln() - xi * s;
                    Complex64::from_polar(0.75 * w * eta.eval(s), phase)
                })
                .sum()
        };
        let panels = gl(32);
        let mut acc = 0.0;
        for k in 0..400 {
            let (a, b) = (-200.0 + k as f64, -199.0 + k as f64);
            acc += panels.integrate(a, b, |xi| (1.0 + xi.abs()).powf(2.0 * alpha) * fhat(xi).norm_sqr());
        }
        let dilation = (acc / (2.0 * PI)).sqrt();
        let mut sect = 0.0;
        for k in 0..80 {
            let (a, b) = (-40.0 + k as f64, -39.0 + k as f64);
            sect += panels.integrate(a, b, |s| {
                (1.0 + s.abs()).powf(2.0 * alpha) * (-(s + s0).powi(2) / 2.0).exp() / (4.0 * PI)
            });
        }
        (dilation, sect.sqrt())
    }

    /// Equivalence interval for `dilation sup / sector estimate` with the
    /// default bump, Gaussian window and α = 1, frozen from the quadrature oracle.
    const EQUIVALENCE: (f64, f64) = (1.5, 4.0);

    #[test]
    fn classical_check_of_powers() {
        let cfg = HoermanderConfig::default();
        let loc = Localizer::gaussian();
        for s0 in [0.0, 1.0, 3.0] {
            let (dil, sect) = power_oracle(s0, 1.0);
            assert!((EQUIVALENCE.0..=EQUIVALENCE.1).contains(&(dil / sect)));
            let r = classical_hoermander_check(&HolFn::imaginary_power(-s0), 1.0, &Bump::default(), &loc, &cfg).unwrap();
            assert!((r.dilation_sup - dil).abs() < 1e-4 * dil, "{} vs {dil}", r.dilation_sup);
            assert!((r.sector - sect).abs() < 1e-5 * sect, "{} vs {sect}", r.sector);
        }
        let smooth = HolFn::new("step4", PI / 4.0, |w| step(w, 4));
        let r = classical_hoermander_check(&smooth, 1.0, &Bump::default(), &loc, &cfg).unwrap();
        assert!((EQUIVALENCE.0..=EQUIVALENCE.1).contains(&r.ratio), "{}", r.ratio);
    }

    #[test]
    fn sharp_step_diverges_on_both_sides() {
        let jump = HolFn::new("step", f64::MIN_POSITIVE, |w| {
            Complex64::new(if w.re > 1.0 { 1.0 } else if w.re == 1.0 { 0.5 } else { 0.0 }, 0.0)
        });
        let loc = Localizer::gaussian();
        let cfg = HoermanderConfig::default();
        assert!(matches!(
            classical_hoermander_check(&jump, 1.0, &Bump::default(), &loc, &cfg),
            Err(Error::Divergence { .. })
        ));
        let us: Vec<f64> = (0..=40).map(|k| -1.0 + 0.05 * k as f64).collect();
        let sup = |grid: Grid| {
            dilation_profile(&jump, 1.0, &Bump::default(), &us, grid)
                .unwrap()
                .iter()
                .map(|p| p.1)
                .fold(0.0, f64::max)
        };
        // a jump is outside W^{1,2}: the discrete norm grows like h^{-1/2}
        let coarse = sup(Grid::new(32.0, 16384).unwrap());
        let fine = sup(Grid::new(32.0, 65536).unwrap());
        assert!(fine > 1.15 * coarse, "{coarse} -> {fine}");
        let v = Weight::polynomial(1.0).unwrap();
        let pull = jump.sector_pullback(f64::MIN_POSITIVE);
        let profile = |grid: Grid| {
            let c = HoermanderConfig { grid, ..cfg };
            crate::hoermander::hoermander_profile(&pull, &loc, &v, 0.0, &c).unwrap().value
        };
        let narrow = profile(Grid::default());
        let wide = profile(Grid::new(64.0, 8192).unwrap());
        assert!(wide > 1.15 * narrow, "{narrow} -> {wide}");
    }

    #[test]
    fn boundary_rays() {
        let cfg = HoermanderConfig::default();
        let loc = Localizer::gaussian();
        let v = Weight::polynomial(1.0).unwrap();
        for f in [kernel(), HolFn::imaginary_power(1.5), HolFn::new("1/(1+w)", PI, |w| (1.0 + w).inv())] {
            let r = boundary_ray_check(&f, 0.6, &loc, &v, &cfg).unwrap();
            assert!(r.consistent, "{}", f.label());
            let ratio = r.ratio.unwrap();
            assert!((0.5..=2.0).contains(&ratio), "{}: {ratio}", f.label());
        }
        let log = HolFn::new("log", PI, |w| w.ln());
        let r = boundary_ray_check(&log, 0.6, &loc, &v, &cfg).unwrap();
        assert!(r.sector.is_none() && r.upper.is_none() && r.lower.is_none() && r.consistent);
    }

    #[test]
    fn density_of_gaussian_atoms() {
        let v = Weight::polynomial(1.0).unwrap();
        let rep = SectorFunctionRep::fit(&kernel(), Grid::default(), 0.5, v).unwrap();
        let w = density_witness(&rep, 64).unwrap();
        assert!(w.projected_norm >= 0.95 * w.norm, "{w:?}");
        assert!(w.projected_norm <= w.norm * (1.0 + 1e-9));
        assert!(density_witness(&rep, 30).is_err());
    }

    #[test]
    fn save_and_load() {
        let dir = tempfile::tempdir().unwrap();
        let rep = SectorFunctionRep::fit(&kernel(), Grid::new(16.0, 1024).unwrap(), 0.5, Weight::constant()).unwrap();
        rep.save(dir.path().join("k")).unwrap();
        let json: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("k.json")).unwrap()).unwrap();
        assert_eq!(json["coords"], "log");
        assert_eq!(json["angle"], 0.5);
        let back = SectorFunctionRep::load(dir.path().join("k")).unwrap();
        assert_eq!(back.pullback().coeff(), rep.pullback().coeff());
        assert_eq!(back.angle(), 0.5);
    }
}
