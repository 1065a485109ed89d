//! Functions on the strip `St_ω = {|Im z| < ω}` stored through their
//! Fourier-side coefficient `g = f^∨`, so that `f(z) = ∫ e^{-izs} g(s) ds`.
//!
//! Norms: W²_v(St_ω) is `‖v e^{ω|s|} g‖₂`, A_v(St_ω) is `‖v e^{ω|s|} g‖₁`,
//! H²(St_ω) is `sup_{|y|<ω} ‖f(· + iy)‖₂ = √(2π) sup_y ‖e^{ys} g‖₂`.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functions::HolFn;
use crate::sampling::{self, Grid, SampledFunction};
use crate::weights::{weighted_norm, Weight};

type CoeffFn = dyn Fn(f64) -> Complex64 + Send + Sync;

#[derive(Clone)]
enum Source {
    Coefficient(Arc<CoeffFn>),
    Function(HolFn),
    Samples,
}

/// Spot checks for closed-form and fitted reps must agree this well.
pub const SPOT_CHECK_TOL: f64 = 1e-8;
/// Relative tolerance of the doubled-grid convergence flag.
pub const GRID_CONVERGENCE_TOL: f64 = 1e-4;
const FIT_TOL: f64 = 1e-6;
const TAIL_EDGE: f64 = 0.05;
const TAIL_TOL: f64 = 1e-6;

#[derive(Clone)]
pub struct StripFunctionRep {
    coeff: SampledFunction,
    omega: f64,
    weight: Weight,
    label: String,
    spot_checks: Vec<(Complex64, Complex64)>,
    source: Source,
    exact: Option<HolFn>,
}

impl fmt::Debug for StripFunctionRep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StripFunctionRep")
            .field("label", &self.label)
            .field("omega", &self.omega)
            .field("weight", &self.weight)
            .field("grid", self.coeff.grid())
            .finish()
    }
}

/// A norm together with its value on the refined grid `(L, 2N)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub value: f64,
    pub refined: Option<f64>,
    pub converged: bool,
}

impl NormReport {
    fn compare(value: f64, refined: Option<f64>) -> Self {
        let converged = match refined {
            Some(r) => (r - value).abs() <= GRID_CONVERGENCE_TOL * value.abs().max(r.abs()).max(f64::MIN_POSITIVE),
            None => true,
        };
        NormReport { value, refined, converged }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HardyNorm {
    pub value: f64,
    pub argmax_y: f64,
}

/// `x ↦ f(x + iy)` sampled on the grid dual to the coefficient grid.
#[derive(Debug, Clone, PartialEq)]
pub struct LineFunction {
    pub samples: SampledFunction,
    pub ordinate: f64,
}

impl LineFunction {
    /// ‖v · (f_{|y})^∨‖₂, the W²_v(ℝ) norm of the line function.
    pub fn sobolev_norm(&self, v: &Weight) -> f64 {
        let coeff = sampling::fourier_inverse(&self.samples);
        weighted_norm(&coeff, v, 0.0, 2.0).expect("p = 2 is valid")
    }
}

#[derive(Debug, Clone)]
pub struct BoundaryValues {
    pub upper: LineFunction,
    pub lower: LineFunction,
    /// `(δ, ‖f_{|ω-δ} - f_{|ω}‖₂)` for δ = 0.1, 0.01, 0.001.
    pub continuity: Vec<(f64, f64)>,
}

fn cis(x: f64) -> Complex64 {
    Complex64::from_polar(1.0, x)
}

/// Coefficient of the function given on the lines `Im z = ±ω`:
/// `e^{ωs} g = (f_{|ω})^∨` is used for `s > 0` and `e^{-ωs} g = (f_{|-ω})^∨`
/// for `s < 0`, so the exponential weight never amplifies rounding.
pub(crate) fn coefficient_from_lines(
    upper: &SampledFunction,
    lower: &SampledFunction,
    omega: f64,
) -> Result<SampledFunction> {
    let up = sampling::fourier_inverse(upper);
    let lo = sampling::fourier_inverse(lower);
    let grid = *up.grid();
    let values = (0..grid.points())
        .map(|k| {
            let (s, u, l) = (grid.point(k), up.values()[k], lo.values()[k]);
            if s > 0.0 {
                u * (-omega * s).exp()
            } else if s < 0.0 {
                l * (omega * s).exp()
            } else {
                (u + l) * 0.5
            }
        })
        .collect();
    SampledFunction::new(grid, values)
}

/// Weighted coefficient `v(s) e^{ω|s|} g(s)` of a function known on `Im z = ±ω`.
pub(crate) fn weighted_coefficient_from_lines(
    upper: &SampledFunction,
    lower: &SampledFunction,
    v: &Weight,
) -> SampledFunction {
    let up = sampling::fourier_inverse(upper);
    let lo = sampling::fourier_inverse(lower);
    let grid = *up.grid();
    let values = up
        .values()
        .iter()
        .zip(lo.values())
        .enumerate()
        .map(|(k, (u, l))| {
            let s = grid.point(k);
            let c = if s > 0.0 {
                *u
            } else if s < 0.0 {
                *l
            } else {
                (u + l) * 0.5
            };
            c * v.evaluate(s)
        })
        .collect();
    SampledFunction::new(grid, values).expect("finite inputs give finite outputs")
}

impl StripFunctionRep {
    /// Wraps a coefficient without spot checks.
    pub fn from_coefficient(
        coeff: SampledFunction,
        omega: f64,
        weight: Weight,
        label: impl Into<String>,
    ) -> Result<Self> {
        let rep = StripFunctionRep {
            coeff,
            omega,
            weight,
            label: label.into(),
            spot_checks: Vec::new(),
            source: Source::Samples,
            exact: None,
        };
        rep.validate()?;
        Ok(rep)
    }

    /// Coefficient given in closed form, checked against `f` at three points.
    pub fn from_closed_form(
        grid: Grid,
        omega: f64,
        weight: Weight,
        coefficient: impl Fn(f64) -> Complex64 + Send + Sync + 'static,
        f: &HolFn,
    ) -> Result<Self> {
        let coefficient: Arc<CoeffFn> = Arc::new(coefficient);
        let coeff = SampledFunction::from_fn(grid, |s| coefficient(s))?;
        let mut rep = StripFunctionRep {
            coeff,
            omega,
            weight,
            label: f.label().to_string(),
            spot_checks: Vec::new(),
            source: Source::Coefficient(coefficient),
            exact: Some(f.clone()),
        };
        rep.validate()?;
        rep.record_spot_checks(f, SPOT_CHECK_TOL)?;
        Ok(rep)
    }

    /// r_λ = (λ - z)^{-1} with |Im λ| > ω: `g = -i e^{iλs} 𝟙_{s>0}` for Im λ > 0,
    /// `g = i e^{iλs} 𝟙_{s<0}` for Im λ < 0.
    pub fn resolvent(lambda: Complex64, grid: Grid, omega: f64, weight: Weight) -> Result<Self> {
        if lambda.im.abs() <= omega {
            return Err(Error::Domain(format!(
                "resolvent at {lambda} is not holomorphic on St_{omega}"
            )));
        }
        let upper = lambda.im > 0.0;
        let i = Complex64::i();
        let coefficient = move |s: f64| {
            let e = (i * lambda * s).exp();
            let side = if s == 0.0 {
                0.5
            } else if (s > 0.0) == upper {
                1.0
            } else {
                0.0
            };
            if upper {
                -i * e * side
            } else {
                i * e * side
            }
        };
        Self::from_closed_form(grid, omega, weight, coefficient, &HolFn::resolvent(lambda))
    }

    /// e^{-z²}, coefficient e^{-s²/4}/(2√π).
    pub fn gaussian(grid: Grid, omega: f64, weight: Weight) -> Result<Self> {
        Self::modulated_gaussian(0.0, grid, omega, weight)
    }

    /// e^{-is₀z} e^{-z²}, coefficient e^{-(s-s₀)²/4}/(2√π).
    pub fn modulated_gaussian(s0: f64, grid: Grid, omega: f64, weight: Weight) -> Result<Self> {
        let f = HolFn::modulation(s0).product(&HolFn::gaussian());
        Self::from_closed_form(
            grid,
            omega,
            weight,
            move |s| Complex64::new((-(s - s0).powi(2) / 4.0).exp() / (2.0 * PI.sqrt()), 0.0),
            &f,
        )
    }

    /// Fit-then-verify: coefficient from samples on `Im z = ±ω` (the centre
    /// line when ω = 0), then checked at three interior points.
    pub fn fit(f: &HolFn, grid: Grid, omega: f64, weight: Weight) -> Result<Self> {
        if omega >= f.height() {
            return Err(Error::Domain(format!(
                "{} is holomorphic only on St_{}, asked for St_{omega}",
                f.label(),
                f.height()
            )));
        }
        let lines = grid.dual();
        let coeff = if omega == 0.0 {
            sampling::fourier_inverse(&f.line_samples(0.0, lines)?)
        } else {
            coefficient_from_lines(&f.line_samples(omega, lines)?, &f.line_samples(-omega, lines)?, omega)?
        };
        let scale = f.line_samples(0.0, lines)?.norm_sup().max(f64::MIN_POSITIVE);
        let mut rep = StripFunctionRep {
            coeff,
            omega,
            weight,
            label: f.label().to_string(),
            spot_checks: Vec::new(),
            source: Source::Function(f.clone()),
            exact: Some(f.clone()),
        };
        rep.validate()?;
        rep.record_spot_checks(f, FIT_TOL * scale)?;
        Ok(rep)
    }

    /// Closed-form coefficient for `gaussian` and `resolvent:re:im` specs
    /// (whose coefficient jumps, so sampling would alias); [`Self::fit`] otherwise.
    pub fn from_spec(spec: &str, grid: Grid, omega: f64, weight: Weight) -> Result<Self> {
        let parts: Vec<&str> = spec.trim().split(':').collect();
        match parts.as_slice() {
            ["gaussian"] => Self::gaussian(grid, omega, weight),
            ["resolvent", re, im] => {
                let num = |x: &str| {
                    x.parse::<f64>()
                        .map_err(|e| Error::Config(format!("function '{spec}': {e}")))
                };
                Self::resolvent(Complex64::new(num(re)?, num(im)?), grid, omega, weight)
            }
            _ => Self::fit(&HolFn::parse(spec)?, grid, omega, weight),
        }
        .map(|r| r.with_label(spec))
    }

    pub fn zero(grid: Grid, omega: f64, weight: Weight) -> Self {
        StripFunctionRep {
            coeff: SampledFunction::zeros(grid),
            omega,
            weight,
            label: "zero".into(),
            spot_checks: Vec::new(),
            source: Source::Samples,
            exact: Some(HolFn::zero()),
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.omega >= 0.0 && self.omega.is_finite()) {
            return Err(Error::Config(format!("strip height must be >= 0, got {}", self.omega)));
        }
        let n = self.sobolev_norm();
        if !n.is_finite() {
            return Err(Error::divergence("coefficient not in L²_{v,ω} on the grid", n));
        }
        Ok(())
    }

    fn reference_points(&self) -> [Complex64; 3] {
        let w = self.omega;
        [
            Complex64::new(0.1, 0.0),
            Complex64::new(0.4, 0.5 * w),
            Complex64::new(-0.8, -0.5 * w),
        ]
    }

    fn record_spot_checks(&mut self, f: &HolFn, tol: f64) -> Result<()> {
        let mut worst = 0.0f64;
        self.spot_checks.clear();
        for z in self.reference_points() {
            let exact = f.eval(z);
            worst = worst.max((self.evaluate(z) - exact).norm());
            self.spot_checks.push((z, exact));
        }
        if worst > tol || !worst.is_finite() {
            return Err(Error::FitVerification {
                max_error: worst,
                tolerance: tol,
            });
        }
        Ok(())
    }

    /// Largest deviation from the stored spot-check values.
    pub fn spot_check_error(&self) -> f64 {
        self.spot_checks
            .iter()
            .map(|(z, v)| (self.evaluate(*z) - v).norm())
            .fold(0.0, f64::max)
    }

    pub fn coeff(&self) -> &SampledFunction {
        &self.coeff
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn weight(&self) -> &Weight {
        &self.weight
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn grid(&self) -> &Grid {
        self.coeff.grid()
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Same coefficient measured with another weight.
    pub fn with_weight(&self, weight: Weight) -> Self {
        StripFunctionRep {
            weight,
            ..self.clone()
        }
    }

    /// f(z) = ∫ e^{-izs} g(s) ds (Romberg-extrapolated trapezoid).
    pub fn evaluate(&self, z: Complex64) -> Complex64 {
        let grid = self.coeff.grid();
        let i = Complex64::i();
        let terms: Vec<Complex64> = self.coeff.iter().map(|(s, g)| g * (-i * z * s).exp()).collect();
        sampling::integral_romberg(&terms, grid.spacing())
    }

    /// The function this rep was built from, when known in closed form.
    pub fn exact(&self) -> Option<&HolFn> {
        self.exact.as_ref()
    }

    /// The closed form when known, else [`Self::to_holfn`].
    pub fn reference_fn(&self) -> HolFn {
        self.exact.clone().unwrap_or_else(|| self.to_holfn())
    }

    /// As a function usable wherever a [`HolFn`] is expected.
    pub fn to_holfn(&self) -> HolFn {
        let rep = self.clone();
        HolFn::new(self.label.clone(), self.omega, move |z| rep.evaluate(z))
    }

    /// Per-node `|g|^p` for the trapezoid rule. A closed-form coefficient that
    /// jumps at a node contributes the mean of its one-sided `|g±|^p` there,
    /// which the stored mid-value sample cannot supply.
    fn abs_pow(&self, p: f64) -> Vec<f64> {
        let mut out: Vec<f64> = self.coeff.values().iter().map(|g| g.norm().powf(p)).collect();
        if let Source::Coefficient(c) = &self.source {
            let eps = 1e-9 * self.grid().spacing();
            let scale = self.coeff.norm_sup();
            for (k, (s, _)) in self.coeff.iter().enumerate() {
                let (lo, hi) = (c(s - eps), c(s + eps));
                if (lo - hi).norm() > 1e-6 * scale {
                    out[k] = 0.5 * (lo.norm().powf(p) + hi.norm().powf(p));
                }
            }
        }
        out
    }

    fn weighted_pow_sum(&self, p: f64) -> f64 {
        let h = self.grid().spacing();
        let grid = *self.grid();
        let abs = self.abs_pow(p);
        h * grid
            .abscissae()
            .zip(abs)
            .map(|(s, a)| (self.weight.evaluate(s) * (self.omega * s.abs()).exp()).powf(p) * a)
            .sum::<f64>()
    }

    /// ‖v e^{ω|s|} g‖₂
    pub fn sobolev_norm(&self) -> f64 {
        self.weighted_pow_sum(2.0).sqrt()
    }

    /// ‖v e^{ω|s|} g‖₁; diverges when the weighted coefficient still carries
    /// mass at the grid edge.
    pub fn fourier_algebra_norm(&self) -> Result<f64> {
        let weighted = self.coeff.map(|s, g| g * self.weight.evaluate(s) * (self.omega * s.abs()).exp())?;
        let value = self.weighted_pow_sum(1.0);
        let tail = weighted.tail_fraction(TAIL_EDGE);
        if tail > TAIL_TOL {
            return Err(Error::divergence(
                format!("weighted coefficient has {tail:e} of its L¹ mass at the grid edge"),
                value,
            ));
        }
        Ok(value)
    }

    /// The same function rebuilt on `(L, 2N)`, when its source is known.
    pub fn refined(&self) -> Option<Result<StripFunctionRep>> {
        let grid = self.grid().refined();
        let rebuilt = match &self.source {
            Source::Samples => return None,
            Source::Coefficient(c) => {
                let c = c.clone();
                SampledFunction::from_fn(grid, |s| c(s)).map(|coeff| StripFunctionRep {
                    coeff,
                    spot_checks: self.spot_checks.clone(),
                    ..self.clone()
                })
            }
            Source::Function(f) => StripFunctionRep::fit(f, grid, self.omega, self.weight.clone()),
        };
        Some(rebuilt.map(|r| r.with_label(self.label.clone())))
    }

    fn report(&self, norm: impl Fn(&StripFunctionRep) -> Result<f64>) -> Result<NormReport> {
        let value = norm(self)?;
        let refined = match self.refined() {
            Some(r) => Some(norm(&r?)?),
            None => None,
        };
        Ok(NormReport::compare(value, refined))
    }

    pub fn sobolev_norm_report(&self) -> Result<NormReport> {
        self.report(|r| Ok(r.sobolev_norm()))
    }

    pub fn fourier_algebra_norm_report(&self) -> Result<NormReport> {
        self.report(|r| r.fourier_algebra_norm())
    }

    /// √(2π) sup_{|y| ≤ ω′} ‖e^{ys} g‖₂ over 64 ordinates plus a golden-section
    /// refinement around the best one.
    pub fn hardy2_norm(&self, omega_prime: f64) -> Result<HardyNorm> {
        if !(omega_prime > 0.0) {
            return Err(Error::Config(format!("ω′ must be positive, got {omega_prime}")));
        }
        let envelope = self.coeff.map(|s, g| g * (omega_prime * s.abs()).exp())?;
        let tail = envelope.tail_fraction(TAIL_EDGE);
        if tail > TAIL_TOL {
            return Err(Error::divergence(
                format!("e^{{ω′|s|}} g keeps {tail:e} of its mass at the grid edge"),
                f64::INFINITY,
            ));
        }
        let h = self.grid().spacing();
        let abs2 = self.abs_pow(2.0);
        let line_norm = |y: f64| -> f64 {
            (2.0 * PI * h * self.grid().abscissae().zip(&abs2).map(|(s, a)| (2.0 * y * s).exp() * a).sum::<f64>()).sqrt()
        };
        let count = 64;
        let step = 2.0 * omega_prime / (count - 1) as f64;
        let (mut best_y, mut best) = (-omega_prime, line_norm(-omega_prime));
        for k in 1..count {
            let y = -omega_prime + k as f64 * step;
            let v = line_norm(y);
            if v > best {
                best = v;
                best_y = y;
            }
        }
        // golden section on [best_y - step, best_y + step] ∩ [-ω′, ω′]
        let (mut a, mut b) = ((best_y - step).max(-omega_prime), (best_y + step).min(omega_prime));
        let phi = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..40 {
            let c = b - phi * (b - a);
            let d = a + phi * (b - a);
            if line_norm(c) >= line_norm(d) {
                b = d;
            } else {
                a = c;
            }
        }
        let y = 0.5 * (a + b);
        let v = line_norm(y);
        if v > best {
            best = v;
            best_y = y;
        }
        Ok(HardyNorm {
            value: best,
            argmax_y: best_y,
        })
    }

    /// f_{|y} = (e^{ys} g)^∧ on the dual grid.
    pub fn line(&self, y: f64) -> Result<LineFunction> {
        if y.abs() > self.omega * (1.0 + 1e-12) {
            return Err(Error::Domain(format!("ordinate {y} outside St_{}", self.omega)));
        }
        let shifted = self.coeff.map(|s, g| g * (y * s).exp())?;
        Ok(LineFunction {
            samples: sampling::fourier_forward(&shifted),
            ordinate: y,
        })
    }

    /// Both boundary lines plus the L² continuity check `f_{|ω-δ} → f_{|ω}`.
    pub fn boundary_values(&self) -> Result<BoundaryValues> {
        if self.omega == 0.0 {
            return Err(Error::Domain("boundary values need ω > 0".into()));
        }
        let upper = self.line(self.omega)?;
        let lower = self.line(-self.omega)?;
        let mut continuity = Vec::new();
        for delta in [0.1, 0.01, 0.001] {
            let inner = self.line(self.omega - delta)?;
            continuity.push((delta, inner.samples.sub(&upper.samples)?.norm_l2()));
        }
        Ok(BoundaryValues {
            upper,
            lower,
            continuity,
        })
    }

    /// (‖f_{|ω}‖² + ‖f_{|-ω}‖²) / ‖f‖², all in W²_v; lies in [1, 2].
    pub fn boundary_norm_ratio(&self) -> Result<f64> {
        let b = self.boundary_values()?;
        let total = self.sobolev_norm().powi(2);
        if total == 0.0 {
            return Err(Error::Degenerate("zero function".into()));
        }
        Ok((b.upper.sobolev_norm(&self.weight).powi(2) + b.lower.sobolev_norm(&self.weight).powi(2)) / total)
    }

    /// τ_t f, realised as the coefficient modulation e^{its} g.
    pub fn translate(&self, t: f64) -> StripFunctionRep {
        StripFunctionRep {
            coeff: self.coeff.map(|s, g| g * cis(t * s)).expect("unit modulus"),
            label: format!("{}(.-{t})", self.label),
            spot_checks: Vec::new(),
            source: Source::Samples,
            exact: self.exact.as_ref().map(|f| f.translated(Complex64::new(t, 0.0))),
            ..self.clone()
        }
    }

    /// Pointwise product, through (fg)^∨ = f^∨ ∗ g^∨.
    pub fn product(&self, other: &StripFunctionRep) -> Result<StripFunctionRep> {
        let coeff = sampling::convolve(&self.coeff, &other.coeff)?;
        let mut rep = StripFunctionRep::from_coefficient(
            coeff,
            self.omega.min(other.omega),
            self.weight.clone(),
            format!("{}*{}", self.label, other.label),
        )?;
        if let (Some(f), Some(g)) = (&self.exact, &other.exact) {
            rep.exact = Some(f.product(g));
        }
        Ok(rep)
    }

    /// Writes `<stem>.csv` (s, re, im) and `<stem>.json` {omega, weight_spec, label}.
    pub fn save(&self, stem: impl AsRef<Path>) -> Result<()> {
        let stem = stem.as_ref();
        self.coeff.save_csv(stem.with_extension("csv"))?;
        let sidecar = Sidecar {
            omega: self.omega,
            weight_spec: self.weight.spec(),
            label: self.label.clone(),
        };
        std::fs::write(stem.with_extension("json"), serde_json::to_string_pretty(&sidecar)?)?;
        Ok(())
    }

    pub fn load(stem: impl AsRef<Path>) -> Result<Self> {
        let stem = stem.as_ref();
        let coeff = SampledFunction::load_csv(stem.with_extension("csv"))?;
        let sidecar: Sidecar = serde_json::from_str(&std::fs::read_to_string(stem.with_extension("json"))?)?;
        let weight = match &sidecar.weight_spec {
            Some(spec) => Weight::parse(spec)?,
            None => return Err(Error::Input("rep was saved with an unnamed weight".into())),
        };
        Self::from_coefficient(coeff, sidecar.omega, weight, sidecar.label)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Sidecar {
    omega: f64,
    weight_spec: Option<String>,
    label: String,
}

/// Bessel-potential norm `(2π)^{-1/2} ‖(1+|ξ|)^α f̂‖₂` from samples on ℝ.
pub fn classical_sobolev_norm(samples: &SampledFunction, alpha: f64) -> f64 {
    let fhat = sampling::fourier_forward(samples);
    let h = fhat.grid().spacing();
    (h * fhat
        .iter()
        .map(|(xi, v)| (1.0 + xi.abs()).powf(2.0 * alpha) * v.norm_sqr())
        .sum::<f64>()
        / (2.0 * PI))
        .sqrt()
}
