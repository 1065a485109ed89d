//! Admissible weights `v ≥ 1` with `sup v(s+t)/(v(s)+v(t)) < ∞`, and their
//! sampled diagnostics.

use std::f64::consts::E;
use std::fmt;
use std::path::Path;
use std::sync::{Arc, OnceLock};

use gauss_quad::GaussLegendre;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampling::{Grid, SampledFunction};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum WeightFamily {
    /// (1+|s|)^α
    Polynomial { alpha: f64 },
    /// (1+|s|)^α · ln(e+|s|)^β
    PolyLog { alpha: f64, beta: f64 },
    Constant,
    /// Piecewise-linear through tabulated points, constant beyond the ends.
    Table { source: Option<String> },
    Custom { label: String },
    /// Mollified version of another weight.
    Smoothed {
        width: f64,
        base: Box<WeightFamily>,
        equivalence_ratio: f64,
        ratio_bound: f64,
    },
}

type Eval = dyn Fn(f64) -> f64 + Send + Sync;

#[derive(Clone)]
pub struct Weight {
    family: WeightFamily,
    eval: Arc<Eval>,
    report: Arc<OnceLock<Result<AdmissibilityReport>>>,
}

impl fmt::Debug for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Weight").field("family", &self.family).finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DoublingTrend {
    Bounded,
    Diverging,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    /// Sampled lower estimate of M_v.
    pub m_v_estimate: f64,
    pub doubling_sup: f64,
    pub doubling_trend: DoublingTrend,
    /// max doubling ratio on [R/2, R] over the max on [R/4, R/2]
    pub window_growth: f64,
    pub growth_exponent: f64,
    pub strongly_admissible: bool,
    /// ∫ 1/v² over ℝ (quadrature on [-R, R] plus tail bound) when certified.
    pub inv_square_integral: Option<f64>,
    pub scan_range: f64,
    pub samples: usize,
}

/// Slack added to every downstream use of the sampled M_v.
pub const M_V_SLACK: f64 = 1e-6;
const TREND_THRESHOLD: f64 = 1.05;
const STRONG_MARGIN: f64 = 0.05;
const DEFAULT_SCAN: f64 = 1e3;
const DEFAULT_SAMPLES: usize = 1000;

impl Weight {
    fn from_parts(family: WeightFamily, eval: Arc<Eval>) -> Self {
        Weight {
            family,
            eval,
            report: Arc::new(OnceLock::new()),
        }
    }

    pub fn polynomial(alpha: f64) -> Result<Self> {
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidWeight(format!("exponent must be >= 0, got {alpha}")));
        }
        Ok(Self::from_parts(
            WeightFamily::Polynomial { alpha },
            Arc::new(move |s: f64| (1.0 + s.abs()).powf(alpha)),
        ))
    }

    pub fn polylog(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha >= 0.0 && beta >= 0.0 && alpha.is_finite() && beta.is_finite()) {
            return Err(Error::InvalidWeight(format!(
                "exponents must be >= 0, got ({alpha}, {beta})"
            )));
        }
        Ok(Self::from_parts(
            WeightFamily::PolyLog { alpha, beta },
            Arc::new(move |s: f64| (1.0 + s.abs()).powf(alpha) * (E + s.abs()).ln().powf(beta)),
        ))
    }

    pub fn constant() -> Self {
        Self::from_parts(WeightFamily::Constant, Arc::new(|_| 1.0))
    }

    /// Piecewise-linear weight through `(s, v)` points.
    pub fn table(mut points: Vec<(f64, f64)>, source: Option<String>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidWeight("table needs at least two points".into()));
        }
        if points.iter().any(|(s, v)| !s.is_finite() || !v.is_finite()) {
            return Err(Error::Input("non-finite table entry".into()));
        }
        if let Some((s, v)) = points.iter().find(|(_, v)| *v < 1.0) {
            return Err(Error::InvalidWeight(format!("v({s}) = {v} < 1")));
        }
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        let pts: Arc<[(f64, f64)]> = points.into();
        let eval = move |s: f64| {
            let k = pts.partition_point(|p| p.0 <= s);
            if k == 0 {
                pts[0].1
            } else if k == pts.len() {
                pts[pts.len() - 1].1
            } else {
                let (a, b) = (pts[k - 1], pts[k]);
                a.1 + (b.1 - a.1) * (s - a.0) / (b.0 - a.0)
            }
        };
        Ok(Self::from_parts(WeightFamily::Table { source }, Arc::new(eval)))
    }

    /// Reads a headerless or `s,v`-headed two-column CSV.
    pub fn load_table(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut rd = csv::ReaderBuilder::new()
            .has_headers(false)
            .from_path(path)?;
        let mut points = Vec::new();
        for rec in rd.records() {
            let rec = rec?;
            let parse = |i: usize| rec.get(i).and_then(|x| x.trim().parse::<f64>().ok());
            match (parse(0), parse(1)) {
                (Some(s), Some(v)) => points.push((s, v)),
                _ if points.is_empty() => continue, // header row
                _ => return Err(Error::Input(format!("bad row in {}", path.display()))),
            }
        }
        Self::table(points, Some(path.display().to_string()))
    }

    pub fn custom(label: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::from_parts(WeightFamily::Custom { label: label.into() }, Arc::new(f))
    }

    /// v^a as a custom weight.
    pub fn power(&self, a: f64) -> Self {
        let base = self.eval.clone();
        Self::custom(format!("({})^{a}", self.describe()), move |s| base(s).powf(a))
    }

    /// Parses `poly:α`, `polylog:α:β`, `const`, `table:<path>` (and `smooth:w:<spec>`).
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let bad = |m: &str| Error::Config(format!("weight '{spec}': {m}"));
        let num = |x: Option<&str>| -> Result<f64> {
            x.ok_or_else(|| bad("missing parameter"))?
                .parse::<f64>()
                .map_err(|e| bad(&e.to_string()))
        };
        if spec == "const" {
            return Ok(Self::constant());
        }
        if let Some(path) = spec.strip_prefix("table:") {
            return Self::load_table(path);
        }
        if let Some(rest) = spec.strip_prefix("smooth:") {
            let (w, base) = rest.split_once(':').ok_or_else(|| bad("expected smooth:<width>:<weight>"))?;
            return smooth_equivalent(&Self::parse(base)?, num(Some(w))?);
        }
        let mut parts = spec.split(':');
        match parts.next() {
            Some("poly") => Self::polynomial(num(parts.next())?),
            Some("polylog") => {
                let a = num(parts.next())?;
                Self::polylog(a, num(parts.next())?)
            }
            _ => Err(bad("unknown family")),
        }
    }

    /// Manifest spelling of this weight, when it has one.
    pub fn spec(&self) -> Option<String> {
        family_spec(&self.family)
    }

    pub fn describe(&self) -> String {
        self.spec().unwrap_or_else(|| match &self.family {
            WeightFamily::Custom { label } => label.clone(),
            _ => "table".into(),
        })
    }

    pub fn family(&self) -> &WeightFamily {
        &self.family
    }

    #[inline]
    pub fn evaluate(&self, s: f64) -> f64 {
        (self.eval)(s)
    }

    /// Diagnostics at the default scan range (10³, 10³ samples), computed once.
    pub fn diagnostics(&self) -> Result<AdmissibilityReport> {
        self.report
            .get_or_init(|| admissibility_report(self, DEFAULT_SCAN, DEFAULT_SAMPLES))
            .as_ref()
            .cloned()
            .map_err(|e| Error::InvalidWeight(e.to_string()))
    }

    /// Discrete ‖1/(v e^{ω|s|})‖₂ on `grid`, the constant of the embedding
    /// W²_v ⊂ A_𝟙 as realised on that grid.
    pub fn inverse_l2_on(&self, grid: &Grid, omega: f64) -> f64 {
        let h = grid.spacing();
        (h * grid
            .abscissae()
            .map(|s| (self.evaluate(s) * (omega * s.abs()).exp()).powi(-2))
            .sum::<f64>())
        .sqrt()
    }

    /// Discrete ‖1/v‖₁ on `grid`.
    pub fn inverse_l1_on(&self, grid: &Grid) -> f64 {
        grid.spacing() * grid.abscissae().map(|s| 1.0 / self.evaluate(s)).sum::<f64>()
    }

    /// `sup_{[-R,R]} v / (1+|s|)^γ` on a lattice.
    pub fn domination_constant(&self, gamma: f64, range: f64, samples: usize) -> f64 {
        symmetric_lattice(range, samples)
            .into_iter()
            .map(|s| self.evaluate(s) / (1.0 + s.abs()).powf(gamma))
            .fold(0.0, f64::max)
    }
}

fn family_spec(f: &WeightFamily) -> Option<String> {
    match f {
        WeightFamily::Polynomial { alpha } => Some(format!("poly:{alpha}")),
        WeightFamily::PolyLog { alpha, beta } => Some(format!("polylog:{alpha}:{beta}")),
        WeightFamily::Constant => Some("const".into()),
        WeightFamily::Table { source } => source.as_ref().map(|p| format!("table:{p}")),
        WeightFamily::Custom { .. } => None,
        WeightFamily::Smoothed { width, base, .. } => {
            family_spec(base).map(|b| format!("smooth:{width}:{b}"))
        }
    }
}

/// `{0} ∪ {±a_i}` with `a_i` exponentially spaced up to `range`.
fn symmetric_lattice(range: f64, samples: usize) -> Vec<f64> {
    let n = samples.max(2);
    let gamma = (1.0 + range).ln();
    let mut out = Vec::with_capacity(2 * n - 1);
    for i in 0..n {
        let a = range * (gamma * i as f64 / (n - 1) as f64).exp_m1() / gamma.exp_m1();
        out.push(a);
        if i > 0 {
            out.push(-a);
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

fn checked(v: &Weight, s: f64) -> Result<f64> {
    let x = v.evaluate(s);
    if !x.is_finite() {
        return Err(Error::Input(format!("weight is not finite at s = {s}")));
    }
    if x < 1.0 {
        return Err(Error::InvalidWeight(format!("v({s}) = {x} < 1")));
    }
    Ok(x)
}

/// Sampled admissibility diagnostics over `[-R, R]` (weight evaluated on `[-2R, 2R]`).
pub fn admissibility_report(v: &Weight, scan_range: f64, samples: usize) -> Result<AdmissibilityReport> {
    if !(scan_range > 0.0 && scan_range.is_finite()) {
        return Err(Error::Config(format!("scan range must be positive, got {scan_range}")));
    }
    if samples < 1000 {
        return Err(Error::Config(format!("need at least 1000 samples, got {samples}")));
    }
    let lattice = symmetric_lattice(scan_range, samples);
    let vals: Vec<f64> = lattice.iter().map(|&s| checked(v, s)).collect::<Result<_>>()?;

    let m_v_estimate = lattice
        .par_iter()
        .zip(vals.par_iter())
        .map(|(&s, &vs)| -> Result<f64> {
            let mut best = 0.0f64;
            for (&t, &vt) in lattice.iter().zip(&vals) {
                best = best.max(checked(v, s + t)? / (vs + vt));
            }
            Ok(best)
        })
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))?;

    let mut doubling_sup = 0.0f64;
    for (&t, &vt) in lattice.iter().zip(&vals) {
        doubling_sup = doubling_sup.max(checked(v, 2.0 * t)? / vt);
    }

    let window_max = |lo: f64, hi: f64| -> Result<f64> {
        let mut best = 0.0f64;
        for i in 0..samples {
            let t = lo + (hi - lo) * i as f64 / (samples - 1) as f64;
            for t in [t, -t] {
                best = best.max(checked(v, 2.0 * t)? / checked(v, t)?);
            }
        }
        Ok(best)
    };
    let r = scan_range;
    let window_growth = window_max(r / 2.0, r)? / window_max(r / 4.0, r / 2.0)?;
    let doubling_trend = if window_growth > TREND_THRESHOLD {
        DoublingTrend::Diverging
    } else {
        DoublingTrend::Bounded
    };

    // least-squares slope of ln v against ln(1+|s|) on ±[R/2, R]
    let (mut sx, mut sy, mut sxx, mut sxy, mut n) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for i in 0..samples {
        let s = r / 2.0 + (r / 2.0) * i as f64 / (samples - 1) as f64;
        for s in [s, -s] {
            let x = (1.0 + s.abs()).ln();
            let y = checked(v, s)?.ln();
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            n += 1.0;
        }
    }
    let growth_exponent = (n * sxy - sx * sy) / (n * sxx - sx * sx);

    let strongly_admissible = growth_exponent > 0.5 + STRONG_MARGIN;
    let inv_square_integral = if strongly_admissible {
        let body = inverse_square_quadrature(v, r)?;
        let tail = |s: f64| -> Result<f64> {
            // v(s) ≈ v(±R)((1+|s|)/(1+R))^α̂ beyond the scan range
            Ok(checked(v, s)?.powi(-2) * (1.0 + r) / (2.0 * growth_exponent - 1.0))
        };
        Some(body + tail(r)? + tail(-r)?)
    } else {
        None
    };

    Ok(AdmissibilityReport {
        m_v_estimate,
        doubling_sup,
        doubling_trend,
        window_growth,
        growth_exponent,
        strongly_admissible,
        inv_square_integral,
        scan_range,
        samples,
    })
}

/// ∫_{-R}^{R} v^{-2} by Gauss–Legendre on geometrically growing panels.
fn inverse_square_quadrature(v: &Weight, range: f64) -> Result<f64> {
    let rule = GaussLegendre::new(16.try_into().unwrap());
    let mut edges = vec![0.0];
    let mut x = 0.25;
    while x < range {
        edges.push(x);
        x *= 1.25;
    }
    edges.push(range);
    let mut total = 0.0;
    for w in edges.windows(2) {
        for sign in [1.0, -1.0] {
            let mut err = None;
            let part = rule.integrate(w[0], w[1], |s| match checked(v, sign * s) {
                Ok(x) => x.powi(-2),
                Err(e) => {
                    err = Some(e);
                    0.0
                }
            });
            if let Some(e) = err {
                return Err(e);
            }
            total += part;
        }
    }
    Ok(total)
}

/// Even mollification `ṽ = v ∗ η` with a normalised smooth bump of half-width
/// `width`; the sampled equivalence ratio `sup ṽ/v · sup v/ṽ` over `[-10³, 10³]`
/// is recorded in the returned family.
pub fn smooth_equivalent(v: &Weight, width: f64) -> Result<Weight> {
    if !(width > 0.0 && width.is_finite()) {
        return Err(Error::Input(format!("mollifier width must be positive, got {width}")));
    }
    let rule = GaussLegendre::new(48.try_into().unwrap());
    let kernel: Arc<[(f64, f64)]> = rule
        .as_node_weight_pairs()
        .iter()
        .map(|&(x, w)| {
            // nodes on (-1, 1) mapped to r ∈ (0, width)
            let u = 0.5 * (x + 1.0);
            let bump = (-1.0 / (1.0 - u * u)).exp();
            (u * width, 0.5 * w * width * bump)
        })
        .collect();
    let mollify = {
        let kernel = kernel.clone();
        move |f: &dyn Fn(f64) -> f64, s: f64| -> f64 {
            kernel.iter().map(|&(r, c)| c * (f(s - r) + f(s + r))).sum()
        }
    };
    let mass = mollify(&|_| 1.0, 0.0);
    let base = v.eval.clone();
    let eval = move |s: f64| mollify(&*base, s) / mass;

    let lattice = symmetric_lattice(DEFAULT_SCAN, DEFAULT_SAMPLES);
    let (mut up, mut down) = (0.0f64, 0.0f64);
    for &s in &lattice {
        let (a, b) = (eval(s), checked(v, s)?);
        up = up.max(a / b);
        down = down.max(b / a);
    }
    let equivalence_ratio = up * down;
    let m_v = admissibility_report(v, DEFAULT_SCAN, DEFAULT_SAMPLES)?.m_v_estimate + M_V_SLACK;
    let c = (0..=100)
        .map(|i| -width + 2.0 * width * i as f64 / 100.0)
        .map(|r| v.evaluate(r))
        .fold(0.0, f64::max);
    let ratio_bound = 4.0 * m_v * m_v * c * c;

    Ok(Weight::from_parts(
        WeightFamily::Smoothed {
            width,
            base: Box::new(v.family.clone()),
            equivalence_ratio,
            ratio_bound,
        },
        Arc::new(eval),
    ))
}

/// ‖v e^{ω|s|} f‖_{L^p} by trapezoidal quadrature (max for p = ∞).
pub fn weighted_norm(f: &SampledFunction, v: &Weight, omega: f64, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::Config(format!("p must lie in [1, ∞], got {p}")));
    }
    if omega < 0.0 {
        return Err(Error::Config(format!("strip height must be >= 0, got {omega}")));
    }
    let weighted = f
        .iter()
        .map(|(s, g)| v.evaluate(s) * (omega * s.abs()).exp() * g.norm());
    if p.is_infinite() {
        return Ok(weighted.fold(0.0, f64::max));
    }
    let h = f.grid().spacing();
    Ok((h * weighted.map(|x| x.powf(p)).sum::<f64>()).powf(1.0 / p))
}
