//! Desk-scale applications: the angle ω_p, imaginary powers of symmetric
//! contraction semigroup generators on ℓ^p, a one-dimensional
//! Ornstein–Uhlenbeck model, and multiplier experiments.

mod contraction;
mod ou;

use std::io::Write;
use std::path::Path;

use gauss_quad::GaussLegendre;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calculus::{oracle_matrix, sector_calculus, StripMethod};
use crate::error::{Error, Result};
use crate::functions::HolFn;
use crate::hoermander::{HoermanderConfig, Localizer};
use crate::sector::sector_hoermander_norm;
use crate::weights::Weight;

pub use contraction::{ContractionModel, ContractivityReport, CHECK_TIMES, KERNEL_TOL};
pub use ou::{OUModel, OUSummary, GRAM_TOL, MAX_TRUNCATION};

/// Growth of the last dyadic window over the earlier ones counted as a trend.
pub const TREND_TOL: f64 = 1.05;
const HALF_ORDER_MARGIN: f64 = 0.05;
const HALF_ORDER_RANGE: f64 = 1e3;

/// `arcsin |1 − 2/p|` for `1 < p < ∞`.
pub fn omega_p(p: f64) -> Result<f64> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::Domain(format!("ω_p needs 1 < p < ∞, got {p}")));
    }
    Ok((1.0 - 2.0 / p).abs().asin())
}

/// `(1+|s|)^{1/2} e^{ω|s|}`
pub fn cd_envelope(s: f64, omega: f64) -> f64 {
    (1.0 + s.abs()).sqrt() * (omega * s.abs()).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthRow {
    pub s: f64,
    /// Lower estimate of `‖A^{-is}‖_{p→p}` on `ran A`.
    pub measured: f64,
    pub bound: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub model: String,
    pub p: f64,
    pub omega_p: f64,
    pub rows: Vec<GrowthRow>,
    pub fitted_c: f64,
    /// Max ratio in the outermost dyadic window of |s| over the max before it.
    pub window_growth: f64,
    pub passes: bool,
    /// `ran A = {0}`: nothing was measured.
    pub degenerate: bool,
}

#[derive(Serialize)]
struct GrowthSummary<'a> {
    model: &'a str,
    p: f64,
    fitted_c: f64,
    passes: bool,
}

impl GrowthReport {
    /// `s, measured, bound, ratio`
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["s", "measured", "bound", "ratio"])?;
        for r in &self.rows {
            wr.write_record([r.s, r.measured, r.bound, r.ratio].map(|x| format!("{x:.17e}")))?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn summary_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&GrowthSummary {
            model: &self.model,
            p: self.p,
            fitted_c: self.fitted_c,
            passes: self.passes,
        })?)
    }

    pub fn save(&self, stem: impl AsRef<Path>) -> Result<()> {
        let stem = stem.as_ref();
        self.write_csv(std::fs::File::create(stem.with_extension("csv"))?)?;
        std::fs::write(stem.with_extension("json"), self.summary_json()?)?;
        Ok(())
    }
}

/// Index of the dyadic window of |s|: [0, 1), [1, 2), [2, 4), ...
fn dyadic_window(s: f64) -> usize {
    if s.abs() < 1.0 {
        0
    } else {
        1 + s.abs().log2().floor() as usize
    }
}

/// Measures `‖A^{-is}‖_{p→p}` on `ran A` against `(1+|s|)^{1/2} e^{ω_p|s|}`.
pub fn cd_growth_check(model: &ContractionModel, p: f64, s_grid: &[f64]) -> Result<GrowthReport> {
    let omega = omega_p(p)?;
    if s_grid.is_empty() {
        return Err(Error::Config("empty s grid".into()));
    }
    let inj = match model.generator().with_p(p)?.injective_part() {
        Ok(m) => m,
        Err(Error::Degenerate(_)) => {
            return Ok(GrowthReport {
                model: model.label().to_string(),
                p,
                omega_p: omega,
                rows: Vec::new(),
                fitted_c: 0.0,
                window_growth: 0.0,
                passes: false,
                degenerate: true,
            })
        }
        Err(e) => return Err(e),
    };
    let rows: Vec<GrowthRow> = s_grid
        .par_iter()
        .map(|&s| -> Result<GrowthRow> {
            let measured = inj.operator_norm(&inj.imaginary_power(s)?)?.value;
            let bound = cd_envelope(s, omega);
            Ok(GrowthRow {
                s,
                measured,
                bound,
                ratio: measured / bound,
            })
        })
        .collect::<Result<_>>()?;
    let fitted_c = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let last = rows.iter().map(|r| dyadic_window(r.s)).max().unwrap_or(0);
    let (mut outer, mut inner) = (0.0f64, 0.0f64);
    for r in &rows {
        if dyadic_window(r.s) == last {
            outer = outer.max(r.ratio);
        } else {
            inner = inner.max(r.ratio);
        }
    }
    let window_growth = if inner > 0.0 { outer / inner } else { 1.0 };
    Ok(GrowthReport {
        model: model.label().to_string(),
        p,
        omega_p: omega,
        rows,
        fitted_c,
        window_growth,
        passes: fitted_c.is_finite() && window_growth <= TREND_TOL,
        degenerate: false,
    })
}

/// `∫ (1+|s|)/v(s)² ds`, i.e. `‖(1+|s|)^{1/2}/v‖₂²`; InvalidWeight unless the
/// growth exponent of `v` exceeds 1 by a margin.
pub fn half_order_condition(v: &Weight) -> Result<f64> {
    let alpha = v.diagnostics()?.growth_exponent;
    if !(alpha > 1.0 + HALF_ORDER_MARGIN) {
        return Err(Error::InvalidWeight(format!(
            "(1+|s|)^{{1/2}}/v is not square integrable: growth exponent {alpha:.3} <= 1"
        )));
    }
    let rule = GaussLegendre::new(16.try_into().expect("nonzero"));
    let density = |s: f64| (1.0 + s.abs()) / v.evaluate(s).powi(2);
    let mut edges = vec![0.0];
    let mut x = 0.25;
    while x < HALF_ORDER_RANGE {
        edges.push(x);
        x *= 1.25;
    }
    edges.push(HALF_ORDER_RANGE);
    let r = HALF_ORDER_RANGE;
    let mut total = 0.0;
    for w in edges.windows(2) {
        total += rule.integrate(w[0], w[1], density) + rule.integrate(w[0], w[1], |s| density(-s));
    }
    // v(s) ≈ v(±R)((1+|s|)/(1+R))^α beyond R
    for edge in [r, -r] {
        total += (1.0 + r).powi(2) / (v.evaluate(edge).powi(2) * (2.0 * alpha - 2.0));
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplierRow {
    pub label: String,
    /// `‖m(A)‖_{p→p}` on `ran A` (lower estimate unless p ∈ {1, 2, ∞}).
    pub operator_norm: f64,
    /// `‖m‖_{Hör²_v(S_{ω_p})}`
    pub hoermander: f64,
    pub ratio: f64,
    /// Relative deviation of the computed `m(A)` from `V diag(m(λ)) V⁻¹`.
    pub deviation_from_oracle: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplierReport {
    pub model: String,
    pub p: f64,
    pub omega_p: f64,
    /// `‖(1+|s|)^{1/2}/v‖₂²`
    pub half_order_integral: f64,
    pub rows: Vec<MultiplierRow>,
    pub max_ratio: f64,
}

impl MultiplierReport {
    /// `label, operator_norm, hoermander, ratio, deviation_from_oracle`
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["label", "operator_norm", "hoermander", "ratio", "deviation_from_oracle"])?;
        for r in &self.rows {
            let mut rec = vec![r.label.clone()];
            rec.extend([r.operator_norm, r.hoermander, r.ratio, r.deviation_from_oracle].map(|x| format!("{x:.17e}")));
            wr.write_record(rec)?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn save(&self, stem: impl AsRef<Path>) -> Result<()> {
        let stem = stem.as_ref();
        self.write_csv(std::fs::File::create(stem.with_extension("csv"))?)?;
        std::fs::write(stem.with_extension("json"), serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}

/// For each multiplier `m` (a function on sectors): `m(A)` on `ran A` by the
/// sector transfer, its ℓ^p norm, and `‖m‖_{Hör²_v(S_{ω_p})}`.
pub fn multiplier_experiment(
    model: &ContractionModel,
    family: &[HolFn],
    p: f64,
    v: &Weight,
    cfg: &HoermanderConfig,
) -> Result<MultiplierReport> {
    let omega = omega_p(p)?;
    let half_order_integral = half_order_condition(v)?;
    let inj = model.generator().with_p(p)?.injective_part()?;
    let loc = Localizer::gaussian();
    let rows: Vec<MultiplierRow> = family
        .iter()
        .map(|m| -> Result<MultiplierRow> {
            let r = sector_calculus(&inj, m, &StripMethod::Oracle)?;
            let operator_norm = inj.operator_norm(&r.matrix)?.value;
            let hoermander = sector_hoermander_norm(m, omega, &loc, v, cfg)?.value;
            let direct = oracle_matrix(&inj, m)?;
            Ok(MultiplierRow {
                label: m.label().to_string(),
                operator_norm,
                hoermander,
                ratio: operator_norm / hoermander,
                deviation_from_oracle: r.matrix.relative_deviation(&direct),
            })
        })
        .collect::<Result<_>>()?;
    let max_ratio = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    Ok(MultiplierReport {
        model: model.label().to_string(),
        p,
        omega_p: omega,
        half_order_integral,
        rows,
        max_ratio,
    })
}
