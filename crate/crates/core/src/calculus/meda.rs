use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functions::HolFn;
use crate::hoermander::{coefficient_decay, hoermander_norm, HoermanderConfig, Lines, Localizer};
use crate::operators::{DiagonalizableOperator, OperatorMatrix};
use crate::sampling::Grid;
use crate::weights::Weight;

use super::{oracle_matrix, ordered_sum, spectral_height, zeros, CalculusResult, Method, QuadratureMeta};

const TAIL_EDGE: f64 = 0.05;
const TAIL_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct MedaConfig {
    pub grid: Grid,
    /// Weight of the Hörmander class used for the bound chain.
    pub weight: Weight,
    /// Strip height of the Hörmander class; the spectral height when `None`.
    pub omega: Option<f64>,
    /// Compute the triangle and decay bounds.
    pub with_bound: bool,
    pub hoermander: HoermanderConfig,
}

impl Default for MedaConfig {
    fn default() -> Self {
        MedaConfig {
            grid: Grid::default(),
            weight: Weight::polynomial(2.0).expect("valid weight"),
            omega: None,
            with_bound: true,
            hoermander: HoermanderConfig::default(),
        }
    }
}

/// `‖f(A)‖ ≤ Σ_s ‖F_s(A)‖ ‖U_s‖ h ≤ C_φ ‖1/v‖₁ ‖f‖_Hör` with measured pieces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MedaBound {
    pub operator_norm: f64,
    pub triangle: f64,
    /// `sup_{z,s} v(s) e^{ω|s|} |F_s(z)| / ‖f‖_Hör` over the eigenvalues and a translate lattice.
    pub c_phi: f64,
    /// `h Σ_s 1/v(s)` on the coefficient grid.
    pub inverse_weight_l1: f64,
    pub hoermander: f64,
    /// `c_phi · inverse_weight_l1 · hoermander`
    pub decay_bound: f64,
}

/// `f(A) = Σ_s F_s(A) U_s h` with `F_s(z) = (τ_zφ · f)^∨(s)` and φ(0) = 1.
///
/// Each `F_s(λ_j)` comes from the windowed product sampled on `Im z = ±ω`, so
/// `F_s(λ_j) e^{-isλ_j}` is formed without amplifying rounding.
pub fn meda_hoermander(
    a: &DiagonalizableOperator,
    f: &HolFn,
    phi: &Localizer,
    cfg: &MedaConfig,
) -> Result<CalculusResult> {
    let phi = phi.unit_at_zero()?;
    let omega = cfg.omega.unwrap_or_else(|| spectral_height(a));
    let reach = a.eig().iter().map(|l| l.im.abs()).fold(0.0, f64::max);
    if reach > omega * (1.0 + 1e-12) {
        return Err(Error::Domain(format!("spectrum reaches |Im λ| = {reach} beyond ω = {omega}")));
    }
    if omega + reach >= phi.strip_margin() {
        return Err(Error::Domain(format!(
            "translated windows leave St_{} on which φ is holomorphic",
            phi.strip_margin()
        )));
    }
    let grid = cfg.grid;
    let lines = Lines::sample(f, omega, grid)?;
    let unit = Weight::constant();
    // e^{ω|s|} F_s(λ_j) for each eigenvalue
    let scaled: Vec<Vec<Complex64>> = a
        .eig()
        .par_iter()
        .map(|&l| lines.windowed(|w| phi.eval(w - l), &unit).into_values())
        .collect();
    let mass: Vec<f64> = (0..grid.points())
        .map(|k| scaled.iter().map(|u| u[k].norm()).sum())
        .collect();
    let total: f64 = mass.iter().sum();
    let m = ((grid.points() as f64 * TAIL_EDGE / 2.0).ceil() as usize).max(1);
    let tail: f64 = mass[..m].iter().chain(&mass[grid.points() - m..]).sum();
    if !total.is_finite() || (total > 0.0 && tail > TAIL_TOL * total) {
        return Err(Error::divergence(
            format!("windowed coefficients of {} do not decay on the grid", f.label()),
            total * grid.spacing(),
        ));
    }

    let h = grid.spacing();
    let n = a.dim();
    let rows = ordered_sum(
        grid.points(),
        || (zeros(n), 0.0),
        |k| {
            if mass[k] == 0.0 {
                return Ok(None);
            }
            let s = grid.point(k);
            let decay = (-omega * s.abs()).exp();
            let fs: Vec<Complex64> = scaled.iter().map(|u| u[k] * decay).collect();
            let f_a = a.map_diagonal(&fs)?;
            let u_s = a.group_orbit(s)?;
            let term = f_a.entries() * u_s.entries() * Complex64::new(h, 0.0);
            let tri = if cfg.with_bound {
                a.operator_norm(&f_a)?.value * a.operator_norm(&u_s)?.value * h
            } else {
                0.0
            };
            Ok(Some((term, tri)))
        },
        |x, y| (x.0 + y.0, x.1 + y.1),
    )?;
    let matrix = OperatorMatrix::new(rows.0)?;

    let bound = if cfg.with_bound {
        let mut lattice: Vec<Complex64> = a.eig().to_vec();
        let ys: Vec<f64> = if omega > 0.0 { vec![-omega, 0.0, omega] } else { vec![0.0] };
        for j in 0..=160 {
            for &y in &ys {
                lattice.push(Complex64::new(-20.0 + 0.25 * j as f64, y));
            }
        }
        let decay = coefficient_decay(f, &phi, &lattice, &cfg.weight, omega, grid)?;
        let hcfg = HoermanderConfig { grid, ..cfg.hoermander };
        let hoer = hoermander_norm(f, &Localizer::gaussian(), &cfg.weight, omega, &hcfg)?.value;
        let inverse_weight_l1 = h * grid.abscissae().map(|s| 1.0 / cfg.weight.evaluate(s)).sum::<f64>();
        let c_phi = if hoer > 0.0 { decay.sup / hoer } else { 0.0 };
        Some(MedaBound {
            operator_norm: a.operator_norm(&matrix)?.value,
            triangle: rows.1,
            c_phi,
            inverse_weight_l1,
            hoermander: hoer,
            decay_bound: c_phi * inverse_weight_l1 * hoer,
        })
    } else {
        None
    };
    let mut result = CalculusResult::new(
        matrix,
        Method::Meda,
        QuadratureMeta::SGrid {
            half_width: grid.half_width(),
            points: grid.points(),
        },
        &oracle_matrix(a, f)?,
    );
    result.bound = bound;
    Ok(result)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApproximationRow {
    pub n: u32,
    /// `‖g_n(A) - f(A)‖_F / ‖f(A)‖_F`
    pub deviation: f64,
    /// `‖g_n‖_Hör / ‖f‖_Hör`
    pub hoermander_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproximationReport {
    pub rows: Vec<ApproximationRow>,
    /// `max_n ‖g_n‖_Hör / ‖f‖_Hör`
    pub k_estimate: f64,
    /// Deviation non-increasing in n.
    pub monotone: bool,
}

/// Approximants `g_n = e^{-z²/n} f`, evaluated by the spectral oracle.
pub fn gaussian_approximation_harness(
    a: &DiagonalizableOperator,
    f: &HolFn,
    n_list: &[u32],
    v: &Weight,
    omega: f64,
    cfg: &HoermanderConfig,
) -> Result<ApproximationReport> {
    if n_list.is_empty() || n_list.contains(&0) {
        return Err(Error::Config("n_list must hold positive integers".into()));
    }
    let target = oracle_matrix(a, f)?;
    let loc = Localizer::gaussian();
    let base = hoermander_norm(f, &loc, v, omega, cfg)?.value;
    if base == 0.0 {
        return Err(Error::Degenerate("‖f‖_Hör = 0".into()));
    }
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let g = HolFn::wide_gaussian(n as f64).product(f);
        let deviation = oracle_matrix(a, &g)?.relative_deviation(&target);
        let hoermander_ratio = hoermander_norm(&g, &loc, v, omega, cfg)?.value / base;
        rows.push(ApproximationRow {
            n,
            deviation,
            hoermander_ratio,
        });
    }
    let k_estimate = rows.iter().map(|r| r.hoermander_ratio).fold(0.0, f64::max);
    let monotone = rows.windows(2).all(|w| w[1].deviation <= w[0].deviation * (1.0 + 1e-12));
    Ok(ApproximationReport {
        rows,
        k_estimate,
        monotone,
    })
}
