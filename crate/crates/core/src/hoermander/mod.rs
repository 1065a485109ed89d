//! Hörmander-type norms `sup_t ‖τ_t ψ · f‖_{W²_v(St_ω)}` and the estimates
//! built from windowed coefficients.
//!
//! Every product `window · f` is sampled on the two boundary lines
//! `Im z = ±ω` (the real line when ω = 0) and turned into the weighted
//! coefficient `v e^{ω|s|} (window · f)^∨` one half-line at a time.

mod localizer;
mod partition;

use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functions::HolFn;
use crate::sampling::{self, Grid, SampledFunction};
use crate::strip::{weighted_coefficient_from_lines, StripFunctionRep};
use crate::weights::{weighted_norm, Weight};

pub use localizer::{Localizer, LocalizerKind};
pub use partition::{build_partition, Partition};

/// Relative change under `t_step/2` below which the lattice max is trusted.
pub const LATTICE_TOL: f64 = 1e-4;
const TAIL_EDGE: f64 = 0.05;
const TAIL_TOL: f64 = 1e-6;

/// Anything that can be sampled on horizontal lines of a strip.
pub trait StripEvaluable: Send + Sync {
    fn label(&self) -> String;
    /// Whether `x ↦ f(x + iy)` is available.
    fn admits(&self, y: f64) -> bool;
    fn line_samples(&self, y: f64, lines: Grid) -> Result<SampledFunction>;
    fn eval(&self, z: Complex64) -> Complex64;
}

impl StripEvaluable for HolFn {
    fn label(&self) -> String {
        HolFn::label(self).to_string()
    }

    fn admits(&self, y: f64) -> bool {
        y.abs() < self.height()
    }

    fn line_samples(&self, y: f64, lines: Grid) -> Result<SampledFunction> {
        HolFn::line_samples(self, y, lines)
    }

    fn eval(&self, z: Complex64) -> Complex64 {
        HolFn::eval(self, z)
    }
}

impl StripEvaluable for StripFunctionRep {
    fn label(&self) -> String {
        StripFunctionRep::label(self).to_string()
    }

    fn admits(&self, y: f64) -> bool {
        y.abs() <= self.omega() * (1.0 + 1e-12)
    }

    fn line_samples(&self, y: f64, lines: Grid) -> Result<SampledFunction> {
        if lines.same_as(&self.grid().dual()) {
            Ok(self.line(y)?.samples)
        } else {
            SampledFunction::from_fn(lines, |x| self.evaluate(Complex64::new(x, y)))
        }
    }

    fn eval(&self, z: Complex64) -> Complex64 {
        self.evaluate(z)
    }
}

/// Translate lattice and grid used by the Hörmander sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HoermanderConfig {
    /// Coefficient-side grid; lines are sampled on its dual.
    pub grid: Grid,
    pub t_range: f64,
    pub t_step: f64,
    /// Also recompute on `grid.refined()`.
    pub check_grid: bool,
}

impl Default for HoermanderConfig {
    fn default() -> Self {
        HoermanderConfig {
            grid: Grid::default(),
            t_range: 20.0,
            t_step: 0.25,
            check_grid: false,
        }
    }
}

impl HoermanderConfig {
    fn validate(&self) -> Result<()> {
        if !(self.t_step > 0.0 && self.t_step.is_finite()) {
            return Err(Error::Config(format!("t_step must be positive, got {}", self.t_step)));
        }
        if !(self.t_range >= 0.0 && self.t_range.is_finite()) {
            return Err(Error::Config(format!("t_range must be >= 0, got {}", self.t_range)));
        }
        Ok(())
    }

    /// `{-t_range + j t_step}` up to `t_range`.
    pub fn lattice(&self) -> Vec<f64> {
        let n = (2.0 * self.t_range / self.t_step + 1e-9).floor() as usize;
        (0..=n).map(|j| -self.t_range + j as f64 * self.t_step).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoermanderEstimate {
    pub value: f64,
    pub argmax_t: f64,
    pub t_range: f64,
    pub t_step: f64,
    /// Max over the lattice with step `t_step/2`; never below `value`.
    pub refined_value: f64,
    pub convergence_flag: bool,
    /// Value on the refined grid, when requested.
    pub grid_value: Option<f64>,
    pub grid_converged: Option<bool>,
    /// Largest edge-mass fraction of a weighted windowed coefficient.
    pub edge_tail: f64,
    /// `(t, ‖τ_t ψ·f‖)` on the base lattice.
    pub profile: Vec<(f64, f64)>,
}

impl HoermanderEstimate {
    pub fn t_lattice(&self) -> String {
        format!("[-{}, {}] step {}", self.t_range, self.t_range, self.t_step)
    }

    pub fn write_profile_csv<W: Write>(&self, w: W) -> Result<()> {
        write_pairs_csv(w, ("t", "value"), &self.profile)
    }

    pub fn save_profile_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_profile_csv(std::fs::File::create(path)?)
    }
}

pub(crate) fn write_pairs_csv<W: Write>(w: W, header: (&str, &str), rows: &[(f64, f64)]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record([header.0, header.1])?;
    for (a, b) in rows {
        wr.write_record([format!("{a:.17e}"), format!("{b:.17e}")])?;
    }
    wr.flush()?;
    Ok(())
}

/// `f` sampled on `Im z = ±ω` (one line when ω = 0).
pub(crate) struct Lines {
    grid: Grid,
    omega: f64,
    upper: SampledFunction,
    lower: Option<SampledFunction>,
}

impl Lines {
    pub(crate) fn sample(f: &dyn StripEvaluable, omega: f64, coeff_grid: Grid) -> Result<Self> {
        if !(omega >= 0.0 && omega.is_finite()) {
            return Err(Error::Config(format!("strip height must be >= 0, got {omega}")));
        }
        if !f.admits(omega) || !f.admits(-omega) {
            return Err(Error::Domain(format!("{} is not evaluable on St_{omega}", f.label())));
        }
        let grid = coeff_grid.dual();
        let upper = f.line_samples(omega, grid)?;
        let lower = if omega > 0.0 { Some(f.line_samples(-omega, grid)?) } else { None };
        Ok(Lines {
            grid,
            omega,
            upper,
            lower,
        })
    }

    /// `v e^{ω|s|} (window · f)^∨`.
    pub(crate) fn windowed(&self, window: impl Fn(Complex64) -> Complex64, v: &Weight) -> SampledFunction {
        let times = |line: &SampledFunction, y: f64| {
            let values = line
                .iter()
                .map(|(x, fx)| window(Complex64::new(x, y)) * fx)
                .collect();
            SampledFunction::new(self.grid, values).expect("window values are finite")
        };
        let up = times(&self.upper, self.omega);
        match &self.lower {
            Some(lo) => weighted_coefficient_from_lines(&up, &times(lo, -self.omega), v),
            None => {
                let c = sampling::fourier_inverse(&up);
                c.map(|s, g| g * v.evaluate(s)).expect("finite")
            }
        }
    }
}

fn check_window(loc: &Localizer, omega: f64) -> Result<()> {
    if omega >= loc.strip_margin() {
        return Err(Error::Domain(format!(
            "window holomorphic on St_{} only, asked for St_{omega}",
            loc.strip_margin()
        )));
    }
    Ok(())
}

/// `(max, argmax, max tail)` of `‖τ_t ψ · f‖` over `ts`, with the profile.
fn sweep(lines: &Lines, loc: &Localizer, v: &Weight, ts: &[f64]) -> (Vec<(f64, f64)>, f64) {
    let rows: Vec<(f64, f64, f64)> = ts
        .par_iter()
        .map(|&t| {
            let w = lines.windowed(|z| loc.eval(z - t), v);
            (t, w.norm_l2(), w.tail_fraction(TAIL_EDGE))
        })
        .collect();
    let tail = rows.iter().map(|r| r.2).fold(0.0, f64::max);
    (rows.into_iter().map(|(t, n, _)| (t, n)).collect(), tail)
}

fn argmax(profile: &[(f64, f64)]) -> (f64, f64) {
    profile
        .iter()
        .fold((0.0, f64::NEG_INFINITY), |best, &(t, n)| if n > best.1 { (t, n) } else { best })
}

/// The lattice sweep without the divergence check; used where divergent
/// values are themselves the measurement.
pub fn hoermander_profile(
    f: &dyn StripEvaluable,
    loc: &Localizer,
    v: &Weight,
    omega: f64,
    cfg: &HoermanderConfig,
) -> Result<HoermanderEstimate> {
    cfg.validate()?;
    check_window(loc, omega)?;
    let lines = Lines::sample(f, omega, cfg.grid)?;
    let base = cfg.lattice();
    let (profile, tail) = sweep(&lines, loc, v, &base);
    let (argmax_t, value) = argmax(&profile);

    let mids: Vec<f64> = base.windows(2).map(|p| 0.5 * (p[0] + p[1])).collect();
    let (mid_profile, mid_tail) = sweep(&lines, loc, v, &mids);
    let refined_value = value.max(argmax(&mid_profile).1);
    let convergence_flag = refined_value - value <= LATTICE_TOL * value.max(f64::MIN_POSITIVE);

    let (grid_value, grid_converged) = if cfg.check_grid {
        let fine = Lines::sample(f, omega, cfg.grid.refined())?;
        let (p, _) = sweep(&fine, loc, v, &base);
        let gv = argmax(&p).1;
        let ok = (gv - value).abs() <= crate::strip::GRID_CONVERGENCE_TOL * value.max(f64::MIN_POSITIVE);
        (Some(gv), Some(ok))
    } else {
        (None, None)
    };

    Ok(HoermanderEstimate {
        value: value.max(0.0),
        argmax_t,
        t_range: cfg.t_range,
        t_step: cfg.t_step,
        refined_value: refined_value.max(0.0),
        convergence_flag,
        grid_value,
        grid_converged,
        edge_tail: tail.max(mid_tail),
        profile,
    })
}

/// `sup_t ‖τ_t ψ · f‖_{W²_v(St_ω)}` as a lattice max with refinement and
/// (optionally) grid-doubling certificates.
pub fn hoermander_norm(
    f: &dyn StripEvaluable,
    loc: &Localizer,
    v: &Weight,
    omega: f64,
    cfg: &HoermanderConfig,
) -> Result<HoermanderEstimate> {
    let est = hoermander_profile(f, loc, v, omega, cfg)?;
    if est.edge_tail > TAIL_TOL {
        return Err(Error::divergence(
            format!(
                "windowed product of {} keeps {:e} of its weighted coefficient at the grid edge",
                f.label(),
                est.edge_tail
            ),
            est.value,
        ));
    }
    Ok(est)
}

/// The function `x ↦ f(x + iy)` regarded as a function on ℝ.
struct OnLine<'a> {
    f: &'a dyn StripEvaluable,
    y: f64,
}

impl StripEvaluable for OnLine<'_> {
    fn label(&self) -> String {
        format!("{}|{}", self.f.label(), self.y)
    }

    fn admits(&self, y: f64) -> bool {
        y == 0.0
    }

    fn line_samples(&self, _y: f64, lines: Grid) -> Result<SampledFunction> {
        self.f.line_samples(self.y, lines)
    }

    fn eval(&self, z: Complex64) -> Complex64 {
        self.f.eval(z + Complex64::new(0.0, self.y))
    }
}

/// Hörmander estimates on ℝ of the two boundary functions `f_{|±ω}`.
pub fn boundary_hoermander(
    f: &dyn StripEvaluable,
    loc: &Localizer,
    v: &Weight,
    omega: f64,
    cfg: &HoermanderConfig,
) -> Result<(HoermanderEstimate, HoermanderEstimate)> {
    if omega == 0.0 {
        return Err(Error::Domain("boundary values need ω > 0".into()));
    }
    if !f.admits(omega) || !f.admits(-omega) {
        return Err(Error::Domain(format!("{} is not evaluable on Im z = ±{omega}", f.label())));
    }
    let up = hoermander_norm(&OnLine { f, y: omega }, loc, v, 0.0, cfg)?;
    let lo = hoermander_norm(&OnLine { f, y: -omega }, loc, v, 0.0, cfg)?;
    Ok((up, lo))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalderonResidual {
    pub relative: f64,
    pub absolute: f64,
    /// `‖φ f‖_{W²_v(St_ω)}`
    pub reference: f64,
}

/// Relative W²_v(St_ω) defect of `φf = Σ_t (τ_tψ*·φ)(τ_tψ·f) t_step`.
/// `ψ` is rescaled to unit L² norm on ℝ first.
#[allow(clippy::too_many_arguments)]
pub fn calderon_residual(
    f: &dyn StripEvaluable,
    phi: &Localizer,
    psi: &Localizer,
    v: &Weight,
    omega: f64,
    t_range: f64,
    t_step: f64,
    grid: Grid,
) -> Result<CalderonResidual> {
    let cfg = HoermanderConfig {
        grid,
        t_range,
        t_step,
        check_grid: false,
    };
    cfg.validate()?;
    check_window(phi, omega)?;
    check_window(psi, omega)?;
    let psi = psi.normalized();
    let lines = Lines::sample(f, omega, grid)?;
    let ts = cfg.lattice();
    let reproduced = |z: Complex64| -> Complex64 {
        ts.iter()
            .map(|&t| (psi.eval(z.conj() - t)).conj() * psi.eval(z - t))
            .sum::<Complex64>()
            * t_step
    };
    let reference = lines.windowed(|z| phi.eval(z), v).norm_l2();
    if reference == 0.0 {
        return Err(Error::Degenerate("φ f vanishes; relative residual undefined".into()));
    }
    let absolute = lines
        .windowed(|z| phi.eval(z) * (Complex64::new(1.0, 0.0) - reproduced(z)), v)
        .norm_l2();
    Ok(CalderonResidual {
        relative: absolute / reference,
        absolute,
        reference,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayProfile {
    /// `(s, sup_z v(s) e^{ω|s|} |(τ_zφ·f)^∨(s)|)`
    pub profile: Vec<(f64, f64)>,
    pub sup: f64,
    pub argmax_s: f64,
    pub argmax_z: Complex64,
}

impl DecayProfile {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        write_pairs_csv(w, ("s", "value"), &self.profile)
    }
}

/// Pointwise sup over `z_lattice` of the weighted windowed coefficients.
pub fn coefficient_decay(
    f: &dyn StripEvaluable,
    phi: &Localizer,
    z_lattice: &[Complex64],
    v: &Weight,
    omega: f64,
    grid: Grid,
) -> Result<DecayProfile> {
    check_window(phi, omega)?;
    if z_lattice.is_empty() {
        return Err(Error::Config("empty translate lattice".into()));
    }
    for z in z_lattice {
        if omega + z.im.abs() >= phi.strip_margin() {
            return Err(Error::Domain(format!("τ_zφ not holomorphic on St_{omega} for z = {z}")));
        }
    }
    let lines = Lines::sample(f, omega, grid)?;
    let per_z: Vec<Vec<f64>> = z_lattice
        .par_iter()
        .map(|&z| {
            lines
                .windowed(|w| phi.eval(w - z), v)
                .values()
                .iter()
                .map(|c| c.norm())
                .collect()
        })
        .collect();
    let mut sup = -1.0;
    let (mut argmax_s, mut argmax_z) = (0.0, z_lattice[0]);
    let profile = (0..grid.points())
        .map(|k| {
            let s = grid.point(k);
            let mut best = 0.0f64;
            for (j, col) in per_z.iter().enumerate() {
                if col[k] > best {
                    best = col[k];
                }
                if col[k] > sup {
                    sup = col[k];
                    argmax_s = s;
                    argmax_z = z_lattice[j];
                }
            }
            (s, best)
        })
        .collect();
    Ok(DecayProfile {
        profile,
        sup: sup.max(0.0),
        argmax_s,
        argmax_z,
    })
}

/// Defect of `φ(0) f(z) = ∫ (τ_zφ·f)^∨(s) e^{-isz} ds` at one probe point.
/// Relative unless `f(z) = 0`, in which case the absolute defect is returned.
pub fn representation_residual(
    f: &dyn StripEvaluable,
    phi: &Localizer,
    z: Complex64,
    omega: f64,
    grid: Grid,
) -> Result<f64> {
    let phi0 = phi.eval(Complex64::new(0.0, 0.0));
    if phi0.norm() == 0.0 {
        return Err(Error::Degenerate("φ(0) = 0".into()));
    }
    if z.im.abs() > omega * (1.0 + 1e-12) {
        return Err(Error::Domain(format!("probe {z} outside the closed strip of height {omega}")));
    }
    // Sample on lines at least as far out as the probe.
    let height = omega.max(z.im.abs());
    check_window(phi, height + z.im.abs())?;
    let lines = Lines::sample(f, height, grid)?;
    let coeff = lines.windowed(|w| phi.eval(w - z), &Weight::constant());
    // `coeff` is e^{height|s|} (τ_zφ·f)^∨; undo the weight inside the kernel.
    let i = Complex64::i();
    let terms: Vec<Complex64> = coeff
        .iter()
        .map(|(s, c)| c * (-i * z.re * s).exp() * ((z.im - height * s.signum()) * s).exp())
        .collect();
    let rhs = sampling::integral(&SampledFunction::new(grid, terms)?);
    let lhs = phi0 * f.eval(z);
    let defect = (lhs - rhs).norm();
    Ok(if lhs.norm() == 0.0 { defect } else { defect / lhs.norm() })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowedBound {
    pub r: f64,
    pub r_prime: f64,
    /// `sup_n ‖v e^{ω|s|}(τ_nψ·f)^∨‖_{L^{r′}}`
    pub value: f64,
    pub l2_sup: f64,
    pub linf_sup: f64,
    /// `l2_sup^{2/r′} · linf_sup^{1-2/r′}`
    pub interpolation_bound: f64,
}

/// Windowed L^{r′} bound over integer translates `|n| ≤ t_range`.
pub fn windowed_lr_bound(
    f: &dyn StripEvaluable,
    psi: &Localizer,
    r: f64,
    v: &Weight,
    omega: f64,
    t_range: f64,
    grid: Grid,
) -> Result<WindowedBound> {
    if !(1.0..=2.0).contains(&r) {
        return Err(Error::Config(format!("r must lie in [1, 2], got {r}")));
    }
    check_window(psi, omega)?;
    let r_prime = if r == 1.0 { f64::INFINITY } else { r / (r - 1.0) };
    let lines = Lines::sample(f, omega, grid)?;
    let n_max = t_range.floor() as i64;
    let rows: Vec<(f64, f64, f64)> = (-n_max..=n_max)
        .into_par_iter()
        .map(|n| {
            let w = lines.windowed(|z| psi.eval(z - n as f64), v);
            let unit = Weight::constant();
            let lp = weighted_norm(&w, &unit, 0.0, r_prime).expect("r′ ≥ 2");
            let l2 = w.norm_l2();
            let linf = w.norm_sup();
            (lp, l2, linf)
        })
        .collect();
    let value = rows.iter().map(|r| r.0).fold(0.0, f64::max);
    let l2_sup = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let linf_sup = rows.iter().map(|r| r.2).fold(0.0, f64::max);
    let interpolation_bound = if r_prime.is_infinite() {
        linf_sup
    } else {
        l2_sup.powf(2.0 / r_prime) * linf_sup.powf(1.0 - 2.0 / r_prime)
    };
    Ok(WindowedBound {
        r,
        r_prime,
        value,
        l2_sup,
        linf_sup,
        interpolation_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn gaussian_w2() -> f64 {
        // ‖e^{-s²/4}/(2√π)‖₂
        ((2.0 * PI).sqrt() / (4.0 * PI)).sqrt()
    }

    #[test]
    fn constant_function_profile_is_flat() {
        let est = hoermander_norm(
            &HolFn::one(),
            &Localizer::gaussian(),
            &Weight::constant(),
            0.0,
            &HoermanderConfig::default(),
        )
        .unwrap();
        assert!((est.value - gaussian_w2()).abs() < 1e-12);
        assert!((gaussian_w2() - 0.4467).abs() < 1e-4);
        let spread = est.profile.iter().map(|p| (p.1 - est.value).abs()).fold(0.0, f64::max);
        assert!(spread < 1e-12);
        assert!(est.convergence_flag);
    }

    #[test]
    fn modulation_is_bounded_by_weight_at_frequency() {
        let v = Weight::polynomial(1.0).unwrap();
        let est = hoermander_norm(
            &HolFn::modulation(3.0),
            &Localizer::gaussian(),
            &v,
            0.0,
            &HoermanderConfig::default(),
        )
        .unwrap();
        // (τ_tG e^{-3iz})^∨ is the Gaussian envelope centred at 3: oracle by quadrature.
        let h = 1e-3;
        let oracle: f64 = (-40_000..40_000)
            .map(|k| {
                let s = k as f64 * h;
                ((1.0 + s.abs()) * (-(s - 3.0).powi(2) / 4.0).exp() / (2.0 * PI.sqrt())).powi(2) * h
            })
            .sum::<f64>()
            .sqrt();
        assert!((est.value - oracle).abs() < 1e-6 * oracle);
        assert!(est.value <= 4.0 * gaussian_w2() * 1.2);
    }

    #[test]
    fn zero_has_zero_norm() {
        let est = hoermander_norm(
            &HolFn::zero(),
            &Localizer::gaussian(),
            &Weight::constant(),
            0.5,
            &HoermanderConfig::default(),
        )
        .unwrap();
        assert_eq!(est.value, 0.0);
    }

    #[test]
    fn strip_norm_of_constant() {
        // (G·1)^∨ = e^{-s²/4}/(2√π); weight e^{ω|s|}
        let omega = 0.5;
        let est = hoermander_norm(
            &HolFn::one(),
            &Localizer::gaussian(),
            &Weight::constant(),
            omega,
            &HoermanderConfig::default(),
        )
        .unwrap();
        // same grid sum of the exact weighted coefficient
        let grid = Grid::default();
        let oracle = (grid.spacing()
            * grid
                .abscissae()
                .map(|s| ((omega * s.abs()).exp() * (-s * s / 4.0).exp() / (2.0 * PI.sqrt())).powi(2))
                .sum::<f64>())
        .sqrt();
        assert!((est.value - oracle).abs() < 1e-12 * oracle, "{} vs {oracle}", est.value);
    }

    #[test]
    fn rep_and_function_agree() {
        let grid = Grid::default();
        let lambda = c(0.0, 2.0);
        let rep = StripFunctionRep::resolvent(lambda, grid, 0.5, Weight::constant()).unwrap();
        let cfg = HoermanderConfig::default();
        let a = hoermander_norm(&rep, &Localizer::gaussian(), &Weight::constant(), 0.5, &cfg).unwrap();
        let b = hoermander_norm(&HolFn::resolvent(lambda), &Localizer::gaussian(), &Weight::constant(), 0.5, &cfg)
            .unwrap();
        assert!((a.value - b.value).abs() < 1e-3 * b.value, "{} vs {}", a.value, b.value);
    }

    #[test]
    fn refinement_never_decreases() {
        let est = hoermander_norm(
            &HolFn::resolvent(c(0.3, 1.0)),
            &Localizer::gaussian(),
            &Weight::polynomial(1.0).unwrap(),
            0.0,
            &HoermanderConfig::default(),
        )
        .unwrap();
        assert!(est.refined_value >= est.value);
    }

    #[test]
    fn calderon_for_constant_and_modulation() {
        let g = Localizer::gaussian();
        for f in [HolFn::one(), HolFn::modulation(1.0)] {
            let r = calderon_residual(&f, &g, &g, &Weight::constant(), 0.0, 20.0, 0.05, Grid::default()).unwrap();
            assert!(r.relative <= 1e-3, "{}: {}", f.label(), r.relative);
        }
        let zero = Localizer::gaussian().scaled(0.0);
        let err = calderon_residual(&HolFn::one(), &zero, &g, &Weight::constant(), 0.0, 20.0, 0.05, Grid::default());
        assert!(matches!(err, Err(Error::Degenerate(_))));
    }

    #[test]
    fn decay_profile_of_constant() {
        let grid = Grid::default();
        let v = Weight::polynomial(1.0).unwrap();
        let d = coefficient_decay(&HolFn::one(), &Localizer::gaussian(), &[c(0.0, 0.0)], &v, 0.0, grid).unwrap();
        for &(s, p) in &d.profile {
            let want = (1.0 + s.abs()) * (-s * s / 4.0).exp() / (2.0 * PI.sqrt());
            assert!((p - want).abs() < 1e-12, "s = {s}");
        }
        let m = coefficient_decay(&HolFn::modulation(3.0), &Localizer::gaussian(), &[c(0.0, 0.0)], &v, 0.0, grid)
            .unwrap();
        // envelope shifted to the modulation frequency
        for &(s, p) in &m.profile {
            let want = (1.0 + s.abs()) * (-(s - 3.0).powi(2) / 4.0).exp() / (2.0 * PI.sqrt());
            assert!((p - want).abs() < 1e-12, "s = {s}");
        }
        assert!((m.argmax_s - (1.0 + 6f64.sqrt())).abs() < grid.spacing());
        let z = coefficient_decay(&HolFn::zero(), &Localizer::gaussian(), &[c(0.0, 0.0)], &v, 0.0, grid).unwrap();
        assert_eq!(z.sup, 0.0);
    }

    #[test]
    fn representation_formula() {
        let g = Localizer::gaussian();
        let grid = Grid::default();
        assert!(representation_residual(&HolFn::one(), &g, c(0.0, 0.0), 0.0, grid).unwrap() <= 1e-8);
        let r = representation_residual(&HolFn::resolvent(c(0.0, 2.0)), &g, c(0.3, 0.4), 0.5, grid).unwrap();
        assert!(r <= 1e-4, "{r}");
        let m = representation_residual(&HolFn::modulation(1.0), &g, c(1.0, 0.0), 0.0, grid).unwrap();
        assert!(m <= 1e-6, "{m}");
    }

    #[test]
    fn windowed_bounds_coincide() {
        let grid = Grid::default();
        let g = Localizer::gaussian();
        let v = Weight::polynomial(1.0).unwrap();
        let f = HolFn::resolvent(c(0.5, 1.5));
        let two = windowed_lr_bound(&f, &g, 2.0, &v, 0.0, 10.0, grid).unwrap();
        let cfg = HoermanderConfig {
            grid,
            t_range: 10.0,
            t_step: 1.0,
            check_grid: false,
        };
        let h = hoermander_profile(&f, &g, &v, 0.0, &cfg).unwrap();
        assert_eq!(two.value, h.value);
        let one = windowed_lr_bound(&f, &g, 1.0, &v, 0.0, 10.0, grid).unwrap();
        let lattice: Vec<Complex64> = (-10..=10).map(|n| c(n as f64, 0.0)).collect();
        let d = coefficient_decay(&f, &g, &lattice, &v, 0.0, grid).unwrap();
        assert_eq!(one.value, d.sup);
        let four = windowed_lr_bound(&f, &g, 4.0 / 3.0, &v, 0.0, 10.0, grid).unwrap();
        assert!(four.value <= four.interpolation_bound * (1.0 + 1e-10));
    }
}
