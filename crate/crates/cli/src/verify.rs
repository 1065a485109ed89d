//! Built-in verification suites: each check is a measured value against a
//! fixed tolerance.

use std::f64::consts::PI;

use holocalc::calculus::{sector_calculus, StripMethod};
use holocalc::hoermander::{build_partition, calderon_residual, Localizer};
use holocalc::operators::{DiagonalizableOperator, OperatorKind};
use holocalc::sampling::{convolve, fourier_forward, fourier_inverse};
use holocalc::{Complex64, Grid, HolFn, Result, SampledFunction, StripFunctionRep, Weight};
use serde::Serialize;

use crate::manifest::Suite;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub suite: &'static str,
    pub check: String,
    /// Error measure; the check passes when `value <= tolerance`.
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

fn check(suite: &'static str, name: impl Into<String>, value: f64, tolerance: f64) -> Check {
    Check {
        suite,
        check: name.into(),
        value,
        tolerance,
        pass: value <= tolerance,
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn run_suite(suite: Suite, grid: Grid) -> Result<Vec<Check>> {
    match suite {
        Suite::Conventions => conventions(grid),
        Suite::Hardy => hardy(grid),
        Suite::Partition => partition(),
        Suite::Calderon => calderon(grid),
        Suite::Composition => composition(),
        Suite::All => {
            let mut out = Vec::new();
            for s in suite.expand() {
                out.extend(run_suite(s, grid)?);
            }
            Ok(out)
        }
    }
}

fn conventions(grid: Grid) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for (label, width, centre) in [("gaussian", 1.0, 0.0), ("shifted", 0.5, 1.5)] {
        let g = SampledFunction::from_real_fn(grid, |s| (-(s - centre).powi(2) / (2.0 * width * width)).exp())?;
        let lhs = fourier_forward(&g).norm_l2().powi(2);
        let rhs = 2.0 * PI * g.norm_l2().powi(2);
        out.push(check("conventions", format!("plancherel-{label}"), (lhs - rhs).abs() / rhs, 1e-8));
    }
    // (f g)^∨ = f^∨ ∗ g^∨, sampled on the line
    let line = grid.dual();
    let f = SampledFunction::from_fn(line, |x| (-(x * x)).exp().into())?;
    let g = SampledFunction::from_fn(line, |x| c(-(x - 0.5).powi(2) / 2.0, 0.3 * x).exp())?;
    let direct = fourier_inverse(&f.mul(&g)?);
    let conv = convolve(&fourier_inverse(&f), &fourier_inverse(&g))?;
    let err = direct.sub(&conv)?.norm_sup() / direct.norm_sup();
    out.push(check("conventions", "convolution", err, 1e-8));
    Ok(out)
}

fn hardy(grid: Grid) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for (im, want) in [(2.0, PI.sqrt()), (3.0, (PI / 2.0).sqrt())] {
        let r = StripFunctionRep::resolvent(c(0.0, im), grid, 1.0, Weight::constant())?;
        let h = r.hardy2_norm(1.0)?.value;
        out.push(check("hardy", format!("resolvent-{im}i"), (h - want).abs() / want, 5e-3));
    }
    Ok(out)
}

fn partition() -> Result<Vec<Check>> {
    let theta = 1.5;
    let p = build_partition(theta, 1.0)?;
    let sum_err = (0..=1000)
        .map(|k| (p.partial_sum(c(-5.0 + 0.01 * k as f64, 0.0), 40) - 1.0).norm())
        .fold(0.0, f64::max);
    // deterministic probe lattice in the open strip
    let ymax = theta * (1.0 - 1e-3);
    let mut min_re = f64::INFINITY;
    for i in 0..40 {
        for j in 0..25 {
            let z = c(-20.0 + 40.0 * (i as f64 + 0.5) / 40.0, -ymax + 2.0 * ymax * j as f64 / 24.0);
            min_re = min_re.min(p.phi(z).re);
        }
    }
    Ok(vec![
        check("partition", "sum-to-one", sum_err, 1e-8),
        check("partition", "positive-real-part", if min_re > 0.0 { 0.0 } else { 1.0 }, 0.0),
    ])
}

fn calderon(grid: Grid) -> Result<Vec<Check>> {
    let g = Localizer::gaussian();
    let mut out = Vec::new();
    for f in [HolFn::one(), HolFn::modulation(1.0), HolFn::resolvent(c(0.0, 2.0))] {
        let r = calderon_residual(&f, &g, &g, &Weight::constant(), 0.0, 20.0, 0.05, grid)?;
        out.push(check("calderon", f.label().to_string(), r.relative, 1e-3));
    }
    Ok(out)
}

fn composition() -> Result<Vec<Check>> {
    let eig = [0.3, 1.0, 2.5, 7.0].iter().map(|&x| c(x, 0.0)).collect();
    let a = DiagonalizableOperator::diagonal(eig, 2.0, OperatorKind::Sectorial { omega: 0.0 })?;
    let mut out = Vec::new();
    for s0 in [1.0, 2.0, 5.0] {
        let r = sector_calculus(&a, &HolFn::imaginary_power(s0), &StripMethod::Oracle)?;
        let err = r.matrix.relative_deviation(&a.imaginary_power(s0)?);
        out.push(check("composition", format!("imaginary-power-{s0}"), err, 1e-10));
    }
    Ok(out)
}
