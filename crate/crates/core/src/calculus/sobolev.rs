use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functions::HolFn;
use crate::operators::{DiagonalizableOperator, OperatorMatrix};
use crate::sampling::{romberg_weights, Grid};
use crate::strip::StripFunctionRep;
use crate::weights::Weight;

use super::{oracle_matrix, ordered_sum, zeros, CalculusResult, Method, QuadratureMeta};

const TAIL_EDGE: f64 = 0.05;
const TAIL_TOL: f64 = 1e-8;
/// Relative change under doubling of the s-range accepted as convergence.
const PROFILE_TOL: f64 = 0.05;

/// Largest `|Im λ_j s|` seen in `‖U_s‖`: the orbit grows at most like
/// `κ(V) max_j e^{s Im λ_j}`, used here for the divergence test only.
fn growth(a: &DiagonalizableOperator, s: f64) -> f64 {
    a.eig().iter().map(|l| (s * l.im).exp()).fold(0.0, f64::max)
}

/// `f(A) = Σ_s f^∨(s) U_s w_s` over the coefficient grid, with
/// Romberg weights so a jump of `f^∨` at a node costs only O(h⁶).
pub fn sobolev_integral(a: &DiagonalizableOperator, f: &StripFunctionRep) -> Result<CalculusResult> {
    let grid = *f.grid();
    let coeff = f.coeff();
    let mass: Vec<f64> = coeff.iter().map(|(s, g)| g.norm() * growth(a, s)).collect();
    let total: f64 = mass.iter().sum();
    let m = ((grid.points() as f64 * TAIL_EDGE / 2.0).ceil() as usize).max(1);
    let tail: f64 = mass[..m].iter().chain(&mass[grid.points() - m..]).sum();
    if !total.is_finite() || (total > 0.0 && tail > TAIL_TOL * total) {
        return Err(Error::divergence(
            format!(
                "orbit growth outweighs the decay of the coefficient of {}: edge share {:e}",
                f.label(),
                tail / total
            ),
            total * grid.spacing(),
        ));
    }
    let weights = romberg_weights(grid.points(), grid.spacing());
    let n = a.dim();
    let values = coeff.values();
    let sum = ordered_sum(
        values.len(),
        || zeros(n),
        |k| {
            let g = values[k];
            if g.norm() == 0.0 {
                return Ok(None);
            }
            Ok(Some(a.group_orbit(grid.point(k))?.into_entries() * (g * weights[k])))
        },
        |x, y| x + y,
    )?;
    let matrix = OperatorMatrix::new(sum)?;
    let oracle = oracle_matrix(a, &f.reference_fn())?;
    Ok(CalculusResult::new(
        matrix,
        Method::SobolevIntegral,
        QuadratureMeta::SGrid {
            half_width: grid.half_width(),
            points: grid.points(),
        },
        &oracle,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegularizerProfile {
    pub l2_profile: f64,
    /// The same on the grid with doubled half-width.
    pub doubled_profile: f64,
    pub is_regularizer: bool,
}

fn orbit_profile(a: &DiagonalizableOperator, h: &HolFn, v: &Weight, omega: f64, grid: &Grid) -> Result<f64> {
    let n = a.dim();
    let hs: Vec<Complex64> = a.eig().iter().map(|&l| h.eval(l)).collect();
    if hs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::Domain(format!("{} is undefined on the spectrum", h.label())));
    }
    let sums = ordered_sum(
        grid.points(),
        || DMatrix::zeros(n, n),
        |k| {
            let s = grid.point(k);
            let damp = (-omega * s.abs()).exp() / v.evaluate(s);
            let d: Vec<Complex64> = a
                .eig()
                .iter()
                .zip(&hs)
                .map(|(&l, &hl)| (Complex64::new(0.0, -s) * l).exp() * hl)
                .collect();
            let orbit = a.map_diagonal(&d)?;
            Ok(Some(orbit.entries().map(|c| (c.norm() * damp).powi(2))))
        },
        |x, y| x + y,
    )?;
    Ok((sums.max() * grid.spacing()).sqrt())
}

/// `max_{i,j} ‖e^{-ω|s|} v(s)^{-1} ⟨U_s^h e_i, e_j⟩‖_{L²(s)}` with
/// `U_s^h = (e^{-isz} h)(A)`; a regularizer when the value survives doubling
/// of the s-range.
pub fn regularizer_profile(
    a: &DiagonalizableOperator,
    h: &HolFn,
    v: &Weight,
    omega: f64,
    grid: Grid,
) -> Result<RegularizerProfile> {
    let l2_profile = orbit_profile(a, h, v, omega, &grid)?;
    let doubled = Grid::new(2.0 * grid.half_width(), 2 * grid.points())?;
    let doubled_profile = orbit_profile(a, h, v, omega, &doubled)?;
    let is_regularizer = l2_profile.is_finite()
        && (doubled_profile - l2_profile).abs() <= PROFILE_TOL * l2_profile.max(f64::MIN_POSITIVE);
    Ok(RegularizerProfile {
        l2_profile,
        doubled_profile,
        is_regularizer,
    })
}
