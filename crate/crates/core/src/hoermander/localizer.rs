use std::f64::consts::PI;

use gauss_quad::GaussLegendre;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functions::HolFn;
use crate::sampling::{self, Grid, SampledFunction};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LocalizerKind {
    /// e^{-z²}
    Gaussian,
    /// e^{-i s₀ z} e^{-z²}
    ModulatedGaussian { s0: f64 },
    /// sech(z)^k
    SechPower { k: i32 },
    /// ∫ b(s) e^{-izs} ds for the smooth bump b supported in [-width, width]
    FourierOfBump { width: f64 },
    /// z ↦ base(z + iy)
    OnLine { base: Box<LocalizerKind>, y: f64 },
}

/// Window function for Hörmander norms.
#[derive(Debug, Clone)]
pub struct Localizer {
    kind: LocalizerKind,
    function: HolFn,
    strip_margin: f64,
    coeff: SampledFunction,
}

impl Localizer {
    fn build(kind: LocalizerKind, function: HolFn, strip_margin: f64) -> Result<Self> {
        let grid = Grid::default();
        let coeff = sampling::fourier_inverse(&function.line_samples(0.0, grid.dual())?);
        if coeff.norm_sup() == 0.0 {
            return Err(Error::Degenerate("localizer vanishes identically".into()));
        }
        Ok(Localizer {
            kind,
            function,
            strip_margin,
            coeff,
        })
    }

    /// The canonical window G = e^{-z²}.
    pub fn gaussian() -> Self {
        Self::build(LocalizerKind::Gaussian, HolFn::gaussian(), f64::INFINITY).expect("gaussian is valid")
    }

    pub fn modulated_gaussian(s0: f64) -> Self {
        let f = HolFn::modulation(s0).product(&HolFn::gaussian());
        Self::build(LocalizerKind::ModulatedGaussian { s0 }, f, f64::INFINITY).expect("valid window")
    }

    /// sech^k, holomorphic on St_{π/2}; k ≥ 2 gives the required decay order.
    pub fn sech_power(k: i32) -> Result<Self> {
        if k < 2 {
            return Err(Error::Config(format!("sech power must be >= 2, got {k}")));
        }
        Self::build(LocalizerKind::SechPower { k }, HolFn::sech_power(k), PI / 2.0)
    }

    pub fn fourier_of_bump(width: f64) -> Result<Self> {
        if !(width > 0.0) {
            return Err(Error::Config(format!("bump width must be positive, got {width}")));
        }
        let rule = GaussLegendre::new(64.try_into().unwrap());
        let nodes: Vec<(f64, f64)> = rule
            .as_node_weight_pairs()
            .iter()
            .map(|&(x, w)| {
                let bump = (-1.0 / (1.0 - x * x)).exp();
                (x * width, w * width * bump)
            })
            .collect();
        let f = HolFn::new(format!("bump^({width})"), f64::INFINITY, move |z| {
            nodes
                .iter()
                .map(|&(s, c)| c * (Complex64::new(0.0, -s) * z).exp())
                .sum()
        });
        Self::build(LocalizerKind::FourierOfBump { width }, f, f64::INFINITY)
    }

    /// The trace `x ↦ ψ(x + iy)` as a window on ℝ.
    pub fn on_line(&self, y: f64) -> Result<Self> {
        if !(y.abs() < self.strip_margin) {
            return Err(Error::Domain(format!(
                "window holomorphic on St_{} only, asked for Im z = {y}",
                self.strip_margin
            )));
        }
        let kind = LocalizerKind::OnLine {
            base: Box::new(self.kind.clone()),
            y,
        };
        let f = self.function.translated(Complex64::new(0.0, -y));
        Self::build(kind, f, self.strip_margin - y.abs())
    }

    pub fn kind(&self) -> &LocalizerKind {
        &self.kind
    }

    pub fn function(&self) -> &HolFn {
        &self.function
    }

    pub fn strip_margin(&self) -> f64 {
        self.strip_margin
    }

    /// Fourier-side representative on the default grid.
    pub fn coeff(&self) -> &SampledFunction {
        &self.coeff
    }

    #[inline]
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.function.eval(z)
    }

    /// c·ψ with the same kind.
    pub fn scaled(&self, c: f64) -> Self {
        Localizer {
            kind: self.kind.clone(),
            function: self.function.scaled(Complex64::new(c, 0.0)),
            strip_margin: self.strip_margin,
            coeff: self.coeff.scale(Complex64::new(c, 0.0)),
        }
    }

    /// ∫_ℝ |ψ|² by quadrature on the default line grid.
    pub fn l2_norm_sq(&self) -> f64 {
        self.coeff.norm_l2().powi(2) * 2.0 * PI
    }

    /// Rescaled so that ∫_ℝ |ψ|² = 1.
    pub fn normalized(&self) -> Self {
        self.scaled(self.l2_norm_sq().sqrt().recip())
    }

    /// Rescaled so that ψ(0) = 1.
    pub fn unit_at_zero(&self) -> Result<Self> {
        let v = self.eval(Complex64::new(0.0, 0.0));
        if v.im.abs() > 1e-14 * v.norm() || v.re == 0.0 {
            return Err(Error::Degenerate(format!("window value at 0 is {v}, not a positive real")));
        }
        Ok(self.scaled(1.0 / v.re))
    }

    /// Measured `sup |ψ(z)| (1+|Re z|)^α` over `|Re z| ≤ 40`, `|Im z| ≤ θ`.
    pub fn decay_constant(&self, alpha: f64, theta: f64) -> Result<f64> {
        if theta >= self.strip_margin {
            return Err(Error::Domain(format!(
                "decay requested on St_{theta}, window lives on St_{}",
                self.strip_margin
            )));
        }
        let mut best = 0.0f64;
        for i in 0..=800 {
            let x = -40.0 + 0.1 * i as f64;
            for j in 0..=8 {
                let y = -theta + 2.0 * theta * j as f64 / 8.0;
                best = best.max(self.eval(Complex64::new(x, y)).norm() * (1.0 + x.abs()).powf(alpha));
            }
        }
        Ok(best)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_normalisation() {
        let g = Localizer::gaussian();
        assert!((g.l2_norm_sq() - (PI / 2.0).sqrt()).abs() < 1e-12);
        assert!((g.normalized().l2_norm_sq() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sech_square_l2() {
        // ∫ sech⁴ = 4/3
        let s = Localizer::sech_power(2).unwrap();
        assert!((s.l2_norm_sq() - 4.0 / 3.0).abs() < 1e-10);
        assert!(Localizer::sech_power(1).is_err());
    }

    #[test]
    fn decay_is_finite() {
        let s = Localizer::sech_power(2).unwrap();
        assert!(s.decay_constant(2.0, 1.0).unwrap().is_finite());
        assert!(s.decay_constant(2.0, 2.0).is_err());
        let b = Localizer::fourier_of_bump(1.0).unwrap();
        assert!(b.decay_constant(2.0, 0.5).unwrap() < 1e3);
    }

    #[test]
    fn bump_transform_at_zero_is_mass() {
        let b = Localizer::fourier_of_bump(2.0).unwrap();
        // ∫ e^{-1/(1-x²)} dx over (-1, 1) ≈ 0.443994
        let mass = b.eval(Complex64::new(0.0, 0.0)).re / 2.0;
        assert!((mass - 0.443_993_816_168_079_4).abs() < 1e-6);
    }
}
