//! Scalar holomorphic functions that can be evaluated anywhere on their
//! strip (or sector) of analyticity.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sampling::{Grid, SampledFunction};

type Eval = dyn Fn(Complex64) -> Complex64 + Send + Sync;

/// A function holomorphic on `St_θ` (θ = `height`, `INFINITY` if entire).
#[derive(Clone)]
pub struct HolFn {
    eval: Arc<Eval>,
    label: String,
    height: f64,
}

impl fmt::Debug for HolFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HolFn")
            .field("label", &self.label)
            .field("height", &self.height)
            .finish()
    }
}

fn cplx(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

impl HolFn {
    pub fn new(
        label: impl Into<String>,
        height: f64,
        f: impl Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        HolFn {
            eval: Arc::new(f),
            label: label.into(),
            height,
        }
    }

    #[inline]
    pub fn eval(&self, z: Complex64) -> Complex64 {
        (self.eval)(z)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn constant(c: Complex64) -> Self {
        HolFn::new(format!("const({c})"), f64::INFINITY, move |_| c)
    }

    pub fn one() -> Self {
        HolFn::constant(cplx(1.0, 0.0))
    }

    pub fn zero() -> Self {
        HolFn::constant(cplx(0.0, 0.0))
    }

    /// e^{-z²}
    pub fn gaussian() -> Self {
        HolFn::new("gaussian", f64::INFINITY, |z| (-z * z).exp())
    }

    /// e^{-z²/n}
    pub fn wide_gaussian(n: f64) -> Self {
        HolFn::new(format!("gaussian/{n}"), f64::INFINITY, move |z| (-z * z / n).exp())
    }

    /// r_λ(z) = (λ - z)^{-1}, holomorphic on `St_{|Im λ|}`.
    pub fn resolvent(lambda: Complex64) -> Self {
        HolFn::new(format!("resolvent({lambda})"), lambda.im.abs(), move |z| {
            (lambda - z).inv()
        })
    }

    /// e^{-i s₀ z}
    pub fn modulation(s0: f64) -> Self {
        HolFn::new(format!("modulation({s0})"), f64::INFINITY, move |z| {
            (cplx(0.0, -s0) * z).exp()
        })
    }

    pub fn tanh() -> Self {
        HolFn::new("tanh", PI / 2.0, |z| z.tanh())
    }

    /// sech(z)^k
    pub fn sech_power(k: i32) -> Self {
        HolFn::new(format!("sech^{k}"), PI / 2.0, move |z| z.cosh().inv().powi(k))
    }

    pub fn product(&self, other: &HolFn) -> Self {
        let (a, b) = (self.clone(), other.clone());
        HolFn::new(
            format!("{}*{}", self.label, other.label),
            self.height.min(other.height),
            move |z| a.eval(z) * b.eval(z),
        )
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        let a = self.clone();
        HolFn::new(format!("{c}*{}", self.label), self.height, move |z| c * a.eval(z))
    }

    /// (τ_t f)(z) = f(z - t) for complex t; the strip shrinks by |Im t|.
    pub fn translated(&self, t: Complex64) -> Self {
        let a = self.clone();
        HolFn::new(
            format!("{}(.-{t})", self.label),
            self.height - t.im.abs(),
            move |z| a.eval(z - t),
        )
    }

    /// f*(z) = conj(f(conj z))
    pub fn reflected(&self) -> Self {
        let a = self.clone();
        HolFn::new(format!("{}*", self.label), self.height, move |z| a.eval(z.conj()).conj())
    }

    /// Pullback `z ↦ f(e^z)` of a function on the sector `S_angle`.
    pub fn sector_pullback(&self, angle: f64) -> Self {
        let a = self.clone();
        HolFn::new(format!("{}(exp)", self.label), angle, move |z| a.eval(z.exp()))
    }

    /// w ↦ w^{-i s₀} with the principal logarithm (a function on sectors).
    pub fn imaginary_power(s0: f64) -> Self {
        HolFn::new(format!("pow(-i{s0})"), PI, move |w| {
            (cplx(0.0, -s0) * w.ln()).exp()
        })
    }

    /// Samples of `x ↦ f(x + iy)` on `grid`.
    pub fn line_samples(&self, y: f64, grid: Grid) -> Result<SampledFunction> {
        SampledFunction::from_fn(grid, |x| self.eval(cplx(x, y))).map_err(|e| match e {
            Error::Input(m) => Error::Input(format!("{} on Im z = {y}: {m}", self.label)),
            other => other,
        })
    }

    /// Parses the manifest function grammar:
    /// `gaussian`, `gaussian:n`, `const:re[:im]`, `resolvent:re:im`, `modulation:s0`,
    /// `tanh`, `sech:k`, `gaussian-tanh`, and `a*b` products.
    pub fn parse(spec: &str) -> Result<Self> {
        if let Some((a, b)) = spec.split_once('*') {
            return Ok(HolFn::parse(a)?.product(&HolFn::parse(b)?));
        }
        let parts: Vec<&str> = spec.trim().split(':').collect();
        let num = |i: usize| -> Result<f64> {
            parts
                .get(i)
                .ok_or_else(|| Error::Config(format!("function '{spec}': missing parameter {i}")))?
                .parse::<f64>()
                .map_err(|e| Error::Config(format!("function '{spec}': {e}")))
        };
        let f = match parts[0] {
            "gaussian" if parts.len() == 1 => HolFn::gaussian(),
            "gaussian" => HolFn::wide_gaussian(num(1)?),
            "one" => HolFn::one(),
            "const" => HolFn::constant(cplx(num(1)?, if parts.len() > 2 { num(2)? } else { 0.0 })),
            "resolvent" => {
                let lambda = cplx(num(1)?, num(2)?);
                if lambda.im == 0.0 {
                    return Err(Error::Config("resolvent needs Im λ ≠ 0".into()));
                }
                HolFn::resolvent(lambda)
            }
            "modulation" => HolFn::modulation(num(1)?),
            "tanh" => HolFn::tanh(),
            "sech" => HolFn::sech_power(num(1)? as i32),
            "gaussian-tanh" => HolFn::gaussian().product(&HolFn::tanh()),
            "impow" => HolFn::imaginary_power(num(1)?),
            other => return Err(Error::Config(format!("unknown function '{other}'"))),
        };
        Ok(f.with_label(spec))
    }
}
