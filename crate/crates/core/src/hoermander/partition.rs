use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use gauss_quad::GaussLegendre;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functions::HolFn;
use crate::sampling::Grid;

const PANELS: usize = 4;

/// Smooth partition of unity on `St_θ`: `η = α e^{αz}/(1+e^{αz})²`,
/// `φ(z) = ∫₀¹ η(s - z) ds`, `ψ = φ^{1/3}`, with `Σ_n φ(z - n) = 1`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Partition {
    pub alpha: f64,
    pub theta: f64,
    nodes: Vec<(f64, f64)>,
}

pub fn build_partition(theta: f64, alpha: f64) -> Result<Partition> {
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(Error::Input(format!("strip height must be positive, got {theta}")));
    }
    if !(alpha > 0.0 && alpha < PI / (2.0 * theta)) {
        return Err(Error::Input(format!(
            "α = {alpha} outside (0, π/(2θ)) = (0, {}); Re η > 0 fails on St_{theta}",
            PI / (2.0 * theta)
        )));
    }
    let rule = GaussLegendre::new(20.try_into().unwrap());
    let width = 1.0 / PANELS as f64;
    let nodes = (0..PANELS)
        .flat_map(|p| {
            let a = p as f64 * width;
            rule.as_node_weight_pairs()
                .iter()
                .map(move |(x, w)| (a + 0.5 * width * (x + 1.0), 0.5 * width * w))
        })
        .collect();
    Ok(Partition { alpha, theta, nodes })
}

impl Partition {
    pub fn eta(&self, z: Complex64) -> Complex64 {
        let c = (z * (0.5 * self.alpha)).cosh();
        Complex64::new(self.alpha / 4.0, 0.0) / (c * c)
    }

    pub fn phi(&self, z: Complex64) -> Complex64 {
        self.nodes.iter().map(|&(s, w)| self.eta(s - z) * w).sum()
    }

    /// Principal cube root of φ.
    pub fn psi(&self, z: Complex64) -> Complex64 {
        self.phi(z).cbrt()
    }

    fn as_fn(&self, name: &str, f: fn(&Partition, Complex64) -> Complex64) -> HolFn {
        let p = self.clone();
        HolFn::new(format!("{name}[α={}]", self.alpha), self.theta, move |z| f(&p, z))
    }

    pub fn eta_fn(&self) -> HolFn {
        self.as_fn("eta", Partition::eta)
    }

    pub fn phi_fn(&self) -> HolFn {
        self.as_fn("phi", Partition::phi)
    }

    pub fn psi_fn(&self) -> HolFn {
        self.as_fn("psi", Partition::psi)
    }

    /// `Σ_{|n| ≤ terms} φ(z - n)`
    pub fn partial_sum(&self, z: Complex64, terms: i64) -> Complex64 {
        (-terms..=terms).map(|n| self.phi(z - n as f64)).sum()
    }

    /// Centre-line samples `x, η, φ, ψ` (real and imaginary parts).
    pub fn write_csv<W: Write>(&self, w: W, grid: Grid) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["x", "eta_re", "eta_im", "phi_re", "phi_im", "psi_re", "psi_im"])?;
        for x in grid.abscissae() {
            let z = Complex64::new(x, 0.0);
            let (e, f, p) = (self.eta(z), self.phi(z), self.psi(z));
            wr.write_record(
                [x, e.re, e.im, f.re, f.im, p.re, p.im].map(|v| format!("{v:.17e}")),
            )?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>, grid: Grid) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?, grid)
    }
}
