use gauss_quad::GaussLegendre;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::functions::HolFn;
use crate::operators::{DiagonalizableOperator, OperatorMatrix};

use super::{oracle_matrix, ordered_sum, spectral_height, zeros, CalculusResult, Method, QuadratureMeta};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourConfig {
    /// Height ω′ of the contour; chosen automatically when `None`.
    pub height: Option<f64>,
    pub truncation: f64,
    pub panel_length: f64,
    pub nodes_per_panel: usize,
    /// Reject functions that do not decay along the contour lines.
    pub require_decay: bool,
}

impl Default for ContourConfig {
    fn default() -> Self {
        ContourConfig {
            height: None,
            truncation: 40.0,
            panel_length: 0.25,
            nodes_per_panel: 16,
            require_decay: true,
        }
    }
}

impl ContourConfig {
    /// Node spacing used for the proximity test.
    pub fn spacing(&self) -> f64 {
        self.panel_length / self.nodes_per_panel as f64
    }
}

/// Geometric mean of the spectral height and the usable analyticity height
/// `min(θ, ω + 1)`, or their midpoint when the mean sits too close to the spectrum.
pub fn default_contour_height(spectral: f64, theta: f64, min_gap: f64) -> f64 {
    let cap = theta.min(spectral + 1.0);
    let g = (spectral * cap).sqrt();
    if g - spectral < min_gap {
        0.5 * (spectral + cap)
    } else {
        g
    }
}

/// Nodes and weights (including `dw`) of the closed rectangle
/// `|Re w| ≤ T, |Im w| ≤ ω′`, counterclockwise.
fn rectangle(height: f64, cfg: &ContourConfig) -> Vec<(Complex64, Complex64)> {
    let rule = GaussLegendre::new(cfg.nodes_per_panel.try_into().expect("at least two nodes"));
    let pairs = rule.as_node_weight_pairs();
    let t = cfg.truncation;
    let corners = [
        Complex64::new(-t, -height),
        Complex64::new(t, -height),
        Complex64::new(t, height),
        Complex64::new(-t, height),
    ];
    let mut nodes = Vec::new();
    for k in 0..4 {
        let (a, b) = (corners[k], corners[(k + 1) % 4]);
        let panels = ((b - a).norm() / cfg.panel_length).ceil().max(1.0) as usize;
        let step = (b - a) / panels as f64;
        for p in 0..panels {
            let start = a + step * p as f64;
            for &(x, w) in pairs.iter() {
                nodes.push((start + step * (0.5 * (x + 1.0)), step * (0.5 * w)));
            }
        }
    }
    nodes
}

/// `f(A) = (1/2πi) ∮ f(w) R(w, A) dw` over the boundary of the truncated
/// strip of height ω′.
pub fn elementary_contour(a: &DiagonalizableOperator, f: &HolFn, cfg: &ContourConfig) -> Result<CalculusResult> {
    if !(cfg.truncation > 0.0 && cfg.panel_length > 0.0 && cfg.nodes_per_panel >= 2) {
        return Err(Error::Config(format!("invalid contour configuration {cfg:?}")));
    }
    let spectral = spectral_height(a);
    let gap = 10.0 * cfg.spacing();
    let height = match cfg.height {
        Some(h) => h,
        None => default_contour_height(spectral, f.height(), 2.0 * gap),
    };
    if !(height > spectral && height < f.height()) {
        return Err(Error::Domain(format!(
            "contour height {height} must lie strictly between the spectral height {spectral} and the analyticity height {}",
            f.height()
        )));
    }
    let max_re = a.eig().iter().map(|l| l.re.abs()).fold(0.0, f64::max);
    let distance = a
        .eig()
        .iter()
        .map(|l| (height - l.im.abs()).min(cfg.truncation - l.re.abs()))
        .fold(f64::INFINITY, f64::min);
    if distance < gap || max_re >= cfg.truncation {
        return Err(Error::ContourProximity {
            distance,
            required: gap,
        });
    }
    if cfg.require_decay {
        let t = cfg.truncation;
        let mut edge = 0.0f64;
        let mut mid = 0.0f64;
        let mut peak = 0.0f64;
        for y in [height, -height] {
            for sign in [1.0, -1.0] {
                edge = edge.max(f.eval(Complex64::new(sign * t, y)).norm());
                mid = mid.max(f.eval(Complex64::new(sign * t / 2.0, y)).norm());
            }
            for k in 0..=80 {
                peak = peak.max(f.eval(Complex64::new(-t + k as f64 * t / 40.0, y)).norm());
            }
        }
        if !edge.is_finite() || edge > 0.1 * peak || edge > 0.9 * mid {
            return Err(Error::divergence(
                format!(
                    "{} does not decay along Im w = ±{height}: |f| = {edge:e} at |Re w| = {t}, {mid:e} at {}",
                    f.label(),
                    t / 2.0
                ),
                edge,
            ));
        }
    }
    let nodes = rectangle(height, cfg);
    let n = a.dim();
    let sum = ordered_sum(
        nodes.len(),
        || zeros(n),
        |k| {
            let (w, dw) = nodes[k];
            let fw = f.eval(w);
            if !fw.re.is_finite() || !fw.im.is_finite() {
                return Err(Error::divergence(format!("{} is not finite at {w}", f.label()), f64::INFINITY));
            }
            Ok(Some(a.resolvent(w)?.into_entries() * (fw * dw)))
        },
        |x, y| x + y,
    )?;
    let matrix = OperatorMatrix::new(sum / Complex64::new(0.0, 2.0 * std::f64::consts::PI))?;
    let panels = nodes.len() / cfg.nodes_per_panel;
    Ok(CalculusResult::new(
        matrix,
        Method::Contour,
        QuadratureMeta::Contour {
            height,
            truncation: cfg.truncation,
            panels,
            nodes_per_panel: cfg.nodes_per_panel,
        },
        &oracle_matrix(a, f)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::random::random_strip_type;
    use crate::operators::OperatorKind;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn scalar_gaussian() {
        let a = DiagonalizableOperator::diagonal(vec![c(0.0, 0.0)], 2.0, OperatorKind::StripType { omega: 0.0 }).unwrap();
        let cfg = ContourConfig {
            height: Some(0.5),
            ..Default::default()
        };
        let r = elementary_contour(&a, &HolFn::gaussian(), &cfg).unwrap();
        assert!((r.matrix.entries()[(0, 0)] - 1.0).norm() < 1e-8);
    }

    #[test]
    fn resolvent_reproduction() {
        let a = DiagonalizableOperator::diagonal(vec![c(1.0, 0.0), c(-1.0, 0.0)], 2.0, OperatorKind::StripType { omega: 0.0 })
            .unwrap();
        let lam = c(0.0, 2.0);
        let r = elementary_contour(&a, &HolFn::resolvent(lam), &ContourConfig::default()).unwrap();
        assert!(r.matrix.relative_deviation(&a.resolvent(lam).unwrap()) < 1e-8);
    }

    #[test]
    fn random_models() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let fs = [
            HolFn::gaussian(),
            HolFn::resolvent(c(0.0, 2.0)),
            HolFn::gaussian().product(&HolFn::tanh()),
        ];
        for _ in 0..10 {
            let a = random_strip_type(&mut rng, 6, 0.5, 2.0).unwrap();
            for f in &fs {
                let r = elementary_contour(&a, f, &ContourConfig::default()).unwrap();
                assert!(r.deviation_from_oracle < 1e-6, "{}: {}", f.label(), r.deviation_from_oracle);
            }
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let a = DiagonalizableOperator::diagonal(vec![c(0.0, 0.3)], 2.0, OperatorKind::StripType { omega: 0.3 }).unwrap();
        let near = ContourConfig {
            height: Some(0.35),
            ..Default::default()
        };
        assert!(matches!(
            elementary_contour(&a, &HolFn::gaussian(), &near),
            Err(Error::ContourProximity { .. })
        ));
        assert!(matches!(
            elementary_contour(&a, &HolFn::one(), &ContourConfig::default()),
            Err(Error::Divergence { .. })
        ));
        let relaxed = ContourConfig {
            require_decay: false,
            ..Default::default()
        };
        let one = elementary_contour(&a, &HolFn::one(), &relaxed).unwrap();
        assert!(one.deviation_from_oracle < 1e-12);
    }
}
