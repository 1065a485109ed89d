use crate::error::Result;
use crate::functions::HolFn;
use crate::hoermander::Localizer;
use crate::operators::DiagonalizableOperator;
use crate::sampling::Grid;
use crate::strip::StripFunctionRep;
use crate::weights::Weight;

use super::{
    elementary_contour, meda_hoermander, oracle_matrix, sobolev_integral, CalculusResult, ContourConfig, MedaConfig,
    Method, QuadratureMeta,
};

/// Strip method applied to `log A` by [`sector_calculus`].
#[derive(Debug, Clone)]
pub enum StripMethod {
    Oracle,
    Contour(ContourConfig),
    /// Fits `f(e^z)` on `St_omega` over `grid`.
    SobolevIntegral { grid: Grid, omega: f64 },
    Meda(MedaConfig),
}

/// `f(A) = [f(e^z)](log A)`. `f` is holomorphic on the sector of half-angle
/// `f.height()`; the deviation is measured against `V diag(f(λ_j)) V⁻¹`.
pub fn sector_calculus(a: &DiagonalizableOperator, f: &HolFn, method: &StripMethod) -> Result<CalculusResult> {
    let log_a = a.log()?;
    let pulled = f.sector_pullback(f.height());
    let direct = oracle_matrix(a, f)?;
    let strip = match method {
        StripMethod::Oracle => CalculusResult::new(
            oracle_matrix(&log_a, &pulled)?,
            Method::Oracle,
            QuadratureMeta::None,
            &direct,
        ),
        StripMethod::Contour(cfg) => elementary_contour(&log_a, &pulled, cfg)?,
        StripMethod::SobolevIntegral { grid, omega } => {
            let rep = StripFunctionRep::fit(&pulled, *grid, *omega, Weight::constant())?;
            sobolev_integral(&log_a, &rep)?
        }
        StripMethod::Meda(cfg) => meda_hoermander(&log_a, &pulled, &Localizer::gaussian(), cfg)?,
    };
    let deviation_from_oracle = strip.matrix.relative_deviation(&direct);
    Ok(CalculusResult {
        deviation_from_oracle,
        ..strip
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{OperatorKind, OperatorMatrix};
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn positive(eig: &[f64]) -> DiagonalizableOperator {
        let eig = eig.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        DiagonalizableOperator::diagonal(eig, 2.0, OperatorKind::Sectorial { omega: 0.0 }).unwrap()
    }

    #[test]
    fn imaginary_powers_by_transfer() {
        let a = positive(&[0.3, 1.0, 2.5, 7.0]);
        for s0 in [1.0, 2.0, 5.0] {
            let r = sector_calculus(&a, &HolFn::imaginary_power(s0), &StripMethod::Oracle).unwrap();
            assert!(r.matrix.relative_deviation(&a.imaginary_power(s0).unwrap()) < 1e-10);
            let cfg = ContourConfig {
                require_decay: false,
                ..Default::default()
            };
            let c = sector_calculus(&a, &HolFn::imaginary_power(s0), &StripMethod::Contour(cfg)).unwrap();
            assert!(c.matrix.relative_deviation(&a.imaginary_power(s0).unwrap()) < 1e-10);
        }
    }

    #[test]
    fn constant_and_kernel() {
        let a = positive(&[1.0, 2.0, 4.0]);
        let one = sector_calculus(&a, &HolFn::one().with_label("1"), &StripMethod::Oracle).unwrap();
        assert!(one.matrix.relative_deviation(&OperatorMatrix::identity(3)) < 1e-15);
        let f = HolFn::new("z/(1+z)^2", PI, |z| z / ((1.0 + z) * (1.0 + z)));
        let r = sector_calculus(&a, &f, &StripMethod::Contour(ContourConfig::default())).unwrap();
        assert!(r.deviation_from_oracle < 1e-6, "{}", r.deviation_from_oracle);
    }
}
