//! Weighted function spaces on lines, strips and sectors, Hörmander-type
//! norms, and four independent evaluations of f(A) for finite-dimensional
//! strip-type and sectorial operator models.

pub mod apps;
pub mod calculus;
pub mod error;
pub mod functions;
pub mod hoermander;
pub mod operators;
pub mod sector;
pub mod sampling;
pub mod strip;
pub mod weights;

pub use error::{Error, Result};
pub use functions::HolFn;
pub use num_complex::Complex64;
pub use sampling::{Grid, SampledFunction};
pub use strip::{LineFunction, NormReport, StripFunctionRep};
pub use weights::{admissibility_report, smooth_equivalent, weighted_norm, Weight};
