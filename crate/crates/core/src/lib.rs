//! Simulation and optimization toolkit for RIS-assisted MIMO links.
//!
//! * [`channel`]: channel sampling, the interaction matrix, cascaded and
//!   spatial assembly of the channel through the surface, and the effective
//!   channel.
//! * [`metrics`]: condition number and spectral entropy.
//! * [`pathloss`]: reflected and scattered path-loss laws and the near-field
//!   boundary rule.
//! * [`optimizer`]: spectral-entropy phase optimization, phase quantization
//!   and single-antenna co-phasing.
//! * [`linksim`]: scene normalization, QPSK, linear and ML detection, and
//!   the condition-number and symbol-error-rate Monte Carlo experiments.
//!
//! Everything numerical is generic over [`Real`] (`f32` or `f64`); the
//! aliases below fix the scalar to `f64`, which is what the experiments use.

// `!(x > 0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod error;
pub mod linalg;
pub mod linksim;
pub mod metrics;
pub mod optimizer;
pub mod pathloss;
pub mod rng;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::{Complex, Real};

pub type Complex64 = Complex<f64>;
pub type ComplexMatrix64 = linalg::ComplexMatrix<f64>;
pub type RisConfig64 = channel::RisConfig<f64>;
pub type Scene64 = channel::Scene<f64>;
pub type SpatialPath64 = channel::SpatialPath<f64>;
pub type ArrayGeometry64 = channel::ArrayGeometry<f64>;
pub type OptOptions64 = optimizer::OptOptions<f64>;
pub type OptResult64 = optimizer::OptResult<f64>;

pub type ComplexMatrix32 = linalg::ComplexMatrix<f32>;
pub type Scene32 = channel::Scene<f32>;
