//! Rateless information reconciliation for continuous-variable QKD.
//!
//! Bob Raptor-encodes a random message, maps each `d`-chunk of the code
//! stream onto his normalized Gaussian data through an orthogonal
//! transformation, and publishes the transformations; Alice applies them to
//! her own data and decodes by belief propagation, asking for more symbols
//! until the precode and check code agree. The [`keyrate`] module turns the
//! resulting efficiency into finite-size secret key rates.
//!
//! Numeric code is generic over [`Real`] (`f32` or `f64`); the aliases below
//! fix the common `f64` instantiations.

pub mod channel;
mod error;
pub mod keyrate;
pub mod multidim;
pub mod raptor;
mod real;
pub mod rng;
pub mod session;

pub use error::{Error, Result};
pub use real::Real;

pub type ChannelParams = channel::ChannelParams<f64>;
pub type GaussianPair = channel::GaussianPair<f64>;
pub type NormalizedVector = multidim::NormalizedVector<f64>;
pub type SphericalCodeword = multidim::SphericalCodeword<f64>;
pub type MappingFunction = multidim::MappingFunction<f64>;
pub type AlgebraBasis = multidim::AlgebraBasis<f64>;
pub type LlrVector = raptor::LlrVector<f64>;

pub type KeyRateInputs = keyrate::KeyRateInputs<f64>;
pub type KeyRateReport = keyrate::KeyRateReport<f64>;
