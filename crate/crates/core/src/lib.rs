//! Simulation and verification of extremes of first-order Markov chains.
//!
//! The crate covers exact marginal laws and transforms ([`margins`]), the
//! numerical kernels underneath ([`numerics`]), bivariate transition kernels
//! ([`kernels`]), norming schemes with their update functions and limit laws
//! ([`norming`]), tail chain and hidden tail chain simulators ([`tailchain`])
//! and the Monte Carlo diagnostics that compare them ([`diagnostics`]).
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`). The
//! aliases at the crate root fix the scalar to `f64`, which is what the
//! diagnostics and the command line runner use.

pub mod diagnostics;
pub mod error;
pub mod kernels;
pub mod margins;
pub mod norming;
pub mod numerics;
pub mod random;
pub mod scalar;
pub mod tailchain;

#[cfg(test)]
mod testutil;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Marginal = margins::MarginalLaw<f64>;
pub type Grid = numerics::GridFunction<f64>;
pub type Kernel = kernels::KernelSpec<f64>;
pub type Norming = norming::NormingScheme<f64>;
pub type Limit = norming::LimitLaw<f64>;
pub type Update = norming::UpdateFunctions<f64>;
pub type Envelope = diagnostics::QuantileEnvelope<f64>;
pub type Convergence = diagnostics::ConvergenceTable<f64>;
