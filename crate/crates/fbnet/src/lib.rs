//! Finite-blocklength performance analysis of downlink Poisson cellular networks.
//!
//! The crate has three layers:
//!
//! * analytic: special functions and quadrature ([`numerics`]), interference
//!   Laplace transforms and the Gamma moment-matching approximation
//!   ([`network`]), normal-approximation coding rates for Gaussian codebooks
//!   ([`rate`]) and QAM constellations ([`constellation`]), rate-outage bounds
//!   and reliability ([`outage`]), and the coding-rate meta distribution
//!   ([`meta`]);
//! * Monte Carlo: a Poisson-point-process network simulator ([`sim`]) that
//!   produces exact-interference samples of every analytic quantity;
//! * codec: multilevel polar-coded modulation with multistage decoding
//!   ([`mlpcm`]) used to measure rates actually achieved by short codes.
//!
//! All internal units are SI (meters, watts). Conversions from the usual
//! BS/km² and dB parameterizations live on [`network::NetworkConfig`].

pub mod constellation;
pub mod meta;
pub mod mlpcm;
pub mod network;
pub mod numerics;
pub mod outage;
pub mod rate;
pub mod sim;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An argument fell outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A configuration violated a type invariant.
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    /// Adaptive quadrature or a series failed to reach the requested
    /// tolerance. Carries the best estimate and the achieved error bound.
    #[error("failed to converge: best estimate {estimate}, error bound {error_bound}")]
    NonConvergence { estimate: f64, error_bound: f64 },
    /// A truncated series ended on a term that is still too large.
    #[error("series truncation failed: last retained term {last_term}")]
    Truncation { last_term: f64 },
    /// Moment-matched distribution fit is degenerate (e.g. variance <= 0).
    #[error("degenerate fit: {0}")]
    Degenerate(String),
}

pub type Result<T> = std::result::Result<T, Error>;
