//! Lossy common information on finite alphabets.
//!
//! Computes the quantities of the two-source lossy Gray-Wyner setting:
//! Wyner's common information `C(X1,X2;D1,D2)` (upper bounds by
//! constrained optimization), Gács-Körner common information
//! `K(X1,X2;D1,D2)` (lower bounds from the common part of the source),
//! joint and marginal rate-distortion encoders, and the mutual information
//! `I(Ẑ1;Ẑ2)` between the reconstructions. The [`theorem`] module checks
//! the ordering `K ≤ I(Ẑ1;Ẑ2) ≤ C` numerically and replays each step of
//! its derivation as a residual.
//!
//! Everything is generic over the scalar type ([`Real`]); the `f64`
//! aliases below are what the CLI and most callers use.

pub mod common_info;
pub mod error;
pub mod probability;
pub mod rate_distortion;
pub mod scalar;
pub mod shannon;
pub mod theorem;

pub use error::{Error, Result};

/// Variable names the solvers and the theorem harness agree on.
pub mod names {
    pub const X1: &str = "X1";
    pub const X2: &str = "X2";
    /// Reconstruction of the first target.
    pub const Z1: &str = "Z1";
    /// Reconstruction of the second target.
    pub const Z2: &str = "Z2";
    /// Wyner auxiliary.
    pub const U: &str = "U";
    /// Gács-Körner auxiliary.
    pub const V: &str = "V";
    /// Shared component of a source built as `X_i = (X'_i, W)`.
    pub const W: &str = "W";
}
pub use scalar::{binary_entropy, Real};

pub type Joint = probability::JointDistribution<f64>;
pub type Chan = probability::Channel<f64>;
pub type Distortion = rate_distortion::DistortionMeasure<f64>;
pub type RdSolution = rate_distortion::RdSolution<f64>;
pub type Wyner = common_info::WynerSolution<f64>;
pub type Gk = common_info::GkSolution<f64>;
pub type Report = theorem::BoundReport<f64>;
pub type Trace = theorem::ProofTrace<f64>;

pub type JointF32 = probability::JointDistribution<f32>;
pub type ChanF32 = probability::Channel<f32>;
