//! Discrete-time quantum trajectories under imperfect quantum non-demolition
//! measurement: optimal and mismatched filters, pointer-state selection and
//! its rate, parameter-region stability scans, and the photon-box model.
//!
//! Numeric code is generic over [`Real`] (`f32` or `f64`); the `*64` aliases
//! below fix the double-precision instantiation used by the CLI.

// `!(x >= lo)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod analysis;
pub mod channel;
pub mod error;
pub mod export;
pub mod linalg;
pub mod photon_box;
pub mod rng;
pub mod scalar;
pub mod trajectory;

pub use error::{Error, Result};
pub use scalar::Real;

pub type ComplexMatrix64 = linalg::ComplexMatrix<f64>;
pub type DensityMatrix64 = linalg::DensityMatrix<f64>;
pub type KrausFamily64 = channel::KrausFamily<f64>;
pub type CorrelationMatrix64 = channel::CorrelationMatrix<f64>;
pub type Channel64 = channel::ImperfectChannel<f64>;
pub type PointerBasis64 = channel::PointerBasis<f64>;
pub type Distribution64 = analysis::OutcomeDistribution<f64>;
pub type TrajectoryConfig64 = trajectory::TrajectoryConfig<f64>;
pub type TrajectoryRecord64 = trajectory::TrajectoryRecord<f64>;
pub type PhotonBoxParams64 = photon_box::PhotonBoxParams<f64>;
pub type DecoherenceParams64 = photon_box::DecoherenceParams<f64>;

pub type ComplexMatrix32 = linalg::ComplexMatrix<f32>;
pub type DensityMatrix32 = linalg::DensityMatrix<f32>;
pub type Channel32 = channel::ImperfectChannel<f32>;
pub type PhotonBoxParams32 = photon_box::PhotonBoxParams<f32>;
