//! Stability analysis for networks of interacting full-duplex repeaters.
//!
//! Repeaters that amplify and instantly re-transmit what they hear form a
//! positive feedback loop through the inter-repeater channels. This crate
//! computes the Gershgorin lower bound on the largest gain the network can
//! use, sweeps determinant- and eigenvalue-based stability measures over
//! frequency, estimates the instability transition, evaluates coverage
//! extension under stability and power limits, and simulates the two-repeater
//! echo recursion in the time domain.
//!
//! The frequency sweeps run on rayon when the `parallel` feature (default) is
//! enabled and fall back to sequential loops otherwise; results are identical.

// NaN-rejecting checks are written as `!(x > 0.0)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod coverage;
pub mod deployment;
pub mod echo;
pub mod error;
pub mod numerics;
pub mod par;
pub mod stability;

pub use channel::{ChannelModel, FreeSpaceChannel};
pub use coverage::{CoverageRecord, CoverageScenario, GainConvention, LimitingConstraint};
pub use deployment::{Deployment, DeploymentKind, DistanceMatrix, Point};
pub use echo::EchoConfig;
pub use error::{Error, Result};
pub use numerics::ComplexMatrix;
pub use stability::{AlphaSweep, FrequencyGrid, MaxGainEstimate, MeasureKind, StabilityReport};
