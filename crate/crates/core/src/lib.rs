//! Simulation and certification toolkit for the sequential qubit
//! random-access code: exact and sampled protocol statistics for tunable
//! unsharp measurements, sharpness intervals, incompatibility bounds and
//! error-bounded detector tomography.
//!
//! The linear algebra and closed-form bounds are generic over [`Real`]
//! (`f32` or `f64`). The Monte Carlo sampler and the numerical optimizers
//! work in `f64`. Aliases below fix the scalar for everyday use.

pub mod certification;
pub mod error;
pub mod fixtures;
pub mod incompatibility;
pub mod optimize;
pub mod projective;
pub mod protocol;
pub mod qubit;
pub mod report;
pub mod sampling;
pub mod scalar;
pub mod strategies;
pub mod tomography;

pub use error::{Error, Result};
pub use scalar::Real;

/// Double-precision aliases.
pub type Operator = qubit::Operator2<f64>;
pub type Bloch = qubit::BlochVector<f64>;
pub type State = qubit::QubitState<f64>;
pub type Observable = qubit::Observable<f64>;
pub type Spec = protocol::ProtocolSpec<f64>;
pub type Distribution = protocol::JointDistribution<f64>;

/// Single-precision aliases.
pub type Operator32 = qubit::Operator2<f32>;
pub type Bloch32 = qubit::BlochVector<f32>;
pub type State32 = qubit::QubitState<f32>;
