//! Rotational dynamics and controllability toolkit for the n-dimensional
//! rigid body.
//!
//! The state space is `so(n)`, the algebra of real skew-symmetric `n x n`
//! matrices. On top of it the crate provides:
//!
//! - [`skew`]: basis indexing, commutator, trace-form inner product and
//!   orthogonal conjugation;
//! - [`body`]: inertia data (a symmetric positive-definite matrix with
//!   distinct eigenvalues), the inertia operator `W -> WC + CW` and its
//!   inverse, the free drift and steady-state tests;
//! - [`extension`]: the symmetric bilinear operator that maps two controlled
//!   torque directions to the direction their double bracket contributes,
//!   its closed-form table in the principal-axes basis, and the saturation
//!   engine that iterates it to certify full-span closure;
//! - [`fields`]: polynomial vector fields on `so(n)` coordinates, exact Lie
//!   brackets, and the bracket-generating rank test;
//! - [`dynamics`]: fixed-step RK4 integration of the controlled, damped
//!   equation plus conservation diagnostics for the free body;
//! - [`steer`]: two-point steering by direct shooting over piecewise-constant
//!   controls;
//! - [`sample`]: seeded generators for reproducible probes.
//!
//! All numeric code is generic over the scalar type through [`Real`]
//! (`f32` or `f64`); the `*64` aliases below fix double precision, which is
//! what every documented tolerance refers to.

pub mod body;
pub mod dynamics;
pub mod error;
pub mod extension;
pub mod fields;
pub mod num;
pub mod sample;
pub mod skew;
pub mod steer;

pub use body::RigidBody;
pub use dynamics::{ConservationReport, ControlledSystem, Schedule, Trajectory};
pub use error::{Error, Result};
pub use extension::{SaturateOptions, SaturationResult, SaturationRound};
pub use fields::{PolyVectorField, RankOptions, RankReport};
pub use num::Real;
pub use skew::SkewMatrix;
pub use steer::{SteerOptions, SteerOutcome};

/// Double-precision skew-symmetric matrix.
pub type Skew64 = SkewMatrix<f64>;
/// Double-precision rigid body.
pub type Body64 = RigidBody<f64>;
/// Double-precision controlled system.
pub type System64 = ControlledSystem<f64>;
/// Double-precision polynomial vector field.
pub type Field64 = PolyVectorField<f64>;
