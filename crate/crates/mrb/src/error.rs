//! Error type shared by all modules.

use thiserror::Error;

/// Everything that can go wrong when building or running the machinery.
#[derive(Debug, Error)]
pub enum Error {
    /// Two operands live on different `so(n)` algebras.
    #[error("matrix size mismatch: expected n = {expected}, got n = {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Basis index pair out of range or not strictly increasing.
    #[error("invalid basis index ({r},{s}) for n = {n}: require 1 <= r < s <= n")]
    InvalidIndex { r: usize, s: usize, n: usize },

    /// Conjugation matrix fails the orthogonality check.
    #[error("matrix is not orthogonal: |S^T S - I| = {deviation:.3e} exceeds {tol:.1e}")]
    NotOrthogonal { deviation: f64, tol: f64 },

    /// Inertia parameter matrix fails the symmetry check.
    #[error("matrix is not symmetric: |C - C^T| = {deviation:.3e} exceeds {tol:.1e}")]
    NotSymmetric { deviation: f64, tol: f64 },

    /// Spectrum of the inertia parameter matrix is not strictly positive.
    #[error("inertia spectrum not positive definite: eigenvalue #{index} = {value:.6e}")]
    NonPositiveEigenvalue { index: usize, value: f64 },

    /// Two eigenvalues of the inertia parameter matrix are too close.
    #[error(
        "near-degenerate inertia spectrum: eigenvalues #{i} = {a:.6e} and #{j} = {b:.6e} \
         differ by {gap:.3e} (gap tolerance {tol:.1e})"
    )]
    DegenerateSpectrum { i: usize, j: usize, a: f64, b: f64, gap: f64, tol: f64 },

    /// Saturation was asked to run with no seed directions.
    #[error("seed list is empty")]
    EmptySeeds,

    /// Constrained saturation needs a steady seed to start from.
    #[error("constrained saturation requires at least one seed flagged steady and passing the steady test")]
    NoSteadySeed,

    /// An operation received the zero matrix where a direction is required.
    #[error("input direction must be nonzero")]
    ZeroInput,

    /// The integrator produced a non-finite state.
    #[error("state diverged (non-finite) at t = {time:.6e}")]
    Diverged { time: f64 },

    /// A hard resource cap was hit while growing the bracket tree.
    #[error("{what} cap exceeded: {cap}")]
    ResourceCap { what: &'static str, cap: usize },

    /// Anything else that makes a request unserviceable.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
