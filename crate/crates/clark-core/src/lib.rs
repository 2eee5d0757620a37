//! Clark measures of holomorphic self-maps of the polydisc, at desk scale.
//!
//! The crate constructs the family of positive measures on the torus whose
//! Poisson integrals reproduce `(1 - |phi(z)|^2)/|alpha - phi(z)|^2`, and
//! verifies the identities that family satisfies: slice decomposition,
//! disintegration of Lebesgue measure, Cauchy-kernel product rules, the
//! isometric embedding of model-space reproducing kernels, and least-squares
//! density scans that witness when that embedding is unitary.
//!
//! Everything is `no_std` + `alloc`; IO, serialization, and the command-line
//! front end live in the companion `clark-cli` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
#[macro_use]
extern crate std;

use alloc::string::String;
use core::fmt;

pub mod clark;
pub mod kernels;
pub mod measures;
pub mod model_space;
pub mod numerics;
pub mod rational;

pub use kernels::{DiscPoint, TorusPoint};
pub use measures::{CircleMeasure, QuadratureSpec, TorusMeasure};
pub use rational::{catalog, InnerCertificate, RationalMap};

/// Error type shared across the crate.
#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// Input outside the mathematical domain of an operation.
    Domain(&'static str),
    /// Denominator vanished (or nearly vanished) during evaluation.
    Pole(&'static str),
    /// A root that should lie on the unit circle strayed too far from it.
    RootOffCircle { deviation: f64 },
    /// Eigenvalue or root iteration failed to converge.
    RootFinding(&'static str),
    /// Atomic masses failed the mean-value cross-check.
    MassMismatch { got: f64, want: f64 },
    /// A slice or frozen map degenerated to a constant.
    DegenerateSlice,
    /// Structurally degenerate input (zero polynomial, constant where
    /// non-constant is required, empty data).
    Degenerate(&'static str),
    /// Requested Fourier frequency exceeds the quadrature exactness range.
    Aliasing { freq: i64, nodes: usize },
    /// Radial quadrature grid too coarse for the requested radius.
    Resolution { needed: usize, got: usize },
    /// Unknown catalog name.
    UnknownCatalog(String),
    /// Measure variant violates a positivity requirement.
    NonPositive(&'static str),
    /// Operation not available for this representation or dimension.
    Unsupported(&'static str),
    /// Gram system assembly or factorization failed.
    GramAssembly(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::Pole(msg) => write!(f, "pole error: {msg}"),
            Error::RootOffCircle { deviation } => {
                write!(f, "root off the unit circle by {deviation:e}")
            }
            Error::RootFinding(msg) => write!(f, "root finding failed: {msg}"),
            Error::MassMismatch { got, want } => {
                write!(f, "atomic mass {got} does not match expected {want}")
            }
            Error::DegenerateSlice => write!(f, "slice map is constant"),
            Error::Degenerate(msg) => write!(f, "degenerate input: {msg}"),
            Error::Aliasing { freq, nodes } => {
                write!(f, "frequency {freq} aliases on a {nodes}-node grid")
            }
            Error::Resolution { needed, got } => {
                write!(f, "radial grid needs {needed} nodes per dim, got {got}")
            }
            Error::UnknownCatalog(name) => write!(f, "unknown catalog map: {name}"),
            Error::NonPositive(msg) => write!(f, "measure not positive: {msg}"),
            Error::Unsupported(msg) => write!(f, "unsupported: {msg}"),
            Error::GramAssembly(msg) => write!(f, "gram assembly failed: {msg}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
