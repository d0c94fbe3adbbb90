//! Numerical toolkit for model spaces `K_Θ` of meromorphic inner functions.
//!
//! The crate builds Clark-type inner functions from separated real sequences,
//! evaluates reproducing kernels and their Gram matrices, and studies the
//! Toeplitz and Hankel finite sections of unimodular symbols such as `Θ·Ī`.
//! The [`scenario`] module ties these together into reproducible experiments
//! that compare kernel-side basis constants with operator-side spectra.

pub mod basis;
pub mod hardy;
pub mod inner;
pub mod io;
pub mod kernels;
pub mod linalg;
pub mod scenario;
mod special;
pub mod toeplitz;

pub use num_complex::Complex64 as C64;

/// Crate version embedded in every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
