//! Hardy-space tools: the Cayley transfer between line and circle, Riesz
//! projection, the modified Hilbert transform and a quadrature oracle on ℝ.

pub mod circle;
pub mod hilbert;
pub mod quadrature;

use thiserror::Error;

pub use circle::{
    angle_of, cayley_factor, cayley_inverse, cayley_transfer, circle_angle, co_project, conjugate,
    line_nodes, riesz_project, transfer_fn, CircleTrace, LineFn,
};
pub use hilbert::{
    conjugate_function, hilbert_transform, pv_hilbert, synthesize_unimodular, ConjugateFunction,
    DecayClass, HilbertOptions, LineFunction, UnimodularSymbol,
};
pub use quadrature::{
    inner_product_quadrature, integrate_half_line, integrate_line, quadrature_gram, QuadOptions,
    QuadResult,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HardyError {
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("quadrature did not converge: error {error:.3e} at half-width {half_width}")]
    QuadratureNonconvergence { error: f64, half_width: f64 },
    #[error("non-finite values in {0}")]
    NonFinite(String),
}
