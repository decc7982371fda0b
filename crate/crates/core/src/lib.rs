//! Multilinear singular values of complex tensors.
//!
//! The largest multilinear singular value of a tensor in mode `n` is the
//! spectral norm of its mode-`n` unfolding. This crate provides:
//!
//! - dense tensors with unfolding, folding, mode products, and regrouping
//!   into third-order tensors ([`tensor`]);
//! - a self-contained Hermitian eigensolver and everything derived from it:
//!   mode-wise singular spectra, the multilinear SVD, all-orthogonality
//!   checks, and the block trace inequality ([`eig`], [`spectra`]);
//! - feasibility classification of prescribed largest multilinear singular
//!   values: necessary inequalities, sufficient polytope membership, gap
//!   detection, and special-point rules ([`feasibility`]);
//! - explicit constructions realizing feasible prescriptions as tensors
//!   with all-orthogonal unfoldings ([`construct`]);
//! - Horn-inequality checks characterizing the full spectra of degenerate
//!   tensors, together with a constructor and a splitter for the degenerate
//!   equality case ([`horn`]).
//!
//! Conventions: tensor entries are stored first-index-fastest, public
//! indices and mode numbers are 1-based, and singular values are reported
//! in descending order.

pub mod construct;
pub mod eig;
pub mod error;
pub mod feasibility;
pub mod horn;
pub mod matrix;
mod simplex;
pub mod spectra;
pub mod tensor;

pub use error::{Error, Result};
pub use matrix::Matrix;
pub use tensor::Tensor;

/// Complex scalar used throughout the crate.
pub type C64 = num_complex::Complex64;
