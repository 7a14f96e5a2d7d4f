//! Dense Hermitian eigensolvers.
//!
//! [`hermitian_eigenvalues_dd`] works in double-double arithmetic and is used
//! for the Nyström spectra, whose eigenvalues span many orders of magnitude.
//! [`jacobi_eigenvalues`] is a plain `f64` cyclic Jacobi solver kept as an
//! independent cross-check.

pub mod double_double;
pub mod hermitian_dd;
pub mod jacobi;

pub use double_double::{CDd, Dd};
pub use hermitian_dd::{hermitian_eigenvalues_dd, tridiagonal_eigenvalues, HermitianDd};
pub use jacobi::jacobi_eigenvalues;
