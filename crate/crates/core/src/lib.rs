//! Quantitative stability of analytic continuation.
//!
//! The crate computes the optimal power-law exponents `gamma(z)` for three
//! settings (an annulus with a concentric data circle, the upper half-plane
//! with a data circle, a Bernstein ellipse with data on `[-1, 1]`), builds the
//! worst-case maximizer functions, and solves the regularized Fredholm
//! equation `(K + eps^2) u = p_z` twice: in closed form through the explicit
//! eigenpairs of `K`, and numerically through a Nyström discretization.
//!
//! Module map:
//!
//! * [`geometry`]: domains, data curves, Joukowski and Möbius maps.
//! * [`spectral`]: reproducing kernels and eigenpairs `(lambda_n, e_n)`.
//! * [`tikhonov`]: closed-form solution, bounds, exponents, maximizers.
//! * [`nystrom`]: quadrature discretization of `K` and its spectrum.
//! * [`powerlaw`]: epsilon sweeps, log-log fits, sum asymptotics harness.
//! * [`cli`]: the `contstab` command-line front end and the verify suite.

pub mod chebyshev;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod nystrom;
pub mod powerlaw;
pub mod quadrature;
pub mod series;
pub mod spectral;
pub mod tikhonov;

pub use error::{Error, Result};
pub use num_complex::Complex64;
