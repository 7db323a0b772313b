//! Multi-asset European option pricing by the Fourier method on tensor trains.
//!
//! The characteristic function of correlated geometric Brownian motion and the
//! Fourier transform of the min-call payoff are sampled on a complex contour
//! grid, compressed into tensor trains by TT-cross, and contracted into a price
//! without ever forming the full grid. Exact, direct-grid, dense-Fourier and
//! Monte Carlo pricers are included as references.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bench;
pub mod cross;
pub mod error;
pub(crate) mod linalg;
pub mod market;
pub mod pricers;
pub mod tensor_train;

pub use error::{Error, Result};
pub use tensor_train::{Core, Oracle, OracleError, TensorTrain};
