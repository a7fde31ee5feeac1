//! Classical repeated-interaction schemes as deterministic dynamical systems on
//! state × path space, together with the tooling to check their convergence to
//! stochastic-differential-equation limits.
//!
//! The crate is organised bottom-up:
//!
//! - [`wiener`]: Brownian increments, the piecewise-linear embedding of
//!   increment sequences into path space, the shift and the path metric.
//! - [`interaction`]: the one-step map `U(x, y) = x + σ(x)y + h b(x) + h η(h, x, y)`,
//!   the induced Markov chain and its continuous-time interpolation.
//! - [`models`]: charged particle, harmonic pair and damped oscillator.
//! - [`reference`]: oracles for the limit SDEs.
//! - [`analysis`]: Monte Carlo experiments (strong error, shift convergence,
//!   moment scaling, thermalisation, energy growth).
//! - [`cli`]: the `rilab` batch front-end.

// NaN must fail range checks, so negated comparisons are deliberate.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
mod error;
pub mod interaction;
mod linalg;
pub mod models;
pub mod reference;
pub mod wiener;

pub use error::{Error, Result};
pub use interaction::{InteractionModel, Trajectory};
pub use wiener::{IncrementSequence, NoiseSpec, SamplePath};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
