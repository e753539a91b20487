//! Sparse support vector infinite push.
//!
//! Learns a linear scoring function `f(x) = w·x` that pushes positive examples
//! above the highest-scored negative one. The training problem
//!
//! ```text
//! min_w  λ Ω(w) + max_j (1/m) Σ_i (1 − w·(x_i⁺ − x_j⁻))₊
//! ```
//!
//! with `Ω` the ℓ1 norm or half the squared ℓ2 norm is solved in the primal by
//! ADMM. The loss step is a proximal map computed by block-coordinate descent
//! over a doubled variable, with a Douglas–Rachford inner loop built on an
//! exact ℓ1,∞-ball projection.
//!
//! Module map:
//! - [`problem`]: datasets and the pairwise difference system.
//! - [`config`]: solver parameters and the regularizer choice.
//! - [`prox`]: proximal and projection kernels.
//! - [`wsolve`]: ridge and Lasso solvers for the weight update.
//! - [`infpush_prox`]: the proximal map of the infinite-push hinge loss.
//! - [`admm`]: the outer solver, objective and prediction.
//! - [`eval`]: ranking and feature-selection metrics.
//! - [`data`]: synthetic data, normalization and file formats.
//! - [`experiment`]: validation-split tuning and scaling benchmarks.
//! - [`cli`]: the `infpush` command-line tool.

pub mod admm;
pub mod cli;
pub mod config;
pub mod data;
pub mod error;
pub mod eval;
pub mod experiment;
pub mod infpush_prox;
pub mod problem;
pub mod prox;
pub mod wsolve;

pub use admm::{fit, objective, predict, Admm, AdmmState, FitReport, Model};
pub use config::{Regularizer, SolverConfig};
pub use error::{Error, Result};
pub use problem::{build_pairwise_system, Dataset, PairwiseSystem};
pub use prox::GroupLayout;
