//! Solver parameters.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Regularizer `Ω(w)`: the ℓ1 norm or half the squared ℓ2 norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regularizer {
    L1,
    L2,
}

impl Regularizer {
    pub fn eval(self, w: &[f64]) -> f64 {
        match self {
            Regularizer::L1 => w.iter().map(|v| v.abs()).sum(),
            Regularizer::L2 => 0.5 * w.iter().map(|v| v * v).sum::<f64>(),
        }
    }
}

impl fmt::Display for Regularizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regularizer::L1 => "l1",
            Regularizer::L2 => "l2",
        })
    }
}

impl FromStr for Regularizer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l1" => Ok(Regularizer::L1),
            "l2" => Ok(Regularizer::L2),
            other => Err(Error::invalid(format!(
                "unknown regularizer '{other}' (expected l1 or l2)"
            ))),
        }
    }
}

/// Tolerances, iteration caps and step parameters for every solver level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// ADMM penalty `μ`, or its per-pair coefficient when `scale_mu_by_pairs` is set.
    pub mu: f64,
    /// Use `mu / (m·n)` as the ADMM penalty.
    pub scale_mu_by_pairs: bool,
    /// Douglas–Rachford step scale.
    pub rho: f64,
    /// Douglas–Rachford relaxation, strictly inside (0, 2).
    pub eta: f64,
    pub outer_max_iter: usize,
    pub bcd_max_iter: usize,
    pub dr_max_iter: usize,
    /// Iteration cap of the Lasso weight update.
    pub subproblem_max_iter: usize,
    pub outer_tol: f64,
    pub bcd_tol: f64,
    pub dr_tol: f64,
    pub subproblem_tol: f64,
    /// Reset the Douglas–Rachford auxiliary to zero on every block sweep
    /// instead of carrying it over from the previous sweep.
    pub strict_alg1: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            mu: 1.0,
            scale_mu_by_pairs: false,
            rho: 1.0,
            eta: 1.0,
            outer_max_iter: 500,
            bcd_max_iter: 100,
            dr_max_iter: 10_000,
            subproblem_max_iter: 10_000,
            outer_tol: 1e-5,
            bcd_tol: 1e-8,
            dr_tol: 1e-8,
            subproblem_tol: 1e-9,
            strict_alg1: false,
        }
    }
}

impl SolverConfig {
    /// Per-pair coefficient used by [`SolverConfig::pair_scaled`].
    pub const PAIR_SCALED_MU: f64 = 1.0;

    /// Defaults with the penalty set to `1 / (m·n)`.
    ///
    /// The iterates are unchanged when positives or negatives are duplicated
    /// only if `μ` scales with `1/(m·n)`, so this setting behaves uniformly
    /// across problem sizes where a fixed `μ` does not.
    pub fn pair_scaled() -> Self {
        SolverConfig {
            mu: Self::PAIR_SCALED_MU,
            scale_mu_by_pairs: true,
            ..Default::default()
        }
    }

    /// The ADMM penalty for a system with `pairs = m·n` rows.
    pub fn effective_mu(&self, pairs: usize) -> f64 {
        if self.scale_mu_by_pairs {
            self.mu / pairs as f64
        } else {
            self.mu
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("mu", self.mu),
            ("rho", self.rho),
            ("outer_tol", self.outer_tol),
            ("bcd_tol", self.bcd_tol),
            ("dr_tol", self.dr_tol),
            ("subproblem_tol", self.subproblem_tol),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if !(self.eta > 0.0 && self.eta < 2.0) {
            return Err(Error::invalid(format!("eta must lie in (0, 2), got {}", self.eta)));
        }
        let caps = [
            ("outer_max_iter", self.outer_max_iter),
            ("bcd_max_iter", self.bcd_max_iter),
            ("dr_max_iter", self.dr_max_iter),
            ("subproblem_max_iter", self.subproblem_max_iter),
        ];
        for (name, v) in caps {
            if v == 0 {
                return Err(Error::invalid(format!("{name} must be at least 1")));
            }
        }
        Ok(())
    }
}
