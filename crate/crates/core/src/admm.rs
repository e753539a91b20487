//! ADMM solver for the regularized infinite-push problem.
//!
//! With `a = 1 − Xw` the problem becomes `min λΩ(w) + g(a)` subject to
//! `Xw + a − 1 = 0`. In scaled form (`γ = δ/μ`) each iteration performs
//!
//! ```text
//! w ← argmin ½‖Xw − (1 − a − γ)‖² + (λ/μ) Ω(w)
//! a ← prox_{g/μ}(1 − γ − Xw)
//! γ ← γ + Xw + a − 1
//! ```
//!
//! starting from `a = γ = 0`.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::config::{Regularizer, SolverConfig};
use crate::data::NormStats;
use crate::error::{check_len, Error, Result};
use crate::eval::NONZERO_THRESHOLD;
use crate::infpush_prox::LossProx;
use crate::problem::{build_pairwise_system, Dataset, PairwiseSystem};
use crate::wsolve::{LassoSolver, RidgeSolver};

/// A trained linear scoring function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Model {
    pub weights: Vec<f64>,
    pub lambda: f64,
    pub regularizer: Regularizer,
    /// Applied to inputs before scoring when present.
    #[serde(rename = "norm_stats")]
    pub normalization_stats: Option<NormStats>,
}

impl Model {
    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn nonzero_count(&self) -> usize {
        self.weights.iter().filter(|w| w.abs() > NONZERO_THRESHOLD).count()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::invalid(format!(
                "model lambda must be positive, got {}",
                self.lambda
            )));
        }
        if self.weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::NonFinite("model weight".into()));
        }
        if let Some(stats) = &self.normalization_stats {
            check_len("normalization means", self.dim(), stats.means.len())?;
            check_len("normalization stds", self.dim(), stats.stds.len())?;
            if !stats.stds.iter().all(|s| *s > 0.0) {
                return Err(Error::invalid("normalization stds must be positive"));
            }
        }
        Ok(())
    }

    /// Scores every positive and negative row of `data`.
    pub fn score_dataset(&self, data: &Dataset) -> Result<(Vec<f64>, Vec<f64>)> {
        check_len("model dimension", self.dim(), data.dim())?;
        let score_rows = |x: &nalgebra::DMatrix<f64>| -> Result<Vec<f64>> {
            x.row_iter()
                .map(|row| {
                    let v: Vec<f64> = row.iter().copied().collect();
                    predict(self, &v)
                })
                .collect()
        };
        Ok((score_rows(data.positives())?, score_rows(data.negatives())?))
    }
}

/// `f(x) = w·x̃` where `x̃` is `x` after the model's stored normalization.
pub fn predict(model: &Model, x: &[f64]) -> Result<f64> {
    check_len("predict input", model.dim(), x.len())?;
    Ok(match &model.normalization_stats {
        Some(stats) => x
            .iter()
            .zip(&model.weights)
            .zip(stats.means.iter().zip(&stats.stds))
            .map(|((xi, wi), (m, s))| wi * (xi - m) / s)
            .sum(),
        None => x.iter().zip(&model.weights).map(|(a, b)| a * b).sum(),
    })
}

/// Per-iteration record of a fit.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct FitReport {
    pub iterations: usize,
    /// Objective of the weight iterate after each outer iteration.
    pub objective_trace: Vec<f64>,
    /// `‖Xw + a − 1‖₂` after each outer iteration.
    pub primal_residual_trace: Vec<f64>,
    pub nonzero_count: usize,
    pub converged: bool,
    /// Outer iterations in which the Lasso update hit its sweep cap.
    pub lasso_cap_hits: usize,
    /// Outer iterations in which the loss prox hit an iteration cap.
    pub prox_cap_hits: usize,
}

impl FitReport {
    pub fn final_objective(&self) -> Option<f64> {
        self.objective_trace.last().copied()
    }

    pub fn final_residual(&self) -> Option<f64> {
        self.primal_residual_trace.last().copied()
    }
}

/// `λΩ(w) + max_j (1/m) Σ_{i∈G_j} (1 − (Xw)_k)₊`.
pub fn objective(w: &[f64], sys: &PairwiseSystem, lambda: f64, reg: Regularizer) -> Result<f64> {
    check_len("objective weights", sys.dim(), w.len())?;
    let scores = sys.matrix() * DVector::from_column_slice(w);
    Ok(objective_from_scores(w, scores.as_slice(), sys.m(), lambda, reg))
}

fn objective_from_scores(w: &[f64], xw: &[f64], m: usize, lambda: f64, reg: Regularizer) -> f64 {
    let loss = xw
        .chunks(m)
        .map(|g| g.iter().map(|s| (1.0 - s).max(0.0)).sum::<f64>() / m as f64)
        .fold(0.0, f64::max);
    lambda * reg.eval(w) + loss
}

/// Iterates of the scaled-form ADMM.
#[derive(Debug, Clone)]
pub struct AdmmState {
    pub w: DVector<f64>,
    pub a: DVector<f64>,
    /// Scaled dual variable `γ = δ/μ`.
    pub gamma: DVector<f64>,
    pub iteration: usize,
}

/// Quantities measured at the end of one outer iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepInfo {
    pub objective: f64,
    /// `‖Xw + a − 1‖₂`.
    pub primal_residual: f64,
    /// `‖Δw‖₂ / max(1, ‖w‖₂)`.
    pub w_change: f64,
    pub lasso_converged: bool,
    pub prox_converged: bool,
}

enum WUpdate {
    Ridge(RidgeSolver),
    Lasso { solver: LassoSolver, max_iter: usize },
}

/// Stateful ADMM driver over a fixed pairwise system.
pub struct Admm<'a> {
    sys: &'a PairwiseSystem,
    lambda: f64,
    reg: Regularizer,
    cfg: SolverConfig,
    w_update: WUpdate,
    loss_prox: LossProx,
    state: AdmmState,
    xw: DVector<f64>,
    target: DVector<f64>,
}

impl<'a> Admm<'a> {
    pub fn new(sys: &'a PairwiseSystem, lambda: f64, reg: Regularizer, cfg: &SolverConfig) -> Result<Self> {
        cfg.validate()?;
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::invalid(format!("lambda must be positive, got {lambda}")));
        }
        let x = sys.matrix();
        let gram = x.tr_mul(x);
        let mut cfg = cfg.clone();
        cfg.mu = cfg.effective_mu(sys.rows());
        cfg.scale_mu_by_pairs = false;
        let effective = lambda / cfg.mu;
        let w_update = match reg {
            Regularizer::L2 => WUpdate::Ridge(RidgeSolver::new(&gram, effective)?),
            Regularizer::L1 => WUpdate::Lasso {
                solver: LassoSolver::new(gram),
                max_iter: cfg.subproblem_max_iter,
            },
        };
        let (rows, d) = (sys.rows(), sys.dim());
        Ok(Admm {
            sys,
            lambda,
            reg,
            cfg,
            w_update,
            loss_prox: LossProx::new(sys.layout()),
            state: AdmmState {
                w: DVector::zeros(d),
                a: DVector::zeros(rows),
                gamma: DVector::zeros(rows),
                iteration: 0,
            },
            xw: DVector::zeros(rows),
            target: DVector::zeros(rows),
        })
    }

    pub fn state(&self) -> &AdmmState {
        &self.state
    }

    /// One outer iteration.
    pub fn step(&mut self) -> Result<StepInfo> {
        let x = self.sys.matrix();
        let mu = self.cfg.mu;
        let st = &mut self.state;

        for ((t, a), g) in self.target.iter_mut().zip(st.a.iter()).zip(st.gamma.iter()) {
            *t = 1.0 - a - g;
        }
        let rhs = x.tr_mul(&self.target);
        let w_old = st.w.clone();
        let mut lasso_converged = true;
        st.w = match &mut self.w_update {
            WUpdate::Ridge(solver) => solver.solve(&rhs, self.cfg.subproblem_tol),
            WUpdate::Lasso { solver, max_iter } => {
                let tol = self.cfg.subproblem_tol * rhs.amax().max(1.0);
                let out = solver.solve(
                    &rhs,
                    self.target.norm_squared(),
                    self.lambda / mu,
                    Some(&w_old),
                    tol,
                    *max_iter,
                );
                lasso_converged = out.converged;
                if !out.converged {
                    // Soft failure: allow more sweeps on the next call.
                    *max_iter = (*max_iter * 2).min(self.cfg.subproblem_max_iter * 16);
                }
                out.w
            }
        };
        if st.w.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!(
                "weight update produced a non-finite value at iteration {}",
                st.iteration + 1
            )));
        }

        x.mul_to(&st.w, &mut self.xw);
        for ((t, xw), g) in self.target.iter_mut().zip(self.xw.iter()).zip(st.gamma.iter()) {
            *t = 1.0 - g - xw;
        }
        let stats = self
            .loss_prox
            .solve(self.target.as_slice(), mu, &self.cfg, st.a.as_mut_slice(), false);
        if st.a.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!(
                "loss prox produced a non-finite value at iteration {}",
                st.iteration + 1
            )));
        }

        let mut res_sq = 0.0;
        for ((g, xw), a) in st.gamma.iter_mut().zip(self.xw.iter()).zip(st.a.iter()) {
            let r = xw + a - 1.0;
            *g += r;
            res_sq += r * r;
        }
        st.iteration += 1;

        let w_norm = st.w.norm();
        let w_change = (&st.w - &w_old).norm() / w_norm.max(1.0);
        let objective = objective_from_scores(st.w.as_slice(), self.xw.as_slice(), self.sys.m(), self.lambda, self.reg);
        Ok(StepInfo {
            objective,
            primal_residual: res_sq.sqrt(),
            w_change,
            lasso_converged,
            prox_converged: stats.converged,
        })
    }

    /// Whether `info` meets the stopping rule.
    pub fn is_converged(&self, info: &StepInfo) -> bool {
        let scale = (self.sys.rows() as f64).sqrt();
        info.primal_residual / scale <= self.cfg.outer_tol && info.w_change <= self.cfg.outer_tol
    }

    /// Iterates until the stopping rule or the iteration cap.
    pub fn run(mut self) -> Result<(Vec<f64>, FitReport)> {
        let mut report = FitReport::default();
        for _ in 0..self.cfg.outer_max_iter {
            let info = self.step()?;
            if !info.objective.is_finite() {
                return Err(Error::NonFinite(format!(
                    "objective at iteration {}",
                    report.iterations + 1
                )));
            }
            report.iterations += 1;
            report.objective_trace.push(info.objective);
            report.primal_residual_trace.push(info.primal_residual);
            report.lasso_cap_hits += usize::from(!info.lasso_converged);
            report.prox_cap_hits += usize::from(!info.prox_converged);
            if self.is_converged(&info) {
                report.converged = true;
                break;
            }
        }
        let w: Vec<f64> = self.state.w.iter().copied().collect();
        report.nonzero_count = w.iter().filter(|v| v.abs() > NONZERO_THRESHOLD).count();
        Ok((w, report))
    }
}

/// Fits on an already-built pairwise system and returns the weights.
pub fn fit_system(
    sys: &PairwiseSystem,
    lambda: f64,
    reg: Regularizer,
    cfg: &SolverConfig,
) -> Result<(Vec<f64>, FitReport)> {
    Admm::new(sys, lambda, reg, cfg)?.run()
}

/// Trains a model on `data` as given (no normalization is applied).
pub fn fit(data: &Dataset, lambda: f64, reg: Regularizer, cfg: &SolverConfig) -> Result<(Model, FitReport)> {
    let sys = build_pairwise_system(data)?;
    let (weights, report) = fit_system(&sys, lambda, reg, cfg)?;
    Ok((
        Model {
            weights,
            lambda,
            regularizer: reg,
            normalization_stats: None,
        },
        report,
    ))
}
