//! Weight update: `min_w ½‖Xw − s‖² + reg·Ω(w)`.
//!
//! The ADMM driver calls this with `reg = λ/μ`. For the squared ℓ2
//! regularizer it is a ridge system with a fixed matrix, so the Cholesky
//! factor is computed once. For ℓ1 it is a Lasso solved by cyclic coordinate
//! descent on the Gram matrix `XᵀX`, which is also fixed across calls; each
//! call costs one `Xᵀs` product plus `O(d²)` per sweep.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{check_len, Error, Result};
use crate::prox::shrink;

/// Warm start and effective regularization carried between weight updates.
#[derive(Debug, Clone)]
pub struct WSolverState {
    pub previous_solution: DVector<f64>,
    pub effective_reg: f64,
}

impl WSolverState {
    pub fn new(dim: usize, effective_reg: f64) -> Result<Self> {
        check_reg(effective_reg)?;
        Ok(WSolverState {
            previous_solution: DVector::zeros(dim),
            effective_reg,
        })
    }
}

fn check_reg(reg: f64) -> Result<()> {
    if reg > 0.0 && reg.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("regularization must be positive, got {reg}")))
    }
}

/// Cached factorization of `XᵀX + reg·I`.
#[derive(Debug, Clone)]
pub struct RidgeSolver {
    system: DMatrix<f64>,
    chol: Cholesky<f64, Dyn>,
}

impl RidgeSolver {
    pub fn new(gram: &DMatrix<f64>, reg: f64) -> Result<Self> {
        check_reg(reg)?;
        let mut system = gram.clone();
        for i in 0..system.nrows() {
            system[(i, i)] += reg;
        }
        let chol = Cholesky::new(system.clone())
            .ok_or_else(|| Error::NonFinite("ridge system is not positive definite".into()))?;
        Ok(RidgeSolver { system, chol })
    }

    /// Solves `(XᵀX + reg·I) w = rhs`, refining until the residual is at most
    /// `tol·(1 + ‖rhs‖)` or refinement stops helping.
    pub fn solve(&self, rhs: &DVector<f64>, tol: f64) -> DVector<f64> {
        let mut w = self.chol.solve(rhs);
        let bound = tol * (1.0 + rhs.norm());
        let mut res = rhs - &self.system * &w;
        let mut res_norm = res.norm();
        for _ in 0..3 {
            if res_norm <= bound {
                break;
            }
            let cand = &w + self.chol.solve(&res);
            let cand_res = rhs - &self.system * &cand;
            let cand_norm = cand_res.norm();
            if cand_norm >= res_norm {
                break;
            }
            w = cand;
            res = cand_res;
            res_norm = cand_norm;
        }
        w
    }
}

/// Ridge regression `w = (XᵀX + reg·I)⁻¹ Xᵀs`.
pub fn solve_ridge(x: &DMatrix<f64>, s: &DVector<f64>, reg: f64, tol: f64) -> Result<DVector<f64>> {
    check_len("ridge target", x.nrows(), s.len())?;
    let solver = RidgeSolver::new(&x.tr_mul(x), reg)?;
    Ok(solver.solve(&x.tr_mul(s), tol))
}

/// Result of a Lasso solve.
#[derive(Debug, Clone)]
pub struct LassoOutcome {
    pub w: DVector<f64>,
    /// Completed coordinate sweeps.
    pub iterations: usize,
    /// Largest distance from `−∇` to `reg·∂‖w‖₁` over coordinates.
    pub certificate: f64,
    pub converged: bool,
    /// Objective after each sweep, starting with the initial point.
    pub objective_trace: Vec<f64>,
}

/// Coordinate-descent Lasso on a fixed Gram matrix.
#[derive(Debug, Clone)]
pub struct LassoSolver {
    gram: DMatrix<f64>,
}

impl LassoSolver {
    pub fn new(gram: DMatrix<f64>) -> Self {
        LassoSolver { gram }
    }

    pub fn dim(&self) -> usize {
        self.gram.nrows()
    }

    /// Minimizes `½wᵀGw − cᵀw + ½‖s‖² + reg‖w‖₁` where `c = Xᵀs` and
    /// `s_sq = ‖s‖²` (the constant only shifts the reported objective).
    pub fn solve(
        &self,
        c: &DVector<f64>,
        s_sq: f64,
        reg: f64,
        warm: Option<&DVector<f64>>,
        tol: f64,
        max_iter: usize,
    ) -> LassoOutcome {
        let d = self.dim();
        let g = &self.gram;
        let mut w = warm.cloned().unwrap_or_else(|| DVector::zeros(d));
        let mut grad = g * &w - c;
        let objective = |w: &DVector<f64>, grad: &DVector<f64>| {
            0.5 * w.dot(&(grad - c)) + 0.5 * s_sq + reg * w.iter().map(|v| v.abs()).sum::<f64>()
        };
        let mut trace = vec![objective(&w, &grad)];
        let mut certificate = subgradient_residual(&w, &grad, reg);
        let mut iterations = 0;
        while certificate > tol && iterations < max_iter {
            for i in 0..d {
                let gii = g[(i, i)];
                let old = w[i];
                let new = if gii > 0.0 {
                    shrink(old - grad[i] / gii, reg / gii)
                } else {
                    0.0
                };
                let delta = new - old;
                if delta != 0.0 {
                    w[i] = new;
                    grad.axpy(delta, &g.column(i), 1.0);
                }
            }
            iterations += 1;
            grad = g * &w - c;
            trace.push(objective(&w, &grad));
            certificate = subgradient_residual(&w, &grad, reg);
        }
        LassoOutcome {
            w,
            iterations,
            certificate,
            converged: certificate <= tol,
            objective_trace: trace,
        }
    }
}

/// `max_i dist(−∇_i, reg·∂|w_i|)`.
pub fn subgradient_residual(w: &DVector<f64>, grad: &DVector<f64>, reg: f64) -> f64 {
    w.iter()
        .zip(grad.iter())
        .map(|(&wi, &gi)| {
            if wi > 0.0 {
                (gi + reg).abs()
            } else if wi < 0.0 {
                (gi - reg).abs()
            } else {
                (gi.abs() - reg).max(0.0)
            }
        })
        .fold(0.0, f64::max)
}

/// Lasso `min ½‖Xw − s‖² + reg‖w‖₁` from an optional warm start.
///
/// Non-convergence within `max_iter` sweeps is not an error: the outcome
/// carries the last iterate with `converged == false`.
pub fn solve_lasso(
    x: &DMatrix<f64>,
    s: &DVector<f64>,
    reg: f64,
    warm: Option<&DVector<f64>>,
    tol: f64,
    max_iter: usize,
) -> Result<LassoOutcome> {
    check_len("lasso target", x.nrows(), s.len())?;
    check_reg(reg)?;
    if let Some(w0) = warm {
        check_len("lasso warm start", x.ncols(), w0.len())?;
    }
    let solver = LassoSolver::new(x.tr_mul(x));
    Ok(solver.solve(&x.tr_mul(s), s.norm_squared(), reg, warm, tol, max_iter))
}
