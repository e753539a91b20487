//! Proximal map of the infinite-push hinge loss.
//!
//! With `g(a) = max_j (1/m) Σ_{i∈G_j} max(a_i, 0)` the loss step of ADMM is
//! `argmin_a g(a) + (μ/2)‖a − s‖²`. Writing `a = a⁺ − a⁻` with both parts
//! nonnegative gives
//!
//! ```text
//! min ½‖a⁺ − a⁻ − s‖² + (1/(mμ)) max_j Σ_{i∈G_j} a⁺_i   s.t. a⁺, a⁻ ≥ 0
//! ```
//!
//! which is solved by block-coordinate descent. The `a⁻` block is a closed
//! form; the `a⁺` block is a prox of the ℓ∞,1 norm plus the nonnegativity
//! constraint, computed by Douglas–Rachford splitting whose two steps are
//! [`prox_f2`](crate::prox::prox_f2) and the Moreau form of the ℓ∞,1 prox.

use crate::config::SolverConfig;
use crate::error::{check_len, Error, Result};
use crate::prox::{prox_f2_into, GroupLayout, L1LinfProjector};

/// `max_j (1/m) Σ_{i∈G_j} max(a_i, 0)`.
pub fn eval_g(a: &[f64], layout: GroupLayout) -> Result<f64> {
    layout.check(a)?;
    Ok(g_unchecked(a, layout))
}

fn g_unchecked(a: &[f64], layout: GroupLayout) -> f64 {
    let m = layout.group_size() as f64;
    layout
        .groups(a)
        .map(|g| g.iter().map(|x| x.max(0.0)).sum::<f64>() / m)
        .fold(0.0, f64::max)
}

/// Closed-form minimization over `a⁻`: `max(a⁺ − s, 0)`.
pub fn a_minus_update(s: &[f64], a_plus: &[f64]) -> Result<Vec<f64>> {
    check_len("a_minus_update", s.len(), a_plus.len())?;
    Ok(s.iter().zip(a_plus).map(|(si, ap)| (ap - si).max(0.0)).collect())
}

fn check_mu(mu: f64) -> Result<()> {
    if mu > 0.0 && mu.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("mu must be positive, got {mu}")))
    }
}

/// Result of the Douglas–Rachford `a⁺` solve.
#[derive(Debug, Clone)]
pub struct DrOutcome {
    pub z: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// `argmin_{z≥0} ½‖z − b‖² + (1/(mμ)) max_j Σ_{i∈G_j} z_i` by Douglas–Rachford
/// from a zero auxiliary point.
pub fn dr_solve_a_plus(b: &[f64], layout: GroupLayout, mu: f64, cfg: &SolverConfig) -> Result<DrOutcome> {
    layout.check(b)?;
    check_mu(mu)?;
    cfg.validate()?;
    let mut ws = LossProx::new(layout);
    let mut z = vec![0.0; b.len()];
    ws.v.fill(0.0);
    let (iterations, converged) = ws.douglas_rachford(b, mu, cfg, &mut z);
    Ok(DrOutcome {
        z,
        iterations,
        converged,
    })
}

/// Block iterates of the doubled problem.
#[derive(Debug, Clone)]
pub struct InnerState {
    pub a_plus: Vec<f64>,
    pub a_minus: Vec<f64>,
    /// Douglas–Rachford auxiliary point.
    pub dr_v: Vec<f64>,
}

/// Result of [`prox_g`].
#[derive(Debug, Clone)]
pub struct ProxOutcome {
    pub a: Vec<f64>,
    pub bcd_iterations: usize,
    /// Douglas–Rachford iterations summed over all sweeps.
    pub dr_iterations: usize,
    /// Both the block loop and every inner solve met their tolerance.
    pub converged: bool,
    /// Doubled-problem objective after each block update.
    pub bcd_objective_trace: Vec<f64>,
    pub state: InnerState,
}

/// Prox of `g/μ` at `s`.
pub fn prox_g(s: &[f64], layout: GroupLayout, mu: f64, cfg: &SolverConfig) -> Result<ProxOutcome> {
    layout.check(s)?;
    check_mu(mu)?;
    cfg.validate()?;
    let mut ws = LossProx::new(layout);
    let mut a = vec![0.0; s.len()];
    let stats = ws.solve(s, mu, cfg, &mut a, true);
    Ok(ProxOutcome {
        a,
        bcd_iterations: stats.bcd_iterations,
        dr_iterations: stats.dr_iterations,
        converged: stats.converged,
        bcd_objective_trace: stats.trace,
        state: InnerState {
            a_plus: ws.a_plus.clone(),
            a_minus: ws.a_minus.clone(),
            dr_v: ws.v.clone(),
        },
    })
}

#[derive(Debug, Clone, Default)]
pub(crate) struct ProxStats {
    pub bcd_iterations: usize,
    pub dr_iterations: usize,
    pub converged: bool,
    pub trace: Vec<f64>,
}

/// Reusable buffers for repeated loss-prox evaluations on one layout.
#[derive(Debug, Clone)]
pub(crate) struct LossProx {
    layout: GroupLayout,
    projector: L1LinfProjector,
    a_plus: Vec<f64>,
    a_minus: Vec<f64>,
    b: Vec<f64>,
    v: Vec<f64>,
    u_prev: Vec<f64>,
    reflect: Vec<f64>,
    proj: Vec<f64>,
}

impl LossProx {
    pub(crate) fn new(layout: GroupLayout) -> Self {
        let len = layout.len();
        LossProx {
            layout,
            projector: L1LinfProjector::new(layout),
            a_plus: vec![0.0; len],
            a_minus: vec![0.0; len],
            b: vec![0.0; len],
            v: vec![0.0; len],
            u_prev: vec![0.0; len],
            reflect: vec![0.0; len],
            proj: vec![0.0; len],
        }
    }

    fn doubled_objective(&self, s: &[f64], mu: f64) -> f64 {
        let fit: f64 = self
            .a_plus
            .iter()
            .zip(&self.a_minus)
            .zip(s)
            .map(|((p, n), si)| {
                let r = p - n - si;
                r * r
            })
            .sum();
        0.5 * fit + g_unchecked(&self.a_plus, self.layout) / mu
    }

    /// Runs block-coordinate descent and writes `a⁺ − a⁻` into `out`.
    pub(crate) fn solve(&mut self, s: &[f64], mu: f64, cfg: &SolverConfig, out: &mut [f64], trace: bool) -> ProxStats {
        let mut stats = ProxStats::default();
        self.a_plus.fill(0.0);
        self.a_minus.fill(0.0);
        self.v.fill(0.0);
        let mut inner_ok = true;
        let mut block_ok = false;
        let mut z = vec![0.0; s.len()];
        for sweep in 0..cfg.bcd_max_iter {
            let mut d_minus = 0.0_f64;
            for ((am, &si), &ap) in self.a_minus.iter_mut().zip(s).zip(&self.a_plus) {
                let new = (ap - si).max(0.0);
                d_minus = d_minus.max((new - *am).abs());
                *am = new;
            }
            if trace {
                stats.trace.push(self.doubled_objective(s, mu));
            }

            for ((bi, &am), &si) in self.b.iter_mut().zip(&self.a_minus).zip(s) {
                *bi = am + si;
            }
            if cfg.strict_alg1 || sweep == 0 {
                self.v.fill(0.0);
            }
            let b = std::mem::take(&mut self.b);
            let (iters, ok) = self.douglas_rachford(&b, mu, cfg, &mut z);
            self.b = b;
            stats.dr_iterations += iters;
            inner_ok &= ok;

            let d_plus = self
                .a_plus
                .iter()
                .zip(&z)
                .fold(0.0_f64, |acc, (old, new)| acc.max((new - old).abs()));
            self.a_plus.copy_from_slice(&z);
            if trace {
                stats.trace.push(self.doubled_objective(s, mu));
            }
            stats.bcd_iterations = sweep + 1;
            if d_plus + d_minus <= cfg.bcd_tol {
                block_ok = true;
                break;
            }
        }
        for ((o, p), n) in out.iter_mut().zip(&self.a_plus).zip(&self.a_minus) {
            *o = p - n;
        }
        stats.converged = block_ok && inner_ok;
        stats
    }

    /// Douglas–Rachford from the current `self.v`; writes the final `u` into `z`.
    fn douglas_rachford(&mut self, b: &[f64], mu: f64, cfg: &SolverConfig, z: &mut [f64]) -> (usize, bool) {
        let m = self.layout.group_size() as f64;
        let radius = cfg.rho / (m * mu);
        let eta = cfg.eta;
        for n in 0..cfg.dr_max_iter {
            prox_f2_into(&self.v, b, cfg.rho, z);
            if n > 0 {
                let delta = z
                    .iter()
                    .zip(&self.u_prev)
                    .fold(0.0_f64, |acc, (a, c)| acc.max((a - c).abs()));
                if delta <= cfg.dr_tol {
                    return (n, true);
                }
            }
            self.u_prev.copy_from_slice(z);
            for ((r, &u), &v) in self.reflect.iter_mut().zip(z.iter()).zip(&self.v) {
                *r = 2.0 * u - v;
            }
            self.projector.project_into(&self.reflect, radius, &mut self.proj);
            for ((v, &u), &p) in self.v.iter_mut().zip(z.iter()).zip(&self.proj) {
                *v += eta * (u - *v - p);
            }
        }
        (cfg.dr_max_iter, false)
    }
}
