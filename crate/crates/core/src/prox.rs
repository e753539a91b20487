//! Proximal operators and projections.
//!
//! Vectors handled here are laid out in `n` contiguous groups of `m` entries,
//! the same layout as the rows of [`PairwiseSystem`](crate::PairwiseSystem).
//! The two mixed norms involved are
//!
//! - ℓ1,∞: `Σ_j max_{i∈G_j} |v_i|`,
//! - ℓ∞,1: `max_j Σ_{i∈G_j} |v_i|`,
//!
//! which are dual to each other. The prox of `τ·ℓ∞,1` is obtained from the
//! projection onto the ℓ1,∞ ball of radius `τ` by Moreau decomposition.

use std::cmp::Ordering;

use crate::error::{check_len, Error, Result};

/// `group_count` contiguous groups of `group_size` entries each.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroupLayout {
    group_size: usize,
    group_count: usize,
}

impl GroupLayout {
    pub fn new(group_size: usize, group_count: usize) -> Result<Self> {
        if group_size == 0 || group_count == 0 {
            return Err(Error::invalid(format!(
                "group layout needs at least one group of one entry, got {group_count} x {group_size}"
            )));
        }
        Ok(GroupLayout {
            group_size,
            group_count,
        })
    }

    pub fn group_size(&self) -> usize {
        self.group_size
    }

    pub fn group_count(&self) -> usize {
        self.group_count
    }

    /// Total vector length `m·n`.
    pub fn len(&self) -> usize {
        self.group_size * self.group_count
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn group(&self, j: usize) -> std::ops::Range<usize> {
        j * self.group_size..(j + 1) * self.group_size
    }

    pub fn groups<'a>(&self, v: &'a [f64]) -> std::slice::Chunks<'a, f64> {
        v.chunks(self.group_size)
    }

    pub(crate) fn check(&self, v: &[f64]) -> Result<()> {
        check_len("grouped vector length", self.len(), v.len())
    }
}

fn check_radius(tau: f64) -> Result<()> {
    if tau >= 0.0 && tau.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "radius must be finite and nonnegative, got {tau}"
        )))
    }
}

#[inline]
pub(crate) fn shrink(x: f64, tau: f64) -> f64 {
    if x > tau {
        x - tau
    } else if x < -tau {
        x + tau
    } else {
        0.0
    }
}

/// Component-wise `sign(v)·max(|v| − τ, 0)`.
pub fn soft_threshold(v: &[f64], tau: f64) -> Result<Vec<f64>> {
    check_radius(tau)?;
    Ok(v.iter().map(|&x| shrink(x, tau)).collect())
}

/// Projection onto the nonnegative orthant.
pub fn project_nonneg(v: &[f64]) -> Vec<f64> {
    v.iter().map(|&x| x.max(0.0)).collect()
}

/// `max(0, (v + ρ b) / (1 + ρ))`: prox of `ρ·(½‖· − b‖² + ι_{≥0})`.
pub fn prox_f2(v: &[f64], b: &[f64], rho: f64) -> Result<Vec<f64>> {
    check_len("prox_f2 target", v.len(), b.len())?;
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::invalid(format!("rho must be positive, got {rho}")));
    }
    let mut out = vec![0.0; v.len()];
    prox_f2_into(v, b, rho, &mut out);
    Ok(out)
}

#[inline]
pub(crate) fn prox_f2_into(v: &[f64], b: &[f64], rho: f64, out: &mut [f64]) {
    let scale = 1.0 / (1.0 + rho);
    for ((o, &vi), &bi) in out.iter_mut().zip(v).zip(b) {
        *o = ((vi + rho * bi) * scale).max(0.0);
    }
}

/// The ℓ1,∞ norm `Σ_j max_{i∈G_j} |v_i|`.
pub fn l1_linf_norm(v: &[f64], layout: GroupLayout) -> f64 {
    layout
        .groups(v)
        .map(|g| g.iter().fold(0.0_f64, |acc, x| acc.max(x.abs())))
        .sum()
}

/// The ℓ∞,1 norm `max_j Σ_{i∈G_j} |v_i|`.
pub fn linf_l1_norm(v: &[f64], layout: GroupLayout) -> f64 {
    layout
        .groups(v)
        .map(|g| g.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Euclidean projection onto `{u : Σ_j max_{i∈G_j} |u_i| ≤ τ}`.
///
/// The result clips each group to a level `t_j`, `u_i = clamp(v_i, −t_j, t_j)`.
/// At the optimum every clipped group sheds the same ℓ1 mass `θ` and the
/// levels sum to `τ`. `θ ↦ Σ_j t_j(θ)` is piecewise linear with breakpoints
/// where a group's level crosses one of its sorted magnitudes, so a sweep over
/// the sorted breakpoints locates `θ` exactly in `O(N log N)`.
pub fn project_l1_linf_ball(v: &[f64], layout: GroupLayout, tau: f64) -> Result<Vec<f64>> {
    layout.check(v)?;
    check_radius(tau)?;
    let mut out = vec![0.0; v.len()];
    L1LinfProjector::new(layout).project_into(v, tau, &mut out);
    Ok(out)
}

/// Prox of `τ·max_j Σ_{i∈G_j} |z_i|`, i.e. `v − Π_{ℓ1,∞ ≤ τ}(v)`.
pub fn prox_linf_l1(v: &[f64], layout: GroupLayout, tau: f64) -> Result<Vec<f64>> {
    layout.check(v)?;
    check_radius(tau)?;
    if tau == 0.0 {
        return Ok(v.to_vec());
    }
    let mut proj = vec![0.0; v.len()];
    L1LinfProjector::new(layout).project_into(v, tau, &mut proj);
    Ok(v.iter().zip(&proj).map(|(a, p)| a - p).collect())
}

/// Reusable scratch space for repeated ℓ1,∞-ball projections on one layout.
#[derive(Debug, Clone)]
pub struct L1LinfProjector {
    layout: GroupLayout,
    sorted: Vec<f64>,
    prefix: Vec<f64>,
    events: Vec<(f64, u32)>,
    counts: Vec<usize>,
    levels: Vec<f64>,
}

impl L1LinfProjector {
    pub fn new(layout: GroupLayout) -> Self {
        let len = layout.len();
        L1LinfProjector {
            layout,
            sorted: vec![0.0; len],
            prefix: vec![0.0; len],
            events: Vec::with_capacity(len),
            counts: vec![0; layout.group_count()],
            levels: vec![0.0; layout.group_count()],
        }
    }

    pub fn layout(&self) -> GroupLayout {
        self.layout
    }

    /// Writes the projection of `v` onto the radius-`tau` ball into `out`.
    /// Lengths must equal the layout length.
    pub fn project_into(&mut self, v: &[f64], tau: f64, out: &mut [f64]) {
        debug_assert_eq!(v.len(), self.layout.len());
        debug_assert_eq!(out.len(), self.layout.len());
        if tau <= 0.0 {
            out.fill(0.0);
            return;
        }
        if !self.clip_levels(v, tau) {
            out.copy_from_slice(v);
            return;
        }
        let m = self.layout.group_size();
        for ((chunk, src), &t) in out.chunks_mut(m).zip(v.chunks(m)).zip(&self.levels) {
            for (o, &x) in chunk.iter_mut().zip(src) {
                *o = x.clamp(-t, t);
            }
        }
    }

    /// Fills `self.levels` with the per-group clip levels. Returns `false`
    /// when `v` already lies in the ball.
    fn clip_levels(&mut self, v: &[f64], tau: f64) -> bool {
        let m = self.layout.group_size();
        let n = self.layout.group_count();

        let mut norm = 0.0;
        for (j, (dst, src)) in self.sorted.chunks_mut(m).zip(v.chunks(m)).enumerate() {
            for (d, x) in dst.iter_mut().zip(src) {
                *d = x.abs();
            }
            dst.sort_unstable_by(|a, b| b.partial_cmp(a).unwrap_or(Ordering::Equal));
            let pre = &mut self.prefix[j * m..(j + 1) * m];
            let mut acc = 0.0;
            for (p, &a) in pre.iter_mut().zip(dst.iter()) {
                acc += a;
                *p = acc;
            }
            norm += dst[0];
        }
        if norm <= tau {
            return false;
        }

        // Breakpoint k of group j (1-based count of entries above the level):
        // the level reaches the (k+1)-th largest magnitude at θ = S_k − k·a_{k+1}.
        self.events.clear();
        for j in 0..n {
            let a = &self.sorted[j * m..(j + 1) * m];
            let s = &self.prefix[j * m..(j + 1) * m];
            if s[m - 1] <= 0.0 {
                self.counts[j] = 0;
                continue;
            }
            self.counts[j] = 1;
            for k in 1..=m {
                let next = if k < m { a[k] } else { 0.0 };
                self.events.push((s[k - 1] - k as f64 * next, j as u32));
            }
        }
        self.events
            .sort_unstable_by(|x, y| x.0.partial_cmp(&y.0).unwrap_or(Ordering::Equal));

        // Σ_j t_j(θ) = A − B·θ on the current piece.
        let mut a_sum = 0.0;
        let mut b_sum = 0.0;
        for j in 0..n {
            if self.counts[j] == 1 {
                a_sum += self.prefix[j * m];
                b_sum += 1.0;
            }
        }
        for &(theta, j) in &self.events {
            if a_sum - b_sum * theta <= tau {
                break;
            }
            let j = j as usize;
            let k = self.counts[j];
            let s_k = self.prefix[j * m + k - 1];
            a_sum -= s_k / k as f64;
            b_sum -= 1.0 / k as f64;
            if k < m {
                let s_next = self.prefix[j * m + k];
                a_sum += s_next / (k + 1) as f64;
                b_sum += 1.0 / (k + 1) as f64;
                self.counts[j] = k + 1;
            } else {
                self.counts[j] = 0;
            }
        }

        // Re-accumulate on the final piece to shed drift from the sweep.
        let mut a_sum = 0.0;
        let mut b_sum = 0.0;
        for j in 0..n {
            let k = self.counts[j];
            if k > 0 {
                a_sum += self.prefix[j * m + k - 1] / k as f64;
                b_sum += 1.0 / k as f64;
            }
        }
        let theta = ((a_sum - tau) / b_sum).max(0.0);
        for j in 0..n {
            let k = self.counts[j];
            self.levels[j] = if k == 0 {
                0.0
            } else {
                let a = &self.sorted[j * m..(j + 1) * m];
                let lo = if k < m { a[k] } else { 0.0 };
                ((self.prefix[j * m + k - 1] - theta) / k as f64).clamp(lo, a[k - 1])
            };
        }
        true
    }
}
