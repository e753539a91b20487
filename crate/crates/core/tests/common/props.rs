//! Property checks shared by the proptest suites and the acceptance runner.
//!
//! Each check runs its own deterministic `TestRunner` so the acceptance
//! binary can execute the same suites without the test harness.

use std::collections::BTreeSet;
use std::fmt::Debug;

use infpush::admm::{fit, Admm};
use infpush::data::{apply_normalizer, fit_normalizer, generate_toy, load_csv, save_csv, ToySpec};
use infpush::eval::{feature_metrics, infinite_push_loss, pos_at_top_rate, RankScores};
use infpush::experiment::{rank_scores, train_normalized};
use infpush::infpush_prox::prox_g;
use infpush::prox::{
    l1_linf_norm, linf_l1_norm, project_l1_linf_ball, prox_f2, prox_linf_l1, soft_threshold, GroupLayout,
};
use infpush::wsolve::{solve_lasso, solve_ridge};
use infpush::{build_pairwise_system, Dataset, Regularizer, SolverConfig};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use proptest::test_runner::{RngAlgorithm, TestCaseError, TestRng, TestRunner};

use super::{loss_g, project_l1_linf, prox_g_epigraph, prox_objective, split_groups};

pub type Outcome = Result<(), String>;

/// Name, case count and entry point of one invariant.
pub type Property = (&'static str, u32, fn(u32) -> Outcome);

pub const SUITE: &[Property] = &[
    ("pairwise rows and group partition", 200, pairwise_rows),
    ("projection idempotence", 300, projection_idempotent),
    ("projection non-expansiveness", 300, projection_nonexpansive),
    (
        "projection dominates feasible points",
        150,
        projection_dominates_feasible,
    ),
    ("projection matches bisection oracle", 300, projection_matches_oracle),
    ("Moreau identity and dual optimality", 300, moreau_identity),
    ("scalar kernels match brute force", 200, scalar_kernels),
    ("prox_g matches epigraph oracle", 200, prox_g_matches_oracle),
    ("prox_g local optimality", 120, prox_g_local_optimality),
    ("prox_g non-expansiveness", 150, prox_g_nonexpansive),
    ("BCD objective monotonicity", 150, bcd_monotone),
    ("prox_g penalty scaling", 120, prox_g_scaling),
    ("Lasso objective monotonicity", 200, lasso_monotone),
    ("Lasso subgradient optimality", 200, lasso_optimality),
    ("ridge and Lasso agree as reg vanishes", 150, ridge_lasso_limit),
    ("ADMM dual update identity", 100, admm_dual_update),
    ("l1 norm monotone in lambda", 100, sparsity_monotone),
    ("metric monotone-transform invariance", 300, metric_transform_invariance),
    ("ranking loss bounds", 300, loss_bounds),
    ("feature metric bounds", 300, feature_metric_bounds),
    ("CSV round trip", 120, csv_round_trip),
    ("seed determinism", 100, seed_determinism),
    ("normalization invariance of the ranking", 100, normalization_invariance),
];

fn check<S>(cases: u32, strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Outcome
where
    S: Strategy,
    S::Value: Debug,
{
    let config = ProptestConfig {
        cases,
        failure_persistence: None,
        ..ProptestConfig::default()
    };
    let mut runner = TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    runner.run(&strategy, test).map_err(|e| e.to_string())
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// `(m, n, v)` with `v` of length `m·n`.
fn grouped(max_m: usize, max_n: usize, bound: f64) -> impl Strategy<Value = (usize, usize, Vec<f64>)> {
    (1..=max_m, 1..=max_n).prop_flat_map(move |(m, n)| (Just(m), Just(n), prop::collection::vec(-bound..bound, m * n)))
}

fn grouped_pair(max_m: usize, max_n: usize, bound: f64) -> impl Strategy<Value = (usize, usize, Vec<f64>, Vec<f64>)> {
    (1..=max_m, 1..=max_n).prop_flat_map(move |(m, n)| {
        (
            Just(m),
            Just(n),
            prop::collection::vec(-bound..bound, m * n),
            prop::collection::vec(-bound..bound, m * n),
        )
    })
}

fn layout(m: usize, n: usize) -> GroupLayout {
    GroupLayout::new(m, n).unwrap()
}

fn tight() -> SolverConfig {
    SolverConfig {
        bcd_tol: 1e-11,
        dr_tol: 1e-11,
        bcd_max_iter: 1000,
        dr_max_iter: 200_000,
        ..SolverConfig::default()
    }
}

/// `(positives, negatives)` rows over `d` features.
fn classes(max_m: usize, max_n: usize, max_d: usize) -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    (1..=max_m, 1..=max_n, 1..=max_d).prop_flat_map(|(m, n, d)| {
        (
            prop::collection::vec(prop::collection::vec(-1.0..1.5, d), m),
            prop::collection::vec(prop::collection::vec(-1.5..1.0, d), n),
        )
    })
}

pub fn pairwise_rows(cases: u32) -> Outcome {
    check(cases, classes(5, 5, 4), |(pos, neg)| {
        let data = Dataset::from_rows(&pos, &neg).unwrap();
        let sys = build_pairwise_system(&data).unwrap();
        let mut seen = vec![0; sys.rows()];
        for (j, nj) in neg.iter().enumerate() {
            for k in sys.group(j) {
                seen[k] += 1;
            }
            for (i, pi) in pos.iter().enumerate() {
                for (c, (p, q)) in pi.iter().zip(nj).enumerate() {
                    prop_assert_eq!(sys.matrix()[(sys.index(i, j), c)], p - q);
                }
            }
        }
        prop_assert!(seen.iter().all(|&c| c == 1));
        Ok(())
    })
}

pub fn projection_idempotent(cases: u32) -> Outcome {
    check(cases, (grouped(4, 4, 5.0), 0.0..6.0), |((m, n, v), tau)| {
        let l = layout(m, n);
        let p = project_l1_linf_ball(&v, l, tau).unwrap();
        let pp = project_l1_linf_ball(&p, l, tau).unwrap();
        prop_assert!(max_abs_diff(&p, &pp) <= 1e-12, "{:?} vs {:?}", p, pp);
        prop_assert!(l1_linf_norm(&p, l) <= tau * (1.0 + 1e-12) + 1e-12);
        Ok(())
    })
}

pub fn projection_nonexpansive(cases: u32) -> Outcome {
    check(cases, (grouped_pair(4, 4, 5.0), 0.0..6.0), |((m, n, u, v), tau)| {
        let l = layout(m, n);
        let pu = project_l1_linf_ball(&u, l, tau).unwrap();
        let pv = project_l1_linf_ball(&v, l, tau).unwrap();
        prop_assert!(dist(&pu, &pv) <= dist(&u, &v) + 1e-12);
        Ok(())
    })
}

pub fn projection_dominates_feasible(cases: u32) -> Outcome {
    let strategy = (
        grouped(4, 4, 5.0),
        0.1..6.0,
        prop::collection::vec(-1.0..1.0_f64, 16 * 100),
    );
    check(cases, strategy, |((m, n, v), tau, raw)| {
        let l = layout(m, n);
        let p = project_l1_linf_ball(&v, l, tau).unwrap();
        let best = dist(&p, &v);
        for chunk in raw.chunks(16).take(100) {
            let mut u = chunk[..m * n].to_vec();
            let norm = l1_linf_norm(&u, l);
            if norm > tau {
                u.iter_mut().for_each(|x| *x *= tau / norm);
            }
            prop_assert!(best <= dist(&u, &v) + 1e-12);
        }
        Ok(())
    })
}

pub fn projection_matches_oracle(cases: u32) -> Outcome {
    check(cases, (grouped(4, 4, 5.0), 0.0..6.0), |((m, n, v), tau)| {
        let p = project_l1_linf_ball(&v, layout(m, n), tau).unwrap();
        let oracle = project_l1_linf(&split_groups(&v, m), tau).concat();
        prop_assert!(max_abs_diff(&p, &oracle) <= 1e-9, "{:?} vs {:?}", p, oracle);
        Ok(())
    })
}

pub fn moreau_identity(cases: u32) -> Outcome {
    check(cases, (grouped(4, 4, 5.0), 0.01..6.0), |((m, n, v), tau)| {
        let l = layout(m, n);
        let z = prox_linf_l1(&v, l, tau).unwrap();
        let p = project_l1_linf_ball(&v, l, tau).unwrap();
        for i in 0..v.len() {
            prop_assert!((z[i] + p[i] - v[i]).abs() <= 1e-12);
        }
        // v − z must be τ times a subgradient of the ℓ∞,1 norm at z.
        let g: Vec<f64> = v.iter().zip(&z).map(|(a, b)| (a - b) / tau).collect();
        prop_assert!(l1_linf_norm(&g, l) <= 1.0 + 1e-8);
        let pairing: f64 = g.iter().zip(&z).map(|(a, b)| a * b).sum();
        prop_assert!((pairing - linf_l1_norm(&z, l)).abs() <= 1e-8);
        Ok(())
    })
}

/// Golden-section minimization of a convex scalar function.
fn golden_min(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let r = (5.0_f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let a = hi - r * (hi - lo);
        let b = lo + r * (hi - lo);
        if f(a) < f(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    0.5 * (lo + hi)
}

pub fn scalar_kernels(cases: u32) -> Outcome {
    check(
        cases,
        (-5.0..5.0_f64, -5.0..5.0_f64, 0.0..3.0_f64, 0.05..4.0_f64),
        |(v, b, tau, rho)| {
            let st = soft_threshold(&[v], tau).unwrap()[0];
            let oracle = golden_min(-10.0, 10.0, |z| 0.5 * (z - v).powi(2) + tau * z.abs());
            prop_assert!((st - oracle).abs() <= 1e-6, "{} vs {}", st, oracle);
            let f2 = prox_f2(&[v], &[b], rho).unwrap()[0];
            let oracle = golden_min(0.0, 10.0, |z| 0.5 * (z - v).powi(2) + rho * 0.5 * (z - b).powi(2));
            prop_assert!((f2 - oracle).abs() <= 1e-6, "{} vs {}", f2, oracle);
            Ok(())
        },
    )
}

fn mu_choice() -> impl Strategy<Value = f64> {
    prop::sample::select(vec![0.25, 0.5, 1.0, 2.0, 4.0])
}

pub fn prox_g_matches_oracle(cases: u32) -> Outcome {
    let strategy = (grouped(3, 3, 3.0), mu_choice()).prop_filter("m·n ≤ 10", |((m, n, _), _)| m * n <= 10);
    check(cases, strategy, |((m, n, s), mu)| {
        let a = prox_g(&s, layout(m, n), mu, &SolverConfig::default()).unwrap().a;
        let oracle = prox_g_epigraph(&s, m, mu);
        prop_assert!(max_abs_diff(&a, &oracle) <= 1e-6, "{:?} vs {:?}", a, oracle);
        Ok(())
    })
}

pub fn prox_g_local_optimality(cases: u32) -> Outcome {
    let strategy = (
        grouped(3, 3, 3.0),
        mu_choice(),
        prop::collection::vec(-1.0..1.0_f64, 9 * 200),
    );
    check(cases, strategy, |((m, n, s), mu, raw)| {
        let a = prox_g(&s, layout(m, n), mu, &tight()).unwrap().a;
        let base = mu * prox_objective(&a, &s, m, mu);
        for chunk in raw.chunks(9).take(200) {
            let delta = &chunk[..m * n];
            let norm = delta.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
            let shifted: Vec<f64> = a.iter().zip(delta).map(|(x, d)| x + d * 1e-3 / norm).collect();
            prop_assert!(mu * prox_objective(&shifted, &s, m, mu) >= base - 1e-9);
        }
        Ok(())
    })
}

pub fn prox_g_nonexpansive(cases: u32) -> Outcome {
    check(cases, (grouped_pair(3, 3, 3.0), mu_choice()), |((m, n, s1, s2), mu)| {
        let l = layout(m, n);
        let a1 = prox_g(&s1, l, mu, &tight()).unwrap().a;
        let a2 = prox_g(&s2, l, mu, &tight()).unwrap().a;
        prop_assert!(dist(&a1, &a2) <= dist(&s1, &s2) + 1e-8);
        Ok(())
    })
}

pub fn bcd_monotone(cases: u32) -> Outcome {
    check(
        cases,
        (grouped(3, 3, 3.0), mu_choice(), any::<bool>()),
        |((m, n, s), mu, strict)| {
            let cfg = SolverConfig {
                strict_alg1: strict,
                ..tight()
            };
            let trace = prox_g(&s, layout(m, n), mu, &cfg).unwrap().bcd_objective_trace;
            for w in trace.windows(2) {
                prop_assert!(w[1] <= w[0] + 1e-10 * (1.0 + w[0].abs()), "{:?}", trace);
            }
            Ok(())
        },
    )
}

pub fn prox_g_scaling(cases: u32) -> Outcome {
    check(cases, grouped(3, 3, 3.0), |(m, n, s)| {
        let l = layout(m, n);
        let loose = prox_g(&s, l, 1e8, &SolverConfig::default()).unwrap().a;
        prop_assert!(max_abs_diff(&loose, &s) <= 1e-6);
        let mut previous = f64::INFINITY;
        for mu in [8.0, 2.0, 0.5, 0.125] {
            let a = prox_g(&s, l, mu, &tight()).unwrap().a;
            let g = loss_g(&a, m);
            prop_assert!(g <= previous + 1e-9, "g = {} after {}", g, previous);
            previous = g;
        }
        Ok(())
    })
}

/// `(X, s, reg)` with `rows ≥ d + 2` Gaussian-like entries.
fn lasso_instance() -> impl Strategy<Value = (usize, usize, Vec<f64>, Vec<f64>, f64)> {
    (1..=5_usize, 0..=6_usize).prop_flat_map(|(d, extra)| {
        let rows = d + 2 + extra;
        (
            Just(rows),
            Just(d),
            prop::collection::vec(-2.0..2.0, rows * d),
            prop::collection::vec(-2.0..2.0, rows),
            0.001..3.0,
        )
    })
}

pub fn lasso_monotone(cases: u32) -> Outcome {
    check(cases, lasso_instance(), |(rows, d, x, s, reg)| {
        let x = DMatrix::from_row_slice(rows, d, &x);
        let out = solve_lasso(&x, &DVector::from_vec(s), reg, None, 1e-12, 5000).unwrap();
        for w in out.objective_trace.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12 * (1.0 + w[0].abs()), "{:?}", out.objective_trace);
        }
        Ok(())
    })
}

pub fn lasso_optimality(cases: u32) -> Outcome {
    check(cases, lasso_instance(), |(rows, d, x, s, reg)| {
        let x = DMatrix::from_row_slice(rows, d, &x);
        let s = DVector::from_vec(s);
        let out = solve_lasso(&x, &s, reg, None, 1e-11, 100_000).unwrap();
        prop_assert!(out.converged);
        let grad = x.tr_mul(&(&x * &out.w - &s));
        let tol = 1e-8;
        for i in 0..d {
            let (w, g) = (out.w[i], grad[i]);
            if w == 0.0 {
                prop_assert!(g.abs() <= reg + tol, "coordinate {}: |{}| > {}", i, g, reg);
            } else {
                prop_assert!(
                    (g + reg * w.signum()).abs() <= tol,
                    "coordinate {}: {} vs {}",
                    i,
                    g,
                    reg
                );
            }
        }
        Ok(())
    })
}

pub fn ridge_lasso_limit(cases: u32) -> Outcome {
    check(cases, lasso_instance(), |(rows, d, x, s, _)| {
        let x = DMatrix::from_row_slice(rows, d, &x);
        let svd = x.clone().svd(false, false);
        prop_assume!(svd.singular_values.min() > 0.1);
        let s = DVector::from_vec(s);
        let ridge = solve_ridge(&x, &s, 1e-10, 1e-12).unwrap();
        let lasso = solve_lasso(&x, &s, 1e-10, None, 1e-12, 200_000).unwrap();
        prop_assert!((&ridge - &lasso.w).amax() <= 1e-4, "{} vs {}", ridge, lasso.w);
        Ok(())
    })
}

pub fn admm_dual_update(cases: u32) -> Outcome {
    check(
        cases,
        (classes(4, 4, 3), 0.01..2.0, any::<bool>()),
        |((pos, neg), lambda, l1)| {
            let data = Dataset::from_rows(&pos, &neg).unwrap();
            let sys = build_pairwise_system(&data).unwrap();
            let reg = if l1 { Regularizer::L1 } else { Regularizer::L2 };
            let mut admm = Admm::new(&sys, lambda, reg, &SolverConfig::pair_scaled()).unwrap();
            for _ in 0..10 {
                let before = admm.state().gamma.clone();
                admm.step().unwrap();
                let st = admm.state();
                let ones = DVector::from_element(sys.rows(), 1.0);
                let r = sys.matrix() * &st.w + &st.a - ones;
                prop_assert!((&st.gamma - &before - r).amax() <= 1e-12);
            }
            Ok(())
        },
    )
}

/// The ℓ1 norm of the solution is non-increasing in λ and vanishes for large λ.
///
/// The nonzero count itself is not monotone in general: two positives
/// `[0.937, 0.498, 0]`, `[0.647, −0.865, 0]` against negatives
/// `[0, −1.361, −0.348]`, `[−0.700, −1.160, −0.704]` give one nonzero at
/// λ = 0.1 and two at λ = 1, confirmed by the subgradient oracle.
pub fn sparsity_monotone(cases: u32) -> Outcome {
    check(cases, classes(6, 6, 5), |(pos, neg)| {
        let data = Dataset::from_rows(&pos, &neg).unwrap();
        let cfg = SolverConfig {
            outer_max_iter: 20_000,
            outer_tol: 1e-7,
            ..SolverConfig::pair_scaled()
        };
        let mut previous = f64::INFINITY;
        for lambda in [0.001, 0.01, 0.1, 1.0, 10.0] {
            let (model, _) = fit(&data, lambda, Regularizer::L1, &cfg).unwrap();
            let norm: f64 = model.weights.iter().map(|w| w.abs()).sum();
            prop_assert!(
                norm <= previous * (1.0 + 1e-4) + 1e-6,
                "lambda {}: |w| = {} after {}",
                lambda,
                norm,
                previous
            );
            previous = norm;
        }
        let (model, _) = fit(&data, 1e3, Regularizer::L1, &cfg).unwrap();
        prop_assert_eq!(model.nonzero_count(), 0);
        Ok(())
    })
}

/// Scores on a coarse grid so ties occur.
fn score_pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    let score = (-8..8_i32).prop_map(|k| k as f64 / 4.0);
    (
        prop::collection::vec(score.clone(), 1..8),
        prop::collection::vec(score, 1..8),
    )
}

pub fn metric_transform_invariance(cases: u32) -> Outcome {
    check(
        cases,
        (score_pair(), 0.1..3.0_f64, -5.0..5.0_f64),
        |((pos, neg), a, b)| {
            let f = |x: &f64| (a * x).exp() + x.powi(3) + b;
            let base = RankScores::new(pos.clone(), neg.clone()).unwrap();
            let mapped = RankScores::new(pos.iter().map(f).collect(), neg.iter().map(f).collect()).unwrap();
            prop_assert_eq!(infinite_push_loss(&base), infinite_push_loss(&mapped));
            prop_assert_eq!(pos_at_top_rate(&base), pos_at_top_rate(&mapped));
            Ok(())
        },
    )
}

pub fn loss_bounds(cases: u32) -> Outcome {
    check(cases, score_pair(), |(pos, neg)| {
        let m = pos.len();
        let ties = pos.iter().any(|p| neg.contains(p));
        let scores = RankScores::new(pos, neg).unwrap();
        let loss = infinite_push_loss(&scores);
        let rate = pos_at_top_rate(&scores);
        prop_assert!(loss <= m);
        prop_assert!((0.0..=1.0).contains(&rate));
        if !ties {
            prop_assert_eq!(loss == 0, rate == 1.0);
        }
        Ok(())
    })
}

pub fn feature_metric_bounds(cases: u32) -> Outcome {
    let set = prop::collection::btree_set(0..12_usize, 0..8);
    check(
        cases,
        (set.clone(), set),
        |(selected, relevant): (BTreeSet<usize>, BTreeSet<usize>)| {
            let fm = feature_metrics(&selected, &relevant);
            for v in [fm.precision, fm.recall, fm.f_measure] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
            let overlap = selected.intersection(&relevant).count();
            prop_assert_eq!(fm.f_measure == 0.0, overlap == 0);
            Ok(())
        },
    )
}

pub fn csv_round_trip(cases: u32) -> Outcome {
    let value = prop_oneof![-1e6..1e6_f64, -1e-6..1e-6_f64, (-100..100_i32).prop_map(f64::from)];
    let strategy = (1..5_usize, 1..5_usize, 1..4_usize).prop_flat_map(move |(m, n, d)| {
        (
            prop::collection::vec(prop::collection::vec(value.clone(), d), m),
            prop::collection::vec(prop::collection::vec(value.clone(), d), n),
        )
    });
    check(cases, strategy, |(pos, neg)| {
        let data = Dataset::from_rows(&pos, &neg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.csv");
        save_csv(&data, &path).unwrap();
        let back = load_csv(&path).unwrap();
        prop_assert_eq!((back.m(), back.n(), back.dim()), (data.m(), data.n(), data.dim()));
        let pairs = [
            (data.positives(), back.positives()),
            (data.negatives(), back.negatives()),
        ];
        for (a, b) in pairs {
            for (x, y) in a.iter().zip(b.iter()) {
                prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0), "{} vs {}", x, y);
            }
        }
        Ok(())
    })
}

pub fn seed_determinism(cases: u32) -> Outcome {
    let strategy =
        (1..12_usize, 2..40_usize, any::<u64>()).prop_flat_map(|(d, n, seed)| (Just(d), 1..=d, Just(n), Just(seed)));
    check(cases, strategy, |(d, r, n, seed)| {
        let spec = ToySpec {
            d,
            r,
            n_samples: n,
            seed,
        };
        let (a, rel_a) = generate_toy(&spec).unwrap();
        let (b, rel_b) = generate_toy(&spec).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(&rel_a, &rel_b);
        prop_assert_eq!(rel_a, (0..r).collect::<Vec<_>>());
        prop_assert_eq!((a.m() + a.n(), a.dim()), (n, d));
        prop_assert!(a.m().abs_diff(a.n()) <= 1);
        Ok(())
    })
}

pub fn normalization_invariance(cases: u32) -> Outcome {
    let strategy = (any::<u64>(), prop::collection::vec(0.01..100.0_f64, 3));
    check(cases, strategy, |(seed, scales)| {
        let (train, _) = generate_toy(&ToySpec {
            d: 3,
            r: 2,
            n_samples: 16,
            seed,
        })
        .unwrap();
        let (test, _) = generate_toy(&ToySpec {
            d: 3,
            r: 2,
            n_samples: 30,
            seed: seed ^ 1,
        })
        .unwrap();
        let rescale = |data: &Dataset| {
            let f = |x: &DMatrix<f64>| DMatrix::from_fn(x.nrows(), x.ncols(), |i, j| x[(i, j)] * scales[j]);
            Dataset::new(f(data.positives()), f(data.negatives())).unwrap()
        };
        let cfg = SolverConfig {
            outer_tol: 1e-7,
            outer_max_iter: 5000,
            ..SolverConfig::pair_scaled()
        };
        let (model, _) = train_normalized(&train, 0.05, Regularizer::L2, &cfg).unwrap();
        let (scaled_model, _) = train_normalized(&rescale(&train), 0.05, Regularizer::L2, &cfg).unwrap();
        let base = pos_at_top_rate(&rank_scores(&model, &test).unwrap());
        let scaled = pos_at_top_rate(&rank_scores(&scaled_model, &rescale(&test)).unwrap());
        prop_assert_eq!(base, scaled);
        // The normalized training copies coincide up to rounding.
        let a = apply_normalizer(&fit_normalizer(&train), &train).unwrap();
        let b = apply_normalizer(&fit_normalizer(&rescale(&train)), &rescale(&train)).unwrap();
        prop_assert!((a.positives() - b.positives()).amax() <= 1e-9);
        Ok(())
    })
}
