//! Validation-split tuning, toy-problem trials and scaling benchmarks.

use std::str::FromStr;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::admm::{fit, FitReport, Model};
use crate::config::{Regularizer, SolverConfig};
use crate::data::{apply_normalizer, fit_normalizer, ToyDistribution, ToySpec};
use crate::error::{Error, Result};
use crate::eval::{
    feature_metrics, infinite_push_loss, pos_at_top_rate, selected_features, FeatureMetrics, RankScores,
};
use crate::problem::Dataset;

/// Validation score maximized by [`tune`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    PosAtTop,
    /// Negated infinite-push 0-1 loss.
    NegInfpushLoss,
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pos_at_top" | "pos-at-top" => Ok(Metric::PosAtTop),
            "neg_infpush_loss" | "neg-infpush-loss" => Ok(Metric::NegInfpushLoss),
            other => Err(Error::invalid(format!("unknown metric '{other}'"))),
        }
    }
}

impl Metric {
    pub fn score(self, scores: &RankScores) -> f64 {
        match self {
            Metric::PosAtTop => pos_at_top_rate(scores),
            Metric::NegInfpushLoss => -(infinite_push_loss(scores) as f64),
        }
    }
}

/// Scores a model on a dataset in raw (unnormalized) feature space.
pub fn rank_scores(model: &Model, data: &Dataset) -> Result<RankScores> {
    let (pos, neg) = model.score_dataset(data)?;
    RankScores::new(pos, neg)
}

/// Fits normalization on `data`, trains on the normalized copy and stores
/// the statistics in the returned model.
pub fn train_normalized(
    data: &Dataset,
    lambda: f64,
    reg: Regularizer,
    cfg: &SolverConfig,
) -> Result<(Model, FitReport)> {
    let stats = fit_normalizer(data);
    let normalized = apply_normalizer(&stats, data)?;
    let (mut model, report) = fit(&normalized, lambda, reg, cfg)?;
    model.normalization_stats = Some(stats);
    Ok((model, report))
}

/// Per-class random split; the first dataset receives `fraction` of each class.
pub fn stratified_split(data: &Dataset, fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::invalid(format!(
            "split fraction must lie in (0, 1), got {fraction}"
        )));
    }
    if data.m() < 2 || data.n() < 2 {
        return Err(Error::invalid("stratified split needs at least two examples per class"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut split = |x: &nalgebra::DMatrix<f64>| {
        let count = x.nrows();
        let keep = ((count as f64 * fraction).round() as usize).clamp(1, count - 1);
        let mut idx: Vec<usize> = (0..count).collect();
        idx.shuffle(&mut rng);
        let rows =
            |ids: &[usize]| -> Vec<Vec<f64>> { ids.iter().map(|&i| x.row(i).iter().copied().collect()).collect() };
        (rows(&idx[..keep]), rows(&idx[keep..]))
    };
    let (pos_a, pos_b) = split(data.positives());
    let (neg_a, neg_b) = split(data.negatives());
    Ok((Dataset::from_rows(&pos_a, &neg_a)?, Dataset::from_rows(&pos_b, &neg_b)?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuneGrid {
    pub lambdas: Vec<f64>,
    pub split_fraction: f64,
    pub metric: Metric,
    pub seed: u64,
}

impl TuneGrid {
    pub fn new(lambdas: Vec<f64>, seed: u64) -> Result<Self> {
        let grid = TuneGrid {
            lambdas,
            split_fraction: 0.7,
            metric: Metric::PosAtTop,
            seed,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if self.lambdas.is_empty() {
            return Err(Error::invalid("lambda grid is empty"));
        }
        if let Some(l) = self.lambdas.iter().find(|l| !(**l > 0.0 && l.is_finite())) {
            return Err(Error::invalid(format!("grid lambdas must be positive, got {l}")));
        }
        if !(self.split_fraction > 0.0 && self.split_fraction < 1.0) {
            return Err(Error::invalid("split fraction must lie in (0, 1)"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GridPoint {
    pub lambda: f64,
    pub score: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct TuneResult {
    pub best_lambda: f64,
    pub grid: Vec<GridPoint>,
    /// Winner refit on the full dataset.
    pub model: Model,
    pub report: FitReport,
}

/// Picks the grid index with the highest score; ties go to the larger λ.
pub fn select_best(points: &[GridPoint]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, p) in points.iter().enumerate() {
        best = match best {
            None => Some(i),
            Some(b) => {
                let q = &points[b];
                if p.score > q.score || (p.score == q.score && p.lambda > q.lambda) {
                    Some(i)
                } else {
                    Some(b)
                }
            }
        };
    }
    best
}

/// Grid search on a stratified split, then a refit of the winner on all of `data`.
pub fn tune(data: &Dataset, grid: &TuneGrid, reg: Regularizer, cfg: &SolverConfig) -> Result<TuneResult> {
    grid.validate()?;
    let (train, valid) = stratified_split(data, grid.split_fraction, grid.seed)?;
    let points = grid
        .lambdas
        .par_iter()
        .map(|&lambda| {
            let (model, report) = train_normalized(&train, lambda, reg, cfg)?;
            let score = grid.metric.score(&rank_scores(&model, &valid)?);
            Ok(GridPoint {
                lambda,
                score,
                iterations: report.iterations,
                converged: report.converged,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let best = select_best(&points).expect("grid is nonempty");
    let best_lambda = points[best].lambda;
    let (model, report) = train_normalized(data, best_lambda, reg, cfg)?;
    Ok(TuneResult {
        best_lambda,
        grid: points,
        model,
        report,
    })
}

/// Outcome of one toy-problem trial evaluated on a held-out test sample.
#[derive(Debug, Clone, Serialize)]
pub struct ToyTrialResult {
    pub seed: u64,
    pub regularizer: Regularizer,
    pub lambda: f64,
    pub pos_at_top: f64,
    pub infpush_loss: usize,
    pub nonzeros: usize,
    pub features: FeatureMetrics,
}

/// Parameters of a toy trial: one covariance draw shared by train and test.
#[derive(Debug, Clone)]
pub struct ToyTrial {
    pub d: usize,
    pub r: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub lambdas: Vec<f64>,
}

impl ToyTrial {
    /// Draws train and test data for `seed` and tunes both regularizers on
    /// the same draw.
    pub fn run(&self, seed: u64, regs: &[Regularizer], cfg: &SolverConfig) -> Result<Vec<ToyTrialResult>> {
        ToySpec {
            d: self.d,
            r: self.r,
            n_samples: self.n_train,
            seed,
        }
        .validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dist = ToyDistribution::new(self.d, self.r, &mut rng)?;
        let train = dist.sample(self.n_train, &mut rng)?;
        let test = dist.sample(self.n_test, &mut rng)?;
        let relevant = (0..self.r).collect();
        let grid = TuneGrid::new(self.lambdas.clone(), seed)?;
        regs.iter()
            .map(|&reg| {
                let tuned = tune(&train, &grid, reg, cfg)?;
                let scores = rank_scores(&tuned.model, &test)?;
                Ok(ToyTrialResult {
                    seed,
                    regularizer: reg,
                    lambda: tuned.best_lambda,
                    pos_at_top: pos_at_top_rate(&scores),
                    infpush_loss: infinite_push_loss(&scores),
                    nonzeros: tuned.model.nonzero_count(),
                    features: feature_metrics(&selected_features(&tuned.model.weights), &relevant),
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct BenchSpec {
    /// Training sample counts.
    pub sizes: Vec<usize>,
    pub d: usize,
    pub r: usize,
    pub seed: u64,
    pub trials: usize,
    pub lambda: f64,
    pub reg: Regularizer,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub size: usize,
    pub pairs: usize,
    /// Median wall time of the fits, in seconds.
    pub seconds: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchResult {
    pub rows: Vec<BenchRow>,
    /// Least-squares slope of log(time) against log(m·n).
    pub slope: f64,
}

/// Least-squares slope of `ys` against `xs`.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx > 0.0 {
        sxy / sxx
    } else {
        f64::NAN
    }
}

/// Times training on toy data of increasing size. Fits run sequentially so
/// the timings are not perturbed by each other.
pub fn bench(spec: &BenchSpec, cfg: &SolverConfig) -> Result<BenchResult> {
    if spec.sizes.len() < 2 {
        return Err(Error::invalid("bench needs at least two sizes"));
    }
    if spec.trials == 0 {
        return Err(Error::invalid("bench needs at least one trial"));
    }
    let mut rows = Vec::with_capacity(spec.sizes.len());
    for &size in &spec.sizes {
        let mut times = Vec::with_capacity(spec.trials);
        let mut iterations = 0;
        let mut pairs = 0;
        for t in 0..spec.trials {
            let (data, _) = crate::data::generate_toy(&ToySpec {
                d: spec.d,
                r: spec.r,
                n_samples: size,
                seed: spec.seed.wrapping_add(t as u64),
            })?;
            pairs = data.m() * data.n();
            let normalized = apply_normalizer(&fit_normalizer(&data), &data)?;
            let start = Instant::now();
            let (_, report) = fit(&normalized, spec.lambda, spec.reg, cfg)?;
            times.push(start.elapsed().as_secs_f64());
            iterations = iterations.max(report.iterations);
        }
        times.sort_by(f64::total_cmp);
        rows.push(BenchRow {
            size,
            pairs,
            seconds: times[times.len() / 2],
            iterations,
        });
    }
    let xs: Vec<f64> = rows.iter().map(|r| (r.pairs as f64).ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.seconds.max(1e-9).ln()).collect();
    let slope = fit_slope(&xs, &ys);
    Ok(BenchResult { rows, slope })
}
