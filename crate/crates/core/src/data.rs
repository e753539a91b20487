//! Synthetic toy problems, feature normalization and file formats.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::admm::Model;
use crate::error::{check_len, Error, Result};
use crate::problem::Dataset;

/// Parameters of the Gaussian toy problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ToySpec {
    /// Total number of features.
    pub d: usize,
    /// Number of relevant features (the first `r` columns).
    pub r: usize,
    pub n_samples: usize,
    pub seed: u64,
}

impl ToySpec {
    pub fn validate(&self) -> Result<()> {
        if self.r == 0 || self.r > self.d {
            return Err(Error::invalid(format!(
                "relevant feature count must satisfy 1 <= r <= d, got r = {}, d = {}",
                self.r, self.d
            )));
        }
        if self.n_samples < 2 {
            return Err(Error::invalid(format!(
                "need at least 2 samples, got {}",
                self.n_samples
            )));
        }
        Ok(())
    }
}

/// One draw of the toy problem's class-conditional distributions.
///
/// The relevant block of a positive example follows `N(μ, Σ)` and that of a
/// negative one `N(−μ, Σ)`, with `μ ∈ {−1, +1}^r` and `Σ` a Wishart draw
/// (identity scale, `r + 2` degrees of freedom) rescaled to unit average
/// variance. The remaining `d − r` features are i.i.d. standard normal.
#[derive(Debug, Clone)]
pub struct ToyDistribution {
    d: usize,
    mean: DVector<f64>,
    chol: DMatrix<f64>,
}

impl ToyDistribution {
    pub fn new<R: Rng + ?Sized>(d: usize, r: usize, rng: &mut R) -> Result<Self> {
        if r == 0 || r > d {
            return Err(Error::invalid(format!("need 1 <= r <= d, got r = {r}, d = {d}")));
        }
        let mean = DVector::from_fn(r, |_, _| if rng.random::<bool>() { 1.0 } else { -1.0 });
        let dof = r + 2;
        let z = DMatrix::from_fn(r, dof, |_, _| rng.sample::<f64, _>(StandardNormal));
        let mut cov = &z * z.transpose();
        let scale = r as f64 / cov.trace();
        cov *= scale;
        let chol = match Cholesky::new(cov.clone()) {
            Some(c) => c.l(),
            None => {
                for i in 0..r {
                    cov[(i, i)] += 1e-10;
                }
                Cholesky::new(cov)
                    .ok_or_else(|| Error::NonFinite("toy covariance is not positive definite".into()))?
                    .l()
            }
        };
        Ok(ToyDistribution { d, mean, chol })
    }

    pub fn relevant(&self) -> usize {
        self.mean.len()
    }

    fn sample_row<R: Rng + ?Sized>(&self, sign: f64, rng: &mut R) -> Vec<f64> {
        let r = self.relevant();
        let z = DVector::from_fn(r, |_, _| rng.sample::<f64, _>(StandardNormal));
        let rel = &self.mean * sign + &self.chol * z;
        let mut row = Vec::with_capacity(self.d);
        row.extend(rel.iter());
        row.extend((r..self.d).map(|_| rng.sample::<f64, StandardNormal>(StandardNormal)));
        row
    }

    /// Draws `n_samples` examples, `⌈n/2⌉` positive and `⌊n/2⌋` negative.
    pub fn sample<R: Rng + ?Sized>(&self, n_samples: usize, rng: &mut R) -> Result<Dataset> {
        let m = n_samples.div_ceil(2);
        let pos: Vec<Vec<f64>> = (0..m).map(|_| self.sample_row(1.0, rng)).collect();
        let neg: Vec<Vec<f64>> = (m..n_samples).map(|_| self.sample_row(-1.0, rng)).collect();
        Dataset::from_rows(&pos, &neg)
    }
}

/// Generates a toy dataset; the returned indices are the relevant columns.
pub fn generate_toy(spec: &ToySpec) -> Result<(Dataset, Vec<usize>)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let dist = ToyDistribution::new(spec.d, spec.r, &mut rng)?;
    let data = dist.sample(spec.n_samples, &mut rng)?;
    Ok((data, (0..spec.r).collect()))
}

/// Per-feature mean and population standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormStats {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl NormStats {
    pub fn identity(d: usize) -> Self {
        NormStats {
            means: vec![0.0; d],
            stds: vec![1.0; d],
        }
    }

    pub fn dim(&self) -> usize {
        self.means.len()
    }

    /// Maps `x` to `(x − mean)/std` in place.
    pub fn apply_row(&self, x: &mut [f64]) -> Result<()> {
        check_len("normalization", self.dim(), x.len())?;
        for ((v, m), s) in x.iter_mut().zip(&self.means).zip(&self.stds) {
            *v = (*v - m) / s;
        }
        Ok(())
    }
}

/// Column statistics over all examples. Zero-variance columns get std 1.
pub fn fit_normalizer(train: &Dataset) -> NormStats {
    let d = train.dim();
    let total = (train.m() + train.n()) as f64;
    let mut means = vec![0.0; d];
    let mut stds = vec![0.0; d];
    for c in 0..d {
        let col = train.positives().column(c);
        let ncol = train.negatives().column(c);
        let mean = (col.sum() + ncol.sum()) / total;
        let var = col.iter().chain(ncol.iter()).map(|v| (v - mean).powi(2)).sum::<f64>() / total;
        let std = var.sqrt();
        means[c] = mean;
        stds[c] = if std > 0.0 { std } else { 1.0 };
    }
    NormStats { means, stds }
}

pub fn apply_normalizer(stats: &NormStats, data: &Dataset) -> Result<Dataset> {
    check_len("normalization", stats.dim(), data.dim())?;
    let map = |x: &DMatrix<f64>| {
        DMatrix::from_fn(x.nrows(), x.ncols(), |i, j| {
            (x[(i, j)] - stats.means[j]) / stats.stds[j]
        })
    };
    let out = Dataset::new(map(data.positives()), map(data.negatives()))?;
    match data.feature_names() {
        Some(names) => out.with_feature_names(names.to_vec()),
        None => Ok(out),
    }
}

fn parse_label(cell: &str) -> Option<bool> {
    let v: f64 = cell.trim().parse().ok()?;
    if v == 1.0 {
        Some(true)
    } else if v == -1.0 || v == 0.0 {
        Some(false)
    } else {
        None
    }
}

/// Reads a labeled CSV file: label first (`1`/`-1` or `1`/`0`), then features.
/// A first row whose first cell is not numeric is taken as a header.
pub fn load_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);

    let parse_err = |line: u64, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    let mut names: Option<Vec<String>> = None;
    let mut width: Option<usize> = None;
    for (idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(idx as u64 + 1, |p| p.line());
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map_or(idx as u64 + 1, |p| p.line());
        if record.iter().all(str::is_empty) {
            continue;
        }
        let first = record.get(0).unwrap_or("");
        if idx == 0 && first.parse::<f64>().is_err() {
            names = Some(record.iter().skip(1).map(str::to_owned).collect());
            width = Some(record.len());
            continue;
        }
        if record.len() < 2 {
            return Err(parse_err(line, "expected a label and at least one feature".into()));
        }
        match width {
            Some(w) if w != record.len() => {
                return Err(parse_err(line, format!("expected {w} columns, found {}", record.len())));
            }
            None => width = Some(record.len()),
            _ => {}
        }
        let label = parse_label(first)
            .ok_or_else(|| parse_err(line, format!("invalid label '{first}' (expected 1, -1 or 0)")))?;
        let row = record
            .iter()
            .skip(1)
            .enumerate()
            .map(|(c, cell)| match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(parse_err(line, format!("invalid value '{cell}' in feature column {c}"))),
            })
            .collect::<Result<Vec<f64>>>()?;
        if label {
            pos.push(row);
        } else {
            neg.push(row);
        }
    }
    if pos.is_empty() || neg.is_empty() {
        let missing = if pos.is_empty() { "positive" } else { "negative" };
        return Err(parse_err(0, format!("file contains no {missing} examples")));
    }
    let data = Dataset::from_rows(&pos, &neg)?;
    match names {
        Some(n) => data.with_feature_names(n),
        None => Ok(data),
    }
}

fn fmt_value(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes positives (label `1`) then negatives (label `-1`), 17 significant digits.
pub fn save_csv(data: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let io = |e| Error::io(path, e);
    let mut out = BufWriter::new(File::create(path).map_err(io)?);
    if let Some(names) = data.feature_names() {
        writeln!(out, "label,{}", names.join(",")).map_err(io)?;
    }
    for (label, rows) in [("1", data.positives()), ("-1", data.negatives())] {
        for row in rows.row_iter() {
            let cells: Vec<String> = row.iter().map(|&v| fmt_value(v)).collect();
            writeln!(out, "{label},{}", cells.join(",")).map_err(io)?;
        }
    }
    out.flush().map_err(io)
}

pub fn save_model(model: &Model, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut out, model).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })?;
    writeln!(out).and_then(|_| out.flush()).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<Model> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let model: Model = serde_json::from_reader(std::io::BufReader::new(file)).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })?;
    model.validate()?;
    Ok(model)
}
