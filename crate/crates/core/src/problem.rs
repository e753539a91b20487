//! Labeled datasets and the pairwise difference system built from them.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::prox::GroupLayout;

/// Bipartite training data: `m` positive and `n` negative rows over `d` features.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    positives: DMatrix<f64>,
    negatives: DMatrix<f64>,
    feature_names: Option<Vec<String>>,
}

impl Dataset {
    pub fn new(positives: DMatrix<f64>, negatives: DMatrix<f64>) -> Result<Self> {
        if positives.nrows() == 0 {
            return Err(Error::EmptyClass("positive"));
        }
        if negatives.nrows() == 0 {
            return Err(Error::EmptyClass("negative"));
        }
        if positives.ncols() == 0 {
            return Err(Error::invalid("dataset must have at least one feature"));
        }
        if positives.ncols() != negatives.ncols() {
            return Err(Error::DimensionMismatch {
                context: "negative feature count",
                expected: positives.ncols(),
                found: negatives.ncols(),
            });
        }
        if let Some(v) = positives.iter().chain(negatives.iter()).find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("feature value {v}")));
        }
        Ok(Dataset {
            positives,
            negatives,
            feature_names: None,
        })
    }

    /// Builds a dataset from row slices. All rows must share one length.
    pub fn from_rows(positives: &[Vec<f64>], negatives: &[Vec<f64>]) -> Result<Self> {
        let d = positives.first().or_else(|| negatives.first()).map_or(0, Vec::len);
        let to_matrix = |rows: &[Vec<f64>]| -> Result<DMatrix<f64>> {
            for r in rows {
                crate::error::check_len("row length", d, r.len())?;
            }
            Ok(DMatrix::from_fn(rows.len(), d, |i, j| rows[i][j]))
        };
        Dataset::new(to_matrix(positives)?, to_matrix(negatives)?)
    }

    pub fn with_feature_names(mut self, names: Vec<String>) -> Result<Self> {
        crate::error::check_len("feature names", self.dim(), names.len())?;
        self.feature_names = Some(names);
        Ok(self)
    }

    pub fn positives(&self) -> &DMatrix<f64> {
        &self.positives
    }

    pub fn negatives(&self) -> &DMatrix<f64> {
        &self.negatives
    }

    pub fn feature_names(&self) -> Option<&[String]> {
        self.feature_names.as_deref()
    }

    /// Number of positive examples.
    pub fn m(&self) -> usize {
        self.positives.nrows()
    }

    /// Number of negative examples.
    pub fn n(&self) -> usize {
        self.negatives.nrows()
    }

    /// Number of features.
    pub fn dim(&self) -> usize {
        self.positives.ncols()
    }
}

/// The `(m·n) × d` matrix of positive-minus-negative differences.
///
/// Row `k = j·m + i` holds `x_i⁺ − x_j⁻`, so the rows coupled to negative `j`
/// form the contiguous block `[j·m, (j+1)·m)`.
#[derive(Debug, Clone)]
pub struct PairwiseSystem {
    x: DMatrix<f64>,
    m: usize,
    n: usize,
}

impl PairwiseSystem {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> usize {
        self.m * self.n
    }

    pub fn dim(&self) -> usize {
        self.x.ncols()
    }

    pub fn layout(&self) -> GroupLayout {
        GroupLayout::new(self.m, self.n).expect("pairwise system has nonempty classes")
    }

    /// Flat row index of the pair (positive `i`, negative `j`).
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.m + i
    }

    /// Row range of group `j`.
    pub fn group(&self, j: usize) -> std::ops::Range<usize> {
        j * self.m..(j + 1) * self.m
    }
}

pub fn build_pairwise_system(data: &Dataset) -> Result<PairwiseSystem> {
    let (m, n, d) = (data.m(), data.n(), data.dim());
    if m == 0 {
        return Err(Error::EmptyClass("positive"));
    }
    if n == 0 {
        return Err(Error::EmptyClass("negative"));
    }
    let pos = data.positives();
    let neg = data.negatives();
    let mut x = DMatrix::zeros(m * n, d);
    for c in 0..d {
        let mut col = x.column_mut(c);
        for j in 0..n {
            let nj = neg[(j, c)];
            for i in 0..m {
                col[j * m + i] = pos[(i, c)] - nj;
            }
        }
    }
    Ok(PairwiseSystem { x, m, n })
}
