use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rank::{GridSpec, RankGrid};

/// Discretized functions (one per row) with `±1` labels and quadrature
/// weights shared by all rows.
#[derive(Clone, Debug, PartialEq)]
pub struct FunctionalDataset {
    dim: usize,
    samples: Vec<f64>,
    labels: Vec<i8>,
    weights: Vec<f64>,
    grid: Option<GridSpec>,
}

impl FunctionalDataset {
    pub fn new(rows: Vec<Vec<f64>>, labels: Vec<i8>, weights: Vec<f64>, grid: Option<GridSpec>) -> Result<Self> {
        let dim = weights.len();
        let mut samples = Vec::with_capacity(rows.len() * dim);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != dim {
                return invalid(format!("row {i} has length {}, expected {dim}", r.len()));
            }
            samples.extend_from_slice(r);
        }
        Self::from_flat(dim, samples, labels, weights, grid)
    }

    pub fn from_flat(
        dim: usize,
        samples: Vec<f64>,
        labels: Vec<i8>,
        weights: Vec<f64>,
        grid: Option<GridSpec>,
    ) -> Result<Self> {
        if dim == 0 || weights.len() != dim {
            return invalid("weights must have one entry per column");
        }
        if samples.len() != labels.len() * dim {
            return invalid("number of rows and labels differ");
        }
        if labels.iter().any(|&l| l != 1 && l != -1) {
            return invalid("labels must be +1 or -1");
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return invalid("weights must be finite and non-negative");
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return invalid("samples must be finite");
        }
        if let Some(g) = grid {
            if g.resolution * g.resolution != dim {
                return invalid("grid geometry does not match the row length");
            }
        }
        Ok(Self {
            dim,
            samples,
            labels,
            weights,
            grid,
        })
    }

    /// Rows are the row-major values of each grid, weights the cell areas.
    pub fn from_rank_grids(grids: &[RankGrid], labels: Vec<i8>) -> Result<Self> {
        let Some(first) = grids.first() else {
            return invalid("no rank grids");
        };
        for g in grids {
            g.same_geometry(first)?;
        }
        let rows = grids.iter().map(|g| g.to_row()).collect();
        Self::new(rows, labels, first.weights().to_vec(), Some(first.spec()))
    }

    /// Rows with unit weights and no grid geometry.
    pub fn euclidean(rows: Vec<Vec<f64>>, labels: Vec<i8>) -> Result<Self> {
        let dim = rows.first().map_or(0, |r| r.len());
        Self::new(rows, labels, vec![1.0; dim], None)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.samples[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.samples.chunks_exact(self.dim)
    }

    pub fn labels(&self) -> &[i8] {
        &self.labels
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn grid(&self) -> Option<GridSpec> {
        self.grid
    }

    pub fn count(&self, label: i8) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }

    pub fn subset(&self, indices: &[usize]) -> Self {
        let mut samples = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            samples.extend_from_slice(self.row(i));
        }
        Self {
            dim: self.dim,
            samples,
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            weights: self.weights.clone(),
            grid: self.grid,
        }
    }

    /// Same labels, new rows (e.g. projections), unit weights.
    pub fn with_rows(&self, rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::euclidean(rows, self.labels.clone())
    }

    pub(crate) fn with_labels(&self, labels: Vec<i8>) -> Result<Self> {
        Self::from_flat(self.dim, self.samples.clone(), labels, self.weights.clone(), self.grid)
    }

    pub(crate) fn check_row(&self, row: &[f64]) -> Result<()> {
        if row.len() != self.dim {
            return Err(Error::GridMismatch(format!(
                "query has length {}, dataset rows have {}",
                row.len(),
                self.dim
            )));
        }
        Ok(())
    }
}

/// Column mean of a training set, subtracted from any later rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Centering {
    pub mean: Vec<f64>,
}

impl Centering {
    pub fn fit(ds: &FunctionalDataset) -> Self {
        let mut mean = vec![0.0; ds.dim()];
        for r in ds.rows() {
            mean.iter_mut().zip(r).for_each(|(m, v)| *m += v);
        }
        let n = ds.len().max(1) as f64;
        mean.iter_mut().for_each(|m| *m /= n);
        Self { mean }
    }

    pub fn apply_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter().zip(&self.mean).map(|(v, m)| v - m).collect()
    }

    pub fn apply(&self, ds: &FunctionalDataset) -> Result<FunctionalDataset> {
        let samples = ds.rows().flat_map(|r| self.apply_row(r)).collect();
        FunctionalDataset::from_flat(ds.dim(), samples, ds.labels().to_vec(), ds.weights().to_vec(), ds.grid())
    }
}
