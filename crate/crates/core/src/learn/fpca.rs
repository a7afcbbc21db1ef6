use nalgebra::{DMatrix, SymmetricEigen};

use super::dataset::{Centering, FunctionalDataset};
use crate::error::{invalid, Result};
use crate::metrics::weighted_dot;

/// Principal component functions of a dataset under the weighted inner
/// product.
#[derive(Clone, Debug, PartialEq)]
pub struct FpcaBasis {
    pub mean: Vec<f64>,
    /// Retained components, orthonormal under the weighted inner product.
    pub components: Vec<Vec<f64>>,
    /// Eigenvalues of the retained components, non-increasing.
    pub eigenvalues: Vec<f64>,
    /// Every non-negligible eigenvalue, for explained-variance reporting.
    pub spectrum: Vec<f64>,
    pub weights: Vec<f64>,
    /// `false` when `max_components` stopped short of the threshold.
    pub threshold_reached: bool,
}

pub const DEFAULT_VARIANCE_THRESHOLD: f64 = 0.95;
pub const DEFAULT_MAX_COMPONENTS: usize = 30;

impl FpcaBasis {
    pub fn retained(&self) -> usize {
        self.components.len()
    }

    pub fn explained_variance(&self) -> f64 {
        let total: f64 = self.spectrum.iter().sum();
        if total == 0.0 {
            return 1.0;
        }
        self.eigenvalues.iter().sum::<f64>() / total
    }

    pub fn scores(&self, row: &[f64]) -> Vec<f64> {
        let centered: Vec<f64> = row.iter().zip(&self.mean).map(|(v, m)| v - m).collect();
        self.components
            .iter()
            .map(|c| weighted_dot(&centered, c, &self.weights))
            .collect()
    }

    /// Mean plus the first `k` components weighted by `scores`.
    pub fn reconstruct(&self, scores: &[f64], k: usize) -> Vec<f64> {
        let mut out = self.mean.clone();
        for (s, c) in scores.iter().zip(&self.components).take(k) {
            out.iter_mut().zip(c).for_each(|(o, v)| *o += s * v);
        }
        out
    }

    pub fn project(&self, ds: &FunctionalDataset) -> Result<FunctionalDataset> {
        let rows = ds.rows().map(|r| self.scores(r)).collect();
        if self.components.is_empty() {
            // Degenerate case: all rows identical.
            return ds.with_rows(vec![vec![0.0]; ds.len()]);
        }
        ds.with_rows(rows)
    }
}

/// Fits principal components on `ds` via its `N × N` Gram matrix and
/// returns the basis with the scores of `ds`.
pub fn fpca(ds: &FunctionalDataset, threshold: f64, max_components: usize) -> Result<(FpcaBasis, FunctionalDataset)> {
    let n = ds.len();
    if n < 2 {
        return invalid("principal components need at least two rows");
    }
    if !(threshold > 0.0 && threshold <= 1.0) {
        return invalid(format!("variance threshold {threshold} outside (0, 1]"));
    }
    if max_components == 0 {
        return invalid("max_components must be at least 1");
    }
    let centering = Centering::fit(ds);
    let centered: Vec<Vec<f64>> = ds.rows().map(|r| centering.apply_row(r)).collect();
    let w = ds.weights();
    let denom = (n - 1) as f64;
    let gram = DMatrix::from_fn(n, n, |i, j| weighted_dot(&centered[i], &centered[j], w) / denom);
    let eig = SymmetricEigen::new(gram);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let top = eig.eigenvalues[order[0]].max(0.0);
    let floor = top * 1e-12 * n as f64;
    let spectrum: Vec<f64> = order
        .iter()
        .map(|&k| eig.eigenvalues[k])
        .filter(|&l| l > floor && l > 0.0)
        .collect();
    let total: f64 = spectrum.iter().sum();

    let mut keep = 0;
    let mut acc = 0.0;
    let mut threshold_reached = spectrum.is_empty();
    while keep < spectrum.len() && keep < max_components {
        acc += spectrum[keep];
        keep += 1;
        if acc >= threshold * total * (1.0 - 1e-12) {
            threshold_reached = true;
            break;
        }
    }

    let components: Vec<Vec<f64>> = order[..keep]
        .iter()
        .zip(&spectrum)
        .map(|(&k, &lambda)| {
            let v = eig.eigenvectors.column(k);
            let scale = 1.0 / (denom * lambda).sqrt();
            let mut phi = vec![0.0; ds.dim()];
            for (i, row) in centered.iter().enumerate() {
                let c = v[i] * scale;
                phi.iter_mut().zip(row).for_each(|(p, x)| *p += c * x);
            }
            phi
        })
        .collect();

    let basis = FpcaBasis {
        mean: centering.mean,
        components,
        eigenvalues: spectrum[..keep].to_vec(),
        spectrum,
        weights: w.to_vec(),
        threshold_reached,
    };
    let projected = basis.project(ds)?;
    Ok((basis, projected))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_ds(seed: u64, n: usize, d: usize) -> FunctionalDataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows = (0..n).map(|_| (0..d).map(|_| rng.random::<f64>()).collect()).collect();
        let weights = (0..d).map(|_| 0.1 + rng.random::<f64>()).collect();
        let labels = (0..n).map(|i| if i % 2 == 0 { 1 } else { -1 }).collect();
        FunctionalDataset::new(rows, labels, weights, None).unwrap()
    }

    #[test]
    fn two_functions_need_one_component() {
        let ds = FunctionalDataset::euclidean(vec![vec![0.0, 1.0, 2.0], vec![1.0, 1.0, 0.0]], vec![1, -1]).unwrap();
        let (b, p) = fpca(&ds, 1.0, 30).unwrap();
        assert_eq!(b.retained(), 1);
        assert!((b.explained_variance() - 1.0).abs() < 1e-12);
        assert_eq!(p.dim(), 1);
    }

    #[test]
    fn orthonormal_and_complete() {
        let ds = random_ds(1, 12, 20);
        let (b, p) = fpca(&ds, 1.0, 30).unwrap();
        assert_eq!(b.retained(), 11);
        for i in 0..b.retained() {
            for j in 0..b.retained() {
                let ip = weighted_dot(&b.components[i], &b.components[j], &b.weights);
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((ip - want).abs() < 1e-8, "({i},{j}) {ip}");
            }
        }
        assert!(b.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
        for i in 0..ds.len() {
            let r = b.reconstruct(p.row(i), b.retained());
            for (a, e) in r.iter().zip(ds.row(i)) {
                assert!((a - e).abs() < 1e-8);
            }
        }
        // Score covariance is diagonal with the eigenvalues.
        let n = ds.len() as f64;
        for a in 0..b.retained() {
            for c in 0..b.retained() {
                let cov: f64 = p.rows().map(|r| r[a] * r[c]).sum::<f64>() / (n - 1.0);
                let want = if a == c { b.eigenvalues[a] } else { 0.0 };
                assert!((cov - want).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn reconstruction_error_decreases() {
        let ds = random_ds(2, 10, 15);
        let (b, p) = fpca(&ds, 1.0, 30).unwrap();
        let err = |k: usize| -> f64 {
            (0..ds.len())
                .map(|i| {
                    let r = b.reconstruct(p.row(i), k);
                    let d: Vec<f64> = r.iter().zip(ds.row(i)).map(|(a, e)| a - e).collect();
                    weighted_dot(&d, &d, ds.weights())
                })
                .sum()
        };
        let errs: Vec<f64> = (0..=b.retained()).map(err).collect();
        assert!(errs.windows(2).all(|w| w[1] <= w[0] + 1e-10));
    }

    #[test]
    fn cap_flags_unreached_threshold() {
        let ds = random_ds(3, 10, 15);
        let (b, _) = fpca(&ds, 0.999, 2).unwrap();
        assert_eq!(b.retained(), 2);
        assert!(!b.threshold_reached);
        assert!(fpca(&ds, 0.0, 2).is_err());
    }
}
