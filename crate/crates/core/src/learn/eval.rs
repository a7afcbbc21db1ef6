use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dataset::{Centering, FunctionalDataset};
use super::fpca::fpca;
use super::haar::haar_project;
use super::neighbors::{knn_classify, mbd_classify, Scored};
use super::svm::{svm_train, KernelSpec, SvmParams};
use crate::error::{invalid, Result};

/// Mann–Whitney AUC with midranks for ties.
pub fn auc_roc(scores: &[f64], labels: &[i8]) -> Result<f64> {
    if scores.len() != labels.len() {
        return invalid("scores and labels differ in length");
    }
    if scores.iter().any(|s| s.is_nan()) {
        return invalid("scores contain NaN");
    }
    let n_pos = labels.iter().filter(|&&l| l == 1).count() as u64;
    let n_neg = labels.len() as u64 - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return invalid("AUC needs both classes");
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // Twice the rank sum of the positives, kept integral.
    let mut twice_rank_sum: u64 = 0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // Ranks i+1..=j+1 share the midrank (i + j + 2) / 2.
        let twice_mid = (i + j + 2) as u64;
        let pos = order[i..=j].iter().filter(|&&k| labels[k] == 1).count() as u64;
        twice_rank_sum += pos * twice_mid;
        i = j + 1;
    }
    let twice_u = twice_rank_sum - n_pos * (n_pos + 1);
    Ok(twice_u as f64 / (2 * n_pos * n_neg) as f64)
}

/// Labels and ranking scores for a test set.
#[derive(Clone, Debug, PartialEq)]
pub struct Predictions {
    pub labels: Vec<i8>,
    pub scores: Vec<f64>,
}

impl From<Vec<Scored>> for Predictions {
    fn from(v: Vec<Scored>) -> Self {
        Self {
            labels: v.iter().map(|s| s.label).collect(),
            scores: v.iter().map(|s| s.score).collect(),
        }
    }
}

/// Something that can be fitted on one dataset and scored on another.
pub trait Pipeline: Sync {
    fn name(&self) -> String;
    fn run(&self, train: &FunctionalDataset, test: &FunctionalDataset) -> Result<Predictions>;
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Projection {
    None,
    Pca { threshold: f64, max_components: usize },
    Haar { levels: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvmPipeline {
    pub kernel: KernelSpec,
    pub params: SvmParams,
    pub projection: Projection,
}

fn rows(ds: &FunctionalDataset) -> Vec<Vec<f64>> {
    ds.rows().map(|r| r.to_vec()).collect()
}

impl Pipeline for SvmPipeline {
    fn name(&self) -> String {
        let k = match self.kernel {
            KernelSpec::Linear => "linear".to_string(),
            KernelSpec::Polynomial { degree } => format!("poly{degree}"),
            KernelSpec::Grbf { .. } => "grbf".to_string(),
        };
        let p = match self.projection {
            Projection::None => "raw".to_string(),
            Projection::Pca { .. } => "pca".to_string(),
            Projection::Haar { levels } => format!("haar{levels}"),
        };
        format!("svm-{k}-{p}-C{}", self.params.c)
    }

    fn run(&self, train: &FunctionalDataset, test: &FunctionalDataset) -> Result<Predictions> {
        let centering = Centering::fit(train);
        let (train, test) = (centering.apply(train)?, centering.apply(test)?);
        let (train, test) = match self.projection {
            Projection::None => (train, test),
            Projection::Pca {
                threshold,
                max_components,
            } => {
                let (basis, projected) = fpca(&train, threshold, max_components)?;
                (projected, basis.project(&test)?)
            }
            Projection::Haar { levels } => (haar_project(&train, levels)?, haar_project(&test, levels)?),
        };
        let model = svm_train(&train, self.kernel, &self.params)?;
        let scores = test.rows().map(|r| model.decision(r)).collect::<Result<Vec<f64>>>()?;
        Ok(Predictions {
            labels: scores.iter().map(|&s| if s >= 0.0 { 1 } else { -1 }).collect(),
            scores,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KnnPipeline {
    pub k: usize,
}

impl Pipeline for KnnPipeline {
    fn name(&self) -> String {
        format!("knn-{}", self.k)
    }

    fn run(&self, train: &FunctionalDataset, test: &FunctionalDataset) -> Result<Predictions> {
        Ok(knn_classify(train, &rows(test), self.k)?.into())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MbdPipeline {
    pub j: usize,
}

impl Pipeline for MbdPipeline {
    fn name(&self) -> String {
        format!("mbd-{}", self.j)
    }

    fn run(&self, train: &FunctionalDataset, test: &FunctionalDataset) -> Result<Predictions> {
        Ok(mbd_classify(train, &rows(test), self.j)?.into())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub iteration: usize,
    pub fold: usize,
    pub accuracy: f64,
    pub auc_roc: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub pipeline: String,
    /// Percent.
    pub accuracy: f64,
    pub auc_roc: f64,
    pub folds: usize,
    pub iterations: usize,
    pub seed: u64,
    pub per_fold: Vec<FoldResult>,
    pub runtime_seconds: f64,
}

impl EvalReport {
    pub const CSV_HEADER: &'static str = "Method,Accuracy,AUC-ROC,Runtime (s)";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{:.1},{:.3},{:.2}",
            self.pipeline, self.accuracy, self.auc_roc, self.runtime_seconds
        )
    }
}

/// Fold assignment of every row for one shuffle: within each class, rows
/// are dealt round-robin into folds after a seeded shuffle.
pub fn stratified_folds(labels: &[i8], folds: usize, seed: u64) -> Result<Vec<usize>> {
    if folds < 2 {
        return invalid("need at least two folds");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assign = vec![0; labels.len()];
    for class in [1i8, -1] {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if idx.len() < folds {
            return invalid(format!(
                "class {class:+} has {} samples, fewer than {folds} folds",
                idx.len()
            ));
        }
        idx.shuffle(&mut rng);
        for (pos, &i) in idx.iter().enumerate() {
            assign[i] = pos % folds;
        }
    }
    Ok(assign)
}

fn iteration_seed(seed: u64, iteration: usize) -> u64 {
    seed ^ (iteration as u64 + 1).wrapping_mul(0xA24B_AED4_963E_E407)
}

/// Repeated stratified k-fold cross-validation; every projection and
/// centering is fitted on the training folds only.
pub fn cross_validate(
    ds: &FunctionalDataset,
    pipeline: &dyn Pipeline,
    folds: usize,
    iterations: usize,
    seed: u64,
) -> Result<EvalReport> {
    if iterations == 0 {
        return invalid("need at least one iteration");
    }
    let start = Instant::now();
    let assignments = (0..iterations)
        .map(|it| stratified_folds(ds.labels(), folds, iteration_seed(seed, it)))
        .collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(usize, usize)> = (0..iterations).flat_map(|it| (0..folds).map(move |f| (it, f))).collect();
    let per_fold = jobs
        .par_iter()
        .map(|&(it, f)| {
            let a = &assignments[it];
            let test_idx: Vec<usize> = (0..ds.len()).filter(|&i| a[i] == f).collect();
            let train_idx: Vec<usize> = (0..ds.len()).filter(|&i| a[i] != f).collect();
            let (train, test) = (ds.subset(&train_idx), ds.subset(&test_idx));
            let pred = pipeline.run(&train, &test)?;
            let correct = pred.labels.iter().zip(test.labels()).filter(|(a, b)| a == b).count();
            Ok(FoldResult {
                iteration: it,
                fold: f,
                accuracy: 100.0 * correct as f64 / test.len() as f64,
                auc_roc: auc_roc(&pred.scores, test.labels())?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let n = per_fold.len() as f64;
    Ok(EvalReport {
        pipeline: pipeline.name(),
        accuracy: per_fold.iter().map(|r| r.accuracy).sum::<f64>() / n,
        auc_roc: per_fold.iter().map(|r| r.auc_roc).sum::<f64>() / n,
        folds,
        iterations,
        seed,
        per_fold,
        runtime_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Labels shuffled by a seeded permutation, for null-distribution checks.
pub fn permuted_labels(ds: &FunctionalDataset, seed: u64) -> Result<FunctionalDataset> {
    let mut labels = ds.labels().to_vec();
    labels.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    ds.with_labels(labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair_auc(scores: &[f64], labels: &[i8]) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..scores.len() {
            for j in 0..scores.len() {
                if labels[i] == 1 && labels[j] == -1 {
                    den += 1.0;
                    if scores[i] > scores[j] {
                        num += 1.0;
                    } else if scores[i] == scores[j] {
                        num += 0.5;
                    }
                }
            }
        }
        num / den
    }

    #[test]
    fn auc_examples() {
        assert_eq!(auc_roc(&[0.1, 0.4, 0.35, 0.8], &[-1, -1, 1, 1]).unwrap(), 0.75);
        assert_eq!(auc_roc(&[0.1, 0.4, 0.35, 0.8], &[-1, 1, -1, 1]).unwrap(), 1.0);
        assert_eq!(auc_roc(&[1.0, 2.0, 3.0], &[-1, 1, 1]).unwrap(), 1.0);
        assert_eq!(auc_roc(&[5.0; 6], &[-1, 1, 1, -1, 1, -1]).unwrap(), 0.5);
        assert!(auc_roc(&[1.0, 2.0], &[1, 1]).is_err());
        let s = [0.3, 0.3, 0.1, 0.9, 0.3, 0.5, 0.5];
        let l = [1, -1, -1, 1, 1, -1, 1];
        assert_eq!(auc_roc(&s, &l).unwrap(), pair_auc(&s, &l));
    }

    #[test]
    fn folds_are_stratified_and_cover() {
        let labels: Vec<i8> = (0..23).map(|i| if i % 3 == 0 { 1 } else { -1 }).collect();
        let a = stratified_folds(&labels, 5, 7).unwrap();
        for f in 0..5 {
            let members: Vec<usize> = (0..23).filter(|&i| a[i] == f).collect();
            assert!(members.iter().any(|&i| labels[i] == 1));
            assert!(members.iter().any(|&i| labels[i] == -1));
        }
        assert!(stratified_folds(&labels, 9, 7).is_err());
        assert_eq!(a, stratified_folds(&labels, 5, 7).unwrap());
    }
}
