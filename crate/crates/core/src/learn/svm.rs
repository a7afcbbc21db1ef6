//! Soft-margin SVM trained by sequential minimal optimization with
//! second-order working-set selection.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dataset::FunctionalDataset;
use crate::error::{invalid, Error, Result};
use crate::metrics::{weighted_dot, weighted_sq_dist};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum KernelSpec {
    Linear,
    /// `(⟨f, g⟩ + 1)^degree`
    Polynomial { degree: u32 },
    /// `exp(−γ ‖f − g‖²)`; `None` picks `γ` from the training data.
    Grbf { gamma: Option<f64> },
}

impl KernelSpec {
    fn eval(&self, a: &[f64], b: &[f64], w: &[f64]) -> f64 {
        match *self {
            KernelSpec::Linear => weighted_dot(a, b, w),
            KernelSpec::Polynomial { degree } => (weighted_dot(a, b, w) + 1.0).powi(degree as i32),
            KernelSpec::Grbf { gamma } => (-gamma.expect("γ resolved before use") * weighted_sq_dist(a, b, w)).exp(),
        }
    }

    /// Replaces a missing `γ` by `1 / Σ_k w_k var_k`, the reciprocal of half
    /// the expected squared distance between two rows.
    pub fn resolve(self, ds: &FunctionalDataset) -> Result<Self> {
        match self {
            KernelSpec::Grbf { gamma: Some(g) } if !(g > 0.0 && g.is_finite()) => {
                invalid(format!("γ = {g} must be positive"))
            }
            KernelSpec::Grbf { gamma: None } => Ok(KernelSpec::Grbf {
                gamma: Some(default_gamma(ds)),
            }),
            KernelSpec::Polynomial { degree: 0 } => invalid("polynomial degree must be at least 1"),
            k => Ok(k),
        }
    }
}

fn default_gamma(ds: &FunctionalDataset) -> f64 {
    let n = ds.len() as f64;
    let mut total = 0.0;
    for k in 0..ds.dim() {
        let w = ds.weights()[k];
        if w == 0.0 {
            continue;
        }
        let mean = ds.rows().map(|r| r[k]).sum::<f64>() / n;
        let var = ds.rows().map(|r| (r[k] - mean).powi(2)).sum::<f64>() / n;
        total += w * var;
    }
    if total > 0.0 {
        1.0 / total
    } else {
        1.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    pub c: f64,
    pub tol: f64,
    /// `None` means `max(10 N D, 100 000)` pair updates.
    pub max_iterations: Option<usize>,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self {
            c: 1.0,
            tol: 1e-3,
            max_iterations: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SvmModel {
    pub kernel: KernelSpec,
    pub c: f64,
    /// Dual coefficients of the support vectors, `0 < α_i <= C`.
    pub alphas: Vec<f64>,
    pub support_labels: Vec<i8>,
    support: Vec<Vec<f64>>,
    weights: Vec<f64>,
    pub bias: f64,
    /// `Σ ζ_i` and `max ζ_i` of the hinge slacks on the training set.
    pub slack_sum: f64,
    pub slack_max: f64,
    pub iterations: usize,
    /// Final maximal KKT violation.
    pub kkt_residual: f64,
    /// Full dual vector over the training rows.
    pub dual: Vec<f64>,
    /// `½ αᵀQα − Σ α` at the solution.
    pub objective: f64,
}

impl SvmModel {
    pub fn decision(&self, row: &[f64]) -> Result<f64> {
        if row.len() != self.weights.len() {
            return Err(Error::GridMismatch(format!(
                "query has length {}, model expects {}",
                row.len(),
                self.weights.len()
            )));
        }
        Ok(self
            .alphas
            .iter()
            .zip(&self.support_labels)
            .zip(&self.support)
            .map(|((a, &y), s)| a * y as f64 * self.kernel.eval(s, row, &self.weights))
            .sum::<f64>()
            + self.bias)
    }

    /// Sign of the decision value, ties to `+1`.
    pub fn predict(&self, row: &[f64]) -> Result<i8> {
        Ok(if self.decision(row)? >= 0.0 { 1 } else { -1 })
    }
}

/// Kernel matrix of a dataset.
pub fn gram(ds: &FunctionalDataset, kernel: &KernelSpec) -> Vec<f64> {
    let n = ds.len();
    let w = ds.weights();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| (0..n).map(|j| if j < i { 0.0 } else { kernel.eval(ds.row(i), ds.row(j), w) }).collect())
        .collect();
    let mut k = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            k[i * n + j] = rows[i][j];
            k[j * n + i] = rows[i][j];
        }
    }
    k
}

const TAU: f64 = 1e-12;

pub fn svm_train(ds: &FunctionalDataset, kernel: KernelSpec, params: &SvmParams) -> Result<SvmModel> {
    let n = ds.len();
    let c = params.c;
    if !(c > 0.0 && c.is_finite()) {
        return invalid(format!("C = {c} must be positive"));
    }
    if ds.count(1) < 2 || ds.count(-1) < 2 {
        return invalid("need at least two samples of each class");
    }
    let kernel = kernel.resolve(ds)?;
    let k = gram(ds, &kernel);
    let y: Vec<f64> = ds.labels().iter().map(|&l| l as f64).collect();
    let max_iter = params
        .max_iterations
        .unwrap_or((10 * n * ds.dim()).max(100_000))
        .max(1);

    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let up = |a: f64, yt: f64| (yt > 0.0 && a < c) || (yt < 0.0 && a > 0.0);
    let low = |a: f64, yt: f64| (yt > 0.0 && a > 0.0) || (yt < 0.0 && a < c);
    let objective = |alpha: &[f64], grad: &[f64]| -> f64 {
        alpha.iter().zip(grad).map(|(a, g)| a * (g - 1.0)).sum::<f64>() / 2.0
    };

    let mut iter = 0;
    let mut residual;
    loop {
        // First index: maximal violation.
        let mut gmax = f64::NEG_INFINITY;
        let mut i = usize::MAX;
        for t in 0..n {
            if up(alpha[t], y[t]) && -y[t] * grad[t] >= gmax {
                gmax = -y[t] * grad[t];
                i = t;
            }
        }
        // Second index: largest guaranteed decrease.
        let mut gmax2 = f64::NEG_INFINITY;
        let mut j = usize::MAX;
        let mut best = f64::INFINITY;
        for t in 0..n {
            if !low(alpha[t], y[t]) {
                continue;
            }
            gmax2 = gmax2.max(y[t] * grad[t]);
            if i == usize::MAX {
                continue;
            }
            let b = gmax + y[t] * grad[t];
            if b > 0.0 {
                let a = k[i * n + i] + k[t * n + t] - 2.0 * k[i * n + t];
                let a = if a > 0.0 { a } else { TAU };
                if -(b * b) / a <= best {
                    best = -(b * b) / a;
                    j = t;
                }
            }
        }
        residual = gmax + gmax2;
        if residual < params.tol || i == usize::MAX || j == usize::MAX {
            break;
        }
        if iter >= max_iter {
            return Err(Error::NotConverged {
                iterations: iter,
                residual,
            });
        }
        iter += 1;
        #[cfg(debug_assertions)]
        let before = objective(&alpha, &grad);

        let (ai, aj) = (alpha[i], alpha[j]);
        let quad = {
            let q = k[i * n + i] + k[j * n + j] - 2.0 * k[i * n + j];
            if q > 0.0 {
                q
            } else {
                TAU
            }
        };
        if y[i] != y[j] {
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = ai - aj;
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let delta = (grad[i] - grad[j]) / quad;
            let sum = ai + aj;
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - ai, alpha[j] - aj);
        for t in 0..n {
            grad[t] += y[t] * (y[i] * k[t * n + i] * di + y[j] * k[t * n + j] * dj);
        }
        #[cfg(debug_assertions)]
        {
            let after = objective(&alpha, &grad);
            debug_assert!(after <= before + 1e-9 * (1.0 + before.abs()), "dual objective increased");
        }
    }

    // Bias from free vectors, or the midpoint of the feasible interval.
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut free_sum, mut free_n) = (0.0, 0usize);
    for t in 0..n {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free_sum += yg;
            free_n += 1;
        }
    }
    let rho = if free_n > 0 {
        free_sum / free_n as f64
    } else {
        (ub + lb) / 2.0
    };
    let bias = -rho;

    let mut slack_sum = 0.0;
    let mut slack_max: f64 = 0.0;
    for t in 0..n {
        // f(x_t) = Σ α_s y_s K_st + b = y_t (G_t + 1) + b
        let f = y[t] * (grad[t] + 1.0) + bias;
        let z = (1.0 - y[t] * f).max(0.0);
        slack_sum += z;
        slack_max = slack_max.max(z);
    }

    let sv: Vec<usize> = (0..n).filter(|&t| alpha[t] > 0.0).collect();
    Ok(SvmModel {
        kernel,
        c,
        alphas: sv.iter().map(|&t| alpha[t]).collect(),
        support_labels: sv.iter().map(|&t| ds.labels()[t]).collect(),
        support: sv.iter().map(|&t| ds.row(t).to_vec()).collect(),
        weights: ds.weights().to_vec(),
        bias,
        slack_sum,
        slack_max,
        iterations: iter,
        kkt_residual: residual,
        objective: objective(&alpha, &grad),
        dual: alpha,
    })
}
