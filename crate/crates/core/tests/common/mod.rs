//! Independent oracles shared by the integration tests and the acceptance
//! run. Nothing here calls the library's own solvers.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rankfn::persistence::DiagramPoint;

/// Minimum over all partial matchings of `a` into `b` (unmatched points go
/// to the diagonal) of the folded cost. Exponential; fine for a handful of
/// points.
fn best_matching(
    a: &[DiagramPoint],
    b: &[DiagramPoint],
    pair: &dyn Fn(&DiagramPoint, &DiagramPoint) -> f64,
    diag: &dyn Fn(&DiagramPoint) -> f64,
    fold: &dyn Fn(f64, f64) -> f64,
) -> f64 {
    fn go(
        i: usize,
        a: &[DiagramPoint],
        b: &[DiagramPoint],
        used: &mut Vec<bool>,
        acc: f64,
        pair: &dyn Fn(&DiagramPoint, &DiagramPoint) -> f64,
        diag: &dyn Fn(&DiagramPoint) -> f64,
        fold: &dyn Fn(f64, f64) -> f64,
    ) -> f64 {
        if i == a.len() {
            return b
                .iter()
                .zip(used.iter())
                .filter(|(_, &u)| !u)
                .fold(acc, |s, (y, _)| fold(s, diag(y)));
        }
        let mut best = go(i + 1, a, b, used, fold(acc, diag(&a[i])), pair, diag, fold);
        for j in 0..b.len() {
            if !used[j] {
                used[j] = true;
                best = best.min(go(i + 1, a, b, used, fold(acc, pair(&a[i], &b[j])), pair, diag, fold));
                used[j] = false;
            }
        }
        best
    }
    go(0, a, b, &mut vec![false; b.len()], 0.0, pair, diag, fold)
}

/// `W_p` with the `ℓ^p` ground norm.
pub fn wasserstein_oracle(a: &[DiagramPoint], b: &[DiagramPoint], p: f64) -> f64 {
    let pair = |x: &DiagramPoint, y: &DiagramPoint| (x.birth - y.birth).abs().powf(p) + (x.death - y.death).abs().powf(p);
    let diag = |x: &DiagramPoint| 2.0 * ((x.death - x.birth) / 2.0).powf(p);
    best_matching(a, b, &pair, &diag, &|s, c| s + c).powf(1.0 / p)
}

/// Bottleneck distance with the `ℓ^∞` ground norm.
pub fn bottleneck_oracle(a: &[DiagramPoint], b: &[DiagramPoint]) -> f64 {
    let pair = |x: &DiagramPoint, y: &DiagramPoint| (x.birth - y.birth).abs().max((x.death - y.death).abs());
    let diag = |x: &DiagramPoint| (x.death - x.birth) / 2.0;
    best_matching(a, b, &pair, &diag, &|s, c| s.max(c))
}

/// Minimizer of `½ αᵀQα − Σα` over `0 <= α <= C`, `yᵀα = 0`, found by
/// solving the stationarity system on every face (each `α_i` at 0, at `C`,
/// or free) and keeping the best feasible point. `q` is row-major `N x N`
/// with `Q_ij = y_i y_j K_ij`; it must be positive definite.
pub fn brute_force_dual(q: &[f64], y: &[f64], c: f64) -> (f64, Vec<f64>) {
    let n = y.len();
    let objective = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += 0.5 * a[i] * q[i * n + j] * a[j];
            }
            s -= a[i];
        }
        s
    };
    let mut best = (f64::INFINITY, vec![0.0; n]);
    let faces = 3usize.pow(n as u32);
    for code in 0..faces {
        let mut state = vec![0u8; n];
        let mut k = code;
        for s in state.iter_mut() {
            *s = (k % 3) as u8;
            k /= 3;
        }
        let free: Vec<usize> = (0..n).filter(|&i| state[i] == 2).collect();
        let mut alpha: Vec<f64> = state.iter().map(|&s| if s == 1 { c } else { 0.0 }).collect();
        if !free.is_empty() {
            let f = free.len();
            let mut m = DMatrix::<f64>::zeros(f + 1, f + 1);
            let mut rhs = DVector::<f64>::zeros(f + 1);
            for (r, &i) in free.iter().enumerate() {
                for (s, &j) in free.iter().enumerate() {
                    m[(r, s)] = q[i * n + j];
                }
                m[(r, f)] = y[i];
                m[(f, r)] = y[i];
                rhs[r] = 1.0 - (0..n).filter(|&j| state[j] == 1).map(|j| q[i * n + j] * c).sum::<f64>();
            }
            rhs[f] = -(0..n).filter(|&j| state[j] == 1).map(|j| y[j] * c).sum::<f64>();
            let Some(sol) = m.lu().solve(&rhs) else { continue };
            for (r, &i) in free.iter().enumerate() {
                alpha[i] = sol[r];
            }
        }
        let feasible = alpha.iter().all(|&a| a >= -1e-12 && a <= c + 1e-12)
            && alpha.iter().zip(y).map(|(a, y)| a * y).sum::<f64>().abs() < 1e-9;
        if feasible {
            let v = objective(&alpha);
            if v < best.0 {
                best = (v, alpha);
            }
        }
    }
    best
}

/// Fraction of positive-negative pairs ordered correctly, ties counting half.
pub fn pair_auc(scores: &[f64], labels: &[i8]) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
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
