use super::dataset::FunctionalDataset;
use crate::error::{invalid, Result};
use crate::metrics::weighted_sq_dist;

/// A predicted label with its ranking score.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Scored {
    pub label: i8,
    pub score: f64,
}

/// Majority vote of the `k` nearest training rows. The score is the
/// fraction of `+1` votes; ties go to the nearest neighbour's label.
pub fn knn_classify(train: &FunctionalDataset, queries: &[Vec<f64>], k: usize) -> Result<Vec<Scored>> {
    if k == 0 || k > train.len() {
        return invalid(format!("k = {k} must lie in 1..={}", train.len()));
    }
    queries
        .iter()
        .map(|q| {
            train.check_row(q)?;
            let mut d: Vec<(f64, usize)> = train
                .rows()
                .enumerate()
                .map(|(i, r)| (weighted_sq_dist(q, r, train.weights()), i))
                .collect();
            d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let plus = d[..k].iter().filter(|&&(_, i)| train.labels()[i] == 1).count();
            let minus = k - plus;
            let label = match plus.cmp(&minus) {
                std::cmp::Ordering::Greater => 1,
                std::cmp::Ordering::Less => -1,
                std::cmp::Ordering::Equal => train.labels()[d[0].1],
            };
            Ok(Scored {
                label,
                score: plus as f64 / k as f64,
            })
        })
        .collect()
}

pub const DEFAULT_BAND_SIZE: usize = 2;

fn binom(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Modified band depth `Σ_{j=2..J} MBD^(j)` of `f` in `collection`, each term
/// the average over `j`-subsets of the weighted fraction of the domain where
/// `f` lies within the subset's band (boundaries included).
pub fn mbd(f: &[f64], collection: &FunctionalDataset, j_max: usize) -> Result<f64> {
    let n = collection.len();
    if j_max < 2 {
        return invalid("band size J must be at least 2");
    }
    if n < j_max {
        return invalid(format!("collection of {n} functions is smaller than J = {j_max}"));
    }
    collection.check_row(f)?;
    let w = collection.weights();
    let total_w: f64 = w.iter().sum();
    if total_w == 0.0 {
        return invalid("weights sum to zero");
    }
    let mut below = vec![0usize; f.len()];
    let mut above = vec![0usize; f.len()];
    for r in collection.rows() {
        for c in 0..f.len() {
            if r[c] < f[c] {
                below[c] += 1;
            } else if r[c] > f[c] {
                above[c] += 1;
            }
        }
    }
    let mut depth = 0.0;
    for j in 2..=j_max {
        let subsets = binom(n, j);
        let mut acc = 0.0;
        for c in 0..f.len() {
            if w[c] == 0.0 {
                continue;
            }
            // f escapes a band only if all its members are strictly below or
            // strictly above f.
            let inside = subsets - binom(below[c], j) - binom(above[c], j);
            acc += w[c] * inside as f64;
        }
        depth += acc / (subsets as f64 * total_w);
    }
    Ok(depth)
}

/// Assigns each query to the class in which it is deeper. Ties go to the
/// larger class, then to `+1`. The score is `depth(+) − depth(−)`.
pub fn mbd_classify(train: &FunctionalDataset, queries: &[Vec<f64>], j_max: usize) -> Result<Vec<Scored>> {
    let idx = |l: i8| -> Vec<usize> { (0..train.len()).filter(|&i| train.labels()[i] == l).collect() };
    let (pos_idx, neg_idx) = (idx(1), idx(-1));
    if pos_idx.is_empty() || neg_idx.is_empty() {
        return invalid("both classes must be present");
    }
    let pos = train.subset(&pos_idx);
    let neg = train.subset(&neg_idx);
    queries
        .iter()
        .map(|q| {
            let dp = mbd(q, &pos, j_max)?;
            let dn = mbd(q, &neg, j_max)?;
            let label = if dp > dn {
                1
            } else if dn > dp {
                -1
            } else if neg.len() > pos.len() {
                -1
            } else {
                1
            };
            Ok(Scored { label, score: dp - dn })
        })
        .collect()
}
