//! Distances between rank functions, persistence diagrams and landscapes.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::persistence::{DiagramPoint, PersistenceDiagram};
use crate::rank::{rect_area_above, Landscape, RankGrid};

/// `(Σ |r1 - r2|^p ω)^{1/p}` over the cells of two grids of equal geometry.
pub fn lp_distance(r1: &RankGrid, r2: &RankGrid, p: f64) -> Result<f64> {
    check_p(p)?;
    r1.same_geometry(r2)?;
    let sum: f64 = r1
        .values()
        .iter()
        .zip(r2.values())
        .zip(r1.weights())
        .map(|((&a, &b), &w)| (a as f64 - b as f64).abs().powf(p) * w)
        .sum();
    Ok(sum.powf(1.0 / p))
}

/// `(Σ |r|^p ω)^{1/p}`.
pub fn lp_norm(r: &RankGrid, p: f64) -> Result<f64> {
    check_p(p)?;
    let sum: f64 = r
        .values()
        .iter()
        .zip(r.weights())
        .map(|(&a, &w)| (a as f64).powf(p) * w)
        .sum();
    Ok(sum.powf(1.0 / p))
}

fn check_p(p: f64) -> Result<()> {
    if !(p >= 1.0 && p.is_finite()) {
        return invalid(format!("p = {p} must be a finite real >= 1"));
    }
    Ok(())
}

/// `‖β^{d1} - β^{d2}‖_p` restricted to `{y > x + δ}` (`δ = 0` for the full
/// rank functions), integrated exactly.
///
/// Both rank functions are constant on the cells cut out by the lines
/// `x = b` and `y = d` through all births and deaths, so evaluating each
/// cell once at an interior point and weighting it by its exact area inside
/// the domain gives the integral without discretization error.
pub fn rank_lp_distance_exact(
    d1: &PersistenceDiagram,
    d2: &PersistenceDiagram,
    degree: usize,
    p: f64,
    delta: f64,
) -> Result<f64> {
    check_p(p)?;
    if !(delta >= 0.0 && delta.is_finite()) {
        return invalid(format!("truncation δ = {delta} must be non-negative"));
    }
    let (a, b) = (d1.degree(degree), d2.degree(degree));
    let mut cuts: Vec<f64> = a
        .iter()
        .chain(b)
        .flat_map(|q| [q.birth, q.death])
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let n = cuts.len();
    if n < 2 {
        return Ok(0.0);
    }
    let beta = |pts: &[DiagramPoint], x: f64, y: f64| {
        pts.iter().filter(|q| q.birth <= x && y < q.death).count() as i64
    };
    let mut sum = 0.0;
    for i in 0..n - 1 {
        let (x0, x1) = (cuts[i], cuts[i + 1]);
        let xm = 0.5 * (x0 + x1);
        for j in i..n - 1 {
            let (y0, y1) = (cuts[j], cuts[j + 1]);
            let area = rect_area_above(x0, x1, y0, y1, delta);
            if area <= 0.0 {
                continue;
            }
            let ym = 0.5 * (y0 + y1);
            let diff = (beta(a, xm, ym) - beta(b, xm, ym)).abs();
            if diff != 0 {
                sum += (diff as f64).powf(p) * area;
            }
        }
    }
    Ok(sum.powf(1.0 / p))
}

/// `Σ_i a_i b_i w_i`.
pub fn weighted_dot(a: &[f64], b: &[f64], w: &[f64]) -> f64 {
    a.iter().zip(b).zip(w).map(|((x, y), z)| x * y * z).sum()
}

/// `Σ_i (a_i - b_i)^2 w_i`.
pub fn weighted_sq_dist(a: &[f64], b: &[f64], w: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .zip(w)
        .map(|((x, y), z)| (x - y) * (x - y) * z)
        .sum()
}

/// One edge of a matching between two diagrams. Indices refer to
/// [`PersistenceDiagram::degree`] of the respective diagram.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Assignment {
    Pair(usize, usize),
    FirstToDiagonal(usize),
    SecondToDiagonal(usize),
}

/// Which optimal-matching cost a certificate was computed for.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchingCost {
    Bottleneck,
    Wasserstein { p: f64 },
}

/// A bijection between two diagrams augmented by the diagonal, with its cost.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchingCertificate {
    pub kind: MatchingCost,
    pub assignments: Vec<Assignment>,
    pub cost: f64,
}

fn linf(a: &DiagramPoint, b: &DiagramPoint) -> f64 {
    (a.birth - b.birth).abs().max((a.death - b.death).abs())
}

fn lp_pow(a: &DiagramPoint, b: &DiagramPoint, p: f64) -> f64 {
    (a.birth - b.birth).abs().powf(p) + (a.death - b.death).abs().powf(p)
}

/// `ℓ∞` distance from a point to the diagonal.
fn linf_diag(a: &DiagramPoint) -> f64 {
    a.persistence() / 2.0
}

/// `‖a - π(a)‖_p^p` for the orthogonal projection `π(a)` onto the diagonal.
fn lp_pow_diag(a: &DiagramPoint, p: f64) -> f64 {
    2.0 * (a.persistence() / 2.0).powf(p)
}

impl MatchingCertificate {
    /// Checks that every point of both diagrams appears exactly once and
    /// recomputes the cost.
    pub fn recompute(&self, d1: &PersistenceDiagram, d2: &PersistenceDiagram, degree: usize) -> Result<f64> {
        let (a, b) = (d1.degree(degree), d2.degree(degree));
        let mut seen_a = vec![false; a.len()];
        let mut seen_b = vec![false; b.len()];
        let mark = |seen: &mut Vec<bool>, i: usize| -> Result<()> {
            match seen.get_mut(i) {
                Some(s) if !*s => {
                    *s = true;
                    Ok(())
                }
                _ => Err(Error::Invariant(format!("point {i} is missing or matched twice"))),
            }
        };
        let mut costs = Vec::with_capacity(self.assignments.len());
        for &asg in &self.assignments {
            let c = match (asg, self.kind) {
                (Assignment::Pair(i, j), kind) => {
                    mark(&mut seen_a, i)?;
                    mark(&mut seen_b, j)?;
                    match kind {
                        MatchingCost::Bottleneck => linf(&a[i], &b[j]),
                        MatchingCost::Wasserstein { p } => lp_pow(&a[i], &b[j], p),
                    }
                }
                (Assignment::FirstToDiagonal(i), kind) => {
                    mark(&mut seen_a, i)?;
                    match kind {
                        MatchingCost::Bottleneck => linf_diag(&a[i]),
                        MatchingCost::Wasserstein { p } => lp_pow_diag(&a[i], p),
                    }
                }
                (Assignment::SecondToDiagonal(j), kind) => {
                    mark(&mut seen_b, j)?;
                    match kind {
                        MatchingCost::Bottleneck => linf_diag(&b[j]),
                        MatchingCost::Wasserstein { p } => lp_pow_diag(&b[j], p),
                    }
                }
            };
            costs.push(c);
        }
        if seen_a.iter().chain(&seen_b).any(|s| !s) {
            return Err(Error::Invariant("matching does not cover every point".into()));
        }
        Ok(match self.kind {
            MatchingCost::Bottleneck => costs.into_iter().fold(0.0, f64::max),
            MatchingCost::Wasserstein { p } => costs.iter().sum::<f64>().powf(1.0 / p),
        })
    }
}

/// Maximum bipartite matching by Hopcroft–Karp. Returns the partner of each
/// left vertex.
fn hopcroft_karp(adj: &[Vec<u32>], n_right: usize) -> Vec<u32> {
    const FREE: u32 = u32::MAX;
    let n_left = adj.len();
    let mut match_l = vec![FREE; n_left];
    let mut match_r = vec![FREE; n_right];
    let mut dist = vec![0u32; n_left];
    let mut queue = Vec::with_capacity(n_left);
    let mut it = vec![0usize; n_left];
    loop {
        queue.clear();
        for u in 0..n_left {
            if match_l[u] == FREE {
                dist[u] = 0;
                queue.push(u as u32);
            } else {
                dist[u] = u32::MAX;
            }
        }
        let mut found = false;
        let mut head = 0;
        while head < queue.len() {
            let u = queue[head] as usize;
            head += 1;
            for &v in &adj[u] {
                let w = match_r[v as usize];
                if w == FREE {
                    found = true;
                } else if dist[w as usize] == u32::MAX {
                    dist[w as usize] = dist[u] + 1;
                    queue.push(w);
                }
            }
        }
        if !found {
            break;
        }
        it.iter_mut().for_each(|x| *x = 0);
        for u in 0..n_left {
            if match_l[u] == FREE {
                augment(u, adj, &mut match_l, &mut match_r, &mut dist, &mut it);
            }
        }
    }
    match_l
}

fn augment(
    root: usize,
    adj: &[Vec<u32>],
    match_l: &mut [u32],
    match_r: &mut [u32],
    dist: &mut [u32],
    it: &mut [usize],
) -> bool {
    // Iterative DFS along the layered graph.
    let mut stack = vec![root];
    while let Some(&u) = stack.last() {
        if it[u] == adj[u].len() {
            dist[u] = u32::MAX;
            stack.pop();
            continue;
        }
        let v = adj[u][it[u]] as usize;
        it[u] += 1;
        let w = match_r[v];
        if w == u32::MAX {
            // Flip the path recorded on the stack.
            let mut v = v;
            while let Some(x) = stack.pop() {
                let prev = match_l[x];
                match_l[x] = v as u32;
                match_r[v] = x as u32;
                if prev == u32::MAX {
                    break;
                }
                v = prev as usize;
            }
            return true;
        }
        if dist[w as usize] == dist[u] + 1 {
            stack.push(w as usize);
        }
    }
    false
}

/// Layout shared by both matching problems: left vertices are the points of
/// `a` followed by `m` diagonal slots, right vertices the points of `b`
/// followed by `n` diagonal slots.
fn decode(a_len: usize, b_len: usize, left: usize, right: usize) -> Option<Assignment> {
    match (left < a_len, right < b_len) {
        (true, true) => Some(Assignment::Pair(left, right)),
        (true, false) => Some(Assignment::FirstToDiagonal(left)),
        (false, true) => Some(Assignment::SecondToDiagonal(right)),
        (false, false) => None,
    }
}

/// Exact bottleneck distance in one degree.
pub fn bottleneck(d1: &PersistenceDiagram, d2: &PersistenceDiagram, degree: usize) -> Result<(f64, MatchingCertificate)> {
    let (a, b) = (d1.degree(degree), d2.degree(degree));
    let (n, m) = (a.len(), b.len());
    let size = n + m;
    let mut candidates: Vec<f64> = Vec::with_capacity(n * m + size + 1);
    candidates.push(0.0);
    for p in a {
        candidates.push(linf_diag(p));
        candidates.extend(b.iter().map(|q| linf(p, q)));
    }
    candidates.extend(b.iter().map(linf_diag));
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();

    let graph = |t: f64| -> Vec<Vec<u32>> {
        let mut adj = vec![Vec::new(); size];
        for (i, p) in a.iter().enumerate() {
            adj[i].extend((0..m).filter(|&j| linf(p, &b[j]) <= t).map(|j| j as u32));
            if linf_diag(p) <= t {
                adj[i].extend((m..size).map(|r| r as u32));
            }
        }
        for (j, q) in b.iter().enumerate() {
            let row = &mut adj[n + j];
            if linf_diag(q) <= t {
                row.push(j as u32);
            }
            row.extend((m..size).map(|r| r as u32));
        }
        adj
    };
    let perfect = |t: f64| {
        let ml = hopcroft_karp(&graph(t), size);
        ml.iter().all(|&v| v != u32::MAX).then_some(ml)
    };

    // The largest candidate always admits a perfect matching.
    let (mut lo, mut hi) = (0usize, candidates.len() - 1);
    let mut best = perfect(candidates[hi]).ok_or_else(|| {
        Error::Invariant("no perfect matching at the largest candidate cost".into())
    })?;
    while lo < hi {
        let mid = (lo + hi) / 2;
        match perfect(candidates[mid]) {
            Some(ml) => {
                hi = mid;
                best = ml;
            }
            None => lo = mid + 1,
        }
    }
    if best.is_empty() && size > 0 {
        return Err(Error::Invariant("empty matching".into()));
    }
    let assignments: Vec<Assignment> = best
        .iter()
        .enumerate()
        .filter_map(|(l, &r)| decode(n, m, l, r as usize))
        .collect();
    let mut cert = MatchingCertificate {
        kind: MatchingCost::Bottleneck,
        assignments,
        cost: 0.0,
    };
    cert.cost = cert.recompute(d1, d2, degree)?;
    Ok((cert.cost, cert))
}

/// Minimum-cost perfect assignment on a square matrix (Hungarian method with
/// potentials). Returns the column assigned to each row.
pub(crate) fn hungarian(cost: &[f64], size: usize) -> Vec<usize> {
    if size == 0 {
        return Vec::new();
    }
    let inf = f64::INFINITY;
    // 1-based arrays; row/col 0 is a sentinel.
    let mut u = vec![0.0; size + 1];
    let mut v = vec![0.0; size + 1];
    let mut p = vec![0usize; size + 1];
    let mut way = vec![0usize; size + 1];
    let mut minv = vec![inf; size + 1];
    let mut used = vec![false; size + 1];
    for i in 1..=size {
        p[0] = i;
        let mut j0 = 0;
        minv.iter_mut().for_each(|x| *x = inf);
        used.iter_mut().for_each(|x| *x = false);
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            let row = &cost[(i0 - 1) * size..i0 * size];
            for j in 1..=size {
                if !used[j] {
                    let cur = row[j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=size {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut row_to_col = vec![0; size];
    for j in 1..=size {
        row_to_col[p[j] - 1] = j - 1;
    }
    row_to_col
}

/// Exact `p`-Wasserstein distance in one degree with `ℓ^p` ground norm.
pub fn wasserstein(
    d1: &PersistenceDiagram,
    d2: &PersistenceDiagram,
    degree: usize,
    p: f64,
) -> Result<(f64, MatchingCertificate)> {
    check_p(p)?;
    let (a, b) = (d1.degree(degree), d2.degree(degree));
    let (n, m) = (a.len(), b.len());
    let size = n + m;
    let mut cost = vec![0.0; size * size];
    for (i, x) in a.iter().enumerate() {
        let row = &mut cost[i * size..(i + 1) * size];
        for (j, y) in b.iter().enumerate() {
            row[j] = lp_pow(x, y, p);
        }
        let c = lp_pow_diag(x, p);
        row[m..].iter_mut().for_each(|e| *e = c);
    }
    for (j, y) in b.iter().enumerate() {
        let c = lp_pow_diag(y, p);
        for i in n..size {
            cost[i * size + j] = c;
        }
    }
    let assignment = hungarian(&cost, size);
    let assignments = assignment
        .iter()
        .enumerate()
        .filter_map(|(l, &r)| decode(n, m, l, r))
        .collect();
    let mut cert = MatchingCertificate {
        kind: MatchingCost::Wasserstein { p },
        assignments,
        cost: 0.0,
    };
    cert.cost = cert.recompute(d1, d2, degree)?;
    Ok((cert.cost, cert))
}

/// Sum of a per-degree distance over degrees `0..=max_degree`.
pub fn combined<F>(d1: &PersistenceDiagram, d2: &PersistenceDiagram, max_degree: usize, f: F) -> Result<f64>
where
    F: Fn(&PersistenceDiagram, &PersistenceDiagram, usize) -> Result<(f64, MatchingCertificate)>,
{
    (0..=max_degree).map(|q| f(d1, d2, q).map(|r| r.0)).sum()
}

/// `Σ_k ‖λ_k - λ'_k‖_p^p` with trapezoidal quadrature in `t`.
pub fn landscape_distance(l1: &[Landscape], l2: &[Landscape], p: f64) -> Result<f64> {
    check_p(p)?;
    if l1.len() != l2.len() {
        return Err(Error::GridMismatch(format!(
            "landscape lists have {} and {} levels",
            l1.len(),
            l2.len()
        )));
    }
    let mut total = 0.0;
    for (x, y) in l1.iter().zip(l2) {
        if x.ts != y.ts || x.values.len() != x.ts.len() || y.values.len() != y.ts.len() {
            return Err(Error::GridMismatch("landscapes sampled on different t grids".into()));
        }
        let f: Vec<f64> = x
            .values
            .iter()
            .zip(&y.values)
            .map(|(a, b)| (a - b).abs().powf(p))
            .collect();
        total += x
            .ts
            .windows(2)
            .zip(f.windows(2))
            .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
            .sum::<f64>();
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rank::{landscape, landscape_grid, rank_from_diagram, GridSpec};

    fn dg(pairs: &[(f64, f64)]) -> PersistenceDiagram {
        PersistenceDiagram::from_pairs(0, pairs).unwrap()
    }

    #[test]
    fn lp_examples() {
        let a = dg(&[(0.0, 2.0)]);
        let spec = GridSpec::default_for(&a).unwrap();
        let ra = rank_from_diagram(&a, 0, spec).unwrap();
        let re = rank_from_diagram(&PersistenceDiagram::empty(), 0, spec).unwrap();
        assert_eq!(lp_distance(&ra, &ra, 1.0).unwrap(), 0.0);
        assert!((lp_distance(&ra, &re, 1.0).unwrap() - 2.0).abs() < 1e-9);
        assert!((lp_distance(&ra, &re, 2.0).unwrap() - 2f64.sqrt()).abs() < 1e-9);
        let other = rank_from_diagram(&a, 0, GridSpec::new(0.0, 2.0, 50).unwrap()).unwrap();
        assert!(matches!(lp_distance(&ra, &other, 1.0), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn bottleneck_examples() {
        let a = dg(&[(0.0, 2.0)]);
        assert_eq!(bottleneck(&a, &dg(&[(0.0, 2.5)]), 0).unwrap().0, 0.5);
        assert_eq!(bottleneck(&a, &PersistenceDiagram::empty(), 0).unwrap().0, 1.0);
        assert_eq!(bottleneck(&a, &a, 0).unwrap().0, 0.0);
        let (v, c) = bottleneck(&PersistenceDiagram::empty(), &PersistenceDiagram::empty(), 0).unwrap();
        assert_eq!(v, 0.0);
        assert!(c.assignments.is_empty());
    }

    #[test]
    fn wasserstein_examples() {
        let a = dg(&[(0.0, 2.0)]);
        assert_eq!(wasserstein(&a, &dg(&[(0.0, 2.5)]), 0, 1.0).unwrap().0, 0.5);
        // ℓ¹ distance from (0, 2) to its projection (1, 1).
        assert_eq!(wasserstein(&a, &PersistenceDiagram::empty(), 0, 1.0).unwrap().0, 2.0);
        assert_eq!(wasserstein(&a, &a, 0, 2.0).unwrap().0, 0.0);
    }

    #[test]
    fn hungarian_small() {
        let cost = [4.0, 1.0, 3.0, 2.0, 0.0, 5.0, 3.0, 2.0, 2.0];
        let a = hungarian(&cost, 3);
        let total: f64 = a.iter().enumerate().map(|(i, &j)| cost[i * 3 + j]).sum();
        assert_eq!(total, 5.0);
    }

    #[test]
    fn landscape_distance_examples() {
        let ts = landscape_grid(0.0, 2.0, 201).unwrap();
        let a = landscape(&dg(&[(0.0, 2.0)]), 0, 2, &ts).unwrap();
        let e = landscape(&PersistenceDiagram::empty(), 0, 2, &ts).unwrap();
        assert_eq!(landscape_distance(&a, &a, 1.0).unwrap(), 0.0);
        assert!((landscape_distance(&a, &e, 1.0).unwrap() - 1.0).abs() < 1e-12);
        let a1 = landscape(&dg(&[(0.0, 2.0)]), 0, 1, &ts).unwrap();
        assert!(landscape_distance(&a1, &e, 1.0).is_err());
    }
}
