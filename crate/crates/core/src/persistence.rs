//! Boundary matrix reduction over Z/2 and the diagram / barcode / rank
//! correspondences.
//!
//! Bars are half-open `[birth, death)`. Classes that never die are capped at
//! the diagram's `cap` (by default the largest filtration value), so every
//! stored bar is finite. Zero-length bars are dropped.

use rustc_hash::FxHashMap;

use crate::complexes::{Filtration, Simplex, SimplexSet};
use crate::error::{invalid, Error, Result};
use crate::rank::RankGrid;

pub use crate::rips::rips_barcode;

/// A point `(birth, death)` of a persistence diagram, `birth < death`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DiagramPoint {
    pub birth: f64,
    pub death: f64,
}

impl DiagramPoint {
    pub fn new(birth: f64, death: f64) -> Self {
        Self { birth, death }
    }

    pub fn persistence(&self) -> f64 {
        self.death - self.birth
    }

    fn total_cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.birth
            .total_cmp(&other.birth)
            .then(self.death.total_cmp(&other.death))
    }
}

/// A half-open interval `[birth, death)`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Bar {
    pub birth: f64,
    pub death: f64,
}

impl Bar {
    pub fn persistence(&self) -> f64 {
        self.death - self.birth
    }
}

/// Bars indexed by homology degree.
#[derive(Clone, Debug, PartialEq)]
pub struct Barcode {
    bars: Vec<Vec<Bar>>,
    cap: f64,
}

impl Barcode {
    pub fn new(bars: Vec<Vec<Bar>>, cap: f64) -> Result<Self> {
        for (q, list) in bars.iter().enumerate() {
            for b in list {
                if !(b.birth.is_finite() && b.death.is_finite() && b.birth < b.death) {
                    return invalid(format!("degree {q}: bad bar [{}, {})", b.birth, b.death));
                }
            }
        }
        Ok(Self { bars, cap })
    }

    pub fn degree(&self, q: usize) -> &[Bar] {
        self.bars.get(q).map_or(&[], |v| v.as_slice())
    }

    pub fn degrees(&self) -> usize {
        self.bars.len()
    }

    pub fn cap(&self) -> f64 {
        self.cap
    }
}

/// Finite multisets of off-diagonal points per homology degree, plus the
/// value at which essential classes were capped.
///
/// Points are kept sorted by `(birth, death)`; multiplicity is repetition.
#[derive(Clone, Debug, PartialEq)]
pub struct PersistenceDiagram {
    points: Vec<Vec<DiagramPoint>>,
    cap: f64,
}

impl PersistenceDiagram {
    pub fn new(mut points: Vec<Vec<DiagramPoint>>, cap: f64) -> Result<Self> {
        if !cap.is_finite() {
            return invalid("diagram cap must be finite");
        }
        for (q, list) in points.iter_mut().enumerate() {
            for p in list.iter() {
                if !(p.birth.is_finite() && p.death.is_finite()) {
                    return invalid(format!("degree {q}: non-finite point"));
                }
                if p.birth >= p.death {
                    return invalid(format!(
                        "degree {q}: point ({}, {}) is not above the diagonal",
                        p.birth, p.death
                    ));
                }
                if p.death > cap {
                    return invalid(format!(
                        "degree {q}: death {} exceeds the cap {cap}",
                        p.death
                    ));
                }
            }
            list.sort_by(DiagramPoint::total_cmp);
        }
        while points.last().is_some_and(|l| l.is_empty()) {
            points.pop();
        }
        Ok(Self { points, cap })
    }

    /// Single-degree diagram capped at its largest death (0 when empty).
    pub fn from_pairs(degree: usize, pairs: &[(f64, f64)]) -> Result<Self> {
        let cap = pairs.iter().map(|p| p.1).fold(0.0, f64::max);
        let mut points = vec![Vec::new(); degree + 1];
        points[degree] = pairs.iter().map(|&(b, d)| DiagramPoint::new(b, d)).collect();
        Self::new(points, cap)
    }

    pub fn empty() -> Self {
        Self {
            points: Vec::new(),
            cap: 0.0,
        }
    }

    pub fn degree(&self, q: usize) -> &[DiagramPoint] {
        self.points.get(q).map_or(&[], |v| v.as_slice())
    }

    /// One past the highest degree holding points.
    pub fn degrees(&self) -> usize {
        self.points.len()
    }

    pub fn cap(&self) -> f64 {
        self.cap
    }

    pub fn with_cap(&self, cap: f64) -> Result<Self> {
        Self::new(self.points.clone(), cap)
    }

    pub fn is_empty(&self) -> bool {
        self.points.iter().all(|l| l.is_empty())
    }

    /// Number of points `(b, d)` with `b <= x` and `y < d`.
    pub fn rank(&self, q: usize, x: f64, y: f64) -> usize {
        self.degree(q)
            .iter()
            .filter(|p| p.birth <= x && y < p.death)
            .count()
    }

    pub fn max_persistence(&self, q: usize) -> f64 {
        self.degree(q).iter().map(|p| p.persistence()).fold(0.0, f64::max)
    }

    /// Smallest birth over all degrees (0 for an empty diagram).
    pub fn min_birth(&self) -> f64 {
        self.points
            .iter()
            .flatten()
            .map(|p| p.birth)
            .fold(f64::INFINITY, f64::min)
            .min(if self.is_empty() { 0.0 } else { f64::INFINITY })
    }

    /// Largest death over all degrees (0 for an empty diagram).
    pub fn max_death(&self) -> f64 {
        self.points.iter().flatten().map(|p| p.death).fold(0.0, f64::max)
    }

    /// Multiset union of two diagrams.
    pub fn union(&self, other: &Self) -> Self {
        let n = self.points.len().max(other.points.len());
        let points = (0..n)
            .map(|q| [self.degree(q), other.degree(q)].concat())
            .collect();
        Self::new(points, self.cap.max(other.cap)).expect("union of valid diagrams")
    }
}

pub fn barcode_to_diagram(b: &Barcode) -> PersistenceDiagram {
    let points = b
        .bars
        .iter()
        .map(|l| l.iter().map(|b| DiagramPoint::new(b.birth, b.death)).collect())
        .collect();
    PersistenceDiagram::new(points, b.cap).expect("barcode bars are valid diagram points")
}

pub fn diagram_to_barcode(d: &PersistenceDiagram) -> Barcode {
    let bars = d
        .points
        .iter()
        .map(|l| {
            l.iter()
                .map(|p| Bar {
                    birth: p.birth,
                    death: p.death,
                })
                .collect()
        })
        .collect();
    Barcode { bars, cap: d.cap }
}

/// Maps vertex lists to filtration indices through the combinatorial number
/// system, one table per dimension.
pub(crate) struct SimplexIndex {
    binom: Vec<Vec<u64>>,
    maps: Vec<FxHashMap<u64, u32>>,
}

impl SimplexIndex {
    pub(crate) fn build(f: &Filtration) -> Result<Self> {
        let n = f.vertex_count();
        let kmax = f.max_dim() + 1;
        // binom[k][v] = C(v, k)
        let mut binom = vec![vec![0u64; n + 1]; kmax + 1];
        for v in 0..=n {
            binom[0][v] = 1;
        }
        for k in 1..=kmax {
            for v in 1..=n {
                binom[k][v] = binom[k - 1][v - 1]
                    .checked_add(binom[k][v - 1])
                    .ok_or_else(|| {
                        Error::InvalidInput("complex too large for 64-bit simplex keys".into())
                    })?;
            }
        }
        let mut idx = Self {
            binom,
            maps: (0..kmax).map(|_| FxHashMap::default()).collect(),
        };
        for i in 0..f.len() {
            let s = f.vertices(i);
            let key = idx.key(s);
            idx.maps[s.len() - 1].insert(key, i as u32);
        }
        Ok(idx)
    }

    #[inline]
    fn key(&self, s: &[u32]) -> u64 {
        s.iter()
            .enumerate()
            .map(|(t, &v)| self.binom[t + 1][v as usize])
            .sum()
    }

    #[inline]
    pub(crate) fn lookup(&self, s: &[u32]) -> Option<usize> {
        if s.is_empty() || s.len() > self.maps.len() {
            return None;
        }
        if s.iter().any(|&v| v as usize + 1 >= self.binom[0].len()) {
            return None;
        }
        self.maps[s.len() - 1].get(&self.key(s)).map(|&i| i as usize)
    }
}

/// Persistence pairs and essential simplices of a reduced filtration.
#[derive(Debug, Default)]
pub(crate) struct Reduction {
    /// `(birth index, death index)`
    pub pairs: Vec<(u32, u32)>,
    /// Unpaired positive simplices of dimension `<= max_degree`.
    pub essential: Vec<u32>,
}

const NONE: u32 = u32::MAX;

fn symmetric_difference_into(a: &[u32], b: &[u32], out: &mut Vec<u32>) {
    out.clear();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
}

struct Reducer {
    pivot_of_row: Vec<u32>,
    negative: Vec<bool>,
    store: Vec<Vec<u32>>,
    store_slot: Vec<u32>,
    col: Vec<u32>,
    scratch: Vec<u32>,
    face: Vec<u32>,
}

impl Reducer {
    fn new(n: usize) -> Self {
        Self {
            pivot_of_row: vec![NONE; n],
            negative: vec![false; n],
            store: Vec::new(),
            store_slot: vec![NONE; n],
            col: Vec::new(),
            scratch: Vec::new(),
            face: Vec::new(),
        }
    }

    fn column(&mut self, f: &Filtration, index: &SimplexIndex, j: usize) -> Result<()> {
        let s = f.vertices(j);
        self.col.clear();
        for skip in 0..s.len() {
            self.face.clear();
            self.face
                .extend(s.iter().enumerate().filter(|&(k, _)| k != skip).map(|(_, &v)| v));
            match index.lookup(&self.face) {
                Some(fi) if fi < j => self.col.push(fi as u32),
                _ => {
                    return Err(Error::InvalidInput(format!(
                        "face {:?} of {s:?} is missing or enters later",
                        self.face
                    )))
                }
            }
        }
        self.col.sort_unstable();
        while let Some(&low) = self.col.last() {
            let owner = self.pivot_of_row[low as usize];
            if owner == NONE {
                self.pivot_of_row[low as usize] = j as u32;
                self.negative[j] = true;
                self.store_slot[j] = self.store.len() as u32;
                self.store.push(std::mem::take(&mut self.col));
                return Ok(());
            }
            let other = &self.store[self.store_slot[owner as usize] as usize];
            symmetric_difference_into(&self.col, other, &mut self.scratch);
            std::mem::swap(&mut self.col, &mut self.scratch);
        }
        Ok(())
    }
}

/// Column reduction of the boundary matrix for homology degrees
/// `0..=max_degree`. With `clearing`, dimensions are processed from the top
/// down and columns of simplices already known to be positive are skipped.
pub(crate) fn reduce(f: &Filtration, max_degree: usize, clearing: bool) -> Result<Reduction> {
    let n = f.len();
    let index = SimplexIndex::build(f)?;
    let top = (max_degree + 1).min(f.max_dim());
    let mut by_dim: Vec<Vec<u32>> = vec![Vec::new(); f.max_dim() + 1];
    for i in 0..n {
        by_dim[f.dim(i)].push(i as u32);
    }
    let mut r = Reducer::new(n);

    if clearing {
        let mut cleared = vec![false; n];
        for d in (1..=top).rev() {
            for &j in &by_dim[d] {
                if !cleared[j as usize] {
                    r.column(f, &index, j as usize)?;
                }
            }
            for &j in &by_dim[d] {
                if r.negative[j as usize] {
                    let slot = r.store_slot[j as usize] as usize;
                    let low = *r.store[slot].last().expect("negative column has a pivot");
                    cleared[low as usize] = true;
                }
            }
        }
    } else {
        for j in 0..n {
            let d = f.dim(j);
            if d >= 1 && d <= top {
                r.column(f, &index, j)?;
            }
        }
    }

    let mut out = Reduction::default();
    for (row, &owner) in r.pivot_of_row.iter().enumerate() {
        if owner != NONE {
            out.pairs.push((row as u32, owner));
        }
    }
    out.pairs.sort_unstable();
    for i in 0..n {
        if f.dim(i) <= max_degree && !r.negative[i] && r.pivot_of_row[i] == NONE {
            out.essential.push(i as u32);
        }
    }
    Ok(out)
}

fn bars_from_reduction(f: &Filtration, red: &Reduction, max_degree: usize, cap: f64) -> Barcode {
    let mut bars = vec![Vec::new(); max_degree + 1];
    for &(b, d) in &red.pairs {
        let q = f.dim(b as usize);
        if q > max_degree {
            continue;
        }
        let (vb, vd) = (f.value(b as usize), f.value(d as usize));
        if vb < vd {
            bars[q].push(Bar {
                birth: vb,
                death: vd,
            });
        }
    }
    for &e in &red.essential {
        let vb = f.value(e as usize);
        if vb < cap {
            bars[f.dim(e as usize)].push(Bar {
                birth: vb,
                death: cap,
            });
        }
    }
    for list in &mut bars {
        list.sort_by(|a, b| a.birth.total_cmp(&b.birth).then(a.death.total_cmp(&b.death)));
    }
    Barcode { bars, cap }
}

/// Barcode of a filtration in degrees `0..=max_degree`, essential classes
/// capped at the largest filtration value.
pub fn compute_persistence(f: &Filtration, max_degree: usize) -> Result<Barcode> {
    compute_persistence_with_cap(f, max_degree, f.max_value())
}

/// As [`compute_persistence`] with an explicit cap `>= f.max_value()`.
pub fn compute_persistence_with_cap(f: &Filtration, max_degree: usize, cap: f64) -> Result<Barcode> {
    persistence_impl(f, max_degree, cap, true)
}

/// Reference reduction without the clearing optimization.
pub fn compute_persistence_unoptimized(f: &Filtration, max_degree: usize) -> Result<Barcode> {
    persistence_impl(f, max_degree, f.max_value(), false)
}

fn persistence_impl(f: &Filtration, max_degree: usize, cap: f64, clearing: bool) -> Result<Barcode> {
    if !cap.is_finite() || cap < f.max_value() {
        return invalid(format!(
            "cap {cap} is below the largest filtration value {}",
            f.max_value()
        ));
    }
    let red = reduce(f, max_degree, clearing)?;
    Ok(bars_from_reduction(f, &red, max_degree, cap))
}

/// Diagram of a filtration; shorthand for [`compute_persistence`] followed
/// by [`barcode_to_diagram`].
pub fn diagram_of(f: &Filtration, max_degree: usize) -> Result<PersistenceDiagram> {
    Ok(barcode_to_diagram(&compute_persistence(f, max_degree)?))
}

/// An inclusion `A ⊆ B` of face-closed complexes, looked at in degree `q`.
#[derive(Clone, Debug)]
pub struct TwoStepFiltration {
    a: SimplexSet,
    b: SimplexSet,
    q: usize,
}

impl TwoStepFiltration {
    pub fn new(a: SimplexSet, b: SimplexSet, q: usize) -> Result<Self> {
        if !a.is_subset_of(&b) {
            return invalid("first complex is not contained in the second");
        }
        Ok(Self { a, b, q })
    }
}

/// Rank of `H_q(A) -> H_q(B)` induced by inclusion.
pub fn persistent_betti(t: &TwoStepFiltration) -> Result<usize> {
    if t.a.is_empty() {
        return Ok(0);
    }
    let entries: Vec<(Simplex, f64)> = t
        .b
        .iter()
        .filter(|s| s.dim() <= t.q + 1)
        .map(|s| (s.clone(), if t.a.contains(s) { 0.0 } else { 1.0 }))
        .collect();
    let f = Filtration::new(entries)?;
    let red = reduce(&f, t.q, true)?;
    Ok(red
        .essential
        .iter()
        .filter(|&&e| f.dim(e as usize) == t.q && f.value(e as usize) == 0.0)
        .count())
}

/// Inverts a rank function by inclusion–exclusion.
///
/// `jumps` are the values `t_1 < ... < t_l` at which the module may change
/// and `samples` a sequence `s_0 <= t_1 <= s_1 <= ... <= t_l <= s_l` that
/// interleaves them. The multiplicity of `(t_i, t_j)` is
/// `β(s_{i-1}, s_j) - β(s_i, s_j) + β(s_i, s_{j-1}) - β(s_{i-1}, s_{j-1})`.
pub fn diagram_from_rank_function(
    beta: impl Fn(f64, f64) -> i64,
    jumps: &[f64],
    samples: &[f64],
    degree: usize,
    cap: f64,
) -> Result<PersistenceDiagram> {
    let l = jumps.len();
    if samples.len() != l + 1 {
        return invalid("need exactly one more sample than jump values");
    }
    for i in 0..l {
        if !(samples[i] <= jumps[i] && jumps[i] <= samples[i + 1]) {
            return invalid(format!("samples do not interleave jump value {}", jumps[i]));
        }
    }
    let mut points = Vec::new();
    // jumps[i - 1] is t_i; samples[i] is s_i.
    for i in 1..=l {
        for j in (i + 1)..=l {
            let mu = beta(samples[i - 1], samples[j]) - beta(samples[i], samples[j])
                + beta(samples[i], samples[j - 1])
                - beta(samples[i - 1], samples[j - 1]);
            if mu < 0 {
                return Err(Error::Invariant(format!(
                    "negative multiplicity {mu} at ({}, {})",
                    jumps[i - 1],
                    jumps[j - 1]
                )));
            }
            for _ in 0..mu {
                points.push(DiagramPoint::new(jumps[i - 1], jumps[j - 1]));
            }
        }
    }
    let mut by_degree = vec![Vec::new(); degree + 1];
    by_degree[degree] = points;
    PersistenceDiagram::new(by_degree, cap)
}

/// Recovers the diagram sampled by a rank grid.
///
/// Cell edges `t_k = tMin + k (tMax - tMin) / G` play the role of jump
/// values and cell midpoints interleave them, so a point whose birth and
/// death lie on cell edges (in different cells) is recovered exactly. A
/// point off the edge lattice is reported at the lower edge of its cell.
pub fn diagram_from_rank(r: &RankGrid) -> Result<PersistenceDiagram> {
    let g = r.resolution();
    // Extended sample index: 0 is -inf, k in 1..=G is midpoint k-1, G+1 is +inf.
    let beta = |xi: usize, yi: usize| -> i64 {
        if xi == 0 || yi == g + 1 {
            0
        } else {
            r.value(xi - 1, yi - 1) as i64
        }
    };
    let mut points = Vec::new();
    // t_i = edge(i - 1) for i in 1..=G+1.
    for i in 1..=(g + 1) {
        for j in (i + 1)..=(g + 1) {
            let mu = beta(i - 1, j) - beta(i, j) + beta(i, j - 1) - beta(i - 1, j - 1);
            if mu < 0 {
                return Err(Error::Invariant(format!(
                    "negative multiplicity {mu} in cell ({}, {}); not a rank function",
                    i - 1,
                    j - 1
                )));
            }
            for _ in 0..mu {
                points.push(DiagramPoint::new(r.edge(i - 1), r.edge(j - 1)));
            }
        }
    }
    let mut by_degree = vec![Vec::new(); r.degree() + 1];
    by_degree[r.degree()] = points;
    PersistenceDiagram::new(by_degree, r.cap())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complexes::{distance_matrix, sublevel_filtration, vietoris_rips, PointCloud, TimeSeries};
    use crate::rank::{rank_from_diagram, GridSpec};

    fn square() -> Filtration {
        let pc = PointCloud::new(vec![
            vec![0., 0.],
            vec![1., 0.],
            vec![1., 1.],
            vec![0., 1.],
        ])
        .unwrap();
        vietoris_rips(&distance_matrix(&pc), 2, f64::INFINITY).unwrap()
    }

    fn set(simplices: &[&[u32]]) -> SimplexSet {
        SimplexSet::closure(simplices.iter().map(|s| Simplex::new(s.to_vec()).unwrap()).collect())
    }

    fn closure(top: &[&[u32]]) -> SimplexSet {
        let mut out = Vec::new();
        for s in top {
            let n = s.len();
            for mask in 1u32..(1 << n) {
                let v: Vec<u32> = (0..n).filter(|k| mask >> k & 1 == 1).map(|k| s[k]).collect();
                out.push(Simplex::new(v).unwrap());
            }
        }
        SimplexSet::new(out).unwrap()
    }

    #[test]
    fn unit_square() {
        let bc = compute_persistence(&square(), 1).unwrap();
        let cap = 2f64.sqrt();
        assert_eq!(bc.cap(), cap);
        let h0: Vec<(f64, f64)> = bc.degree(0).iter().map(|b| (b.birth, b.death)).collect();
        assert_eq!(h0, vec![(0., 1.), (0., 1.), (0., 1.), (0., cap)]);
        let h1: Vec<(f64, f64)> = bc.degree(1).iter().map(|b| (b.birth, b.death)).collect();
        assert_eq!(h1, vec![(1.0, cap)]);
    }

    #[test]
    fn clearing_matches_standard_reduction() {
        let f = square();
        assert_eq!(
            compute_persistence(&f, 1).unwrap(),
            compute_persistence_unoptimized(&f, 1).unwrap()
        );
    }

    #[test]
    fn sublevel_examples() {
        let d = |v: Vec<f64>| {
            let bc = compute_persistence(&sublevel_filtration(&TimeSeries::new(v).unwrap()), 0).unwrap();
            bc.degree(0).iter().map(|b| (b.birth, b.death)).collect::<Vec<_>>()
        };
        assert_eq!(d(vec![1., 3., 2., 4.]), vec![(1., 4.), (2., 3.)]);
        assert_eq!(d(vec![1., 2., 3.]), vec![(1., 3.)]);
        assert!(d(vec![5., 5., 5.]).is_empty());
    }

    #[test]
    fn bar_point_conversion() {
        let d = PersistenceDiagram::from_pairs(0, &[(1.0, 3.0)]).unwrap();
        let b = diagram_to_barcode(&d);
        assert_eq!(b.degree(0), &[Bar { birth: 1.0, death: 3.0 }]);
        assert_eq!(barcode_to_diagram(&b), d);
        let empty = PersistenceDiagram::empty();
        assert!(barcode_to_diagram(&diagram_to_barcode(&empty)).is_empty());
    }

    #[test]
    fn diagram_validation() {
        assert!(PersistenceDiagram::from_pairs(0, &[(2.0, 1.0)]).is_err());
        assert!(PersistenceDiagram::from_pairs(0, &[(1.0, 1.0)]).is_err());
        let d = PersistenceDiagram::from_pairs(1, &[(0.0, 2.0)]).unwrap();
        assert!(d.with_cap(1.0).is_err());
    }

    #[test]
    fn persistent_betti_examples() {
        let boundary = set(&[&[0, 1], &[1, 2], &[0, 2]]);
        let filled = closure(&[&[0, 1, 2]]);
        let t = TwoStepFiltration::new(boundary.clone(), boundary.clone(), 1).unwrap();
        assert_eq!(persistent_betti(&t).unwrap(), 1);
        let t = TwoStepFiltration::new(boundary, filled.clone(), 1).unwrap();
        assert_eq!(persistent_betti(&t).unwrap(), 0);
        let t = TwoStepFiltration::new(set(&[&[0], &[1]]), set(&[&[0, 1]]), 0).unwrap();
        assert_eq!(persistent_betti(&t).unwrap(), 1);
        assert!(TwoStepFiltration::new(filled, set(&[&[0]]), 0).is_err());
    }

    #[test]
    fn inclusion_exclusion_on_interleaved_samples() {
        let d = PersistenceDiagram::from_pairs(0, &[(1.0, 3.0)]).unwrap();
        let beta = |x: f64, y: f64| d.rank(0, x, y) as i64;
        let out = diagram_from_rank_function(beta, &[1.0, 3.0], &[0.5, 2.0, 3.5], 0, 3.0).unwrap();
        assert_eq!(out, d);
        // Any other interleaving gives the same answer.
        let out = diagram_from_rank_function(beta, &[1.0, 3.0], &[-10.0, 1.0, 3.0], 0, 3.0).unwrap();
        assert_eq!(out, d);
    }

    #[test]
    fn empty_rank_gives_empty_diagram() {
        let spec = GridSpec::new(0.0, 1.0, 10).unwrap();
        let r = rank_from_diagram(&PersistenceDiagram::empty(), 0, spec).unwrap();
        assert!(diagram_from_rank(&r).unwrap().is_empty());
    }

    #[test]
    fn negative_multiplicity_is_an_error() {
        let beta = |x: f64, y: f64| if x < 1.0 && y < 2.0 { 1 } else { 0 };
        let r = diagram_from_rank_function(beta, &[1.0, 2.0], &[0.5, 1.6, 2.5], 0, 3.0);
        assert!(r.is_err());
    }

    #[test]
    fn grid_roundtrip_on_edges() {
        let spec = GridSpec::new(0.0, 4.0, 8).unwrap();
        let pairs = [(spec.edge(1), spec.edge(5)), (spec.edge(1), spec.edge(5)), (spec.edge(0), spec.edge(8))];
        let d = PersistenceDiagram::from_pairs(1, &pairs).unwrap();
        let r = rank_from_diagram(&d, 1, spec).unwrap();
        assert_eq!(diagram_from_rank(&r).unwrap(), d);
    }
}
