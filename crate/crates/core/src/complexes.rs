//! Filtered simplicial complexes built from point clouds and time series.
//!
//! Single-parameter filtrations are stored flat (one vertex buffer plus
//! offsets) because Rips filtrations on a few thousand points easily reach
//! millions of simplices. Bifiltration grid cells hold plain
//! [`SimplexSet`]s; those grids are small by construction.

use std::cmp::Ordering;
use std::fmt;

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};

/// A finite set of points in `R^d`, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud {
    dim: usize,
    coords: Vec<f64>,
}

impl PointCloud {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        let Some(first) = points.first() else {
            return invalid("point cloud is empty");
        };
        let dim = first.len();
        if dim == 0 {
            return invalid("points must have at least one coordinate");
        }
        let mut coords = Vec::with_capacity(points.len() * dim);
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return invalid(format!(
                    "point {i} has {} coordinates, expected {dim}",
                    p.len()
                ));
            }
            coords.extend_from_slice(p);
        }
        Self::from_flat(dim, coords)
    }

    pub fn from_flat(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 || coords.is_empty() {
            return invalid("point cloud is empty");
        }
        if coords.len() % dim != 0 {
            return invalid("coordinate buffer is not a multiple of the dimension");
        }
        if let Some(bad) = coords.iter().position(|c| !c.is_finite()) {
            return invalid(format!("non-finite coordinate in point {}", bad / dim));
        }
        Ok(Self { dim, coords })
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }
}

/// Symmetric matrix of pairwise distances with zero diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl DistanceMatrix {
    /// Validates a user supplied row-major `n x n` matrix.
    pub fn from_entries(n: usize, entries: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return invalid("distance matrix is empty");
        }
        if entries.len() != n * n {
            return invalid(format!("expected {} entries, got {}", n * n, entries.len()));
        }
        for i in 0..n {
            if entries[i * n + i] != 0.0 {
                return invalid(format!("diagonal entry ({i},{i}) is not zero"));
            }
            for j in 0..n {
                let v = entries[i * n + j];
                if !v.is_finite() || v < 0.0 {
                    return invalid(format!("entry ({i},{j}) = {v} is not a finite distance"));
                }
                if v != entries[j * n + i] {
                    return invalid(format!("matrix is not symmetric at ({i},{j})"));
                }
            }
        }
        Ok(Self { n, entries })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn max_entry(&self) -> f64 {
        self.entries.iter().copied().fold(0.0, f64::max)
    }
}

/// Pairwise Euclidean distances of a point cloud.
pub fn distance_matrix(pc: &PointCloud) -> DistanceMatrix {
    let n = pc.len();
    let mut entries = vec![0.0; n * n];
    for i in 0..n {
        let a = pc.point(i);
        for j in (i + 1)..n {
            let b = pc.point(j);
            let d = a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt();
            entries[i * n + j] = d;
            entries[j * n + i] = d;
        }
    }
    DistanceMatrix { n, entries }
}

/// A simplex as a sorted list of vertex indices.
///
/// Ordered by dimension first, then lexicographically, which is the order
/// used to break ties between simplices entering at the same value.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Simplex(Vec<u32>);

impl Simplex {
    pub fn new(mut vertices: Vec<u32>) -> Result<Self> {
        if vertices.is_empty() {
            return invalid("a simplex needs at least one vertex");
        }
        vertices.sort_unstable();
        if vertices.windows(2).any(|w| w[0] == w[1]) {
            return invalid("repeated vertex in simplex");
        }
        Ok(Self(vertices))
    }

    pub fn vertices(&self) -> &[u32] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len() - 1
    }

    /// Codimension-one faces, in lexicographic order of the removed vertex
    /// position (last vertex removed first).
    pub fn faces(&self) -> impl Iterator<Item = Simplex> + '_ {
        let k = self.0.len();
        (0..if k > 1 { k } else { 0 }).rev().map(move |skip| {
            Simplex(
                self.0
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != skip)
                    .map(|(_, &v)| v)
                    .collect(),
            )
        })
    }
}

impl Ord for Simplex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Simplex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Simplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

/// A face-closed set of simplices, kept sorted by [`Simplex`] order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SimplexSet {
    simplices: Vec<Simplex>,
}

impl SimplexSet {
    /// Builds a set from arbitrary simplices; duplicates are removed. Face
    /// closure is checked.
    pub fn new(mut simplices: Vec<Simplex>) -> Result<Self> {
        simplices.sort();
        simplices.dedup();
        let set = Self { simplices };
        for s in &set.simplices {
            for f in s.faces() {
                if !set.contains(&f) {
                    return invalid(format!("face {f} of {s} is missing"));
                }
            }
        }
        Ok(set)
    }

    /// The smallest face-closed set containing `generators`.
    pub fn closure(generators: Vec<Simplex>) -> Self {
        let mut all = Vec::new();
        let mut stack = generators;
        while let Some(s) = stack.pop() {
            stack.extend(s.faces());
            all.push(s);
        }
        all.sort();
        all.dedup();
        Self { simplices: all }
    }

    pub(crate) fn from_sorted_unchecked(simplices: Vec<Simplex>) -> Self {
        Self { simplices }
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Simplex> {
        self.simplices.iter()
    }

    pub fn contains(&self, s: &Simplex) -> bool {
        self.simplices.binary_search(s).is_ok()
    }

    pub fn is_subset_of(&self, other: &SimplexSet) -> bool {
        if self.len() > other.len() {
            return false;
        }
        let mut it = other.simplices.iter();
        'outer: for s in &self.simplices {
            for o in it.by_ref() {
                match o.cmp(s) {
                    Ordering::Less => continue,
                    Ordering::Equal => continue 'outer,
                    Ordering::Greater => return false,
                }
            }
            return false;
        }
        true
    }

    pub fn count_dim(&self, dim: usize) -> usize {
        self.simplices.iter().filter(|s| s.dim() == dim).count()
    }
}

/// A filtration: simplices sorted by `(value, dimension, vertices)`.
///
/// Every face of a simplex appears before it with a value no larger than the
/// simplex's own value.
#[derive(Clone, Debug, PartialEq)]
pub struct Filtration {
    values: Vec<f64>,
    offsets: Vec<u32>,
    vertices: Vec<u32>,
    max_dim: usize,
}

impl Filtration {
    /// Sorts and validates a list of `(simplex, value)` pairs.
    pub fn new(entries: Vec<(Simplex, f64)>) -> Result<Self> {
        let max_dim = entries.iter().map(|(s, _)| s.dim()).max().unwrap_or(0);
        let mut b = FiltrationBuilder::default();
        for (s, v) in &entries {
            b.push(s.vertices(), *v);
        }
        let f = b.finish(max_dim)?;
        f.check_face_closure()?;
        Ok(f)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_dim(&self) -> usize {
        self.max_dim
    }

    #[inline]
    pub fn value(&self, i: usize) -> f64 {
        self.values[i]
    }

    #[inline]
    pub fn vertices(&self, i: usize) -> &[u32] {
        let lo = self.offsets[i] as usize;
        let hi = self
            .offsets
            .get(i + 1)
            .map_or(self.vertices.len(), |&o| o as usize);
        &self.vertices[lo..hi]
    }

    #[inline]
    pub fn dim(&self, i: usize) -> usize {
        self.vertices(i).len() - 1
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[u32], f64)> + '_ {
        (0..self.len()).map(move |i| (self.vertices(i), self.values[i]))
    }

    /// Largest filtration value, or 0 for an empty filtration.
    pub fn max_value(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// Number of vertices referenced (largest vertex index + 1).
    pub fn vertex_count(&self) -> usize {
        self.vertices.iter().max().map_or(0, |&v| v as usize + 1)
    }

    /// Verifies that every face is present, earlier, with a value no larger.
    pub fn check_face_closure(&self) -> Result<()> {
        let index = crate::persistence::SimplexIndex::build(self)?;
        let mut face = Vec::new();
        for i in 0..self.len() {
            let s = self.vertices(i);
            if s.len() < 2 {
                continue;
            }
            for skip in 0..s.len() {
                face.clear();
                face.extend(s.iter().enumerate().filter(|&(k, _)| k != skip).map(|(_, &v)| v));
                match index.lookup(&face) {
                    Some(j) if j < i && self.values[j] <= self.values[i] => {}
                    Some(_) => {
                        return Err(Error::InvalidInput(format!(
                            "face {face:?} of {s:?} enters after it"
                        )))
                    }
                    None => {
                        return Err(Error::InvalidInput(format!(
                            "face {face:?} of {s:?} is missing"
                        )))
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Default)]
pub(crate) struct FiltrationBuilder {
    values: Vec<f64>,
    offsets: Vec<u32>,
    vertices: Vec<u32>,
}

impl FiltrationBuilder {
    pub(crate) fn push(&mut self, vertices: &[u32], value: f64) {
        self.offsets.push(self.vertices.len() as u32);
        self.vertices.extend_from_slice(vertices);
        self.values.push(value);
    }

    /// Sorts into filtration order. Vertex lists must already be sorted.
    pub(crate) fn finish(self, max_dim: usize) -> Result<Filtration> {
        let n = self.values.len();
        if let Some(i) = self.values.iter().position(|v| !v.is_finite()) {
            return invalid(format!("simplex {i} has a non-finite value"));
        }
        let span = |i: usize| {
            let lo = self.offsets[i] as usize;
            let hi = self
                .offsets
                .get(i + 1)
                .map_or(self.vertices.len(), |&o| o as usize);
            &self.vertices[lo..hi]
        };
        for i in 0..n {
            let s = span(i);
            if s.is_empty() || s.windows(2).any(|w| w[0] >= w[1]) {
                return invalid(format!("simplex {s:?} is not a sorted vertex list"));
            }
        }
        let mut order: Vec<u32> = (0..n as u32).collect();
        order.par_sort_unstable_by(|&a, &b| {
            let (a, b) = (a as usize, b as usize);
            self.values[a]
                .total_cmp(&self.values[b])
                .then_with(|| span(a).len().cmp(&span(b).len()))
                .then_with(|| span(a).cmp(span(b)))
        });
        let mut out = FiltrationBuilder {
            values: Vec::with_capacity(n),
            offsets: Vec::with_capacity(n),
            vertices: Vec::with_capacity(self.vertices.len()),
        };
        for &i in &order {
            out.push(span(i as usize), self.values[i as usize]);
        }
        for w in order.windows(2) {
            if span(w[0] as usize) == span(w[1] as usize) {
                return invalid(format!("duplicate simplex {:?}", span(w[0] as usize)));
            }
        }
        Ok(Filtration {
            values: out.values,
            offsets: out.offsets,
            vertices: out.vertices,
            max_dim,
        })
    }
}

/// Sequence of real samples, e.g. RR intervals.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeSeries {
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return invalid("a time series needs at least two samples");
        }
        if values.iter().any(|v| !v.is_finite()) {
            return invalid("time series contains a non-finite value");
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Adjacency restricted to `allowed` vertices: for each vertex, the sorted
/// list of higher-indexed neighbours within `scale`.
fn upper_neighbours(dm: &DistanceMatrix, scale: f64, allowed: &[bool]) -> Vec<Vec<u32>> {
    let n = dm.len();
    (0..n)
        .into_par_iter()
        .map(|i| {
            if !allowed[i] {
                return Vec::new();
            }
            ((i + 1)..n)
                .filter(|&j| allowed[j] && dm.get(i, j) <= scale)
                .map(|j| j as u32)
                .collect()
        })
        .collect()
}

/// Enumerates all cliques of dimension `<= max_dim` among allowed vertices,
/// reporting each with its diameter (vertices at 0).
pub(crate) fn for_each_clique(
    dm: &DistanceMatrix,
    scale: f64,
    max_dim: usize,
    allowed: &[bool],
    mut emit: impl FnMut(&[u32], f64),
) {
    let nbrs = upper_neighbours(dm, scale, allowed);
    let mut stack: Vec<u32> = Vec::with_capacity(max_dim + 1);
    for v in 0..dm.len() {
        if !allowed[v] {
            continue;
        }
        stack.clear();
        stack.push(v as u32);
        emit(&stack, 0.0);
        if max_dim >= 1 {
            extend_clique(dm, &nbrs, max_dim, &mut stack, 0.0, &nbrs[v], &mut emit);
        }
    }
}

fn extend_clique(
    dm: &DistanceMatrix,
    nbrs: &[Vec<u32>],
    max_dim: usize,
    stack: &mut Vec<u32>,
    value: f64,
    candidates: &[u32],
    emit: &mut impl FnMut(&[u32], f64),
) {
    for (idx, &u) in candidates.iter().enumerate() {
        let v = stack
            .iter()
            .map(|&w| dm.get(w as usize, u as usize))
            .fold(value, f64::max);
        stack.push(u);
        emit(stack, v);
        if stack.len() <= max_dim {
            let next: Vec<u32> = intersect_sorted(&candidates[idx + 1..], &nbrs[u as usize]);
            if !next.is_empty() {
                extend_clique(dm, nbrs, max_dim, stack, v, &next, emit);
            }
        }
        stack.pop();
    }
}

fn intersect_sorted(a: &[u32], b: &[u32]) -> Vec<u32> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// Vietoris–Rips filtration: each simplex enters at its diameter, vertices
/// at 0. Only simplices of dimension `<= max_dim` and value `<= max_scale`
/// are kept; `max_scale` may be infinite.
pub fn vietoris_rips(dm: &DistanceMatrix, max_dim: usize, max_scale: f64) -> Result<Filtration> {
    if max_scale.is_nan() || max_scale <= 0.0 {
        return invalid("max_scale must be positive");
    }
    let allowed = vec![true; dm.len()];
    let mut b = FiltrationBuilder::default();
    for_each_clique(dm, max_scale, max_dim, &allowed, |s, v| b.push(s, v));
    b.finish(max_dim)
}

/// Lower-star filtration of the piecewise-linear interpolation of a series:
/// vertex `i` at `ts[i]`, edge `(i, i+1)` at `max(ts[i], ts[i+1])`.
pub fn sublevel_filtration(ts: &TimeSeries) -> Filtration {
    let v = ts.values();
    let mut b = FiltrationBuilder::default();
    for (i, &x) in v.iter().enumerate() {
        b.push(&[i as u32], x);
    }
    for i in 0..v.len() - 1 {
        b.push(&[i as u32, i as u32 + 1], v[i].max(v[i + 1]));
    }
    b.finish(1).expect("lower-star values are finite and sorted")
}

fn clique_set(dm: &DistanceMatrix, scale: f64, max_dim: usize, allowed: &[bool]) -> SimplexSet {
    let mut simplices = Vec::new();
    for_each_clique(dm, scale, max_dim, allowed, |s, _| {
        simplices.push(Simplex(s.to_vec()))
    });
    simplices.sort();
    SimplexSet::from_sorted_unchecked(simplices)
}

/// Rips complex at scale `s` on the vertices whose degree in the scale-`s`
/// neighbourhood graph is at least `k`.
pub fn degree_rips_complex(dm: &DistanceMatrix, s: f64, k: usize, max_dim: usize) -> SimplexSet {
    let n = dm.len();
    let allowed: Vec<bool> = (0..n)
        .map(|i| (0..n).filter(|&j| j != i && dm.get(i, j) <= s).count() >= k)
        .collect();
    clique_set(dm, s, max_dim, &allowed)
}

/// Rips complex at scale `s` on the points with `z <= h`. Needs 3-D points.
pub fn height_rips_complex(pc: &PointCloud, s: f64, h: f64, max_dim: usize) -> Result<SimplexSet> {
    if pc.dim() != 3 {
        return invalid(format!("height-Rips needs 3-D points, got dimension {}", pc.dim()));
    }
    let allowed: Vec<bool> = pc.points().map(|p| p[2] <= h).collect();
    Ok(clique_set(&distance_matrix(pc), s, max_dim, &allowed))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BifiltrationKind {
    DegreeRips,
    HeightRips,
}

impl std::str::FromStr for BifiltrationKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "degree-rips" => Ok(Self::DegreeRips),
            "height-rips" => Ok(Self::HeightRips),
            other => Err(Error::Parse(format!("unknown bifiltration kind {other:?}"))),
        }
    }
}

/// Input accepted by [`bifiltration_grid`].
#[derive(Clone, Copy, Debug)]
pub enum BifiltrationInput<'a> {
    Cloud(&'a PointCloud),
    Distances(&'a DistanceMatrix),
}

/// Complexes on a finite grid of a two-parameter filtration.
///
/// Grid indices are monotone: `(i, j) <= (i', j')` componentwise implies
/// `complex_at(i, j) ⊆ complex_at(i', j')`. For degree–Rips the second axis
/// stores degree thresholds in *decreasing* order, so a larger index means a
/// lower threshold and a larger complex.
#[derive(Clone, Debug)]
pub struct BifiltrationGrid {
    kind: BifiltrationKind,
    axis1: Vec<f64>,
    axis2: Vec<f64>,
    cells: Vec<SimplexSet>,
}

impl BifiltrationGrid {
    pub fn kind(&self) -> BifiltrationKind {
        self.kind
    }

    /// Scale values, ascending.
    pub fn axis1(&self) -> &[f64] {
        &self.axis1
    }

    /// Second parameter in index order (heights ascending, degrees descending).
    pub fn axis2(&self) -> &[f64] {
        &self.axis2
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.axis1.len(), self.axis2.len())
    }

    pub fn complex_at(&self, i: usize, j: usize) -> &SimplexSet {
        &self.cells[i * self.axis2.len() + j]
    }

    fn check_monotone(&self) -> Result<()> {
        let (n1, n2) = self.shape();
        for i in 0..n1 {
            for j in 0..n2 {
                let c = self.complex_at(i, j);
                if i + 1 < n1 && !c.is_subset_of(self.complex_at(i + 1, j)) {
                    return Err(Error::Invariant(format!(
                        "grid cell ({i},{j}) is not contained in ({},{j})",
                        i + 1
                    )));
                }
                if j + 1 < n2 && !c.is_subset_of(self.complex_at(i, j + 1)) {
                    return Err(Error::Invariant(format!(
                        "grid cell ({i},{j}) is not contained in ({i},{})",
                        j + 1
                    )));
                }
            }
        }
        Ok(())
    }
}

fn check_ascending(axis: &[f64], name: &str) -> Result<()> {
    if axis.is_empty() {
        return invalid(format!("{name} is empty"));
    }
    if axis.iter().any(|v| !v.is_finite() && *v != f64::INFINITY) {
        return invalid(format!("{name} contains NaN or -inf"));
    }
    if axis.windows(2).any(|w| w[0] >= w[1]) {
        return invalid(format!("{name} must be strictly ascending"));
    }
    Ok(())
}

/// Evaluates a degree–Rips or height–Rips bifiltration on a grid.
///
/// Both axes are given ascending. For degree–Rips, `axis2` holds degree
/// thresholds (non-negative integers) and is reversed internally.
pub fn bifiltration_grid(
    input: BifiltrationInput<'_>,
    kind: BifiltrationKind,
    axis1: &[f64],
    axis2: &[f64],
    max_dim: usize,
) -> Result<BifiltrationGrid> {
    check_ascending(axis1, "axis1")?;
    check_ascending(axis2, "axis2")?;
    let (axis2, cells) = match kind {
        BifiltrationKind::DegreeRips => {
            if axis2.iter().any(|&k| k < 0.0 || k.fract() != 0.0 || !k.is_finite()) {
                return invalid("degree thresholds must be non-negative integers");
            }
            let owned;
            let dm = match input {
                BifiltrationInput::Distances(dm) => dm,
                BifiltrationInput::Cloud(pc) => {
                    owned = distance_matrix(pc);
                    &owned
                }
            };
            let degrees: Vec<f64> = axis2.iter().rev().copied().collect();
            let cells: Vec<SimplexSet> = (0..axis1.len() * degrees.len())
                .into_par_iter()
                .map(|c| {
                    let (i, j) = (c / degrees.len(), c % degrees.len());
                    degree_rips_complex(dm, axis1[i], degrees[j] as usize, max_dim)
                })
                .collect();
            (degrees, cells)
        }
        BifiltrationKind::HeightRips => {
            let BifiltrationInput::Cloud(pc) = input else {
                return invalid("height-Rips needs point coordinates, not distances");
            };
            if pc.dim() != 3 {
                return invalid(format!(
                    "height-Rips needs 3-D points, got dimension {}",
                    pc.dim()
                ));
            }
            let dm = distance_matrix(pc);
            let cells: Vec<SimplexSet> = (0..axis1.len() * axis2.len())
                .into_par_iter()
                .map(|c| {
                    let (i, j) = (c / axis2.len(), c % axis2.len());
                    let allowed: Vec<bool> = pc.points().map(|p| p[2] <= axis2[j]).collect();
                    clique_set(&dm, axis1[i], max_dim, &allowed)
                })
                .collect();
            (axis2.to_vec(), cells)
        }
    };
    let grid = BifiltrationGrid {
        kind,
        axis1: axis1.to_vec(),
        axis2,
        cells,
    };
    grid.check_monotone()?;
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cloud(points: &[&[f64]]) -> PointCloud {
        PointCloud::new(points.iter().map(|p| p.to_vec()).collect()).unwrap()
    }

    fn set(simplices: &[&[u32]]) -> SimplexSet {
        SimplexSet::closure(simplices.iter().map(|s| Simplex::new(s.to_vec()).unwrap()).collect())
    }

    fn triangle_at_unit_distance() -> DistanceMatrix {
        DistanceMatrix::from_entries(3, vec![0., 1., 1., 1., 0., 1., 1., 1., 0.]).unwrap()
    }

    #[test]
    fn identical_points_have_zero_distance() {
        let dm = distance_matrix(&cloud(&[&[1.0, 2.0], &[1.0, 2.0]]));
        assert_eq!(dm.get(0, 1), 0.0);
        assert_eq!(dm.max_entry(), 0.0);
    }

    #[test]
    fn three_four_five() {
        let dm = distance_matrix(&cloud(&[&[0.0, 0.0], &[3.0, 4.0]]));
        assert_eq!(dm.get(0, 1), 5.0);
        assert_eq!(dm.get(1, 0), 5.0);
    }

    #[test]
    fn distance_matrix_matches_double_loop() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let pts: Vec<Vec<f64>> = (0..10)
            .map(|_| (0..3).map(|_| rng.random_range(-5.0..5.0)).collect())
            .collect();
        let dm = distance_matrix(&PointCloud::new(pts.clone()).unwrap());
        for i in 0..10 {
            for j in 0..10 {
                let mut acc = 0.0;
                for k in 0..3 {
                    acc += (pts[i][k] - pts[j][k]).powi(2);
                }
                assert!((dm.get(i, j) - acc.sqrt()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_bad_clouds() {
        assert!(PointCloud::new(vec![]).is_err());
        assert!(PointCloud::new(vec![vec![1.0], vec![1.0, 2.0]]).is_err());
        assert!(PointCloud::new(vec![vec![f64::NAN]]).is_err());
        assert!(DistanceMatrix::from_entries(2, vec![0., 1., 2., 0.]).is_err());
    }

    #[test]
    fn edge_enters_at_distance() {
        let dm = distance_matrix(&cloud(&[&[0.0], &[2.5]]));
        let f = vietoris_rips(&dm, 1, f64::INFINITY).unwrap();
        assert_eq!(f.len(), 3);
        assert_eq!(f.vertices(2), &[0, 1]);
        assert_eq!(f.value(2), 2.5);
        assert_eq!(f.value(0), 0.0);
    }

    #[test]
    fn rips_respects_dimension_and_scale() {
        let dm = distance_matrix(&cloud(&[&[0., 0.], &[1., 0.], &[0., 1.], &[1., 1.]]));
        let f = vietoris_rips(&dm, 2, 1.0).unwrap();
        // 4 vertices and the 4 sides; diagonals (sqrt 2) excluded.
        assert_eq!(f.len(), 8);
        let full = vietoris_rips(&dm, 2, 10.0).unwrap();
        assert_eq!(full.len(), 4 + 6 + 4);
        assert_eq!(full.max_value(), 2f64.sqrt());
        full.check_face_closure().unwrap();
    }

    #[test]
    fn filtration_rejects_missing_face() {
        let s = |v: &[u32]| Simplex::new(v.to_vec()).unwrap();
        let r = Filtration::new(vec![(s(&[0]), 0.0), (s(&[0, 1]), 1.0)]);
        assert!(r.is_err());
        let r = Filtration::new(vec![(s(&[0]), 0.0), (s(&[1]), 2.0), (s(&[0, 1]), 1.0)]);
        assert!(r.is_err());
    }

    #[test]
    fn sublevel_values_are_lower_star() {
        let f = sublevel_filtration(&TimeSeries::new(vec![1.0, 3.0, 2.0, 4.0]).unwrap());
        let edges: Vec<_> = f.iter().filter(|(s, _)| s.len() == 2).collect();
        assert_eq!(edges.len(), 3);
        assert!(edges.contains(&(&[0u32, 1][..], 3.0)));
        assert!(edges.contains(&(&[1u32, 2][..], 3.0)));
        assert!(edges.contains(&(&[2u32, 3][..], 4.0)));
        assert!(TimeSeries::new(vec![1.0]).is_err());
    }

    #[test]
    fn degree_rips_examples() {
        let dm = triangle_at_unit_distance();
        let full = degree_rips_complex(&dm, 1.0, 2, 2);
        assert_eq!(full, set(&[&[0, 1, 2]]));
        assert!(degree_rips_complex(&dm, 1.0, 3, 2).is_empty());
        let pts = cloud(&[&[0., 0.], &[0.3, 0.], &[2., 1.], &[0., 0.9]]);
        let dm = distance_matrix(&pts);
        let allowed = vec![true; 4];
        assert_eq!(degree_rips_complex(&dm, 1.0, 0, 2), clique_set(&dm, 1.0, 2, &allowed));
    }

    #[test]
    fn height_rips_examples() {
        let pc = cloud(&[&[0., 0., 0.], &[1., 0., 1.], &[0., 1., 2.], &[1., 1., 3.]]);
        assert!(height_rips_complex(&pc, 10.0, -1.0, 2).unwrap().is_empty());
        let all = height_rips_complex(&pc, 10.0, 5.0, 2).unwrap();
        assert_eq!(all.len(), 4 + 6 + 4);
        let two = height_rips_complex(&pc, f64::INFINITY, 1.5, 2).unwrap();
        assert_eq!(two, set(&[&[0, 1]]));
        assert!(height_rips_complex(&cloud(&[&[0., 0.]]), 1.0, 1.0, 1).is_err());
    }

    #[test]
    fn degree_rips_grid_is_a_chain() {
        let dm = triangle_at_unit_distance();
        let grid = bifiltration_grid(
            BifiltrationInput::Distances(&dm),
            BifiltrationKind::DegreeRips,
            &[1.0],
            &[0.0, 2.0, 3.0],
            2,
        )
        .unwrap();
        assert_eq!(grid.axis2(), &[3.0, 2.0, 0.0]);
        assert!(grid.complex_at(0, 0).is_empty());
        assert_eq!(grid.complex_at(0, 1), &set(&[&[0, 1, 2]]));
        assert_eq!(grid.complex_at(0, 2), &set(&[&[0, 1, 2]]));
    }

    #[test]
    fn single_cell_height_grid_is_rips() {
        let pc = cloud(&[&[0., 0., 0.], &[1., 0., 1.], &[0., 1., 2.]]);
        let grid = bifiltration_grid(
            BifiltrationInput::Cloud(&pc),
            BifiltrationKind::HeightRips,
            &[1.2],
            &[10.0],
            2,
        )
        .unwrap();
        let dm = distance_matrix(&pc);
        assert_eq!(grid.complex_at(0, 0), &clique_set(&dm, 1.2, 2, &[true; 3]));
    }

    #[test]
    fn degree_zero_columns_equal_rips() {
        let pc = cloud(&[&[0., 0.], &[1., 0.], &[0., 1.5], &[2., 2.], &[0.4, 0.4]]);
        let dm = distance_matrix(&pc);
        let scales = [0.5, 1.0, 1.6, 3.0];
        let grid = bifiltration_grid(
            BifiltrationInput::Cloud(&pc),
            BifiltrationKind::DegreeRips,
            &scales,
            &[0.0],
            2,
        )
        .unwrap();
        for (i, &s) in scales.iter().enumerate() {
            assert_eq!(grid.complex_at(i, 0), &clique_set(&dm, s, 2, &[true; 5]));
        }
    }

    #[test]
    fn unsorted_axes_are_rejected() {
        let dm = triangle_at_unit_distance();
        let r = bifiltration_grid(
            BifiltrationInput::Distances(&dm),
            BifiltrationKind::DegreeRips,
            &[1.0, 0.5],
            &[0.0],
            1,
        );
        assert!(r.is_err());
    }

    #[test]
    fn subset_check() {
        let a = set(&[&[0, 1]]);
        let b = set(&[&[0, 1, 2]]);
        assert!(a.is_subset_of(&b));
        assert!(!b.is_subset_of(&a));
        assert!(SimplexSet::default().is_subset_of(&a));
    }
}
