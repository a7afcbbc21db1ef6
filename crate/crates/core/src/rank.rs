//! Rank functions sampled on triangular grids, truncated rank functions,
//! rank invariants of bifiltrations and persistence landscapes.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complexes::BifiltrationGrid;
use crate::error::{invalid, Error, Result};
use crate::persistence::{persistent_betti, PersistenceDiagram, TwoStepFiltration};

/// Geometry of a `G x G` grid over `[tMin, tMax]^2`.
///
/// Cell `(i, j)` covers `[t_i, t_{i+1}] x [t_j, t_{j+1}]` with
/// `t_k = tMin + k (tMax - tMin) / G`; it is evaluated at its midpoint.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub t_min: f64,
    pub t_max: f64,
    pub resolution: usize,
}

impl GridSpec {
    pub fn new(t_min: f64, t_max: f64, resolution: usize) -> Result<Self> {
        if !(t_min.is_finite() && t_max.is_finite() && t_min < t_max) {
            return invalid(format!("grid range [{t_min}, {t_max}] is empty"));
        }
        if resolution < 2 {
            return invalid("grid resolution must be at least 2");
        }
        Ok(Self {
            t_min,
            t_max,
            resolution,
        })
    }

    /// `tMin = 0`, `tMax = cap`, `G = 100`.
    pub fn default_for(d: &PersistenceDiagram) -> Result<Self> {
        Self::new(0.0_f64.min(d.min_birth()), d.cap(), 100)
    }

    pub fn step(&self) -> f64 {
        (self.t_max - self.t_min) / self.resolution as f64
    }

    #[inline]
    pub fn edge(&self, k: usize) -> f64 {
        if k == self.resolution {
            return self.t_max;
        }
        self.t_min + (self.t_max - self.t_min) * k as f64 / self.resolution as f64
    }

    #[inline]
    pub fn mid(&self, k: usize) -> f64 {
        self.t_min + (self.t_max - self.t_min) * (k as f64 + 0.5) / self.resolution as f64
    }

    pub fn mids(&self) -> Vec<f64> {
        (0..self.resolution).map(|k| self.mid(k)).collect()
    }

    /// Area of cell `(i, j)` lying strictly above the line `y = x + c`.
    pub fn cell_area_above(&self, i: usize, j: usize, c: f64) -> f64 {
        let h = self.step();
        // Shifted so that the cell's lower-left corner is the origin.
        rect_area_above(0.0, h, 0.0, h, c - (j as f64 - i as f64) * h)
    }
}

/// Area of `[x0, x1] x [y0, y1]` lying above the line `y = x + c`.
pub fn rect_area_above(x0: f64, x1: f64, y0: f64, y1: f64, c: f64) -> f64 {
    // Integrate min(H, max(0, a - x)) over [x0, x1] with a = y1 - c.
    let h = y1 - y0;
    let a = y1 - c;
    let full = (a - h).clamp(x0, x1) - x0;
    let (lo, hi) = ((a - h).clamp(x0, x1), a.clamp(x0, x1));
    // On [lo, hi] the integrand is a - x.
    let ramp = (a - lo) * (a - lo) / 2.0 - (a - hi) * (a - hi) / 2.0;
    full * h + ramp
}

/// A rank function `β(x, y)` sampled at cell midpoints, with the area of
/// each cell inside the (possibly truncated) domain as quadrature weight.
#[derive(Clone, Debug, PartialEq)]
pub struct RankGrid {
    spec: GridSpec,
    degree: usize,
    cap: f64,
    truncation: f64,
    values: Vec<u32>,
    weights: Vec<f64>,
}

impl RankGrid {
    /// Assembles a grid from row-major values (`values[i * G + j]`, `x`
    /// index `i`, `y` index `j`). Cells below the diagonal must be zero.
    pub fn from_values(spec: GridSpec, degree: usize, cap: f64, values: Vec<u32>) -> Result<Self> {
        let g = spec.resolution;
        if values.len() != g * g {
            return invalid(format!("expected {} grid values, got {}", g * g, values.len()));
        }
        for i in 0..g {
            for j in 0..i {
                if values[i * g + j] != 0 {
                    return invalid(format!("cell ({i}, {j}) lies below the diagonal but is nonzero"));
                }
            }
        }
        Ok(Self {
            spec,
            degree,
            cap,
            truncation: 0.0,
            weights: weights(&spec, 0.0),
            values,
        })
    }

    pub fn spec(&self) -> GridSpec {
        self.spec
    }

    pub fn resolution(&self) -> usize {
        self.spec.resolution
    }

    pub fn edge(&self, k: usize) -> f64 {
        self.spec.edge(k)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn cap(&self) -> f64 {
        self.cap
    }

    /// The `δ` of a truncated grid, 0 otherwise.
    pub fn truncation(&self) -> f64 {
        self.truncation
    }

    #[inline]
    pub fn value(&self, i: usize, j: usize) -> u32 {
        self.values[i * self.spec.resolution + j]
    }

    #[inline]
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.spec.resolution + j]
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Values as reals, row-major.
    pub fn to_row(&self) -> Vec<f64> {
        self.values.iter().map(|&v| v as f64).collect()
    }

    /// Rank at an arbitrary `(x, y)` inside the grid, read from the cell
    /// containing it.
    pub fn at(&self, x: f64, y: f64) -> Option<u32> {
        let cell = |t: f64| {
            if t < self.spec.t_min || t > self.spec.t_max {
                return None;
            }
            let k = ((t - self.spec.t_min) / self.spec.step()) as usize;
            Some(k.min(self.spec.resolution - 1))
        };
        let (i, j) = (cell(x)?, cell(y)?);
        (i <= j).then(|| self.value(i, j))
    }

    /// `∫ β dω` over the grid.
    pub fn mass(&self) -> f64 {
        self.values
            .iter()
            .zip(&self.weights)
            .map(|(&v, &w)| v as f64 * w)
            .sum()
    }

    pub(crate) fn same_geometry(&self, other: &Self) -> Result<()> {
        if self.spec != other.spec {
            return Err(Error::GridMismatch(format!(
                "grids differ: {:?} vs {:?}",
                self.spec, other.spec
            )));
        }
        if self.truncation != other.truncation {
            return Err(Error::GridMismatch(format!(
                "truncations differ: {} vs {}",
                self.truncation, other.truncation
            )));
        }
        Ok(())
    }
}

fn weights(spec: &GridSpec, c: f64) -> Vec<f64> {
    let g = spec.resolution;
    let mut w = vec![0.0; g * g];
    for i in 0..g {
        for j in i..g {
            w[i * g + j] = spec.cell_area_above(i, j, c);
        }
    }
    w
}

/// Samples the rank function of degree `degree` of a diagram: a point
/// `(b, d)` counts at `(x, y)` iff `b <= x` and `y < d`.
pub fn rank_from_diagram(d: &PersistenceDiagram, degree: usize, spec: GridSpec) -> Result<RankGrid> {
    if d.cap() > spec.t_max {
        return Err(Error::Precondition(format!(
            "diagram cap {} exceeds the grid's upper bound {}",
            d.cap(),
            spec.t_max
        )));
    }
    let g = spec.resolution;
    let mids = spec.mids();
    // counts[i0 * g + j1]: points first counted in column i0, last in row j1.
    let mut counts = vec![0u32; g * g];
    for p in d.degree(degree) {
        let i0 = mids.partition_point(|&m| m < p.birth);
        let j_end = mids.partition_point(|&m| m < p.death);
        if i0 < g && j_end > 0 {
            counts[i0 * g + j_end - 1] += 1;
        }
    }
    // value(i, j) = sum over i' <= i, j' >= j of counts.
    let mut values = vec![0u32; g * g];
    for i in 0..g {
        let mut run = 0;
        for j in (0..g).rev() {
            run += counts[i * g + j];
            let above = if i > 0 { values[(i - 1) * g + j] } else { 0 };
            values[i * g + j] = run + above;
        }
    }
    for i in 0..g {
        for j in 0..i {
            values[i * g + j] = 0;
        }
    }
    Ok(RankGrid {
        spec,
        degree,
        cap: d.cap(),
        truncation: 0.0,
        weights: weights(&spec, 0.0),
        values,
    })
}

/// Restricts a rank function to `{y > x + δ}`. Cells entirely outside are
/// zeroed; cells cut by the line keep their value with their weight reduced
/// to the surviving area.
pub fn truncate(r: &RankGrid, delta: f64) -> Result<RankGrid> {
    if !(delta > 0.0 && delta.is_finite()) {
        return invalid(format!("truncation δ = {delta} must be positive"));
    }
    let w = weights(&r.spec, delta);
    let values = r
        .values
        .iter()
        .zip(&w)
        .map(|(&v, &wt)| if wt > 0.0 { v } else { 0 })
        .collect();
    Ok(RankGrid {
        spec: r.spec,
        degree: r.degree,
        cap: r.cap,
        truncation: delta,
        values,
        weights: w,
    })
}

/// Ranks of all maps between comparable cells of a bifiltration grid.
#[derive(Clone, Debug, PartialEq)]
pub struct BiRankGrid {
    axis1: Vec<f64>,
    axis2: Vec<f64>,
    degree: usize,
    /// Indexed by `(a, b)` with `a = i * n2 + j`; `u32::MAX` if incomparable.
    values: Vec<u32>,
}

impl BiRankGrid {
    pub fn axis1(&self) -> &[f64] {
        &self.axis1
    }

    pub fn axis2(&self) -> &[f64] {
        &self.axis2
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    fn cells(&self) -> usize {
        self.axis1.len() * self.axis2.len()
    }

    /// Rank of the map from cell `from` to cell `to`, `None` unless
    /// `from ⪯ to`.
    pub fn get(&self, from: (usize, usize), to: (usize, usize)) -> Option<usize> {
        let n2 = self.axis2.len();
        if from.0 >= self.axis1.len() || to.0 >= self.axis1.len() || from.1 >= n2 || to.1 >= n2 {
            return None;
        }
        let v = self.values[(from.0 * n2 + from.1) * self.cells() + to.0 * n2 + to.1];
        (v != u32::MAX).then_some(v as usize)
    }

    /// All comparable pairs with their ranks, in row-major order.
    pub fn pairs(&self) -> impl Iterator<Item = ((usize, usize), (usize, usize), usize)> + '_ {
        let n2 = self.axis2.len();
        let c = self.cells();
        self.values.iter().enumerate().filter_map(move |(k, &v)| {
            (v != u32::MAX).then(|| {
                let (a, b) = (k / c, k % c);
                ((a / n2, a % n2), (b / n2, b % n2), v as usize)
            })
        })
    }

    pub(crate) fn from_pairs(
        axis1: Vec<f64>,
        axis2: Vec<f64>,
        degree: usize,
        pairs: &[((usize, usize), (usize, usize), usize)],
    ) -> Result<Self> {
        let n2 = axis2.len();
        let c = axis1.len() * n2;
        let mut values = vec![u32::MAX; c * c];
        for &(a, b, v) in pairs {
            if a.0 > b.0 || a.1 > b.1 || b.0 >= axis1.len() || b.1 >= n2 {
                return invalid(format!("pair {a:?} -> {b:?} is not comparable on the grid"));
            }
            values[(a.0 * n2 + a.1) * c + b.0 * n2 + b.1] = v as u32;
        }
        Ok(Self {
            axis1,
            axis2,
            degree,
            values,
        })
    }
}

/// Persistent Betti numbers for every comparable pair of grid cells.
pub fn rank_invariant(bg: &BifiltrationGrid, q: usize) -> Result<BiRankGrid> {
    let (n1, n2) = bg.shape();
    let cells: Vec<(usize, usize)> = (0..n1).flat_map(|i| (0..n2).map(move |j| (i, j))).collect();
    let pairs: Vec<_> = cells
        .iter()
        .flat_map(|&a| {
            cells
                .iter()
                .filter(move |b| a.0 <= b.0 && a.1 <= b.1)
                .map(move |&b| (a, b))
        })
        .collect();
    let ranks = pairs
        .par_iter()
        .map(|&(a, b)| {
            let t = TwoStepFiltration::new(
                bg.complex_at(a.0, a.1).clone(),
                bg.complex_at(b.0, b.1).clone(),
                q,
            )?;
            Ok((a, b, persistent_betti(&t)?))
        })
        .collect::<Result<Vec<_>>>()?;
    BiRankGrid::from_pairs(bg.axis1().to_vec(), bg.axis2().to_vec(), q, &ranks)
}

/// The `k`-th persistence landscape sampled on a grid of `t` values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Landscape {
    pub k: usize,
    pub ts: Vec<f64>,
    pub values: Vec<f64>,
}

/// `n` equally spaced values from `t_min` to `t_max` inclusive.
pub fn landscape_grid(t_min: f64, t_max: f64, n: usize) -> Result<Vec<f64>> {
    if n < 2 || !(t_min < t_max) {
        return invalid("landscape grid needs at least two distinct values");
    }
    Ok((0..n)
        .map(|k| {
            if k == n - 1 {
                t_max
            } else {
                t_min + (t_max - t_min) * k as f64 / (n - 1) as f64
            }
        })
        .collect())
}

/// `λ_1, ..., λ_kMax`: `λ_k(t)` is the `k`-th largest tent value
/// `max(0, min(t - b, d - t))` over the points of the diagram, equivalently
/// the largest `m` with `β(t - m, t + m) >= k`.
pub fn landscape(d: &PersistenceDiagram, degree: usize, k_max: usize, ts: &[f64]) -> Result<Vec<Landscape>> {
    if k_max == 0 {
        return invalid("kMax must be at least 1");
    }
    let pts = d.degree(degree);
    let mut out: Vec<Landscape> = (1..=k_max)
        .map(|k| Landscape {
            k,
            ts: ts.to_vec(),
            values: vec![0.0; ts.len()],
        })
        .collect();
    let mut tents = Vec::with_capacity(pts.len());
    for (n, &t) in ts.iter().enumerate() {
        tents.clear();
        tents.extend(
            pts.iter()
                .map(|p| (t - p.birth).min(p.death - t))
                .filter(|&v| v > 0.0),
        );
        tents.sort_unstable_by(|a, b| b.total_cmp(a));
        for (k, &v) in tents.iter().take(k_max).enumerate() {
            out[k].values[n] = v;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complexes::{bifiltration_grid, BifiltrationInput, BifiltrationKind, DistanceMatrix};

    fn bar(b: f64, d: f64) -> PersistenceDiagram {
        PersistenceDiagram::from_pairs(0, &[(b, d)]).unwrap()
    }

    #[test]
    fn pointwise_values() {
        let d = bar(0.0, 2.0);
        let r = rank_from_diagram(&d, 0, GridSpec::new(0.0, 2.0, 2).unwrap()).unwrap();
        assert_eq!(r.value(0, 1), 1);
        let r = rank_from_diagram(&d, 0, GridSpec::new(0.0, 3.0, 3).unwrap()).unwrap();
        assert_eq!(r.value(0, 2), 0);
        assert_eq!(r.at(0.5, 2.5), Some(0));
        assert_eq!(r.at(0.5, 1.5), Some(1));
    }

    #[test]
    fn empty_diagram_is_zero() {
        let r = rank_from_diagram(&PersistenceDiagram::empty(), 1, GridSpec::new(0.0, 1.0, 16).unwrap()).unwrap();
        assert!(r.values().iter().all(|&v| v == 0));
    }

    #[test]
    fn triangle_mass() {
        let d = bar(0.0, 2.0);
        let r = rank_from_diagram(&d, 0, GridSpec::default_for(&d).unwrap()).unwrap();
        assert!((r.mass() - 2.0).abs() < 1e-12);
        let weight_sum: f64 = r.weights().iter().sum();
        assert!((weight_sum - 2.0).abs() < 1e-12);
    }

    #[test]
    fn truncation_examples() {
        let d = bar(0.0, 2.0);
        let r = rank_from_diagram(&d, 0, GridSpec::default_for(&d).unwrap()).unwrap();
        assert_eq!(truncate(&r, 2.0).unwrap().mass(), 0.0);
        assert!((truncate(&r, 1.0).unwrap().mass() - 0.5).abs() < 1e-12);
        let thin = truncate(&r, 1e-6).unwrap();
        let g = r.resolution();
        for i in 0..g {
            for j in (i + 2)..g {
                assert_eq!(thin.value(i, j), r.value(i, j));
                assert_eq!(thin.weight(i, j), r.weight(i, j));
            }
        }
        assert!(truncate(&r, 0.0).is_err());
    }

    #[test]
    fn cap_beyond_grid_is_rejected() {
        let d = bar(0.0, 2.0);
        assert!(rank_from_diagram(&d, 0, GridSpec::new(0.0, 1.0, 4).unwrap()).is_err());
    }

    #[test]
    fn landscape_examples() {
        let ts = landscape_grid(0.0, 2.0, 21).unwrap();
        let l = landscape(&bar(0.0, 2.0), 0, 2, &ts).unwrap();
        assert_eq!(l[0].values[10], 1.0);
        assert_eq!(l[0].values[0], 0.0);
        assert!(l[1].values.iter().all(|&v| v == 0.0));
        let twice = PersistenceDiagram::from_pairs(0, &[(0.0, 2.0), (0.0, 2.0)]).unwrap();
        let l = landscape(&twice, 0, 2, &ts).unwrap();
        assert_eq!(l[0].values, l[1].values);
        let l = landscape(&PersistenceDiagram::empty(), 0, 3, &ts).unwrap();
        assert!(l.iter().all(|x| x.values.iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn degree_rips_rank_invariant() {
        let dm = DistanceMatrix::from_entries(3, vec![0., 1., 1., 1., 0., 1., 1., 1., 0.]).unwrap();
        let bg = bifiltration_grid(
            BifiltrationInput::Distances(&dm),
            BifiltrationKind::DegreeRips,
            &[1.0],
            &[0.0, 2.0, 3.0],
            2,
        )
        .unwrap();
        let r = rank_invariant(&bg, 0).unwrap();
        // axis2 index 0 is k = 3 (empty), then k = 2, then k = 0.
        assert_eq!(r.get((0, 0), (0, 1)), Some(0));
        assert_eq!(r.get((0, 1), (0, 2)), Some(1));
        assert_eq!(r.get((0, 1), (0, 1)), Some(1));
        assert_eq!(r.get((0, 2), (0, 1)), None);
    }
}
