//! Seeded synthetic data: point clouds on simple shapes and random
//! diagrams on a grid lattice.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complexes::{distance_matrix, PointCloud};
use crate::error::Result;
use crate::persistence::{barcode_to_diagram, rips_barcode, DiagramPoint, PersistenceDiagram};
use crate::rank::{rank_from_diagram, GridSpec, RankGrid};

fn gaussian<R: Rng>(rng: &mut R, sigma: f64) -> f64 {
    if sigma == 0.0 {
        return 0.0;
    }
    Normal::new(0.0, sigma).expect("finite sigma").sample(rng)
}

/// `n` points on a circle of the given radius with isotropic Gaussian noise.
pub fn noisy_circle<R: Rng>(rng: &mut R, n: usize, radius: f64, noise: f64) -> PointCloud {
    let pts = (0..n)
        .map(|_| {
            let t = TAU * rng.random::<f64>();
            vec![
                radius * t.cos() + gaussian(rng, noise),
                radius * t.sin() + gaussian(rng, noise),
            ]
        })
        .collect();
    PointCloud::new(pts).expect("non-empty cloud")
}

/// `n` points uniform in a disc, with isotropic Gaussian noise.
pub fn noisy_disc<R: Rng>(rng: &mut R, n: usize, radius: f64, noise: f64) -> PointCloud {
    let pts = (0..n)
        .map(|_| {
            let t = TAU * rng.random::<f64>();
            let r = radius * rng.random::<f64>().sqrt();
            vec![r * t.cos() + gaussian(rng, noise), r * t.sin() + gaussian(rng, noise)]
        })
        .collect();
    PointCloud::new(pts).expect("non-empty cloud")
}

/// `n` points uniform (by area) on a torus with tube radius `r` around a
/// central circle of radius `big_r`.
pub fn torus<R: Rng>(rng: &mut R, n: usize, big_r: f64, r: f64) -> PointCloud {
    let mut pts = Vec::with_capacity(n);
    while pts.len() < n {
        let u = TAU * rng.random::<f64>();
        let v = TAU * rng.random::<f64>();
        // Area element is proportional to big_r + r cos v.
        if rng.random::<f64>() * (big_r + r) > big_r + r * v.cos() {
            continue;
        }
        let w = big_r + r * v.cos();
        pts.push(vec![w * u.cos(), w * u.sin(), r * v.sin()]);
    }
    PointCloud::new(pts).expect("non-empty cloud")
}

/// `n` points uniform on a sphere.
pub fn sphere<R: Rng>(rng: &mut R, n: usize, radius: f64) -> PointCloud {
    let pts = (0..n)
        .map(|_| loop {
            let v = [gaussian(rng, 1.0), gaussian(rng, 1.0), gaussian(rng, 1.0)];
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-12 {
                break v.iter().map(|x| radius * x / norm).collect();
            }
        })
        .collect();
    PointCloud::new(pts).expect("non-empty cloud")
}

/// A Gaussian blob of `n` points around `center`.
pub fn blob<R: Rng>(rng: &mut R, n: usize, center: &[f64], sigma: f64) -> PointCloud {
    let pts = (0..n)
        .map(|_| center.iter().map(|c| c + gaussian(rng, sigma)).collect())
        .collect();
    PointCloud::new(pts).expect("non-empty cloud")
}

/// A random degree-`degree` diagram with at most `max_points` points whose
/// coordinates are cell edges of `spec` and whose persistence is at least
/// `min_persistence`. The cap is the grid's upper bound.
pub fn lattice_diagram<R: Rng>(
    rng: &mut R,
    spec: &GridSpec,
    degree: usize,
    max_points: usize,
    min_persistence: f64,
) -> PersistenceDiagram {
    let g = spec.resolution;
    let min_gap = ((min_persistence / spec.step()).ceil() as usize).max(1);
    assert!(min_gap <= g, "minimum persistence does not fit on the grid");
    let m = rng.random_range(1..=max_points);
    let pts: Vec<DiagramPoint> = (0..m)
        .map(|_| {
            let kb = rng.random_range(0..=g - min_gap);
            let kd = rng.random_range(kb + min_gap..=g);
            DiagramPoint::new(spec.edge(kb), spec.edge(kd))
        })
        .collect();
    let mut by_degree = vec![Vec::new(); degree + 1];
    by_degree[degree] = pts;
    PersistenceDiagram::new(by_degree, spec.t_max).expect("lattice points are valid")
}

/// Shape of the negative class in [`ShapeDataset`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NegativeShape {
    Disc,
    Blob,
}

/// Two-class rank-function dataset: noisy circles (`+1`) against noisy discs
/// or Gaussian blobs (`-1`), each cloud reduced to its Rips rank function on
/// a shared grid over `[0, cap]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapeDataset {
    pub negative: NegativeShape,
    pub per_class: usize,
    pub points: usize,
    pub radius: f64,
    pub noise: f64,
    pub cap: f64,
    pub resolution: usize,
    pub degree: usize,
}

impl Default for ShapeDataset {
    fn default() -> Self {
        Self {
            negative: NegativeShape::Disc,
            per_class: 40,
            points: 50,
            radius: 1.0,
            noise: 0.3,
            cap: 2.0,
            resolution: 32,
            degree: 1,
        }
    }
}

impl ShapeDataset {
    /// Cloud `i` of the dataset; the first `per_class` are circles.
    pub fn cloud(&self, i: usize, seed: u64) -> PointCloud {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (i as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        if i < self.per_class {
            return noisy_circle(&mut rng, self.points, self.radius, self.noise);
        }
        match self.negative {
            NegativeShape::Disc => noisy_disc(&mut rng, self.points, self.radius, self.noise),
            NegativeShape::Blob => blob(&mut rng, self.points, &[0.0, 0.0], self.radius / 2.0),
        }
    }

    /// Rank grids and labels, in cloud order.
    pub fn generate(&self, seed: u64) -> Result<(Vec<RankGrid>, Vec<i8>)> {
        let spec = GridSpec::new(0.0, self.cap, self.resolution)?;
        let n = 2 * self.per_class;
        let grids = (0..n)
            .into_par_iter()
            .map(|i| {
                let dm = distance_matrix(&self.cloud(i, seed));
                let b = rips_barcode(&dm, self.degree, self.cap, Some(self.cap))?;
                rank_from_diagram(&barcode_to_diagram(&b), self.degree, spec)
            })
            .collect::<Result<Vec<_>>>()?;
        let labels = (0..n).map(|i| if i < self.per_class { 1 } else { -1 }).collect();
        Ok((grids, labels))
    }
}
