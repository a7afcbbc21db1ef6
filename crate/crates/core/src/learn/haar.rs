use std::f64::consts::FRAC_1_SQRT_2;

use super::dataset::FunctionalDataset;
use crate::error::{invalid, Result};

pub const DEFAULT_HAAR_LEVELS: usize = 4;

fn haar_1d(v: &mut [f64], n: usize, tmp: &mut [f64]) {
    let h = n / 2;
    for k in 0..h {
        tmp[k] = (v[2 * k] + v[2 * k + 1]) * FRAC_1_SQRT_2;
        tmp[h + k] = (v[2 * k] - v[2 * k + 1]) * FRAC_1_SQRT_2;
    }
    v[..n].copy_from_slice(&tmp[..n]);
}

fn inverse_1d(v: &mut [f64], n: usize, tmp: &mut [f64]) {
    let h = n / 2;
    for k in 0..h {
        tmp[2 * k] = (v[k] + v[h + k]) * FRAC_1_SQRT_2;
        tmp[2 * k + 1] = (v[k] - v[h + k]) * FRAC_1_SQRT_2;
    }
    v[..n].copy_from_slice(&tmp[..n]);
}

/// Full-depth orthonormal 2-D Haar transform of a `side × side` row-major
/// array (`side` a power of two). After the transform the top-left
/// `2^l × 2^l` block holds the scaling coefficient and the `l` coarsest
/// detail scales.
pub fn haar2d(data: &mut [f64], side: usize) {
    assert!(side.is_power_of_two() && data.len() == side * side);
    let mut tmp = vec![0.0; side];
    let mut col = vec![0.0; side];
    let mut n = side;
    while n > 1 {
        for r in 0..n {
            haar_1d(&mut data[r * side..r * side + side], n, &mut tmp);
        }
        for c in 0..n {
            for r in 0..n {
                col[r] = data[r * side + c];
            }
            haar_1d(&mut col, n, &mut tmp);
            for r in 0..n {
                data[r * side + c] = col[r];
            }
        }
        n /= 2;
    }
}

pub fn inverse_haar2d(data: &mut [f64], side: usize) {
    assert!(side.is_power_of_two() && data.len() == side * side);
    let mut tmp = vec![0.0; side];
    let mut col = vec![0.0; side];
    let mut n = 2;
    while n <= side {
        for c in 0..n {
            for r in 0..n {
                col[r] = data[r * side + c];
            }
            inverse_1d(&mut col, n, &mut tmp);
            for r in 0..n {
                data[r * side + c] = col[r];
            }
        }
        for r in 0..n {
            inverse_1d(&mut data[r * side..r * side + side], n, &mut tmp);
        }
        n *= 2;
    }
}

/// Pads a `g × g` row to the next power-of-two side with zeros.
pub fn pad_square(row: &[f64], g: usize) -> (Vec<f64>, usize) {
    let side = g.next_power_of_two();
    let mut out = vec![0.0; side * side];
    for i in 0..g {
        out[i * side..i * side + g].copy_from_slice(&row[i * g..(i + 1) * g]);
    }
    (out, side)
}

/// Coefficients of the `levels` coarsest scales of one grid row.
pub fn haar_coefficients(row: &[f64], g: usize, levels: usize) -> Vec<f64> {
    let (mut sq, side) = pad_square(row, g);
    haar2d(&mut sq, side);
    let keep = (1usize << levels.min(usize::BITS as usize - 1)).min(side);
    let mut out = Vec::with_capacity(keep * keep);
    for r in 0..keep {
        out.extend_from_slice(&sq[r * side..r * side + keep]);
    }
    out
}

/// Haar coefficients of every row of a grid-shaped dataset.
pub fn haar_project(ds: &FunctionalDataset, levels: usize) -> Result<FunctionalDataset> {
    if levels == 0 {
        return invalid("levels must be at least 1");
    }
    let Some(spec) = ds.grid() else {
        return invalid("Haar projection needs grid-shaped rows");
    };
    let g = spec.resolution;
    ds.with_rows(ds.rows().map(|r| haar_coefficients(r, g, levels)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constant_has_only_scaling_coefficient() {
        let mut v = vec![3.0; 64];
        haar2d(&mut v, 8);
        assert!((v[0] - 24.0).abs() < 1e-12);
        assert!(v[1..].iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn inverse_and_parseval() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let orig: Vec<f64> = (0..256).map(|_| rng.random::<f64>() - 0.5).collect();
        let mut v = orig.clone();
        haar2d(&mut v, 16);
        let e1: f64 = orig.iter().map(|x| x * x).sum();
        let e2: f64 = v.iter().map(|x| x * x).sum();
        assert!((e1 - e2).abs() < 1e-10);
        inverse_haar2d(&mut v, 16);
        assert!(orig.iter().zip(&v).all(|(a, b)| (a - b).abs() < 1e-10));
    }

    #[test]
    fn padding_and_truncation() {
        let row = vec![1.0; 9];
        let c = haar_coefficients(&row, 3, 1);
        assert_eq!(c.len(), 4);
        let c = haar_coefficients(&row, 3, 10);
        assert_eq!(c.len(), 16);
        let e: f64 = c.iter().map(|x| x * x).sum();
        assert!((e - 9.0).abs() < 1e-12);
    }
}
