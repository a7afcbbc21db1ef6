//! Degree-Rips bifiltration of a small cloud and its rank invariant. At
//! degree threshold 0 it reduces to ordinary Rips persistence.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rankfn::complexes::{bifiltration_grid, BifiltrationInput, BifiltrationKind, PointCloud};
use rankfn::rank::rank_invariant;

fn main() -> rankfn::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let pts = (0..16).map(|_| vec![rng.random::<f64>(), rng.random::<f64>()]).collect();
    let pc = PointCloud::new(pts)?;
    let scales: Vec<f64> = (1..=6).map(|k| 0.1 * k as f64).collect();
    let degrees = [0.0, 2.0, 4.0];
    let grid = bifiltration_grid(BifiltrationInput::Cloud(&pc), BifiltrationKind::DegreeRips, &scales, &degrees, 1)?;
    let inv = rank_invariant(&grid, 0)?;
    println!("scales {:?}", grid.axis1());
    println!("degree thresholds {:?}", grid.axis2());
    for k in 0..grid.axis2().len() {
        let diag: Vec<usize> = (0..scales.len()).map(|i| inv.get((i, k), (i, k)).unwrap_or(0)).collect();
        println!("H0 Betti along scale at threshold {}: {diag:?}", grid.axis2()[k]);
    }
    Ok(())
}
