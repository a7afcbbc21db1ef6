//! Rips persistence recovers the two loops of a torus and the void of a
//! sphere. Pass a point count to trade time for clarity (default 800).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rankfn::complexes::distance_matrix;
use rankfn::persistence::{barcode_to_diagram, rips_barcode, PersistenceDiagram};
use rankfn::synth::{sphere, torus};

fn top(d: &PersistenceDiagram, q: usize, k: usize) -> Vec<String> {
    let mut pers: Vec<f64> = d.degree(q).iter().map(|p| p.persistence()).collect();
    pers.sort_by(|a, b| b.total_cmp(a));
    pers.iter().take(k).map(|p| format!("{p:.3}")).collect()
}

fn main() -> rankfn::Result<()> {
    let n = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(800);

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let t = torus(&mut rng, n, 2.0, 1.0);
    let d = barcode_to_diagram(&rips_barcode(&distance_matrix(&t), 1, 1.8, Some(1.8))?);
    println!("torus  H1 largest persistences {:?}", top(&d, 1, 4));

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let s = sphere(&mut rng, n, 1.0);
    let scale = if n >= 2000 { 0.4 } else { 0.6 };
    let d = barcode_to_diagram(&rips_barcode(&distance_matrix(&s), 2, scale, Some(scale))?);
    println!("sphere H1 largest persistences {:?}", top(&d, 1, 3));
    println!("sphere H2 largest persistences {:?}", top(&d, 2, 3));
    Ok(())
}
