//! Vietoris-Rips persistence of a noisy circle. The one long H1 bar is the
//! loop; everything else is sampling noise.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rankfn::complexes::{distance_matrix, vietoris_rips};
use rankfn::persistence::{barcode_to_diagram, compute_persistence_with_cap, rips_barcode};
use rankfn::synth::noisy_circle;

fn main() -> rankfn::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let cloud = noisy_circle(&mut rng, 60, 1.0, 0.05);
    let dm = distance_matrix(&cloud);
    let cap = 2.0;

    let fast = barcode_to_diagram(&rips_barcode(&dm, 1, cap, Some(cap))?);
    let mut h1: Vec<_> = fast.degree(1).to_vec();
    h1.sort_by(|a, b| b.persistence().total_cmp(&a.persistence()));
    println!("{} H0 points, {} H1 points", fast.degree(0).len(), h1.len());
    for p in h1.iter().take(3) {
        println!("  H1 [{:.3}, {:.3})  persistence {:.3}", p.birth, p.death, p.persistence());
    }

    // The explicit filtration gives the same diagram, just slower.
    let filtration = vietoris_rips(&dm, 2, cap)?;
    let slow = barcode_to_diagram(&compute_persistence_with_cap(&filtration, 1, cap)?);
    println!("{} simplices; explicit reduction agrees: {}", filtration.len(), slow == fast);
    Ok(())
}
