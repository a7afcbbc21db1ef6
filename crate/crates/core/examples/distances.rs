//! Diagram distances next to rank-function distances for the same pair.

use rankfn::metrics::{bottleneck, landscape_distance, lp_distance, rank_lp_distance_exact, wasserstein};
use rankfn::persistence::PersistenceDiagram;
use rankfn::rank::{landscape, landscape_grid, rank_from_diagram, GridSpec};

fn main() -> rankfn::Result<()> {
    let a = PersistenceDiagram::from_pairs(0, &[(0.0, 3.0), (1.0, 2.0)])?.with_cap(4.0)?;
    let b = PersistenceDiagram::from_pairs(0, &[(0.2, 2.6), (2.0, 2.4)])?.with_cap(4.0)?;

    let (db, cert) = bottleneck(&a, &b, 0)?;
    println!("bottleneck {db:.4}");
    println!("  matching {cert:?}");
    for p in [1.0, 2.0] {
        println!("W_{p} {:.4}", wasserstein(&a, &b, 0, p)?.0);
    }

    let spec = GridSpec::new(0.0, 4.0, 200)?;
    let (ra, rb) = (rank_from_diagram(&a, 0, spec)?, rank_from_diagram(&b, 0, spec)?);
    for p in [1.0, 2.0] {
        println!(
            "rank L^{p}: grid {:.4}, exact {:.4}",
            lp_distance(&ra, &rb, p)?,
            rank_lp_distance_exact(&a, &b, 0, p, 0.0)?
        );
    }

    let ts = landscape_grid(0.0, 4.0, 401)?;
    let (la, lb) = (landscape(&a, 0, 2, &ts)?, landscape(&b, 0, 2, &ts)?);
    println!("landscape L^2 {:.4}", landscape_distance(&la, &lb, 2.0)?);
    Ok(())
}
