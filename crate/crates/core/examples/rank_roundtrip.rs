//! A diagram, its rank function on a grid, and back. On a lattice-aligned
//! diagram the inversion is exact. Truncation keeps only the region at
//! least δ above the diagonal, which hides bars shorter than δ.

use rankfn::persistence::{diagram_from_rank, PersistenceDiagram};
use rankfn::rank::{rank_from_diagram, truncate, GridSpec};

fn main() -> rankfn::Result<()> {
    let d = PersistenceDiagram::from_pairs(0, &[(0.0, 4.0), (1.0, 3.0), (2.0, 2.5)])?.with_cap(5.0)?;
    let spec = GridSpec::new(0.0, 5.0, 10)?;
    let r = rank_from_diagram(&d, 0, spec)?;
    for i in 0..spec.resolution {
        let row: String = (0..spec.resolution)
            .map(|j| if j < i { " .".to_string() } else { format!(" {}", r.value(i, j)) })
            .collect();
        println!("{row}");
    }
    println!("mass {:.3}", r.mass());
    println!("round trip exact: {}", diagram_from_rank(&r)? == d);

    let t = truncate(&r, 1.0)?;
    println!("mass above y = x + 1: {:.3}", t.mass());
    Ok(())
}
