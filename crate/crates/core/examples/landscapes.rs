//! Persistence landscapes of a small diagram, sampled on a uniform grid.

use rankfn::persistence::PersistenceDiagram;
use rankfn::rank::{landscape, landscape_grid};

fn main() -> rankfn::Result<()> {
    let d = PersistenceDiagram::from_pairs(0, &[(0.0, 4.0), (1.0, 3.0), (2.0, 5.0)])?;
    let ts = landscape_grid(0.0, 5.0, 11)?;
    for l in landscape(&d, 0, 3, &ts)? {
        let row: Vec<String> = l.values.iter().map(|v| format!("{v:.1}")).collect();
        println!("lambda_{}: {}", l.k, row.join(" "));
    }
    Ok(())
}
