//! Lower-star persistence of a time series: each local minimum is born at
//! its value and dies when it merges into a deeper valley.

use rankfn::complexes::{sublevel_filtration, TimeSeries};
use rankfn::persistence::diagram_of;

fn main() -> rankfn::Result<()> {
    let values: Vec<f64> = (0..40).map(|t| (t as f64 * 0.4).sin() + 0.3 * (t as f64 * 1.7).cos()).collect();
    let ts = TimeSeries::new(values)?;
    let d = diagram_of(&sublevel_filtration(&ts), 0)?;
    println!("cap {:.3}", d.cap());
    for p in d.degree(0) {
        println!("born {:+.3}  dies {:+.3}", p.birth, p.death);
    }
    Ok(())
}
