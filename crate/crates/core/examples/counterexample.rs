//! A single bar moved by ε in birth: the rank distance grows like ε^{1/p}
//! times a factor that exceeds the naive global Hölder bound.

use rankfn::stability::{counterexample_sweep, DEFAULT_SWEEP};

fn main() -> rankfn::Result<()> {
    for p in [2.0, 3.0] {
        println!("p = {p}");
        println!("{:>6} {:>9} {:>9} {:>8} {:>8}", "eps", "omega", "grid", "bound", "exceeds");
        for r in counterexample_sweep(0.0, 1.0, &DEFAULT_SWEEP, p, 200)? {
            println!(
                "{:>6} {:>9.4} {:>9.4} {:>8.4} {:>8}",
                r.eps, r.omega, r.omega_quadrature, r.bound, r.exceeds
            );
        }
    }
    Ok(())
}
