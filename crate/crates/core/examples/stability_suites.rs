//! Empirical checks of the local bounds between rank-function distance and
//! diagram distance, first on one pair and then over random suites.

use rankfn::persistence::PersistenceDiagram;
use rankfn::stability::{
    check_truncated_bound, check_wasserstein_bound, perturb_diagram, truncated_suite, wasserstein_suite,
    PerturbMode, SuiteSummary,
};

fn main() -> rankfn::Result<()> {
    let m = PersistenceDiagram::from_pairs(0, &[(0.0, 2.0), (0.5, 3.0), (1.0, 1.6)])?;
    let n = perturb_diagram(&m, 0.05, PerturbMode::Bottleneck, 3)?;
    let r = check_truncated_bound(&m, &n, 0, 0.5, 2.0)?;
    println!("truncated: {:.4} <= {:.4} ? {:?}", r.lhs, r.rhs, r.verdict);

    let n = perturb_diagram(&m, 0.2, PerturbMode::Wasserstein1, 4)?;
    for r in check_wasserstein_bound(&m, &n, 0, 1.0)? {
        println!("wasserstein ({:?} constant): {:.4} <= {:.4} ? {:?}", r.source, r.lhs, r.rhs, r.verdict);
    }

    let s = SuiteSummary::summarize(&truncated_suite(100, 1.0, &[0.25, 0.5, 1.0], 7)?);
    println!("truncated suite: {} checked, {} violations, max ratio {:.3}", s.checked, s.violations, s.max_ratio);
    let s = SuiteSummary::summarize(&wasserstein_suite(100, 2.0, 7)?);
    println!("wasserstein suite: {} checked, {} violations, max ratio {:.3}", s.checked, s.violations, s.max_ratio);
    Ok(())
}
