mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rankfn::learn::{
    auc_roc, cross_validate, fpca, permuted_labels, FunctionalDataset, KernelSpec, Pipeline, Predictions, Projection,
    SvmParams, SvmPipeline,
};
use rankfn::metrics::{bottleneck, lp_distance, wasserstein};
use rankfn::persistence::{diagram_from_rank, PersistenceDiagram};
use rankfn::rank::{rank_from_diagram, GridSpec};
use rankfn::synth::{lattice_diagram, NegativeShape, ShapeDataset};
use rankfn::Result;

fn diagram(points: &[(f64, f64)]) -> PersistenceDiagram {
    PersistenceDiagram::from_pairs(0, points).unwrap()
}

fn pairs(max: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((0.0f64..5.0, 0.01f64..3.0), 0..=max)
        .prop_map(|v| v.into_iter().map(|(b, p)| (b, b + p)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lattice_diagrams_survive_the_rank_round_trip(seed in any::<u64>()) {
        let spec = GridSpec::new(0.0, 10.0, 100).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = lattice_diagram(&mut rng, &spec, 0, 20, 0.2);
        let back = diagram_from_rank(&rank_from_diagram(&d, 0, spec).unwrap()).unwrap();
        prop_assert_eq!(back, d);
    }

    #[test]
    fn distances_match_exhaustive_matching(a in pairs(5), b in pairs(5)) {
        let (d1, d2) = (diagram(&a), diagram(&b));
        let (p1, p2) = (d1.degree(0), d2.degree(0));
        let w1 = wasserstein(&d1, &d2, 0, 1.0).unwrap().0;
        let w2 = wasserstein(&d1, &d2, 0, 2.0).unwrap().0;
        let db = bottleneck(&d1, &d2, 0).unwrap().0;
        prop_assert!((w1 - common::wasserstein_oracle(p1, p2, 1.0)).abs() < 1e-9);
        prop_assert!((w2 - common::wasserstein_oracle(p1, p2, 2.0)).abs() < 1e-9);
        prop_assert!((db - common::bottleneck_oracle(p1, p2)).abs() < 1e-9);
        // Symmetry and the ordering d_B <= W_2 <= W_1 up to ground-norm factors.
        prop_assert!((wasserstein(&d2, &d1, 0, 1.0).unwrap().0 - w1).abs() < 1e-9);
        prop_assert!(db <= w1 + 1e-9);
    }

    #[test]
    fn lp_distance_is_a_metric(a in pairs(4), b in pairs(4), c in pairs(4)) {
        let spec = GridSpec::new(0.0, 8.0, 40).unwrap();
        let r: Vec<_> = [a, b, c]
            .iter()
            .map(|x| rank_from_diagram(&diagram(x).with_cap(8.0).unwrap(), 0, spec).unwrap())
            .collect();
        for p in [1.0, 2.0] {
            let d = |i: usize, j: usize| lp_distance(&r[i], &r[j], p).unwrap();
            prop_assert_eq!(d(0, 0), 0.0);
            prop_assert!((d(0, 1) - d(1, 0)).abs() < 1e-12);
            prop_assert!(d(0, 2) <= d(0, 1) + d(1, 2) + 1e-9);
        }
    }

    #[test]
    fn auc_equals_pair_enumeration(
        scored in prop::collection::vec((0u8..12, any::<bool>()), 2..50),
    ) {
        let scores: Vec<f64> = scored.iter().map(|s| s.0 as f64 / 4.0).collect();
        let labels: Vec<i8> = scored.iter().map(|s| if s.1 { 1 } else { -1 }).collect();
        match auc_roc(&scores, &labels) {
            Ok(v) => prop_assert_eq!(v, common::pair_auc(&scores, &labels)),
            Err(_) => prop_assert!(labels.iter().all(|&l| l == labels[0])),
        }
    }

    #[test]
    fn fpca_components_are_weighted_orthonormal(
        rows in prop::collection::vec(prop::collection::vec(-2.0f64..2.0, 6), 3..10),
        weights in prop::collection::vec(0.1f64..1.0, 6),
    ) {
        let labels = (0..rows.len()).map(|i| if i % 2 == 0 { 1 } else { -1 }).collect();
        let ds = FunctionalDataset::new(rows, labels, weights.clone(), None).unwrap();
        let (basis, _) = fpca(&ds, 1.0, 30).unwrap();
        for (i, u) in basis.components.iter().enumerate() {
            for (j, v) in basis.components.iter().enumerate() {
                let dot: f64 = u.iter().zip(v).zip(&weights).map(|((a, b), w)| a * b * w).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((dot - want).abs() < 1e-8, "<u{},u{}> = {}", i, j, dot);
            }
        }
        prop_assert!(basis.eigenvalues.windows(2).all(|w| w[0] >= w[1] - 1e-12));
    }
}

/// Predicts the true label with a perfectly ranked score.
struct Oracle;

impl Pipeline for Oracle {
    fn name(&self) -> String {
        "oracle".into()
    }

    fn run(&self, _train: &FunctionalDataset, test: &FunctionalDataset) -> Result<Predictions> {
        Ok(Predictions {
            labels: test.labels().to_vec(),
            scores: test.labels().iter().map(|&l| l as f64).collect(),
        })
    }
}

fn shapes(negative: NegativeShape, noise: f64) -> FunctionalDataset {
    let cfg = ShapeDataset {
        negative,
        noise,
        ..ShapeDataset::default()
    };
    let (grids, labels) = cfg.generate(3).unwrap();
    FunctionalDataset::from_rank_grids(&grids, labels).unwrap()
}

fn poly2() -> SvmPipeline {
    SvmPipeline {
        kernel: KernelSpec::Polynomial { degree: 2 },
        params: SvmParams::default(),
        projection: Projection::None,
    }
}

#[test]
fn oracle_pipeline_scores_perfectly() {
    let ds = shapes(NegativeShape::Disc, 0.3);
    let r = cross_validate(&ds, &Oracle, 5, 3, 1).unwrap();
    assert_eq!((r.accuracy, r.auc_roc), (100.0, 1.0));
    assert_eq!(r.per_fold.len(), 15);
}

#[test]
fn circles_separate_from_blobs() {
    let ds = shapes(NegativeShape::Blob, 0.1);
    let r = cross_validate(&ds, &poly2(), 5, 10, 8).unwrap();
    assert!(r.accuracy > 90.0 && r.auc_roc > 0.9, "{}", r.csv_row());
}

#[test]
fn permuted_labels_give_chance_auc() {
    let ds = permuted_labels(&shapes(NegativeShape::Blob, 0.1), 17).unwrap();
    let r = cross_validate(&ds, &poly2(), 5, 10, 8).unwrap();
    assert!((r.auc_roc - 0.5).abs() <= 0.1, "{}", r.csv_row());
}
