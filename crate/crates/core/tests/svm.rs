mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rankfn::learn::{gram, svm_train, FunctionalDataset, KernelSpec, SvmParams};

fn random_problem(rng: &mut ChaCha8Rng, n: usize) -> FunctionalDataset {
    let mut labels: Vec<i8> = (0..n).map(|i| if i % 2 == 0 { 1 } else { -1 }).collect();
    labels.rotate_left(rng.random_range(0..n));
    let rows = labels
        .iter()
        .map(|&l| (0..10).map(|_| rng.random::<f64>() + 0.4 * l as f64).collect())
        .collect();
    FunctionalDataset::euclidean(rows, labels).unwrap()
}

#[test]
fn smo_matches_brute_force_dual() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let kernels = [
        KernelSpec::Linear,
        KernelSpec::Polynomial { degree: 2 },
        KernelSpec::Grbf { gamma: Some(0.5) },
    ];
    for trial in 0..30 {
        let n = 4 + trial % 5;
        let ds = random_problem(&mut rng, n);
        let kernel = kernels[trial % 3];
        let c = [0.1, 1.0, 10.0][trial % 3];
        let params = SvmParams {
            c,
            tol: 1e-8,
            ..SvmParams::default()
        };
        let model = svm_train(&ds, kernel, &params).unwrap();
        let k = gram(&ds, &kernel);
        let y: Vec<f64> = ds.labels().iter().map(|&l| l as f64).collect();
        let q: Vec<f64> = (0..n * n).map(|e| y[e / n] * y[e % n] * k[e]).collect();
        let (best, alpha) = common::brute_force_dual(&q, &y, c);
        assert!(
            (model.objective - best).abs() <= 1e-4,
            "trial {trial}: SMO {} vs oracle {best}",
            model.objective
        );
        for (a, b) in model.dual.iter().zip(&alpha) {
            assert!((a - b).abs() <= 1e-3, "trial {trial}: α {a} vs {b}");
        }
    }
}

#[test]
fn duplicated_samples_keep_the_decision_function() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let ds = random_problem(&mut rng, 8);
    let rows: Vec<Vec<f64>> = ds.rows().chain(ds.rows()).map(|r| r.to_vec()).collect();
    let labels: Vec<i8> = ds.labels().iter().chain(ds.labels()).copied().collect();
    let doubled = FunctionalDataset::euclidean(rows, labels).unwrap();
    let params = SvmParams {
        tol: 1e-8,
        ..SvmParams::default()
    };
    let a = svm_train(&ds, KernelSpec::Linear, &params).unwrap();
    // Doubling every sample doubles the dual objective's scale; halving C
    // keeps the same primal problem.
    let b = svm_train(
        &doubled,
        KernelSpec::Linear,
        &SvmParams {
            c: params.c / 2.0,
            ..params
        },
    )
    .unwrap();
    for r in ds.rows() {
        assert!((a.decision(r).unwrap() - b.decision(r).unwrap()).abs() < 1e-5);
    }
}

#[test]
fn constant_shift_is_absorbed_by_retraining() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let ds = random_problem(&mut rng, 8);
    let shifted_rows: Vec<Vec<f64>> = ds.rows().map(|r| r.iter().map(|v| v + 3.0).collect()).collect();
    let shifted = FunctionalDataset::euclidean(shifted_rows.clone(), ds.labels().to_vec()).unwrap();
    let params = SvmParams {
        tol: 1e-8,
        ..SvmParams::default()
    };
    let a = svm_train(&ds, KernelSpec::Linear, &params).unwrap();
    let b = svm_train(&shifted, KernelSpec::Linear, &params).unwrap();
    for (r, s) in ds.rows().zip(&shifted_rows) {
        assert!((a.decision(r).unwrap() - b.decision(s).unwrap()).abs() < 1e-5);
    }
}
