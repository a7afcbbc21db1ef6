//! Circles against filled discs, classified from H1 rank functions with
//! each pipeline under repeated stratified cross-validation.

use rankfn::learn::{
    cross_validate, FunctionalDataset, KernelSpec, KnnPipeline, MbdPipeline, Pipeline, Projection, SvmParams,
    SvmPipeline,
};
use rankfn::synth::ShapeDataset;

fn main() -> rankfn::Result<()> {
    let (grids, labels) = ShapeDataset::default().generate(2024)?;
    let ds = FunctionalDataset::from_rank_grids(&grids, labels)?;
    let svm = |kernel, projection| SvmPipeline {
        kernel,
        params: SvmParams::default(),
        projection,
    };
    let pipelines: Vec<Box<dyn Pipeline>> = vec![
        Box::new(svm(KernelSpec::Linear, Projection::None)),
        Box::new(svm(KernelSpec::Polynomial { degree: 2 }, Projection::None)),
        Box::new(svm(KernelSpec::Grbf { gamma: None }, Projection::None)),
        Box::new(svm(
            KernelSpec::Polynomial { degree: 2 },
            Projection::Pca {
                threshold: 0.95,
                max_components: 20,
            },
        )),
        Box::new(svm(KernelSpec::Polynomial { degree: 2 }, Projection::Haar { levels: 2 })),
        Box::new(KnnPipeline { k: 5 }),
        Box::new(MbdPipeline { j: 2 }),
    ];
    println!("Method,Accuracy,AUC-ROC,Runtime (s)");
    for p in &pipelines {
        println!("{}", cross_validate(&ds, p.as_ref(), 5, 10, 2024)?.csv_row());
    }
    Ok(())
}
