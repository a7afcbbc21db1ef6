//! Classifiers for discretized functions: kernel SVM, principal component
//! and Haar projections, nearest neighbours and band depth.

mod dataset;
mod eval;
mod fpca;
mod haar;
mod neighbors;
mod svm;

pub use dataset::{Centering, FunctionalDataset};
pub use eval::{
    auc_roc, cross_validate, permuted_labels, stratified_folds, EvalReport, FoldResult, KnnPipeline, MbdPipeline,
    Pipeline, Predictions, Projection, SvmPipeline,
};
pub use fpca::{fpca, FpcaBasis, DEFAULT_MAX_COMPONENTS, DEFAULT_VARIANCE_THRESHOLD};
pub use haar::{haar2d, haar_coefficients, haar_project, inverse_haar2d, pad_square, DEFAULT_HAAR_LEVELS};
pub use neighbors::{knn_classify, mbd, mbd_classify, Scored, DEFAULT_BAND_SIZE};
pub use svm::{gram, svm_train, KernelSpec, SvmModel, SvmParams};
