//! Rank functions of persistent homology.
//!
//! The crate builds filtered complexes from point clouds and time series,
//! reduces them to barcodes, and represents the result as rank functions
//! `β(x, y)` sampled on triangular grids. On top of that representation it
//! offers
//!
//! * `L^p` distances between rank functions, and bottleneck / Wasserstein
//!   distances between diagrams with matching certificates ([`metrics`]),
//! * empirical checks of the local Hölder / Lipschitz bounds linking the two
//!   ([`stability`]),
//! * functional classifiers working directly on discretized rank functions:
//!   a kernel SVM trained by SMO, FPCA and Haar projections, k-NN and
//!   modified band depth ([`learn`]),
//! * biparameter rank invariants over degree–Rips and height–Rips grids
//!   ([`rank::rank_invariant`]).
//!
//! The runnable programs under `examples/` walk through each capability;
//! the `rankfn` binary exposes the same pipelines on files.

pub mod cli;
pub mod complexes;
pub mod error;
pub mod io;
pub mod learn;
pub mod metrics;
pub mod persistence;
pub mod rank;
mod rips;
pub mod stability;
pub mod synth;

pub use complexes::{
    BifiltrationGrid, BifiltrationKind, DistanceMatrix, Filtration, PointCloud, Simplex,
    TimeSeries,
};
pub use error::{Error, Result};
pub use persistence::{Bar, Barcode, PersistenceDiagram};
pub use rank::{BiRankGrid, Landscape, RankGrid};
