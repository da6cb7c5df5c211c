//! Gaussian ordinal embeddings learned from triplet comparisons.
//!
//! Items are embedded as diagonal Gaussians `N(mu, diag(sigma))` and compared
//! with the closed-form 2-Wasserstein distance. The crate covers the whole
//! numeric path of the method:
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`gaussian`] | embedding type, Wasserstein / Bures / Hellinger distances, gradients |
//! | [`triplet`] | oracles, uniform and graph-hop sampling, label noise, budget rule |
//! | [`encoder`] | random-code encoder network with analytic backward pass |
//! | [`trainer`] | hinge-loss training with Adam and the variance clamp |
//! | [`eval`] | triplet error, Procrustes distances, k-means purity, AUC/AP |
//! | [`datasets`] | synthetic point sets and relation graphs |
//!
//! The crate is `no_std` and only needs `alloc`. File formats, plotting and
//! the command-line driver live in the `gaussord` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod datasets;
pub mod encoder;
pub mod error;
pub mod eval;
pub mod gaussian;
pub mod graph;
pub mod optim;
pub mod rng;
pub mod trainer;
pub mod triplet;

pub use datasets::PointDataset;
pub use encoder::{EncoderGrads, EncoderParams};
pub use error::{Error, Result};
pub use gaussian::{CovMatrix, GaussianEmbedding};
pub use graph::{NodeKind, RelationGraph};
pub use trainer::{TrainConfig, TrainOutcome, TrainReport};
pub use triplet::{SamplingConfig, SamplingStrategy, Triplet};
