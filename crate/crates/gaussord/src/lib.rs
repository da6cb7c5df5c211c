//! File formats, plotting and the command-line pipeline for Gaussian
//! ordinal embeddings built on `gaussord-core`.

pub mod checkpoint;
pub mod cli;
pub mod config;
pub mod error;
pub mod formats;
pub mod pipeline;
pub mod svg;

pub use error::{Error, Result};
