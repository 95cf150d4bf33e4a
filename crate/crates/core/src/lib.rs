//! Document embedding and cosine-similarity experiments over text corpora.
//!
//! The crate is organised as a pipeline: [`corpus`] ingests and normalises
//! documents, [`vectorize`] turns them into fixed-dimension vectors,
//! [`similarity`] builds cosine matrices, [`stats`] runs the hypothesis
//! tests, and [`pipeline`] wires the stages together behind a config.

// `!(x > 0.0)` is used on purpose so that NaN takes the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod corpus;
pub mod error;
pub mod numfmt;
pub mod pipeline;
pub mod similarity;
pub mod stats;
pub mod vectorize;

pub use error::{Error, Result};
