//! Dual-encoding constraint-based causal discovery over mixed tabular data.
//!
//! Categorical variables break Fisher's z conditional-independence testing when
//! they are fully one-hot encoded: the dummy columns of a feature sum to a
//! constant, the covariance matrix goes singular, and the test cannot run.
//! This crate works around that by running the FCI discovery algorithm twice,
//! once under drop-first and once under drop-last dummy coding, and merging the
//! two partial ancestral graphs by majority voting into a single
//! correlation-weighted explanation graph.
//!
//! The pipeline, end to end:
//!
//! 1. ingest a typed CSV ([`data`]), discretize continuous features against the
//!    outcome with entropy/MDL binning ([`discretize`]);
//! 2. encode the table twice ([`encode`]) and run FCI with the outcome forced
//!    to be a sink ([`discovery`], tests from [`stats`]);
//! 3. merge the two graphs and weight every retained edge with a Pearson
//!    correlation ([`pipeline`], output types in [`graph`]).
//!
//! [`synth`] provides a ground-truth harness (random linear-Gaussian SCMs, an
//! exact d-separation oracle, structural accuracy metrics) used to validate
//! the engine on data with a known answer.

pub mod data;
pub mod discovery;
pub mod discretize;
pub mod encode;
pub mod graph;
pub mod pipeline;
pub mod stats;
pub mod synth;

mod exec;

pub use exec::Parallelism;
