//! Comprehensive change-context generation for commit classification.
//!
//! The pipeline turns a commit into a bounded-size document: files are
//! filtered, methods outside the invocation neighbourhood of the change are
//! dropped or stubbed, changed methods are sliced along their data and
//! control dependences, and every diff hunk is widened to a block-complete
//! boundary before the message and code are truncated to the token window.
//! A pluggable encoder plus a logistic head turns that document into a
//! probability.

pub mod callgraph;
pub mod classifier;
pub mod config;
pub mod context;
pub mod diff;
pub mod error;
pub mod eval;
pub mod flow;
pub mod ingest;
pub mod metrics;
pub mod pipeline;
pub mod scan;
pub mod slicer;
pub mod stats;
pub mod synth;
pub mod syntax;
pub mod tokenize;

pub use error::{Error, Result};
