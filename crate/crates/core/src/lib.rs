//! Performance characterization toolkit: hardware peak models, roofline analysis,
//! microbenchmarks, measurement ingestion, efficiency metrics and scalability fits.

// `!(x > 0.0)` is used on purpose so NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod hwmodel;
pub mod ingest;
pub mod metrics;
pub mod microbench;
pub mod report;
pub mod roofline;
pub mod scalefit;

pub use error::{read_text, Error, Result};
