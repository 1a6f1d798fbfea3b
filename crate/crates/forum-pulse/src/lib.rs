//! File formats, analysis stages, run manifests and the end-to-end pipeline
//! for forum dump analytics. The numerical work lives in
//! [`forum_pulse_core`].

pub mod error;
pub mod formats;
pub mod jsonl;
pub mod manifest;
pub mod pipeline;
pub mod stages;

pub use error::{Error, Result};
pub use pipeline::{run_pipeline, PipelineConfig, PipelineSummary};
