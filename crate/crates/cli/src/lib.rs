//! Batch pipeline for the `turbodetect` command: configuration, stage
//! orchestration, MANIFEST bookkeeping and the metrics report.

pub mod config;
pub mod manifest;
pub mod pipeline;
pub mod report;

pub use config::{EmitFlags, InputSource, PipelineConfig, SequenceInput};
pub use manifest::Manifest;
pub use pipeline::{Pipeline, PipelineError, Stage};
pub use report::Report;
