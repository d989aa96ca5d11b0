//! Place-recognition database construction from RGBD scanning sequences:
//! file formats, sequence loading, parallel drivers and the `vprdb` pipeline.

pub mod config;
pub mod error;
pub mod formats;
pub mod parallel;
pub mod pipeline;
pub mod sequence;

pub use config::PipelineConfig;
pub use error::{PipelineError, Result};
pub use pipeline::{run_build, run_eval, run_sweep, run_synth, BuildOutcome, EvalOutcome, SweepRow};
pub use sequence::{load_sequence, LoadOptions, ScanSequence};
pub use vprdb_core as core;
