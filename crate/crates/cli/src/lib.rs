//! Command-line front end for `mhtlab-core`: configuration parsing, analysis
//! dispatch and artifact writers (JSON, CSV, SVG).

pub mod config;
pub mod run;
pub mod svg;

pub use config::{Analysis, ConfigError, Format, RunConfig};
pub use run::{run, Artifacts, Document, SCHEMA_VERSION};

/// Exit status for a failed run: 2 for numerical failures, 1 otherwise.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    match err.downcast_ref::<mhtlab_core::Error>() {
        Some(e) if e.is_numerical() => 2,
        _ => 1,
    }
}
