//! Experiment harness: configs, runners, tables, plots and manifests.

pub mod analysis;
pub mod config;
pub mod experiments;
pub mod output;
pub mod svg;

use std::path::Path;
use std::time::Instant;

pub use config::{Config, Resolver};
pub use experiments::{run, Command, RunOutput};
pub use output::{Artifact, Format, RunManifest, Table};

use crate::error::Result;

/// Run `command` and write its files plus `manifest.json` into `out`.
pub fn run_to_dir(
    command: Command,
    config: &Config,
    format: Format,
    out: &Path,
) -> Result<RunManifest> {
    let start = Instant::now();
    let mut result = run(command, config, format)?;
    result
        .config
        .insert("format".into(), format!("{format:?}").to_lowercase());
    let mut manifest = RunManifest::new(command.name(), result.config.clone(), &result.artifacts);
    manifest.notes = result.notes;
    manifest
        .timings
        .insert("wall_seconds".into(), start.elapsed().as_secs_f64());
    output::write_run(out, &result.artifacts, &manifest)?;
    Ok(manifest)
}
