//! Subcommand implementations and the artifact naming scheme they share.
//!
//! Artifact names are fixed patterns inside the working directory:
//! `pod_r{r}.romb` / `qrom_r{r}.romq` per reduced order,
//! `ae_{loss}_r{r}_s{seed}.romp` with `history_{loss}_r{r}_s{seed}.csv` per
//! trained model, and a `resolved_{command}.cfg` echo per run. Only the
//! dataset and report names are configurable.

pub mod evaluate;
pub mod pod;
pub mod simulate;
pub mod train;

use std::path::{Path, PathBuf};

use qgrom_core::error::{Error, Result};
use qgrom_core::io::atomic_write;

use crate::config::RunConfig;

pub fn basis_name(r: usize) -> String {
    format!("pod_r{r}.romb")
}

pub fn qrom_name(r: usize) -> String {
    format!("qrom_r{r}.romq")
}

pub fn checkpoint_name(loss: &str, r: usize, seed: u64) -> String {
    format!("ae_{loss}_r{r}_s{seed}.romp")
}

pub fn history_name(loss: &str, r: usize, seed: u64) -> String {
    format!("history_{loss}_r{r}_s{seed}.csv")
}

/// Errors unless the artifact exists, naming the full path.
pub fn require(path: PathBuf) -> Result<PathBuf> {
    if path.is_file() {
        Ok(path)
    } else {
        Err(Error::MissingArtifact {
            path: path.display().to_string(),
        })
    }
}

/// Creates the working directory and writes the resolved-config echo for
/// one command run.
pub fn prepare_workdir(cfg: &RunConfig, echo_name: &str) -> Result<()> {
    std::fs::create_dir_all(&cfg.workdir)?;
    write_text(&cfg.workdir.join(echo_name), &cfg.echo())
}

/// Atomically writes a text file.
pub fn write_text(path: &Path, text: &str) -> Result<()> {
    atomic_write(path, |w| {
        use std::io::Write as _;
        w.write_all(text.as_bytes()).map_err(Error::from)
    })
}
