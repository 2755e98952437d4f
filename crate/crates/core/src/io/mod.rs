//! Artifact serialization: snapshot sets, bases, quadratic models, and
//! network parameter checkpoints.
//!
//! All writers go through [`atomic_write`], which stages into a temporary
//! file in the destination directory and renames on success, so readers
//! never observe a half-written artifact.

pub mod basis_io;
pub mod bytes;
pub mod params_io;
pub mod snapshots_io;

use crate::error::{Error, Result};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

/// Writes `path` atomically: `fill` streams into a temp file that replaces
/// the destination only after completing without error.
pub fn atomic_write(path: &Path, fill: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let tmp = match dir {
        Some(d) => tempfile::NamedTempFile::new_in(d)?,
        None => tempfile::NamedTempFile::new_in(".")?,
    };
    let (file, tmp_path) = tmp.into_parts();
    let mut writer = BufWriter::new(file);
    fill(&mut writer)?;
    writer.flush()?;
    let file = writer
        .into_inner()
        .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    file.sync_all()?;
    drop(file);
    tmp_path.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// Opens `path` for reading, mapping a missing file to a dedicated error so
/// callers can distinguish "not produced yet" from corruption.
pub fn open_artifact(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            Error::MissingArtifact {
                path: path.display().to_string(),
            }
        } else {
            Error::Io(e)
        }
    })
}
