//! Basis and quadratic-model file formats.
//!
//! Basis: magic `ROMB1\n`, ASCII header `n r`, then little-endian f64:
//! eigenvalues (r), mean (n), modes column-major (n·r). The grid is not
//! stored; the loader receives it from the caller and checks `n` against it.
//!
//! Quadratic model: magic `ROMQ1\n`, ASCII header `r`, then f64: constant
//! (r), linear row-major (r²), quadratic with output index slowest (r³).

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::io::bytes::{
    expect_eof, expect_magic, parse_usize, read_f64s, read_line, tokens, write_f64s,
};
use crate::io::{atomic_write, open_artifact};
use crate::pod::basis::PodBasis;
use crate::pod::qrom::QuadraticRom;
use crate::scalar::Real;
use std::io::BufReader;
use std::path::Path;

const BASIS_MAGIC: &str = "ROMB1\n";
const QROM_MAGIC: &str = "ROMQ1\n";

/// Serializes a basis (modes stored column-major: mode after mode).
pub fn save_basis<T: Real>(path: &Path, basis: &PodBasis<T>) -> Result<()> {
    atomic_write(path, |w| {
        use std::io::Write;
        w.write_all(BASIS_MAGIC.as_bytes())?;
        let line = format!("{} {}\n", basis.points(), basis.order());
        w.write_all(line.as_bytes())?;
        write_f64s(w, basis.eigenvalues())?;
        write_f64s(w, basis.mean().values())?;
        write_f64s(w, basis.modes_flat())?;
        Ok(())
    })
}

/// Loads a basis onto the given grid, re-verifying orthonormality.
pub fn load_basis<T: Real>(path: &Path, grid: Grid<T>) -> Result<PodBasis<T>> {
    let mut r = BufReader::new(open_artifact(path)?);
    expect_magic(&mut r, path, BASIS_MAGIC)?;
    let line = read_line(&mut r, path, 256)?;
    let t = tokens(&line, 2, path)?;
    let n = parse_usize(t[0], "point count", path)?;
    let order = parse_usize(t[1], "reduced order", path)?;
    if n != grid.nx * grid.ny {
        return Err(Error::FileFormat {
            path: path.display().to_string(),
            reason: format!(
                "point count {n} does not fit a {}x{} grid",
                grid.nx, grid.ny
            ),
        });
    }

    let eigenvalues = read_f64s(&mut r, order, path, "eigenvalues")?;
    let mean = Field::from_values(grid, read_f64s(&mut r, n, path, "mean")?)?;
    let modes = read_f64s(&mut r, n * order, path, "modes")?;
    expect_eof(&mut r, path)?;
    PodBasis::from_parts(modes, eigenvalues, mean)
}

/// Serializes a quadratic reduced model.
pub fn save_qrom<T: Real>(path: &Path, rom: &QuadraticRom<T>) -> Result<()> {
    atomic_write(path, |w| {
        use std::io::Write;
        w.write_all(QROM_MAGIC.as_bytes())?;
        w.write_all(format!("{}\n", rom.order()).as_bytes())?;
        write_f64s(w, rom.constant())?;
        write_f64s(w, rom.linear())?;
        write_f64s(w, &rom.quadratic_full())?;
        Ok(())
    })
}

/// Loads a quadratic reduced model, re-verifying tensor symmetry.
pub fn load_qrom<T: Real>(path: &Path) -> Result<QuadraticRom<T>> {
    let mut reader = BufReader::new(open_artifact(path)?);
    expect_magic(&mut reader, path, QROM_MAGIC)?;
    let line = read_line(&mut reader, path, 64)?;
    let t = tokens(&line, 1, path)?;
    let r = parse_usize(t[0], "reduced order", path)?;
    let b = read_f64s(&mut reader, r, path, "constant term")?;
    let a = read_f64s(&mut reader, r * r, path, "linear term")?;
    let bq = read_f64s(&mut reader, r * r * r, path, "quadratic term")?;
    expect_eof(&mut reader, path)?;
    QuadraticRom::from_full(b, a, bq)
}
