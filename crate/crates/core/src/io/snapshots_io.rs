//! Snapshot trajectory file format.
//!
//! Layout: magic `ROMF1\n`, one ASCII header line `nx ny lx ly n_snapshots
//! dt`, then little-endian f64 payloads in order: times (N), states (N
//! fields), tendencies (N fields), mean (one field). Header floats use the
//! shortest representation that round-trips exactly.

use crate::error::Result;
use crate::fom::snapshots::SnapshotSet;
use crate::grid::{Field, Grid};
use crate::io::bytes::{
    expect_eof, expect_magic, parse_f64, parse_usize, read_f64s, read_line, tokens, write_f64s,
};
use crate::io::{atomic_write, open_artifact};
use crate::scalar::Real;
use std::io::{BufReader, Read, Write};
use std::path::Path;

const MAGIC: &str = "ROMF1\n";

/// Serializes a snapshot set. `dt` in the header is taken from the time
/// spacing of the first pair (or 0 for a single snapshot).
pub fn save_snapshots<T: Real>(path: &Path, set: &SnapshotSet<T>) -> Result<()> {
    set.validate()?;
    let dt = if set.times.len() > 1 {
        (set.times[1] - set.times[0]).as_f64()
    } else {
        0.0
    };
    atomic_write(path, |w| {
        write_header(w, &set.grid, set.len(), dt)?;
        write_f64s(w, &set.times)?;
        for f in &set.states {
            write_f64s(w, f.values())?;
        }
        for f in &set.rhs {
            write_f64s(w, f.values())?;
        }
        write_f64s(w, set.mean.values())?;
        Ok(())
    })
}

fn write_header<T: Real>(w: &mut impl Write, grid: &Grid<T>, n: usize, dt: f64) -> Result<()> {
    w.write_all(MAGIC.as_bytes())?;
    let line = format!(
        "{} {} {} {} {} {}\n",
        grid.nx,
        grid.ny,
        grid.lx.as_f64(),
        grid.ly.as_f64(),
        n,
        dt
    );
    w.write_all(line.as_bytes())?;
    Ok(())
}

/// Loads a snapshot set, verifying sizes and the declared payload length.
pub fn load_snapshots<T: Real>(path: &Path) -> Result<SnapshotSet<T>> {
    let mut r = BufReader::new(open_artifact(path)?);
    let (grid, n) = read_header::<T>(&mut r, path)?;
    let pts = grid.nx * grid.ny;

    let times = read_f64s(&mut r, n, path, "times")?;
    let mut states = Vec::with_capacity(n);
    for k in 0..n {
        let values = read_f64s(&mut r, pts, path, &format!("state {k}"))?;
        states.push(Field::from_values(grid, values)?);
    }
    let mut rhs = Vec::with_capacity(n);
    for k in 0..n {
        let values = read_f64s(&mut r, pts, path, &format!("tendency {k}"))?;
        rhs.push(Field::from_values(grid, values)?);
    }
    let mean = Field::from_values(grid, read_f64s(&mut r, pts, path, "mean")?)?;
    expect_eof(&mut r, path)?;

    let set = SnapshotSet {
        grid,
        times,
        states,
        rhs,
        mean,
    };
    set.validate()?;
    Ok(set)
}

fn read_header<T: Real>(r: &mut impl Read, path: &Path) -> Result<(Grid<T>, usize)> {
    expect_magic(r, path, MAGIC)?;
    let line = read_line(r, path, 256)?;
    let t = tokens(&line, 6, path)?;
    let nx = parse_usize(t[0], "nx", path)?;
    let ny = parse_usize(t[1], "ny", path)?;
    let lx = parse_f64(t[2], "lx", path)?;
    let ly = parse_f64(t[3], "ly", path)?;
    let n = parse_usize(t[4], "n_snapshots", path)?;
    parse_f64(t[5], "dt", path)?;
    let grid = Grid::new(nx, ny, T::of(lx), T::of(ly))?;
    Ok((grid, n))
}
