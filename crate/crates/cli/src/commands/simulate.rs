//! `simulate`: integrate the full-order model and store the trajectory.

use std::time::Instant;

use qgrom_core::error::Result;
use qgrom_core::fom::model::QgeModel;
use qgrom_core::fom::snapshots::{generate_snapshots, spin_up};
use qgrom_core::io::snapshots_io::save_snapshots;

use crate::commands::prepare_workdir;
use crate::config::RunConfig;

pub fn run(cfg: &RunConfig) -> Result<()> {
    prepare_workdir(cfg, "resolved_simulate.cfg")?;
    let grid = cfg.grid()?;
    let model = QgeModel::new(grid, cfg.fom())?;

    let start = Instant::now();
    let initial = spin_up(&model)?;
    let set = generate_snapshots(&model, initial)?;
    let path = cfg.dataset_path();
    save_snapshots(&path, &set)?;

    let span_start = set.times.first().copied().unwrap_or(0.0);
    let span_end = set.times.last().copied().unwrap_or(span_start);
    println!(
        "grid {}x{} (lx={}, ly={})",
        grid.nx, grid.ny, grid.lx, grid.ly
    );
    println!(
        "snapshots {} spanning t = {span_start:.4} .. {span_end:.4}",
        set.len()
    );
    println!("wall {:.2} s", start.elapsed().as_secs_f64());
    println!("wrote {}", path.display());
    Ok(())
}
