//! Side-by-side model comparison: one report row per adapter.
//!
//! Each row carries the reconstruction energy ratio, the propagation score
//! on the training-window snapshots, optionally the score on a later
//! ("future") window, and the wall time spent on that row. Rows appear in
//! adapter order and all numeric work is sequenced deterministically, so two
//! runs over the same inputs differ only in wall time.

use std::path::Path;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::eval::adapters::RomAdapter;
use crate::eval::energy::energy_ratio;
use crate::eval::propagate::{reference_states, score_against_references};
use crate::fom::model::{FomConfig, QgeModel};
use crate::fom::snapshots::SnapshotSet;
use crate::grid::Field;
use crate::io::{atomic_write, bytes};

/// Header line of the comparison CSV.
pub const REPORT_HEADER: &str = "model,r,energy_ratio,rel_l2_current,rel_l2_future,wall_seconds";

/// One evaluated model at one reduced order.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    /// Adapter label ("pod", "ae-mse", "ae-pi", "identity", ...).
    pub model: String,
    /// Reduced order.
    pub r: usize,
    /// Reconstructed-to-true velocity energy ratio over the truth set.
    pub energy_ratio: f64,
    /// Propagation score on the truth snapshots.
    pub rel_l2_current: f64,
    /// Propagation score on the future snapshots, when a future set is given.
    pub rel_l2_future: Option<f64>,
    /// Wall time spent evaluating this row.
    pub wall_seconds: f64,
}

/// Full comparison result: rows in adapter order plus any divergence notes.
#[derive(Debug, Clone)]
pub struct EvalReport {
    pub rows: Vec<ReportRow>,
    pub diagnostics: Vec<String>,
}

impl EvalReport {
    /// Renders the report as CSV; an absent future column is left empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(REPORT_HEADER);
        out.push('\n');
        for row in &self.rows {
            let future = row
                .rel_l2_future
                .map(|v| v.to_string())
                .unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                row.model, row.r, row.energy_ratio, row.rel_l2_current, future, row.wall_seconds
            ));
        }
        out
    }
}

/// Projects and reconstructs every snapshot through one adapter.
fn reconstructions(
    adapter: &dyn RomAdapter,
    set: &SnapshotSet<f64>,
) -> Result<Vec<Field<f64>>> {
    set.states
        .iter()
        .map(|x| {
            let z = adapter.project(x)?;
            adapter.reconstruct(&z)
        })
        .collect()
}

/// Evaluates every adapter against the truth set (and optional future set),
/// producing one row per adapter in input order.
///
/// The full-order reference propagation is computed once per snapshot set
/// and shared across adapters. A non-finite reconstruction poisons only the
/// energy-ratio entry of its row (reported as +∞ with a diagnostic), in the
/// same spirit as divergent propagations.
pub fn run_comparison(
    adapters: &[&dyn RomAdapter],
    truth: &SnapshotSet<f64>,
    future: Option<&SnapshotSet<f64>>,
    cfg: &FomConfig,
    energy_on_raw_state: bool,
) -> Result<EvalReport> {
    let model = QgeModel::new(truth.grid, *cfg)?;
    let current_refs = reference_states(truth, &model)?;
    let future_refs = future.map(|f| reference_states(f, &model)).transpose()?;

    let mut diagnostics: Vec<String> = Vec::new();
    diagnostics.extend(
        current_refs
            .diagnostics()
            .iter()
            .map(|d| format!("current window: {d}")),
    );
    if let Some(refs) = &future_refs {
        diagnostics.extend(refs.diagnostics().iter().map(|d| format!("future window: {d}")));
    }

    let mut rows = Vec::with_capacity(adapters.len());
    for adapter in adapters {
        let start = Instant::now();
        let recons = reconstructions(*adapter, truth)?;
        let energy = if recons.iter().all(Field::all_finite) {
            energy_ratio(truth, &recons, energy_on_raw_state)?
        } else {
            diagnostics.push(format!(
                "{} (r={}): non-finite reconstructions; energy ratio reported as +inf",
                adapter.kind(),
                adapter.order()
            ));
            f64::INFINITY
        };
        drop(recons);

        let current = score_against_references(*adapter, truth, &current_refs)?;
        diagnostics.extend(current.diagnostics);
        let future_score = match (&future_refs, future) {
            (Some(refs), Some(set)) => {
                let out = score_against_references(*adapter, set, refs)?;
                diagnostics.extend(out.diagnostics);
                Some(out.score)
            }
            _ => None,
        };

        rows.push(ReportRow {
            model: adapter.kind().to_string(),
            r: adapter.order(),
            energy_ratio: energy,
            rel_l2_current: current.score,
            rel_l2_future: future_score,
            wall_seconds: start.elapsed().as_secs_f64(),
        });
    }
    Ok(EvalReport { rows, diagnostics })
}

/// Writes fields as consecutive little-endian doubles (`<name>.bin`) with an
/// ASCII sidecar (`<name>.txt`) recording `nx ny lx ly count`.
pub fn dump_fields(dir: &Path, name: &str, fields: &[Field<f64>]) -> Result<()> {
    if fields.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let grid = *fields[0].grid();
    for f in fields {
        grid.same_as(f.grid())?;
    }
    atomic_write(&dir.join(format!("{name}.bin")), |w| {
        for f in fields {
            bytes::write_f64s(w, f.values())?;
        }
        Ok(())
    })?;
    atomic_write(&dir.join(format!("{name}.txt")), |w| {
        use std::io::Write as _;
        writeln!(w, "{} {} {} {} {}", grid.nx, grid.ny, grid.lx, grid.ly, fields.len())
            .map_err(Error::from)
    })
}
