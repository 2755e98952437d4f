//! Short-horizon propagation scoring of reduced dynamics.
//!
//! From every stored snapshot, the full-order model and the reduced model
//! are both advanced half a snapshot interval with the same RK4 step; the
//! reduced endpoint is reconstructed to full space and compared against the
//! full-order endpoint. The score sums the per-snapshot relative squared
//! errors, so a faithful reduced model scores near zero and a diverging one
//! scores +∞ rather than aborting the sweep.

use crate::error::{Error, Result};
use crate::eval::adapters::RomAdapter;
use crate::fom::integrate::advance;
use crate::fom::model::{FomConfig, QgeModel};
use crate::fom::snapshots::SnapshotSet;
use crate::grid::Field;

/// Number of RK4 steps taken from every snapshot.
pub const PROPAGATION_STEPS: usize = 50;
/// Propagated horizon as a fraction of the snapshot interval.
pub const HORIZON_FRACTION: f64 = 0.5;

/// Aggregate score plus per-snapshot notes about divergent propagations.
#[derive(Debug, Clone)]
pub struct PropagationOutcome {
    /// Σᵢ ‖x′ᵢ − x̃′ᵢ‖² / ‖x′ᵢ‖²; +∞ when any propagation diverged.
    pub score: f64,
    /// One line per failure explaining which snapshot diverged and how.
    pub diagnostics: Vec<String>,
}

/// Full-order endpoints advanced half a snapshot interval, computed once and
/// reusable across every adapter scored against the same truth set.
#[derive(Debug, Clone)]
pub struct ReferenceStates {
    states: Vec<Option<Field<f64>>>,
    diagnostics: Vec<String>,
    dt_step: f64,
}

impl ReferenceStates {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Notes about snapshots whose full-order propagation diverged.
    pub fn diagnostics(&self) -> &[String] {
        &self.diagnostics
    }

    /// RK4 step size used for both the full-order and the reduced path.
    pub fn step_size(&self) -> f64 {
        self.dt_step
    }
}

/// Advances every snapshot by half a snapshot interval under the full-order
/// dynamics. A divergent snapshot is recorded with a diagnostic instead of
/// failing the sweep; structural problems (grid mismatch, empty input) still
/// error.
pub fn reference_states(
    truth: &SnapshotSet<f64>,
    model: &QgeModel<f64>,
) -> Result<ReferenceStates> {
    truth.grid.same_as(model.grid())?;
    if truth.states.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let dt_step = model.config().dt_snapshot * HORIZON_FRACTION / PROPAGATION_STEPS as f64;
    let mut states = Vec::with_capacity(truth.states.len());
    let mut diagnostics = Vec::new();
    for (i, x) in truth.states.iter().enumerate() {
        match advance(x.clone(), truth.times[i], dt_step, PROPAGATION_STEPS, |f| {
            model.rhs(f)
        }) {
            Ok(endpoint) => states.push(Some(endpoint)),
            Err(e) if e.is_divergence() => {
                diagnostics.push(format!("snapshot {i}: full-order propagation diverged: {e}"));
                states.push(None);
            }
            Err(e) => return Err(e),
        }
    }
    Ok(ReferenceStates { states, diagnostics, dt_step })
}

/// Relative squared error of one endpoint pair. A zero-energy reference
/// contributes 0 against a zero reconstruction and +∞ against anything else.
fn pair_score(reference: &Field<f64>, recon: &Field<f64>) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (a, b) in reference.values().iter().zip(recon.values()) {
        let d = a - b;
        num += d * d;
        den += a * a;
    }
    if den == 0.0 {
        if num == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        num / den
    }
}

/// Sum of per-pair relative squared errors ‖x′ᵢ − x̃′ᵢ‖² / ‖x′ᵢ‖².
///
/// Scaling every reference and reconstruction by a common constant leaves
/// the sum unchanged (each term is a ratio of quadratics).
pub fn relative_l2_sum(references: &[Field<f64>], recons: &[Field<f64>]) -> Result<f64> {
    if references.len() != recons.len() {
        return Err(Error::Length {
            what: "reconstruction list",
            expected: references.len(),
            got: recons.len(),
        });
    }
    let mut total = 0.0;
    for (a, b) in references.iter().zip(recons) {
        a.grid().same_as(b.grid())?;
        total += pair_score(a, b);
    }
    Ok(total)
}

/// Scores one adapter against precomputed full-order endpoints.
///
/// The reduced state is projected from each snapshot, advanced with the same
/// step count and size as the reference, reconstructed, and compared. Any
/// divergence — in the stored reference, the reduced integration, or the
/// reconstruction — pins the score at +∞ and stops the sweep, since further
/// snapshots cannot change an infinite sum.
pub fn score_against_references(
    adapter: &dyn RomAdapter,
    truth: &SnapshotSet<f64>,
    refs: &ReferenceStates,
) -> Result<PropagationOutcome> {
    truth.grid.same_as(adapter.grid())?;
    if refs.states.len() != truth.states.len() {
        return Err(Error::Length {
            what: "reference endpoint list",
            expected: truth.states.len(),
            got: refs.states.len(),
        });
    }
    let kind = adapter.kind().to_string();
    let mut score = 0.0;
    let mut diagnostics = Vec::new();
    for i in 0..truth.states.len() {
        let Some(reference) = &refs.states[i] else {
            diagnostics.push(format!(
                "snapshot {i} ({kind}): full-order reference unavailable (diverged)"
            ));
            score = f64::INFINITY;
            break;
        };
        let z0 = adapter.project(&truth.states[i])?;
        let zp = match advance(z0, truth.times[i], refs.dt_step, PROPAGATION_STEPS, |z| {
            adapter.reduced_rhs(z)
        }) {
            Ok(z) => z,
            Err(e) if e.is_divergence() => {
                diagnostics.push(format!(
                    "snapshot {i} ({kind}): reduced propagation diverged: {e}"
                ));
                score = f64::INFINITY;
                break;
            }
            Err(e) => return Err(e),
        };
        let recon = match adapter.reconstruct(&zp) {
            Ok(f) if f.all_finite() => f,
            Ok(_) => {
                diagnostics.push(format!(
                    "snapshot {i} ({kind}): reconstruction of the propagated state is not finite"
                ));
                score = f64::INFINITY;
                break;
            }
            Err(e) if e.is_divergence() => {
                diagnostics.push(format!(
                    "snapshot {i} ({kind}): reconstruction diverged: {e}"
                ));
                score = f64::INFINITY;
                break;
            }
            Err(e) => return Err(e),
        };
        let s = pair_score(reference, &recon);
        if s.is_infinite() {
            diagnostics.push(format!(
                "snapshot {i} ({kind}): zero-energy reference with nonzero reconstruction"
            ));
            score = f64::INFINITY;
            break;
        }
        score += s;
    }
    Ok(PropagationOutcome { score, diagnostics })
}

/// Propagates and scores one adapter, reusing an already-built full-order
/// model. Reference diagnostics are merged into the outcome.
pub fn propagate_and_score_with(
    adapter: &dyn RomAdapter,
    truth: &SnapshotSet<f64>,
    model: &QgeModel<f64>,
) -> Result<PropagationOutcome> {
    let refs = reference_states(truth, model)?;
    let mut out = score_against_references(adapter, truth, &refs)?;
    let mut merged = refs.diagnostics;
    merged.append(&mut out.diagnostics);
    out.diagnostics = merged;
    Ok(out)
}

/// Propagates and scores one adapter under the given full-order
/// configuration.
pub fn propagate_and_score(
    adapter: &dyn RomAdapter,
    truth: &SnapshotSet<f64>,
    cfg: &FomConfig,
) -> Result<PropagationOutcome> {
    let model = QgeModel::new(truth.grid, *cfg)?;
    propagate_and_score_with(adapter, truth, &model)
}
