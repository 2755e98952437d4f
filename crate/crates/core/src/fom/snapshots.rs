//! Spin-up from rest and snapshot sampling of the full-order model.

use crate::error::{Error, Result};
use crate::fom::integrate::advance;
use crate::fom::model::QgeModel;
use crate::grid::{Field, Grid};
use crate::scalar::Real;

/// Trajectory sample: states, their tendencies, and the ensemble mean.
///
/// The tendency of every stored state is evaluated once here so downstream
/// consumers (quadratic model calibration, dynamics-aware training) never
/// re-run the full-order operator.
#[derive(Debug, Clone)]
pub struct SnapshotSet<T> {
    pub grid: Grid<T>,
    /// Sample times, strictly increasing, spaced by the snapshot interval.
    pub times: Vec<T>,
    /// Vorticity snapshots.
    pub states: Vec<Field<T>>,
    /// Full-order tendency at each snapshot.
    pub rhs: Vec<Field<T>>,
    /// Pointwise mean of `states`.
    pub mean: Field<T>,
}

impl<T: Real> SnapshotSet<T> {
    /// Number of stored snapshots.
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Checks the internal size relations.
    pub fn validate(&self) -> Result<()> {
        if self.times.len() != self.states.len() || self.rhs.len() != self.states.len() {
            return Err(Error::BatchMisaligned {
                states: self.states.len(),
                rhs: self.rhs.len(),
            });
        }
        for w in self.times.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::DegenerateInput {
                    what: "snapshot times must be strictly increasing".into(),
                });
            }
        }
        for f in self.states.iter().chain(&self.rhs) {
            self.grid.same_as(f.grid())?;
        }
        self.grid.same_as(self.mean.grid())?;
        Ok(())
    }

    pub(crate) fn mean_of_states(grid: Grid<T>, states: &[Field<T>]) -> Field<T> {
        let mut mean = Field::zeros(grid);
        let inv = T::one() / T::of_usize(states.len().max(1));
        for s in states {
            mean.axpy(inv, s);
        }
        mean
    }
}

/// Integrates the model from rest until model time reaches
/// `cfg.spin_up_time`, returning the final vorticity.
pub fn spin_up<T: Real>(model: &QgeModel<T>) -> Result<Field<T>> {
    let cfg = *model.config();
    let dt = cfg.dt_internal();
    let steps = (cfg.spin_up_time / dt).ceil() as usize;
    let zero = Field::zeros(*model.grid());
    advance(zero, 0.0, T::of(dt), steps, |w| model.rhs(w))
}

/// Samples `cfg.n_snapshots` states starting at `initial`, taking
/// `cfg.substeps` internal RK4 steps between consecutive stores.
pub fn generate_snapshots<T: Real>(model: &QgeModel<T>, initial: Field<T>) -> Result<SnapshotSet<T>> {
    model.grid().same_as(initial.grid())?;
    let cfg = *model.config();
    let n = cfg.n_snapshots;
    let dt = T::of(cfg.dt_internal());

    let mut states = Vec::with_capacity(n);
    states.push(initial);
    for k in 1..n {
        let t0 = (k - 1) as f64 * cfg.dt_snapshot;
        let next = advance(states[k - 1].clone(), t0, dt, cfg.substeps, |w| model.rhs(w))?;
        states.push(next);
    }

    let times = (0..n).map(|k| T::of_usize(k) * T::of(cfg.dt_snapshot)).collect();
    let rhs = states.iter().map(|w| model.rhs(w)).collect::<Result<Vec<_>>>()?;
    let mean = SnapshotSet::mean_of_states(*model.grid(), &states);
    Ok(SnapshotSet {
        grid: *model.grid(),
        times,
        states,
        rhs,
        mean,
    })
}
