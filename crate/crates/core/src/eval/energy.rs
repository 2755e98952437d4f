//! Velocity-energy diagnostics comparing reconstructions against truth.
//!
//! The pointwise velocity energy of a field f is (∂f/∂x)² + (∂f/∂y)², using
//! the same derivative stencils as the solver (central in the interior,
//! one-sided second-order on the boundary). Summed over a trajectory it gives
//! a single scalar fidelity measure: the ratio of reconstructed to true
//! energy, which equals 1 for perfect reconstructions and tends to drop as
//! fine-scale structure is truncated.

use crate::error::{Error, Result};
use crate::fom::poisson::PoissonSolver;
use crate::fom::snapshots::SnapshotSet;
use crate::fom::stencil::{ddx, ddy};
use crate::grid::Field;
use crate::scalar::Real;

/// Pointwise velocity energy (∂f/∂x)² + (∂f/∂y)² of a field.
pub fn velocity_energy<T: Real>(f: &Field<T>) -> Field<T> {
    let dx = ddx(f);
    let mut out = ddy(f);
    for (o, u) in out.values_mut().iter_mut().zip(dx.values()) {
        let v = *o;
        *o = *u * *u + v * v;
    }
    out
}

/// Velocity energy summed over every grid point.
pub fn total_velocity_energy<T: Real>(f: &Field<T>) -> T {
    let e = velocity_energy(f);
    let mut s = T::zero();
    for v in e.values() {
        s = s + *v;
    }
    s
}

/// Ratio of total reconstructed velocity energy to total true velocity
/// energy, accumulated over every snapshot/reconstruction pair in order.
///
/// Each vorticity state is first converted to its streamfunction, whose
/// gradient is the physical velocity; passing `on_raw_state` skips that
/// conversion and evaluates the energy on the stored fields directly.
///
/// Identical inputs give exactly 1, all-zero reconstructions give 0, and a
/// truth set with no velocity energy at all is rejected as degenerate.
pub fn energy_ratio<T: Real>(
    truth: &SnapshotSet<T>,
    recons: &[Field<T>],
    on_raw_state: bool,
) -> Result<T> {
    if truth.states.is_empty() {
        return Err(Error::EmptyBatch);
    }
    if recons.len() != truth.states.len() {
        return Err(Error::Length {
            what: "reconstruction list",
            expected: truth.states.len(),
            got: recons.len(),
        });
    }
    let solver = (!on_raw_state).then(|| PoissonSolver::new(truth.grid));
    let mut num = T::zero();
    let mut den = T::zero();
    for (x, xr) in truth.states.iter().zip(recons) {
        truth.grid.same_as(xr.grid())?;
        let (true_energy, recon_energy) = match &solver {
            Some(s) => (
                total_velocity_energy(&s.solve(x)),
                total_velocity_energy(&s.solve(xr)),
            ),
            None => (total_velocity_energy(x), total_velocity_energy(xr)),
        };
        num = num + recon_energy;
        den = den + true_energy;
    }
    if den == T::zero() {
        return Err(Error::DegenerateInput {
            what: "truth set has zero total velocity energy".into(),
        });
    }
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ad::rng::SplitMix64;
    use crate::grid::Grid;

    fn grid() -> Grid<f64> {
        Grid::new(9, 5, 1.0, 2.0).unwrap()
    }

    fn random_field(grid: Grid<f64>, seed: u64) -> Field<f64> {
        let mut rng = SplitMix64::new(seed);
        let vals: Vec<f64> = (0..grid.len()).map(|_| rng.uniform(-1.0, 1.0)).collect();
        Field::from_values(grid, vals).unwrap()
    }

    /// Snapshot set whose only meaningful content is `states`.
    fn set_of(states: Vec<Field<f64>>) -> SnapshotSet<f64> {
        let g = *states[0].grid();
        let n = states.len();
        SnapshotSet {
            grid: g,
            times: (0..n).map(|i| i as f64).collect(),
            rhs: vec![Field::zeros(g); n],
            mean: Field::zeros(g),
            states,
        }
    }

    #[test]
    fn constant_field_has_zero_energy() {
        let f = Field::from_fn(grid(), |_, _| 3.75);
        let e = velocity_energy(&f);
        for v in e.values() {
            assert_eq!(*v, 0.0);
        }
    }

    #[test]
    fn linear_ramp_has_unit_energy_everywhere() {
        // f = x has ∂f/∂x = 1 and ∂f/∂y = 0; both the central and the
        // one-sided stencils are exact on linear fields, so the energy is 1
        // at every grid point including the boundary.
        let f = Field::from_fn(grid(), |x, _| x);
        let e = velocity_energy(&f);
        for v in e.values() {
            assert!((v - 1.0).abs() < 1e-12, "energy {v} != 1");
        }
    }

    /// Dense one-sided/central derivative matrices built independently of the
    /// stencil module, applied by plain matrix-vector product.
    fn dense_derivative(vals: &[f64], g: &Grid<f64>, along_x: bool) -> Vec<f64> {
        let (nx, ny) = (g.nx, g.ny);
        let n = nx * ny;
        let h = if along_x { g.hx() } else { g.hy() };
        let extent = if along_x { nx } else { ny };
        let mut mat = vec![0.0; n * n];
        for j in 0..ny {
            for i in 0..nx {
                let row = g.idx(i, j);
                let pos = if along_x { i } else { j };
                let at = |p: usize| if along_x { g.idx(p, j) } else { g.idx(i, p) };
                if pos == 0 {
                    mat[row * n + at(0)] = -1.5 / h;
                    mat[row * n + at(1)] = 2.0 / h;
                    mat[row * n + at(2)] = -0.5 / h;
                } else if pos == extent - 1 {
                    mat[row * n + at(extent - 1)] = 1.5 / h;
                    mat[row * n + at(extent - 2)] = -2.0 / h;
                    mat[row * n + at(extent - 3)] = 0.5 / h;
                } else {
                    mat[row * n + at(pos + 1)] = 0.5 / h;
                    mat[row * n + at(pos - 1)] = -0.5 / h;
                }
            }
        }
        (0..n)
            .map(|row| (0..n).map(|c| mat[row * n + c] * vals[c]).sum())
            .collect()
    }

    #[test]
    fn energy_matches_dense_operator_oracle() {
        let g = grid();
        let f = random_field(g, 42);
        let dx = dense_derivative(f.values(), &g, true);
        let dy = dense_derivative(f.values(), &g, false);
        let e = velocity_energy(&f);
        for (k, v) in e.values().iter().enumerate() {
            let want = dx[k] * dx[k] + dy[k] * dy[k];
            assert!((v - want).abs() < 1e-12, "point {k}: {v} vs {want}");
        }
    }

    #[test]
    fn identical_reconstructions_give_exactly_one() {
        let g = grid();
        let states: Vec<_> = (0..3).map(|s| random_field(g, 100 + s)).collect();
        let set = set_of(states.clone());
        assert_eq!(energy_ratio(&set, &states, false).unwrap(), 1.0);
        assert_eq!(energy_ratio(&set, &states, true).unwrap(), 1.0);
    }

    #[test]
    fn zero_reconstructions_give_zero() {
        let g = grid();
        let set = set_of(vec![random_field(g, 7), random_field(g, 8)]);
        let zeros = vec![Field::zeros(g); 2];
        assert_eq!(energy_ratio(&set, &zeros, false).unwrap(), 0.0);
    }

    #[test]
    fn ratio_is_invariant_under_snapshot_relabeling() {
        let g = grid();
        let states: Vec<_> = (0..4).map(|s| random_field(g, 200 + s)).collect();
        let recons: Vec<_> = (0..4).map(|s| random_field(g, 300 + s)).collect();
        let a = energy_ratio(&set_of(states.clone()), &recons, false).unwrap();
        let perm = [2usize, 0, 3, 1];
        let b = energy_ratio(
            &set_of(perm.iter().map(|&i| states[i].clone()).collect()),
            &perm.iter().map(|&i| recons[i].clone()).collect::<Vec<_>>(),
            false,
        )
        .unwrap();
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }

    #[test]
    fn zero_truth_is_rejected_as_degenerate() {
        let g = grid();
        let set = set_of(vec![Field::zeros(g); 2]);
        let recons = vec![random_field(g, 1), random_field(g, 2)];
        let err = energy_ratio(&set, &recons, false).unwrap_err();
        assert!(matches!(err, Error::DegenerateInput { .. }), "{err}");
    }

    #[test]
    fn raw_and_streamfunction_readings_differ_in_general() {
        let g = grid();
        let states = vec![random_field(g, 11)];
        let mut shifted = states[0].clone();
        shifted.axpy(0.3, &random_field(g, 12));
        let set = set_of(states);
        let raw = energy_ratio(&set, std::slice::from_ref(&shifted), true).unwrap();
        let psi = energy_ratio(&set, std::slice::from_ref(&shifted), false).unwrap();
        assert!((raw - psi).abs() > 1e-12, "raw {raw} == streamfunction {psi}");
    }

    #[test]
    fn size_and_grid_mismatches_are_rejected() {
        let g = grid();
        let set = set_of(vec![random_field(g, 1), random_field(g, 2)]);
        let err = energy_ratio(&set, &[random_field(g, 3)], false).unwrap_err();
        assert!(matches!(err, Error::Length { .. }), "{err}");

        let other = Grid::new(7, 5, 1.0, 2.0).unwrap();
        let bad = vec![Field::zeros(other), Field::zeros(other)];
        let err = energy_ratio(&set, &bad, false).unwrap_err();
        assert!(matches!(err, Error::GridMismatch { .. }), "{err}");

        let empty = SnapshotSet {
            grid: g,
            times: vec![],
            states: vec![],
            rhs: vec![],
            mean: Field::zeros(g),
        };
        let err = energy_ratio(&empty, &[], false).unwrap_err();
        assert!(matches!(err, Error::EmptyBatch), "{err}");
    }
}
