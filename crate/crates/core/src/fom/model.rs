//! Quasi-geostrophic vorticity dynamics on a uniform grid.
//!
//! The state is the vorticity ω with homogeneous Dirichlet walls; the
//! streamfunction is recovered on demand by the direct Poisson solver. The
//! right-hand side combines Arakawa advection, planetary rotation, diffusion,
//! and a steady double-gyre wind forcing:
//!
//! dω/dt = -J(ω, ψ) + Ro⁻¹ ∂ψ/∂x + Re⁻¹ Δω + Ro⁻¹ F,  F(y) = sin(π(y - 1)).

use crate::error::{Error, Result};
use crate::fom::poisson::PoissonSolver;
use crate::fom::stencil::{arakawa_jacobian, ddx, laplacian};
use crate::grid::{Field, Grid};
use crate::scalar::Real;

/// Physical and sampling parameters of the full-order model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FomConfig {
    /// Reynolds number.
    pub re: f64,
    /// Rossby number.
    pub ro: f64,
    /// Model time between stored snapshots.
    pub dt_snapshot: f64,
    /// Internal RK4 steps per snapshot interval.
    pub substeps: usize,
    /// Model time integrated from rest before sampling starts.
    pub spin_up_time: f64,
    /// Number of snapshots to store.
    pub n_snapshots: usize,
}

impl Default for FomConfig {
    fn default() -> Self {
        Self {
            re: 450.0,
            ro: 0.0036,
            dt_snapshot: 0.0109,
            substeps: 100,
            spin_up_time: 10.0,
            n_snapshots: 2001,
        }
    }
}

impl FomConfig {
    /// Rejects non-physical parameter combinations.
    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, reason: &str| Error::InvalidConfig {
            key: key.to_string(),
            reason: reason.to_string(),
        };
        if !(self.re > 0.0 && self.re.is_finite()) {
            return Err(bad("fom.re", "Reynolds number must be positive and finite"));
        }
        if !(self.ro > 0.0 && self.ro.is_finite()) {
            return Err(bad("fom.ro", "Rossby number must be positive and finite"));
        }
        if !(self.dt_snapshot > 0.0 && self.dt_snapshot.is_finite()) {
            return Err(bad("fom.dt_snapshot", "snapshot interval must be positive"));
        }
        if self.substeps == 0 {
            return Err(bad("fom.substeps", "at least one internal step per interval"));
        }
        if !(self.spin_up_time >= 0.0 && self.spin_up_time.is_finite()) {
            return Err(bad("fom.spin_up_time", "spin-up time must be nonnegative"));
        }
        if self.n_snapshots < 2 {
            return Err(bad("fom.n_snapshots", "need at least two snapshots"));
        }
        Ok(())
    }

    /// Internal RK4 step size.
    pub fn dt_internal(&self) -> f64 {
        self.dt_snapshot / self.substeps as f64
    }
}

/// Reusable right-hand-side evaluator: grid, parameters, Poisson
/// factorization, and the precomputed forcing field.
#[derive(Debug, Clone)]
pub struct QgeModel<T> {
    grid: Grid<T>,
    cfg: FomConfig,
    solver: PoissonSolver<T>,
    forcing: Field<T>,
}

impl<T: Real> QgeModel<T> {
    /// Builds the model with the standard double-gyre forcing sin(π(y-1)).
    pub fn new(grid: Grid<T>, cfg: FomConfig) -> Result<Self> {
        let pi = T::of(std::f64::consts::PI);
        let forcing = Field::from_fn(grid, |_, y| (pi * (y - T::one())).sin());
        Self::with_forcing(grid, cfg, forcing)
    }

    /// Builds the model with a caller-supplied forcing field.
    pub fn with_forcing(grid: Grid<T>, cfg: FomConfig, forcing: Field<T>) -> Result<Self> {
        cfg.validate()?;
        grid.same_as(forcing.grid())?;
        Ok(Self {
            grid,
            cfg,
            solver: PoissonSolver::new(grid),
            forcing,
        })
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn config(&self) -> &FomConfig {
        &self.cfg
    }

    /// Streamfunction of a vorticity field.
    pub fn streamfunction(&self, omega: &Field<T>) -> Result<Field<T>> {
        self.grid.same_as(omega.grid())?;
        Ok(self.solver.solve(omega))
    }

    /// Vorticity tendency; the boundary ring of the result is pinned to zero
    /// so time stepping preserves the wall condition.
    pub fn rhs(&self, omega: &Field<T>) -> Result<Field<T>> {
        self.grid.same_as(omega.grid())?;
        let psi = self.solver.solve(omega);
        let advection = arakawa_jacobian(omega, &psi)?;
        let diffusion = laplacian(omega);
        let rotation = ddx(&psi);
        let inv_ro = T::of(1.0 / self.cfg.ro);
        let inv_re = T::of(1.0 / self.cfg.re);

        let mut out = Field::zeros(self.grid);
        {
            let o = out.values_mut();
            let j = advection.values();
            let d = diffusion.values();
            let r = rotation.values();
            let f = self.forcing.values();
            for c in 0..o.len() {
                o[c] = -j[c] + inv_ro * r[c] + inv_re * d[c] + inv_ro * f[c];
            }
        }
        out.zero_boundary();
        Ok(out)
    }
}

/// One-shot tendency evaluation for callers without a prebuilt model.
pub fn qge_rhs<T: Real>(omega: &Field<T>, cfg: &FomConfig) -> Result<Field<T>> {
    QgeModel::new(*omega.grid(), *cfg)?.rhs(omega)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ad::rng::SplitMix64;

    fn random_state(grid: Grid<f64>, seed: u64) -> Field<f64> {
        let mut rng = SplitMix64::new(seed);
        let mut f = Field::zeros(grid);
        for j in 1..grid.ny - 1 {
            for i in 1..grid.nx - 1 {
                f.set(i, j, rng.uniform(-1.0, 1.0));
            }
        }
        f
    }

    #[test]
    fn rest_state_feels_only_the_forcing() {
        let g = Grid::new(9, 11, 1.0, 2.0).unwrap();
        let cfg = FomConfig::default();
        let model = QgeModel::new(g, cfg).unwrap();
        let rhs = model.rhs(&Field::zeros(g)).unwrap();
        for j in 1..g.ny - 1 {
            for i in 1..g.nx - 1 {
                let expect = (std::f64::consts::PI * (g.y(j) - 1.0)).sin() / cfg.ro;
                assert!((rhs.get(i, j) - expect).abs() <= 1e-12 * expect.abs().max(1.0));
            }
        }
        assert!(rhs.boundary_is_zero());
    }

    #[test]
    fn forcing_is_an_antisymmetric_double_gyre() {
        let g: Grid<f64> = Grid::new(7, 17, 1.0, 2.0).unwrap();
        let model = QgeModel::new(g, FomConfig::default()).unwrap();
        let rhs = model.rhs(&Field::zeros(g)).unwrap();
        // Forcing depends on y alone and flips sign across the midline y = 1.
        for j in 1..g.ny - 1 {
            for i in 2..g.nx - 1 {
                assert_eq!(rhs.get(i, j), rhs.get(1, j));
            }
            let mirror = g.ny - 1 - j;
            assert!((rhs.get(1, j) + rhs.get(1, mirror)).abs() <= 1e-9);
        }
    }

    #[test]
    fn tendency_without_forcing_is_exactly_quadratic() {
        let g = Grid::new(13, 9, 1.0, 2.0).unwrap();
        let cfg = FomConfig::default();
        let model = QgeModel::with_forcing(g, cfg, Field::zeros(g)).unwrap();
        let omega = random_state(g, 31);

        let mut twice = omega.clone();
        twice.scale(2.0);
        let mut minus = omega.clone();
        minus.scale(-1.0);

        let r1 = model.rhs(&omega).unwrap();
        let r2 = model.rhs(&twice).unwrap();
        let rm = model.rhs(&minus).unwrap();

        // With no constant term, rhs(2w) - 2 rhs(w) = 2 Q(w,w) where the pure
        // quadratic part is Q(w,w) = (rhs(w) + rhs(-w)) / 2.
        let scale = r2.max_abs().max(1.0);
        for c in 0..r1.values().len() {
            let lhs = r2.values()[c] - 2.0 * r1.values()[c];
            let q = 0.5 * (r1.values()[c] + rm.values()[c]);
            assert!((lhs - 2.0 * q).abs() <= 1e-10 * scale, "index {c}");
        }
    }

    #[test]
    fn matches_naive_dense_assembly_of_linear_terms() {
        let g = Grid::new(9, 9, 1.0, 2.0).unwrap();
        let cfg = FomConfig::default();
        let model = QgeModel::new(g, cfg).unwrap();
        let omega = random_state(g, 99);
        let fast = model.rhs(&omega).unwrap();

        // Independent path: apply the Laplacian and d/dx as explicitly
        // assembled dense matrices over all grid points.
        let n = g.nx * g.ny;
        let (ihx2, ihy2) = (1.0 / (g.hx() * g.hx()), 1.0 / (g.hy() * g.hy()));
        let mut lap = vec![0.0f64; n * n];
        for j in 1..g.ny - 1 {
            for i in 1..g.nx - 1 {
                let r = g.idx(i, j);
                lap[r * n + r] = -2.0 * (ihx2 + ihy2);
                lap[r * n + g.idx(i - 1, j)] = ihx2;
                lap[r * n + g.idx(i + 1, j)] = ihx2;
                lap[r * n + g.idx(i, j - 1)] = ihy2;
                lap[r * n + g.idx(i, j + 1)] = ihy2;
            }
        }
        let mut dx = vec![0.0f64; n * n];
        let h2 = 1.0 / (2.0 * g.hx());
        for j in 0..g.ny {
            let r0 = g.idx(0, j);
            dx[r0 * n + g.idx(0, j)] = -3.0 * h2;
            dx[r0 * n + g.idx(1, j)] = 4.0 * h2;
            dx[r0 * n + g.idx(2, j)] = -h2;
            for i in 1..g.nx - 1 {
                let r = g.idx(i, j);
                dx[r * n + g.idx(i + 1, j)] = h2;
                dx[r * n + g.idx(i - 1, j)] = -h2;
            }
            let re = g.idx(g.nx - 1, j);
            dx[re * n + g.idx(g.nx - 1, j)] = 3.0 * h2;
            dx[re * n + g.idx(g.nx - 2, j)] = -4.0 * h2;
            dx[re * n + g.idx(g.nx - 3, j)] = h2;
        }
        let matvec = |m: &[f64], v: &[f64]| -> Vec<f64> {
            (0..n).map(|r| (0..n).map(|c| m[r * n + c] * v[c]).sum()).collect()
        };

        let psi = model.streamfunction(&omega).unwrap();
        let advection = arakawa_jacobian(&omega, &psi).unwrap();
        let lap_w = matvec(&lap, omega.values());
        let dx_psi = matvec(&dx, psi.values());
        let mut naive = Field::zeros(g);
        for j in 0..g.ny {
            for i in 0..g.nx {
                let c = g.idx(i, j);
                let f = (std::f64::consts::PI * (g.y(j) - 1.0)).sin();
                let v = -advection.values()[c] + dx_psi[c] / cfg.ro + lap_w[c] / cfg.re + f / cfg.ro;
                naive.set(i, j, v);
            }
        }
        naive.zero_boundary();

        let scale = fast.max_abs().max(1.0);
        for (a, b) in fast.values().iter().zip(naive.values()) {
            assert!((a - b).abs() <= 1e-10 * scale, "{a} vs {b}");
        }
    }

    #[test]
    fn config_validation_rejects_bad_parameters() {
        let ok = FomConfig::default();
        assert!(ok.validate().is_ok());
        assert!(FomConfig { re: 0.0, ..ok }.validate().is_err());
        assert!(FomConfig { ro: -1.0, ..ok }.validate().is_err());
        assert!(FomConfig { dt_snapshot: 0.0, ..ok }.validate().is_err());
        assert!(FomConfig { substeps: 0, ..ok }.validate().is_err());
        assert!(FomConfig { spin_up_time: f64::NAN, ..ok }.validate().is_err());
        assert!(FomConfig { n_snapshots: 1, ..ok }.validate().is_err());
    }

    #[test]
    fn rhs_rejects_mismatched_grid() {
        let g = Grid::new(9, 9, 1.0, 2.0).unwrap();
        let other = Grid::new(9, 11, 1.0, 2.0).unwrap();
        let model = QgeModel::new(g, FomConfig::default()).unwrap();
        assert!(model.rhs(&Field::zeros(other)).is_err());
    }
}
