//! Direct solver for the streamfunction equation -Δψ = ω with homogeneous
//! Dirichlet boundaries on a uniform grid.
//!
//! The discrete operator is diagonalized by a type-I discrete sine transform
//! along y; each y-wavenumber then reduces to a constant-coefficient
//! tridiagonal system along x, solved by the Thomas algorithm. Elimination
//! coefficients depend only on the grid, so they are precomputed once and the
//! per-solve work is two small dense transforms plus vectorized sweeps.

use crate::grid::{Field, Grid};
use crate::scalar::Real;

/// Reusable factorization of -Δ on a fixed grid.
#[derive(Debug, Clone)]
pub struct PoissonSolver<T> {
    grid: Grid<T>,
    /// Symmetric DST-I matrix, `dst[m * my + q] = sin(pi (m+1)(q+1) / (my+1))`.
    dst: Vec<T>,
    /// Inverse-transform scaling `2 / (my + 1)`.
    inv_scale: T,
    /// Thomas upper coefficients, indexed `i * my + m`.
    c_prime: Vec<T>,
    /// Reciprocal pivots of the forward sweep, indexed `i * my + m`.
    inv_den: Vec<T>,
}

impl<T: Real> PoissonSolver<T> {
    /// Precomputes the transform and elimination tables for `grid`.
    pub fn new(grid: Grid<T>) -> Self {
        let mx = grid.nx - 2;
        let my = grid.ny - 2;
        let hy2 = grid.hy() * grid.hy();
        let pi = T::of(std::f64::consts::PI);
        let nyp = T::of_usize(my + 1);

        let mut dst = vec![T::zero(); my * my];
        for m in 0..my {
            for q in 0..my {
                dst[m * my + q] = (pi * T::of_usize(m + 1) * T::of_usize(q + 1) / nyp).sin();
            }
        }

        // Eigenvalues of the 1D second-difference operator along y.
        let two = T::of(2.0);
        let mu: Vec<T> = (0..my)
            .map(|m| (two - two * (pi * T::of_usize(m + 1) / nyp).cos()) / hy2)
            .collect();

        // For each wavenumber the x-system is tridiagonal with constant
        // off-diagonal `off` and diagonal `diag_m`; eliminate all wavenumbers
        // in lockstep so the inner loops below run contiguously over m.
        let ihx2 = T::one() / (grid.hx() * grid.hx());
        let off = -ihx2;
        let mut c_prime = vec![T::zero(); mx * my];
        let mut inv_den = vec![T::zero(); mx * my];
        for m in 0..my {
            let diag = two * ihx2 + mu[m];
            inv_den[m] = T::one() / diag;
            c_prime[m] = off * inv_den[m];
        }
        for i in 1..mx {
            for m in 0..my {
                let den = T::one() / ((two * ihx2 + mu[m]) - off * c_prime[(i - 1) * my + m]);
                inv_den[i * my + m] = den;
                c_prime[i * my + m] = off * den;
            }
        }

        Self {
            grid,
            dst,
            inv_scale: two / nyp,
            c_prime,
            inv_den,
        }
    }

    /// Grid this factorization belongs to.
    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    /// Solves -Δψ = ω; the result has a zero boundary ring.
    pub fn solve(&self, omega: &Field<T>) -> Field<T> {
        let g = self.grid;
        let (nx, mx, my) = (g.nx, g.nx - 2, g.ny - 2);
        let v = omega.values();

        // Interior, transposed so y runs fastest: work[i * my + q].
        let mut work = vec![T::zero(); mx * my];
        for q in 0..my {
            let row = (q + 1) * nx + 1;
            for i in 0..mx {
                work[i * my + q] = v[row + i];
            }
        }

        // Forward sine transform of every x-column.
        let mut hat = vec![T::zero(); mx * my];
        self.apply_dst(&work, &mut hat, T::one());

        // Batched Thomas sweeps along x, vectorized over wavenumbers.
        let off = -(T::one() / (g.hx() * g.hx()));
        for m in 0..my {
            hat[m] = hat[m] * self.inv_den[m];
        }
        for i in 1..mx {
            let (prev, cur) = hat.split_at_mut(i * my);
            let prev = &prev[(i - 1) * my..];
            for m in 0..my {
                cur[m] = (cur[m] - off * prev[m]) * self.inv_den[i * my + m];
            }
        }
        // Back-substitution.
        for i in (0..mx - 1).rev() {
            let (cur, next) = hat.split_at_mut((i + 1) * my);
            let cur = &mut cur[i * my..];
            for m in 0..my {
                cur[m] = cur[m] - self.c_prime[i * my + m] * next[m];
            }
        }

        // Inverse transform and transpose back.
        self.apply_dst(&hat, &mut work, self.inv_scale);
        let mut psi = Field::zeros(g);
        let o = psi.values_mut();
        for q in 0..my {
            let row = (q + 1) * nx + 1;
            for i in 0..mx {
                o[row + i] = work[i * my + q];
            }
        }
        psi
    }

    /// out[i*my + m] = scale * sum_q dst[m*my + q] * input[i*my + q].
    fn apply_dst(&self, input: &[T], out: &mut [T], scale: T) {
        let my = self.grid.ny - 2;
        let mx = self.grid.nx - 2;
        for i in 0..mx {
            let col = &input[i * my..(i + 1) * my];
            let dst_col = &mut out[i * my..(i + 1) * my];
            for m in 0..my {
                let row = &self.dst[m * my..(m + 1) * my];
                let mut acc = T::zero();
                for q in 0..my {
                    acc = acc + row[q] * col[q];
                }
                dst_col[m] = acc * scale;
            }
        }
    }
}

/// One-shot convenience wrapper around [`PoissonSolver`].
pub fn poisson_solve<T: Real>(omega: &Field<T>) -> Field<T> {
    PoissonSolver::new(*omega.grid()).solve(omega)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ad::rng::SplitMix64;
    use crate::fom::stencil::laplacian;

    fn random_interior(grid: Grid<f64>, seed: u64) -> Field<f64> {
        let mut rng = SplitMix64::new(seed);
        let mut f = Field::zeros(grid);
        for j in 1..grid.ny - 1 {
            for i in 1..grid.nx - 1 {
                f.set(i, j, rng.uniform(-1.0, 1.0));
            }
        }
        f
    }

    /// Dense Gaussian-elimination solve of the same interior system,
    /// assembled directly from the five-point stencil.
    fn dense_reference(omega: &Field<f64>) -> Field<f64> {
        let g = *omega.grid();
        let (mx, my) = (g.nx - 2, g.ny - 2);
        let n = mx * my;
        let (ihx2, ihy2) = (1.0 / (g.hx() * g.hx()), 1.0 / (g.hy() * g.hy()));
        let mut a = vec![0.0f64; n * n];
        let mut rhs = vec![0.0f64; n];
        for q in 0..my {
            for p in 0..mx {
                let r = q * mx + p;
                a[r * n + r] = 2.0 * (ihx2 + ihy2);
                if p > 0 {
                    a[r * n + r - 1] = -ihx2;
                }
                if p + 1 < mx {
                    a[r * n + r + 1] = -ihx2;
                }
                if q > 0 {
                    a[r * n + r - mx] = -ihy2;
                }
                if q + 1 < my {
                    a[r * n + r + mx] = -ihy2;
                }
                rhs[r] = omega.get(p + 1, q + 1);
            }
        }
        // Partial-pivot elimination.
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&x, &y| a[x * n + col].abs().partial_cmp(&a[y * n + col].abs()).unwrap())
                .unwrap();
            if piv != col {
                for c in 0..n {
                    a.swap(col * n + c, piv * n + c);
                }
                rhs.swap(col, piv);
            }
            for r in col + 1..n {
                let f = a[r * n + col] / a[col * n + col];
                for c in col..n {
                    a[r * n + c] -= f * a[col * n + c];
                }
                rhs[r] -= f * rhs[col];
            }
        }
        for r in (0..n).rev() {
            let mut s = rhs[r];
            for c in r + 1..n {
                s -= a[r * n + c] * rhs[c];
            }
            rhs[r] = s / a[r * n + r];
        }
        let mut psi = Field::zeros(g);
        for q in 0..my {
            for p in 0..mx {
                psi.set(p + 1, q + 1, rhs[q * mx + p]);
            }
        }
        psi
    }

    #[test]
    fn recovers_discrete_eigenfunctions_exactly() {
        let g = Grid::new(17, 13, 1.0, 2.0).unwrap();
        let pi = std::f64::consts::PI;
        for (k, m) in [(1.0, 1.0), (3.0, 2.0), (5.0, 4.0)] {
            let f = Field::from_fn(g, |x, y| (pi * k * x / g.lx).sin() * (pi * m * y / g.ly).sin());
            let sx = (pi * k * g.hx() / (2.0 * g.lx)).sin();
            let sy = (pi * m * g.hy() / (2.0 * g.ly)).sin();
            let lambda = (4.0 / (g.hx() * g.hx())) * sx * sx + (4.0 / (g.hy() * g.hy())) * sy * sy;
            let mut omega = f.clone();
            omega.scale(lambda);
            let psi = poisson_solve(&omega);
            let mut worst = 0.0f64;
            for (a, b) in psi.values().iter().zip(f.values()) {
                worst = worst.max((a - b).abs());
            }
            assert!(worst <= 1e-12, "mode ({k},{m}) deviates by {worst:.3e}");
        }
    }

    #[test]
    fn residual_of_random_solve_is_tiny() {
        for (nx, ny) in [(9usize, 5usize), (12, 17), (33, 17)] {
            let g = Grid::new(nx, ny, 1.0, 2.0).unwrap();
            let omega = random_interior(g, 77);
            let psi = poisson_solve(&omega);
            assert!(psi.boundary_is_zero());
            let mut lap = laplacian(&psi);
            lap.scale(-1.0);
            let mut worst = 0.0f64;
            for j in 1..ny - 1 {
                for i in 1..nx - 1 {
                    worst = worst.max((lap.get(i, j) - omega.get(i, j)).abs());
                }
            }
            let scale = omega.max_abs().max(1.0) / (g.hx() * g.hx()).min(1.0);
            assert!(worst <= 1e-10 * scale, "{nx}x{ny}: residual {worst:.3e}");
        }
    }

    #[test]
    fn matches_dense_elimination_oracle() {
        for (nx, ny) in [(6usize, 9usize), (9, 5), (11, 11)] {
            let g = Grid::new(nx, ny, 1.3, 0.8).unwrap();
            let omega = random_interior(g, 5);
            let fast = poisson_solve(&omega);
            let dense = dense_reference(&omega);
            let scale = dense.max_abs().max(1.0);
            for (a, b) in fast.values().iter().zip(dense.values()) {
                assert!((a - b).abs() <= 1e-10 * scale, "{nx}x{ny}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn solver_is_reusable_across_right_hand_sides() {
        let g = Grid::new(13, 9, 1.0, 2.0).unwrap();
        let solver = PoissonSolver::new(g);
        for seed in [1u64, 2, 3] {
            let omega = random_interior(g, seed);
            let once = solver.solve(&omega);
            let fresh = poisson_solve(&omega);
            for (a, b) in once.values().iter().zip(fresh.values()) {
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn zero_source_gives_zero_solution() {
        let g = Grid::new(9, 9, 1.0, 1.0).unwrap();
        let psi = poisson_solve(&Field::<f64>::zeros(g));
        assert!(psi.max_abs() == 0.0);
    }
}
