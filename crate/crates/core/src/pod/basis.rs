//! Proper-orthogonal-decomposition basis from snapshot data via the method
//! of snapshots.
//!
//! Snapshots are centered with their mean, the small N×N Gram matrix is
//! diagonalized instead of the huge n×n covariance (identical nonzero
//! spectrum), and spatial modes are recovered by mapping eigenvectors back
//! through the centered data. One modified Gram-Schmidt pass scrubs the
//! roundoff introduced by that mapping, and a sign convention makes the
//! result reproducible byte-for-byte.

use crate::error::{Error, Result};
use crate::fom::snapshots::SnapshotSet;
use crate::grid::{Field, Grid};
use crate::pod::eigen::symmetric_eigen_desc;
use crate::scalar::Real;

/// Relative eigenvalue floor below which a direction counts as numerically
/// rank-deficient.
pub const RANK_FLOOR: f64 = 1e-14;

/// Orthonormal spatial modes with their energy spectrum and the centering
/// mean.
#[derive(Debug, Clone, PartialEq)]
pub struct PodBasis<T> {
    /// Modes stored mode-contiguous: mode `k` is `modes[k*n .. (k+1)*n]`.
    modes: Vec<T>,
    /// Gram-matrix eigenvalues, nonincreasing, one per kept mode.
    eigenvalues: Vec<T>,
    /// Snapshot mean used for centering during construction.
    mean: Field<T>,
    r: usize,
}

impl<T: Real> PodBasis<T> {
    /// Number of kept modes.
    pub fn order(&self) -> usize {
        self.r
    }

    /// Grid the modes live on.
    pub fn grid(&self) -> &Grid<T> {
        self.mean.grid()
    }

    /// Points per mode.
    pub fn points(&self) -> usize {
        self.grid().nx * self.grid().ny
    }

    pub fn eigenvalues(&self) -> &[T] {
        &self.eigenvalues
    }

    pub fn mean(&self) -> &Field<T> {
        &self.mean
    }

    /// Mode `k` as a slice of length `points()`.
    pub fn mode(&self, k: usize) -> &[T] {
        let n = self.points();
        &self.modes[k * n..(k + 1) * n]
    }

    /// All modes, mode-contiguous.
    pub fn modes_flat(&self) -> &[T] {
        &self.modes
    }

    /// Rebuilds a basis from its serialized parts, re-checking shape and
    /// orthonormality.
    pub fn from_parts(modes: Vec<T>, eigenvalues: Vec<T>, mean: Field<T>) -> Result<Self> {
        let n = mean.grid().nx * mean.grid().ny;
        let r = eigenvalues.len();
        if modes.len() != n * r {
            return Err(Error::Length {
                what: "mode matrix",
                expected: n * r,
                got: modes.len(),
            });
        }
        for w in eigenvalues.windows(2) {
            if !(w[0] >= w[1]) {
                return Err(Error::DegenerateInput {
                    what: "eigenvalues must be nonincreasing".into(),
                });
            }
        }
        let basis = Self {
            modes,
            eigenvalues,
            mean,
            r,
        };
        basis.check_orthonormal(1e-10)?;
        Ok(basis)
    }

    /// Leading-`r2` sub-basis (shares the mean).
    pub fn truncate(&self, r2: usize) -> Result<Self> {
        if r2 == 0 || r2 > self.r {
            return Err(Error::RankDeficient {
                requested: r2,
                admissible: self.r,
            });
        }
        let n = self.points();
        Ok(Self {
            modes: self.modes[..r2 * n].to_vec(),
            eigenvalues: self.eigenvalues[..r2].to_vec(),
            mean: self.mean.clone(),
            r: r2,
        })
    }

    /// Largest pairwise deviation of modesᵀ·modes from the identity.
    pub fn orthonormality_defect(&self) -> T {
        let mut worst = T::zero();
        for p in 0..self.r {
            for q in p..self.r {
                let dot = dot(self.mode(p), self.mode(q));
                let target = if p == q { T::one() } else { T::zero() };
                let dev = (dot - target).abs();
                if dev > worst {
                    worst = dev;
                }
            }
        }
        worst
    }

    fn check_orthonormal(&self, tol: f64) -> Result<()> {
        let defect = self.orthonormality_defect();
        if defect.as_f64() > tol {
            return Err(Error::DegenerateInput {
                what: format!("modes are not orthonormal (defect {:.3e})", defect.as_f64()),
            });
        }
        Ok(())
    }
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(x, y)| *x * *y).sum()
}

/// Builds the leading-`r` basis from a snapshot set.
///
/// Fails with a rank-deficiency error naming the largest admissible order
/// when `r` exceeds the numerical rank of the centered data (relative
/// eigenvalue below [`RANK_FLOOR`]).
pub fn build_basis<T: Real>(set: &SnapshotSet<T>, r: usize) -> Result<PodBasis<T>> {
    set.validate()?;
    let n_snap = set.len();
    let pts = set.grid.nx * set.grid.ny;
    let max_r = pts.min(n_snap.saturating_sub(1));
    if r == 0 || r > max_r {
        return Err(Error::RankDeficient {
            requested: r,
            admissible: max_r,
        });
    }

    // Centered snapshot matrix, snapshot-contiguous.
    let mut centered = vec![T::zero(); n_snap * pts];
    for (k, state) in set.states.iter().enumerate() {
        let row = &mut centered[k * pts..(k + 1) * pts];
        for (c, (v, m)) in state.values().iter().zip(set.mean.values()).enumerate() {
            row[c] = *v - *m;
        }
    }

    // N×N Gram matrix in f64 for the eigensolver.
    let inv = 1.0 / (n_snap as f64 - 1.0);
    let mut gram = vec![0.0f64; n_snap * n_snap];
    for a in 0..n_snap {
        for b in a..n_snap {
            let d = dot(&centered[a * pts..(a + 1) * pts], &centered[b * pts..(b + 1) * pts]);
            let v = d.as_f64() * inv;
            gram[a * n_snap + b] = v;
            gram[b * n_snap + a] = v;
        }
    }
    let (eigvals, eigvecs) = symmetric_eigen_desc(&gram, n_snap);

    // Numerical rank relative to the dominant eigenvalue.
    let lead = eigvals[0];
    let admissible = if lead > 0.0 {
        eigvals.iter().take(max_r).filter(|l| **l / lead >= RANK_FLOOR && **l > 0.0).count()
    } else {
        0
    };
    if r > admissible {
        return Err(Error::RankDeficient {
            requested: r,
            admissible,
        });
    }

    // Spatial modes: map snapshot-space eigenvectors through the data.
    let scale_base = n_snap as f64 - 1.0;
    let mut modes = vec![T::zero(); r * pts];
    for k in 0..r {
        let v = &eigvecs[k * n_snap..(k + 1) * n_snap];
        let s = T::of(1.0 / (scale_base * eigvals[k]).sqrt());
        let mode = &mut modes[k * pts..(k + 1) * pts];
        for (a, weight) in v.iter().enumerate() {
            let w = T::of(*weight) * s;
            let row = &centered[a * pts..(a + 1) * pts];
            for c in 0..pts {
                mode[c] = mode[c] + w * row[c];
            }
        }
    }

    // One modified Gram-Schmidt pass to scrub the mapping roundoff.
    for k in 0..r {
        for p in 0..k {
            let (head, tail) = modes.split_at_mut(k * pts);
            let prev = &head[p * pts..(p + 1) * pts];
            let cur = &mut tail[..pts];
            let proj = dot(prev, cur);
            for c in 0..pts {
                cur[c] = cur[c] - proj * prev[c];
            }
        }
        let cur = &mut modes[k * pts..(k + 1) * pts];
        let norm = dot(cur, cur).sqrt();
        if !(norm.as_f64() > 0.0) {
            return Err(Error::RankDeficient {
                requested: r,
                admissible: k,
            });
        }
        let inv_norm = T::one() / norm;
        for c in cur.iter_mut() {
            *c = *c * inv_norm;
        }
    }

    // Sign convention: the entry of largest magnitude (first index on ties)
    // is positive.
    for k in 0..r {
        let mode = &mut modes[k * pts..(k + 1) * pts];
        let mut best = 0usize;
        for c in 1..pts {
            if mode[c].abs() > mode[best].abs() {
                best = c;
            }
        }
        if mode[best] < T::zero() {
            for c in mode.iter_mut() {
                *c = -*c;
            }
        }
    }

    Ok(PodBasis {
        modes,
        eigenvalues: eigvals.iter().take(r).map(|l| T::of(*l)).collect(),
        mean: set.mean.clone(),
        r,
    })
}

/// Reduced coordinates of a field: z = modesᵀ·x (no centering).
pub fn project<T: Real>(basis: &PodBasis<T>, x: &Field<T>) -> Result<Vec<T>> {
    basis.grid().same_as(x.grid())?;
    Ok((0..basis.order()).map(|k| dot(basis.mode(k), x.values())).collect())
}

/// Field reconstruction from reduced coordinates: modes·z.
pub fn reconstruct<T: Real>(basis: &PodBasis<T>, z: &[T]) -> Result<Field<T>> {
    if z.len() != basis.order() {
        return Err(Error::Length {
            what: "reduced vector",
            expected: basis.order(),
            got: z.len(),
        });
    }
    let mut out = Field::zeros(*basis.grid());
    let values = out.values_mut();
    for (k, zk) in z.iter().enumerate() {
        let mode = basis.mode(k);
        for c in 0..values.len() {
            values[c] = values[c] + *zk * mode[c];
        }
    }
    Ok(out)
}
