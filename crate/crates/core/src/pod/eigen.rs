//! Symmetric eigendecomposition with a deterministic ordering contract.
//!
//! The decomposition itself is delegated to nalgebra's symmetric solver
//! (Householder tridiagonalization + implicit-shift QL/QR); this wrapper owns
//! the conventions the rest of the crate relies on: descending eigenvalues,
//! ties broken by original column index, and always computing in f64
//! regardless of the working precision.

use nalgebra::DMatrix;

/// Eigenpairs of a dense symmetric matrix given in row-major order.
///
/// Returns `(eigenvalues, eigenvectors)`: eigenvalues descending, the
/// matching unit eigenvectors stored column-contiguous (vector `k` occupies
/// `eigenvectors[k*n .. (k+1)*n]`).
pub fn symmetric_eigen_desc(matrix: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    assert_eq!(matrix.len(), n * n, "matrix must be n x n");
    let m = DMatrix::from_row_slice(n, n, matrix);
    let decomp = m.symmetric_eigen();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        decomp.eigenvalues[b]
            .partial_cmp(&decomp.eigenvalues[a])
            .unwrap()
            .then(a.cmp(&b))
    });

    let mut values = Vec::with_capacity(n);
    let mut vectors = vec![0.0f64; n * n];
    for (k, &src) in order.iter().enumerate() {
        values.push(decomp.eigenvalues[src]);
        let col = decomp.eigenvectors.column(src);
        for i in 0..n {
            vectors[k * n + i] = col[i];
        }
    }
    (values, vectors)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reconstructs_a_known_spectrum() {
        // Diagonalizable 3x3 with eigenvalues 6, 3, 1.
        // Built as Q diag(6,3,1) Q^T from an orthonormal Q.
        let q = [
            [2.0 / 3.0, -2.0 / 3.0, 1.0 / 3.0],
            [2.0 / 3.0, 1.0 / 3.0, -2.0 / 3.0],
            [1.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0],
        ];
        let lam = [6.0, 3.0, 1.0];
        let mut a = [0.0f64; 9];
        for i in 0..3 {
            for j in 0..3 {
                a[i * 3 + j] = (0..3).map(|k| q[i][k] * lam[k] * q[j][k]).sum();
            }
        }
        let (vals, vecs) = symmetric_eigen_desc(&a, 3);
        for (got, want) in vals.iter().zip(&lam) {
            assert!((got - want).abs() <= 1e-12, "{got} vs {want}");
        }
        // Residual ||A v - lambda v|| per pair.
        for k in 0..3 {
            let v = &vecs[k * 3..(k + 1) * 3];
            for i in 0..3 {
                let av: f64 = (0..3).map(|j| a[i * 3 + j] * v[j]).sum();
                assert!((av - vals[k] * v[i]).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn eigenvalues_come_out_descending() {
        let a = [1.0, 0.2, 0.0, 0.2, 5.0, -0.3, 0.0, -0.3, 2.5];
        let (vals, _) = symmetric_eigen_desc(&a, 3);
        assert!(vals[0] >= vals[1] && vals[1] >= vals[2]);
    }

    #[test]
    fn eigenvectors_are_orthonormal() {
        let a = [4.0, 1.0, 0.5, 1.0, 3.0, -0.2, 0.5, -0.2, 1.0];
        let (_, vecs) = symmetric_eigen_desc(&a, 3);
        for p in 0..3 {
            for q in 0..3 {
                let dot: f64 = (0..3).map(|i| vecs[p * 3 + i] * vecs[q * 3 + i]).sum();
                let want = if p == q { 1.0 } else { 0.0 };
                assert!((dot - want).abs() <= 1e-12);
            }
        }
    }
}
