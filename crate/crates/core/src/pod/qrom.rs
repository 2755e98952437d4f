//! Quadratic reduced model extracted from a black-box quadratic tendency.
//!
//! For a right-hand side that is exactly quadratic in its argument (the
//! vorticity tendency is: advection is bilinear, the rest affine), the
//! reduced dynamics dz/dt = b + A·z + B(z,z) can be recovered without any
//! symbolic derivation by probing the full operator along basis directions:
//! constants from the origin, linear columns from odd differences, quadratic
//! entries from even differences and pair polarization. Extraction is exact
//! up to roundoff — truncation, not modeling, is the only error source.

use crate::error::{Error, Result};
use crate::grid::Field;
use crate::pod::basis::{project, reconstruct, PodBasis};
use crate::scalar::Real;

/// Relative third-difference residual above which the probed operator is
/// rejected as non-quadratic.
pub const QUADRATICITY_LIMIT: f64 = 1e-8;

/// Reduced quadratic dynamics. Pairs with the basis it was extracted from;
/// the serialized form stores only the tensors, so loaders re-associate the
/// basis file themselves.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticRom<T> {
    r: usize,
    /// Constant term, length r.
    b: Vec<T>,
    /// Linear operator, row-major r×r.
    a: Vec<T>,
    /// Monomial coefficients of the quadratic term: for output k and pair
    /// j ≤ l, the coefficient of z_j·z_l, packed pair-contiguous per output.
    bq_packed: Vec<T>,
}

/// Index of pair (j, l), j ≤ l < r, in the packed quadratic layout.
fn pair_index(r: usize, j: usize, l: usize) -> usize {
    debug_assert!(j <= l && l < r);
    j * r - j * (j + 1) / 2 + l
}

/// Number of packed pairs for order r.
fn pair_count(r: usize) -> usize {
    r * (r + 1) / 2
}

impl<T: Real> QuadraticRom<T> {
    /// Reduced order.
    pub fn order(&self) -> usize {
        self.r
    }

    pub fn constant(&self) -> &[T] {
        &self.b
    }

    /// Row-major r×r linear term.
    pub fn linear(&self) -> &[T] {
        &self.a
    }

    /// Expands the packed quadratic term into the full symmetric r×r×r
    /// tensor, output index slowest.
    pub fn quadratic_full(&self) -> Vec<T> {
        let r = self.r;
        let half = T::of(0.5);
        let mut out = vec![T::zero(); r * r * r];
        for k in 0..r {
            let pack = &self.bq_packed[k * pair_count(r)..(k + 1) * pair_count(r)];
            for j in 0..r {
                for l in j..r {
                    let c = pack[pair_index(r, j, l)];
                    if j == l {
                        out[k * r * r + j * r + l] = c;
                    } else {
                        out[k * r * r + j * r + l] = c * half;
                        out[k * r * r + l * r + j] = c * half;
                    }
                }
            }
        }
        out
    }

    /// Rebuilds from the full tensor representation (e.g. after
    /// deserialization), checking shapes and trailing-index symmetry.
    pub fn from_full(b: Vec<T>, a: Vec<T>, bq: Vec<T>) -> Result<Self> {
        let r = b.len();
        if a.len() != r * r {
            return Err(Error::Length {
                what: "linear term",
                expected: r * r,
                got: a.len(),
            });
        }
        if bq.len() != r * r * r {
            return Err(Error::Length {
                what: "quadratic term",
                expected: r * r * r,
                got: bq.len(),
            });
        }
        let mut scale = T::zero();
        for v in &bq {
            if v.abs() > scale {
                scale = v.abs();
            }
        }
        let tol = T::of(1e-12) * if scale > T::one() { scale } else { T::one() };
        let mut packed = vec![T::zero(); r * pair_count(r)];
        for k in 0..r {
            for j in 0..r {
                for l in j..r {
                    let fwd = bq[k * r * r + j * r + l];
                    let rev = bq[k * r * r + l * r + j];
                    if (fwd - rev).abs() > tol {
                        return Err(Error::DegenerateInput {
                            what: format!(
                                "quadratic tensor not symmetric in trailing indices at ({k},{j},{l})"
                            ),
                        });
                    }
                    packed[k * pair_count(r) + pair_index(r, j, l)] =
                        if j == l { fwd } else { fwd + rev };
                }
            }
        }
        Ok(Self {
            r,
            b,
            a,
            bq_packed: packed,
        })
    }

    /// Leading-`r2` sub-model: exact sub-blocks of all three tensors.
    pub fn truncate(&self, r2: usize) -> Result<Self> {
        if r2 == 0 || r2 > self.r {
            return Err(Error::RankDeficient {
                requested: r2,
                admissible: self.r,
            });
        }
        let r = self.r;
        let b = self.b[..r2].to_vec();
        let mut a = vec![T::zero(); r2 * r2];
        for k in 0..r2 {
            a[k * r2..(k + 1) * r2].copy_from_slice(&self.a[k * r..k * r + r2]);
        }
        let mut packed = vec![T::zero(); r2 * pair_count(r2)];
        for k in 0..r2 {
            let src = &self.bq_packed[k * pair_count(r)..(k + 1) * pair_count(r)];
            let dst = &mut packed[k * pair_count(r2)..(k + 1) * pair_count(r2)];
            for j in 0..r2 {
                for l in j..r2 {
                    dst[pair_index(r2, j, l)] = src[pair_index(r, j, l)];
                }
            }
        }
        Ok(Self {
            r: r2,
            b,
            a,
            bq_packed: packed,
        })
    }
}

/// Evaluates b + A·z + B(z,z).
pub fn pod_rom_rhs<T: Real>(rom: &QuadraticRom<T>, z: &[T]) -> Result<Vec<T>> {
    let r = rom.r;
    if z.len() != r {
        return Err(Error::Length {
            what: "reduced vector",
            expected: r,
            got: z.len(),
        });
    }
    // Monomial vector z_j z_l over packed pairs, shared by every output row.
    let mut monomials = vec![T::zero(); pair_count(r)];
    for j in 0..r {
        let base = j * r - j * (j + 1) / 2;
        for l in j..r {
            monomials[base + l] = z[j] * z[l];
        }
    }
    let mut out = Vec::with_capacity(r);
    for k in 0..r {
        let mut acc = rom.b[k];
        let row = &rom.a[k * r..(k + 1) * r];
        for j in 0..r {
            acc = acc + row[j] * z[j];
        }
        let pack = &rom.bq_packed[k * pair_count(r)..(k + 1) * pair_count(r)];
        for p in 0..monomials.len() {
            acc = acc + pack[p] * monomials[p];
        }
        out.push(acc);
    }
    Ok(out)
}

/// Calibrates the reduced tensors by probing `rhs` along basis directions.
///
/// The operator is first screened with a third-difference probe (a cubic or
/// higher term leaves a nonzero residual); probing then costs one evaluation
/// at the origin, two per mode, and two per mode pair — O(r²) total.
pub fn extract_quadratic_rom<T, F>(basis: &PodBasis<T>, mut rhs: F) -> Result<QuadraticRom<T>>
where
    T: Real,
    F: FnMut(&Field<T>) -> Result<Field<T>>,
{
    let r = basis.order();
    let probe_reduced = |f: &Field<T>| -> Result<Vec<T>> { project(basis, f) };

    // Quadraticity screen along the leading mode direction: the third
    // difference f(2u) - 3f(u) + 3f(0) - f(-u) annihilates any polynomial of
    // degree ≤ 2.
    let unit = {
        let mut z = vec![T::zero(); r];
        z[0] = T::one();
        reconstruct(basis, &z)?
    };
    let mut two_u = unit.clone();
    two_u.scale(T::of(2.0));
    let mut minus_u = unit.clone();
    minus_u.scale(T::of(-1.0));
    let zero_field = Field::zeros(*basis.grid());

    let f2 = rhs(&two_u)?;
    let f1 = rhs(&unit)?;
    let f0 = rhs(&zero_field)?;
    let fm = rhs(&minus_u)?;
    {
        let three = T::of(3.0);
        let mut resid = T::zero();
        let mut scale = T::zero();
        for c in 0..f0.values().len() {
            let v = f2.values()[c] - three * f1.values()[c] + three * f0.values()[c] - fm.values()[c];
            if v.abs() > resid {
                resid = v.abs();
            }
            for fv in [&f2, &f1, &f0, &fm] {
                if fv.values()[c].abs() > scale {
                    scale = fv.values()[c].abs();
                }
            }
        }
        let rel = resid.as_f64() / scale.as_f64().max(1.0);
        if rel > QUADRATICITY_LIMIT {
            return Err(Error::NonQuadraticRhs {
                residual: rel,
                limit: QUADRATICITY_LIMIT,
            });
        }
    }

    let b = probe_reduced(&f0)?;
    let half = T::of(0.5);

    // Single-mode probes: odd part gives the linear column, even part the
    // diagonal quadratic entry.
    let mut a = vec![T::zero(); r * r];
    let mut packed = vec![T::zero(); r * pair_count(r)];
    let mut diag = vec![vec![T::zero(); r]; r];
    for k in 0..r {
        let mut z = vec![T::zero(); r];
        z[0] = T::zero();
        z[k] = T::one();
        let phi_k = reconstruct(basis, &z)?;
        let mut neg = phi_k.clone();
        neg.scale(T::of(-1.0));
        let gp = probe_reduced(&rhs(&phi_k)?)?;
        let gm = probe_reduced(&rhs(&neg)?)?;
        for out in 0..r {
            a[out * r + k] = (gp[out] - gm[out]) * half;
            let q = (gp[out] + gm[out]) * half - b[out];
            diag[k][out] = q;
            packed[out * pair_count(r) + pair_index(r, k, k)] = q;
        }
    }

    // Pair probes for the mixed monomial coefficients.
    for j in 0..r {
        for l in j + 1..r {
            let mut z = vec![T::zero(); r];
            z[j] = T::one();
            z[l] = T::one();
            let sum_f = reconstruct(basis, &z)?;
            let mut neg = sum_f.clone();
            neg.scale(T::of(-1.0));
            let gp = probe_reduced(&rhs(&sum_f)?)?;
            let gm = probe_reduced(&rhs(&neg)?)?;
            for out in 0..r {
                let quad_pair = (gp[out] + gm[out]) * half - b[out];
                let coeff = quad_pair - diag[j][out] - diag[l][out];
                packed[out * pair_count(r) + pair_index(r, j, l)] = coeff;
            }
        }
    }

    Ok(QuadraticRom {
        r,
        b,
        a,
        bq_packed: packed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ad::rng::SplitMix64;
    use crate::fom::model::{FomConfig, QgeModel};
    use crate::grid::Grid;
    use crate::pod::basis::{build_basis, tests::random_set};

    /// Handmade two-mode orthonormal basis on a 3×3 grid.
    fn toy_basis() -> PodBasis<f64> {
        let g = Grid::new(3, 3, 1.0, 1.0).unwrap();
        let s = 0.5f64;
        // Two orthonormal vectors supported on four entries.
        let m0 = vec![s, s, s, s, 0.0, 0.0, 0.0, 0.0, 0.0];
        let m1 = vec![s, -s, s, -s, 0.0, 0.0, 0.0, 0.0, 0.0];
        let mut modes = m0;
        modes.extend(m1);
        PodBasis::from_parts(modes, vec![1.0, 0.5], Field::zeros(g)).unwrap()
    }

    #[test]
    fn constant_tendency_reduces_to_its_projection() {
        let basis = toy_basis();
        let g = *basis.grid();
        let c = Field::from_values(g, (0..9).map(|i| i as f64 * 0.3 - 1.0).collect()).unwrap();
        let rom = extract_quadratic_rom(&basis, |_| Ok(c.clone())).unwrap();
        let want = project(&basis, &c).unwrap();
        for k in 0..2 {
            assert!((rom.constant()[k] - want[k]).abs() <= 1e-12);
        }
        assert!(rom.linear().iter().all(|v| v.abs() <= 1e-12));
        assert!(rom.quadratic_full().iter().all(|v| v.abs() <= 1e-12));
    }

    #[test]
    fn toy_quadratic_matches_analytic_projections() {
        let basis = toy_basis();
        let g = *basis.grid();
        let n = 9usize;
        // rhs(x) = M x + (xᵀx) e₁ with a fixed dense M.
        let mut rng = SplitMix64::new(4);
        let m: Vec<f64> = (0..n * n).map(|_| rng.uniform(-1.0, 1.0)).collect();
        let rhs = |x: &Field<f64>| -> crate::error::Result<Field<f64>> {
            let xv = x.values();
            let xx: f64 = xv.iter().map(|v| v * v).sum();
            let mut out = Vec::with_capacity(n);
            for row in 0..n {
                let mut acc: f64 = (0..n).map(|c| m[row * n + c] * xv[c]).sum();
                if row == 0 {
                    acc += xx;
                }
                out.push(acc);
            }
            Field::from_values(g, out)
        };
        let rom = extract_quadratic_rom(&basis, rhs).unwrap();

        // Analytic reduced tensors: b = 0; A_kj = φ_kᵀ M φ_j;
        // B_k(z,z) = (φ_k)₀ · ‖φz‖² = (φ_k)₀ · zᵀz by orthonormality.
        for k in 0..2 {
            assert!(rom.constant()[k].abs() <= 1e-10);
            for j in 0..2 {
                let want: f64 = (0..n)
                    .map(|row| {
                        basis.mode(k)[row]
                            * (0..n).map(|c| m[row * n + c] * basis.mode(j)[c]).sum::<f64>()
                    })
                    .sum();
                assert!((rom.linear()[k * 2 + j] - want).abs() <= 1e-10);
            }
        }
        let bq = rom.quadratic_full();
        for k in 0..2 {
            let e1_component = basis.mode(k)[0];
            for j in 0..2 {
                for l in 0..2 {
                    let want = if j == l { e1_component } else { 0.0 };
                    let got = bq[k * 4 + j * 2 + l];
                    assert!((got - want).abs() <= 1e-10, "({k},{j},{l}): {got} vs {want}");
                }
            }
        }
    }

    #[test]
    fn reduced_tendency_matches_direct_projection_on_the_flow_model() {
        let g = Grid::new(17, 9, 1.0, 2.0).unwrap();
        let set = random_set(g, 8, 33);
        let basis = build_basis(&set, 3).unwrap();
        let model = QgeModel::new(g, FomConfig::default()).unwrap();
        let rom = extract_quadratic_rom(&basis, |x| model.rhs(x)).unwrap();

        let mut rng = SplitMix64::new(17);
        for _ in 0..50 {
            let mut z = vec![0.0f64; 3];
            for v in z.iter_mut() {
                *v = rng.uniform(-0.6, 0.6);
            }
            let fast = pod_rom_rhs(&rom, &z).unwrap();
            let direct = project(&basis, &model.rhs(&reconstruct(&basis, &z).unwrap()).unwrap()).unwrap();
            let scale = direct.iter().fold(1.0f64, |m, v| m.max(v.abs()));
            for (a, b) in fast.iter().zip(&direct) {
                assert!((a - b).abs() <= 1e-8 * scale, "{a} vs {b} (scale {scale})");
            }
        }
    }

    #[test]
    fn cubic_tendency_is_rejected() {
        let basis = toy_basis();
        let rhs = |x: &Field<f64>| -> crate::error::Result<Field<f64>> {
            let mut out = x.clone();
            for v in out.values_mut() {
                *v = *v * *v * *v;
            }
            Ok(out)
        };
        match extract_quadratic_rom(&basis, rhs) {
            Err(Error::NonQuadraticRhs { residual, limit }) => {
                assert!(residual > limit);
            }
            other => panic!("expected non-quadratic rejection, got {other:?}"),
        }
    }

    #[test]
    fn origin_evaluates_to_the_constant_term() {
        let g = Grid::new(17, 9, 1.0, 2.0).unwrap();
        let set = random_set(g, 8, 12);
        let basis = build_basis(&set, 3).unwrap();
        let model = QgeModel::new(g, FomConfig::default()).unwrap();
        let rom = extract_quadratic_rom(&basis, |x| model.rhs(x)).unwrap();
        let at_zero = pod_rom_rhs(&rom, &[0.0, 0.0, 0.0]).unwrap();
        for (a, b) in at_zero.iter().zip(rom.constant()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn linear_part_is_additive() {
        let g = Grid::new(17, 9, 1.0, 2.0).unwrap();
        let set = random_set(g, 8, 61);
        let basis = build_basis(&set, 3).unwrap();
        let model = QgeModel::new(g, FomConfig::default()).unwrap();
        let rom = extract_quadratic_rom(&basis, |x| model.rhs(x)).unwrap();

        // Strip constant and quadratic parts; what is left must be additive.
        let lin = |z: &[f64]| -> Vec<f64> {
            let full = pod_rom_rhs(&rom, z).unwrap();
            let mut neg = z.to_vec();
            for v in neg.iter_mut() {
                *v = -*v;
            }
            let flipped = pod_rom_rhs(&rom, &neg).unwrap();
            // (f(z) - f(-z)) / 2 isolates the odd (linear) part.
            full.iter().zip(&flipped).map(|(p, m)| (p - m) / 2.0).collect()
        };
        let mut rng = SplitMix64::new(8);
        let za: Vec<f64> = (0..3).map(|_| rng.uniform(-1.0, 1.0)).collect();
        let zb: Vec<f64> = (0..3).map(|_| rng.uniform(-1.0, 1.0)).collect();
        let zsum: Vec<f64> = za.iter().zip(&zb).map(|(a, b)| a + b).collect();
        let la = lin(&za);
        let lb = lin(&zb);
        let ls = lin(&zsum);
        for k in 0..3 {
            let scale = ls[k].abs().max(1.0);
            assert!((ls[k] - la[k] - lb[k]).abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn truncation_is_an_exact_sub_block() {
        let g = Grid::new(13, 9, 1.0, 2.0).unwrap();
        let set = random_set(g, 10, 70);
        let basis = build_basis(&set, 4).unwrap();
        let model = QgeModel::new(g, FomConfig::default()).unwrap();
        let full = extract_quadratic_rom(&basis, |x| model.rhs(x)).unwrap();
        let sub = full.truncate(2).unwrap();
        let direct = extract_quadratic_rom(&basis.truncate(2).unwrap(), |x| model.rhs(x)).unwrap();
        assert_eq!(sub, direct);
    }

    #[test]
    fn full_tensor_roundtrips_through_packing() {
        let g = Grid::new(13, 9, 1.0, 2.0).unwrap();
        let set = random_set(g, 10, 71);
        let basis = build_basis(&set, 3).unwrap();
        let model = QgeModel::new(g, FomConfig::default()).unwrap();
        let rom = extract_quadratic_rom(&basis, |x| model.rhs(x)).unwrap();
        let bq = rom.quadratic_full();
        // Symmetric in the trailing two indices.
        for k in 0..3 {
            for j in 0..3 {
                for l in 0..3 {
                    assert_eq!(bq[k * 9 + j * 3 + l], bq[k * 9 + l * 3 + j]);
                }
            }
        }
        let back = QuadraticRom::from_full(rom.constant().to_vec(), rom.linear().to_vec(), bq).unwrap();
        assert_eq!(back, rom);
    }

    #[test]
    fn asymmetric_tensor_is_rejected() {
        let b = vec![0.0, 0.0];
        let a = vec![0.0; 4];
        let mut bq = vec![0.0; 8];
        let idx = |k: usize, j: usize, l: usize| k * 4 + j * 2 + l;
        bq[idx(0, 0, 1)] = 1.0;
        bq[idx(0, 1, 0)] = 0.5; // mismatched mirror entry
        assert!(QuadraticRom::from_full(b, a, bq).is_err());
    }

    #[test]
    fn wrong_length_is_rejected() {
        let g = Grid::new(13, 9, 1.0, 2.0).unwrap();
        let set = random_set(g, 8, 72);
        let basis = build_basis(&set, 3).unwrap();
        let model = QgeModel::new(g, FomConfig::default()).unwrap();
        let rom = extract_quadratic_rom(&basis, |x| model.rhs(x)).unwrap();
        assert!(pod_rom_rhs(&rom, &[1.0, 2.0]).is_err());
    }
}
