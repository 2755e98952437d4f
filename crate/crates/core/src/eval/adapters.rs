//! Uniform interface over reduced-order models for evaluation.
//!
//! Every model family is evaluated through the same three operations —
//! project a full state to reduced coordinates, reconstruct a full state
//! from them, and evaluate the reduced time derivative — so the scoring
//! code never branches on model kind. Adapters hold only read-only data and
//! are safe to share across threads.

use crate::ae::loss::ae_rom_rhs_with;
use crate::ae::model::AeModel;
use crate::error::{Error, Result};
use crate::fom::model::{FomConfig, QgeModel};
use crate::grid::{Field, Grid};
use crate::pod::basis::{project, reconstruct, PodBasis};
use crate::pod::qrom::{extract_quadratic_rom, pod_rom_rhs, QuadraticRom};

/// A reduced-order model seen purely through its projection, reconstruction,
/// and reduced-dynamics operations.
pub trait RomAdapter: Send + Sync {
    /// Short label used in report rows ("pod", "ae-mse", ...).
    fn kind(&self) -> &str;
    /// Dimension of the reduced state.
    fn order(&self) -> usize;
    /// Grid of the full-order states this adapter accepts.
    fn grid(&self) -> &Grid<f64>;
    /// Reduced coordinates of a full-order state.
    fn project(&self, x: &Field<f64>) -> Result<Vec<f64>>;
    /// Full-order reconstruction of a reduced state.
    fn reconstruct(&self, z: &[f64]) -> Result<Field<f64>>;
    /// Time derivative of the reduced state under the model's dynamics.
    fn reduced_rhs(&self, z: &[f64]) -> Result<Vec<f64>>;
}

/// Projection-based model: an orthonormal mode basis plus the quadratic
/// reduced dynamics calibrated for it.
///
/// With `centered` the reduced coordinates describe the fluctuation around
/// the stored mean (x ≈ mean + Φz); otherwise they describe the raw state
/// (x ≈ Φz). The quadratic dynamics must have been extracted under the same
/// convention — see [`extract_pod_rom`].
#[derive(Debug, Clone)]
pub struct PodAdapter {
    basis: PodBasis<f64>,
    rom: QuadraticRom<f64>,
    centered: bool,
}

impl PodAdapter {
    pub fn new(basis: PodBasis<f64>, rom: QuadraticRom<f64>, centered: bool) -> Result<Self> {
        if rom.order() != basis.order() {
            return Err(Error::Length {
                what: "reduced dynamics order",
                expected: basis.order(),
                got: rom.order(),
            });
        }
        Ok(Self { basis, rom, centered })
    }

    pub fn basis(&self) -> &PodBasis<f64> {
        &self.basis
    }

    pub fn rom(&self) -> &QuadraticRom<f64> {
        &self.rom
    }

    pub fn centered(&self) -> bool {
        self.centered
    }
}

impl RomAdapter for PodAdapter {
    fn kind(&self) -> &str {
        "pod"
    }

    fn order(&self) -> usize {
        self.basis.order()
    }

    fn grid(&self) -> &Grid<f64> {
        self.basis.grid()
    }

    fn project(&self, x: &Field<f64>) -> Result<Vec<f64>> {
        if self.centered {
            let mut fluct = x.clone();
            fluct.axpy(-1.0, self.basis.mean());
            project(&self.basis, &fluct)
        } else {
            project(&self.basis, x)
        }
    }

    fn reconstruct(&self, z: &[f64]) -> Result<Field<f64>> {
        let mut f = reconstruct(&self.basis, z)?;
        if self.centered {
            f.axpy(1.0, self.basis.mean());
        }
        Ok(f)
    }

    fn reduced_rhs(&self, z: &[f64]) -> Result<Vec<f64>> {
        pod_rom_rhs(&self.rom, z)
    }
}

/// Extracts the quadratic reduced dynamics matching a projection convention.
///
/// Centered coordinates evolve as ż = Φᵀ f(mean + Φz): the full-order
/// operator is probed around the stored mean, which keeps the probed map
/// quadratic because composition with an affine shift preserves degree.
pub fn extract_pod_rom(
    basis: &PodBasis<f64>,
    model: &QgeModel<f64>,
    centered: bool,
) -> Result<QuadraticRom<f64>> {
    basis.grid().same_as(model.grid())?;
    if centered {
        let mean = basis.mean().clone();
        extract_quadratic_rom(basis, |x| {
            let mut shifted = x.clone();
            shifted.axpy(1.0, &mean);
            model.rhs(&shifted)
        })
    } else {
        extract_quadratic_rom(basis, |x| model.rhs(x))
    }
}

/// Autoencoder model: encode to project, decode to reconstruct, and the
/// encoder-Jacobian chain for the reduced dynamics.
#[derive(Debug, Clone)]
pub struct AeAdapter {
    model: AeModel,
    qge: QgeModel<f64>,
    kind: String,
}

impl AeAdapter {
    /// Wraps a trained autoencoder; `kind` labels report rows
    /// (conventionally "ae-mse" or "ae-pi").
    pub fn new(model: AeModel, cfg: FomConfig, kind: impl Into<String>) -> Result<Self> {
        let qge = QgeModel::new(*model.grid(), cfg)?;
        Ok(Self { model, qge, kind: kind.into() })
    }

    pub fn model(&self) -> &AeModel {
        &self.model
    }
}

impl RomAdapter for AeAdapter {
    fn kind(&self) -> &str {
        &self.kind
    }

    fn order(&self) -> usize {
        self.model.order()
    }

    fn grid(&self) -> &Grid<f64> {
        self.model.grid()
    }

    fn project(&self, x: &Field<f64>) -> Result<Vec<f64>> {
        self.model.encode(x)
    }

    fn reconstruct(&self, z: &[f64]) -> Result<Field<f64>> {
        self.model.decode(z)
    }

    fn reduced_rhs(&self, z: &[f64]) -> Result<Vec<f64>> {
        ae_rom_rhs_with(&self.model, z, &self.qge)
    }
}

/// Trivial full-order adapter: the reduced state is the flattened field and
/// the reduced dynamics are the full-order dynamics. Useful as an exactness
/// baseline — its propagation error is roundoff.
#[derive(Debug, Clone)]
pub struct IdentityAdapter {
    qge: QgeModel<f64>,
}

impl IdentityAdapter {
    pub fn new(qge: QgeModel<f64>) -> Self {
        Self { qge }
    }

    pub fn from_config(grid: Grid<f64>, cfg: FomConfig) -> Result<Self> {
        Ok(Self::new(QgeModel::new(grid, cfg)?))
    }
}

impl RomAdapter for IdentityAdapter {
    fn kind(&self) -> &str {
        "identity"
    }

    fn order(&self) -> usize {
        self.qge.grid().len()
    }

    fn grid(&self) -> &Grid<f64> {
        self.qge.grid()
    }

    fn project(&self, x: &Field<f64>) -> Result<Vec<f64>> {
        self.qge.grid().same_as(x.grid())?;
        Ok(x.values().to_vec())
    }

    fn reconstruct(&self, z: &[f64]) -> Result<Field<f64>> {
        Field::from_values(*self.qge.grid(), z.to_vec())
    }

    fn reduced_rhs(&self, z: &[f64]) -> Result<Vec<f64>> {
        let f = Field::from_values(*self.qge.grid(), z.to_vec())?;
        Ok(self.qge.rhs(&f)?.into_values())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ad::rng::SplitMix64;
    use crate::fom::snapshots::SnapshotSet;
    use crate::pod::basis::build_basis;

    fn grid() -> Grid<f64> {
        Grid::new(9, 5, 1.0, 2.0).unwrap()
    }

    fn cfg() -> FomConfig {
        FomConfig::default()
    }

    fn random_field(grid: Grid<f64>, seed: u64) -> Field<f64> {
        let mut rng = SplitMix64::new(seed);
        let mut f = Field::from_values(
            grid,
            (0..grid.len()).map(|_| rng.uniform(-1.0, 1.0)).collect(),
        )
        .unwrap();
        f.zero_boundary();
        f
    }

    fn snapshot_set(grid: Grid<f64>, n: usize) -> SnapshotSet<f64> {
        let states: Vec<_> = (0..n).map(|s| random_field(grid, 900 + s as u64)).collect();
        let mean = SnapshotSet::mean_of_states(grid, &states);
        SnapshotSet {
            grid,
            times: (0..n).map(|i| i as f64 * 0.01).collect(),
            rhs: vec![Field::zeros(grid); n],
            mean,
            states,
        }
    }

    fn pod_adapter(centered: bool) -> PodAdapter {
        let g = grid();
        let set = snapshot_set(g, 8);
        let basis = build_basis(&set, 4).unwrap();
        let model = QgeModel::new(g, cfg()).unwrap();
        let rom = extract_pod_rom(&basis, &model, centered).unwrap();
        PodAdapter::new(basis, rom, centered).unwrap()
    }

    #[test]
    fn adapters_are_shareable_across_threads() {
        fn check<T: Send + Sync>() {}
        check::<PodAdapter>();
        check::<AeAdapter>();
        check::<IdentityAdapter>();
    }

    #[test]
    fn pod_project_after_reconstruct_is_identity_on_reduced_states() {
        for centered in [false, true] {
            let ad = pod_adapter(centered);
            let mut rng = SplitMix64::new(5);
            let z: Vec<f64> = (0..ad.order()).map(|_| rng.uniform(-2.0, 2.0)).collect();
            let back = ad.project(&ad.reconstruct(&z).unwrap()).unwrap();
            for (a, b) in z.iter().zip(&back) {
                assert!((a - b).abs() < 1e-10, "centered={centered}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn centered_reconstruction_of_origin_is_the_mean() {
        let ad = pod_adapter(true);
        let z = vec![0.0; ad.order()];
        let f = ad.reconstruct(&z).unwrap();
        for (a, b) in f.values().iter().zip(ad.basis().mean().values()) {
            assert_eq!(a, b);
        }

        let raw = pod_adapter(false);
        let f = raw.reconstruct(&vec![0.0; raw.order()]).unwrap();
        assert_eq!(f.max_abs(), 0.0);
    }

    #[test]
    fn centered_reduced_rhs_matches_direct_projection_of_shifted_dynamics() {
        let ad = pod_adapter(true);
        let model = QgeModel::new(grid(), cfg()).unwrap();
        let mut rng = SplitMix64::new(17);
        let z: Vec<f64> = (0..ad.order()).map(|_| rng.uniform(-0.5, 0.5)).collect();
        let got = ad.reduced_rhs(&z).unwrap();

        // Oracle: ż = Φᵀ f(mean + Φz) evaluated through the full-order
        // operator directly, no quadratic fit involved.
        let x = ad.reconstruct(&z).unwrap();
        let want = project(ad.basis(), &model.rhs(&x).unwrap()).unwrap();
        let scale = want.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).abs() < 1e-6 * scale, "{a} vs {b} (scale {scale})");
        }
    }

    #[test]
    fn raw_reduced_rhs_matches_direct_projection() {
        let ad = pod_adapter(false);
        let model = QgeModel::new(grid(), cfg()).unwrap();
        let mut rng = SplitMix64::new(23);
        let z: Vec<f64> = (0..ad.order()).map(|_| rng.uniform(-0.5, 0.5)).collect();
        let got = ad.reduced_rhs(&z).unwrap();
        let x = ad.reconstruct(&z).unwrap();
        let want = project(ad.basis(), &model.rhs(&x).unwrap()).unwrap();
        let scale = want.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).abs() < 1e-6 * scale, "{a} vs {b} (scale {scale})");
        }
    }

    #[test]
    fn order_mismatch_between_basis_and_dynamics_is_rejected() {
        let g = grid();
        let set = snapshot_set(g, 8);
        let basis = build_basis(&set, 4).unwrap();
        let model = QgeModel::new(g, cfg()).unwrap();
        let rom = extract_pod_rom(&basis, &model, false).unwrap();
        let small = basis.truncate(3).unwrap();
        let err = PodAdapter::new(small, rom, false).unwrap_err();
        assert!(matches!(err, Error::Length { .. }), "{err}");
    }

    #[test]
    fn ae_adapter_delegates_to_the_model() {
        let g = grid();
        let model = AeModel::new(g, 3, 99).unwrap();
        let ad = AeAdapter::new(model.clone(), cfg(), "ae-mse").unwrap();
        assert_eq!(ad.kind(), "ae-mse");
        assert_eq!(ad.order(), 3);

        let x = random_field(g, 31);
        assert_eq!(ad.project(&x).unwrap(), model.encode(&x).unwrap());
        let z = vec![0.21, -0.4, 0.05];
        assert_eq!(
            ad.reconstruct(&z).unwrap().values(),
            model.decode(&z).unwrap().values()
        );
        let qge = QgeModel::new(g, cfg()).unwrap();
        assert_eq!(
            ad.reduced_rhs(&z).unwrap(),
            ae_rom_rhs_with(&model, &z, &qge).unwrap()
        );
    }

    #[test]
    fn identity_adapter_is_exact() {
        let g = grid();
        let ad = IdentityAdapter::from_config(g, cfg()).unwrap();
        assert_eq!(ad.kind(), "identity");
        assert_eq!(ad.order(), g.len());

        let x = random_field(g, 57);
        let z = ad.project(&x).unwrap();
        assert_eq!(z, x.values());
        assert_eq!(ad.reconstruct(&z).unwrap().values(), x.values());

        let qge = QgeModel::new(g, cfg()).unwrap();
        assert_eq!(ad.reduced_rhs(&z).unwrap(), qge.rhs(&x).unwrap().values());
    }
}
