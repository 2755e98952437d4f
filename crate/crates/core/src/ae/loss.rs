//! Training objectives and the learned reduced dynamics.
//!
//! Both objectives are per-element means in normalized units. With batch
//! size `B` and `n` grid points per field, the reconstruction objective is
//! `(1/(B·n)) Σᵢ ‖net(x̃ᵢ) − x̃ᵢ‖²` over normalized states `x̃ᵢ`. The
//! dynamics-aware objective adds `λ·(1/(B·n)) Σᵢ ‖J_net(x̃ᵢ)·f̃ᵢ − f̃ᵢ‖²`,
//! where `f̃ᵢ` is the normalized time derivative of snapshot `i` and
//! `J_net·f̃` is the exact directional derivative of the full reconstruction
//! map, evaluated with tangent propagation rather than finite differences.
//! With `λ = 0` the dynamics-aware objective reduces to the reconstruction
//! objective exactly (identical arithmetic, same code path).
//!
//! [`ae_rom_rhs`] closes the loop in the reduced coordinates: decode the
//! reduced state, evaluate the full-order right-hand side there, and push
//! that velocity through the encoder's directional derivative.

use crate::ad::dual::Dual;
use crate::ad::graph::{Graph, NodeId};
use crate::ae::model::AeModel;
use crate::error::{Error, Result};
use crate::fom::model::{FomConfig, QgeModel};
use crate::grid::Field;

/// A differentiable batch objective: the graph, its scalar root, and the
/// parameter nodes in canonical order.
pub(crate) struct LossGraph {
    pub graph: Graph,
    pub root: NodeId,
    pub params: Vec<NodeId>,
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::InvalidConfig {
            key: "train.lambda".into(),
            reason: format!("must be finite and nonnegative, got {lambda}"),
        });
    }
    Ok(())
}

/// Builds the batch objective as one graph, ready for `backward`.
///
/// `tangents = None` gives the reconstruction objective; `Some((rhs, λ))`
/// adds the dynamics-mismatch term. Callers wanting `λ = 0` should pass
/// `None` so both objectives share one arithmetic path.
pub(crate) fn build_loss(
    model: &AeModel,
    states: &[Field<f64>],
    tangents: Option<(&[Field<f64>], f64)>,
) -> Result<LossGraph> {
    if states.is_empty() {
        return Err(Error::EmptyBatch);
    }
    if let Some((rhs, _)) = tangents {
        if rhs.len() != states.len() {
            return Err(Error::BatchMisaligned {
                states: states.len(),
                rhs: rhs.len(),
            });
        }
    }
    let mut g = Graph::new();
    let params = model.insert_params(&mut g);
    let mut recon_sum: Option<NodeId> = None;
    let mut dyn_sum: Option<NodeId> = None;
    let push = |g: &mut Graph, acc: &mut Option<NodeId>, term: NodeId| -> Result<()> {
        *acc = Some(match *acc {
            None => term,
            Some(s) => g.add(s, term)?,
        });
        Ok(())
    };
    for (i, x) in states.iter().enumerate() {
        let input = model.field_to_input(x)?;
        match tangents {
            None => {
                let xi = g.input(input);
                let z = model.encoder_nodes(&mut g, &params, xi)?;
                let out = model.decoder_nodes(&mut g, &params, z)?;
                let diff = g.sub(out, xi)?;
                let sq = g.squared_norm(diff);
                push(&mut g, &mut recon_sum, sq)?;
            }
            Some((rhs, _)) => {
                let tin = model.tangent_to_input(&rhs[i])?;
                let xd = Dual::new(&mut g, input, tin)?;
                let zd = model.encoder_dual(&mut g, &params, xd)?;
                let outd = model.decoder_dual(&mut g, &params, zd)?;
                let rdiff = g.sub(outd.primal, xd.primal)?;
                let rsq = g.squared_norm(rdiff);
                push(&mut g, &mut recon_sum, rsq)?;
                let tdiff = g.sub(outd.tangent, xd.tangent)?;
                let tsq = g.squared_norm(tdiff);
                push(&mut g, &mut dyn_sum, tsq)?;
            }
        }
    }
    let denom = (states.len() * model.arch().points()) as f64;
    let mut root = g.scale(recon_sum.expect("nonempty batch"), 1.0 / denom);
    if let Some((_, lambda)) = tangents {
        let scaled = g.scale(dyn_sum.expect("nonempty batch"), lambda / denom);
        root = g.add(root, scaled)?;
    }
    Ok(LossGraph {
        graph: g,
        root,
        params,
    })
}

/// One sample's squared reconstruction error and (optionally) squared
/// dynamics mismatch, evaluated in its own graph so full-dataset metrics
/// never hold more than one sample's activations.
fn sample_terms(model: &AeModel, x: &Field<f64>, fx: Option<&Field<f64>>) -> Result<(f64, f64)> {
    let mut g = Graph::new();
    let params = model.insert_params(&mut g);
    let input = model.field_to_input(x)?;
    match fx {
        None => {
            let xi = g.input(input);
            let z = model.encoder_nodes(&mut g, &params, xi)?;
            let out = model.decoder_nodes(&mut g, &params, z)?;
            let diff = g.sub(out, xi)?;
            let sq = g.squared_norm(diff);
            Ok((g.value(sq).item()?, 0.0))
        }
        Some(f) => {
            let tin = model.tangent_to_input(f)?;
            let xd = Dual::new(&mut g, input, tin)?;
            let zd = model.encoder_dual(&mut g, &params, xd)?;
            let outd = model.decoder_dual(&mut g, &params, zd)?;
            let rdiff = g.sub(outd.primal, xd.primal)?;
            let rsq = g.squared_norm(rdiff);
            let tdiff = g.sub(outd.tangent, xd.tangent)?;
            let tsq = g.squared_norm(tdiff);
            Ok((g.value(rsq).item()?, g.value(tsq).item()?))
        }
    }
}

/// Mean squared reconstruction error per element, in normalized units.
pub fn mse_loss(model: &AeModel, states: &[Field<f64>]) -> Result<f64> {
    if states.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let mut recon = 0.0;
    for x in states {
        recon += sample_terms(model, x, None)?.0;
    }
    let denom = (states.len() * model.arch().points()) as f64;
    Ok(recon * (1.0 / denom))
}

/// Reconstruction objective plus `λ` times the mean squared dynamics
/// mismatch, in normalized units. `λ = 0` delegates to [`mse_loss`].
pub fn pi_loss(
    model: &AeModel,
    states: &[Field<f64>],
    rhs: &[Field<f64>],
    lambda: f64,
) -> Result<f64> {
    check_lambda(lambda)?;
    if states.is_empty() {
        return Err(Error::EmptyBatch);
    }
    if rhs.len() != states.len() {
        return Err(Error::BatchMisaligned {
            states: states.len(),
            rhs: rhs.len(),
        });
    }
    if lambda == 0.0 {
        return mse_loss(model, states);
    }
    let (mut recon, mut dynamics) = (0.0, 0.0);
    for (x, f) in states.iter().zip(rhs) {
        let (r, t) = sample_terms(model, x, Some(f))?;
        recon += r;
        dynamics += t;
    }
    let denom = (states.len() * model.arch().points()) as f64;
    Ok(recon * (1.0 / denom) + dynamics * (lambda / denom))
}

/// Directional derivative of the full reconstruction map: how the decoded
/// reconstruction moves when the input state moves along `fx`. Exact
/// tangent propagation in raw field units.
pub fn reconstruction_time_derivative(
    model: &AeModel,
    x: &Field<f64>,
    fx: &Field<f64>,
) -> Result<Field<f64>> {
    let mut g = Graph::new();
    let params = model.insert_params(&mut g);
    let input = model.field_to_input(x)?;
    let tin = model.tangent_to_input(fx)?;
    let xd = Dual::new(&mut g, input, tin)?;
    let zd = model.encoder_dual(&mut g, &params, xd)?;
    let outd = model.decoder_dual(&mut g, &params, zd)?;
    model.tangent_output_to_field(g.value(outd.tangent))
}

/// Learned reduced dynamics `ż = E'(x̂)·f(x̂)` with `x̂ = decode(z)`:
/// decode, evaluate the full-order right-hand side at the reconstruction,
/// and push it through the encoder's directional derivative.
pub fn ae_rom_rhs(model: &AeModel, z: &[f64], cfg: &FomConfig) -> Result<Vec<f64>> {
    let qge = QgeModel::new(*model.grid(), *cfg)?;
    ae_rom_rhs_with(model, z, &qge)
}

/// [`ae_rom_rhs`] against a prebuilt full-order model, for propagation
/// loops that reuse the Poisson solver across steps.
pub fn ae_rom_rhs_with(model: &AeModel, z: &[f64], qge: &QgeModel<f64>) -> Result<Vec<f64>> {
    let xhat = model.decode(z)?;
    if !xhat.all_finite() {
        return Err(Error::NonFiniteState {
            what: "decoded reduced state",
        });
    }
    let f = qge.rhs(&xhat)?;
    let mut g = Graph::new();
    let params = model.insert_params(&mut g);
    let input = model.field_to_input(&xhat)?;
    let tin = model.tangent_to_input(&f)?;
    let xd = Dual::new(&mut g, input, tin)?;
    let zd = model.encoder_dual(&mut g, &params, xd)?;
    Ok(g.value(zd.tangent).data().to_vec())
}
