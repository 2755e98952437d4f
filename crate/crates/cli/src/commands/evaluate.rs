//! `evaluate` and `propagate`: score stored models against a snapshot set.
//!
//! `evaluate` produces the full comparison (energy ratio, current- and
//! optionally future-window propagation) plus field dumps of the final
//! snapshot and its reconstructions; `propagate` is the propagation-only
//! subset with its own smaller CSV.

use std::time::Instant;

use qgrom_core::ae::model::AeModel;
use qgrom_core::error::{Error, Result};
use qgrom_core::eval::adapters::{AeAdapter, IdentityAdapter, PodAdapter, RomAdapter};
use qgrom_core::eval::propagate::{reference_states, score_against_references};
use qgrom_core::eval::report::{dump_fields, run_comparison};
use qgrom_core::fom::model::QgeModel;
use qgrom_core::io::basis_io::{load_basis, load_qrom};
use qgrom_core::io::snapshots_io::load_snapshots;

use crate::commands::{basis_name, checkpoint_name, prepare_workdir, qrom_name, require, write_text};
use crate::config::RunConfig;

pub const PROPAGATE_HEADER: &str = "model,r,rel_l2,wall_seconds";

/// Loads every selected model at every selected order, in row order.
fn build_adapters(cfg: &RunConfig) -> Result<Vec<Box<dyn RomAdapter>>> {
    let grid = cfg.grid()?;
    let fom = cfg.fom();
    let mut out: Vec<Box<dyn RomAdapter>> = Vec::new();
    for name in &cfg.models {
        match name.as_str() {
            "pod" => {
                for &r in &cfg.orders {
                    let basis =
                        load_basis::<f64>(&require(cfg.workdir.join(basis_name(r)))?, grid)?;
                    let rom = load_qrom::<f64>(&require(cfg.workdir.join(qrom_name(r)))?)?;
                    out.push(Box::new(PodAdapter::new(
                        basis,
                        rom,
                        cfg.centered_projection,
                    )?));
                }
            }
            "ae-mse" | "ae-pi" => {
                let label = name.trim_start_matches("ae-");
                for &r in &cfg.orders {
                    let path = require(cfg.workdir.join(checkpoint_name(label, r, cfg.seed)))?;
                    let model = AeModel::load_checkpoint(&path)?;
                    grid.same_as(model.grid())?;
                    if model.order() != r {
                        return Err(Error::FileFormat {
                            path: path.display().to_string(),
                            reason: format!(
                                "checkpoint has order {}, expected {r}",
                                model.order()
                            ),
                        });
                    }
                    out.push(Box::new(AeAdapter::new(model, fom, name.clone())?));
                }
            }
            "identity" => out.push(Box::new(IdentityAdapter::from_config(grid, fom)?)),
            other => {
                return Err(Error::InvalidConfig {
                    key: "eval.models".into(),
                    reason: format!("unknown model {other:?}"),
                })
            }
        }
    }
    Ok(out)
}

pub fn run(cfg: &RunConfig) -> Result<()> {
    prepare_workdir(cfg, "resolved_evaluate.cfg")?;
    let truth = load_snapshots::<f64>(&require(cfg.dataset_path())?)?;
    cfg.grid()?.same_as(&truth.grid)?;
    let future = if cfg.future_interval {
        let set = load_snapshots::<f64>(&require(cfg.future_dataset_path())?)?;
        truth.grid.same_as(&set.grid)?;
        Some(set)
    } else {
        None
    };

    let adapters = build_adapters(cfg)?;
    let refs: Vec<&dyn RomAdapter> = adapters.iter().map(|b| b.as_ref()).collect();
    let report = run_comparison(
        &refs,
        &truth,
        future.as_ref(),
        &cfg.fom(),
        cfg.energy_on_raw_state,
    )?;
    for d in &report.diagnostics {
        eprintln!("diagnostic: {d}");
    }

    let report_path = cfg.report_path();
    write_text(&report_path, &report.to_csv())?;

    // Field dumps: the final truth snapshot and each model's reconstruction
    // of it, for plotting.
    let last = truth.states.last().expect("snapshot sets are nonempty").clone();
    dump_fields(&cfg.workdir, "fields_truth", std::slice::from_ref(&last))?;
    for ad in &refs {
        let recon = ad.reconstruct(&ad.project(&last)?)?;
        dump_fields(
            &cfg.workdir,
            &format!("fields_{}_r{}", ad.kind(), ad.order()),
            std::slice::from_ref(&recon),
        )?;
    }

    for row in &report.rows {
        let future = row
            .rel_l2_future
            .map(|v| format!(" rel_l2_future={v:.6e}"))
            .unwrap_or_default();
        println!(
            "{} r={}: energy_ratio={:.6} rel_l2_current={:.6e}{future}",
            row.model, row.r, row.energy_ratio, row.rel_l2_current
        );
    }
    println!("wrote {}", report_path.display());
    Ok(())
}

pub fn run_propagate(cfg: &RunConfig) -> Result<()> {
    prepare_workdir(cfg, "resolved_propagate.cfg")?;
    let truth = load_snapshots::<f64>(&require(cfg.dataset_path())?)?;
    cfg.grid()?.same_as(&truth.grid)?;

    let adapters = build_adapters(cfg)?;
    let model = QgeModel::new(truth.grid, cfg.fom())?;
    let references = reference_states(&truth, &model)?;
    for d in references.diagnostics() {
        eprintln!("diagnostic: {d}");
    }

    let mut csv = String::from(PROPAGATE_HEADER);
    csv.push('\n');
    for ad in &adapters {
        let start = Instant::now();
        let out = score_against_references(ad.as_ref(), &truth, &references)?;
        for d in &out.diagnostics {
            eprintln!("diagnostic: {d}");
        }
        csv.push_str(&format!(
            "{},{},{},{}\n",
            ad.kind(),
            ad.order(),
            out.score,
            start.elapsed().as_secs_f64()
        ));
        println!("{} r={}: rel_l2={:.6e}", ad.kind(), ad.order(), out.score);
    }

    let path = cfg.propagate_path();
    write_text(&path, &csv)?;
    println!("wrote {}", path.display());
    Ok(())
}
