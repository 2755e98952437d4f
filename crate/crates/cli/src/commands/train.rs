//! `train`: fit autoencoder models per reduced order, writing a checkpoint
//! and a metric-history CSV for each.

use std::time::Instant;

use qgrom_core::ae::model::{AeModel, HistoryRow};
use qgrom_core::ae::train::{train_with_logger, LossKind};
use qgrom_core::error::{Error, Result};
use qgrom_core::io::snapshots_io::load_snapshots;

use crate::commands::{checkpoint_name, history_name, prepare_workdir, require, write_text};
use crate::config::{loss_label, RunConfig};

pub const HISTORY_HEADER: &str = "epoch,mse_metric,pi_metric,wall_seconds";

fn history_csv(rows: &[HistoryRow]) -> String {
    let mut out = String::from(HISTORY_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            row.epoch, row.mse_metric, row.pi_metric, row.wall_seconds
        ));
    }
    out
}

pub fn run(cfg: &RunConfig, loss_flag: Option<LossKind>) -> Result<()> {
    let kind = loss_flag.unwrap_or(cfg.loss);
    let label = loss_label(kind);
    prepare_workdir(cfg, &format!("resolved_train_{label}_s{}.cfg", cfg.seed))?;
    let set = load_snapshots::<f64>(&require(cfg.dataset_path())?)?;
    cfg.grid()?.same_as(&set.grid)?;
    let tcfg = cfg.train_config();

    for &r in &cfg.pod_r {
        let start = Instant::now();
        let history_path = cfg.workdir.join(history_name(label, r, cfg.seed));
        let model = AeModel::new(set.grid, r, cfg.seed)?;
        let mut rows: Vec<HistoryRow> = Vec::new();
        let trained = match train_with_logger(model, &set, &tcfg, kind, |row| rows.push(*row)) {
            Ok(m) => m,
            Err(e) if e.is_divergence() => {
                // Keep whatever metric rows were recorded before the failure.
                write_text(&history_path, &history_csv(&rows))?;
                eprintln!("partial history preserved at {}", history_path.display());
                return Err(e);
            }
            Err(e) => return Err(e),
        };

        let ckpt_path = cfg.workdir.join(checkpoint_name(label, r, cfg.seed));
        trained.save_checkpoint(&ckpt_path)?;
        write_text(&history_path, &history_csv(&trained.history))?;

        // The checkpoint must reproduce the trained model's forward pass
        // bit-for-bit.
        let reloaded = AeModel::load_checkpoint(&ckpt_path)?;
        let probe = &set.states[0];
        if reloaded.encode(probe)? != trained.encode(probe)? {
            return Err(Error::FileFormat {
                path: ckpt_path.display().to_string(),
                reason: "reloaded checkpoint disagrees with the trained model".into(),
            });
        }

        let last = trained.history.last().expect("training logs a final row");
        println!(
            "{label} r={r} seed={}: {} epochs in {:.2} s; final mse_metric {:e}, pi_metric {:e}",
            cfg.seed,
            cfg.epochs,
            start.elapsed().as_secs_f64(),
            last.mse_metric,
            last.pi_metric
        );
        println!("wrote {}", ckpt_path.display());
        println!("wrote {}", history_path.display());
    }
    Ok(())
}
