//! Flat key=value run configuration.
//!
//! One file pins an entire experiment: grid, solver constants, model orders,
//! training hyperparameters, evaluation switches, and artifact names. Keys
//! are dot-namespaced (`fom.re = 450`), `#` starts a comment, and unknown
//! keys are rejected rather than silently ignored. Every command writes a
//! resolved echo — all defaults materialized — next to its outputs, and
//! re-running from that echo reproduces the outputs bit-for-bit apart from
//! wall-time columns.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use qgrom_core::ae::train::{LossKind, TrainConfig};
use qgrom_core::error::{Error, Result};
use qgrom_core::fom::model::FomConfig;
use qgrom_core::grid::Grid;

/// Built-in configuration scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Full-resolution defaults (127×63 grid, 2001 snapshots, 50 epochs).
    Paper,
    /// Desk-scale run (33×17 grid, 201 snapshots, 5 epochs) that exercises
    /// every code path in seconds to minutes.
    Ci,
}

/// Model families an evaluation row can come from.
pub const MODEL_NAMES: [&str; 4] = ["pod", "ae-mse", "ae-pi", "identity"];

/// Every tunable of a run, with defaults matching the full-resolution setup.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
    pub re: f64,
    pub ro: f64,
    pub dt: f64,
    pub substeps: usize,
    pub spin_up_time: f64,
    pub n_snapshots: usize,
    /// Reduced orders built by `pod` and trained by `train`.
    pub pod_r: Vec<usize>,
    /// Project fluctuations around the snapshot mean instead of raw states.
    pub centered_projection: bool,
    pub epochs: usize,
    pub lambda: f64,
    pub lr: f64,
    pub batch: usize,
    pub seed: u64,
    /// Objective trained when `train` is run without `--loss`.
    pub loss: LossKind,
    /// Reduced orders evaluated by `evaluate` and `propagate`.
    pub orders: Vec<usize>,
    /// Model families evaluated, in row order.
    pub models: Vec<String>,
    /// Also score propagation on the future-window dataset.
    pub future_interval: bool,
    /// Apply the energy metric to raw vorticity instead of streamfunctions.
    pub energy_on_raw_state: bool,
    pub workdir: PathBuf,
    pub dataset: String,
    pub future_dataset: String,
    pub report: String,
    pub propagate_out: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            nx: 127,
            ny: 63,
            lx: 1.0,
            ly: 2.0,
            re: 450.0,
            ro: 0.0036,
            dt: 0.0109,
            substeps: 100,
            spin_up_time: 10.0,
            n_snapshots: 2001,
            pod_r: vec![5, 10, 25, 50, 100],
            centered_projection: true,
            epochs: 50,
            lambda: 1e-4,
            lr: 1e-3,
            batch: 32,
            seed: 0,
            loss: LossKind::Mse,
            orders: vec![5, 10, 25, 50, 100],
            models: vec!["pod".into(), "ae-mse".into(), "ae-pi".into()],
            future_interval: false,
            energy_on_raw_state: false,
            workdir: PathBuf::from("."),
            dataset: "snapshots.romf".into(),
            future_dataset: "future_snapshots.romf".into(),
            report: "report.csv".into(),
            propagate_out: "propagate.csv".into(),
        }
    }
}

fn bad(key: &str, reason: impl Into<String>) -> Error {
    Error::InvalidConfig {
        key: key.into(),
        reason: reason.into(),
    }
}

fn parse_usize(key: &str, v: &str) -> Result<usize> {
    v.parse()
        .map_err(|_| bad(key, format!("expected an unsigned integer, got {v:?}")))
}

fn parse_u64(key: &str, v: &str) -> Result<u64> {
    v.parse()
        .map_err(|_| bad(key, format!("expected an unsigned integer, got {v:?}")))
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    v.parse()
        .map_err(|_| bad(key, format!("expected a number, got {v:?}")))
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(bad(key, format!("expected true or false, got {v:?}"))),
    }
}

fn parse_usize_list(key: &str, v: &str) -> Result<Vec<usize>> {
    v.split(',')
        .map(|t| parse_usize(key, t.trim()))
        .collect()
}

fn parse_loss(key: &str, v: &str) -> Result<LossKind> {
    match v {
        "mse" => Ok(LossKind::Mse),
        "pi" => Ok(LossKind::Pi),
        _ => Err(bad(key, format!("expected mse or pi, got {v:?}"))),
    }
}

/// Stable label for a loss kind, used in keys and artifact names.
pub fn loss_label(kind: LossKind) -> &'static str {
    match kind {
        LossKind::Mse => "mse",
        LossKind::Pi => "pi",
    }
}

fn join_usize(list: &[usize]) -> String {
    list.iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

impl RunConfig {
    /// Applies a preset's overrides on top of the current values.
    pub fn apply_preset(&mut self, preset: Preset) {
        match preset {
            Preset::Paper => {}
            Preset::Ci => {
                self.nx = 33;
                self.ny = 17;
                self.substeps = 20;
                self.n_snapshots = 201;
                self.epochs = 5;
                self.pod_r = vec![3, 5];
                self.orders = vec![3, 5];
            }
        }
    }

    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "grid.nx" => self.nx = parse_usize(key, value)?,
            "grid.ny" => self.ny = parse_usize(key, value)?,
            "grid.lx" => self.lx = parse_f64(key, value)?,
            "grid.ly" => self.ly = parse_f64(key, value)?,
            "fom.re" => self.re = parse_f64(key, value)?,
            "fom.ro" => self.ro = parse_f64(key, value)?,
            "fom.dt" => self.dt = parse_f64(key, value)?,
            "fom.substeps" => self.substeps = parse_usize(key, value)?,
            "fom.spin_up_time" => self.spin_up_time = parse_f64(key, value)?,
            "fom.n_snapshots" => self.n_snapshots = parse_usize(key, value)?,
            "pod.r" => self.pod_r = parse_usize_list(key, value)?,
            "pod.centered_projection" => self.centered_projection = parse_bool(key, value)?,
            "train.epochs" => self.epochs = parse_usize(key, value)?,
            "train.lambda" => self.lambda = parse_f64(key, value)?,
            "train.lr" => self.lr = parse_f64(key, value)?,
            "train.batch" => self.batch = parse_usize(key, value)?,
            "train.seed" => self.seed = parse_u64(key, value)?,
            "train.loss" => self.loss = parse_loss(key, value)?,
            "eval.orders" => self.orders = parse_usize_list(key, value)?,
            "eval.models" => {
                self.models = value.split(',').map(|t| t.trim().to_string()).collect()
            }
            "eval.future_interval" => self.future_interval = parse_bool(key, value)?,
            "eval.energy_on_raw_state" => {
                self.energy_on_raw_state = parse_bool(key, value)?
            }
            "paths.workdir" => self.workdir = PathBuf::from(value),
            "paths.dataset" => self.dataset = value.to_string(),
            "paths.future_dataset" => self.future_dataset = value.to_string(),
            "paths.report" => self.report = value.to_string(),
            "paths.propagate" => self.propagate_out = value.to_string(),
            _ => return Err(bad(key, "unknown configuration key")),
        }
        Ok(())
    }

    /// Parses `key = value` lines over the current values. `#` starts a
    /// comment anywhere on a line, so values themselves cannot contain `#`.
    pub fn parse_from(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(bad(
                    &format!("line {}", lineno + 1),
                    format!("expected key = value, got {line:?}"),
                ));
            };
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    /// All keys with their current values, in canonical order.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        vec![
            ("grid.nx", self.nx.to_string()),
            ("grid.ny", self.ny.to_string()),
            ("grid.lx", self.lx.to_string()),
            ("grid.ly", self.ly.to_string()),
            ("fom.re", self.re.to_string()),
            ("fom.ro", self.ro.to_string()),
            ("fom.dt", self.dt.to_string()),
            ("fom.substeps", self.substeps.to_string()),
            ("fom.spin_up_time", self.spin_up_time.to_string()),
            ("fom.n_snapshots", self.n_snapshots.to_string()),
            ("pod.r", join_usize(&self.pod_r)),
            ("pod.centered_projection", self.centered_projection.to_string()),
            ("train.epochs", self.epochs.to_string()),
            ("train.lambda", self.lambda.to_string()),
            ("train.lr", self.lr.to_string()),
            ("train.batch", self.batch.to_string()),
            ("train.seed", self.seed.to_string()),
            ("train.loss", loss_label(self.loss).to_string()),
            ("eval.orders", join_usize(&self.orders)),
            ("eval.models", self.models.join(",")),
            ("eval.future_interval", self.future_interval.to_string()),
            ("eval.energy_on_raw_state", self.energy_on_raw_state.to_string()),
            ("paths.workdir", self.workdir.display().to_string()),
            ("paths.dataset", self.dataset.clone()),
            ("paths.future_dataset", self.future_dataset.clone()),
            ("paths.report", self.report.clone()),
            ("paths.propagate", self.propagate_out.clone()),
        ]
    }

    /// Renders the fully resolved configuration; parsing it back yields an
    /// identical configuration.
    pub fn echo(&self) -> String {
        let mut out = String::from("# resolved configuration: every key materialized\n");
        for (key, value) in self.entries() {
            let _ = writeln!(out, "{key} = {value}");
        }
        out
    }

    /// Rejects invalid values, naming the offending key.
    pub fn validate(&self) -> Result<()> {
        if self.nx < 3 {
            return Err(bad("grid.nx", "needs at least 3 points per axis"));
        }
        if self.ny < 3 {
            return Err(bad("grid.ny", "needs at least 3 points per axis"));
        }
        if !(self.lx > 0.0 && self.lx.is_finite()) {
            return Err(bad("grid.lx", "extent must be positive and finite"));
        }
        if !(self.ly > 0.0 && self.ly.is_finite()) {
            return Err(bad("grid.ly", "extent must be positive and finite"));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(bad("fom.dt", "snapshot interval must be positive"));
        }
        self.grid()?;
        self.fom().validate()?;
        self.train_config().validate()?;

        let limit = (self.nx * self.ny).min(self.n_snapshots - 1);
        for (key, list) in [("pod.r", &self.pod_r), ("eval.orders", &self.orders)] {
            if list.is_empty() {
                return Err(bad(key, "needs at least one reduced order"));
            }
            for &r in list {
                if r == 0 || r > limit {
                    return Err(bad(
                        key,
                        format!("order {r} outside 1..=min(grid points, snapshots − 1) = {limit}"),
                    ));
                }
            }
        }
        if self.models.is_empty() {
            return Err(bad("eval.models", "needs at least one model"));
        }
        for name in &self.models {
            if !MODEL_NAMES.contains(&name.as_str()) {
                return Err(bad(
                    "eval.models",
                    format!("unknown model {name:?}; known: {}", MODEL_NAMES.join(", ")),
                ));
            }
        }
        for (key, name) in [
            ("paths.dataset", &self.dataset),
            ("paths.future_dataset", &self.future_dataset),
            ("paths.report", &self.report),
            ("paths.propagate", &self.propagate_out),
        ] {
            if name.is_empty() {
                return Err(bad(key, "file name must not be empty"));
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid<f64>> {
        Grid::new(self.nx, self.ny, self.lx, self.ly)
    }

    pub fn fom(&self) -> FomConfig {
        FomConfig {
            re: self.re,
            ro: self.ro,
            dt_snapshot: self.dt,
            substeps: self.substeps,
            spin_up_time: self.spin_up_time,
            n_snapshots: self.n_snapshots,
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            lambda: self.lambda,
            learning_rate: self.lr,
            batch_size: self.batch,
            seed: self.seed,
            ..TrainConfig::default()
        }
    }

    pub fn dataset_path(&self) -> PathBuf {
        self.workdir.join(&self.dataset)
    }

    pub fn future_dataset_path(&self) -> PathBuf {
        self.workdir.join(&self.future_dataset)
    }

    pub fn report_path(&self) -> PathBuf {
        self.workdir.join(&self.report)
    }

    pub fn propagate_path(&self) -> PathBuf {
        self.workdir.join(&self.propagate_out)
    }
}

/// Builds the effective configuration: defaults, then preset, then config
/// file, then command-line overrides; validated before use.
pub fn load(
    preset: Option<Preset>,
    config: Option<&Path>,
    seed: Option<u64>,
    workdir: Option<&Path>,
) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(p) = preset {
        cfg.apply_preset(p);
    }
    if let Some(path) = config {
        let text = std::fs::read_to_string(path).map_err(|e| {
            bad("config", format!("cannot read {}: {e}", path.display()))
        })?;
        cfg.parse_from(&text)?;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(w) = workdir {
        cfg.workdir = w.to_path_buf();
    }
    cfg.validate()?;
    Ok(cfg)
}
