//! Scenario sweeps: the adaptive agent and the static-max baseline on every
//! `(nodes_initial, rate_max, seed)` cell.
//!
//! Each cell lives in `cells/n<nodes>_r<rate_bps>_s<seed>/` and is complete
//! once its `manifest.json` exists; a rerun reuses complete cells whose config
//! hash matches. After all cells finish the sweep writes `sweep.csv`
//! (`nodes,rate_max,seed,policy,epoch,mean_reward`) and `summary.csv`
//! (`nodes,rate_max,seed,policy,final_mean_reward`).

use std::fs::{self, File};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use semshard_core::env::{run_baseline, Exogenous};
use semshard_core::Rng;

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::manifest::{now_ms, RunManifest, MANIFEST_FILE};
use crate::train::{train_scenario, write_rewards, REWARDS_FILE};

pub const BASELINE_FILE: &str = "baseline.csv";
pub const SWEEP_FILE: &str = "sweep.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const SWEEP_HEADER: [&str; 6] = [
    "nodes",
    "rate_max",
    "seed",
    "policy",
    "epoch",
    "mean_reward",
];
pub const SUMMARY_HEADER: [&str; 5] = ["nodes", "rate_max", "seed", "policy", "final_mean_reward"];
/// Epochs averaged for the summary.
pub const SUMMARY_WINDOW: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Policy {
    #[serde(rename = "adaptive")]
    Adaptive,
    #[serde(rename = "static-max")]
    StaticMax,
}

impl Policy {
    pub fn label(self) -> &'static str {
        match self {
            Policy::Adaptive => "adaptive",
            Policy::StaticMax => "static-max",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioGrid {
    pub nodes_initial: Vec<usize>,
    /// Bits per second.
    pub rate_max: Vec<f64>,
    pub seeds: Vec<u64>,
}

impl Default for ScenarioGrid {
    fn default() -> Self {
        Self {
            nodes_initial: (1..=5).map(|i| i * 100).collect(),
            rate_max: (6..=10).map(|i| i as f64 * 10e6).collect(),
            seeds: vec![1, 2, 3],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub nodes: usize,
    pub rate_max: f64,
    pub seed: u64,
}

impl Cell {
    pub fn dir_name(&self) -> String {
        format!(
            "n{}_r{}_s{}",
            self.nodes,
            self.rate_max.round() as u64,
            self.seed
        )
    }
}

impl ScenarioGrid {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| CliError::Unreadable {
            path: path.to_path_buf(),
            source,
        })?;
        let grid: ScenarioGrid =
            toml::from_str(&text).map_err(|e| CliError::config("grid", e.message().to_string()))?;
        Ok(grid)
    }

    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for &nodes in &self.nodes_initial {
            for &rate_max in &self.rate_max {
                for &seed in &self.seeds {
                    out.push(Cell {
                        nodes,
                        rate_max,
                        seed,
                    });
                }
            }
        }
        out
    }

    /// Non-empty lists whose every cell yields a valid config.
    pub fn validate(&self, base: &RunConfig) -> Result<()> {
        for (key, empty) in [
            ("grid.nodes_initial", self.nodes_initial.is_empty()),
            ("grid.rate_max", self.rate_max.is_empty()),
            ("grid.seeds", self.seeds.is_empty()),
        ] {
            if empty {
                return Err(CliError::config(key, "must not be empty"));
            }
        }
        for cell in self.cells() {
            cell_config(base, &cell).validate()?;
        }
        Ok(())
    }
}

pub fn cell_config(base: &RunConfig, cell: &Cell) -> RunConfig {
    let mut cfg = base.clone();
    cfg.network.nodes_initial = cell.nodes;
    cfg.network.rate_max = cell.rate_max;
    cfg.network.seed = cell.seed;
    cfg
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub cell: Cell,
    /// Mean reward per epoch.
    pub adaptive: Vec<f64>,
    pub baseline: Vec<f64>,
    pub resumed: bool,
}

impl CellResult {
    pub fn final_mean(&self, policy: Policy) -> f64 {
        let series = match policy {
            Policy::Adaptive => &self.adaptive,
            Policy::StaticMax => &self.baseline,
        };
        let tail = &series[series.len().saturating_sub(SUMMARY_WINDOW)..];
        tail.iter().sum::<f64>() / tail.len().max(1) as f64
    }
}

/// The baseline sees the same exogenous stream as the adaptive agent's
/// environment: `train` takes its environment stream as the first fork.
pub fn baseline_for(cfg: &RunConfig) -> Result<Vec<f64>> {
    let mut env_rng = Rng::new(cfg.network.seed).fork();
    Ok(run_baseline(
        &cfg.network,
        Exogenous::Random,
        cfg.agent.epochs,
        &mut env_rng,
    )?)
}

fn read_series(path: &Path) -> Result<Vec<f64>> {
    let mut rdr = csv::Reader::from_path(path)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let headers = rdr
        .headers()
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?
        .clone();
    let col = headers
        .iter()
        .position(|h| h == "mean_reward")
        .ok_or_else(|| CliError::Usage(format!("{}: no mean_reward column", path.display())))?;
    rdr.records()
        .map(|r| {
            let r = r.map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            r[col]
                .parse()
                .map_err(|_| CliError::Usage(format!("{}: bad mean_reward", path.display())))
        })
        .collect()
}

fn write_series(path: &Path, series: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::Unwritable {
        path: path.to_path_buf(),
        source: e.into(),
    })?;
    let io = |e: csv::Error| CliError::Unwritable {
        path: path.to_path_buf(),
        source: e.into(),
    };
    w.write_record(["epoch", "mean_reward"]).map_err(io)?;
    for (epoch, r) in series.iter().enumerate() {
        w.write_record([epoch.to_string(), r.to_string()])
            .map_err(io)?;
    }
    w.flush().map_err(CliError::write(path))
}

pub fn run_cell(base: &RunConfig, cell: &Cell, out: &Path) -> Result<CellResult> {
    let cfg = cell_config(base, cell);
    let dir = out.join("cells").join(cell.dir_name());
    if dir.join(MANIFEST_FILE).exists() {
        let manifest = RunManifest::read(&dir)?;
        if manifest.config_hash == cfg.content_hash() {
            return Ok(CellResult {
                cell: *cell,
                adaptive: read_series(&dir.join(REWARDS_FILE))?,
                baseline: read_series(&dir.join(BASELINE_FILE))?,
                resumed: true,
            });
        }
    }

    let started = now_ms();
    fs::create_dir_all(&dir).map_err(CliError::write(&dir))?;
    let trained = train_scenario(&cfg)?;
    let baseline = baseline_for(&cfg)?;
    write_rewards(&trained.rows, &dir.join(REWARDS_FILE))?;
    write_series(&dir.join(BASELINE_FILE), &baseline)?;
    let mut manifest = RunManifest::new(&cfg, started);
    manifest
        .outputs
        .insert("adaptive".into(), REWARDS_FILE.into());
    manifest
        .outputs
        .insert("baseline".into(), BASELINE_FILE.into());
    manifest.write(&dir)?;

    Ok(CellResult {
        cell: *cell,
        adaptive: trained.rows.iter().map(|r| r.mean_reward).collect(),
        baseline,
        resumed: false,
    })
}

pub fn run_sweep(
    base: &RunConfig,
    grid: &ScenarioGrid,
    out: &Path,
    parallel: bool,
) -> Result<Vec<CellResult>> {
    grid.validate(base)?;
    fs::create_dir_all(out).map_err(CliError::write(out))?;
    let cells = grid.cells();
    let results: Vec<CellResult> = if parallel {
        cells
            .par_iter()
            .map(|c| run_cell(base, c, out))
            .collect::<Result<_>>()?
    } else {
        cells
            .iter()
            .map(|c| run_cell(base, c, out))
            .collect::<Result<_>>()?
    };
    write_outputs(&results, out)?;
    Ok(results)
}

fn csv_writer(path: &Path) -> Result<csv::Writer<File>> {
    csv::Writer::from_path(path).map_err(|e| CliError::Unwritable {
        path: path.to_path_buf(),
        source: e.into(),
    })
}

pub fn write_outputs(results: &[CellResult], out: &Path) -> Result<(PathBuf, PathBuf)> {
    let sweep_path = out.join(SWEEP_FILE);
    let summary_path = out.join(SUMMARY_FILE);
    let io = |p: &Path| {
        let p = p.to_path_buf();
        move |e: csv::Error| CliError::Unwritable {
            path: p,
            source: e.into(),
        }
    };

    let mut sweep = csv_writer(&sweep_path)?;
    let mut summary = csv_writer(&summary_path)?;
    sweep.write_record(SWEEP_HEADER).map_err(io(&sweep_path))?;
    summary
        .write_record(SUMMARY_HEADER)
        .map_err(io(&summary_path))?;
    for r in results {
        let c = &r.cell;
        for (policy, series) in [
            (Policy::Adaptive, &r.adaptive),
            (Policy::StaticMax, &r.baseline),
        ] {
            for (epoch, value) in series.iter().enumerate() {
                sweep
                    .write_record([
                        c.nodes.to_string(),
                        c.rate_max.to_string(),
                        c.seed.to_string(),
                        policy.label().to_string(),
                        epoch.to_string(),
                        value.to_string(),
                    ])
                    .map_err(io(&sweep_path))?;
            }
            summary
                .write_record([
                    c.nodes.to_string(),
                    c.rate_max.to_string(),
                    c.seed.to_string(),
                    policy.label().to_string(),
                    r.final_mean(policy).to_string(),
                ])
                .map_err(io(&summary_path))?;
        }
    }
    sweep.flush().map_err(CliError::write(&sweep_path))?;
    summary.flush().map_err(CliError::write(&summary_path))?;
    Ok((sweep_path, summary_path))
}
