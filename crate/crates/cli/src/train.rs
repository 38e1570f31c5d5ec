use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;

use semshard_core::dqn::{self, write_rewards_csv, EpochRow, QNetwork};
use semshard_core::env::{Exogenous, ShardEnv};
use semshard_core::Rng;

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::manifest::{now_ms, RunManifest};

pub const REWARDS_FILE: &str = "rewards.csv";
pub const NETWORK_FILE: &str = "network.bin";

#[derive(Debug, Clone)]
pub struct TrainOutput {
    pub rows: Vec<EpochRow>,
    pub network: QNetwork,
}

/// Train on the scenario described by `cfg`, seeded from `cfg.network.seed`.
pub fn train_scenario(cfg: &RunConfig) -> Result<TrainOutput> {
    let mut env = ShardEnv::new(cfg.network.clone(), Exogenous::Random)?;
    let run = dqn::train(&mut env, &cfg.agent, &mut Rng::new(cfg.network.seed))?;
    Ok(TrainOutput {
        rows: run.rows,
        network: run.network,
    })
}

pub fn write_rewards(rows: &[EpochRow], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(CliError::write(path))?;
    write_rewards_csv(rows, BufWriter::new(file)).map_err(CliError::write(path))
}

/// `train` subcommand: writes `rewards.csv`, `network.bin` and `manifest.json`
/// into `out`.
pub fn cmd_train(cfg: &RunConfig, out: &Path) -> Result<TrainOutput> {
    let started = now_ms();
    fs::create_dir_all(out).map_err(CliError::write(out))?;
    let result = train_scenario(cfg)?;

    write_rewards(&result.rows, &out.join(REWARDS_FILE))?;
    let net_path = out.join(NETWORK_FILE);
    fs::write(&net_path, result.network.to_bytes()).map_err(CliError::write(&net_path))?;

    let mut manifest = RunManifest::new(cfg, started);
    manifest
        .outputs
        .insert("rewards".into(), REWARDS_FILE.into());
    manifest
        .outputs
        .insert("network".into(), NETWORK_FILE.into());
    manifest.write(out)?;
    Ok(result)
}
