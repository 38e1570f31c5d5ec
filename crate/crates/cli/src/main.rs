use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use semshard_harness::demo::{run_demo, DemoArgs, Mechanism};
use semshard_harness::eval::{cmd_eval_throughput, parse_rate, parse_size, EvalArgs};
use semshard_harness::sweep::{run_sweep, ScenarioGrid};
use semshard_harness::train::cmd_train;
use semshard_harness::{CliError, Result, RunConfig};

#[derive(Debug, Parser)]
#[command(
    name = "semshard",
    version,
    about = "Sharded semantic verifier simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train the DQN controller on one scenario.
    Train {
        /// TOML config; omitted keys take their defaults.
        config: Option<PathBuf>,
        /// Overrides `network.seed`.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train and run the static-max baseline over a scenario grid.
    Sweep {
        config: Option<PathBuf>,
        /// TOML with `nodes_initial`, `rate_max` and `seeds` lists.
        #[arg(long)]
        grid: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Run cells one at a time.
        #[arg(long)]
        serial: bool,
    },
    /// Print the latency breakdown and throughput of one sharding setting.
    EvalThroughput {
        #[arg(long)]
        shards: usize,
        /// Bits, or with a unit: 800000, 100Kb, 1MB.
        #[arg(long)]
        msg_size: String,
        #[arg(long)]
        nodes: usize,
        /// Bits per second, or with a unit: 10Mbps.
        #[arg(long)]
        rate: String,
        /// Semantic processing time in seconds.
        #[arg(long)]
        sem_time: f64,
        #[arg(long)]
        reconfigured: bool,
    },
    /// Run one proof-of-semantic round and print the resulting ledger.
    PosDemo {
        #[arg(long)]
        verifiers: usize,
        #[arg(long, value_enum)]
        mechanism: Mechanism,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        tamper: bool,
        #[arg(long)]
        challenger_knows_truth: bool,
    },
}

fn run(cli: Cli) -> Result<()> {
    let mut stdout = std::io::stdout().lock();
    match cli.command {
        Command::Train { config, seed, out } => {
            let mut cfg = RunConfig::load(config.as_deref())?;
            if let Some(seed) = seed {
                cfg.network.seed = seed;
                cfg.validate()?;
            }
            let result = cmd_train(&cfg, &out)?;
            let last = result.rows.last().map_or(f64::NAN, |r| r.mean_reward);
            writeln!(
                stdout,
                "{} epochs, final mean reward {last:.6}, written to {}",
                result.rows.len(),
                out.display()
            )
            .ok();
        }
        Command::Sweep {
            config,
            grid,
            out,
            serial,
        } => {
            let cfg = RunConfig::load(config.as_deref())?;
            let grid = match grid {
                Some(path) => ScenarioGrid::load(&path)?,
                None => ScenarioGrid::default(),
            };
            let results = run_sweep(&cfg, &grid, &out, !serial)?;
            let resumed = results.iter().filter(|r| r.resumed).count();
            writeln!(
                stdout,
                "{} cells ({resumed} resumed), written to {}",
                results.len(),
                out.display()
            )
            .ok();
        }
        Command::EvalThroughput {
            shards,
            msg_size,
            nodes,
            rate,
            sem_time,
            reconfigured,
        } => {
            if !sem_time.is_finite() || sem_time < 0.0 {
                return Err(CliError::Usage(
                    "--sem-time must be a non-negative number".into(),
                ));
            }
            let args = EvalArgs {
                shards,
                message_bits: parse_size(&msg_size)?,
                nodes,
                rate: parse_rate(&rate)?,
                semantic_time: sem_time,
                reconfigured,
            };
            cmd_eval_throughput(&args, &RunConfig::load(None)?.network, &mut stdout)?;
        }
        Command::PosDemo {
            verifiers,
            mechanism,
            seed,
            tamper,
            challenger_knows_truth,
        } => {
            let args = DemoArgs {
                verifiers,
                mechanism,
                seed,
                tamper,
                challenger_knows_truth,
            };
            let report = run_demo(&args, &RunConfig::load(None)?.network)?;
            stdout.write_all(report.text.as_bytes()).ok();
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
