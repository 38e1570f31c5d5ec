//! Round-based sharding environment.
//!
//! The controller moves the shard count and message size; the network draws
//! the transmission rate, semantic processing time and node churn each round.
//! The reward is the round's throughput divided by `reward_scale`.
//!
//! Per step the random stream is consumed in a fixed order: rate, semantic
//! time, node-count change. `reset` draws rate and semantic time only.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{clamp_sharding, ConsensusAlgorithm, NetworkConfig, ShardingState};
use crate::pos::{propose_setting, ratify_setting, Voter};
use crate::rng::Rng;
use crate::throughput::{round_latency, throughput, LatencyBreakdown, RoundConditions};

pub const OBS_DIM: usize = 8;

/// `[K, S, N, R, semantic_time, leader, consensus, round_fraction]`, each
/// scaled into `[0, 1]` by its configured maximum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation(pub [f64; OBS_DIM]);

impl Observation {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Action {
    IncShards,
    DecShards,
    IncMsg,
    DecMsg,
    Noop,
}

impl Action {
    pub const COUNT: usize = 5;
    pub const ALL: [Action; Action::COUNT] = [
        Action::IncShards,
        Action::DecShards,
        Action::IncMsg,
        Action::DecMsg,
        Action::Noop,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Action> {
        Self::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Action::IncShards => "INC_SHARDS",
            Action::DecShards => "DEC_SHARDS",
            Action::IncMsg => "INC_MSG",
            Action::DecMsg => "DEC_MSG",
            Action::Noop => "NOOP",
        }
    }

    /// Unclamped result of applying the action to `(K, S)`.
    pub fn apply(self, num_shards: usize, message_size: u64, step: u64) -> (usize, u64) {
        match self {
            Action::IncShards => (num_shards + 1, message_size),
            Action::DecShards => (num_shards.saturating_sub(1), message_size),
            Action::IncMsg => (num_shards, message_size.saturating_add(step)),
            Action::DecMsg => (num_shards, message_size.saturating_sub(step)),
            Action::Noop => (num_shards, message_size),
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Action {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Action::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Malformed(format!("unknown action `{s}`")))
    }
}

/// Source of per-round network conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exogenous {
    /// Uniform rate and semantic time, ±`node_drift` random walk on N.
    Random,
    /// Constant conditions; the random stream is not touched.
    Frozen {
        nodes: usize,
        rate: f64,
        semantic_time: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepInfo {
    pub clamped: bool,
    pub reconfigured: bool,
    pub ratified: bool,
    pub latency: LatencyBreakdown,
    pub tps: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub observation: Observation,
    pub reward: f64,
    pub terminal: bool,
    pub info: StepInfo,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub round: usize,
    pub num_shards: usize,
    pub message_size: u64,
    pub nodes: usize,
    pub rate: f64,
    pub semantic_time: f64,
    pub tps: f64,
    /// `None` for rounds driven by the static-max rule.
    pub action: Option<Action>,
    pub clamped: bool,
    pub reconfigured: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EpisodeLog {
    pub seed: u64,
    pub episode: usize,
    pub records: Vec<RoundRecord>,
}

pub const EPISODE_CSV_HEADER: &str = "round,K,S_bits,N,R_bps,t_sem,tps,action,clamped";
const STATIC_MAX_LABEL: &str = "STATIC_MAX";

impl EpisodeLog {
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{EPISODE_CSV_HEADER}")?;
        for r in &self.records {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{}",
                r.round,
                r.num_shards,
                r.message_size,
                r.nodes,
                r.rate,
                r.semantic_time,
                r.tps,
                r.action.map_or(STATIC_MAX_LABEL, Action::name),
                r.clamped
            )?;
        }
        Ok(())
    }

    /// Parse the CSV form. `reconfigured` is not stored in the file; it is
    /// rebuilt from consecutive shard counts, starting from one shard.
    pub fn from_csv(text: &str) -> Result<Vec<RoundRecord>> {
        let mut lines = text.lines();
        if lines.next() != Some(EPISODE_CSV_HEADER) {
            return Err(Error::Malformed("episode CSV header".into()));
        }
        let bad = |line: &str| Error::Malformed(format!("episode CSV row `{line}`"));
        let mut prev_k = 1;
        let mut out = Vec::new();
        for line in lines.filter(|l| !l.is_empty()) {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 9 {
                return Err(bad(line));
            }
            let num_shards: usize = f[1].parse().map_err(|_| bad(line))?;
            let action = match f[7] {
                STATIC_MAX_LABEL => None,
                name => Some(name.parse()?),
            };
            out.push(RoundRecord {
                round: f[0].parse().map_err(|_| bad(line))?,
                num_shards,
                message_size: f[2].parse().map_err(|_| bad(line))?,
                nodes: f[3].parse().map_err(|_| bad(line))?,
                rate: f[4].parse().map_err(|_| bad(line))?,
                semantic_time: f[5].parse().map_err(|_| bad(line))?,
                tps: f[6].parse().map_err(|_| bad(line))?,
                action,
                clamped: f[8].parse().map_err(|_| bad(line))?,
                reconfigured: num_shards != prev_k,
            });
            prev_k = num_shards;
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy)]
enum Control {
    Action(Action),
    StaticMax,
}

#[derive(Debug, Clone)]
pub struct ShardEnv {
    cfg: NetworkConfig,
    exogenous: Exogenous,
    state: ShardingState,
    nodes: usize,
    rate: f64,
    semantic_time: f64,
    round: usize,
    done: bool,
    episode: usize,
    faulty_voters: usize,
    log: EpisodeLog,
}

impl ShardEnv {
    pub fn new(cfg: NetworkConfig, exogenous: Exogenous) -> Result<Self> {
        cfg.validate()?;
        let nodes = match exogenous {
            Exogenous::Random => cfg.nodes_initial,
            Exogenous::Frozen {
                nodes,
                rate,
                semantic_time,
            } => {
                if nodes < cfg.min_shard_size || nodes > cfg.nodes_max {
                    return Err(Error::config(
                        "nodes_initial",
                        "frozen node count out of range",
                    ));
                }
                if !(rate > 0.0 && rate <= cfg.rate_max) {
                    return Err(Error::config(
                        "rate_max",
                        "frozen rate must lie in (0, rate_max]",
                    ));
                }
                if !(0.0..=cfg.semantic_time_max).contains(&semantic_time) {
                    return Err(Error::config(
                        "semantic_time_max",
                        "frozen semantic time out of range",
                    ));
                }
                nodes
            }
        };
        let state = ShardingState::new(nodes, 1, cfg.avg_message_size_max, 0, &cfg)?;
        Ok(Self {
            exogenous,
            state,
            nodes,
            rate: cfg.rate_min,
            semantic_time: 0.0,
            round: 0,
            done: true,
            episode: 0,
            faulty_voters: 0,
            log: EpisodeLog {
                seed: cfg.seed,
                ..Default::default()
            },
            cfg,
        })
    }

    pub fn config(&self) -> &NetworkConfig {
        &self.cfg
    }

    pub fn state(&self) -> &ShardingState {
        &self.state
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn round(&self) -> usize {
        self.round
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    pub fn log(&self) -> &EpisodeLog {
        &self.log
    }

    /// Number of verifiers that reject every proposed setting.
    pub fn set_faulty_voters(&mut self, n: usize) {
        self.faulty_voters = n;
    }

    /// Start an episode: N = initial node count, one shard, largest message.
    pub fn reset(&mut self, rng: &mut Rng) -> Observation {
        let (nodes, rate, semantic_time) = match self.exogenous {
            Exogenous::Random => (
                self.cfg.nodes_initial,
                rng.uniform_range(self.cfg.rate_min, self.cfg.rate_max),
                rng.uniform_range(0.0, self.cfg.semantic_time_max),
            ),
            Exogenous::Frozen {
                nodes,
                rate,
                semantic_time,
            } => (nodes, rate, semantic_time),
        };
        self.nodes = nodes;
        self.rate = rate;
        self.semantic_time = semantic_time;
        self.state = ShardingState::new(nodes, 1, self.cfg.avg_message_size_max, 0, &self.cfg)
            .expect("one shard of the largest message is always valid");
        self.round = 0;
        self.done = false;
        if !self.log.records.is_empty() {
            self.episode += 1;
        }
        self.log = EpisodeLog {
            seed: self.cfg.seed,
            episode: self.episode,
            records: Vec::with_capacity(self.cfg.rounds_per_episode),
        };
        self.observe()
    }

    /// Overwrite the current setting without a round passing.
    pub fn force_setting(&mut self, num_shards: usize, message_size: u64) -> Result<()> {
        self.state = ShardingState::new(
            self.nodes,
            num_shards,
            message_size,
            self.round as u64,
            &self.cfg,
        )?;
        Ok(())
    }

    pub fn step(&mut self, action: Action, rng: &mut Rng) -> Result<StepOutcome> {
        self.advance(Control::Action(action), rng)
    }

    /// One round of the static-max rule: K = ⌊N / min_shard_size⌋ for the
    /// round's node count and the largest message size.
    pub fn step_static_max(&mut self, rng: &mut Rng) -> Result<StepOutcome> {
        self.advance(Control::StaticMax, rng)
    }

    fn advance(&mut self, control: Control, rng: &mut Rng) -> Result<StepOutcome> {
        if self.done {
            return Err(Error::EpisodeFinished);
        }
        let cfg = &self.cfg;
        let prev_k = self.state.num_shards();
        let prev_s = self.state.message_size();

        let (mut k, mut s, clamped) = match control {
            Control::Action(a) => {
                let (k, s) = a.apply(prev_k, prev_s, cfg.message_size_step);
                let c = clamp_sharding(k, s, self.nodes, cfg);
                (c.num_shards, c.message_size, c.clamped)
            }
            Control::StaticMax => (prev_k, prev_s, false),
        };

        let (nodes, rate, semantic_time) = self.draw(rng);
        let k_max = cfg.max_shards(nodes).max(1);
        match control {
            Control::Action(_) => k = k.min(k_max),
            Control::StaticMax => {
                k = k_max;
                s = cfg.avg_message_size_max;
            }
        }

        let round = self.round as u64;
        let mut next = ShardingState::new(nodes, k, s, round, cfg)?;
        let mut ratified = true;
        if (k, s) != (prev_k, prev_s) {
            let leader = self.state.leader_ids()[0];
            let msg = propose_setting(leader, &next);
            let honest = nodes.saturating_sub(self.faulty_voters);
            let mut voters = vec![Voter::Honest; honest];
            voters.resize(nodes, Voter::Faulty);
            ratified = ratify_setting(&msg, &voters, cfg).accepted;
            if !ratified {
                // Keep the old setting, squeezed into the new node count.
                k = prev_k.min(k_max);
                s = prev_s;
                next = ShardingState::new(nodes, k, s, round, cfg)?;
            }
        }
        let reconfigured = k != prev_k;

        let cond = RoundConditions {
            rate,
            semantic_time,
            reconfigured,
        };
        let latency = round_latency(&next, &cond, cfg);
        let tps = throughput(&next, &latency, cfg);
        let reward = tps / cfg.reward_scale;

        self.log.records.push(RoundRecord {
            round: self.round,
            num_shards: k,
            message_size: s,
            nodes,
            rate,
            semantic_time,
            tps,
            action: match control {
                Control::Action(a) => Some(a),
                Control::StaticMax => None,
            },
            clamped,
            reconfigured,
        });
        self.state = next;
        self.nodes = nodes;
        self.rate = rate;
        self.semantic_time = semantic_time;
        self.round += 1;
        self.done = self.round >= self.cfg.rounds_per_episode;

        Ok(StepOutcome {
            observation: self.observe(),
            reward,
            terminal: self.done,
            info: StepInfo {
                clamped,
                reconfigured,
                ratified,
                latency,
                tps,
            },
        })
    }

    fn draw(&self, rng: &mut Rng) -> (usize, f64, f64) {
        match self.exogenous {
            Exogenous::Random => {
                let cfg = &self.cfg;
                let rate = rng.uniform_range(cfg.rate_min, cfg.rate_max);
                let semantic_time = rng.uniform_range(0.0, cfg.semantic_time_max);
                let drift = cfg.node_drift as i64;
                let delta = rng.int_inclusive(-drift, drift);
                let nodes = (self.nodes as i64 + delta)
                    .clamp(cfg.nodes_min as i64, cfg.nodes_max as i64)
                    as usize;
                (nodes, rate, semantic_time)
            }
            Exogenous::Frozen {
                nodes,
                rate,
                semantic_time,
            } => (nodes, rate, semantic_time),
        }
    }

    fn observe(&self) -> Observation {
        let cfg = &self.cfg;
        let k_cap = cfg.max_shards(cfg.nodes_max).max(1) as f64;
        let unit = |x: f64| x.clamp(0.0, 1.0);
        Observation([
            unit(self.state.num_shards() as f64 / k_cap),
            unit(self.state.message_size() as f64 / cfg.avg_message_size_max as f64),
            unit(self.nodes as f64 / cfg.nodes_max as f64),
            unit(self.rate / cfg.rate_max),
            unit(self.semantic_time / cfg.semantic_time_max),
            unit(self.state.leader_ids()[0].0 as f64 / cfg.nodes_max as f64),
            self.state.consensus().index() as f64 / ConsensusAlgorithm::COUNT as f64,
            unit(self.round as f64 / cfg.rounds_per_episode as f64),
        ])
    }
}

/// Mean per-round reward of the static-max rule for each of `episodes`
/// episodes.
pub fn run_baseline(
    cfg: &NetworkConfig,
    exogenous: Exogenous,
    episodes: usize,
    rng: &mut Rng,
) -> Result<Vec<f64>> {
    let mut env = ShardEnv::new(cfg.clone(), exogenous)?;
    let mut means = Vec::with_capacity(episodes);
    for _ in 0..episodes {
        env.reset(rng);
        let mut total = 0.0;
        let mut steps = 0usize;
        while !env.is_done() {
            total += env.step_static_max(rng)?.reward;
            steps += 1;
        }
        means.push(total / steps as f64);
    }
    Ok(means)
}
