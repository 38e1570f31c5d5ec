//! Deep Q-learning controller for the sharding environment.

mod network;
mod replay;

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

pub use network::{Gradients, QNetwork, Sample, MAGIC};
pub use replay::{ReplayBuffer, Transition};

use crate::env::{Action, Observation, ShardEnv, OBS_DIM};
use crate::error::{Error, Result};
use crate::rng::Rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Hyperparameters {
    pub learning_rate: f64,
    pub discount: f64,
    /// Probability of a uniformly random action.
    pub exploration: f64,
    pub batch_size: usize,
    /// Gradient steps between target-network copies.
    pub target_sync_interval: usize,
    /// Training episodes.
    pub epochs: usize,
    pub hidden_width: usize,
    pub replay_capacity: usize,
    /// Decay exploration linearly from 1 to `exploration` over training
    /// instead of holding it fixed.
    pub epsilon_decay: bool,
}

impl Default for Hyperparameters {
    fn default() -> Self {
        Self {
            learning_rate: 0.002,
            discount: 0.98,
            exploration: 0.1,
            batch_size: 64,
            target_sync_interval: 10,
            epochs: 1000,
            hidden_width: 128,
            replay_capacity: 10_000,
            epsilon_decay: false,
        }
    }
}

impl Hyperparameters {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::config("learning_rate", "must be finite and > 0"));
        }
        if !(self.discount > 0.0 && self.discount < 1.0) {
            return Err(Error::config(
                "discount",
                format!("must lie strictly between 0 and 1, got {}", self.discount),
            ));
        }
        if !(0.0..=1.0).contains(&self.exploration) {
            return Err(Error::config("exploration", "must lie in [0, 1]"));
        }
        for (key, v) in [
            ("batch_size", self.batch_size),
            ("target_sync_interval", self.target_sync_interval),
            ("epochs", self.epochs),
            ("hidden_width", self.hidden_width),
            ("replay_capacity", self.replay_capacity),
        ] {
            if v == 0 {
                return Err(Error::config(key, "must be > 0"));
            }
        }
        if self.replay_capacity < self.batch_size {
            return Err(Error::config("replay_capacity", "must be >= batch_size"));
        }
        Ok(())
    }

    pub fn epsilon_at(&self, epoch: usize) -> f64 {
        if !self.epsilon_decay || self.epochs <= 1 {
            return self.exploration;
        }
        let frac = (epoch as f64 / (self.epochs - 1) as f64).min(1.0);
        1.0 + (self.exploration - 1.0) * frac
    }
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Epsilon-greedy action. One uniform draw decides exploration; exploring
/// consumes one more draw to pick the action.
pub fn act(net: &QNetwork, obs: &Observation, epsilon: f64, rng: &mut Rng) -> Result<Action> {
    let explore = rng.uniform() < epsilon;
    let index = if explore {
        rng.below(Action::COUNT as u64) as usize
    } else {
        argmax(&net.forward(obs.as_slice())?)
    };
    Ok(Action::from_index(index).expect("network has one output per action"))
}

/// `r + γ·max_a Q_target(s', a)`, or `r` for terminal transitions.
pub fn td_targets(batch: &[&Transition], target: &QNetwork, discount: f64) -> Result<Vec<f64>> {
    batch
        .iter()
        .map(|t| {
            if t.terminal {
                return Ok(t.reward);
            }
            let q = target.forward(t.next_observation.as_slice())?;
            let best = q.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            Ok(t.reward + discount * best)
        })
        .collect()
}

/// One SGD step on the estimation network from a uniformly sampled minibatch.
/// Returns `None` without touching anything while the buffer holds fewer than
/// `batch_size` transitions.
pub fn train_step(
    est: &mut QNetwork,
    target: &QNetwork,
    buffer: &ReplayBuffer,
    hp: &Hyperparameters,
    rng: &mut Rng,
) -> Result<Option<f64>> {
    if buffer.len() < hp.batch_size {
        return Ok(None);
    }
    let batch = buffer.sample(hp.batch_size, rng);
    let targets = td_targets(&batch, target, hp.discount)?;
    let samples: Vec<Sample<'_>> = batch
        .iter()
        .zip(&targets)
        .map(|(t, &y)| Sample {
            input: t.observation.as_slice(),
            action: t.action.index(),
            target: y,
        })
        .collect();
    let (loss, grads) = est.loss_and_grad(&samples)?;
    est.apply_sgd(&grads, hp.learning_rate);
    Ok(Some(loss))
}

pub fn sync_target(est: &QNetwork, target: &mut QNetwork) {
    target.copy_from(est);
}

/// Estimation and target networks, replay memory and the sync counter.
#[derive(Debug, Clone)]
pub struct DqnAgent {
    pub hp: Hyperparameters,
    pub estimation: QNetwork,
    pub target: QNetwork,
    pub buffer: ReplayBuffer,
    gradient_steps: u64,
}

impl DqnAgent {
    pub fn new(hp: Hyperparameters, rng: &mut Rng) -> Result<Self> {
        hp.validate()?;
        let estimation = QNetwork::random(OBS_DIM, hp.hidden_width, Action::COUNT, rng);
        Ok(Self {
            target: estimation.clone(),
            buffer: ReplayBuffer::new(hp.replay_capacity),
            estimation,
            hp,
            gradient_steps: 0,
        })
    }

    pub fn gradient_steps(&self) -> u64 {
        self.gradient_steps
    }

    pub fn act(&self, obs: &Observation, epsilon: f64, rng: &mut Rng) -> Result<Action> {
        act(&self.estimation, obs, epsilon, rng)
    }

    pub fn remember(&mut self, t: Transition) {
        self.buffer.push(t);
    }

    /// Train once if the buffer is warm; copy to the target network every
    /// `target_sync_interval` gradient steps.
    pub fn learn(&mut self, rng: &mut Rng) -> Result<Option<f64>> {
        let loss = train_step(
            &mut self.estimation,
            &self.target,
            &self.buffer,
            &self.hp,
            rng,
        )?;
        if loss.is_some() {
            self.gradient_steps += 1;
            if self
                .gradient_steps
                .is_multiple_of(self.hp.target_sync_interval as u64)
            {
                sync_target(&self.estimation, &mut self.target);
            }
        }
        Ok(loss)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRow {
    pub epoch: usize,
    pub mean_reward: f64,
    pub epsilon: f64,
    /// `None` when no gradient step happened during the epoch.
    pub mean_loss: Option<f64>,
}

pub const REWARDS_CSV_HEADER: &str = "epoch,mean_reward,epsilon,mean_loss";

pub fn write_rewards_csv<W: Write>(rows: &[EpochRow], mut w: W) -> io::Result<()> {
    writeln!(w, "{REWARDS_CSV_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{}",
            r.epoch,
            r.mean_reward,
            r.epsilon,
            r.mean_loss.unwrap_or(f64::NAN)
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct TrainingRun {
    pub network: QNetwork,
    pub rows: Vec<EpochRow>,
}

/// Full training loop: one episode per epoch, a gradient step after every
/// environment step once the buffer is warm.
///
/// `rng` is split into an environment stream and an agent stream, so the
/// exogenous draws match those seen by [`crate::env::run_baseline`] with the
/// same seed.
pub fn train(env: &mut ShardEnv, hp: &Hyperparameters, rng: &mut Rng) -> Result<TrainingRun> {
    let mut env_rng = rng.fork();
    let mut agent_rng = rng.fork();
    let mut agent = DqnAgent::new(hp.clone(), &mut agent_rng)?;
    let mut rows = Vec::with_capacity(hp.epochs);

    for epoch in 0..hp.epochs {
        let epsilon = hp.epsilon_at(epoch);
        let mut obs = env.reset(&mut env_rng);
        let (mut reward_sum, mut steps) = (0.0, 0usize);
        let (mut loss_sum, mut losses) = (0.0, 0usize);
        loop {
            let action = agent.act(&obs, epsilon, &mut agent_rng)?;
            let out = env.step(action, &mut env_rng)?;
            agent.remember(Transition {
                observation: obs,
                action,
                reward: out.reward,
                next_observation: out.observation,
                terminal: out.terminal,
            });
            if let Some(loss) = agent.learn(&mut agent_rng)? {
                loss_sum += loss;
                losses += 1;
            }
            reward_sum += out.reward;
            steps += 1;
            obs = out.observation;
            if out.terminal {
                break;
            }
        }
        rows.push(EpochRow {
            epoch,
            mean_reward: reward_sum / steps as f64,
            epsilon,
            mean_loss: (losses > 0).then(|| loss_sum / losses as f64),
        });
    }
    Ok(TrainingRun {
        network: agent.estimation,
        rows,
    })
}

/// Mean per-round reward of the greedy policy over `episodes` episodes.
pub fn evaluate_greedy(
    net: &QNetwork,
    env: &mut ShardEnv,
    episodes: usize,
    rng: &mut Rng,
) -> Result<Vec<f64>> {
    let mut env_rng = rng.fork();
    let mut means = Vec::with_capacity(episodes);
    for _ in 0..episodes {
        let mut obs = env.reset(&mut env_rng);
        let (mut total, mut steps) = (0.0, 0usize);
        while !env.is_done() {
            let action = Action::from_index(argmax(&net.forward(obs.as_slice())?))
                .expect("one output per action");
            let out = env.step(action, &mut env_rng)?;
            total += out.reward;
            steps += 1;
            obs = out.observation;
        }
        means.push(total / steps as f64);
    }
    Ok(means)
}
