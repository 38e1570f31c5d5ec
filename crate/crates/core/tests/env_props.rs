use proptest::prelude::*;
use semshard_core::env::{Action, Exogenous, ShardEnv};
use semshard_core::throughput::{round_latency, throughput, RoundConditions};
use semshard_core::{NetworkConfig, Rng, ShardingState};

fn frozen() -> Exogenous {
    Exogenous::Frozen {
        nodes: 100,
        rate: 1e7,
        semantic_time: 20.0,
    }
}

fn roll(seed: u64, actions: &[usize]) -> (Vec<f64>, semshard_core::env::EpisodeLog) {
    let cfg = NetworkConfig {
        rounds_per_episode: actions.len(),
        seed,
        ..Default::default()
    };
    let mut env = ShardEnv::new(cfg, Exogenous::Random).unwrap();
    let mut rng = Rng::new(seed);
    env.reset(&mut rng);
    let rewards = actions
        .iter()
        .map(|&a| env.step(Action::ALL[a], &mut rng).unwrap().reward)
        .collect();
    (rewards, env.log().clone())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn trajectory_is_determined_by_seed_and_actions(
        seed in any::<u64>(),
        actions in prop::collection::vec(0usize..5, 1..120),
    ) {
        let a = roll(seed, &actions);
        let b = roll(seed, &actions);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn sharding_invariants_hold_every_step(
        seed in any::<u64>(),
        nodes in 50usize..=600,
        actions in prop::collection::vec(0usize..5, 1..150),
    ) {
        let cfg = NetworkConfig {
            nodes_initial: nodes,
            rounds_per_episode: actions.len(),
            ..Default::default()
        };
        let mut env = ShardEnv::new(cfg.clone(), Exogenous::Random).unwrap();
        let mut rng = Rng::new(seed);
        env.reset(&mut rng);
        for &a in &actions {
            let out = env.step(Action::ALL[a], &mut rng).unwrap();
            let st = env.state();
            prop_assert_eq!(st.total_nodes(), env.nodes());
            prop_assert!(st.shard_sizes().iter().all(|&s| s >= cfg.min_shard_size));
            prop_assert!(st.num_shards() >= 1 && st.num_shards() <= env.nodes() / cfg.min_shard_size);
            prop_assert!(st.message_size() >= cfg.message_size_min);
            prop_assert!(st.message_size() <= cfg.avg_message_size_max);
            prop_assert!(out.observation.0.iter().all(|x| (0.0..=1.0).contains(x)));
            prop_assert!(out.reward.is_finite() && out.reward >= 0.0);
        }
    }

    #[test]
    fn logged_rounds_reproduce_rewards(
        seed in any::<u64>(),
        actions in prop::collection::vec(0usize..5, 1..100),
    ) {
        let (rewards, log) = roll(seed, &actions);
        let cfg = NetworkConfig::default();
        for (rec, reward) in log.records.iter().zip(&rewards) {
            let state = ShardingState::new(rec.nodes, rec.num_shards, rec.message_size, 0, &cfg).unwrap();
            let cond = RoundConditions {
                rate: rec.rate,
                semantic_time: rec.semantic_time,
                reconfigured: rec.reconfigured,
            };
            let tps = throughput(&state, &round_latency(&state, &cond, &cfg), &cfg);
            prop_assert!((reward * 1000.0 - tps).abs() <= 1e-9 * tps.max(1.0));
        }
    }
}

#[test]
fn env_never_beats_static_optimum() {
    let cfg = NetworkConfig::default();
    let mut best: f64 = 0.0;
    for k in 1..=25 {
        for j in 1..=10u64 {
            let s = j * cfg.message_size_step;
            let n = (100 + k - 1) / k;
            let t = 2.0 * (n * (n - 1)) as f64 * s as f64 / 1e7 + 0.1 + 20.0 + s as f64 / 1e7;
            best = best.max(k as f64 * s as f64 / 4000.0 / t / 1000.0);
        }
    }
    let mut env = ShardEnv::new(cfg, frozen()).unwrap();
    let mut rng = Rng::new(99);
    let mut seen: f64 = 0.0;
    for _ in 0..50 {
        env.reset(&mut rng);
        while !env.is_done() {
            let a = Action::ALL[rng.below(5) as usize];
            seen = seen.max(env.step(a, &mut rng).unwrap().reward);
        }
    }
    assert!(seen <= best * (1.0 + 1e-12), "{seen} > {best}");
}

#[test]
fn baseline_is_reproducible() {
    let cfg = NetworkConfig {
        nodes_initial: 300,
        rounds_per_episode: 40,
        ..Default::default()
    };
    let a = semshard_core::env::run_baseline(&cfg, Exogenous::Random, 5, &mut Rng::new(3)).unwrap();
    let b = semshard_core::env::run_baseline(&cfg, Exogenous::Random, 5, &mut Rng::new(3)).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.len(), 5);
}
