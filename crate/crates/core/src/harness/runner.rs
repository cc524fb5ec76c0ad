use std::fs;
use std::path::Path;

use rayon::prelude::*;

use super::config::{ActionSource, CleanMode, ExperimentConfig};
use super::metrics::{ExperimentSummary, FailedRun, RunMetrics};
use crate::env::{EnvKind, Environment, TrajectoryRecord};
use crate::error::{Error, Result};
use crate::numerics::RandomSource;
use crate::policy::{log_prob, sample_action, write_checkpoint, PolicyNetwork};
use crate::rules::{Learner, RewardPredictor, RuleKind, StepContext};

/// Network, learning rule, and the random streams that drive exploration.
#[derive(Debug, Clone)]
pub struct Agent {
    pub net: PolicyNetwork,
    pub learner: Learner,
    pub clean_mode: CleanMode,
    pub action_source: ActionSource,
    noise_rng: RandomSource,
    action_rng: RandomSource,
}

impl Agent {
    pub fn new(
        net: PolicyNetwork,
        learner: Learner,
        clean_mode: CleanMode,
        action_source: ActionSource,
        noise_rng: RandomSource,
        action_rng: RandomSource,
    ) -> Self {
        Self {
            net,
            learner,
            clean_mode,
            action_source,
            noise_rng,
            action_rng,
        }
    }

    /// Picks an action for `obs` and folds the step into the learner's trace.
    /// Returns the action and the log-probability it was sampled with.
    pub fn act(&mut self, obs: &[f64]) -> Result<(usize, f64)> {
        let kind = self.learner.kind();
        if kind == RuleKind::Exact {
            let clean = self.net.clean_pass(obs)?;
            let action = sample_action(clean.probs(), &mut self.action_rng)?;
            let grads = self.net.grad_logpi(&clean, action)?;
            self.learner.accumulate_gradient(&grads)?;
            return Ok((action, log_prob(clean.probs(), action)));
        }

        let sigma = self.learner.config().sigma;
        // The RMHL trace never reads ρ, so it only needs a reference output
        // when actions come from it.
        let needs_reference = kind == RuleKind::Nrl || self.action_source == ActionSource::Clean;
        let reference = if needs_reference {
            Some(match self.clean_mode {
                CleanMode::TrueClean => self.net.clean_pass(obs)?.probs().to_vec(),
                CleanMode::AveragedNoisy(n) => {
                    self.net
                        .averaged_noisy_output(obs, &mut self.noise_rng, sigma, n)?
                }
            })
        } else {
            None
        };
        let (noisy, noise) = self.net.noisy_pass(obs, &mut self.noise_rng, sigma)?;
        let sampling = match (self.action_source, &reference) {
            (ActionSource::Clean, Some(r)) => r.as_slice(),
            _ => noisy.probs(),
        };
        let action = sample_action(sampling, &mut self.action_rng)?;
        let logp = log_prob(sampling, action);
        let reference = reference.as_deref().unwrap_or(noisy.probs());
        let ctx = StepContext::new(&noisy, noise, action, reference);
        self.learner.accumulate_step(&ctx)?;
        Ok((action, logp))
    }

    /// Delivers a reward to the learner and checks the weights stayed finite.
    pub fn reward(&mut self, r: f64) -> Result<f64> {
        let delta = self.learner.reward(&mut self.net, r)?;
        if !self.net.is_finite() {
            return Err(Error::NonFinite("weights"));
        }
        Ok(delta)
    }
}

/// One step of an episode.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub observation: Vec<f64>,
    pub state: Vec<f64>,
    pub action: usize,
    pub log_prob: f64,
    pub reward: f64,
    pub done: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeRecord {
    /// Sum of rewards.
    pub episode_return: f64,
    pub steps: usize,
    /// Weight updates applied (one per reward event).
    pub updates: usize,
    pub success: bool,
    /// Filled only when recording was requested.
    pub trajectory: Vec<StepRecord>,
}

impl EpisodeRecord {
    pub fn dump_records(&self) -> Vec<TrajectoryRecord> {
        self.trajectory
            .iter()
            .enumerate()
            .map(|(i, s)| TrajectoryRecord {
                step: i + 1,
                state: s.state.clone(),
                action: s.action,
                reward: s.reward,
                done: s.done,
            })
            .collect()
    }
}

/// Runs one episode to completion: act, accumulate, step, and update the
/// weights at every reward event.
pub fn run_episode(
    env: &mut dyn Environment,
    agent: &mut Agent,
    env_rng: &mut RandomSource,
    record: bool,
) -> Result<EpisodeRecord> {
    let mut obs = env.reset(env_rng).observation;
    let mut episode = EpisodeRecord {
        episode_return: 0.0,
        steps: 0,
        updates: 0,
        success: false,
        trajectory: Vec::new(),
    };
    loop {
        let (action, logp) = agent.act(&obs)?;
        let result = env.step(action)?;
        episode.steps += 1;
        episode.episode_return += result.reward;
        if result.reward_event {
            agent.reward(result.reward)?;
            episode.updates += 1;
        }
        if record {
            episode.trajectory.push(StepRecord {
                observation: obs,
                state: env.state(),
                action,
                log_prob: logp,
                reward: result.reward,
                done: result.done,
            });
        }
        obs = result.observation;
        if result.done {
            break;
        }
    }
    episode.success = env.succeeded();
    Ok(episode)
}

/// Builds the agent for one seed. Stream 0 initializes weights, 1 drives the
/// environment, 2 the injected noise, 3 action sampling.
pub fn build_agent(cfg: &ExperimentConfig, seed: u64) -> Result<(Agent, RandomSource)> {
    let root = RandomSource::new(seed);
    let env = cfg.env.build(cfg.max_steps);
    let spec = env.spec();
    let mut sizes = vec![spec.obs_dim];
    sizes.extend(&cfg.hidden_layers);
    sizes.push(spec.action_count);
    let net = PolicyNetwork::new(&sizes, cfg.alpha, &mut root.split(0))?;
    let learner = Learner::new(
        cfg.rule,
        cfg.rule_config(),
        RewardPredictor::new(cfg.lambda)?,
        &net,
    )?;
    let agent = Agent::new(
        net,
        learner,
        cfg.clean_mode(),
        cfg.action_source,
        root.split(2),
        root.split(3),
    );
    Ok((agent, root.split(1)))
}

/// Result of one seed: its metrics so far and, if it aborted, why.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedRun {
    pub metrics: RunMetrics,
    pub failure: Option<FailedRun>,
    /// Weights when the run stopped.
    pub policy: PolicyNetwork,
    /// Dumped episodes as `(1-based episode, records)`.
    pub trajectories: Vec<(usize, Vec<TrajectoryRecord>)>,
}

pub fn run_seed(cfg: &ExperimentConfig, seed: u64) -> Result<SeedRun> {
    cfg.validate()?;
    let (mut agent, mut env_rng) = build_agent(cfg, seed)?;
    let mut env = cfg.env.build(cfg.max_steps);
    let mut run = SeedRun {
        metrics: RunMetrics::new(seed, cfg.window),
        failure: None,
        policy: agent.net.clone(),
        trajectories: Vec::new(),
    };
    for episode in 0..cfg.episodes {
        let record = cfg.trajectory_every > 0 && episode % cfg.trajectory_every == 0;
        match run_episode(env.as_mut(), &mut agent, &mut env_rng, record) {
            Ok(ep) => {
                if record {
                    run.trajectories.push((episode + 1, ep.dump_records()));
                }
                run.metrics.push(ep.episode_return, ep.steps, ep.success);
            }
            Err(e @ (Error::NonFinite(_) | Error::InvalidDistribution(_))) => {
                run.failure = Some(FailedRun {
                    seed,
                    episode: episode + 1,
                    reason: e.to_string(),
                });
                break;
            }
            Err(e) => return Err(e),
        }
    }
    run.policy = agent.net;
    Ok(run)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutcome {
    pub runs: Vec<SeedRun>,
}

impl ExperimentOutcome {
    pub fn any_failed(&self) -> bool {
        self.runs.iter().any(|r| r.failure.is_some())
    }

    pub fn completed(&self) -> impl Iterator<Item = &RunMetrics> {
        self.runs
            .iter()
            .filter(|r| r.failure.is_none())
            .map(|r| &r.metrics)
    }

    pub fn summary(&self, cfg: &ExperimentConfig) -> ExperimentSummary {
        let finals: Vec<f64> = self
            .completed()
            .filter_map(|m| m.final_performance().ok())
            .collect();
        let success: Vec<f64> = self
            .completed()
            .filter_map(|m| m.final_success_rate().ok())
            .collect();
        let (mean, min, max) = if finals.is_empty() {
            (None, None, None)
        } else {
            (
                Some(finals.iter().sum::<f64>() / finals.len() as f64),
                finals.iter().copied().reduce(f64::min),
                finals.iter().copied().reduce(f64::max),
            )
        };
        ExperimentSummary {
            env: cfg.env.to_string(),
            rule: cfg.rule.to_string(),
            hidden_layers: cfg.hidden_layers.clone(),
            episodes: cfg.episodes,
            seeds: cfg.seeds.clone(),
            final_performance: finals,
            mean_final_performance: mean,
            min_final_performance: min,
            max_final_performance: max,
            final_success_rate: success,
            failed: self.runs.iter().filter_map(|r| r.failure.clone()).collect(),
        }
    }
}

/// Runs every seed independently (in parallel) and collects the results in
/// seed order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    let runs = cfg
        .seeds
        .par_iter()
        .map(|&seed| run_seed(cfg, seed))
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentOutcome { runs })
}

/// Writes `seed-<s>.csv`, final weights as `seed-<s>.policy`, failure
/// markers, trajectory dumps, the resolved config, and `summary.json` under
/// `dir`.
pub fn write_outputs(cfg: &ExperimentConfig, outcome: &ExperimentOutcome, dir: &Path) -> Result<()> {
    let write = |name: String, contents: &str| {
        let path = dir.join(name);
        fs::write(&path, contents).map_err(|e| Error::io(path, e))
    };
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write("config.toml".into(), &cfg.to_toml_string())?;
    for run in &outcome.runs {
        let seed = run.metrics.seed;
        write(format!("seed-{seed}.csv"), &run.metrics.to_csv())?;
        write(format!("seed-{seed}.policy"), &write_checkpoint(&run.policy))?;
        if let Some(f) = &run.failure {
            write(
                format!("seed-{seed}.failed"),
                &format!("episode {}: {}\n", f.episode, f.reason),
            )?;
        }
        for (episode, records) in &run.trajectories {
            write(
                format!("trajectory-seed-{seed}-episode-{episode}.jsonl"),
                &crate::env::write_trajectory(records),
            )?;
        }
    }
    let summary = serde_json::to_string_pretty(&outcome.summary(cfg))
        .expect("summary serializes");
    write("summary.json".into(), &(summary + "\n"))
}

/// Episode horizon of `env` under `cfg`.
pub fn horizon(env: EnvKind, max_steps: Option<usize>) -> usize {
    env.build(max_steps).spec().max_steps
}
