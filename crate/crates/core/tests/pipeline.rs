//! End-to-end runs through the experiment harness.

use std::fs;
use std::path::Path;

use nrl::env::{read_trajectory, EnvKind};
use nrl::harness::{
    final_performance, read_metrics_csv, run_experiment, write_outputs, ExperimentConfig,
    ExperimentSummary,
};
use nrl::policy::read_checkpoint;
use nrl::rules::RuleKind;

fn small(env: EnvKind, rule: RuleKind, episodes: usize) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::task_defaults(env, rule);
    cfg.hidden_layers = vec![16];
    cfg.episodes = episodes;
    cfg.seeds = vec![0, 1, 2];
    cfg
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn repeated_runs_write_identical_files() {
    for env in [EnvKind::Cartpole, EnvKind::Acrobot] {
        let mut cfg = small(env, RuleKind::Nrl, 5);
        cfg.trajectory_every = 2;
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        write_outputs(&cfg, &run_experiment(&cfg).unwrap(), a.path()).unwrap();
        write_outputs(&cfg, &run_experiment(&cfg).unwrap(), b.path()).unwrap();
        assert_eq!(snapshot(a.path()), snapshot(b.path()));
    }
}

#[test]
fn outputs_are_rederivable_and_parse() {
    let mut cfg = small(EnvKind::Reaching, RuleKind::Exact, 60);
    cfg.trajectory_every = 30;
    let dir = tempfile::tempdir().unwrap();
    let outcome = run_experiment(&cfg).unwrap();
    write_outputs(&cfg, &outcome, dir.path()).unwrap();

    let summary: ExperimentSummary =
        serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary.final_performance.len(), 3);
    for (i, seed) in cfg.seeds.iter().enumerate() {
        let text = fs::read_to_string(dir.path().join(format!("seed-{seed}.csv"))).unwrap();
        let rows = read_metrics_csv(&text).unwrap();
        assert_eq!(rows.len(), 60);
        let returns: Vec<f64> = rows.iter().map(|r| r.episode_return).collect();
        assert_eq!(final_performance(&returns).unwrap(), summary.final_performance[i]);

        let policy = fs::read_to_string(dir.path().join(format!("seed-{seed}.policy"))).unwrap();
        assert_eq!(read_checkpoint(&policy).unwrap(), outcome.runs[i].policy);

        for episode in [1, 31] {
            let name = format!("trajectory-seed-{seed}-episode-{episode}.jsonl");
            let records = read_trajectory(&fs::read_to_string(dir.path().join(name)).unwrap()).unwrap();
            assert_eq!(records.len(), 100);
            let total: f64 = records.iter().map(|r| r.reward).sum();
            assert!((total - returns[episode - 1]).abs() < 1e-9);
        }
    }
    let finals = &summary.final_performance;
    let mean = finals.iter().sum::<f64>() / 3.0;
    assert!((summary.mean_final_performance.unwrap() - mean).abs() < 1e-12);
    assert_eq!(
        summary.min_final_performance.unwrap(),
        finals.iter().copied().fold(f64::INFINITY, f64::min)
    );
    let cfg_back = ExperimentConfig::load(&dir.path().join("config.toml")).unwrap();
    assert_eq!(cfg_back, cfg);
}

#[test]
fn single_episode_gives_length_one_series() {
    for rule in RuleKind::ALL {
        let cfg = small(EnvKind::Acrobot, rule, 1);
        let outcome = run_experiment(&cfg).unwrap();
        assert_eq!(outcome.runs.len(), 3);
        for run in &outcome.runs {
            assert_eq!(run.metrics.episodes(), 1);
        }
    }
}

#[test]
fn delayed_reward_tasks_update_once_per_episode() {
    for env in [EnvKind::Cartpole, EnvKind::Acrobot] {
        for rule in RuleKind::ALL {
            let cfg = small(env, rule, 1);
            let (mut agent, mut env_rng) = nrl::harness::build_agent(&cfg, 0).unwrap();
            let mut e = env.build(None);
            for k in 1..=3 {
                let ep = nrl::harness::run_episode(e.as_mut(), &mut agent, &mut env_rng, false).unwrap();
                assert_eq!(ep.updates, 1);
                assert_eq!(agent.learner.updates(), k);
            }
        }
    }
}
