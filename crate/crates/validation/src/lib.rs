//! Cross-seed statistics over training runs and the verdict type printed by
//! the acceptance suite.

use std::fmt;

use nrl::harness::{moving_average, ExperimentOutcome, RunMetrics};

/// Episodes in the opening window compared against final performance.
pub const OPENING_WINDOW: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Verdict {
    pub fn new(id: u32, name: &'static str, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            id,
            name,
            passed,
            detail: detail.into(),
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "criterion {:>2} {:<5} {}: {}",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.detail
        )
    }
}

fn mean(values: impl IntoIterator<Item = f64>) -> f64 {
    let (sum, n) = values.into_iter().fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        sum / n as f64
    }
}

/// Per-seed runs; a failed seed contributes whatever episodes it finished.
pub fn runs(outcome: &ExperimentOutcome) -> Vec<&RunMetrics> {
    outcome.runs.iter().map(|r| &r.metrics).collect()
}

/// Mean over seeds of the last-50 mean return.
pub fn final_performance(outcome: &ExperimentOutcome) -> f64 {
    mean(runs(outcome).iter().map(|m| m.final_performance().unwrap_or(f64::NAN)))
}

/// Mean over seeds of the first-50 mean return.
pub fn opening_performance(outcome: &ExperimentOutcome) -> f64 {
    mean(runs(outcome).iter().map(|m| {
        let n = m.returns.len().min(OPENING_WINDOW);
        mean(m.returns[..n].iter().copied())
    }))
}

/// `final − opening`.
pub fn improvement(outcome: &ExperimentOutcome) -> f64 {
    final_performance(outcome) - opening_performance(outcome)
}

/// Mean over seeds of the success rate across the last 50 episodes.
pub fn final_success_rate(outcome: &ExperimentOutcome) -> f64 {
    mean(runs(outcome).iter().map(|m| m.final_success_rate().unwrap_or(f64::NAN)))
}

/// Seed-mean of each run's trailing moving average, truncated to the
/// shortest run.
pub fn mean_curve(outcome: &ExperimentOutcome, window: usize) -> Vec<f64> {
    let smooth: Vec<Vec<f64>> = runs(outcome)
        .iter()
        .map(|m| moving_average(&m.returns, window))
        .collect();
    let len = smooth.iter().map(Vec::len).min().unwrap_or(0);
    (0..len).map(|i| mean(smooth.iter().map(|s| s[i]))).collect()
}

/// First 1-based episode at which the seed-mean moving average reaches
/// `threshold`; `None` if it never does.
pub fn episodes_to_threshold(outcome: &ExperimentOutcome, window: usize, threshold: f64) -> Option<usize> {
    nrl::harness::episodes_to_threshold(&mean_curve(outcome, window), threshold)
}

/// Ordering on convergence times where never reaching is slowest.
pub fn no_faster(candidate: Option<usize>, reference: Option<usize>) -> bool {
    match (candidate, reference) {
        (None, _) => true,
        (Some(_), None) => false,
        (Some(c), Some(r)) => c >= r,
    }
}

pub fn format_episodes(e: Option<usize>) -> String {
    e.map_or_else(|| "never".to_string(), |e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use nrl::harness::{FailedRun, SeedRun};
    use nrl::policy::PolicyNetwork;

    fn outcome(series: &[&[f64]]) -> ExperimentOutcome {
        let policy = PolicyNetwork::zeros(&[1, 2], 0.01).unwrap();
        ExperimentOutcome {
            runs: series
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    let mut m = RunMetrics::new(i as u64, 50);
                    for &r in *s {
                        m.push(r, 1, r > 0.5);
                    }
                    SeedRun {
                        metrics: m,
                        failure: None::<FailedRun>,
                        policy: policy.clone(),
                        trajectories: vec![],
                    }
                })
                .collect(),
        }
    }

    #[test]
    fn opening_and_final_windows() {
        let a: Vec<f64> = (0..100).map(|i| if i < 50 { 0.0 } else { 1.0 }).collect();
        let b: Vec<f64> = vec![2.0; 100];
        let o = outcome(&[&a, &b]);
        assert_eq!(opening_performance(&o), 1.0);
        assert_eq!(final_performance(&o), 1.5);
        assert_eq!(improvement(&o), 0.5);
        assert_eq!(final_success_rate(&o), 1.0);
    }

    #[test]
    fn threshold_on_seed_mean_curve() {
        let a = [0.0, 0.0, 1.0, 1.0];
        let b = [0.0, 1.0, 1.0, 1.0];
        let o = outcome(&[&a, &b]);
        assert_eq!(mean_curve(&o, 1), vec![0.0, 0.5, 1.0, 1.0]);
        assert_eq!(episodes_to_threshold(&o, 1, 0.5), Some(2));
        assert_eq!(episodes_to_threshold(&o, 1, 2.0), None);
    }

    #[test]
    fn never_is_slowest() {
        assert!(no_faster(None, Some(3)));
        assert!(no_faster(None, None));
        assert!(!no_faster(Some(3), None));
        assert!(no_faster(Some(4), Some(3)));
        assert!(!no_faster(Some(2), Some(3)));
    }

    #[test]
    fn verdict_line() {
        let v = Verdict::new(3, "estimator", true, "cos 0.99");
        assert_eq!(v.to_string(), "criterion  3 PASS  estimator: cos 0.99");
    }
}
