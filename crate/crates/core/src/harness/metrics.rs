//! Per-episode metrics and their CSV form (`episode,return,steps`).

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const METRICS_HEADER: &str = "episode,return,steps";

/// Trailing window used for final performance.
pub const FINAL_WINDOW: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsRow {
    /// 1-based episode index.
    pub episode: usize,
    pub episode_return: f64,
    pub steps: usize,
}

/// Learning curve of one seed.
#[derive(Debug, Clone, PartialEq)]
pub struct RunMetrics {
    pub seed: u64,
    pub returns: Vec<f64>,
    pub steps: Vec<usize>,
    pub successes: Vec<bool>,
    pub window: usize,
}

impl RunMetrics {
    pub fn new(seed: u64, window: usize) -> Self {
        Self {
            seed,
            returns: Vec::new(),
            steps: Vec::new(),
            successes: Vec::new(),
            window,
        }
    }

    pub fn push(&mut self, episode_return: f64, steps: usize, success: bool) {
        self.returns.push(episode_return);
        self.steps.push(steps);
        self.successes.push(success);
    }

    pub fn episodes(&self) -> usize {
        self.returns.len()
    }

    pub fn final_performance(&self) -> Result<f64> {
        final_performance(&self.returns)
    }

    /// Mean return over the first `FINAL_WINDOW` episodes.
    pub fn initial_performance(&self) -> Result<f64> {
        initial_performance(&self.returns)
    }

    /// Fraction of the last `FINAL_WINDOW` episodes that reached the goal.
    pub fn final_success_rate(&self) -> Result<f64> {
        let tail = tail(&self.successes, FINAL_WINDOW).ok_or(Error::EmptySeries)?;
        Ok(tail.iter().filter(|&&s| s).count() as f64 / tail.len() as f64)
    }

    pub fn rows(&self) -> Vec<MetricsRow> {
        self.returns
            .iter()
            .zip(&self.steps)
            .enumerate()
            .map(|(i, (&episode_return, &steps))| MetricsRow {
                episode: i + 1,
                episode_return,
                steps,
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        write_metrics_csv(&self.rows())
    }
}

fn tail<T>(v: &[T], n: usize) -> Option<&[T]> {
    if v.is_empty() {
        None
    } else {
        Some(&v[v.len().saturating_sub(n)..])
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Mean of the last `min(50, len)` returns.
pub fn final_performance(returns: &[f64]) -> Result<f64> {
    tail(returns, FINAL_WINDOW).map(mean).ok_or(Error::EmptySeries)
}

/// Mean of the first `min(50, len)` returns.
pub fn initial_performance(returns: &[f64]) -> Result<f64> {
    if returns.is_empty() {
        return Err(Error::EmptySeries);
    }
    Ok(mean(&returns[..returns.len().min(FINAL_WINDOW)]))
}

/// Trailing moving average; the first entries average what is available.
pub fn moving_average(values: &[f64], window: usize) -> Vec<f64> {
    let window = window.max(1);
    let mut out = Vec::with_capacity(values.len());
    let mut sum = 0.0;
    for (i, &v) in values.iter().enumerate() {
        sum += v;
        if i >= window {
            sum -= values[i - window];
        }
        out.push(sum / (i + 1).min(window) as f64);
    }
    out
}

/// Episodes (1-based, like the CSV) until `curve` first reaches `threshold`.
pub fn episodes_to_threshold(curve: &[f64], threshold: f64) -> Option<usize> {
    curve.iter().position(|&v| v >= threshold).map(|i| i + 1)
}

pub fn write_metrics_csv(rows: &[MetricsRow]) -> String {
    let mut out = String::with_capacity(16 * (rows.len() + 1));
    out.push_str(METRICS_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(out, "{},{},{}", r.episode, r.episode_return, r.steps);
    }
    out
}

pub fn read_metrics_csv(text: &str) -> Result<Vec<MetricsRow>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == METRICS_HEADER => {}
        _ => return Err(Error::parse(1, format!("expected header `{METRICS_HEADER}`"))),
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        let n = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let [episode, ret, steps] = fields[..] else {
            return Err(Error::parse(n, format!("expected 3 fields, found {}", fields.len())));
        };
        let episode: usize = episode
            .parse()
            .map_err(|_| Error::parse(n, format!("bad episode `{episode}`")))?;
        let episode_return: f64 = match ret.parse::<f64>() {
            Ok(v) if v.is_finite() => v,
            _ => return Err(Error::parse(n, format!("bad return `{ret}`"))),
        };
        let steps: usize = steps
            .parse()
            .map_err(|_| Error::parse(n, format!("bad steps `{steps}`")))?;
        rows.push(MetricsRow {
            episode,
            episode_return,
            steps,
        });
    }
    Ok(rows)
}

/// Cross-seed aggregate written next to the per-seed CSVs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub env: String,
    pub rule: String,
    pub hidden_layers: Vec<usize>,
    pub episodes: usize,
    pub seeds: Vec<u64>,
    pub final_performance: Vec<f64>,
    pub mean_final_performance: Option<f64>,
    pub min_final_performance: Option<f64>,
    pub max_final_performance: Option<f64>,
    pub final_success_rate: Vec<f64>,
    pub failed: Vec<FailedRun>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailedRun {
    pub seed: u64,
    /// 1-based episode in which the run aborted.
    pub episode: usize,
    pub reason: String,
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn final_performance_examples() {
        assert_eq!(final_performance(&[7.0; 100]).unwrap(), 7.0);
        let ten: Vec<f64> = (1..=10).map(f64::from).collect();
        assert_eq!(final_performance(&ten).unwrap(), 5.5);
        let mut steps = vec![0.0; 50];
        steps.extend([1.0; 50]);
        assert_eq!(final_performance(&steps).unwrap(), 1.0);
        assert!(matches!(final_performance(&[]), Err(Error::EmptySeries)));
    }

    #[test]
    fn moving_average_warms_up() {
        assert_eq!(
            moving_average(&[2.0, 4.0, 6.0, 8.0], 2),
            vec![2.0, 3.0, 5.0, 7.0]
        );
    }

    #[test]
    fn threshold_crossing() {
        assert_eq!(episodes_to_threshold(&[0.1, 0.4, 0.6, 0.2], 0.5), Some(3));
        assert_eq!(episodes_to_threshold(&[0.1], 0.5), None);
    }

    #[test]
    fn csv_rejects_garbage() {
        assert!(read_metrics_csv("").is_err());
        assert!(read_metrics_csv("episode,return\n1,2\n").is_err());
        assert!(read_metrics_csv("episode,return,steps\n1,2\n").is_err());
        assert!(read_metrics_csv("episode,return,steps\n1,NaN,3\n").is_err());
        assert!(read_metrics_csv("episode,return,steps\n-1,0,3\n").is_err());
    }

    proptest! {
        #[test]
        fn csv_round_trips(
            data in prop::collection::vec((-1e9f64..1e9, 0usize..100_000, any::<bool>()), 0..60)
        ) {
            let mut m = RunMetrics::new(0, 50);
            for (r, s, ok) in data {
                m.push(r, s, ok);
            }
            prop_assert_eq!(read_metrics_csv(&m.to_csv()).unwrap(), m.rows());
        }
    }
}
