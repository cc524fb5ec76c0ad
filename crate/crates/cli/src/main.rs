//! Command-line front end: training runs, grid sweeps, estimator checks,
//! and plots.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use nrl::gradcheck::{clean_pass_error_curve, quadratic_report_table, EstimatorReport, NoiseFamily};
use nrl::harness::plot::{self, PlotKind, Series};
use nrl::harness::{read_metrics_csv, run_experiment, write_outputs, ExperimentConfig, GridConfig};
use nrl::numerics::RandomSource;
use nrl::policy::PolicyNetwork;

#[derive(Parser)]
#[command(name = "nrl", version, about = "Noise-driven reward-modulated learning experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one configuration over its seeds.
    Train {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated seeds overriding the config.
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the episode count.
        #[arg(long)]
        episodes: Option<usize>,
    },
    /// Train every cell of a grid file.
    Sweep {
        #[arg(long)]
        grid: PathBuf,
    },
    /// Compare perturbation gradient estimates with finite differences.
    Gradcheck {
        #[arg(long, value_delimiter = ',', default_value = "10")]
        n: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "10000")]
        k: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "0.0001")]
        sigma: Vec<f64>,
        /// gaussian, uniform, rademacher_bimodal, or all.
        #[arg(long, value_delimiter = ',', default_value = "all")]
        family: Vec<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the clean-output approximation error curve
        /// (`passes,mean_abs_error`) to this file.
        #[arg(long)]
        approx_curve: Option<PathBuf>,
    },
    /// Render an SVG (and a CSV of the plotted values) from metrics files.
    Plot {
        /// learning-curve, final-bar, or approx-error.
        #[arg(long)]
        kind: String,
        /// Metrics CSVs or run directories; one series per argument.
        #[arg(long = "in", num_args = 1.., required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = nrl::harness::FINAL_WINDOW)]
        window: usize,
        #[arg(long, default_value = "")]
        title: String,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

/// Returns `false` when some training run failed.
fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Train {
            config,
            seeds,
            out,
            episodes,
        } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(s) = seeds {
                cfg.seeds = s;
            }
            if let Some(o) = out {
                cfg.output_dir = o;
            }
            if let Some(e) = episodes {
                cfg.episodes = e;
            }
            cfg.validate()?;
            train(&cfg)
        }
        Command::Sweep { grid } => {
            let grid = GridConfig::load(&grid)?;
            let mut ok = true;
            for cell in grid.cells() {
                ok &= train(&cell)?;
            }
            Ok(ok)
        }
        Command::Gradcheck {
            n,
            k,
            sigma,
            family,
            seed,
            out,
            approx_curve,
        } => {
            let families = parse_families(&family)?;
            let reports = quadratic_report_table(&n, &k, &sigma, &families, seed)?;
            let mut text = String::from(EstimatorReport::CSV_HEADER);
            text.push('\n');
            for r in &reports {
                text.push_str(&r.csv_row());
                text.push('\n');
            }
            match out {
                Some(path) => write(&path, &text)?,
                None => print!("{text}"),
            }
            if let Some(path) = approx_curve {
                write(&path, &approx_curve_csv(seed)?)?;
            }
            Ok(true)
        }
        Command::Plot {
            kind,
            inputs,
            out,
            window,
            title,
        } => {
            let kind: PlotKind = kind.parse()?;
            let series = load_series(kind, &inputs, window)?;
            let svg = plot::render(kind, &title, &series)?;
            write(&out, &svg)?;
            write(&out.with_extension("csv"), &plot::write_chart_csv(&series))?;
            Ok(true)
        }
    }
}

fn train(cfg: &ExperimentConfig) -> Result<bool> {
    eprintln!(
        "training {} for {} episodes over seeds {:?}",
        cfg.tag(),
        cfg.episodes,
        cfg.seeds
    );
    let outcome = run_experiment(cfg)?;
    write_outputs(cfg, &outcome, &cfg.output_dir)?;
    let summary = outcome.summary(cfg);
    if let Some(mean) = summary.mean_final_performance {
        eprintln!("{}: final performance mean {mean:.4}", cfg.tag());
    }
    for f in &summary.failed {
        eprintln!("seed {} failed at episode {}: {}", f.seed, f.episode, f.reason);
    }
    Ok(summary.failed.is_empty())
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn parse_families(names: &[String]) -> Result<Vec<NoiseFamily>> {
    let mut out = Vec::new();
    for name in names {
        if name == "all" {
            out.extend(NoiseFamily::ALL);
        } else {
            out.push(name.parse()?);
        }
    }
    Ok(out)
}

fn approx_curve_csv(seed: u64) -> Result<String> {
    let root = RandomSource::new(seed);
    let net = PolicyNetwork::new(&[4, 64, 2], nrl::numerics::DEFAULT_LEAKY_SLOPE, &mut root.split(0))?;
    let mut obs_rng = root.split(1);
    let observations: Vec<Vec<f64>> = (0..500)
        .map(|_| (0..4).map(|_| obs_rng.uniform_in(-1.0, 1.0)).collect())
        .collect();
    let curve = clean_pass_error_curve(
        &net,
        &observations,
        0.1,
        &[2, 4, 8, 16, 32, 64],
        &mut root.split(2),
    )?;
    let mut text = String::from("passes,mean_abs_error\n");
    for (n, e) in curve {
        text.push_str(&format!("{n},{e:e}\n"));
    }
    Ok(text)
}

fn series_name(path: &Path) -> String {
    path.file_stem()
        .or(path.file_name())
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Per-seed return sequences from a metrics CSV or every `seed-*.csv` in a
/// directory.
fn load_returns(path: &Path) -> Result<Vec<Vec<f64>>> {
    let files = if path.is_dir() {
        let mut files: Vec<PathBuf> = fs::read_dir(path)
            .with_context(|| format!("reading {}", path.display()))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| {
                let name = p.file_name().and_then(|n| n.to_str()).unwrap_or("");
                name.starts_with("seed-") && name.ends_with(".csv")
            })
            .collect();
        files.sort();
        if files.is_empty() {
            bail!("no seed-*.csv files in {}", path.display());
        }
        files
    } else {
        vec![path.to_path_buf()]
    };
    files
        .iter()
        .map(|f| {
            let text = fs::read_to_string(f).with_context(|| format!("reading {}", f.display()))?;
            let rows = read_metrics_csv(&text).with_context(|| format!("parsing {}", f.display()))?;
            Ok(rows.into_iter().map(|r| r.episode_return).collect())
        })
        .collect()
}

fn load_series(kind: PlotKind, inputs: &[PathBuf], window: usize) -> Result<Vec<Series>> {
    inputs
        .iter()
        .map(|path| {
            let name = series_name(path);
            match kind {
                PlotKind::LearningCurve => {
                    Ok(Series::from_runs(&name, &load_returns(path)?, window)?)
                }
                PlotKind::FinalBar => {
                    let finals = load_returns(path)?
                        .iter()
                        .map(|r| nrl::harness::final_performance(r))
                        .collect::<nrl::Result<Vec<f64>>>()?;
                    Ok(Series::point(&name, 0.0, &finals)?)
                }
                PlotKind::ApproxError => read_approx_curve(&name, path),
            }
        })
        .collect()
}

fn read_approx_curve(name: &str, path: &Path) -> Result<Series> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some("passes,mean_abs_error") {
        bail!("{}: expected header `passes,mean_abs_error`", path.display());
    }
    let mut s = Series {
        name: name.to_string(),
        x: vec![],
        mean: vec![],
        min: vec![],
        max: vec![],
    };
    for (i, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let (n, e) = line
            .split_once(',')
            .with_context(|| format!("{}:{}: expected two fields", path.display(), i + 2))?;
        let n: f64 = n.trim().parse().with_context(|| format!("{}:{}", path.display(), i + 2))?;
        let e: f64 = e.trim().parse().with_context(|| format!("{}:{}", path.display(), i + 2))?;
        s.x.push(n);
        s.mean.push(e);
        s.min.push(e);
        s.max.push(e);
    }
    Ok(s)
}
