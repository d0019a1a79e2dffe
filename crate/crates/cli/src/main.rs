//! Command-line surface: fit / predict / evaluate / simulate /
//! sweep-bandwidth / single-index.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage error. Failures also
//! emit a one-line JSON object on stderr so callers can parse them.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use conformal_objects::conformal::{
    evaluate_coverage, predict_set, split_fit, ConformalModel, FitConfig,
};
use conformal_objects::dataset::Dataset;
use conformal_objects::error::Error;
use conformal_objects::kernel::{Bandwidth, KernelFamily};
use conformal_objects::profiles::ProfileConfig;
use conformal_objects::simulate::{
    bandwidth_sweep, generate, log_spaced, run_monte_carlo, CandidateSpec, GeneratorSpec,
    MonteCarloConfig, SettingId,
};
use conformal_objects::single_index::{single_index_fit, SingleIndexConfig};
use conformal_objects::spaces::{candidate_grid, GridBounds, MetricSpaceDescriptor, ObjectPoint};

#[derive(Parser)]
#[command(
    name = "conformal-objects",
    about = "Conformal prediction sets for metric-space-valued responses",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct FitFlags {
    /// Kernel family: epanechnikov | triangular | quartic
    #[arg(long, default_value = "epanechnikov")]
    kernel: String,
    /// Bandwidth: "auto" (rule of thumb) or a positive number
    #[arg(long, default_value = "auto")]
    bandwidth: String,
    /// Number of t-grid nodes
    #[arg(long, default_value_t = 101)]
    tgrid: usize,
    /// Train:calibration split, e.g. "1:1" or a train fraction like 0.5
    #[arg(long = "split-ratio", default_value = "1:1")]
    split_ratio: String,
    /// Re-monotonize fitted profile curves by running maximum
    #[arg(long, default_value_t = false)]
    isotonize: bool,
}

/// Parse a space descriptor like `euclidean:2`, `sphere2`,
/// `wasserstein1d:100:0:1`, `network:13` or `spider3`.
fn parse_space(s: &str) -> Result<MetricSpaceDescriptor, Error> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || Error::InvalidConfig(format!("bad space descriptor: {s}"));
    let num = |p: &str| p.trim().parse::<usize>().map_err(|_| bad());
    let real = |p: &str| p.trim().parse::<f64>().map_err(|_| bad());
    match parts[0].trim().to_ascii_lowercase().as_str() {
        "euclidean" if parts.len() == 2 => Ok(MetricSpaceDescriptor::euclidean(num(parts[1])?)),
        "sphere2" if parts.len() == 1 => Ok(MetricSpaceDescriptor::Sphere2),
        "wasserstein1d" if parts.len() == 4 => Ok(MetricSpaceDescriptor::wasserstein(
            num(parts[1])?,
            [real(parts[2])?, real(parts[3])?],
        )),
        "network" if parts.len() == 2 => Ok(MetricSpaceDescriptor::Network { k: num(parts[1])? }),
        "spider3" if parts.len() == 1 => Ok(MetricSpaceDescriptor::Spider3),
        _ => Err(bad()),
    }
}

/// Check a loaded dataset against a declared space, when one was given.
fn check_space(dataset: &Dataset, declared: Option<&str>) -> Result<(), Error> {
    if let Some(s) = declared {
        let expected = parse_space(s)?;
        if dataset.space != expected {
            return Err(Error::SpaceMismatch {
                expected: expected.name(),
                found: dataset.space.name(),
            });
        }
    }
    Ok(())
}

#[derive(Subcommand)]
enum Command {
    /// Fit a conformal model on a dataset file and write the model artifact.
    Fit {
        #[arg(long)]
        data: PathBuf,
        /// Declared object space, cross-checked against the file header,
        /// e.g. "euclidean:1", "sphere2", "wasserstein1d:100:0:1"
        #[arg(long)]
        space: Option<String>,
        #[arg(long, default_value_t = 0.1)]
        alpha: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        fit: FitFlags,
        /// Output model JSON path
        #[arg(long)]
        out: PathBuf,
    },
    /// Score a candidate grid at a covariate and write the prediction set CSV.
    Predict {
        #[arg(long)]
        model: PathBuf,
        /// Covariate value(s), comma-separated for multivariate models
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        /// Candidate grid resolution (points per axis)
        #[arg(long, default_value_t = 400)]
        candidates: usize,
        /// Scalar grid bounds "lo,hi" (defaults to the training extent + 5%)
        #[arg(long, allow_hyphen_values = true)]
        grid_bounds: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate marginal and conditional coverage of a model on a test set.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        test: PathBuf,
        /// Declared object space, cross-checked against the file header
        #[arg(long)]
        space: Option<String>,
        /// Number of equal-width covariate bins
        #[arg(long, default_value_t = 20)]
        bins: usize,
        /// Candidate resolution for set sizes (omit to skip sizes)
        #[arg(long)]
        candidates: Option<usize>,
        /// Scalar grid bounds "lo,hi" for the size grid
        #[arg(long, allow_hyphen_values = true)]
        grid_bounds: Option<String>,
        /// Output prefix; writes `<out>.csv` and `<out>.json`
        #[arg(long)]
        out: PathBuf,
    },
    /// Run seeded Monte Carlo replications of a synthetic setting.
    Simulate {
        /// Setting id: 1..9, fig-spider, fig-sphere-bimodal, fig-wass, fig-2d-mixture
        #[arg(long)]
        setting: String,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        runs: usize,
        #[arg(long, default_value_t = 0.1)]
        alpha: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 2000)]
        test_n: usize,
        #[arg(long, default_value_t = 20)]
        bins: usize,
        /// Candidate resolution for set sizes (omit to skip sizes)
        #[arg(long)]
        candidates: Option<usize>,
        #[command(flatten)]
        fit: FitFlags,
        /// Also dump the first run's training dataset to this path
        #[arg(long)]
        dump_data: Option<PathBuf>,
        /// Output prefix; writes `<out>.json`, `<out>_runs.csv`, `<out>_bins.csv`
        #[arg(long)]
        out: PathBuf,
    },
    /// Coverage / mean set size across a bandwidth grid.
    SweepBandwidth {
        #[arg(long)]
        setting: String,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 20)]
        runs: usize,
        #[arg(long, default_value_t = 0.1)]
        alpha: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Explicit comma-separated bandwidths, e.g. "0.08,0.12,0.2"
        #[arg(long)]
        bandwidths: Option<String>,
        /// Log-spaced grid bounds, used when --bandwidths is absent
        #[arg(long, default_value_t = 0.08)]
        h_min: f64,
        #[arg(long, default_value_t = 0.6)]
        h_max: f64,
        #[arg(long, default_value_t = 6)]
        h_count: usize,
        #[arg(long, default_value_t = 2000)]
        test_n: usize,
        /// Candidate resolution for set sizes
        #[arg(long, default_value_t = 400)]
        candidates: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Estimate a single-index direction and fit the projected model.
    SingleIndex {
        #[arg(long)]
        data: PathBuf,
        /// Declared object space, cross-checked against the file header
        #[arg(long)]
        space: Option<String>,
        #[arg(long, default_value_t = 0.1)]
        alpha: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Bin count for the direction search (default: 1.5 n^(1/4))
        #[arg(long)]
        index_bins: Option<usize>,
        #[arg(long, default_value_t = 8)]
        restarts: usize,
        #[command(flatten)]
        fit: FitFlags,
        /// Output prefix; writes `<out>_model.json` and `<out>_theta.json`
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_fit_flags(flags: &FitFlags) -> Result<FitConfig, Error> {
    let kernel = KernelFamily::parse(&flags.kernel)?;
    let bandwidth = if flags.bandwidth.eq_ignore_ascii_case("auto") {
        Bandwidth::Auto { c: 1.0 }
    } else {
        let h: f64 = flags
            .bandwidth
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("bad bandwidth: {}", flags.bandwidth)))?;
        Bandwidth::Fixed(h)
    };
    let train_frac = parse_split_ratio(&flags.split_ratio)?;
    Ok(FitConfig {
        profile: ProfileConfig {
            kernel,
            bandwidth,
            n_t: flags.tgrid,
            isotonize: flags.isotonize,
            ..ProfileConfig::default()
        },
        train_frac,
    })
}

fn parse_split_ratio(s: &str) -> Result<f64, Error> {
    if let Some((a, b)) = s.split_once(':') {
        let a: f64 = a.trim().parse().map_err(|_| bad_ratio(s))?;
        let b: f64 = b.trim().parse().map_err(|_| bad_ratio(s))?;
        if a <= 0.0 || b <= 0.0 {
            return Err(bad_ratio(s));
        }
        return Ok(a / (a + b));
    }
    let frac: f64 = s.trim().parse().map_err(|_| bad_ratio(s))?;
    if !(frac > 0.0 && frac < 1.0) {
        return Err(bad_ratio(s));
    }
    Ok(frac)
}

fn bad_ratio(s: &str) -> Error {
    Error::InvalidConfig(format!("bad split ratio: {s} (use \"1:1\" or a fraction in (0,1))"))
}

fn parse_pair(s: &str) -> Result<(f64, f64), Error> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(Error::InvalidConfig(format!("expected \"lo,hi\", got {s}")));
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| Error::InvalidConfig(format!("bad number in {s}")))?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| Error::InvalidConfig(format!("bad number in {s}")))?;
    Ok((lo, hi))
}

/// Candidate grid for a model: explicit scalar bounds, or the training
/// object extent padded by 5% for scalar spaces, or the space default.
fn candidates_for(
    model: &ConformalModel,
    resolution: usize,
    bounds: Option<&str>,
) -> Result<Vec<ObjectPoint>, Error> {
    let space = model.table.space().clone();
    let bounds = match (bounds, &space) {
        (Some(s), _) => {
            let (lo, hi) = parse_pair(s)?;
            GridBounds::Interval(lo, hi)
        }
        (None, MetricSpaceDescriptor::Euclidean { k: 1 }) => {
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for p in model.table.objects() {
                let v = p.coords()[0];
                lo = lo.min(v);
                hi = hi.max(v);
            }
            let pad = 0.05 * (hi - lo).max(1e-9);
            GridBounds::Interval(lo - pad, hi + pad)
        }
        (None, MetricSpaceDescriptor::Sphere2) => GridBounds::None,
        (None, MetricSpaceDescriptor::Wasserstein1d { support, .. }) => {
            let pad = 0.1 * (support[1] - support[0]);
            GridBounds::GaussianFamily {
                mu: (support[0] + pad, support[1] - pad),
                sigma: (0.05 * (support[1] - support[0]), 0.4 * (support[1] - support[0])),
            }
        }
        (None, other) => {
            return Err(Error::InvalidConfig(format!(
                "no default candidate grid for {}; pass --grid-bounds",
                other.name()
            )))
        }
    };
    candidate_grid(&space, resolution, &bounds)
}

fn write_text(path: &Path, text: &str) -> Result<(), Error> {
    std::fs::write(path, text)?;
    Ok(())
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Fit { data, space, alpha, seed, fit, out } => {
            let dataset = Dataset::load(&data)?;
            check_space(&dataset, space.as_deref())?;
            let config = parse_fit_flags(&fit)?;
            let model = split_fit(&dataset, &config, alpha, seed)?;
            write_text(&out, &serde_json::to_string(&model)?)?;
            eprintln!("model written to {}", out.display());
        }
        Command::Predict { model, x, candidates, grid_bounds, out } => {
            let model: ConformalModel = serde_json::from_str(&std::fs::read_to_string(&model)?)?;
            let cov: Vec<f64> = x
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| Error::InvalidConfig(format!("bad covariate: {x}")))?;
            let grid = candidates_for(&model, candidates, grid_bounds.as_deref())?;
            let projected = model.project(&cov)?;
            let set = predict_set(&model, projected, &grid)?;
            write_text(&out, &set.to_csv())?;
            let size = set.size(model.table.space());
            eprintln!(
                "{} of {} candidates in the {}% set",
                size.count,
                set.entries.len(),
                100.0 * (1.0 - model.alpha)
            );
        }
        Command::Evaluate { model, test, space, bins, candidates, grid_bounds, out } => {
            let model: ConformalModel = serde_json::from_str(&std::fs::read_to_string(&model)?)?;
            let test = Dataset::load(&test)?;
            check_space(&test, space.as_deref())?;
            let grid = match candidates {
                Some(r) => Some(candidates_for(&model, r, grid_bounds.as_deref())?),
                None => None,
            };
            let report = evaluate_coverage(&model, &test, grid.as_deref(), bins, None)?;
            write_text(&with_suffix(&out, ".csv"), &report.to_csv())?;
            write_text(&with_suffix(&out, ".json"), &serde_json::to_string(&report)?)?;
            eprintln!("marginal coverage {:.4}", report.marginal);
        }
        Command::Simulate {
            setting,
            n,
            runs,
            alpha,
            seed,
            test_n,
            bins,
            candidates,
            fit,
            dump_data,
            out,
        } => {
            let setting = SettingId::parse(&setting)?;
            let fit_config = parse_fit_flags(&fit)?;
            let spec = GeneratorSpec { setting, n, seed };
            if let Some(path) = dump_data {
                use conformal_objects::simulate::child_seed;
                let first = generate(&GeneratorSpec {
                    setting,
                    n,
                    seed: child_seed(child_seed(seed, 0), 1),
                })?;
                first.save(&path)?;
            }
            let cfg = MonteCarloConfig {
                fit: fit_config,
                alpha,
                n_test: test_n,
                n_bins: bins,
                candidates: candidates.and_then(|r| {
                    setting
                        .default_grid_bounds()
                        .map(|bounds| CandidateSpec { resolution: r, bounds })
                }),
                eval_theta_mse: setting.true_theta().is_some(),
                ..MonteCarloConfig::default()
            };
            let report = run_monte_carlo(&spec, &cfg, runs);
            write_text(&with_suffix(&out, ".json"), &serde_json::to_string(&report)?)?;
            write_text(&with_suffix(&out, "_runs.csv"), &report.runs_csv())?;
            write_text(&with_suffix(&out, "_bins.csv"), &report.bins_csv())?;
            eprintln!(
                "{} runs: coverage {:?}, failures {}",
                runs, report.coverage_mean, report.n_failed
            );
        }
        Command::SweepBandwidth {
            setting,
            n,
            runs,
            alpha,
            seed,
            bandwidths,
            h_min,
            h_max,
            h_count,
            test_n,
            candidates,
            out,
        } => {
            let setting = SettingId::parse(&setting)?;
            let hs = match bandwidths {
                Some(s) => s
                    .split(',')
                    .map(|v| v.trim().parse::<f64>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|_| Error::InvalidConfig(format!("bad bandwidth list: {s}")))?,
                None => log_spaced(h_min, h_max, h_count)?,
            };
            let spec = GeneratorSpec { setting, n, seed };
            let cfg = MonteCarloConfig {
                alpha,
                n_test: test_n,
                candidates: setting
                    .default_grid_bounds()
                    .map(|bounds| CandidateSpec { resolution: candidates, bounds }),
                ..MonteCarloConfig::default()
            };
            let report = bandwidth_sweep(&spec, &hs, &cfg, runs)?;
            write_text(&out, &report.to_csv())?;
            eprintln!("sweep written to {}", out.display());
        }
        Command::SingleIndex { data, space, alpha, seed, index_bins, restarts, fit, out } => {
            let dataset = Dataset::load(&data)?;
            check_space(&dataset, space.as_deref())?;
            let config = parse_fit_flags(&fit)?;
            let si = SingleIndexConfig {
                kernel: config.profile.kernel,
                bandwidth: config.profile.bandwidth,
                bins: index_bins,
                restarts,
                ..SingleIndexConfig::default()
            };
            let (model, theta_fit) = single_index_fit(&dataset, &config, &si, alpha, seed)?;
            write_text(&with_suffix(&out, "_model.json"), &serde_json::to_string(&model)?)?;
            write_text(&with_suffix(&out, "_theta.json"), &serde_json::to_string(&theta_fit)?)?;
            eprintln!("theta {:?}", theta_fit.theta.theta());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("CONFORMAL_OBJECTS_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap renders its own message; mirror it as machine-readable JSON
            let is_help = matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            if is_help {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprintln!(
                "{}",
                serde_json::json!({"kind": "usage", "error": e.render().to_string()})
            );
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", serde_json::json!({"kind": "runtime", "error": e.to_string()}));
            ExitCode::from(1)
        }
    }
}
