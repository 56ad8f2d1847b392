use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fk_cftp::coupon::{coupon_moments, coupon_time, gumbel_cdf};
use fk_cftp::experiment::{
    report, run_experiment, scaled_autocorr_experiment, write_ratio_csv, ExperimentConfig, Mode, ModelKind, PValue,
    RatioRow, ScaledAutocorrConfig, Summary, SUMMARY_FILE,
};
use fk_cftp::stats::{estimate_moments, fit_gev, ks_distance, standardize, DEFAULT_BOOTSTRAP_REPS};
use fk_cftp::{Error, GraphSpec};
use rayon::prelude::*;
use serde::Serialize;

#[derive(Parser)]
#[command(name = "fkcftp", version, about = "Coupling from the past for FK and Ising heat-bath processes")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// JSON config file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the config seed
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory or file
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config, writing samples.jsonl and summary.json
    Run {
        /// Also write an (L, ratio, se) CSV table
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Exact checks on a tiny graph; reads --config or builds a cycle
    Oracle {
        #[arg(long)]
        cycle: Option<usize>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        q: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
    },
    /// Fit a GEV law to samples (one number per line, or JSONL records with a `T` field)
    FitGev {
        input: PathBuf,
        /// Fit the raw values instead of (x - mean) / sd
        #[arg(long)]
        raw: bool,
        #[arg(long, default_value_t = DEFAULT_BOOTSTRAP_REPS)]
        reps: usize,
    },
    /// Scaled-autocorrelation collapse data from a config with a `graphs` list
    Autocorr {
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Simulate the coupon-collector time for m sites
    Coupon {
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
    },
    /// Recompute a run's summary from its JSONL samples and compare
    Report {
        dir: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.common.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if matches!(e, Error::Config(_)) { 2 } else { 1 })
        }
    }
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> fk_cftp::Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match out {
        Some(path) => fs::write(path, text + "\n")?,
        None => println!("{text}"),
    }
    Ok(())
}

fn need_config(common: &Common) -> fk_cftp::Result<&Path> {
    common.config.as_deref().ok_or_else(|| Error::Config("--config is required".into()))
}

fn ratio_rows(summary: &Summary) -> fk_cftp::Result<Vec<RatioRow>> {
    match summary {
        Summary::CouplingTime(s) => Ok(vec![RatioRow::from_summary(s)]),
        _ => Err(Error::Config("CSV ratio tables need a coupling-time run".into())),
    }
}

fn dispatch(cli: &Cli) -> fk_cftp::Result<ExitCode> {
    let common = &cli.common;
    match &cli.command {
        Command::Run { csv } => {
            let mut config = ExperimentConfig::load(need_config(common)?)?;
            if let Some(seed) = common.seed {
                config.seed = seed;
            }
            let dir = common.out.clone().or_else(|| config.output.clone()).unwrap_or_else(|| PathBuf::from("out"));
            let run = run_experiment(&config, &dir, common.threads)?;
            if let Some(path) = csv {
                write_ratio_csv(path, &ratio_rows(&run.summary)?)?;
            }
            println!("{}", serde_json::to_string_pretty(&run.summary)?);
            if run.failure_rate_exceeded {
                eprintln!(
                    "step cap hit in {:.3}% of runs (allowed {:.3}%); partial results kept in {}",
                    100.0 * run.failure_rate,
                    100.0 * config.max_failure_rate,
                    dir.display()
                );
                return Ok(ExitCode::from(3));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Oracle { cycle, p, q, beta } => {
            let mut config = match (&common.config, cycle) {
                (Some(path), _) => ExperimentConfig::load(path)?,
                (None, Some(l)) => {
                    let model = if beta.is_some() { ModelKind::Ising } else { ModelKind::Fk };
                    ExperimentConfig::from_json(&serde_json::json!({"model": model, "mode": "exact-oracle",
                        "graph": GraphSpec::Torus { d: 1, l: *l }}).to_string())?
                }
                (None, None) => return Err(Error::Config("oracle needs --config or --cycle".into())),
            };
            config.mode = Mode::ExactOracle;
            if let Some(p) = p {
                config.p = Some(PValue::Value(*p));
            }
            config.q = q.or(config.q);
            config.beta = beta.or(config.beta);
            if let Some(seed) = common.seed {
                config.seed = seed;
            }
            let dir = tempdir_or(common.out.as_deref())?;
            let run = run_experiment(&config, &dir, common.threads);
            if common.out.is_none() {
                let _ = fs::remove_dir_all(&dir);
            }
            let run = run?;
            println!("{}", serde_json::to_string_pretty(&run.summary)?);
            let passed = matches!(&run.summary, Summary::ExactOracle(s) if s.all_passed);
            Ok(if passed { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::FitGev { input, raw, reps } => {
            let samples = read_samples(input)?;
            let seed = common.seed.unwrap_or(0);
            let xs = if *raw {
                samples
            } else {
                let moments = estimate_moments(&samples, 0, seed)?;
                standardize(&samples, &moments)?
            };
            emit(&fit_gev(&xs, *reps, seed)?, common.out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Autocorr { csv } => {
            let text = fs::read_to_string(need_config(common)?)?;
            let mut config = ScaledAutocorrConfig::from_json(&text)?;
            if let Some(seed) = common.seed {
                config.seed = seed;
            }
            let curves = scaled_autocorr_experiment(&config)?;
            if let Some(path) = csv {
                let mut w = csv::Writer::from_path(path).map_err(|e| Error::Io(e.into()))?;
                w.write_record(["L", "sites", "k", "lag", "ln_rho", "se"]).map_err(|e| Error::Io(e.into()))?;
                for c in &curves {
                    let l = match c.graph.spec {
                        GraphSpec::Torus { l, .. } => l,
                        _ => c.graph.n,
                    };
                    for p in &c.points {
                        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
                        w.write_record([
                            l.to_string(),
                            c.sites.to_string(),
                            p.k.to_string(),
                            p.lag.to_string(),
                            opt(p.ln_rho),
                            opt(p.se),
                        ])
                        .map_err(|e| Error::Io(e.into()))?;
                    }
                }
                w.flush()?;
            }
            emit(&curves, common.out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Coupon { m, samples } => {
            if *m == 0 || *samples < 2 {
                return Err(Error::Config("coupon needs m >= 1 and samples >= 2".into()));
            }
            let seed = common.seed.unwrap_or(0);
            let ws: Vec<f64> = (0..*samples as u64).into_par_iter().map(|r| coupon_time(*m, seed, r) as f64).collect();
            let moments = estimate_moments(&ws, DEFAULT_BOOTSTRAP_REPS, seed)?;
            let exact = coupon_moments(*m as u64);
            let ks = ks_distance(&standardize(&ws, &moments)?, gumbel_cdf)?;
            emit(
                &serde_json::json!({
                    "m": m,
                    "samples": samples,
                    "exact_mean": exact.mean,
                    "exact_std": exact.std(),
                    "estimate": moments,
                    "ks_gumbel": ks,
                }),
                common.out.as_deref(),
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Report { dir, csv } => {
            let dir = dir.clone().or_else(|| common.out.clone()).ok_or_else(|| Error::Config("report needs a run directory".into()))?;
            let summary = report(&dir, common.threads)?;
            let stored: Summary = serde_json::from_str(&fs::read_to_string(dir.join(SUMMARY_FILE))?)?;
            if let Some(path) = csv {
                write_ratio_csv(path, &ratio_rows(&summary)?)?;
            }
            println!("{}", serde_json::to_string_pretty(&summary)?);
            if summary != stored {
                eprintln!("recomputed summary differs from {}", dir.join(SUMMARY_FILE).display());
                return Ok(ExitCode::from(1));
            }
            eprintln!("summary matches {}", dir.join(SUMMARY_FILE).display());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn tempdir_or(out: Option<&Path>) -> fk_cftp::Result<PathBuf> {
    Ok(match out {
        Some(p) => p.to_path_buf(),
        None => std::env::temp_dir().join(format!("fkcftp-oracle-{}", std::process::id())),
    })
}

fn read_samples(path: &Path) -> fk_cftp::Result<Vec<f64>> {
    let text = fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let value = match line.parse::<f64>() {
            Ok(v) => Some(v),
            Err(_) => {
                let v: serde_json::Value = serde_json::from_str(line)?;
                match v.get("T") {
                    Some(serde_json::Value::Null) => None,
                    Some(t) => t.as_f64(),
                    None => return Err(Error::Config(format!("line {}: no number and no `T` field", i + 1))),
                }
            }
        };
        out.extend(value);
    }
    Ok(out)
}
