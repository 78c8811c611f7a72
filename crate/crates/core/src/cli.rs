//! Command-line entry points: `train`, `backtest` and `synth`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use crate::backtest::{
    run_backtest, run_benchmark, write_report, BenchmarkKind, BenchmarkSpec, CostModel, Ensemble, ReportEntry,
};
use crate::config::{KeyValues, RunConfig, SynthConfig};
use crate::error::{Error, Result};
use crate::features::FeatureSpec;
use crate::market_data::{
    build_assets, generate_synthetic, load_fundamentals, load_prices, select_universe, write_fundamentals_csv,
    write_prices_csv, Partition,
};
use crate::panel::PreparedUniverse;
use crate::qnet::{load_checkpoint, CHECKPOINT_MAGIC};
use crate::trainer::{checkpoint_file, member_seed, stream_seed, train_ensemble, Stream, TrainReport, TrainingData};

pub const THREADS_ENV: &str = "PORTFOLIO_DQN_THREADS";
pub const MANIFEST_FILE: &str = "manifest.txt";

#[derive(Debug, Parser)]
#[command(name = "portfolio-dqn", version, about = "Deep Q-learning long-only portfolio trader")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train one network per hidden width and write checkpoints.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Evaluate the ensemble and the benchmarks on the test split.
    Backtest {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        checkpoints: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a synthetic market in the input CSV schema.
    Synth {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Runs a parsed command and maps the outcome to a process exit code.
pub fn run(cli: Cli) -> i32 {
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    let pool = thread_pool()?;
    pool.install(|| match command {
        Command::Train { config, out, seed } => {
            let mut kv = KeyValues::from_file(&config)?;
            if let Some(s) = seed {
                kv.set("seed", s.to_string());
            }
            let mut cfg = RunConfig::from_key_values(&kv)?;
            if let Some(o) = out {
                cfg.out = Some(o);
            }
            let out = cfg.out.clone().ok_or_else(|| Error::config("out", "no output directory given"))?;
            for r in cmd_train(&cfg, &out)? {
                eprintln!("{}", r.summary());
            }
            Ok(())
        }
        Command::Backtest { config, checkpoints, out } => {
            let mut cfg = RunConfig::from_key_values(&KeyValues::from_file(&config)?)?;
            if let Some(o) = out {
                cfg.out = Some(o);
            }
            let out = cfg.out.clone().ok_or_else(|| Error::config("out", "no output directory given"))?;
            let written = cmd_backtest(&cfg, &checkpoints, &out)?;
            eprintln!("wrote {} files to {}", written.len(), out.display());
            Ok(())
        }
        Command::Synth { config, out } => {
            let cfg = SynthConfig::from_key_values(&KeyValues::from_file(&config)?)?;
            cmd_synth(&cfg, &out)?;
            Ok(())
        }
    })
}

/// Pool sized by `PORTFOLIO_DQN_THREADS` when set, otherwise rayon's default.
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| Error::config(THREADS_ENV, format!("expected a positive integer, got `{v}`")))?;
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| Error::config(THREADS_ENV, e.to_string()))
}

/// Loads inputs, selects the universe and assembles features.
pub fn prepare(cfg: &RunConfig) -> Result<PreparedUniverse> {
    cfg.validate()?;
    let prices = load_prices(&cfg.prices)?;
    let fundamentals = load_fundamentals(&cfg.fundamentals)?;
    let assets = build_assets(prices, fundamentals)?;
    let universe = select_universe(&assets, cfg.selection, cfg.k, cfg.universe_seed)?;
    PreparedUniverse::new(&universe, cfg.split, FeatureSpec::default(), cfg.convention)
}

pub fn cmd_train(cfg: &RunConfig, out: &Path) -> Result<Vec<TrainReport>> {
    let prepared = prepare(cfg)?;
    let data = TrainingData::new(&prepared)?;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let reports = train_ensemble(&data, &cfg.train, Some(out))?;
    write_manifest(cfg, &prepared, &reports, out)?;
    Ok(reports)
}

fn write_manifest(cfg: &RunConfig, prepared: &PreparedUniverse, reports: &[TrainReport], out: &Path) -> Result<()> {
    let mut s = String::new();
    let _ = writeln!(s, "# portfolio-dqn {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(s, "# checkpointFormat = {}", String::from_utf8_lossy(CHECKPOINT_MAGIC));
    let _ = writeln!(s, "# featureFingerprint = {:#010x}", prepared.spec.fingerprint());
    let _ = writeln!(s, "# features = {}", prepared.spec.feature_names().join(","));
    let _ = writeln!(s, "# tickers = {}", prepared.tickers().join(","));
    for (i, r) in reports.iter().enumerate() {
        let seed = member_seed(cfg.train.seed, i);
        let _ = writeln!(
            s,
            "# member {i} width={} seed={seed} initSeed={} assetSeed={} explorationSeed={} memorySeed={} \
             bestValidationReturn={} checkpoint={}",
            r.hidden_width,
            stream_seed(seed, Stream::Init),
            stream_seed(seed, Stream::Assets),
            stream_seed(seed, Stream::Exploration),
            stream_seed(seed, Stream::Memory),
            r.best_validation_return,
            r.checkpoint_path
                .as_ref()
                .and_then(|p| p.file_name())
                .map(|f| f.to_string_lossy().into_owned())
                .unwrap_or_else(|| "none".into()),
        );
    }
    s.push_str(&cfg.to_key_values());
    let path = out.join(MANIFEST_FILE);
    fs::write(&path, s).map_err(|e| Error::io(&path, e))
}

/// Backtests the ensemble and the three benchmarks at every cost level.
pub fn cmd_backtest(cfg: &RunConfig, checkpoints: &Path, out: &Path) -> Result<Vec<PathBuf>> {
    let prepared = prepare(cfg)?;
    let mut loaded = Vec::with_capacity(cfg.train.hidden_widths.len());
    for (i, &w) in cfg.train.hidden_widths.iter().enumerate() {
        let path = checkpoint_file(checkpoints, i, w);
        if !path.is_file() {
            return Err(Error::Compatibility(format!(
                "missing checkpoint for member {i} (hidden width {w}): {}",
                path.display()
            )));
        }
        loaded.push(load_checkpoint(&path)?);
    }
    let ensemble = Ensemble::from_checkpoints(&loaded)?;
    if ensemble.fingerprint != prepared.spec.fingerprint() {
        return Err(Error::Compatibility(format!(
            "checkpoint feature fingerprint {:#010x} does not match the pipeline's {:#010x} ({})",
            ensemble.fingerprint,
            prepared.spec.fingerprint(),
            prepared.spec.feature_names().join(",")
        )));
    }
    let panel = prepared.panel(Partition::Test, &loaded[0].scaler)?;
    let size = prepared.tickers().len();
    let kind = cfg.selection.as_str().to_string();

    let per_cost: Vec<Vec<ReportEntry>> = cfg
        .cost_levels
        .par_iter()
        .map(|&bps| -> Result<Vec<ReportEntry>> {
            let cost = CostModel::from_bps(bps)?;
            let mut ledgers = vec![run_backtest(&ensemble, &panel, cost)?];
            for kind in BenchmarkKind::ALL {
                ledgers.push(run_benchmark(BenchmarkSpec::new(kind), &panel, cost)?);
            }
            Ok(ledgers
                .into_iter()
                .map(|ledger| ReportEntry {
                    cost_bps: bps,
                    portfolio_size: size,
                    portfolio_type: kind.clone(),
                    ledger,
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    let entries: Vec<ReportEntry> = per_cost.into_iter().flatten().collect();
    write_report(&entries, out)
}

/// Writes `prices.csv` and `fundamentals.csv` under `out`.
pub fn cmd_synth(cfg: &SynthConfig, out: &Path) -> Result<()> {
    let assets = generate_synthetic(cfg.n_assets, cfg.n_days, cfg.signal_strength, cfg.noise_std, cfg.seed)?;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    write_prices_csv(out.join("prices.csv"), assets.values())?;
    write_fundamentals_csv(out.join("fundamentals.csv"), assets.values())?;
    let path = out.join(MANIFEST_FILE);
    fs::write(&path, cfg.to_key_values()).map_err(|e| Error::io(&path, e))
}
