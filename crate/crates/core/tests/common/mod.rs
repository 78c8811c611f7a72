#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::Path;

use portfolio_dqn::backtest::{
    cumulative_return, run_backtest, run_benchmark, BenchmarkKind, BenchmarkSpec, CostModel, Ensemble,
};
use portfolio_dqn::features::FeatureSpec;
use portfolio_dqn::market_data::{
    generate_synthetic, select_universe, AssetSeries, Partition, PriceBar, Selection, SplitSpec,
};
use portfolio_dqn::panel::{MarketPanel, PreparedUniverse, ReturnConvention};
use portfolio_dqn::trainer::{train_ensemble, TrainConfig, TrainingData};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const PLANTED_ASSETS: usize = 16;
pub const PLANTED_DAYS: usize = 1500;
pub const PLANTED_SIGNAL: f64 = 0.3;
pub const PLANTED_NOISE: f64 = 0.01;

/// Synthetic universe split into train / validation / test at bars 1000 and 1250.
pub fn planted_universe(seed: u64) -> PreparedUniverse {
    let all = generate_synthetic(PLANTED_ASSETS, PLANTED_DAYS, PLANTED_SIGNAL, PLANTED_NOISE, seed).unwrap();
    let universe = select_universe(&all, Selection::All, 0, 0).unwrap();
    let bars = &universe.assets[0].bars;
    let split = SplitSpec::new(bars[1000].date, bars[1250].date, bars[PLANTED_DAYS - 1].date).unwrap();
    PreparedUniverse::new(&universe, split, FeatureSpec::default(), ReturnConvention::OpenToClose).unwrap()
}

pub fn planted_config(seed: u64, cost_bps: f64) -> TrainConfig {
    TrainConfig {
        iterations: 50_000,
        memory: 5_000,
        evaluation_interval: 2_500,
        batch_size: 256,
        hidden_widths: vec![16, 32, 64],
        cost_bps,
        seed,
        ..TrainConfig::default()
    }
}

/// Test-split cumulative returns of one trained ensemble and the benchmarks.
#[derive(Debug, Clone, Copy)]
pub struct PlantedOutcome {
    pub agent: f64,
    pub buy_and_hold: f64,
    pub momentum: f64,
    pub reversion: f64,
    pub members: usize,
}

pub fn planted_outcome(
    prepared: &PreparedUniverse,
    config: &TrainConfig,
    eval_bps: f64,
    out_dir: Option<&Path>,
) -> PlantedOutcome {
    let data = TrainingData::new(prepared).unwrap();
    let reports = train_ensemble(&data, config, out_dir).unwrap();
    let members: Vec<_> = reports.iter().filter_map(|r| r.best_network.clone()).collect();
    let test = prepared.panel(Partition::Test, &data.scaler).unwrap();
    let cost = CostModel::from_bps(eval_bps).unwrap();
    let n = members.len();
    let agent = if members.is_empty() {
        0.0
    } else {
        let ensemble = Ensemble::new(members, data.fingerprint).unwrap();
        cumulative_return(&run_backtest(&ensemble, &test, cost).unwrap()).unwrap()
    };
    let bench = |k| cumulative_return(&run_benchmark(BenchmarkSpec::new(k), &test, cost).unwrap()).unwrap();
    PlantedOutcome {
        agent,
        buy_and_hold: bench(BenchmarkKind::BuyAndHold),
        momentum: bench(BenchmarkKind::Momentum),
        reversion: bench(BenchmarkKind::Reversion),
        members: n,
    }
}

pub mod oracles;

/// Small synthetic universe split at 60% and 80% of its calendar.
pub fn small_universe(n_assets: usize, n_days: usize, seed: u64) -> PreparedUniverse {
    let all = generate_synthetic(n_assets, n_days, PLANTED_SIGNAL, PLANTED_NOISE, seed).unwrap();
    let universe = select_universe(&all, Selection::All, 0, 0).unwrap();
    let bars = &universe.assets[0].bars;
    let split = SplitSpec::new(
        bars[n_days * 3 / 5].date,
        bars[n_days * 4 / 5].date,
        bars[n_days - 1].date,
    )
    .unwrap();
    PreparedUniverse::new(&universe, split, FeatureSpec::default(), ReturnConvention::OpenToClose).unwrap()
}

/// Random synthetic universe with per-asset gaps after the warm-up, and
/// its test panel.
pub fn random_panel(seed: u64) -> (BTreeMap<String, AssetSeries>, MarketPanel) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_assets = rng.random_range(2..=6);
    let n_days = rng.random_range(260..=320);
    let signal = rng.random_range(-0.5..0.5);
    let mut all = generate_synthetic(n_assets, n_days, signal, 0.01, rng.random()).unwrap();
    for series in all.values_mut() {
        let bars: Vec<PriceBar> = series
            .bars
            .iter()
            .enumerate()
            .filter(|(j, _)| *j < 210 || rng.random_bool(0.9))
            .map(|(_, b)| *b)
            .collect();
        *series = AssetSeries::new(series.ticker.clone(), bars, series.fundamentals.clone()).unwrap();
    }
    let calendar: Vec<_> = generate_synthetic(1, n_days, 0.0, 0.0, 0).unwrap().into_values().next().unwrap().bars;
    let split = SplitSpec::new(calendar[215].date, calendar[225].date, calendar[n_days - 1].date).unwrap();
    let universe = select_universe(&all, Selection::All, 0, 0).unwrap();
    let prepared =
        PreparedUniverse::new(&universe, split, FeatureSpec::default(), ReturnConvention::OpenToClose).unwrap();
    let scaler = prepared.fit_scaler().unwrap();
    let panel = prepared.panel(Partition::Test, &scaler).unwrap();
    (all, panel)
}
