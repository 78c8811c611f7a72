//! Independent reference computations used by the integration and
//! acceptance tests.

use std::collections::BTreeSet;

use chrono::NaiveDate;
use portfolio_dqn::market_data::AssetSeries;
use portfolio_dqn::qnet::{Action, QNetwork, Sample};
use rand::Rng;
use rand_distr::StandardNormal;

/// Central finite-difference gradient of the batch loss.
pub fn numeric_gradient(net: &QNetwork, batch: &[Sample<'_>], h: f64) -> Vec<f64> {
    let mut probe = net.clone();
    (0..net.params().len())
        .map(|j| {
            let x = net.params()[j];
            probe.params_mut()[j] = x + h;
            let up = probe.loss(batch).unwrap();
            probe.params_mut()[j] = x - h;
            let down = probe.loss(batch).unwrap();
            probe.params_mut()[j] = x;
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Elementwise relative error with a floor on the denominator for entries
/// that are zero in both.
pub fn max_relative_error(a: &[f64], b: &[f64], floor: f64) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / x.abs().max(y.abs()).max(floor))
        .fold(0.0, f64::max)
}

/// Largest analytic-vs-numeric gradient discrepancy over one random width-4
/// net and batch.
pub fn gradient_check_case<R: Rng>(rng: &mut R) -> f64 {
    let input = rng.random_range(2..8);
    let mut net = QNetwork::init(&[input, 4, 4, 2], rng.random()).unwrap();
    // Nonzero biases keep pre-activations off the ReLU kink at exactly 0.
    for l in 0..net.n_layers() {
        for j in net.bias_range(l) {
            net.params_mut()[j] = rng.random_range(-0.5..0.5);
        }
    }
    let n = rng.random_range(1..12);
    let states: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..input).map(|_| rng.sample(StandardNormal)).collect())
        .collect();
    let batch: Vec<Sample> = states
        .iter()
        .map(|s| Sample {
            state: s,
            action: if rng.random_bool(0.5) { Action::Invest } else { Action::Cash },
            target: rng.sample::<f64, _>(StandardNormal),
        })
        .collect();
    let (_, analytic) = net.loss_and_gradient(&batch).unwrap();
    let numeric = numeric_gradient(&net, &batch, 1e-6);
    // Below ~1e-5 the rounding error of a central difference at h = 1e-6
    // (about eps * loss / h) dominates the relative error.
    max_relative_error(analytic.as_slice(), &numeric, 1e-5)
}

/// One period of a randomized accounting scenario.
#[derive(Debug, Clone)]
pub struct Period {
    /// `(asset, return, invest)` for each active asset.
    pub active: Vec<(usize, f64, bool)>,
}

pub fn random_scenario<R: Rng>(rng: &mut R) -> (usize, Vec<Period>) {
    let n_assets = rng.random_range(1..=5);
    let n_periods = rng.random_range(1..=20);
    let periods = (0..n_periods)
        .map(|_| {
            let mut active = Vec::new();
            for i in 0..n_assets {
                if rng.random_bool(0.85) {
                    active.push((i, rng.random_range(-0.05..0.05), rng.random_bool(0.6)));
                }
            }
            Period { active }
        })
        .collect();
    (n_assets, periods)
}

/// Share-level simulator: tracks the currency value of each position, lets
/// positions drift with their returns, rebalances to equal weights over the
/// held set and charges `cost` on every currency unit bought. Sales are free
/// and cash earns nothing. Returns the wealth path.
pub fn share_level_wealth(n_assets: usize, periods: &[Period], cost: f64) -> Vec<f64> {
    let mut positions = vec![0.0; n_assets];
    let mut cash = 1.0;
    let mut path = Vec::with_capacity(periods.len());
    for p in periods {
        // Positions in assets that are inactive today are liquidated at their
        // last value.
        let active: BTreeSet<usize> = p.active.iter().map(|a| a.0).collect();
        for (i, pos) in positions.iter_mut().enumerate() {
            if !active.contains(&i) {
                cash += *pos;
                *pos = 0.0;
            }
        }
        let wealth: f64 = cash + positions.iter().sum::<f64>();
        let held: Vec<(usize, f64)> = p.active.iter().filter(|a| a.2).map(|a| (a.0, a.1)).collect();
        if held.is_empty() {
            cash = wealth;
            positions.iter_mut().for_each(|x| *x = 0.0);
        } else {
            let target = wealth / held.len() as f64;
            let bought: f64 = held.iter().map(|&(i, _)| (target - positions[i]).max(0.0)).sum();
            let after_cost = wealth - cost * bought;
            let scale = after_cost / wealth;
            positions.iter_mut().for_each(|x| *x = 0.0);
            cash = 0.0;
            for &(i, r) in &held {
                positions[i] = target * scale * (1.0 + r);
            }
        }
        path.push(cash + positions.iter().sum::<f64>());
    }
    path
}

/// Mean of the five close-to-close returns ending at `date`, from raw bars.
pub fn trailing_five_day_mean(series: &AssetSeries, date: NaiveDate) -> Option<f64> {
    let j = series.bars.iter().position(|b| b.date == date)?;
    if j < 5 {
        return None;
    }
    let sum: f64 = (j - 4..=j)
        .map(|m| series.bars[m].close / series.bars[m - 1].close - 1.0)
        .sum();
    Some(sum / 5.0)
}
