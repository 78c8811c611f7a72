//! Equal-weight portfolio accounting, the agent ensemble, benchmark
//! strategies and report files.
//!
//! Each period the held set is re-weighted to `1 / |held|`. Costs are
//! charged on weight increases relative to the previous period's target
//! weights; sells are free and an empty portfolio earns zero.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;

use crate::error::{Error, Result};
use crate::panel::MarketPanel;
use crate::qnet::{Action, Checkpoint, QNetwork};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostModel {
    /// Proportional cost in return units.
    pub rate: f64,
}

impl CostModel {
    pub fn new(rate: f64) -> Result<Self> {
        if !(rate >= 0.0 && rate.is_finite()) {
            return Err(Error::Argument(format!("cost rate must be non-negative, got {rate}")));
        }
        Ok(Self { rate })
    }

    pub fn from_bps(bps: f64) -> Result<Self> {
        Self::new(bps * 1e-4)
    }

    pub fn zero() -> Self {
        Self { rate: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BenchmarkKind {
    BuyAndHold,
    Momentum,
    Reversion,
}

impl BenchmarkKind {
    pub const ALL: [BenchmarkKind; 3] = [
        BenchmarkKind::BuyAndHold,
        BenchmarkKind::Momentum,
        BenchmarkKind::Reversion,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            BenchmarkKind::BuyAndHold => "buy_and_hold",
            BenchmarkKind::Momentum => "momentum",
            BenchmarkKind::Reversion => "reversion",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BenchmarkSpec {
    pub kind: BenchmarkKind,
    /// Trailing window for the active rules.
    pub lookback: usize,
}

impl BenchmarkSpec {
    pub fn new(kind: BenchmarkKind) -> Self {
        Self { kind, lookback: 5 }
    }
}

/// Outcome of one rebalance.
#[derive(Debug, Clone, PartialEq)]
pub struct PortfolioStep<K> {
    pub held: BTreeSet<K>,
    pub gross_return: f64,
    pub cost_paid: f64,
    pub net_return: f64,
}

/// Rebalances into the equal-weight portfolio of assets with an invest
/// decision and books one period of returns.
pub fn portfolio_step<K: Ord + Clone + std::fmt::Debug>(
    prev_held: &BTreeSet<K>,
    decisions: &BTreeMap<K, Action>,
    returns: &BTreeMap<K, f64>,
    cost: CostModel,
) -> Result<PortfolioStep<K>> {
    let held: BTreeSet<K> = decisions
        .iter()
        .filter(|(_, a)| a.is_invest())
        .map(|(k, _)| k.clone())
        .collect();
    if held.is_empty() {
        return Ok(PortfolioStep {
            held,
            gross_return: 0.0,
            cost_paid: 0.0,
            net_return: 0.0,
        });
    }
    let w_new = 1.0 / held.len() as f64;
    let w_prev = if prev_held.is_empty() {
        0.0
    } else {
        1.0 / prev_held.len() as f64
    };
    let mut gross = 0.0;
    let mut increase = 0.0;
    for k in &held {
        let r = returns
            .get(k)
            .ok_or_else(|| Error::Data(format!("missing return for held asset {k:?}")))?;
        gross += r;
        let before = if prev_held.contains(k) { w_prev } else { 0.0 };
        increase += (w_new - before).max(0.0);
    }
    let gross_return = gross / held.len() as f64;
    let cost_paid = cost.rate * increase;
    Ok(PortfolioStep {
        held,
        gross_return,
        cost_paid,
        net_return: gross_return - cost_paid,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LedgerRow {
    pub decision_date: NaiveDate,
    /// Date the period's return is realized.
    pub date: NaiveDate,
    /// Indices into [`BacktestLedger::tickers`].
    pub active: Vec<usize>,
    pub held: Vec<usize>,
    /// Weight of each held asset, `1 / |held|` (0 when all cash).
    pub weight: f64,
    pub gross_return: f64,
    pub cost_paid: f64,
    pub net_return: f64,
    pub wealth: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BacktestLedger {
    pub strategy: String,
    pub tickers: Vec<String>,
    pub rows: Vec<LedgerRow>,
}

impl BacktestLedger {
    pub fn net_returns(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.net_return).collect()
    }

    pub fn terminal_wealth(&self) -> f64 {
        self.rows.last().map_or(1.0, |r| r.wealth)
    }
}

/// `prod(1 + r) - 1` over the ledger's net returns.
pub fn cumulative_return(ledger: &BacktestLedger) -> Result<f64> {
    if ledger.rows.is_empty() {
        return Err(Error::Argument(format!(
            "cumulative return of empty ledger `{}`",
            ledger.strategy
        )));
    }
    Ok(compound(&ledger.net_returns()))
}

pub fn compound(returns: &[f64]) -> f64 {
    returns.iter().fold(1.0, |w, r| w * (1.0 + r)) - 1.0
}

/// Runs a decision rule over a panel. `decide(i, k, was_held)` is asked for
/// every active asset `i` on date index `k`.
pub fn simulate<F>(panel: &MarketPanel, strategy: &str, cost: CostModel, mut decide: F) -> Result<BacktestLedger>
where
    F: FnMut(usize, usize, bool) -> Result<Action>,
{
    let mut rows = Vec::with_capacity(panel.n_dates());
    let mut prev: BTreeSet<usize> = BTreeSet::new();
    let mut wealth = 1.0;
    for k in 0..panel.n_dates() {
        let mut decisions = BTreeMap::new();
        let mut returns = BTreeMap::new();
        for (i, cell) in panel.active(k) {
            decisions.insert(i, decide(i, k, prev.contains(&i))?);
            returns.insert(i, cell.next_return);
        }
        let step = portfolio_step(&prev, &decisions, &returns, cost)?;
        wealth *= 1.0 + step.net_return;
        let held: Vec<usize> = step.held.iter().copied().collect();
        rows.push(LedgerRow {
            decision_date: panel.dates[k],
            date: panel.realized[k],
            active: decisions.keys().copied().collect(),
            weight: if held.is_empty() { 0.0 } else { 1.0 / held.len() as f64 },
            held,
            gross_return: step.gross_return,
            cost_paid: step.cost_paid,
            net_return: step.net_return,
            wealth,
        });
        prev = step.held;
    }
    Ok(BacktestLedger {
        strategy: strategy.to_string(),
        tickers: panel.tickers(),
        rows,
    })
}

/// Averages both Q-values over members; invests iff the mean invest value
/// is strictly larger.
pub fn ensemble_decide(members: &[QNetwork], state: &[f64]) -> Result<Action> {
    if members.is_empty() {
        return Err(Error::Argument("ensemble has no members".into()));
    }
    let (mut q0, mut q1) = (0.0, 0.0);
    for m in members {
        let (a, b) = m.forward(state)?;
        q0 += a;
        q1 += b;
    }
    let n = members.len() as f64;
    Ok(Action::greedy((q0 / n, q1 / n)))
}

/// Networks sharing one feature layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    pub members: Vec<QNetwork>,
    pub fingerprint: u32,
}

impl Ensemble {
    pub fn new(members: Vec<QNetwork>, fingerprint: u32) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::Argument("ensemble has no members".into()));
        }
        let dim = members[0].input_dim();
        if members.iter().any(|m| m.input_dim() != dim) {
            return Err(Error::Compatibility("ensemble members disagree on input dimension".into()));
        }
        Ok(Self { members, fingerprint })
    }

    /// Members must agree on fingerprint and scaler.
    pub fn from_checkpoints(checkpoints: &[Checkpoint]) -> Result<Self> {
        let first = checkpoints
            .first()
            .ok_or_else(|| Error::Compatibility("no checkpoints".into()))?;
        for c in checkpoints {
            if c.fingerprint != first.fingerprint {
                return Err(Error::Compatibility(format!(
                    "member feature fingerprints differ: {:#010x} vs {:#010x}",
                    c.fingerprint, first.fingerprint
                )));
            }
            if c.scaler != first.scaler {
                return Err(Error::Compatibility("members were trained with different scalers".into()));
            }
        }
        Self::new(
            checkpoints.iter().map(|c| c.net.clone()).collect(),
            first.fingerprint,
        )
    }

    pub fn decide(&self, state: &[f64]) -> Result<Action> {
        ensemble_decide(&self.members, state)
    }
}

fn check_compatible(ensemble: &Ensemble, panel: &MarketPanel) -> Result<()> {
    if ensemble.fingerprint != panel.fingerprint {
        return Err(Error::Compatibility(format!(
            "checkpoint feature fingerprint {:#010x} does not match pipeline {:#010x} ({})",
            ensemble.fingerprint,
            panel.fingerprint,
            panel.feature_names.join(",")
        )));
    }
    let dim = panel.feature_names.len();
    if ensemble.members[0].input_dim() != dim {
        return Err(Error::Compatibility(format!(
            "network input dimension {} does not match {dim} features",
            ensemble.members[0].input_dim()
        )));
    }
    Ok(())
}

/// Agent portfolio: each active asset's state carries a dummy for whether
/// it was held in the previous period.
pub fn run_backtest(ensemble: &Ensemble, panel: &MarketPanel, cost: CostModel) -> Result<BacktestLedger> {
    check_compatible(ensemble, panel)?;
    let mut state = Vec::with_capacity(panel.feature_names.len());
    simulate(panel, "agent", cost, |i, k, was_held| {
        let cell = panel.assets[i].cells[k].as_ref().expect("active cell");
        state.clear();
        state.extend_from_slice(&cell.features);
        if let Some(d) = state.last_mut() {
            *d = if was_held { 1.0 } else { 0.0 };
        }
        ensemble.decide(&state)
    })
}

/// Buy-and-hold holds every active asset; momentum (reversion) holds assets
/// whose trailing mean close-to-close return is strictly positive (negative).
pub fn run_benchmark(spec: BenchmarkSpec, panel: &MarketPanel, cost: CostModel) -> Result<BacktestLedger> {
    if spec.lookback == 0 {
        return Err(Error::Argument("benchmark lookback must be at least 1".into()));
    }
    simulate(panel, spec.kind.name(), cost, |i, k, _| {
        let invest = match spec.kind {
            BenchmarkKind::BuyAndHold => true,
            BenchmarkKind::Momentum => panel.assets[i]
                .trailing_mean(k, spec.lookback)
                .is_some_and(|m| m > 0.0),
            BenchmarkKind::Reversion => panel.assets[i]
                .trailing_mean(k, spec.lookback)
                .is_some_and(|m| m < 0.0),
        };
        Ok(if invest { Action::Invest } else { Action::Cash })
    })
}

/// A ledger tagged for the summary table.
#[derive(Debug, Clone)]
pub struct ReportEntry {
    pub cost_bps: f64,
    pub portfolio_size: usize,
    pub portfolio_type: String,
    pub ledger: BacktestLedger,
}

impl ReportEntry {
    pub fn file_name(&self) -> String {
        format!("wealth_{}_{}bps.csv", self.ledger.strategy, self.cost_bps)
    }
}

/// Writes one `wealth_<strategy>_<cost>bps.csv` per entry and `summary.csv`.
pub fn write_report(entries: &[ReportEntry], out_dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let out_dir = out_dir.as_ref();
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut written = Vec::with_capacity(entries.len() + 1);

    for e in entries {
        let path = out_dir.join(e.file_name());
        let mut w = BufWriter::new(File::create(&path).map_err(|err| Error::io(&path, err))?);
        let mut body = || -> std::io::Result<()> {
            writeln!(w, "date,netReturn,wealth")?;
            for r in &e.ledger.rows {
                writeln!(w, "{},{},{}", r.date, r.net_return, r.wealth)?;
            }
            w.flush()
        };
        body().map_err(|err| Error::io(&path, err))?;
        written.push(path);
    }

    let path = out_dir.join("summary.csv");
    let mut w = BufWriter::new(File::create(&path).map_err(|err| Error::io(&path, err))?);
    let mut body = || -> Result<()> {
        let io = |err| Error::io(&path, err);
        writeln!(w, "costBps,portfolioSize,portfolioType,strategy,cumulativeReturn").map_err(io)?;
        for e in entries {
            let cr = cumulative_return(&e.ledger)?;
            writeln!(
                w,
                "{},{},{},{},{}",
                e.cost_bps, e.portfolio_size, e.portfolio_type, e.ledger.strategy, cr
            )
            .map_err(io)?;
        }
        w.flush().map_err(io)
    };
    body()?;
    written.push(path);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(xs: &[&'static str]) -> BTreeSet<&'static str> {
        xs.iter().copied().collect()
    }

    fn invest_all(xs: &[&'static str]) -> BTreeMap<&'static str, Action> {
        xs.iter().map(|x| (*x, Action::Invest)).collect()
    }

    #[test]
    fn entry_from_cash() {
        let returns = BTreeMap::from([("A", 0.02), ("B", 0.0)]);
        let s = portfolio_step(&set(&[]), &invest_all(&["A", "B"]), &returns, CostModel::new(0.0005).unwrap()).unwrap();
        assert!((s.gross_return - 0.01).abs() < 1e-15);
        assert!((s.cost_paid - 0.0005).abs() < 1e-15);
        assert!((s.net_return - 0.0095).abs() < 1e-15);
    }

    #[test]
    fn shrinking_portfolio_pays_rebalancing() {
        let returns = BTreeMap::from([("A", 0.01), ("B", 0.02)]);
        let decisions = BTreeMap::from([("A", Action::Invest), ("B", Action::Cash)]);
        let s = portfolio_step(&set(&["A", "B"]), &decisions, &returns, CostModel::new(0.0005).unwrap()).unwrap();
        assert_eq!(s.held, set(&["A"]));
        assert!((s.cost_paid - 0.0005 * 0.5).abs() < 1e-18);
    }

    #[test]
    fn all_cash_is_flat() {
        let decisions = BTreeMap::from([("A", Action::Cash)]);
        let s = portfolio_step(&set(&["A"]), &decisions, &BTreeMap::new(), CostModel::new(0.001).unwrap()).unwrap();
        assert_eq!((s.gross_return, s.cost_paid, s.net_return), (0.0, 0.0, 0.0));
    }

    #[test]
    fn missing_return_is_data_error() {
        let r = portfolio_step(&set(&[]), &invest_all(&["A"]), &BTreeMap::new(), CostModel::zero());
        assert!(matches!(r, Err(Error::Data(_))));
    }

    #[test]
    fn cumulative_examples() {
        let ledger = |rs: &[f64]| BacktestLedger {
            strategy: "x".into(),
            tickers: vec![],
            rows: rs
                .iter()
                .map(|&r| LedgerRow {
                    decision_date: NaiveDate::MIN,
                    date: NaiveDate::MIN,
                    active: vec![],
                    held: vec![],
                    weight: 0.0,
                    gross_return: r,
                    cost_paid: 0.0,
                    net_return: r,
                    wealth: 0.0,
                })
                .collect(),
        };
        assert!((cumulative_return(&ledger(&[0.1, -0.1])).unwrap() + 0.01).abs() < 1e-15);
        assert!(matches!(cumulative_return(&ledger(&[])), Err(Error::Argument(_))));
        assert_eq!(cumulative_return(&ledger(&[0.0, 0.0])).unwrap(), 0.0);
    }

    fn net_with_output(q: (f64, f64)) -> QNetwork {
        // 2 -> 2 linear map with zero weights: outputs are the biases.
        let mut net = QNetwork::zeros(&[2, 2]).unwrap();
        let (b0, b1) = (net.bias_index(0, 0), net.bias_index(0, 1));
        net.params_mut()[b0] = q.0;
        net.params_mut()[b1] = q.1;
        net
    }

    #[test]
    fn ensemble_rules() {
        let s = [0.0, 0.0];
        let yes = net_with_output((0.0, 1.0));
        let no = net_with_output((1.0, 0.0));
        assert_eq!(ensemble_decide(&[yes.clone(), yes.clone(), yes.clone()], &s).unwrap(), Action::Invest);
        assert_eq!(ensemble_decide(&[yes.clone(), no.clone()], &s).unwrap(), Action::Cash);
        assert_eq!(ensemble_decide(std::slice::from_ref(&no), &s).unwrap(), Action::Cash);
        assert_eq!(ensemble_decide(&[yes], &s).unwrap(), Action::Invest);
        assert!(ensemble_decide(&[], &s).is_err());
        assert!(ensemble_decide(&[no], &[0.0]).is_err());
    }
}
