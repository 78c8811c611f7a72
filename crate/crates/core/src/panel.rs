//! Aligns scaled states, realized returns and trailing returns on a common
//! calendar for one split.
//!
//! Features are computed on each asset's full history, so validation and
//! test states use pre-split data for their warm-up. A decision date and
//! the date its return is realized always lie in the same split.

use chrono::NaiveDate;

use crate::error::{Error, Result};
use crate::features::{assemble_states, close_to_close, FeatureSpec, Scaler, StateVector};
use crate::market_data::{Partition, PriceBar, SplitSpec, Universe};

/// Which intraday return an investment earns over the next period.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReturnConvention {
    /// Enter at the next day's open, exit at its close.
    #[default]
    OpenToClose,
    CloseToClose,
}

impl std::str::FromStr for ReturnConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "opentoclose" => Ok(ReturnConvention::OpenToClose),
            "closetoclose" => Ok(ReturnConvention::CloseToClose),
            other => Err(Error::Argument(format!(
                "unknown return convention `{other}` (expected open_to_close or close_to_close)"
            ))),
        }
    }
}

impl ReturnConvention {
    pub fn as_str(&self) -> &'static str {
        match self {
            ReturnConvention::OpenToClose => "open_to_close",
            ReturnConvention::CloseToClose => "close_to_close",
        }
    }
}

#[derive(Debug, Clone)]
struct PreparedAsset {
    ticker: String,
    bars: Vec<PriceBar>,
    /// Close-to-close returns, element `j` is the return into bar `j + 1`.
    returns: Vec<f64>,
    /// Unscaled states with the bar index they belong to.
    states: Vec<(usize, StateVector)>,
}

/// A universe with features assembled, ready to be cut into panels.
#[derive(Debug, Clone)]
pub struct PreparedUniverse {
    pub spec: FeatureSpec,
    pub split: SplitSpec,
    pub convention: ReturnConvention,
    assets: Vec<PreparedAsset>,
}

impl PreparedUniverse {
    /// Assets shorter than the warm-up contribute no states.
    pub fn new(
        universe: &Universe,
        split: SplitSpec,
        spec: FeatureSpec,
        convention: ReturnConvention,
    ) -> Result<Self> {
        let warmup = spec.warmup();
        let mut assets = Vec::with_capacity(universe.len());
        for series in &universe.assets {
            let series = series.truncate_after(split.end);
            let states = if series.bars.len() > warmup {
                let by_date: std::collections::HashMap<NaiveDate, usize> = series
                    .bars
                    .iter()
                    .enumerate()
                    .map(|(i, b)| (b.date, i))
                    .collect();
                assemble_states(&series, &spec)?
                    .into_iter()
                    .map(|s| (by_date[&s.date], s))
                    .collect()
            } else {
                Vec::new()
            };
            assets.push(PreparedAsset {
                ticker: series.ticker.clone(),
                returns: close_to_close(&series),
                bars: series.bars,
                states,
            });
        }
        Ok(Self {
            spec,
            split,
            convention,
            assets,
        })
    }

    pub fn tickers(&self) -> Vec<&str> {
        self.assets.iter().map(|a| a.ticker.as_str()).collect()
    }

    /// Unscaled states dated in the given split, across all assets.
    pub fn states_in(&self, partition: Partition) -> impl Iterator<Item = &StateVector> {
        let split = self.split;
        self.assets
            .iter()
            .flat_map(|a| a.states.iter().map(|(_, s)| s))
            .filter(move |s| split.partition_of(s.date) == Some(partition))
    }

    /// Scaler fitted on training-split states only.
    pub fn fit_scaler(&self) -> Result<Scaler> {
        Scaler::fit_rows(
            self.states_in(Partition::Train).map(|s| s.values.as_slice()),
            self.spec.scaled_dimension(),
        )
    }

    pub fn panel(&self, partition: Partition, scaler: &Scaler) -> Result<MarketPanel> {
        if scaler.len() != self.spec.scaled_dimension() {
            return Err(Error::Compatibility(format!(
                "scaler has {} entries but the feature layout scales {}",
                scaler.len(),
                self.spec.scaled_dimension()
            )));
        }
        let in_split = |d: NaiveDate| self.split.partition_of(d) == Some(partition);

        let mut calendar: Vec<NaiveDate> = self
            .assets
            .iter()
            .flat_map(|a| a.bars.iter().map(|b| b.date))
            .filter(|d| in_split(*d))
            .collect();
        calendar.sort_unstable();
        calendar.dedup();
        let n_dates = calendar.len().saturating_sub(1);
        let dates = calendar[..n_dates].to_vec();
        let realized = calendar.get(1..).map(<[_]>::to_vec).unwrap_or_default();
        let position = |d: NaiveDate| calendar.binary_search(&d).ok();

        let mut panel_assets = Vec::with_capacity(self.assets.len());
        for asset in &self.assets {
            let mut cells: Vec<Option<Cell>> = vec![None; n_dates];
            for (bar_idx, state) in &asset.states {
                let Some(k) = position(state.date) else { continue };
                if k >= n_dates {
                    continue;
                }
                let Some(next) = asset.bars.get(bar_idx + 1) else { continue };
                if next.date != calendar[k + 1] {
                    continue;
                }
                let now = &asset.bars[*bar_idx];
                let next_return = match self.convention {
                    ReturnConvention::OpenToClose => next.open_to_close(),
                    ReturnConvention::CloseToClose => next.close / now.close - 1.0,
                };
                let mut features = state.values.clone();
                scaler.apply_in_place(&mut features);
                cells[k] = Some(Cell {
                    features,
                    next_return,
                    bar_index: *bar_idx,
                });
            }
            panel_assets.push(PanelAsset {
                ticker: asset.ticker.clone(),
                returns: asset.returns.clone(),
                cells,
            });
        }

        let universe_mean = (0..n_dates)
            .map(|k| {
                let rs: Vec<f64> = panel_assets
                    .iter()
                    .filter_map(|a| a.cells[k].as_ref().map(|c| c.next_return))
                    .collect();
                (!rs.is_empty()).then(|| rs.iter().sum::<f64>() / rs.len() as f64)
            })
            .collect();

        Ok(MarketPanel {
            partition,
            fingerprint: self.spec.fingerprint(),
            feature_names: self.spec.feature_names(),
            dates,
            realized,
            assets: panel_assets,
            universe_mean,
        })
    }
}

/// One asset on one decision date.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    /// Scaled state; the trailing dummy slot is 0.
    pub features: Vec<f64>,
    /// Return realized on the next calendar date.
    pub next_return: f64,
    /// Index of the decision-date bar in the asset's series.
    pub bar_index: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PanelAsset {
    pub ticker: String,
    /// Full-history close-to-close returns (element `j` is the return into bar `j + 1`).
    pub returns: Vec<f64>,
    /// Indexed by decision date; `None` where the asset is inactive.
    pub cells: Vec<Option<Cell>>,
}

impl PanelAsset {
    /// Mean of the `lookback` close-to-close returns ending at the cell's bar.
    pub fn trailing_mean(&self, k: usize, lookback: usize) -> Option<f64> {
        let cell = self.cells.get(k)?.as_ref()?;
        if lookback == 0 || cell.bar_index < lookback {
            return None;
        }
        let window = &self.returns[cell.bar_index - lookback..cell.bar_index];
        Some(window.iter().sum::<f64>() / lookback as f64)
    }
}

/// All assets of a universe on the decision dates of one split.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketPanel {
    pub partition: Partition,
    pub fingerprint: u32,
    pub feature_names: Vec<String>,
    /// Decision dates.
    pub dates: Vec<NaiveDate>,
    /// `realized[k]` is the date on which the decision at `dates[k]` pays off.
    pub realized: Vec<NaiveDate>,
    pub assets: Vec<PanelAsset>,
    /// Mean next-period return over the assets active at each date.
    pub universe_mean: Vec<Option<f64>>,
}

impl MarketPanel {
    pub fn n_dates(&self) -> usize {
        self.dates.len()
    }

    pub fn active(&self, k: usize) -> impl Iterator<Item = (usize, &Cell)> {
        self.assets
            .iter()
            .enumerate()
            .filter_map(move |(i, a)| a.cells[k].as_ref().map(|c| (i, c)))
    }

    pub fn tickers(&self) -> Vec<String> {
        self.assets.iter().map(|a| a.ticker.clone()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market_data::{generate_synthetic, select_universe, Selection};

    fn prepared() -> PreparedUniverse {
        let all = generate_synthetic(4, 400, 0.3, 0.01, 5).unwrap();
        let universe = select_universe(&all, Selection::All, 0, 0).unwrap();
        let d = &universe.assets[0].bars;
        let split = SplitSpec::new(d[300].date, d[350].date, d[399].date).unwrap();
        PreparedUniverse::new(&universe, split, FeatureSpec::default(), ReturnConvention::OpenToClose)
            .unwrap()
    }

    #[test]
    fn splits_do_not_share_dates() {
        let p = prepared();
        let scaler = p.fit_scaler().unwrap();
        let panels: Vec<MarketPanel> = [Partition::Train, Partition::Validation, Partition::Test]
            .iter()
            .map(|&part| p.panel(part, &scaler).unwrap())
            .collect();
        assert_eq!(panels[0].n_dates(), 299); // last train date has no in-split successor
        assert_eq!(panels[1].n_dates(), 49);
        assert_eq!(panels[2].n_dates(), 49);
        for w in panels.windows(2) {
            assert!(w[0].realized.last().unwrap() < w[1].dates.first().unwrap());
        }
    }

    #[test]
    fn cells_hold_next_day_returns() {
        let p = prepared();
        let scaler = p.fit_scaler().unwrap();
        let panel = p.panel(Partition::Validation, &scaler).unwrap();
        let a = &panel.assets[2];
        let c = a.cells[3].as_ref().unwrap();
        let bars = &p.assets[2].bars;
        assert_eq!(bars[c.bar_index].date, panel.dates[3]);
        assert_eq!(c.next_return, bars[c.bar_index + 1].close / bars[c.bar_index + 1].open - 1.0);
        assert_eq!(c.features.len(), 29);
        let r = &p.assets[2].returns;
        let expected = r[c.bar_index - 5..c.bar_index].iter().sum::<f64>() / 5.0;
        assert_eq!(a.trailing_mean(3, 5), Some(expected));
    }

    #[test]
    fn scaler_length_is_checked() {
        let p = prepared();
        let bad = Scaler { means: vec![0.0; 3], stds: vec![1.0; 3] };
        assert!(matches!(p.panel(Partition::Test, &bad), Err(Error::Compatibility(_))));
    }
}
