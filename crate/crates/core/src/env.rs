//! Single-asset training environment.
//!
//! Investing earns the asset's next-period return, less the cost when the
//! agent was not already invested. Holding cash earns the mean next-period
//! return of all active assets, so cash is the opportunity cost of the
//! universe rather than zero.

use rand::Rng;

use crate::error::{Error, Result};
use crate::market_data::Partition;
use crate::panel::MarketPanel;
use crate::qnet::Action;

/// Reward for one step. `cost` is in return units (1 bp = 0.0001).
pub fn reward(
    action: Action,
    last_action: Action,
    asset_next_return: f64,
    universe_mean_next_return: f64,
    cost: f64,
) -> f64 {
    match action {
        Action::Invest => {
            let entry = 1.0 - last_action.index() as f64;
            asset_next_return - entry * cost
        }
        Action::Cash => universe_mean_next_return,
    }
}

/// One pass over one asset's usable states.
#[derive(Debug, Clone, PartialEq)]
pub struct Episode {
    pub ticker: String,
    /// Scaled states; the last entry is overwritten with the position dummy.
    pub states: Vec<Vec<f64>>,
    /// `returns[t]` is the asset's return realized after `states[t]`.
    pub returns: Vec<f64>,
    pub universe_means: Vec<f64>,
    pub cursor: usize,
    pub last_action: Action,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub reward: f64,
    /// `None` at the terminal step.
    pub next_state: Option<Vec<f64>>,
    pub terminal: bool,
}

impl Episode {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn is_done(&self) -> bool {
        self.cursor >= self.states.len()
    }

    fn state_at(&self, t: usize, position: Action) -> Vec<f64> {
        let mut s = self.states[t].clone();
        if let Some(d) = s.last_mut() {
            *d = position.index() as f64;
        }
        s
    }

    /// Current state with the dummy echoing the last action.
    pub fn state(&self) -> Result<Vec<f64>> {
        if self.is_done() {
            return Err(Error::State("episode is terminal".into()));
        }
        Ok(self.state_at(self.cursor, self.last_action))
    }

    pub fn step(&mut self, action: Action) -> Result<StepResult> {
        if self.is_done() {
            return Err(Error::State(format!(
                "step on terminal episode for {}",
                self.ticker
            )));
        }
        let t = self.cursor;
        let r = reward(
            action,
            self.last_action,
            self.returns[t],
            self.universe_means[t],
            self.cost,
        );
        self.last_action = action;
        self.cursor += 1;
        let terminal = self.is_done();
        let next_state = (!terminal).then(|| self.state_at(self.cursor, action));
        Ok(StepResult {
            reward: r,
            next_state,
            terminal,
        })
    }
}

/// Draws episodes from a panel's assets.
#[derive(Debug, Clone)]
pub struct Environment<'a> {
    panel: &'a MarketPanel,
    /// Usable date indices per asset.
    usable: Vec<Vec<usize>>,
    cost: f64,
}

impl<'a> Environment<'a> {
    /// Every asset must have at least one usable state in the panel.
    pub fn new(panel: &'a MarketPanel, cost: f64) -> Result<Self> {
        if panel.assets.is_empty() {
            return Err(Error::Argument("empty universe".into()));
        }
        if !(cost >= 0.0 && cost.is_finite()) {
            return Err(Error::Argument(format!("cost must be non-negative, got {cost}")));
        }
        let usable: Vec<Vec<usize>> = panel
            .assets
            .iter()
            .map(|a| (0..a.cells.len()).filter(|&k| a.cells[k].is_some()).collect())
            .collect();
        if let Some(i) = usable.iter().position(|u| u.is_empty()) {
            return Err(Error::Data(format!(
                "{} has no usable states in the {} split",
                panel.assets[i].ticker,
                panel.partition.as_str()
            )));
        }
        Ok(Self { panel, usable, cost })
    }

    pub fn n_assets(&self) -> usize {
        self.usable.len()
    }

    pub fn partition(&self) -> Partition {
        self.panel.partition
    }

    /// Episode over asset `i`.
    pub fn episode(&self, i: usize) -> Episode {
        let asset = &self.panel.assets[i];
        let ks = &self.usable[i];
        let mut states = Vec::with_capacity(ks.len());
        let mut returns = Vec::with_capacity(ks.len());
        let mut universe_means = Vec::with_capacity(ks.len());
        for &k in ks {
            let cell = asset.cells[k].as_ref().expect("usable cell");
            states.push(cell.features.clone());
            returns.push(cell.next_return);
            universe_means.push(self.panel.universe_mean[k].expect("active date has a mean"));
        }
        Episode {
            ticker: asset.ticker.clone(),
            states,
            returns,
            universe_means,
            cursor: 0,
            last_action: Action::Cash,
            cost: self.cost,
        }
    }

    /// Draws an asset uniformly with replacement and starts a fresh episode.
    pub fn reset<R: Rng + ?Sized>(&self, rng: &mut R) -> Episode {
        let i = rng.random_range(0..self.usable.len());
        self.episode(i)
    }
}
