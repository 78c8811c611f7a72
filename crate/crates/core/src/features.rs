//! Technical and fundamental features, and the training-set scaler.
//!
//! State layout, in order: 11 fundamentals (carried forward from the latest
//! snapshot), arithmetic moving averages of close-to-close returns, their
//! exponential counterparts, rolling standard deviations, then the position
//! dummy. The layout is fingerprinted and stored in checkpoints.

use chrono::NaiveDate;

use crate::error::{Error, Result};
use crate::market_data::{AssetSeries, FUNDAMENTAL_COLUMNS};

/// Scaler floor for degenerate columns.
pub const STD_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureSpec {
    pub ma_windows: Vec<usize>,
    pub std_windows: Vec<usize>,
    pub include_exponential: bool,
    pub position_dummy: bool,
}

impl Default for FeatureSpec {
    fn default() -> Self {
        Self {
            ma_windows: vec![5, 10, 20, 50, 100, 200],
            std_windows: vec![5, 10, 20, 50, 100],
            include_exponential: true,
            position_dummy: true,
        }
    }
}

impl FeatureSpec {
    pub fn feature_names(&self) -> Vec<String> {
        let mut names: Vec<String> = FUNDAMENTAL_COLUMNS.iter().map(|s| s.to_string()).collect();
        names.extend(self.ma_windows.iter().map(|w| format!("ma{w}")));
        if self.include_exponential {
            names.extend(self.ma_windows.iter().map(|w| format!("ema{w}")));
        }
        names.extend(self.std_windows.iter().map(|w| format!("std{w}")));
        if self.position_dummy {
            names.push("position".into());
        }
        names
    }

    /// Full state dimension including the dummy.
    pub fn dimension(&self) -> usize {
        self.feature_names().len()
    }

    /// Number of z-scaled entries (everything but the dummy).
    pub fn scaled_dimension(&self) -> usize {
        self.dimension() - usize::from(self.position_dummy)
    }

    /// Bars consumed before the first state can be formed.
    pub fn warmup(&self) -> usize {
        self.ma_windows
            .iter()
            .chain(&self.std_windows)
            .copied()
            .max()
            .unwrap_or(1)
    }

    /// 32-bit FNV-1a hash of the comma-joined feature names.
    pub fn fingerprint(&self) -> u32 {
        fnv1a32(self.feature_names().join(",").as_bytes())
    }
}

fn fnv1a32(bytes: &[u8]) -> u32 {
    bytes.iter().fold(0x811c_9dc5u32, |h, &b| {
        (h ^ u32::from(b)).wrapping_mul(0x0100_0193)
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub values: Vec<f64>,
    pub date: NaiveDate,
    pub ticker: String,
}

impl StateVector {
    pub fn with_dummy(&self, position: bool) -> StateVector {
        let mut out = self.clone();
        if let Some(last) = out.values.last_mut() {
            *last = if position { 1.0 } else { 0.0 };
        }
        out
    }
}

fn check_window(window: usize, min: usize) -> Result<()> {
    if window < min {
        return Err(Error::Argument(format!(
            "window must be at least {min}, got {window}"
        )));
    }
    Ok(())
}

/// Trailing arithmetic mean; element `j` covers `returns[j..j + window]`.
pub fn arithmetic_ma(returns: &[f64], window: usize) -> Result<Vec<f64>> {
    check_window(window, 1)?;
    let w = window as f64;
    // Shifted by the window's first value so constant windows are exact.
    Ok(returns
        .windows(window)
        .map(|xs| xs[0] + xs.iter().map(|x| x - xs[0]).sum::<f64>() / w)
        .collect())
}

/// Full smoothing recursion `y[t] = alpha * x[t] + (1 - alpha) * y[t-1]`,
/// `y[0] = x[0]`, evaluated as `y + alpha * (x - y)`.
pub(crate) fn smooth(returns: &[f64], alpha: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(returns.len());
    let mut y = match returns.first() {
        Some(&x0) => x0,
        None => return out,
    };
    out.push(y);
    for &x in &returns[1..] {
        y = if alpha == 1.0 { x } else { y + alpha * (x - y) };
        out.push(y);
    }
    out
}

/// Recursive exponential smoothing with `alpha = 2 / (window + 1)`, seeded at
/// the first observation, emitted from index `window - 1` on.
pub fn exponential_ma(returns: &[f64], window: usize) -> Result<Vec<f64>> {
    check_window(window, 1)?;
    if returns.is_empty() {
        return Err(Error::Argument("exponential_ma needs a non-empty sequence".into()));
    }
    let alpha = 2.0 / (window as f64 + 1.0);
    let mut all = smooth(returns, alpha);
    all.drain(..(window - 1).min(all.len()));
    Ok(all)
}

/// Trailing sample standard deviation (divisor `window - 1`).
pub fn rolling_std(returns: &[f64], window: usize) -> Result<Vec<f64>> {
    check_window(window, 2)?;
    if returns.len() < window {
        return Ok(Vec::new());
    }
    Ok(returns
        .windows(window)
        .map(sample_std)
        .collect())
}

fn sample_std(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    (ss / (n - 1.0)).sqrt()
}

/// Close-to-close returns; element `j` is the return into bar `j + 1`.
pub fn close_to_close(series: &AssetSeries) -> Vec<f64> {
    series
        .bars
        .windows(2)
        .map(|w| w[1].close / w[0].close - 1.0)
        .collect()
}

/// Builds one unscaled state per bar from index `warmup` on. The dummy
/// entry is left at 0. Dates before the first fundamental snapshot are
/// skipped.
pub fn assemble_states(series: &AssetSeries, spec: &FeatureSpec) -> Result<Vec<StateVector>> {
    let warmup = spec.warmup();
    if series.bars.len() < warmup + 1 {
        return Err(Error::Argument(format!(
            "{}: series too short, need at least {} bars, got {}",
            series.ticker,
            warmup + 1,
            series.bars.len()
        )));
    }
    let returns = close_to_close(series);

    // Each indicator column, aligned so that `col[t - w]` is the value at bar t.
    let mut columns: Vec<(usize, Vec<f64>)> = Vec::new();
    for &w in &spec.ma_windows {
        columns.push((w, arithmetic_ma(&returns, w)?));
    }
    if spec.include_exponential {
        for &w in &spec.ma_windows {
            columns.push((w, exponential_ma(&returns, w)?));
        }
    }
    for &w in &spec.std_windows {
        columns.push((w, rolling_std(&returns, w)?));
    }

    let dim = spec.dimension();
    let mut states = Vec::with_capacity(series.bars.len() - warmup);
    let mut snap_idx: Option<usize> = None;
    for (t, bar) in series.bars.iter().enumerate() {
        while series
            .fundamentals
            .get(snap_idx.map_or(0, |i| i + 1))
            .is_some_and(|f| f.date <= bar.date)
        {
            snap_idx = Some(snap_idx.map_or(0, |i| i + 1));
        }
        if t < warmup {
            continue;
        }
        let Some(si) = snap_idx else { continue };

        let mut values = Vec::with_capacity(dim);
        values.extend(series.fundamentals[si].values());
        for (w, col) in &columns {
            values.push(col[t - w]);
        }
        if spec.position_dummy {
            values.push(0.0);
        }
        states.push(StateVector {
            values,
            date: bar.date,
            ticker: series.ticker.clone(),
        });
    }
    Ok(states)
}

/// Feature-wise z-scaling fitted on training rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Scaler {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl Scaler {
    /// Fits on the leading `n_scaled` entries of each row.
    pub fn fit_rows<'a>(rows: impl IntoIterator<Item = &'a [f64]>, n_scaled: usize) -> Result<Self> {
        let rows: Vec<&[f64]> = rows.into_iter().collect();
        if rows.len() < 2 {
            return Err(Error::Argument(format!(
                "scaler needs at least 2 training rows, got {}",
                rows.len()
            )));
        }
        if let Some(bad) = rows.iter().find(|r| r.len() < n_scaled) {
            return Err(Error::Argument(format!(
                "row of length {} shorter than {n_scaled} scaled features",
                bad.len()
            )));
        }
        let n = rows.len() as f64;
        let mut means = vec![0.0; n_scaled];
        for r in &rows {
            for (m, x) in means.iter_mut().zip(r.iter()) {
                *m += x;
            }
        }
        means.iter_mut().for_each(|m| *m /= n);
        let mut ss = vec![0.0; n_scaled];
        for r in &rows {
            for ((s, x), m) in ss.iter_mut().zip(r.iter()).zip(&means) {
                *s += (x - m) * (x - m);
            }
        }
        let stds = ss
            .into_iter()
            .map(|s| (s / (n - 1.0)).sqrt().max(STD_FLOOR))
            .collect();
        Ok(Self { means, stds })
    }

    pub fn len(&self) -> usize {
        self.means.len()
    }

    pub fn is_empty(&self) -> bool {
        self.means.is_empty()
    }

    /// Scales the leading entries in place; anything after them (the dummy)
    /// passes through.
    pub fn apply_in_place(&self, values: &mut [f64]) {
        for ((v, m), s) in values.iter_mut().zip(&self.means).zip(&self.stds) {
            *v = (*v - m) / s;
        }
    }

    pub fn apply(&self, state: &StateVector) -> StateVector {
        let mut out = state.clone();
        self.apply_in_place(&mut out.values);
        out
    }
}

/// Fits a scaler on training states, excluding the trailing dummy.
pub fn fit_scaler(train_states: &[StateVector]) -> Result<Scaler> {
    let n_scaled = train_states
        .first()
        .map(|s| s.values.len().saturating_sub(1))
        .unwrap_or(0);
    Scaler::fit_rows(train_states.iter().map(|s| s.values.as_slice()), n_scaled)
}

pub fn apply_scaler(scaler: &Scaler, state: &StateVector) -> StateVector {
    scaler.apply(state)
}
