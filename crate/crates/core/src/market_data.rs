//! Price and fundamental ingestion, universe selection, chronological
//! splitting and a synthetic market generator.
//!
//! Missing values are handled per asset: a row with an empty (or `NA`/`NaN`)
//! cell is dropped for its own ticker only, so other assets keep that date.

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use chrono::{Datelike, Duration, NaiveDate, Weekday};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub const PRICE_COLUMNS: [&str; 7] = ["date", "ticker", "open", "high", "low", "close", "volume"];

/// Fundamental columns in file and feature order.
pub const FUNDAMENTAL_COLUMNS: [&str; 11] = [
    "salesPerShare",
    "grossMargin",
    "operatingMargin",
    "netProfitMargin",
    "returnOnEquity",
    "returnOnAssets",
    "currentRatio",
    "debtRatio",
    "marketCap",
    "bookToMarket",
    "latestClose",
];

const DATE_FORMAT: &str = "%Y-%m-%d";

/// Minimum history accepted by the synthetic generator (200-day warm-up plus trading).
pub const MIN_SYNTHETIC_DAYS: usize = 250;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriceBar {
    pub date: NaiveDate,
    pub open: f64,
    pub high: f64,
    pub low: f64,
    pub close: f64,
    pub volume: f64,
}

impl PriceBar {
    pub fn validate(&self) -> Result<()> {
        let prices = [self.open, self.high, self.low, self.close];
        if prices.iter().any(|p| !(p.is_finite() && *p > 0.0)) {
            return Err(Error::Validation(format!(
                "{}: prices must be strictly positive, got open={} high={} low={} close={}",
                self.date, self.open, self.high, self.low, self.close
            )));
        }
        if self.low > self.open.min(self.close) || self.high < self.open.max(self.close) {
            return Err(Error::Validation(format!(
                "{}: inconsistent range, low={} high={} open={} close={}",
                self.date, self.low, self.high, self.open, self.close
            )));
        }
        if !(self.volume.is_finite() && self.volume >= 0.0) {
            return Err(Error::Validation(format!(
                "{}: volume must be non-negative, got {}",
                self.date, self.volume
            )));
        }
        Ok(())
    }

    /// Return from the open to the close of this bar.
    pub fn open_to_close(&self) -> f64 {
        self.close / self.open - 1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FundamentalSnapshot {
    pub date: NaiveDate,
    pub sales_per_share: f64,
    pub gross_margin: f64,
    pub operating_margin: f64,
    pub net_profit_margin: f64,
    pub return_on_equity: f64,
    pub return_on_assets: f64,
    pub current_ratio: f64,
    pub debt_ratio: f64,
    pub market_cap: f64,
    pub book_to_market: f64,
    pub latest_close: f64,
}

impl FundamentalSnapshot {
    /// Values in [`FUNDAMENTAL_COLUMNS`] order.
    pub fn values(&self) -> [f64; 11] {
        [
            self.sales_per_share,
            self.gross_margin,
            self.operating_margin,
            self.net_profit_margin,
            self.return_on_equity,
            self.return_on_assets,
            self.current_ratio,
            self.debt_ratio,
            self.market_cap,
            self.book_to_market,
            self.latest_close,
        ]
    }

    pub fn from_values(date: NaiveDate, v: [f64; 11]) -> Self {
        Self {
            date,
            sales_per_share: v[0],
            gross_margin: v[1],
            operating_margin: v[2],
            net_profit_margin: v[3],
            return_on_equity: v[4],
            return_on_assets: v[5],
            current_ratio: v[6],
            debt_ratio: v[7],
            market_cap: v[8],
            book_to_market: v[9],
            latest_close: v[10],
        }
    }
}

/// One asset's gap-free history.
#[derive(Debug, Clone, PartialEq)]
pub struct AssetSeries {
    pub ticker: String,
    pub bars: Vec<PriceBar>,
    pub fundamentals: Vec<FundamentalSnapshot>,
}

impl AssetSeries {
    pub fn new(
        ticker: impl Into<String>,
        bars: Vec<PriceBar>,
        fundamentals: Vec<FundamentalSnapshot>,
    ) -> Result<Self> {
        let ticker = ticker.into();
        if bars.windows(2).any(|w| w[0].date >= w[1].date) {
            return Err(Error::Validation(format!(
                "{ticker}: bar dates must be strictly increasing"
            )));
        }
        if fundamentals.windows(2).any(|w| w[0].date >= w[1].date) {
            return Err(Error::Validation(format!(
                "{ticker}: fundamental dates must be strictly increasing"
            )));
        }
        Ok(Self {
            ticker,
            bars,
            fundamentals,
        })
    }

    /// Market capitalization of the last fundamental snapshot, if any.
    pub fn terminal_market_cap(&self) -> Option<f64> {
        self.fundamentals.last().map(|f| f.market_cap)
    }

    /// Drops bars and snapshots dated after `end`.
    pub fn truncate_after(&self, end: NaiveDate) -> AssetSeries {
        AssetSeries {
            ticker: self.ticker.clone(),
            bars: self.bars.iter().filter(|b| b.date <= end).copied().collect(),
            fundamentals: self
                .fundamentals
                .iter()
                .filter(|f| f.date <= end)
                .copied()
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Selection {
    Big,
    Small,
    Random,
    All,
}

impl Selection {
    pub fn as_str(&self) -> &'static str {
        match self {
            Selection::Big => "big",
            Selection::Small => "small",
            Selection::Random => "random",
            Selection::All => "all",
        }
    }
}

impl std::str::FromStr for Selection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "big" => Ok(Selection::Big),
            "small" => Ok(Selection::Small),
            "random" => Ok(Selection::Random),
            "all" => Ok(Selection::All),
            other => Err(Error::Argument(format!(
                "unknown universe selection `{other}` (expected big, small, random or all)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Universe {
    /// Sorted by ticker.
    pub assets: Vec<AssetSeries>,
    pub selection: Selection,
    pub k: usize,
}

impl Universe {
    pub fn tickers(&self) -> Vec<&str> {
        self.assets.iter().map(|a| a.ticker.as_str()).collect()
    }

    pub fn len(&self) -> usize {
        self.assets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assets.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Partition {
    Train,
    Validation,
    Test,
}

impl Partition {
    pub fn as_str(&self) -> &'static str {
        match self {
            Partition::Train => "train",
            Partition::Validation => "validation",
            Partition::Test => "test",
        }
    }
}

/// Chronological split boundaries. Training is everything before
/// `validation_start`; test runs through `end` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitSpec {
    pub validation_start: NaiveDate,
    pub test_start: NaiveDate,
    pub end: NaiveDate,
}

impl SplitSpec {
    pub fn new(validation_start: NaiveDate, test_start: NaiveDate, end: NaiveDate) -> Result<Self> {
        if validation_start > test_start || test_start > end {
            return Err(Error::Argument(format!(
                "split dates must satisfy validationStart <= testStart <= end, got {validation_start}, {test_start}, {end}"
            )));
        }
        Ok(Self {
            validation_start,
            test_start,
            end,
        })
    }

    /// Which split a date belongs to, `None` past `end`.
    pub fn partition_of(&self, date: NaiveDate) -> Option<Partition> {
        if date < self.validation_start {
            Some(Partition::Train)
        } else if date < self.test_start {
            Some(Partition::Validation)
        } else if date <= self.end {
            Some(Partition::Test)
        } else {
            None
        }
    }
}

pub type PriceMap = BTreeMap<String, Vec<PriceBar>>;
pub type FundamentalMap = BTreeMap<String, Vec<FundamentalSnapshot>>;

fn is_missing(cell: &str) -> bool {
    let c = cell.trim();
    c.is_empty() || c.eq_ignore_ascii_case("na") || c.eq_ignore_ascii_case("nan")
}

fn open_csv(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(file))
}

/// Maps each required column to its index in the header.
fn column_indices(path: &Path, headers: &csv::StringRecord, required: &[&str]) -> Result<Vec<usize>> {
    required
        .iter()
        .map(|name| {
            headers.iter().position(|h| h == *name).ok_or_else(|| {
                Error::Schema(format!("{}: missing column `{name}`", path.display()))
            })
        })
        .collect()
}

fn parse_date(path: &Path, line: u64, cell: &str) -> Result<NaiveDate> {
    NaiveDate::parse_from_str(cell, DATE_FORMAT).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: format!("invalid date `{cell}`: {e}"),
    })
}

fn parse_number(path: &Path, line: u64, column: &str, cell: &str) -> Result<f64> {
    cell.parse::<f64>().map_err(|_| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: format!("invalid number `{cell}` in column `{column}`"),
    })
}

fn parse_ticker(path: &Path, line: u64, cell: &str) -> Result<String> {
    if cell.is_empty() {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line,
            msg: "empty ticker".into(),
        });
    }
    Ok(cell.to_string())
}

fn record_line(record: &csv::StringRecord) -> u64 {
    record.position().map(|p| p.line()).unwrap_or(0)
}

/// Reads a prices CSV (`date,ticker,open,high,low,close,volume`).
///
/// Rows with a missing cell are dropped for that ticker. Bars come back
/// sorted by date per ticker.
pub fn load_prices(path: impl AsRef<Path>) -> Result<PriceMap> {
    let path = path.as_ref();
    let mut reader = open_csv(path)?;
    let headers = reader
        .headers()
        .map_err(|e| Error::Schema(format!("{}: {e}", path.display())))?
        .clone();
    let cols = column_indices(path, &headers, &PRICE_COLUMNS)?;

    let mut seen: HashSet<(String, NaiveDate)> = HashSet::new();
    let mut out = PriceMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e.position().map(|p| p.line()).unwrap_or(0),
            msg: e.to_string(),
        })?;
        let line = record_line(&record);
        let cell = |i: usize| record.get(cols[i]).unwrap_or("");

        let date = parse_date(path, line, cell(0))?;
        let ticker = parse_ticker(path, line, cell(1))?;
        if !seen.insert((ticker.clone(), date)) {
            return Err(Error::Validation(format!(
                "{}: line {line}: duplicate row for ({date}, {ticker})",
                path.display()
            )));
        }
        if (2..7).any(|i| is_missing(cell(i))) {
            continue;
        }
        let mut v = [0.0; 5];
        for (slot, i) in v.iter_mut().zip(2..7) {
            *slot = parse_number(path, line, PRICE_COLUMNS[i], cell(i))?;
        }
        let bar = PriceBar {
            date,
            open: v[0],
            high: v[1],
            low: v[2],
            close: v[3],
            volume: v[4],
        };
        bar.validate().map_err(|e| match e {
            Error::Validation(msg) => {
                Error::Validation(format!("{}: line {line}: {ticker} {msg}", path.display()))
            }
            other => other,
        })?;
        out.entry(ticker).or_default().push(bar);
    }
    for bars in out.values_mut() {
        bars.sort_by_key(|b| b.date);
    }
    Ok(out)
}

/// Reads a fundamentals CSV (`date,ticker` plus the eleven fundamental columns).
pub fn load_fundamentals(path: impl AsRef<Path>) -> Result<FundamentalMap> {
    let path = path.as_ref();
    let mut reader = open_csv(path)?;
    let headers = reader
        .headers()
        .map_err(|e| Error::Schema(format!("{}: {e}", path.display())))?
        .clone();
    let mut required = vec!["date", "ticker"];
    required.extend(FUNDAMENTAL_COLUMNS);
    let cols = column_indices(path, &headers, &required)?;

    let mut seen: HashSet<(String, NaiveDate)> = HashSet::new();
    let mut out = FundamentalMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e.position().map(|p| p.line()).unwrap_or(0),
            msg: e.to_string(),
        })?;
        let line = record_line(&record);
        let cell = |i: usize| record.get(cols[i]).unwrap_or("");

        let date = parse_date(path, line, cell(0))?;
        let ticker = parse_ticker(path, line, cell(1))?;
        if !seen.insert((ticker.clone(), date)) {
            return Err(Error::Validation(format!(
                "{}: line {line}: duplicate row for ({date}, {ticker})",
                path.display()
            )));
        }
        if (2..13).any(|i| is_missing(cell(i))) {
            continue;
        }
        let mut values = [0.0; 11];
        for (j, slot) in values.iter_mut().enumerate() {
            *slot = parse_number(path, line, FUNDAMENTAL_COLUMNS[j], cell(j + 2))?;
        }
        let snap = FundamentalSnapshot::from_values(date, values);
        if !(snap.market_cap > 0.0) {
            return Err(Error::Validation(format!(
                "{}: line {line}: marketCap must be positive, got {}",
                path.display(),
                snap.market_cap
            )));
        }
        out.entry(ticker).or_default().push(snap);
    }
    for snaps in out.values_mut() {
        snaps.sort_by_key(|s| s.date);
    }
    Ok(out)
}

/// Joins prices with fundamentals. Tickers without prices are ignored;
/// tickers without fundamentals get an empty snapshot list.
pub fn build_assets(prices: PriceMap, mut fundamentals: FundamentalMap) -> Result<BTreeMap<String, AssetSeries>> {
    prices
        .into_iter()
        .map(|(ticker, bars)| {
            let snaps = fundamentals.remove(&ticker).unwrap_or_default();
            AssetSeries::new(ticker.clone(), bars, snaps).map(|s| (ticker, s))
        })
        .collect()
}

/// Picks `k` assets by terminal market capitalization or at random.
///
/// `big`/`small` break capitalization ties by ticker; `random` draws without
/// replacement from the ticker-sorted list. The result is sorted by ticker.
pub fn select_universe(
    all: &BTreeMap<String, AssetSeries>,
    selection: Selection,
    k: usize,
    seed: u64,
) -> Result<Universe> {
    let n = all.len();
    if selection != Selection::All && k > n {
        return Err(Error::Argument(format!(
            "cannot select {k} assets from a universe of {n}"
        )));
    }
    if selection != Selection::All && k == 0 {
        return Err(Error::Argument("universe size k must be positive".into()));
    }

    let mut picked: Vec<&AssetSeries> = match selection {
        Selection::All => all.values().collect(),
        Selection::Random => {
            let assets: Vec<&AssetSeries> = all.values().collect();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            index::sample(&mut rng, n, k)
                .into_iter()
                .map(|i| assets[i])
                .collect()
        }
        Selection::Big | Selection::Small => {
            let mut ranked = all
                .values()
                .map(|a| {
                    a.terminal_market_cap().map(|cap| (cap, a)).ok_or_else(|| {
                        Error::Data(format!(
                            "{}: no fundamental snapshot to rank by market capitalization",
                            a.ticker
                        ))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            ranked.sort_by(|(ca, a), (cb, b)| {
                let by_cap = ca.total_cmp(cb);
                let by_cap = if selection == Selection::Big {
                    by_cap.reverse()
                } else {
                    by_cap
                };
                by_cap.then_with(|| a.ticker.cmp(&b.ticker))
            });
            ranked.into_iter().take(k).map(|(_, a)| a).collect()
        }
    };
    picked.sort_by(|a, b| a.ticker.cmp(&b.ticker));
    let k = if selection == Selection::All { n } else { k };
    Ok(Universe {
        assets: picked.into_iter().cloned().collect(),
        selection,
        k,
    })
}

/// Partitions bars and snapshots by date into (train, validation, test).
/// Anything dated after `spec.end` is dropped.
pub fn split(series: &AssetSeries, spec: &SplitSpec) -> (AssetSeries, AssetSeries, AssetSeries) {
    let part = |p: Partition| AssetSeries {
        ticker: series.ticker.clone(),
        bars: series
            .bars
            .iter()
            .filter(|b| spec.partition_of(b.date) == Some(p))
            .copied()
            .collect(),
        fundamentals: series
            .fundamentals
            .iter()
            .filter(|f| spec.partition_of(f.date) == Some(p))
            .copied()
            .collect(),
    };
    (
        part(Partition::Train),
        part(Partition::Validation),
        part(Partition::Test),
    )
}

/// First trading day of synthetic markets.
pub fn synthetic_start_date() -> NaiveDate {
    NaiveDate::from_ymd_opt(2010, 1, 4).expect("valid date")
}

fn next_weekday(d: NaiveDate) -> NaiveDate {
    let mut next = d + Duration::days(1);
    while matches!(next.weekday(), Weekday::Sat | Weekday::Sun) {
        next += Duration::days(1);
    }
    next
}

/// Trading days between fundamental snapshots.
const QUARTER: usize = 63;
const TRAILING: usize = 5;

/// Generates a panel of weekday-dated assets whose daily returns carry a
/// linear signal in the trailing five-day mean return:
/// `r[t+1] = beta * mean(r[t-4..=t]) + noise`.
///
/// Even-indexed assets get `beta = +signal_strength` (momentum), odd-indexed
/// `beta = -signal_strength` (reversion). Each bar opens at the previous close,
/// so open-to-close and close-to-close returns coincide. Fundamentals are
/// quarterly, positive and slowly drifting; book-to-market sits in a low band
/// for momentum assets and a high band for reversion assets, which makes the
/// regime observable from the state.
pub fn generate_synthetic(
    n_assets: usize,
    n_days: usize,
    signal_strength: f64,
    noise_std: f64,
    seed: u64,
) -> Result<BTreeMap<String, AssetSeries>> {
    if n_days < MIN_SYNTHETIC_DAYS {
        return Err(Error::Argument(format!(
            "nDays must be at least {MIN_SYNTHETIC_DAYS} (200-day warm-up plus trading), got {n_days}"
        )));
    }
    if !(noise_std >= 0.0 && noise_std.is_finite()) || !signal_strength.is_finite() {
        return Err(Error::Argument(format!(
            "noiseStd must be finite and non-negative and signalStrength finite, got {noise_std}, {signal_strength}"
        )));
    }

    let mut dates = Vec::with_capacity(n_days);
    let mut d = synthetic_start_date();
    for _ in 0..n_days {
        dates.push(d);
        d = next_weekday(d);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = BTreeMap::new();
    for i in 0..n_assets {
        let ticker = format!("SYN{i:03}");
        let momentum = i % 2 == 0;
        let beta = if momentum { signal_strength } else { -signal_strength };

        let mut bars = Vec::with_capacity(n_days);
        let mut returns: Vec<f64> = Vec::with_capacity(n_days);
        let mut close = 20.0 + 80.0 * rng.random::<f64>();
        for (t, &date) in dates.iter().enumerate() {
            let open = close;
            if t > 0 {
                let tail = &returns[returns.len().saturating_sub(TRAILING)..];
                let trailing = if tail.is_empty() {
                    0.0
                } else {
                    tail.iter().sum::<f64>() / tail.len() as f64
                };
                let eps: f64 = rng.sample(StandardNormal);
                let r = (beta * trailing + noise_std * eps).max(-0.5);
                returns.push(r);
                close = open * (1.0 + r);
            }
            let wick_up: f64 = rng.sample::<f64, _>(StandardNormal).abs();
            let wick_down: f64 = rng.sample::<f64, _>(StandardNormal).abs();
            let vol_noise: f64 = rng.sample(StandardNormal);
            let high = open.max(close) * (1.0 + 0.5 * noise_std * wick_up);
            let low = open.min(close) * (1.0 - (0.5 * noise_std * wick_down).min(0.5));
            bars.push(PriceBar {
                date,
                open,
                high,
                low,
                close,
                volume: (1.0e6 * (0.3 * vol_noise).exp()).round(),
            });
        }

        let uniform = |rng: &mut ChaCha8Rng, lo: f64, hi: f64| lo + (hi - lo) * rng.random::<f64>();
        let mut levels = [
            uniform(&mut rng, 5.0, 50.0),
            uniform(&mut rng, 0.2, 0.6),
            uniform(&mut rng, 0.05, 0.3),
            uniform(&mut rng, 0.02, 0.2),
            uniform(&mut rng, 0.05, 0.25),
            uniform(&mut rng, 0.02, 0.12),
            uniform(&mut rng, 0.8, 2.5),
            uniform(&mut rng, 0.2, 0.7),
        ];
        let mut shares = uniform(&mut rng, 1.0e7, 1.0e9);
        let mut book_to_market = if momentum {
            uniform(&mut rng, 0.2, 0.5)
        } else {
            uniform(&mut rng, 0.8, 1.4)
        };

        let mut fundamentals = Vec::with_capacity(n_days / QUARTER + 1);
        for t in (0..n_days).step_by(QUARTER) {
            if t > 0 {
                for level in levels.iter_mut() {
                    *level *= (0.01 * rng.sample::<f64, _>(StandardNormal)).exp();
                }
                shares *= (0.01 * rng.sample::<f64, _>(StandardNormal)).exp();
                book_to_market *= (0.01 * rng.sample::<f64, _>(StandardNormal)).exp();
            }
            let bar = &bars[t];
            fundamentals.push(FundamentalSnapshot {
                date: bar.date,
                sales_per_share: levels[0],
                gross_margin: levels[1],
                operating_margin: levels[2],
                net_profit_margin: levels[3],
                return_on_equity: levels[4],
                return_on_assets: levels[5],
                current_ratio: levels[6],
                debt_ratio: levels[7],
                market_cap: shares * bar.close,
                book_to_market,
                latest_close: bar.close,
            });
        }
        out.insert(ticker.clone(), AssetSeries::new(ticker, bars, fundamentals)?);
    }
    Ok(out)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

/// Writes bars in the prices CSV schema, rows ordered by (ticker, date).
pub fn write_prices_csv<'a>(
    path: impl AsRef<Path>,
    assets: impl IntoIterator<Item = &'a AssetSeries>,
) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    let body = || -> std::io::Result<()> {
        writeln!(w, "{}", PRICE_COLUMNS.join(","))?;
        for asset in assets {
            for b in &asset.bars {
                writeln!(
                    w,
                    "{},{},{},{},{},{},{}",
                    b.date.format(DATE_FORMAT),
                    asset.ticker,
                    b.open,
                    b.high,
                    b.low,
                    b.close,
                    b.volume
                )?;
            }
        }
        w.flush()
    };
    body().map_err(|e| Error::io(path, e))
}

/// Writes snapshots in the fundamentals CSV schema.
pub fn write_fundamentals_csv<'a>(
    path: impl AsRef<Path>,
    assets: impl IntoIterator<Item = &'a AssetSeries>,
) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    let body = || -> std::io::Result<()> {
        writeln!(w, "date,ticker,{}", FUNDAMENTAL_COLUMNS.join(","))?;
        for asset in assets {
            for f in &asset.fundamentals {
                write!(w, "{},{}", f.date.format(DATE_FORMAT), asset.ticker)?;
                for v in f.values() {
                    write!(w, ",{v}")?;
                }
                writeln!(w)?;
            }
        }
        w.flush()
    };
    body().map_err(|e| Error::io(path, e))
}
