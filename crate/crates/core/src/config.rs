//! Flat `key = value` run configuration.
//!
//! Lines are `key = value`; `#` starts a comment; blank lines are ignored.
//! Relative paths resolve against the directory of the configuration file.
//! Keys mirror the training configuration field names (`gamma`,
//! `batchSize`, `hiddenWidths`, ...).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::NaiveDate;

use crate::error::{Error, Result};
use crate::market_data::{Selection, SplitSpec};
use crate::panel::ReturnConvention;
use crate::qnet::AdamConfig;
use crate::trainer::TrainConfig;

pub const KNOWN_KEYS: &[&str] = &[
    "prices",
    "fundamentals",
    "universe",
    "k",
    "universeSeed",
    "validationStart",
    "testStart",
    "end",
    "gamma",
    "epsilon",
    "iterations",
    "memory",
    "gradientInterval",
    "evaluationInterval",
    "batchSize",
    "hiddenWidths",
    "costBps",
    "seed",
    "learningRate",
    "beta1",
    "beta2",
    "epsilonHat",
    "costLevels",
    "returnConvention",
    "out",
    "nAssets",
    "nDays",
    "signalStrength",
    "noiseStd",
    "synthSeed",
];

/// Raw key-value pairs with the line each came from.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KeyValues {
    entries: BTreeMap<String, (usize, String)>,
    base_dir: PathBuf,
}

impl KeyValues {
    pub fn parse(text: &str, base_dir: impl Into<PathBuf>) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::config(format!("line {line_no}"), format!("expected `key = value`, got `{line}`"))
            })?;
            let key = key.trim();
            if !KNOWN_KEYS.contains(&key) {
                return Err(Error::config(key, format!("unknown key on line {line_no}")));
            }
            if entries
                .insert(key.to_string(), (line_no, value.trim().to_string()))
                .is_some()
            {
                return Err(Error::config(key, format!("duplicate key on line {line_no}")));
            }
        }
        Ok(Self {
            entries,
            base_dir: base_dir.into(),
        })
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::config("config", format!("{}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, base)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.entries.insert(key.to_string(), (0, value.into()));
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(_, v)| v.as_str())
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.raw(key)
            .map(|v| v.parse::<T>().map_err(|e| Error::config(key, format!("cannot parse `{v}`: {e}"))))
            .transpose()
    }

    fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.get(key)?.unwrap_or(default))
    }

    fn require<T: FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)?.ok_or_else(|| Error::config(key, "missing required key"))
    }

    fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>>
    where
        T::Err: std::fmt::Display,
    {
        self.raw(key)
            .map(|v| {
                v.split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| s.parse::<T>().map_err(|e| Error::config(key, format!("cannot parse `{s}`: {e}"))))
                    .collect()
            })
            .transpose()
    }

    fn date(&self, key: &str) -> Result<NaiveDate> {
        let v: String = self.require(key)?;
        NaiveDate::parse_from_str(&v, "%Y-%m-%d").map_err(|e| Error::config(key, format!("invalid date `{v}`: {e}")))
    }

    fn path(&self, key: &str) -> Result<Option<PathBuf>> {
        Ok(self.raw(key).map(|v| {
            let p = PathBuf::from(v);
            if p.is_absolute() {
                p
            } else {
                self.base_dir.join(p)
            }
        }))
    }
}

/// Everything `train` and `backtest` need.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub prices: PathBuf,
    pub fundamentals: PathBuf,
    pub selection: Selection,
    pub k: usize,
    pub universe_seed: u64,
    pub split: SplitSpec,
    pub train: TrainConfig,
    pub cost_levels: Vec<f64>,
    pub convention: ReturnConvention,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_key_values(kv: &KeyValues) -> Result<Self> {
        let defaults = TrainConfig::default();
        let adam_defaults = AdamConfig::default();
        let train = TrainConfig {
            gamma: kv.get_or("gamma", defaults.gamma)?,
            epsilon: kv.get_or("epsilon", defaults.epsilon)?,
            iterations: kv.get_or("iterations", defaults.iterations)?,
            memory: kv.get_or("memory", defaults.memory)?,
            gradient_interval: kv.get_or("gradientInterval", defaults.gradient_interval)?,
            evaluation_interval: kv.get_or("evaluationInterval", defaults.evaluation_interval)?,
            batch_size: kv.get_or("batchSize", defaults.batch_size)?,
            hidden_widths: kv.list("hiddenWidths")?.unwrap_or(defaults.hidden_widths),
            cost_bps: kv.get_or("costBps", defaults.cost_bps)?,
            seed: kv.get_or("seed", defaults.seed)?,
            adam: AdamConfig {
                learning_rate: kv.get_or("learningRate", adam_defaults.learning_rate)?,
                beta1: kv.get_or("beta1", adam_defaults.beta1)?,
                beta2: kv.get_or("beta2", adam_defaults.beta2)?,
                epsilon: kv.get_or("epsilonHat", adam_defaults.epsilon)?,
            },
        };
        let split = SplitSpec::new(kv.date("validationStart")?, kv.date("testStart")?, kv.date("end")?)
            .map_err(|e| Error::config("validationStart", e.to_string()))?;
        let selection: Selection = kv
            .get_or("universe", "all".to_string())?
            .parse()
            .map_err(|e: Error| Error::config("universe", e.to_string()))?;
        let convention: ReturnConvention = kv
            .get_or("returnConvention", "open_to_close".to_string())?
            .parse()
            .map_err(|e: Error| Error::config("returnConvention", e.to_string()))?;
        let cfg = Self {
            prices: kv.path("prices")?.ok_or_else(|| Error::config("prices", "missing required key"))?,
            fundamentals: kv
                .path("fundamentals")?
                .ok_or_else(|| Error::config("fundamentals", "missing required key"))?,
            selection,
            k: kv.get_or("k", 0)?,
            universe_seed: kv.get_or("universeSeed", 0)?,
            split,
            train,
            cost_levels: kv.list("costLevels")?.unwrap_or_else(|| vec![1.0, 5.0, 10.0]),
            convention,
            out: kv.path("out")?,
        };
        Ok(cfg)
    }

    /// Checks values and that the input files exist.
    pub fn validate(&self) -> Result<()> {
        self.train.validate()?;
        for (field, path) in [("prices", &self.prices), ("fundamentals", &self.fundamentals)] {
            if !path.is_file() {
                return Err(Error::config(field, format!("file not found: {}", path.display())));
            }
        }
        if self.selection != Selection::All && self.k == 0 {
            return Err(Error::config("k", "must be positive unless universe = all"));
        }
        if let Some(c) = self.cost_levels.iter().find(|c| !(**c >= 0.0 && c.is_finite())) {
            return Err(Error::config("costLevels", format!("must be non-negative, got {c}")));
        }
        Ok(())
    }

    /// Resolved configuration in the same `key = value` format.
    pub fn to_key_values(&self) -> String {
        let t = &self.train;
        let join = |xs: &[String]| xs.join(",");
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("prices", self.prices.display().to_string());
        kv("fundamentals", self.fundamentals.display().to_string());
        kv("universe", self.selection.as_str().to_string());
        kv("k", self.k.to_string());
        kv("universeSeed", self.universe_seed.to_string());
        kv("validationStart", self.split.validation_start.to_string());
        kv("testStart", self.split.test_start.to_string());
        kv("end", self.split.end.to_string());
        kv("gamma", t.gamma.to_string());
        kv("epsilon", t.epsilon.to_string());
        kv("iterations", t.iterations.to_string());
        kv("memory", t.memory.to_string());
        kv("gradientInterval", t.gradient_interval.to_string());
        kv("evaluationInterval", t.evaluation_interval.to_string());
        kv("batchSize", t.batch_size.to_string());
        kv("hiddenWidths", join(&t.hidden_widths.iter().map(|w| w.to_string()).collect::<Vec<_>>()));
        kv("costBps", t.cost_bps.to_string());
        kv("seed", t.seed.to_string());
        kv("learningRate", t.adam.learning_rate.to_string());
        kv("beta1", t.adam.beta1.to_string());
        kv("beta2", t.adam.beta2.to_string());
        kv("epsilonHat", t.adam.epsilon.to_string());
        kv("costLevels", join(&self.cost_levels.iter().map(|c| c.to_string()).collect::<Vec<_>>()));
        kv("returnConvention", self.convention.as_str().to_string());
        s
    }
}

/// Synthetic market parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub n_assets: usize,
    pub n_days: usize,
    pub signal_strength: f64,
    pub noise_std: f64,
    pub seed: u64,
}

impl SynthConfig {
    pub fn from_key_values(kv: &KeyValues) -> Result<Self> {
        Ok(Self {
            n_assets: kv.require("nAssets")?,
            n_days: kv.require("nDays")?,
            signal_strength: kv.get_or("signalStrength", 0.3)?,
            noise_std: kv.get_or("noiseStd", 0.01)?,
            seed: kv.get_or("synthSeed", kv.get_or("seed", 0)?)?,
        })
    }

    pub fn to_key_values(&self) -> String {
        format!(
            "nAssets = {}\nnDays = {}\nsignalStrength = {}\nnoiseStd = {}\nsynthSeed = {}\n",
            self.n_assets, self.n_days, self.signal_strength, self.noise_std, self.seed
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
# experiment
prices = data/prices.csv
fundamentals = /abs/fund.csv
universe = big
k = 10
validationStart = 2019-01-01
testStart = 2020-01-01
end = 2021-06-30
hiddenWidths = 16, 32,64
costBps = 1   # trailing comment
";

    #[test]
    fn parses_and_resolves() {
        let kv = KeyValues::parse(SAMPLE, "/cfg").unwrap();
        let cfg = RunConfig::from_key_values(&kv).unwrap();
        assert_eq!(cfg.prices, PathBuf::from("/cfg/data/prices.csv"));
        assert_eq!(cfg.fundamentals, PathBuf::from("/abs/fund.csv"));
        assert_eq!(cfg.selection, Selection::Big);
        assert_eq!(cfg.train.hidden_widths, vec![16, 32, 64]);
        assert_eq!(cfg.train.cost_bps, 1.0);
        assert_eq!(cfg.train.gamma, 0.9);
        assert_eq!(cfg.cost_levels, vec![1.0, 5.0, 10.0]);
    }

    #[test]
    fn echo_round_trips() {
        let kv = KeyValues::parse(SAMPLE, "/cfg").unwrap();
        let cfg = RunConfig::from_key_values(&kv).unwrap();
        let again = RunConfig::from_key_values(&KeyValues::parse(&cfg.to_key_values(), "/elsewhere").unwrap()).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn rejects_unknown_and_malformed() {
        assert!(matches!(
            KeyValues::parse("bogus = 1", "."),
            Err(Error::Config { field, .. }) if field == "bogus"
        ));
        assert!(KeyValues::parse("gamma 0.9", ".").is_err());
        assert!(KeyValues::parse("gamma = 1\ngamma = 2", ".").is_err());
        let kv = KeyValues::parse(&format!("{SAMPLE}gamma = x\n"), ".").unwrap();
        assert!(matches!(RunConfig::from_key_values(&kv), Err(Error::Config { field, .. }) if field == "gamma"));
    }

    #[test]
    fn missing_price_file_names_field() {
        let kv = KeyValues::parse(SAMPLE, "/nonexistent").unwrap();
        let cfg = RunConfig::from_key_values(&kv).unwrap();
        assert!(matches!(cfg.validate(), Err(Error::Config { field, .. }) if field == "prices"));
    }
}
