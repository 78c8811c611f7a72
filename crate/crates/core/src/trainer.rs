//! Deep Q-learning over randomly drawn single-asset episodes with replay
//! memory, epsilon-greedy exploration and validation-based checkpointing.

use std::collections::VecDeque;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::backtest::{cumulative_return, run_backtest, CostModel, Ensemble};
use crate::env::Environment;
use crate::error::{Error, Result};
use crate::features::Scaler;
use crate::market_data::Partition;
use crate::panel::{MarketPanel, PreparedUniverse};
use crate::qnet::{adam_step, td_target, Action, AdamConfig, AdamState, Checkpoint, QNetwork, Sample};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub gamma: f64,
    pub epsilon: f64,
    /// Total iterations N.
    pub iterations: u64,
    /// Replay capacity.
    pub memory: usize,
    pub gradient_interval: u64,
    /// Evaluation interval Omega.
    pub evaluation_interval: u64,
    pub batch_size: usize,
    pub hidden_widths: Vec<usize>,
    pub cost_bps: f64,
    pub seed: u64,
    pub adam: AdamConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            gamma: 0.9,
            epsilon: 0.3,
            iterations: 3_000_000,
            memory: 300_000,
            gradient_interval: 20,
            evaluation_interval: 10_000,
            batch_size: 1024,
            hidden_widths: vec![32, 64, 128],
            cost_bps: 5.0,
            seed: 0,
            adam: AdamConfig::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, msg: String| Err(Error::config(field, msg));
        if !(0.0..=1.0).contains(&self.gamma) {
            return bad("gamma", format!("must lie in [0, 1], got {}", self.gamma));
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return bad("epsilon", format!("must lie in [0, 1], got {}", self.epsilon));
        }
        if self.memory == 0 {
            return bad("memory", "must be positive".into());
        }
        if self.iterations > 0 && self.memory as u64 > self.iterations {
            return bad(
                "memory",
                format!("{} exceeds iterations {}", self.memory, self.iterations),
            );
        }
        if self.gradient_interval == 0 {
            return bad("gradientInterval", "must be positive".into());
        }
        if self.evaluation_interval < self.gradient_interval {
            return bad(
                "evaluationInterval",
                format!(
                    "{} is below gradientInterval {}",
                    self.evaluation_interval, self.gradient_interval
                ),
            );
        }
        if self.batch_size == 0 {
            return bad("batchSize", "must be positive".into());
        }
        if self.hidden_widths.is_empty() || self.hidden_widths.contains(&0) {
            return bad("hiddenWidths", format!("need positive widths, got {:?}", self.hidden_widths));
        }
        if !(self.cost_bps >= 0.0 && self.cost_bps.is_finite()) {
            return bad("costBps", format!("must be non-negative, got {}", self.cost_bps));
        }
        if !(self.adam.learning_rate > 0.0) {
            return bad("learningRate", format!("must be positive, got {}", self.adam.learning_rate));
        }
        Ok(())
    }

    pub fn cost(&self) -> Result<CostModel> {
        CostModel::from_bps(self.cost_bps)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: Vec<f64>,
    pub action: Action,
    pub reward: f64,
    /// `None` marks a terminal transition.
    pub next_state: Option<Vec<f64>>,
}

impl Transition {
    pub fn terminal(&self) -> bool {
        self.next_state.is_none()
    }
}

/// Fixed-capacity FIFO of transitions, sampled uniformly with replacement.
#[derive(Debug, Clone)]
pub struct ReplayMemory<T = Transition> {
    capacity: usize,
    items: VecDeque<T>,
}

impl<T> ReplayMemory<T> {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::Argument("replay capacity must be positive".into()));
        }
        Ok(Self {
            capacity,
            items: VecDeque::with_capacity(capacity.min(1 << 20)),
        })
    }

    pub fn push(&mut self, item: T) {
        if self.items.len() == self.capacity {
            self.items.pop_front();
        }
        self.items.push_back(item);
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Oldest first.
    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.items.iter()
    }

    pub fn sample<R: Rng + ?Sized>(&self, batch_size: usize, rng: &mut R) -> Result<Vec<&T>> {
        if self.items.is_empty() {
            return Err(Error::State("cannot sample from empty replay memory".into()));
        }
        let n = self.items.len();
        Ok((0..batch_size)
            .map(|_| &self.items[rng.random_range(0..n)])
            .collect())
    }
}

/// Epsilon-greedy choice; the flag reports whether the random branch was taken.
pub fn epsilon_greedy_with_flag<R: Rng + ?Sized>(q: (f64, f64), epsilon: f64, rng: &mut R) -> (Action, bool) {
    if rng.random::<f64>() < epsilon {
        let a = if rng.random::<bool>() { Action::Invest } else { Action::Cash };
        (a, true)
    } else {
        (Action::greedy(q), false)
    }
}

pub fn epsilon_greedy<R: Rng + ?Sized>(q: (f64, f64), epsilon: f64, rng: &mut R) -> Action {
    epsilon_greedy_with_flag(q, epsilon, rng).0
}

/// Independent RNG streams derived from one seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Init = 1,
    Assets = 2,
    Exploration = 3,
    Memory = 4,
}

/// SplitMix64 of the seed offset by the stream id.
pub fn stream_seed(seed: u64, stream: Stream) -> u64 {
    let mut z = seed.wrapping_add((stream as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn stream_rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_seed(seed, stream))
}

/// Scores a policy snapshot on the validation split.
pub trait Evaluator {
    fn evaluate(&mut self, net: &QNetwork) -> Result<f64>;
}

impl<F: FnMut(&QNetwork) -> Result<f64>> Evaluator for F {
    fn evaluate(&mut self, net: &QNetwork) -> Result<f64> {
        self(net)
    }
}

/// Greedy single-network portfolio backtest on a validation panel.
pub struct BacktestEvaluator<'a> {
    pub panel: &'a MarketPanel,
    pub cost: CostModel,
}

impl Evaluator for BacktestEvaluator<'_> {
    fn evaluate(&mut self, net: &QNetwork) -> Result<f64> {
        let ensemble = Ensemble::new(vec![net.clone()], self.panel.fingerprint)?;
        cumulative_return(&run_backtest(&ensemble, self.panel, self.cost)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvaluationRecord {
    pub iteration: u64,
    pub validation_return: f64,
    pub best_validation_return: f64,
    pub elapsed_secs: f64,
}

/// Instrumentation hooks; all default to no-ops.
pub trait TrainObserver {
    fn on_action(&mut self, _iteration: u64, _action: Action, _explored: bool) {}
    fn on_gradient_step(&mut self, _iteration: u64, _loss: f64) {}
    fn on_evaluation(&mut self, _record: &EvaluationRecord) {}
}

pub struct NoopObserver;

impl TrainObserver for NoopObserver {}

/// Writes one tab-separated line per evaluation:
/// iteration, validation return, best validation return, wall seconds.
pub struct ProgressLog<W: Write> {
    out: W,
    error: Option<std::io::Error>,
}

impl<W: Write> ProgressLog<W> {
    pub fn new(out: W) -> Self {
        Self { out, error: None }
    }

    pub fn finish(mut self) -> std::io::Result<W> {
        if let Some(e) = self.error.take() {
            return Err(e);
        }
        self.out.flush()?;
        Ok(self.out)
    }
}

impl<W: Write> TrainObserver for ProgressLog<W> {
    fn on_evaluation(&mut self, r: &EvaluationRecord) {
        if self.error.is_some() {
            return;
        }
        if let Err(e) = writeln!(
            self.out,
            "{}\t{}\t{}\t{:.3}",
            r.iteration, r.validation_return, r.best_validation_return, r.elapsed_secs
        ) {
            self.error = Some(e);
        }
    }
}

/// Where and how to persist the best parameters.
#[derive(Debug, Clone)]
pub struct CheckpointSink {
    pub path: PathBuf,
    pub scaler: Scaler,
    pub fingerprint: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub hidden_width: usize,
    pub seed: u64,
    /// Best validation return, starting from 0.
    pub best_validation_return: f64,
    pub evaluation_curve: Vec<(u64, f64)>,
    pub best_network: Option<QNetwork>,
    pub checkpoint_path: Option<PathBuf>,
    pub gradient_steps: u64,
}

impl TrainReport {
    pub fn has_checkpoint(&self) -> bool {
        self.best_network.is_some()
    }

    pub fn summary(&self) -> String {
        match &self.best_network {
            Some(_) => format!(
                "width {} seed {}: best validation return {} after {} evaluations",
                self.hidden_width,
                self.seed,
                self.best_validation_return,
                self.evaluation_curve.len()
            ),
            None => format!(
                "width {} seed {}: no checkpoint, validation return never exceeded 0 in {} evaluations",
                self.hidden_width,
                self.seed,
                self.evaluation_curve.len()
            ),
        }
    }
}

/// Network layer dims for one ensemble member.
pub fn member_dims(input_dim: usize, width: usize) -> Vec<usize> {
    vec![input_dim, width, width, crate::qnet::N_ACTIONS]
}

/// The training loop for one network.
///
/// Per iteration: count towards the evaluation interval and, when it is
/// reached, score the current parameters and keep them if they beat the best
/// so far; act epsilon-greedily; store the transition; every
/// `gradient_interval` iterations (once the memory holds a full batch) take
/// one Adam step on the squared TD error; draw a new asset at terminal states.
pub fn train_network(
    env: &Environment<'_>,
    input_dim: usize,
    width: usize,
    config: &TrainConfig,
    evaluator: &mut dyn Evaluator,
    observer: &mut dyn TrainObserver,
    sink: Option<&CheckpointSink>,
) -> Result<TrainReport> {
    config.validate()?;
    let seed = config.seed;
    let mut init_rng = stream_rng(seed, Stream::Init);
    let mut asset_rng = stream_rng(seed, Stream::Assets);
    let mut explore_rng = stream_rng(seed, Stream::Exploration);
    let mut memory_rng = stream_rng(seed, Stream::Memory);

    let mut net = QNetwork::init(&member_dims(input_dim, width), init_rng.random())?;
    let mut adam = AdamState::new(&net, config.adam);
    let mut memory: ReplayMemory = ReplayMemory::new(config.memory)?;
    let mut episode = env.reset(&mut asset_rng);

    let started = Instant::now();
    let mut best = 0.0;
    let mut best_net: Option<QNetwork> = None;
    let mut checkpoint_path = None;
    let mut curve = Vec::new();
    let mut omega = 0u64;
    let mut gradient_steps = 0u64;

    for t in 1..=config.iterations {
        omega += 1;
        if omega == config.evaluation_interval {
            let cr = evaluator.evaluate(&net)?;
            if !cr.is_finite() {
                return Err(Error::Numeric(format!("non-finite validation return at iteration {t}")));
            }
            curve.push((t, cr));
            if cr > best {
                best = cr;
                best_net = Some(net.clone());
                if let Some(sink) = sink {
                    Checkpoint {
                        net: net.clone(),
                        scaler: sink.scaler.clone(),
                        fingerprint: sink.fingerprint,
                    }
                    .save(&sink.path)?;
                    checkpoint_path = Some(sink.path.clone());
                }
            }
            observer.on_evaluation(&EvaluationRecord {
                iteration: t,
                validation_return: cr,
                best_validation_return: best,
                elapsed_secs: started.elapsed().as_secs_f64(),
            });
            omega = 0;
        }

        let state = episode.state()?;
        let q = net.forward(&state)?;
        let (action, explored) = epsilon_greedy_with_flag(q, config.epsilon, &mut explore_rng);
        observer.on_action(t, action, explored);
        let step = episode.step(action)?;
        let terminal = step.terminal;
        memory.push(Transition {
            state,
            action,
            reward: step.reward,
            next_state: step.next_state,
        });

        if t % config.gradient_interval == 0 && memory.len() >= config.batch_size {
            let batch = memory.sample(config.batch_size, &mut memory_rng)?;
            let mut targets = Vec::with_capacity(batch.len());
            for tr in &batch {
                let target = match &tr.next_state {
                    Some(next) => td_target(tr.reward, config.gamma, net.forward(next)?, false),
                    None => td_target(tr.reward, config.gamma, (0.0, 0.0), true),
                };
                targets.push(target);
            }
            let samples: Vec<Sample> = batch
                .iter()
                .zip(&targets)
                .map(|(tr, &target)| Sample {
                    state: &tr.state,
                    action: tr.action,
                    target,
                })
                .collect();
            let (loss, grads) = net.loss_and_gradient(&samples)?;
            if !loss.is_finite() {
                return Err(Error::Numeric(format!(
                    "non-finite loss at iteration {t} (width {width}, seed {seed})"
                )));
            }
            adam_step(&mut net, &mut adam, &grads)?;
            gradient_steps += 1;
            observer.on_gradient_step(t, loss);
        }

        if terminal {
            episode = env.reset(&mut asset_rng);
        }
    }

    Ok(TrainReport {
        hidden_width: width,
        seed,
        best_validation_return: best,
        evaluation_curve: curve,
        best_network: best_net,
        checkpoint_path,
        gradient_steps,
    })
}

/// Panels and scaler for one training run.
#[derive(Debug, Clone)]
pub struct TrainingData {
    pub scaler: Scaler,
    pub fingerprint: u32,
    pub input_dim: usize,
    pub train: MarketPanel,
    pub validation: MarketPanel,
}

impl TrainingData {
    pub fn new(prepared: &PreparedUniverse) -> Result<Self> {
        let scaler = prepared.fit_scaler()?;
        Ok(Self {
            train: prepared.panel(Partition::Train, &scaler)?,
            validation: prepared.panel(Partition::Validation, &scaler)?,
            fingerprint: prepared.spec.fingerprint(),
            input_dim: prepared.spec.dimension(),
            scaler,
        })
    }
}

/// Checkpoint file of ensemble member `index`.
pub fn checkpoint_file(dir: &Path, index: usize, width: usize) -> PathBuf {
    dir.join(format!("member{index}_h{width}.qnet"))
}

pub fn progress_file(dir: &Path, index: usize, width: usize) -> PathBuf {
    dir.join(format!("progress{index}_h{width}.tsv"))
}

/// Trains member `index` with the default validation evaluator.
pub fn train(
    data: &TrainingData,
    config: &TrainConfig,
    index: usize,
    width: usize,
    out_dir: Option<&Path>,
) -> Result<TrainReport> {
    let env = Environment::new(&data.train, config.cost()?.rate)?;
    let mut evaluator = BacktestEvaluator {
        panel: &data.validation,
        cost: config.cost()?,
    };
    match out_dir {
        Some(dir) => {
            let sink = CheckpointSink {
                path: checkpoint_file(dir, index, width),
                scaler: data.scaler.clone(),
                fingerprint: data.fingerprint,
            };
            let log_path = progress_file(dir, index, width);
            let file = std::fs::File::create(&log_path).map_err(|e| Error::io(&log_path, e))?;
            let mut log = ProgressLog::new(std::io::BufWriter::new(file));
            let report = train_network(
                &env,
                data.input_dim,
                width,
                config,
                &mut evaluator,
                &mut log,
                Some(&sink),
            )?;
            log.finish().map_err(|e| Error::io(&log_path, e))?;
            Ok(report)
        }
        None => train_network(
            &env,
            data.input_dim,
            width,
            config,
            &mut evaluator,
            &mut NoopObserver,
            None,
        ),
    }
}

/// Seed of ensemble member `index`.
pub fn member_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_add(index as u64)
}

/// One independent run per hidden width, seeds `seed, seed + 1, ...`.
/// Members run in parallel on the current rayon pool.
pub fn train_ensemble(
    data: &TrainingData,
    config: &TrainConfig,
    out_dir: Option<&Path>,
) -> Result<Vec<TrainReport>> {
    config.validate()?;
    config
        .hidden_widths
        .par_iter()
        .enumerate()
        .map(|(i, &width)| {
            let member = TrainConfig {
                seed: member_seed(config.seed, i),
                ..config.clone()
            };
            train(data, &member, i, width, out_dir).map_err(|e| Error::Member {
                index: i,
                width,
                source: Box::new(e),
            })
        })
        .collect()
}
