//! Feed-forward Q-network, squared TD loss with its analytic gradient,
//! Adam, and the binary checkpoint format.
//!
//! Parameters live in one flat vector. For each layer the weight matrix
//! (`out x in`, row-major) comes first, then the bias vector; the checkpoint
//! writes them in the same order.

use std::fs;
use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::features::Scaler;

/// Number of actions; the output layer width.
pub const N_ACTIONS: usize = 2;

pub const CHECKPOINT_MAGIC: &[u8; 5] = b"QNET1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Action {
    Cash = 0,
    Invest = 1,
}

impl Action {
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn is_invest(self) -> bool {
        self == Action::Invest
    }

    pub fn from_index(i: usize) -> Result<Action> {
        match i {
            0 => Ok(Action::Cash),
            1 => Ok(Action::Invest),
            _ => Err(Error::Argument(format!("action must be 0 or 1, got {i}"))),
        }
    }

    /// Greedy choice; exact ties go to cash.
    pub fn greedy(q: (f64, f64)) -> Action {
        if q.1 > q.0 {
            Action::Invest
        } else {
            Action::Cash
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct LayerShape {
    input: usize,
    output: usize,
    weights: usize,
    biases: usize,
}

fn layout(dims: &[usize]) -> Vec<LayerShape> {
    let mut offset = 0;
    dims.windows(2)
        .map(|d| {
            let shape = LayerShape {
                input: d[0],
                output: d[1],
                weights: offset,
                biases: offset + d[0] * d[1],
            };
            offset += d[0] * d[1] + d[1];
            shape
        })
        .collect()
}

fn validate_dims(dims: &[usize]) -> Result<()> {
    if dims.len() < 2 {
        return Err(Error::Argument(format!(
            "a network needs at least input and output dims, got {dims:?}"
        )));
    }
    if dims.contains(&0) {
        return Err(Error::Argument(format!("layer dims must be positive, got {dims:?}")));
    }
    if dims[dims.len() - 1] != N_ACTIONS {
        return Err(Error::Argument(format!(
            "output dimension must be {N_ACTIONS}, got {dims:?}"
        )));
    }
    Ok(())
}

/// Multilayer perceptron with rectified-linear hidden layers and a linear
/// two-unit output (`q(cash)`, `q(invest)`).
#[derive(Debug, Clone, PartialEq)]
pub struct QNetwork {
    dims: Vec<usize>,
    layers: Vec<LayerShape>,
    params: Vec<f64>,
}

/// Parameter-shaped gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients(pub Vec<f64>);

impl Gradients {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// One regression sample: the taken action's output is pulled towards `target`.
#[derive(Debug, Clone, Copy)]
pub struct Sample<'a> {
    pub state: &'a [f64],
    pub action: Action,
    pub target: f64,
}

impl QNetwork {
    /// All-zero network of the given shape.
    pub fn zeros(dims: &[usize]) -> Result<Self> {
        validate_dims(dims)?;
        let layers = layout(dims);
        let n = layers.last().map(|l| l.biases + l.output).unwrap_or(0);
        Ok(Self {
            dims: dims.to_vec(),
            layers,
            params: vec![0.0; n],
        })
    }

    /// Weights uniform in `[-sqrt(6 / fan_in), +sqrt(6 / fan_in)]`, biases zero.
    pub fn init(dims: &[usize], seed: u64) -> Result<Self> {
        let mut net = Self::zeros(dims)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for l in net.layers.clone() {
            let bound = (6.0 / l.input as f64).sqrt();
            for w in &mut net.params[l.weights..l.biases] {
                *w = rng.random_range(-bound..=bound);
            }
        }
        Ok(net)
    }

    pub fn from_params(dims: &[usize], params: Vec<f64>) -> Result<Self> {
        let mut net = Self::zeros(dims)?;
        if params.len() != net.params.len() {
            return Err(Error::Argument(format!(
                "expected {} parameters for dims {dims:?}, got {}",
                net.params.len(),
                params.len()
            )));
        }
        net.params = params;
        Ok(net)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn input_dim(&self) -> usize {
        self.dims[0]
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn n_layers(&self) -> usize {
        self.layers.len()
    }

    /// Flat index of weight `(row, col)` of layer `layer`.
    pub fn weight_index(&self, layer: usize, row: usize, col: usize) -> usize {
        let l = &self.layers[layer];
        assert!(row < l.output && col < l.input, "weight index out of range");
        l.weights + row * l.input + col
    }

    pub fn bias_index(&self, layer: usize, row: usize) -> usize {
        let l = &self.layers[layer];
        assert!(row < l.output, "bias index out of range");
        l.biases + row
    }

    /// Flat range of layer `layer`'s weights.
    pub fn weight_range(&self, layer: usize) -> std::ops::Range<usize> {
        let l = &self.layers[layer];
        l.weights..l.biases
    }

    /// Flat range of layer `layer`'s biases.
    pub fn bias_range(&self, layer: usize) -> std::ops::Range<usize> {
        let l = &self.layers[layer];
        l.biases..l.biases + l.output
    }

    pub fn is_finite(&self) -> bool {
        self.params.iter().all(|p| p.is_finite())
    }

    fn check_input(&self, state: &[f64]) -> Result<()> {
        if state.len() != self.dims[0] {
            return Err(Error::Argument(format!(
                "state dimension {} does not match network input {}",
                state.len(),
                self.dims[0]
            )));
        }
        Ok(())
    }

    /// Writes pre-activations of every layer into `pre` (one vec per layer).
    fn forward_pass(&self, state: &[f64], pre: &mut [Vec<f64>]) {
        for (li, l) in self.layers.iter().enumerate() {
            let (done, rest) = pre.split_at_mut(li);
            let out = &mut rest[0];
            out.clear();
            let w = &self.params[l.weights..l.biases];
            let b = &self.params[l.biases..l.biases + l.output];
            for (r, bias) in b.iter().enumerate() {
                let row = &w[r * l.input..(r + 1) * l.input];
                let dot: f64 = if li == 0 {
                    row.iter().zip(state).map(|(w, x)| w * x).sum()
                } else {
                    row.iter()
                        .zip(&done[li - 1])
                        .map(|(w, z)| w * z.max(0.0))
                        .sum()
                };
                out.push(dot + bias);
            }
        }
    }

    fn scratch(&self) -> Vec<Vec<f64>> {
        self.layers.iter().map(|l| Vec::with_capacity(l.output)).collect()
    }

    /// `(q(cash), q(invest))` for a state.
    pub fn forward(&self, state: &[f64]) -> Result<(f64, f64)> {
        self.check_input(state)?;
        let mut pre = self.scratch();
        self.forward_pass(state, &mut pre);
        let q = &pre[pre.len() - 1];
        Ok((q[0], q[1]))
    }

    /// Batched forward with shared scratch space.
    pub fn forward_many<'a>(&self, states: impl IntoIterator<Item = &'a [f64]>) -> Result<Vec<(f64, f64)>> {
        let mut pre = self.scratch();
        states
            .into_iter()
            .map(|s| {
                self.check_input(s)?;
                self.forward_pass(s, &mut pre);
                let q = &pre[pre.len() - 1];
                Ok((q[0], q[1]))
            })
            .collect()
    }

    /// Mean squared error of the taken actions' outputs against their
    /// targets, and its gradient. Targets are constants; only the taken
    /// action's output row receives gradient.
    pub fn loss_and_gradient(&self, batch: &[Sample<'_>]) -> Result<(f64, Gradients)> {
        if batch.is_empty() {
            return Err(Error::Argument("empty batch".into()));
        }
        let scale = 1.0 / batch.len() as f64;
        let mut grads = vec![0.0; self.params.len()];
        let mut pre = self.scratch();
        let mut delta: Vec<f64> = Vec::new();
        let mut delta_prev: Vec<f64> = Vec::new();
        let mut loss = 0.0;

        for s in batch {
            self.check_input(s.state)?;
            if !s.target.is_finite() {
                return Err(Error::Argument(format!("non-finite target {}", s.target)));
            }
            self.forward_pass(s.state, &mut pre);
            let q = &pre[pre.len() - 1];
            let err = q[s.action.index()] - s.target;
            loss += err * err;

            delta.clear();
            delta.resize(N_ACTIONS, 0.0);
            delta[s.action.index()] = 2.0 * err * scale;

            for li in (0..self.layers.len()).rev() {
                let l = self.layers[li];
                for (r, d) in delta.iter().enumerate() {
                    if *d == 0.0 {
                        continue;
                    }
                    grads[l.biases + r] += d;
                    let row = &mut grads[l.weights + r * l.input..l.weights + (r + 1) * l.input];
                    if li == 0 {
                        for (g, x) in row.iter_mut().zip(s.state) {
                            *g += d * x;
                        }
                    } else {
                        for (g, z) in row.iter_mut().zip(&pre[li - 1]) {
                            *g += d * z.max(0.0);
                        }
                    }
                }
                if li == 0 {
                    break;
                }
                delta_prev.clear();
                delta_prev.resize(l.input, 0.0);
                let w = &self.params[l.weights..l.biases];
                for (r, d) in delta.iter().enumerate() {
                    if *d == 0.0 {
                        continue;
                    }
                    let row = &w[r * l.input..(r + 1) * l.input];
                    for (dp, wv) in delta_prev.iter_mut().zip(row) {
                        *dp += d * wv;
                    }
                }
                for (dp, z) in delta_prev.iter_mut().zip(&pre[li - 1]) {
                    if *z <= 0.0 {
                        *dp = 0.0;
                    }
                }
                std::mem::swap(&mut delta, &mut delta_prev);
            }
        }
        Ok((loss * scale, Gradients(grads)))
    }

    /// Loss only, for finite-difference checks.
    pub fn loss(&self, batch: &[Sample<'_>]) -> Result<f64> {
        if batch.is_empty() {
            return Err(Error::Argument("empty batch".into()));
        }
        let mut total = 0.0;
        for s in batch {
            let q = self.forward(s.state)?;
            let pred = if s.action == Action::Invest { q.1 } else { q.0 };
            total += (s.target - pred).powi(2);
        }
        Ok(total / batch.len() as f64)
    }
}

/// Bootstrapped regression target: `reward` at terminal states, otherwise
/// `reward + gamma * max(next_q)`.
pub fn td_target(reward: f64, gamma: f64, next_q: (f64, f64), terminal: bool) -> f64 {
    if terminal {
        reward
    } else {
        reward + gamma * next_q.0.max(next_q.1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub config: AdamConfig,
    pub first_moment: Vec<f64>,
    pub second_moment: Vec<f64>,
    pub step_count: u64,
}

impl AdamState {
    pub fn new(net: &QNetwork, config: AdamConfig) -> Self {
        let n = net.params().len();
        Self {
            config,
            first_moment: vec![0.0; n],
            second_moment: vec![0.0; n],
            step_count: 0,
        }
    }
}

/// One bias-corrected Adam update.
pub fn adam_step(net: &mut QNetwork, adam: &mut AdamState, grads: &Gradients) -> Result<()> {
    let n = net.params.len();
    if grads.0.len() != n || adam.first_moment.len() != n || adam.second_moment.len() != n {
        return Err(Error::Argument(format!(
            "shape mismatch: {n} parameters, {} gradients, {} moments",
            grads.0.len(),
            adam.first_moment.len()
        )));
    }
    adam.step_count += 1;
    let AdamConfig {
        learning_rate,
        beta1,
        beta2,
        epsilon,
    } = adam.config;
    let t = adam.step_count as i32;
    let c1 = 1.0 - beta1.powi(t);
    let c2 = 1.0 - beta2.powi(t);
    for (((p, g), m), v) in net
        .params
        .iter_mut()
        .zip(&grads.0)
        .zip(adam.first_moment.iter_mut())
        .zip(adam.second_moment.iter_mut())
    {
        *m = beta1 * *m + (1.0 - beta1) * g;
        *v = beta2 * *v + (1.0 - beta2) * g * g;
        let m_hat = *m / c1;
        let v_hat = *v / c2;
        *p -= learning_rate * m_hat / (v_hat.sqrt() + epsilon);
    }
    Ok(())
}

/// Network parameters plus the scaler and feature layout they were trained with.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub net: QNetwork,
    pub scaler: Scaler,
    pub fingerprint: u32,
}

impl Checkpoint {
    /// Serializes as: magic, `u32` layer count, `u32` dims, per layer the
    /// row-major weights then biases as `f64`, scaler means then stds, and
    /// the `u32` feature fingerprint. Integers and floats are little-endian.
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let dims = self.net.dims();
        if self.scaler.means.len() != dims[0] - 1 || self.scaler.stds.len() != dims[0] - 1 {
            return Err(Error::Argument(format!(
                "scaler has {} entries, expected {} for input dimension {}",
                self.scaler.means.len(),
                dims[0] - 1,
                dims[0]
            )));
        }
        let mut out = Vec::with_capacity(
            5 + 4 * (dims.len() + 2) + 8 * (self.net.params().len() + 2 * self.scaler.len()),
        );
        out.extend_from_slice(CHECKPOINT_MAGIC);
        out.extend_from_slice(&((dims.len() - 1) as u32).to_le_bytes());
        for d in dims {
            out.extend_from_slice(&(*d as u32).to_le_bytes());
        }
        for x in self
            .net
            .params()
            .iter()
            .chain(&self.scaler.means)
            .chain(&self.scaler.stds)
        {
            out.extend_from_slice(&x.to_le_bytes());
        }
        out.extend_from_slice(&self.fingerprint.to_le_bytes());
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut cur = Cursor { bytes, pos: 0 };
        if cur.take(5)? != CHECKPOINT_MAGIC {
            return Err(Error::Format("bad magic, not a QNET1 checkpoint".into()));
        }
        let n_layers = cur.u32()? as usize;
        if n_layers == 0 || n_layers > 64 {
            return Err(Error::Format(format!("implausible layer count {n_layers}")));
        }
        let dims = (0..=n_layers)
            .map(|_| cur.u32().map(|d| d as usize))
            .collect::<Result<Vec<_>>>()?;
        validate_dims(&dims).map_err(|e| Error::Format(e.to_string()))?;
        let n_params: usize = dims.windows(2).map(|d| d[0] * d[1] + d[1]).sum();
        let params = cur.f64s(n_params)?;
        let means = cur.f64s(dims[0] - 1)?;
        let stds = cur.f64s(dims[0] - 1)?;
        let fingerprint = cur.u32()?;
        if cur.pos != bytes.len() {
            return Err(Error::Format(format!(
                "{} trailing bytes after checkpoint",
                bytes.len() - cur.pos
            )));
        }
        if params.iter().chain(&means).chain(&stds).any(|x| !x.is_finite()) {
            return Err(Error::Format("non-finite value in checkpoint".into()));
        }
        Ok(Self {
            net: QNetwork::from_params(&dims, params)?,
            scaler: Scaler { means, stds },
            fingerprint,
        })
    }

    /// Writes to a sibling temp file, then renames over `path`.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let bytes = self.to_bytes()?;
        let tmp = path.with_extension("tmp");
        let write = || -> std::io::Result<()> {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(&bytes)?;
            f.sync_all()?;
            fs::rename(&tmp, path)
        };
        write().map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes).map_err(|e| match e {
            Error::Format(msg) => Error::Format(format!("{}: {msg}", path.display())),
            other => other,
        })
    }
}

pub fn save_checkpoint(net: &QNetwork, scaler: &Scaler, fingerprint: u32, path: impl AsRef<Path>) -> Result<()> {
    Checkpoint {
        net: net.clone(),
        scaler: scaler.clone(),
        fingerprint,
    }
    .save(path)
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<Checkpoint> {
    Checkpoint::load(path)
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or_else(|| {
            Error::Format(format!(
                "truncated: needed {n} bytes at offset {}, file has {}",
                self.pos,
                self.bytes.len()
            ))
        })?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes(b.try_into().expect("4 bytes")))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        let b = self.take(n.checked_mul(8).ok_or_else(|| Error::Format("size overflow".into()))?)?;
        Ok(b.chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect())
    }
}
