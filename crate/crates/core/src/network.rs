//! Three-layer feedforward classifier with tanh hidden units and sigmoid
//! outputs, the penalized cross-entropy objective and its analytic gradient.
//!
//! Weights are stored densely. `w[m * n + l]` links input `l` to hidden node
//! `m`; `v[p * h + m]` links hidden node `m` to output `p`. A cleared mask bit
//! means the link has been pruned; such weights are kept at exactly zero.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Floor applied to `S` and `1 - S` before taking logarithms.
pub const LOG_FLOOR: f64 = 1e-12;

/// Samples per reduction chunk. Partial sums are combined in chunk order,
/// so results do not depend on the thread count.
const CHUNK: usize = 64;

#[derive(Debug, Error, PartialEq)]
pub enum NetError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("invalid network shape: {0}")]
    Shape(String),
    #[error("invalid objective parameters: {0}")]
    Params(String),
    #[error("invalid dataset: {0}")]
    Dataset(String),
}

/// Weight-decay and margin parameters of the training objective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ObjectiveParams {
    pub eps1: f64,
    pub eps2: f64,
    pub beta: f64,
    pub eta1: f64,
    pub eta2: f64,
}

impl Default for ObjectiveParams {
    fn default() -> Self {
        ObjectiveParams {
            eps1: 0.1,
            eps2: 1e-4,
            beta: 10.0,
            eta1: 0.35,
            eta2: 0.1,
        }
    }
}

impl ObjectiveParams {
    pub fn validate(&self) -> Result<(), NetError> {
        if !(self.eps1 >= 0.0 && self.eps2 >= 0.0) {
            return Err(NetError::Params("decay parameters must be nonnegative".into()));
        }
        if !(self.beta > 0.0) {
            return Err(NetError::Params("beta must be positive".into()));
        }
        if !(self.eta1 > 0.0 && self.eta1 < 0.5 && self.eta2 > 0.0) {
            return Err(NetError::Params("need 0 < eta1 < 0.5 and eta2 > 0".into()));
        }
        if self.eta1 + self.eta2 >= 0.5 {
            return Err(NetError::Params(format!(
                "eta1 + eta2 = {} must be below 0.5",
                self.eta1 + self.eta2
            )));
        }
        Ok(())
    }
}

/// Real-valued inputs with class targets; zero inputs are skipped in sums.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    n_inputs: usize,
    n_classes: usize,
    inputs: Vec<f64>,
    targets: Vec<usize>,
    nonzero: Vec<Vec<(usize, f64)>>,
}

impl Dataset {
    pub fn new(
        n_inputs: usize,
        n_classes: usize,
        rows: Vec<Vec<f64>>,
        targets: Vec<usize>,
    ) -> Result<Self, NetError> {
        if rows.len() != targets.len() {
            return Err(NetError::Dataset(format!(
                "{} rows but {} targets",
                rows.len(),
                targets.len()
            )));
        }
        if let Some(&t) = targets.iter().find(|&&t| t >= n_classes) {
            return Err(NetError::Dataset(format!("target {t} >= {n_classes} classes")));
        }
        let mut inputs = Vec::with_capacity(rows.len() * n_inputs);
        let mut nonzero = Vec::with_capacity(rows.len());
        for row in &rows {
            if row.len() != n_inputs {
                return Err(NetError::Dimension {
                    expected: n_inputs,
                    got: row.len(),
                });
            }
            inputs.extend_from_slice(row);
            nonzero.push(
                row.iter()
                    .enumerate()
                    .filter(|(_, &x)| x != 0.0)
                    .map(|(l, &x)| (l, x))
                    .collect(),
            );
        }
        Ok(Dataset {
            n_inputs,
            n_classes,
            inputs,
            targets,
            nonzero,
        })
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn n_inputs(&self) -> usize {
        self.n_inputs
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn input(&self, i: usize) -> &[f64] {
        &self.inputs[i * self.n_inputs..(i + 1) * self.n_inputs]
    }

    pub fn target(&self, i: usize) -> usize {
        self.targets[i]
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    fn nonzero(&self, i: usize) -> &[(usize, f64)] {
        &self.nonzero[i]
    }

    /// Indicator target vector for sample `i`.
    pub fn target_vector(&self, i: usize) -> Vec<f64> {
        let mut t = vec![0.0; self.n_classes];
        t[self.targets[i]] = 1.0;
        t
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    n_inputs: usize,
    n_hidden: usize,
    n_outputs: usize,
    w: Vec<f64>,
    v: Vec<f64>,
    mask_w: Vec<bool>,
    mask_v: Vec<bool>,
}

pub fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

impl Network {
    /// Fully connected network with all weights zero.
    pub fn zeros(n_inputs: usize, n_hidden: usize, n_outputs: usize) -> Result<Self, NetError> {
        if n_inputs < 2 || n_hidden < 1 || n_outputs < 2 {
            return Err(NetError::Shape(format!(
                "need n >= 2, h >= 1, o >= 2 (got {n_inputs}, {n_hidden}, {n_outputs})"
            )));
        }
        Ok(Network {
            n_inputs,
            n_hidden,
            n_outputs,
            w: vec![0.0; n_hidden * n_inputs],
            v: vec![0.0; n_outputs * n_hidden],
            mask_w: vec![true; n_hidden * n_inputs],
            mask_v: vec![true; n_outputs * n_hidden],
        })
    }

    /// Fully connected network with weights drawn uniformly from [-1, 1].
    pub fn random(
        n_inputs: usize,
        n_hidden: usize,
        n_outputs: usize,
        seed: u64,
    ) -> Result<Self, NetError> {
        let mut net = Self::zeros(n_inputs, n_hidden, n_outputs)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for x in net.w.iter_mut().chain(net.v.iter_mut()) {
            *x = rng.gen_range(-1.0..=1.0);
        }
        Ok(net)
    }

    pub fn n_inputs(&self) -> usize {
        self.n_inputs
    }

    pub fn n_hidden(&self) -> usize {
        self.n_hidden
    }

    pub fn n_outputs(&self) -> usize {
        self.n_outputs
    }

    pub fn w(&self, m: usize, l: usize) -> f64 {
        self.w[m * self.n_inputs + l]
    }

    pub fn v(&self, p: usize, m: usize) -> f64 {
        self.v[p * self.n_hidden + m]
    }

    pub fn has_w(&self, m: usize, l: usize) -> bool {
        self.mask_w[m * self.n_inputs + l]
    }

    pub fn has_v(&self, p: usize, m: usize) -> bool {
        self.mask_v[p * self.n_hidden + m]
    }

    /// Sets an input weight; ignored for pruned links.
    pub fn set_w(&mut self, m: usize, l: usize, value: f64) {
        let i = m * self.n_inputs + l;
        if self.mask_w[i] {
            self.w[i] = value;
        }
    }

    /// Sets an output weight; ignored for pruned links.
    pub fn set_v(&mut self, p: usize, m: usize, value: f64) {
        let i = p * self.n_hidden + m;
        if self.mask_v[i] {
            self.v[i] = value;
        }
    }

    pub fn remove_w(&mut self, m: usize, l: usize) {
        let i = m * self.n_inputs + l;
        self.mask_w[i] = false;
        self.w[i] = 0.0;
    }

    pub fn remove_v(&mut self, p: usize, m: usize) {
        let i = p * self.n_hidden + m;
        self.mask_v[i] = false;
        self.v[i] = 0.0;
    }

    /// Number of unpruned links.
    pub fn link_count(&self) -> usize {
        self.mask_w.iter().chain(&self.mask_v).filter(|&&b| b).count()
    }

    /// Inputs with an unpruned link into hidden node `m`.
    pub fn connected_inputs(&self, m: usize) -> Vec<usize> {
        (0..self.n_inputs).filter(|&l| self.has_w(m, l)).collect()
    }

    /// Total parameter count (`h*n + o*h`), pruned links included.
    pub fn param_len(&self) -> usize {
        self.w.len() + self.v.len()
    }

    /// Weights as one vector: all of `w`, then all of `v`.
    pub fn params(&self) -> Vec<f64> {
        let mut p = self.w.clone();
        p.extend_from_slice(&self.v);
        p
    }

    pub fn mask(&self) -> Vec<bool> {
        let mut m = self.mask_w.clone();
        m.extend_from_slice(&self.mask_v);
        m
    }

    /// Overwrites weights from a `params()`-shaped vector; pruned entries stay zero.
    pub fn set_params(&mut self, p: &[f64]) -> Result<(), NetError> {
        if p.len() != self.param_len() {
            return Err(NetError::Dimension {
                expected: self.param_len(),
                got: p.len(),
            });
        }
        let (pw, pv) = p.split_at(self.w.len());
        for ((x, &y), &keep) in self.w.iter_mut().zip(pw).zip(&self.mask_w) {
            *x = if keep { y } else { 0.0 };
        }
        for ((x, &y), &keep) in self.v.iter_mut().zip(pv).zip(&self.mask_v) {
            *x = if keep { y } else { 0.0 };
        }
        Ok(())
    }

    /// Indices into `params()` of unpruned weights.
    pub fn free_indices(&self) -> Vec<usize> {
        self.mask()
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| i)
            .collect()
    }

    fn check_input(&self, x: &[f64]) -> Result<(), NetError> {
        if x.len() != self.n_inputs {
            return Err(NetError::Dimension {
                expected: self.n_inputs,
                got: x.len(),
            });
        }
        Ok(())
    }

    pub fn hidden_activations(&self, x: &[f64]) -> Result<Vec<f64>, NetError> {
        self.check_input(x)?;
        Ok((0..self.n_hidden)
            .map(|m| {
                let row = &self.w[m * self.n_inputs..(m + 1) * self.n_inputs];
                row.iter().zip(x).map(|(w, x)| w * x).sum::<f64>().tanh()
            })
            .collect())
    }

    /// Output layer applied to given hidden activations.
    pub fn outputs_from_hidden(&self, alpha: &[f64]) -> Vec<f64> {
        (0..self.n_outputs)
            .map(|p| {
                let row = &self.v[p * self.n_hidden..(p + 1) * self.n_hidden];
                sigmoid(row.iter().zip(alpha).map(|(v, a)| v * a).sum())
            })
            .collect()
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>, NetError> {
        Ok(self.outputs_from_hidden(&self.hidden_activations(x)?))
    }

    fn check_dataset(&self, data: &Dataset) -> Result<(), NetError> {
        if data.n_inputs() != self.n_inputs {
            return Err(NetError::Dimension {
                expected: self.n_inputs,
                got: data.n_inputs(),
            });
        }
        if data.n_classes() != self.n_outputs {
            return Err(NetError::Dimension {
                expected: self.n_outputs,
                got: data.n_classes(),
            });
        }
        Ok(())
    }

    /// Hidden activations using the sparse form of sample `i`.
    fn sample_hidden(&self, data: &Dataset, i: usize, alpha: &mut [f64]) {
        for (m, a) in alpha.iter_mut().enumerate() {
            let row = &self.w[m * self.n_inputs..(m + 1) * self.n_inputs];
            *a = data.nonzero(i).iter().map(|&(l, x)| x * row[l]).sum::<f64>().tanh();
        }
    }

    /// Hidden nodes that have no unpruned input link or no unpruned output link.
    pub fn dead_hidden_nodes(&self) -> Vec<usize> {
        (0..self.n_hidden)
            .filter(|&m| {
                let no_in = (0..self.n_inputs).all(|l| !self.has_w(m, l));
                let no_out = (0..self.n_outputs).all(|p| !self.has_v(p, m));
                no_in || no_out
            })
            .collect()
    }

    /// Drops the listed hidden nodes, compacting the weight matrices.
    pub fn without_hidden(&self, drop: &[usize]) -> Result<Network, NetError> {
        let keep: Vec<usize> = (0..self.n_hidden).filter(|m| !drop.contains(m)).collect();
        if keep.is_empty() {
            return Err(NetError::Shape("cannot remove every hidden node".into()));
        }
        let h = keep.len();
        let mut out = Network::zeros(self.n_inputs, h, self.n_outputs)?;
        for (new_m, &m) in keep.iter().enumerate() {
            for l in 0..self.n_inputs {
                let i = new_m * self.n_inputs + l;
                out.w[i] = self.w(m, l);
                out.mask_w[i] = self.has_w(m, l);
            }
            for p in 0..self.n_outputs {
                let i = p * h + new_m;
                out.v[i] = self.v(p, m);
                out.mask_v[i] = self.has_v(p, m);
            }
        }
        Ok(out)
    }

    /// True iff every pruned weight is exactly zero.
    pub fn masks_consistent(&self) -> bool {
        self.w
            .iter()
            .zip(&self.mask_w)
            .chain(self.v.iter().zip(&self.mask_v))
            .all(|(&x, &keep)| keep || x == 0.0)
    }
}

/// Margin test: every output is within `eta1` of its target.
pub fn is_correct(outputs: &[f64], targets: &[f64], eta1: f64) -> bool {
    outputs
        .iter()
        .zip(targets)
        .map(|(s, t)| (s - t).abs())
        .fold(0.0, f64::max)
        <= eta1
}

/// Index of the largest output; ties go to the lowest index.
pub fn classify(outputs: &[f64]) -> usize {
    let mut best = 0;
    for (p, &s) in outputs.iter().enumerate().skip(1) {
        if s > outputs[best] {
            best = p;
        }
    }
    best
}

fn log_floor(x: f64) -> f64 {
    x.max(LOG_FLOOR).ln()
}

fn sample_entropy(outputs: &[f64], target: usize) -> f64 {
    -outputs
        .iter()
        .enumerate()
        .map(|(p, &s)| {
            if p == target {
                log_floor(s)
            } else {
                log_floor(1.0 - s)
            }
        })
        .sum::<f64>()
}

fn chunks(len: usize) -> impl IndexedParallelIterator<Item = std::ops::Range<usize>> {
    let n = len.div_ceil(CHUNK);
    (0..n)
        .into_par_iter()
        .map(move |c| c * CHUNK..((c + 1) * CHUNK).min(len))
}

/// Cross-entropy error summed over the dataset.
pub fn cross_entropy(net: &Network, data: &Dataset) -> Result<f64, NetError> {
    net.check_dataset(data)?;
    let partial: Vec<f64> = chunks(data.len())
        .map(|range| {
            let mut alpha = vec![0.0; net.n_hidden];
            range
                .map(|i| {
                    net.sample_hidden(data, i, &mut alpha);
                    sample_entropy(&net.outputs_from_hidden(&alpha), data.target(i))
                })
                .sum::<f64>()
        })
        .collect();
    Ok(partial.iter().sum())
}

fn decay_terms(x: f64, params: &ObjectiveParams) -> (f64, f64) {
    let bx2 = params.beta * x * x;
    let value = params.eps1 * bx2 / (1.0 + bx2) + params.eps2 * x * x;
    let grad = params.eps1 * 2.0 * params.beta * x / ((1.0 + bx2) * (1.0 + bx2))
        + 2.0 * params.eps2 * x;
    (value, grad)
}

/// Weight-decay penalty over unpruned weights.
pub fn penalty(net: &Network, params: &ObjectiveParams) -> f64 {
    net.params()
        .iter()
        .zip(net.mask())
        .filter(|(_, keep)| *keep)
        .map(|(&x, _)| decay_terms(x, params).0)
        .sum()
}

/// `E + P` and its gradient in `params()` layout; pruned entries are zero.
pub fn objective_and_gradient(
    net: &Network,
    data: &Dataset,
    params: &ObjectiveParams,
) -> Result<(f64, Vec<f64>), NetError> {
    net.check_dataset(data)?;
    if data.is_empty() {
        return Err(NetError::Dataset("empty dataset".into()));
    }
    let (n, h, o) = (net.n_inputs, net.n_hidden, net.n_outputs);
    let nw = h * n;
    let partial: Vec<(f64, Vec<f64>)> = chunks(data.len())
        .map(|range| {
            let mut grad = vec![0.0; nw + o * h];
            let mut alpha = vec![0.0; h];
            let mut dalpha = vec![0.0; h];
            let mut e = 0.0;
            for i in range {
                net.sample_hidden(data, i, &mut alpha);
                let outputs = net.outputs_from_hidden(&alpha);
                let target = data.target(i);
                e += sample_entropy(&outputs, target);
                dalpha.iter_mut().for_each(|d| *d = 0.0);
                for (p, &s) in outputs.iter().enumerate() {
                    let delta = s - if p == target { 1.0 } else { 0.0 };
                    for m in 0..h {
                        grad[nw + p * h + m] += delta * alpha[m];
                        dalpha[m] += delta * net.v[p * h + m];
                    }
                }
                for m in 0..h {
                    let dz = dalpha[m] * (1.0 - alpha[m] * alpha[m]);
                    if dz != 0.0 {
                        let row = &mut grad[m * n..(m + 1) * n];
                        for &(l, x) in data.nonzero(i) {
                            row[l] += dz * x;
                        }
                    }
                }
            }
            (e, grad)
        })
        .collect();

    let mut total = 0.0;
    let mut grad = vec![0.0; nw + o * h];
    for (e, g) in partial {
        total += e;
        for (a, b) in grad.iter_mut().zip(&g) {
            *a += b;
        }
    }
    let weights = net.params();
    for ((g, &x), keep) in grad.iter_mut().zip(&weights).zip(net.mask()) {
        if keep {
            let (value, dx) = decay_terms(x, params);
            total += value;
            *g += dx;
        } else {
            *g = 0.0;
        }
    }
    Ok((total, grad))
}

/// Fraction of samples whose argmax output matches the target.
pub fn accuracy(net: &Network, data: &Dataset) -> f64 {
    if data.is_empty() {
        return 0.0;
    }
    let correct: usize = predictions(net, data)
        .iter()
        .zip(data.targets())
        .filter(|(a, b)| a == b)
        .count();
    correct as f64 / data.len() as f64
}

pub fn predictions(net: &Network, data: &Dataset) -> Vec<usize> {
    let mut alpha = vec![0.0; net.n_hidden];
    (0..data.len())
        .map(|i| {
            net.sample_hidden(data, i, &mut alpha);
            classify(&net.outputs_from_hidden(&alpha))
        })
        .collect()
}

/// Per-sample margin test results.
pub fn margin_flags(net: &Network, data: &Dataset, eta1: f64) -> Vec<bool> {
    let mut alpha = vec![0.0; net.n_hidden];
    (0..data.len())
        .map(|i| {
            net.sample_hidden(data, i, &mut alpha);
            is_correct(&net.outputs_from_hidden(&alpha), &data.target_vector(i), eta1)
        })
        .collect()
}

/// Fraction of samples meeting the margin test.
pub fn margin_rate(net: &Network, data: &Dataset, eta1: f64) -> f64 {
    if data.is_empty() {
        return 0.0;
    }
    margin_flags(net, data, eta1).iter().filter(|&&b| b).count() as f64 / data.len() as f64
}
