//! Magnitude-based link pruning with retraining.
//!
//! An input link `(m, l)` may go when `max_p |v[p][m] * w[m][l]| <= 4 * eta2`,
//! an output link `(m, p)` when `|v[p][m]| <= 4 * eta2`. With `eta1 + eta2 < 0.5`
//! a sample that met the output margin `eta1` stays correctly classified.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::network::{accuracy, Dataset, NetError, Network, ObjectiveParams};
use crate::trainer::{retrain, TrainConfig, TrainError};

#[derive(Debug, Error, PartialEq)]
pub enum PruneError {
    #[error("initial accuracy {accuracy:.4} is below the floor {floor:.4}")]
    BelowFloor { accuracy: f64, floor: f64 },
    #[error("invalid prune configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error(transparent)]
    Net(#[from] NetError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PruneConfig {
    pub eta1: f64,
    pub eta2: f64,
    pub accuracy_floor: f64,
    pub max_rounds: usize,
}

impl Default for PruneConfig {
    fn default() -> Self {
        PruneConfig {
            eta1: 0.35,
            eta2: 0.1,
            accuracy_floor: 0.9,
            max_rounds: 200,
        }
    }
}

impl PruneConfig {
    pub fn from_params(params: &ObjectiveParams, accuracy_floor: f64, max_rounds: usize) -> Self {
        PruneConfig {
            eta1: params.eta1,
            eta2: params.eta2,
            accuracy_floor,
            max_rounds,
        }
    }

    pub fn validate(&self) -> Result<(), PruneError> {
        if !(self.eta1 > 0.0 && self.eta2 > 0.0 && self.eta1 + self.eta2 < 0.5) {
            return Err(PruneError::Config(format!(
                "need positive eta1, eta2 with eta1 + eta2 < 0.5 (got {} + {})",
                self.eta1, self.eta2
            )));
        }
        if !(self.accuracy_floor > 0.0 && self.accuracy_floor <= 1.0) {
            return Err(PruneError::Config("accuracy_floor must lie in (0, 1]".into()));
        }
        if self.max_rounds == 0 {
            return Err(PruneError::Config("max_rounds must be positive".into()));
        }
        Ok(())
    }
}

/// `max_p |v[p][m] * w[m][l]|` over unpruned output links.
pub fn input_link_saliency(net: &Network, m: usize, l: usize) -> f64 {
    (0..net.n_outputs())
        .map(|p| (net.v(p, m) * net.w(m, l)).abs())
        .fold(0.0, f64::max)
}

/// Unpruned input links `(m, l)` meeting the input-link condition.
pub fn removable_input_weights(net: &Network, eta2: f64) -> Vec<(usize, usize)> {
    let limit = 4.0 * eta2;
    let mut out = Vec::new();
    for m in 0..net.n_hidden() {
        for l in 0..net.n_inputs() {
            if net.has_w(m, l) && input_link_saliency(net, m, l) <= limit {
                out.push((m, l));
            }
        }
    }
    out
}

/// Unpruned output links `(m, p)` meeting the output-link condition.
pub fn removable_output_weights(net: &Network, eta2: f64) -> Vec<(usize, usize)> {
    let limit = 4.0 * eta2;
    let mut out = Vec::new();
    for m in 0..net.n_hidden() {
        for p in 0..net.n_outputs() {
            if net.has_v(p, m) && net.v(p, m).abs() <= limit {
                out.push((m, p));
            }
        }
    }
    out
}

/// Unpruned input link with the smallest saliency; ties go to the lowest `(m, l)`.
pub fn least_salient_input(net: &Network) -> Option<(usize, usize)> {
    let mut best: Option<((usize, usize), f64)> = None;
    for m in 0..net.n_hidden() {
        for l in 0..net.n_inputs() {
            if !net.has_w(m, l) {
                continue;
            }
            let s = input_link_saliency(net, m, l);
            if best.map_or(true, |(_, b)| s < b) {
                best = Some(((m, l), s));
            }
        }
    }
    best.map(|(link, _)| link)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PruneRound {
    pub round: usize,
    pub input_links_removed: usize,
    pub output_links_removed: usize,
    /// The round fell back to removing the single least salient input link.
    pub forced: bool,
    pub retrain_iterations: usize,
    pub links_after: usize,
    pub accuracy: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PruneReport {
    pub initial_links: usize,
    pub final_links: usize,
    pub initial_accuracy: f64,
    pub final_accuracy: f64,
    pub rounds: Vec<PruneRound>,
    pub hit_max_rounds: bool,
    /// Original indices of hidden nodes deleted after pruning.
    pub removed_hidden: Vec<usize>,
    /// Inputs left without any link.
    pub irrelevant_inputs: Vec<usize>,
}

/// Runs the prune/retrain loop until the accuracy floor would be violated.
pub fn prune(
    net: &Network,
    data: &Dataset,
    params: &ObjectiveParams,
    cfg: &PruneConfig,
    train_cfg: &TrainConfig,
) -> Result<(Network, PruneReport), PruneError> {
    cfg.validate()?;
    let initial_accuracy = accuracy(net, data);
    if initial_accuracy < cfg.accuracy_floor {
        return Err(PruneError::BelowFloor {
            accuracy: initial_accuracy,
            floor: cfg.accuracy_floor,
        });
    }
    let mut best = net.clone();
    let mut best_accuracy = initial_accuracy;
    let mut rounds = Vec::new();
    let mut hit_max_rounds = true;

    for round in 1..=cfg.max_rounds {
        let inputs = removable_input_weights(&best, cfg.eta2);
        let outputs = removable_output_weights(&best, cfg.eta2);
        let mut trial = best.clone();
        let forced = inputs.is_empty() && outputs.is_empty();
        if forced {
            match least_salient_input(&best) {
                Some((m, l)) => trial.remove_w(m, l),
                None => {
                    hit_max_rounds = false;
                    break;
                }
            }
        } else {
            for &(m, l) in &inputs {
                trial.remove_w(m, l);
            }
            for &(m, p) in &outputs {
                trial.remove_v(p, m);
            }
        }
        let (trained, report) = retrain(&trial, data, params, train_cfg)?;
        let acc = report.accuracy;
        let accepted = acc >= cfg.accuracy_floor;
        rounds.push(PruneRound {
            round,
            input_links_removed: if forced { 1 } else { inputs.len() },
            output_links_removed: outputs.len(),
            forced,
            retrain_iterations: report.iterations,
            links_after: trained.link_count(),
            accuracy: acc,
            accepted,
        });
        if !accepted {
            hit_max_rounds = false;
            break;
        }
        best = trained;
        best_accuracy = acc;
    }

    let removed_hidden = best.dead_hidden_nodes();
    let keep_one = removed_hidden.len() == best.n_hidden();
    let removed_hidden: Vec<usize> = if keep_one {
        removed_hidden[1..].to_vec()
    } else {
        removed_hidden
    };
    let pruned = if removed_hidden.is_empty() {
        best
    } else {
        best.without_hidden(&removed_hidden)?
    };
    let irrelevant_inputs = (0..pruned.n_inputs())
        .filter(|&l| (0..pruned.n_hidden()).all(|m| !pruned.has_w(m, l)))
        .collect();
    let report = PruneReport {
        initial_links: net.link_count(),
        final_links: pruned.link_count(),
        initial_accuracy,
        final_accuracy: best_accuracy,
        rounds,
        hit_max_rounds,
        removed_hidden,
        irrelevant_inputs,
    };
    Ok((pruned, report))
}
