//! Splitting hidden nodes with too many inputs through a trained subnetwork.
//!
//! The subnetwork sees the node's input bits plus a bias and learns to predict
//! which activation cluster the node falls into. Rules extracted from it
//! replace the node's truth table when they reproduce the cluster labels
//! exactly on the training data; otherwise the observed bit patterns are
//! tabled directly.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{
    extract_at, fires, node_inputs, observed_node_table, BitConjunction, ClusterTable, ExtractConfig, ExtractError,
    InputSpace, Tabling,
};
use crate::network::{Dataset, Network, ObjectiveParams};
use crate::pruner::{prune, PruneConfig};
use crate::trainer::{train, TrainConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplitConfig {
    pub hidden: usize,
    pub seed: u64,
    pub params: ObjectiveParams,
    pub train: TrainConfig,
    pub prune: PruneConfig,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            hidden: 3,
            seed: 1,
            params: ObjectiveParams::default(),
            train: TrainConfig::default(),
            prune: PruneConfig { accuracy_floor: 1.0, ..PruneConfig::default() },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitOutcome {
    pub node: usize,
    pub depth: usize,
    pub tabling: Tabling,
    /// Links left in the accepted subnetwork.
    pub subnet_links: Option<usize>,
    /// Input rules per cluster, in the parent network's input indices.
    pub rules: BTreeMap<usize, Vec<BitConjunction>>,
    pub warnings: Vec<String>,
}

/// Indicator training set: node `m`'s input bits plus bias, labelled by cluster.
pub fn subnet_dataset(
    net: &Network,
    m: usize,
    tables: &[ClusterTable],
    data: &Dataset,
    inputs: &[usize],
) -> Result<Dataset, ExtractError> {
    let mut rows = Vec::with_capacity(data.len());
    let mut targets = Vec::with_capacity(data.len());
    for i in 0..data.len() {
        let x = data.input(i);
        let mut row: Vec<f64> = inputs.iter().map(|&l| x[l]).collect();
        row.push(1.0);
        rows.push(row);
        targets.push(tables[m].nearest(net.hidden_activations(x)?[m]));
    }
    Ok(Dataset::new(inputs.len() + 1, tables[m].len().max(2), rows, targets)?)
}

/// Rules for the listed clusters of node `m`, via a subnetwork when its
/// fan-in is over the cap.
#[allow(clippy::too_many_arguments)]
pub fn split_hidden_node(
    net: &Network,
    m: usize,
    tables: &[ClusterTable],
    data: &Dataset,
    space: &InputSpace,
    cfg: &ExtractConfig,
    depth: usize,
    clusters: &[usize],
) -> Result<SplitOutcome, ExtractError> {
    let inputs = node_inputs(net, m, space);
    let mut outcome = SplitOutcome {
        node: m,
        depth,
        tabling: Tabling::Exhaustive,
        subnet_links: None,
        rules: BTreeMap::new(),
        warnings: Vec::new(),
    };
    if inputs.len() <= cfg.fan_in_cap {
        let t = super::exhaustive_node_table(net, m, tables, space, cfg.fan_in_cap)?;
        for &c in clusters {
            outcome.rules.insert(c, t.rules_for(c, cfg.candidate_cap)?);
        }
        return Ok(outcome);
    }
    if depth >= cfg.max_split_depth {
        return Err(ExtractError::SplitDepth { node: m, depth: depth + 1, limit: cfg.max_split_depth });
    }
    if tables[m].len() == 1 {
        for &c in clusters {
            outcome.rules.insert(c, vec![Vec::new()]);
        }
        return Ok(outcome);
    }

    match subnet_rules(net, m, tables, data, space, cfg, depth, clusters, &inputs) {
        Ok(Some((links, rules))) => {
            outcome.tabling = Tabling::Subnetwork;
            outcome.subnet_links = Some(links);
            outcome.rules = rules;
            return Ok(outcome);
        }
        Ok(None) => outcome
            .warnings
            .push(format!("node {}: subnetwork did not reproduce its clusters; tabling observed patterns", m + 1)),
        Err(e @ ExtractError::SplitDepth { .. }) => return Err(e),
        Err(e) => outcome
            .warnings
            .push(format!("node {}: subnetwork failed ({e}); tabling observed patterns", m + 1)),
    }
    let t = observed_node_table(net, m, tables, data, space)?;
    outcome.tabling = Tabling::Observed;
    for &c in clusters {
        outcome.rules.insert(c, t.rules_for(c, cfg.candidate_cap)?);
    }
    Ok(outcome)
}

type SubnetRules = (usize, BTreeMap<usize, Vec<BitConjunction>>);

#[allow(clippy::too_many_arguments)]
fn subnet_rules(
    net: &Network,
    m: usize,
    tables: &[ClusterTable],
    data: &Dataset,
    space: &InputSpace,
    cfg: &ExtractConfig,
    depth: usize,
    clusters: &[usize],
    inputs: &[usize],
) -> Result<Option<SubnetRules>, ExtractError> {
    let sub = subnet_dataset(net, m, tables, data, inputs)?;
    let sc = &cfg.split;
    let start = Network::random(sub.n_inputs(), sc.hidden, sub.n_classes(), sc.seed)?;
    let trained = match train(&start, &sub, &sc.params, &sc.train) {
        Ok((n, _)) => n,
        Err(e) => return Err(ExtractError::Subnetwork(e.to_string())),
    };
    let pruned = match prune(&trained, &sub, &sc.params, &sc.prune, &sc.train) {
        Ok((n, _)) => n,
        Err(e) => return Err(ExtractError::Subnetwork(e.to_string())),
    };
    let bias = sub.n_inputs() - 1;
    let widest = (0..pruned.n_hidden())
        .map(|h| pruned.connected_inputs(h).iter().filter(|&&l| l != bias).count())
        .max()
        .unwrap_or(0);
    if widest >= inputs.len() {
        return Ok(None);
    }
    let global: Vec<usize> = inputs.iter().map(|&l| space.global(l)).collect();
    let sub_space = InputSpace { scheme: space.scheme, bias: Some(bias), index_map: Some(&global) };
    let sub_cfg = ExtractConfig { required_accuracy: 1.0, ..cfg.clone() };
    let ex = extract_at(&pruned, &sub, &sub_space, &sub_cfg, depth + 1, Some(clusters))?;

    let mut rules = BTreeMap::new();
    for &c in clusters {
        let local: Vec<BitConjunction> =
            ex.rules.iter().filter(|r| r.class == c).map(|r| r.conditions.clone()).collect();
        for i in 0..sub.len() {
            let hit = local.iter().any(|conj| fires(conj, sub.input(i)));
            if hit != (sub.target(i) == c) {
                return Ok(None);
            }
        }
        let mapped = local
            .into_iter()
            .map(|conj| conj.into_iter().map(|(l, b)| (inputs[l], b)).collect())
            .collect();
        rules.insert(c, mapped);
    }
    Ok(Some((pruned.link_count(), rules)))
}
