//! Rule extraction from a pruned network.
//!
//! Hidden activations are clustered into a few discrete values, the output
//! layer is tabulated over every combination of those values, and rules are
//! induced twice: from discrete activations to classes and from input bits to
//! each discrete activation. Substituting the second set into the first gives
//! rules over input bits.

pub mod cluster;
pub mod cover;
pub mod split;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::encoder::EncodingScheme;
use crate::network::{classify, Dataset, NetError, Network};

pub use cluster::{cluster_activations, cluster_with_log, ClusterTable, Insertion};
pub use cover::{perfect_cover_rules, Conjunction, CANDIDATE_CAP};
pub use split::{split_hidden_node, SplitConfig, SplitOutcome};

/// Smallest clustering radius tried before giving up.
pub const MIN_EPSILON: f64 = 1e-6;

#[derive(Debug, Error, PartialEq)]
pub enum ExtractError {
    #[error("invalid extraction config: {0}")]
    Config(String),
    #[error("malformed table: {0}")]
    Table(String),
    #[error("identical table rows {0:?} carry different labels")]
    Conflict(Vec<usize>),
    #[error("no clustering radius down to {min} keeps accuracy at {required} (last {last})")]
    EpsilonUnderflow { min: f64, required: f64, last: f64 },
    #[error("activation table would have {rows} rows, cap is {cap}")]
    TableTooLarge { rows: usize, cap: usize },
    #[error("hidden node {node} has {fan_in} inputs, cap is {cap}")]
    FanIn { node: usize, fan_in: usize, cap: usize },
    #[error("splitting hidden node {node} needs depth {depth}, limit is {limit}")]
    SplitDepth { node: usize, depth: usize, limit: usize },
    #[error("no input rules for node {node} cluster {cluster}")]
    MissingInputRules { node: usize, cluster: usize },
    #[error("subnetwork training failed: {0}")]
    Subnetwork(String),
    #[error("substitution would produce {0} combinations")]
    Substitution(usize),
    #[error("input {input} of tuple {tuple} is {value}, expected 0 or 1")]
    NonBinary { tuple: usize, input: usize, value: f64 },
    #[error(transparent)]
    Net(#[from] NetError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExtractConfig {
    pub epsilon: f64,
    pub required_accuracy: f64,
    pub fan_in_cap: usize,
    pub enumeration_cap: usize,
    pub candidate_cap: usize,
    pub max_split_depth: usize,
    pub max_substitutions: usize,
    pub split: SplitConfig,
}

impl Default for ExtractConfig {
    fn default() -> Self {
        ExtractConfig {
            epsilon: 0.6,
            required_accuracy: 0.9,
            fan_in_cap: 15,
            enumeration_cap: 4096,
            candidate_cap: CANDIDATE_CAP,
            max_split_depth: 3,
            max_substitutions: 1_000_000,
            split: SplitConfig::default(),
        }
    }
}

impl ExtractConfig {
    pub fn validate(&self) -> Result<(), ExtractError> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(ExtractError::Config(format!("epsilon {} not in (0, 1)", self.epsilon)));
        }
        if !(0.0..=1.0).contains(&self.required_accuracy) {
            return Err(ExtractError::Config(format!(
                "required accuracy {} not in [0, 1]",
                self.required_accuracy
            )));
        }
        if self.fan_in_cap > 24 {
            return Err(ExtractError::Config(format!("fan-in cap {} above 24", self.fan_in_cap)));
        }
        if self.enumeration_cap == 0 || self.candidate_cap == 0 || self.max_substitutions == 0 {
            return Err(ExtractError::Config("caps must be positive".into()));
        }
        Ok(())
    }
}

/// Where the network's inputs come from: an optional encoding scheme used to
/// discard impossible bit patterns, the bias input, and for subnetworks the
/// position of each local input in the scheme.
#[derive(Debug, Clone, Copy)]
pub struct InputSpace<'a> {
    pub scheme: Option<&'a EncodingScheme>,
    pub bias: Option<usize>,
    pub index_map: Option<&'a [usize]>,
}

impl<'a> InputSpace<'a> {
    pub fn encoded(scheme: &'a EncodingScheme) -> Self {
        InputSpace { scheme: Some(scheme), bias: Some(scheme.bias_index()), index_map: None }
    }

    pub fn plain(bias: Option<usize>) -> Self {
        InputSpace { scheme: None, bias, index_map: None }
    }

    /// Scheme index of local input `l`.
    pub fn global(&self, l: usize) -> usize {
        self.index_map.map_or(l, |m| m[l])
    }

    /// Whether some admissible tuple satisfies the local bit conditions.
    pub fn feasible(&self, conditions: &[(usize, bool)]) -> bool {
        match self.scheme {
            None => true,
            Some(s) => {
                let mapped: Vec<(usize, bool)> =
                    conditions.iter().map(|&(l, b)| (self.global(l), b)).collect();
                s.feasible(&mapped)
            }
        }
    }
}

/// Conjunction of `(input, bit)` conditions, sorted by input.
pub type BitConjunction = Vec<(usize, bool)>;

/// A rule from discrete values to a discrete consequent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscreteRule {
    pub antecedent: Vec<(usize, usize)>,
    pub consequent: usize,
}

/// A rule over input bits.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BitRule {
    pub conditions: BitConjunction,
    pub class: usize,
}

impl BitRule {
    pub fn fires(&self, x: &[f64]) -> bool {
        fires(&self.conditions, x)
    }
}

pub fn fires(conditions: &[(usize, bool)], x: &[f64]) -> bool {
    conditions.iter().all(|&(l, b)| (x[l] == 1.0) == b)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivationRow {
    pub clusters: Vec<usize>,
    pub activations: Vec<f64>,
    pub outputs: Vec<f64>,
    pub class: usize,
}

/// Network outputs for every combination of discrete hidden activations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivationOutputTable {
    pub rows: Vec<ActivationRow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tabling {
    /// Every feasible assignment of the node's input bits.
    Exhaustive,
    /// Only bit patterns seen in the training data.
    Observed,
    /// Rules taken from a subnetwork trained to predict the node's clusters.
    Subnetwork,
}

/// Truth table of one hidden node over its connected input bits.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeTable {
    pub node: usize,
    pub inputs: Vec<usize>,
    pub patterns: Vec<Vec<usize>>,
    pub clusters: Vec<usize>,
    pub tabling: Tabling,
}

impl NodeTable {
    /// Perfect-cover rules for the patterns landing in `cluster`.
    pub fn rules_for(&self, cluster: usize, candidate_cap: usize) -> Result<Vec<BitConjunction>, ExtractError> {
        let positive: Vec<bool> = self.clusters.iter().map(|&c| c == cluster).collect();
        let covers = perfect_cover_rules(&self.patterns, &positive, candidate_cap)?;
        Ok(covers
            .into_iter()
            .map(|c| c.into_iter().map(|(v, bit)| (self.inputs[v], bit == 1)).collect())
            .collect())
    }
}

/// Input rules for one discrete activation value of one node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeRules {
    pub node: usize,
    pub cluster: usize,
    pub value: f64,
    pub tabling: Tabling,
    pub rules: Vec<BitConjunction>,
}

/// Everything produced by one extraction run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extraction {
    pub epsilon: f64,
    pub clusters: Vec<ClusterTable>,
    pub fidelity: f64,
    pub table: ActivationOutputTable,
    pub output_rules: Vec<DiscreteRule>,
    pub default_class: usize,
    pub node_rules: Vec<NodeRules>,
    pub rules: Vec<BitRule>,
    pub splits: Vec<SplitOutcome>,
    pub warnings: Vec<String>,
}

impl Extraction {
    /// First matching rule, else the default class.
    pub fn classify_bits(&self, x: &[f64]) -> usize {
        self.rules.iter().find(|r| r.fires(x)).map_or(self.default_class, |r| r.class)
    }

    /// Plain-text dump of every stage.
    pub fn report(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "epsilon {}", self.epsilon);
        let _ = writeln!(s, "discretized accuracy {:.4}", self.fidelity);
        let _ = writeln!(s, "\nclusters");
        for (m, t) in self.clusters.iter().enumerate() {
            let values: Vec<String> = t.representatives.iter().map(|h| format!("{h:.4}")).collect();
            let _ = writeln!(s, "  node {}: {} ({})  counts {:?}", m + 1, t.len(), values.join(", "), t.counts);
        }
        let _ = writeln!(s, "\nactivation table");
        for row in &self.table.rows {
            let a: Vec<String> = row.activations.iter().map(|x| format!("{x:>8.4}")).collect();
            let o: Vec<String> = row.outputs.iter().map(|x| format!("{x:.4}")).collect();
            let _ = writeln!(s, "  {} | {} | class {}", a.join(" "), o.join(" "), row.class);
        }
        let _ = writeln!(s, "\nactivation rules");
        for (k, r) in self.output_rules.iter().enumerate() {
            let lits: Vec<String> = r
                .antecedent
                .iter()
                .map(|&(m, c)| format!("a{} = {:.4}", m + 1, self.clusters[m].representatives[c]))
                .collect();
            let _ = writeln!(s, "  R{}: class {} <= {}", k + 1, r.consequent, join_or_true(&lits));
        }
        let _ = writeln!(s, "\ninput rules per activation");
        for nr in &self.node_rules {
            for conj in &nr.rules {
                let _ = writeln!(
                    s,
                    "  a{} = {:.4} <= {}  [{:?}]",
                    nr.node + 1,
                    nr.value,
                    format_bits(conj),
                    nr.tabling
                );
            }
        }
        for sp in &self.splits {
            let _ = writeln!(s, "\nsplit node {}: {:?}", sp.node + 1, sp.tabling);
            if let Some(links) = sp.subnet_links {
                let _ = writeln!(s, "  subnetwork links {links}");
            }
        }
        let _ = writeln!(s, "\ninput rules (default class {})", self.default_class);
        for r in &self.rules {
            let _ = writeln!(s, "  class {} <= {}", r.class, format_bits(&r.conditions));
        }
        if !self.warnings.is_empty() {
            let _ = writeln!(s, "\nwarnings");
            for w in &self.warnings {
                let _ = writeln!(s, "  {w}");
            }
        }
        s
    }
}

fn join_or_true(parts: &[String]) -> String {
    if parts.is_empty() {
        "true".into()
    } else {
        parts.join(", ")
    }
}

/// `I{n} = b` list with 1-based input numbers.
pub fn format_bits(conditions: &[(usize, bool)]) -> String {
    let parts: Vec<String> = conditions.iter().map(|&(l, b)| format!("I{} = {}", l + 1, u8::from(b))).collect();
    join_or_true(&parts)
}

fn activations(net: &Network, data: &Dataset) -> Result<Vec<Vec<f64>>, ExtractError> {
    (0..data.len()).map(|i| Ok(net.hidden_activations(data.input(i))?)).collect()
}

fn discretized_class_from(net: &Network, tables: &[ClusterTable], alpha: &[f64]) -> usize {
    let d: Vec<f64> = alpha.iter().zip(tables).map(|(&a, t)| t.discretize(a)).collect();
    classify(&net.outputs_from_hidden(&d))
}

/// Class predicted when each hidden activation is replaced by its nearest representative.
pub fn discretized_class(net: &Network, tables: &[ClusterTable], x: &[f64]) -> Result<usize, ExtractError> {
    Ok(discretized_class_from(net, tables, &net.hidden_activations(x)?))
}

/// Clusters every hidden node's training activations with radius `epsilon`.
pub fn cluster_network(net: &Network, data: &Dataset, epsilon: f64) -> Result<Vec<ClusterTable>, ExtractError> {
    let acts = activations(net, data)?;
    Ok(cluster_from(&acts, net.n_hidden(), epsilon))
}

fn cluster_from(acts: &[Vec<f64>], hidden: usize, epsilon: f64) -> Vec<ClusterTable> {
    (0..hidden)
        .map(|m| {
            let values: Vec<f64> = acts.iter().map(|a| a[m]).collect();
            cluster_activations(&values, epsilon)
        })
        .collect()
}

fn fidelity_from(net: &Network, tables: &[ClusterTable], acts: &[Vec<f64>], data: &Dataset) -> f64 {
    if acts.is_empty() {
        return 0.0;
    }
    let hits = acts
        .iter()
        .enumerate()
        .filter(|(i, a)| discretized_class_from(net, tables, a) == data.target(*i))
        .count();
    hits as f64 / acts.len() as f64
}

/// Accuracy of the discretized network and whether it reaches `required`.
pub fn check_cluster_fidelity(
    net: &Network,
    tables: &[ClusterTable],
    data: &Dataset,
    required: f64,
) -> Result<(bool, f64), ExtractError> {
    let acts = activations(net, data)?;
    let acc = fidelity_from(net, tables, &acts, data);
    Ok((acc >= required, acc))
}

/// Halves the clustering radius from `epsilon0` until the discretized
/// network reaches `required` accuracy.
pub fn auto_epsilon(
    net: &Network,
    data: &Dataset,
    required: f64,
    epsilon0: f64,
) -> Result<(f64, Vec<ClusterTable>), ExtractError> {
    if !(epsilon0 > 0.0 && epsilon0 < 1.0) {
        return Err(ExtractError::Config(format!("epsilon {epsilon0} not in (0, 1)")));
    }
    let acts = activations(net, data)?;
    let mut eps = epsilon0;
    let mut last = 0.0;
    while eps >= MIN_EPSILON {
        let tables = cluster_from(&acts, net.n_hidden(), eps);
        last = fidelity_from(net, &tables, &acts, data);
        if last >= required {
            return Ok((eps, tables));
        }
        eps *= 0.5;
    }
    Err(ExtractError::EpsilonUnderflow { min: MIN_EPSILON, required, last })
}

/// Output layer evaluated over the cartesian product of cluster values.
///
/// Rows are ordered with the first node varying slowest.
pub fn enumerate_output_table(
    net: &Network,
    tables: &[ClusterTable],
    cap: usize,
) -> Result<ActivationOutputTable, ExtractError> {
    let sizes: Vec<usize> = tables.iter().map(ClusterTable::len).collect();
    let total = sizes.iter().try_fold(1usize, |a, &d| a.checked_mul(d)).unwrap_or(usize::MAX);
    if total > cap {
        return Err(ExtractError::TableTooLarge { rows: total, cap });
    }
    let mut rows = Vec::with_capacity(total);
    let mut idx = vec![0usize; sizes.len()];
    for _ in 0..total {
        let activations: Vec<f64> = idx.iter().zip(tables).map(|(&j, t)| t.representatives[j]).collect();
        let outputs = net.outputs_from_hidden(&activations);
        let class = classify(&outputs);
        rows.push(ActivationRow { clusters: idx.clone(), activations, outputs, class });
        for k in (0..idx.len()).rev() {
            idx[k] += 1;
            if idx[k] < sizes[k] {
                break;
            }
            idx[k] = 0;
        }
    }
    Ok(ActivationOutputTable { rows })
}

/// Output layer evaluated only at the cluster combinations reached by `acts`,
/// in the same row order as the full table.
pub fn observed_output_table(net: &Network, tables: &[ClusterTable], acts: &[Vec<f64>]) -> ActivationOutputTable {
    let observed: BTreeSet<Vec<usize>> =
        acts.iter().map(|a| a.iter().zip(tables).map(|(&v, t)| t.nearest(v)).collect()).collect();
    let rows = observed
        .into_iter()
        .map(|clusters| {
            let activations: Vec<f64> = clusters.iter().zip(tables).map(|(&j, t)| t.representatives[j]).collect();
            let outputs = net.outputs_from_hidden(&activations);
            let class = classify(&outputs);
            ActivationRow { clusters, activations, outputs, class }
        })
        .collect();
    ActivationOutputTable { rows }
}

/// Perfect-cover rules from discrete activations to `class`.
pub fn activation_rules(
    table: &ActivationOutputTable,
    class: usize,
    candidate_cap: usize,
) -> Result<Vec<DiscreteRule>, ExtractError> {
    let rows: Vec<Vec<usize>> = table.rows.iter().map(|r| r.clusters.clone()).collect();
    let positive: Vec<bool> = table.rows.iter().map(|r| r.class == class).collect();
    Ok(perfect_cover_rules(&rows, &positive, candidate_cap)?
        .into_iter()
        .map(|antecedent| DiscreteRule { antecedent, consequent: class })
        .collect())
}

/// Inputs feeding hidden node `m`, bias excluded.
pub fn node_inputs(net: &Network, m: usize, space: &InputSpace) -> Vec<usize> {
    net.connected_inputs(m).into_iter().filter(|&l| Some(l) != space.bias).collect()
}

fn pattern_input(net: &Network, inputs: &[usize], bits: &[usize], space: &InputSpace) -> Vec<f64> {
    let mut x = vec![0.0; net.n_inputs()];
    if let Some(b) = space.bias {
        x[b] = 1.0;
    }
    for (&l, &bit) in inputs.iter().zip(bits) {
        x[l] = bit as f64;
    }
    x
}

/// Truth table of node `m` over every feasible assignment of its input bits.
pub fn exhaustive_node_table(
    net: &Network,
    m: usize,
    tables: &[ClusterTable],
    space: &InputSpace,
    fan_in_cap: usize,
) -> Result<NodeTable, ExtractError> {
    let inputs = node_inputs(net, m, space);
    if inputs.len() > fan_in_cap {
        return Err(ExtractError::FanIn { node: m, fan_in: inputs.len(), cap: fan_in_cap });
    }
    let k = inputs.len();
    let mut patterns = Vec::new();
    let mut clusters = Vec::new();
    for code in 0u64..(1u64 << k) {
        let bits: Vec<usize> = (0..k).map(|i| ((code >> (k - 1 - i)) & 1) as usize).collect();
        let conds: Vec<(usize, bool)> = inputs.iter().zip(&bits).map(|(&l, &b)| (l, b == 1)).collect();
        if !space.feasible(&conds) {
            continue;
        }
        let alpha = net.hidden_activations(&pattern_input(net, &inputs, &bits, space))?;
        clusters.push(tables[m].nearest(alpha[m]));
        patterns.push(bits);
    }
    Ok(NodeTable { node: m, inputs, patterns, clusters, tabling: Tabling::Exhaustive })
}

/// Truth table of node `m` over the bit patterns present in `data`.
pub fn observed_node_table(
    net: &Network,
    m: usize,
    tables: &[ClusterTable],
    data: &Dataset,
    space: &InputSpace,
) -> Result<NodeTable, ExtractError> {
    let inputs = node_inputs(net, m, space);
    let mut seen: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    for i in 0..data.len() {
        let x = data.input(i);
        let bits: Vec<usize> = inputs.iter().map(|&l| usize::from(x[l] == 1.0)).collect();
        if !seen.contains_key(&bits) {
            let alpha = net.hidden_activations(x)?;
            seen.insert(bits, tables[m].nearest(alpha[m]));
        }
    }
    let (patterns, clusters) = seen.into_iter().unzip();
    Ok(NodeTable { node: m, inputs, patterns, clusters, tabling: Tabling::Observed })
}

/// Input-bit rules under which node `m` lands in `cluster`.
///
/// Requires the node's fan-in to be within the cap; larger nodes go through
/// [`split_hidden_node`].
pub fn input_rules_for_activation(
    net: &Network,
    m: usize,
    cluster: usize,
    tables: &[ClusterTable],
    space: &InputSpace,
    cfg: &ExtractConfig,
) -> Result<Vec<BitConjunction>, ExtractError> {
    exhaustive_node_table(net, m, tables, space, cfg.fan_in_cap)?.rules_for(cluster, cfg.candidate_cap)
}

fn merge(a: &BitConjunction, b: &[(usize, bool)]) -> Option<BitConjunction> {
    let mut out: BTreeMap<usize, bool> = a.iter().copied().collect();
    for &(l, v) in b {
        if let Some(&prev) = out.get(&l) {
            if prev != v {
                return None;
            }
        }
        out.insert(l, v);
    }
    Some(out.into_iter().collect())
}

fn subsumes(general: &[(usize, bool)], specific: &[(usize, bool)]) -> bool {
    general.iter().all(|c| specific.contains(c))
}

/// Drops duplicate rules and rules implied by a more general rule of the same class.
pub fn remove_subsumed(rules: Vec<BitRule>) -> Vec<BitRule> {
    let mut sorted: Vec<BitRule> = rules.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
    sorted.sort_by(|a, b| a.class.cmp(&b.class).then(a.conditions.len().cmp(&b.conditions.len())).then(a.cmp(b)));
    let mut kept: Vec<BitRule> = Vec::new();
    for r in sorted {
        if !kept.iter().any(|k| k.class == r.class && subsumes(&k.conditions, &r.conditions)) {
            kept.push(r);
        }
    }
    kept
}

/// Replaces each activation literal by its input rules and expands the products.
///
/// Combinations that are contradictory or infeasible under `space` are dropped.
pub fn substitute(
    output_rules: &[DiscreteRule],
    node_rules: &BTreeMap<(usize, usize), Vec<BitConjunction>>,
    space: &InputSpace,
    max_combinations: usize,
) -> Result<Vec<BitRule>, ExtractError> {
    let mut out = Vec::new();
    for rule in output_rules {
        let mut lists = Vec::with_capacity(rule.antecedent.len());
        let mut combos = 1usize;
        for &(m, c) in &rule.antecedent {
            let list = node_rules
                .get(&(m, c))
                .ok_or(ExtractError::MissingInputRules { node: m, cluster: c })?;
            combos = combos.saturating_mul(list.len());
            lists.push(list);
        }
        if combos > max_combinations {
            return Err(ExtractError::Substitution(combos));
        }
        let mut partial: Vec<BitConjunction> = vec![Vec::new()];
        for list in lists {
            let mut next = Vec::new();
            for p in &partial {
                for conj in list.iter() {
                    if let Some(merged) = merge(p, conj) {
                        if space.feasible(&merged) {
                            next.push(merged);
                        }
                    }
                }
            }
            partial = next;
        }
        out.extend(partial.into_iter().map(|conditions| BitRule { conditions, class: rule.consequent }));
    }
    Ok(remove_subsumed(out))
}

/// Like [`substitute`], but keeps only combinations satisfied by at least one
/// row of `data`, so the expansion stays proportional to the data.
///
/// Fails when more than `max_combinations` supported partial products remain.
pub fn substitute_supported(
    output_rules: &[DiscreteRule],
    node_rules: &BTreeMap<(usize, usize), Vec<BitConjunction>>,
    data: &Dataset,
    max_combinations: usize,
) -> Result<Vec<BitRule>, ExtractError> {
    let mut out = Vec::new();
    for rule in output_rules {
        let mut partial: Vec<(BitConjunction, Vec<usize>)> = vec![(Vec::new(), (0..data.len()).collect())];
        for &(m, c) in &rule.antecedent {
            let list = node_rules
                .get(&(m, c))
                .ok_or(ExtractError::MissingInputRules { node: m, cluster: c })?;
            let mut next = Vec::new();
            for (p, rows) in &partial {
                for conj in list {
                    let kept: Vec<usize> = rows.iter().copied().filter(|&i| fires(conj, data.input(i))).collect();
                    if kept.is_empty() {
                        continue;
                    }
                    if let Some(merged) = merge(p, conj) {
                        next.push((merged, kept));
                    }
                }
            }
            if next.len() > max_combinations {
                return Err(ExtractError::Substitution(next.len()));
            }
            partial = next;
        }
        out.extend(partial.into_iter().map(|(conditions, _)| BitRule { conditions, class: rule.consequent }));
    }
    Ok(remove_subsumed(out))
}

fn check_binary(data: &Dataset) -> Result<(), ExtractError> {
    for i in 0..data.len() {
        for (l, &x) in data.input(i).iter().enumerate() {
            if x != 0.0 && x != 1.0 {
                return Err(ExtractError::NonBinary { tuple: i, input: l, value: x });
            }
        }
    }
    Ok(())
}

/// Full extraction on a binary-input dataset.
///
/// The default class is the one the discretized network predicts most often
/// on `data`; rules are produced for every other class.
pub fn extract(net: &Network, data: &Dataset, space: &InputSpace, cfg: &ExtractConfig) -> Result<Extraction, ExtractError> {
    extract_at(net, data, space, cfg, 0, None)
}

pub(crate) fn extract_at(
    net: &Network,
    data: &Dataset,
    space: &InputSpace,
    cfg: &ExtractConfig,
    depth: usize,
    classes: Option<&[usize]>,
) -> Result<Extraction, ExtractError> {
    cfg.validate()?;
    check_binary(data)?;
    if data.n_inputs() != net.n_inputs() {
        return Err(NetError::Dimension { expected: net.n_inputs(), got: data.n_inputs() }.into());
    }
    let (epsilon, clusters) = auto_epsilon(net, data, cfg.required_accuracy, cfg.epsilon)?;
    let acts = activations(net, data)?;
    let fidelity = fidelity_from(net, &clusters, &acts, data);
    let mut warnings = Vec::new();
    let table = match enumerate_output_table(net, &clusters, cfg.enumeration_cap) {
        Err(ExtractError::TableTooLarge { rows, cap }) => {
            warnings.push(format!(
                "activation table would have {rows} rows (cap {cap}); tabulated observed combinations only"
            ));
            observed_output_table(net, &clusters, &acts)
        }
        other => other?,
    };

    let mut votes = vec![0usize; net.n_outputs()];
    for a in &acts {
        votes[discretized_class_from(net, &clusters, a)] += 1;
    }
    let mut default_class = 0;
    for (c, &v) in votes.iter().enumerate() {
        if v > votes[default_class] {
            default_class = c;
        }
    }

    let mut output_rules = Vec::new();
    for class in 0..net.n_outputs() {
        output_rules.extend(activation_rules(&table, class, cfg.candidate_cap)?);
    }
    let wanted: Vec<usize> = match classes {
        Some(c) => c.to_vec(),
        None => (0..net.n_outputs()).filter(|&c| c != default_class).collect(),
    };
    let used: Vec<DiscreteRule> = output_rules.iter().filter(|r| wanted.contains(&r.consequent)).cloned().collect();

    let mut needed: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for r in &used {
        for &(m, c) in &r.antecedent {
            needed.entry(m).or_default().insert(c);
        }
    }
    let mut lookup: BTreeMap<(usize, usize), Vec<BitConjunction>> = BTreeMap::new();
    let mut node_rules = Vec::new();
    let mut splits = Vec::new();
    for (&m, cs) in &needed {
        let cs: Vec<usize> = cs.iter().copied().collect();
        let (tabling, per_cluster) = if node_inputs(net, m, space).len() <= cfg.fan_in_cap {
            let t = exhaustive_node_table(net, m, &clusters, space, cfg.fan_in_cap)?;
            let rules = cs.iter().map(|&c| Ok((c, t.rules_for(c, cfg.candidate_cap)?))).collect::<Result<Vec<_>, ExtractError>>()?;
            (Tabling::Exhaustive, rules)
        } else {
            let outcome = split_hidden_node(net, m, &clusters, data, space, cfg, depth, &cs)?;
            warnings.extend(outcome.warnings.iter().cloned());
            let rules = outcome.rules.clone().into_iter().collect();
            let tabling = outcome.tabling;
            splits.push(outcome);
            (tabling, rules)
        };
        for (c, rules) in per_cluster {
            node_rules.push(NodeRules { node: m, cluster: c, value: clusters[m].representatives[c], tabling, rules: rules.clone() });
            lookup.insert((m, c), rules);
        }
    }
    let rules = match substitute(&used, &lookup, space, cfg.max_substitutions) {
        Err(ExtractError::Substitution(n)) => {
            warnings.push(format!(
                "substitution would produce {n} combinations; kept combinations satisfied by training tuples"
            ));
            substitute_supported(&used, &lookup, data, cfg.max_substitutions)?
        }
        other => other?,
    };
    Ok(Extraction {
        epsilon,
        clusters,
        fidelity,
        table,
        output_rules,
        default_class,
        node_rules,
        rules,
        splits,
        warnings,
    })
}

#[cfg(test)]
mod tests;
