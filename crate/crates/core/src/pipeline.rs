//! Batch orchestration: generate, encode, train, prune, extract, evaluate.
//!
//! Every stage reads its inputs from and writes its outputs to one directory,
//! so any contiguous range of stages can be rerun. `manifest.json` records the
//! SHA-256 of each stage's inputs and outputs.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::datagen::{generate_tuples, FunctionId, GeneratorConfig, Tuple};
use crate::encoder::EncodingScheme;
use crate::extractor::{discretized_class, extract, ClusterTable, ExtractConfig, InputSpace};
use crate::io::{self, DatasetMeta, IoError, ModelFile, Provenance};
use crate::network::{accuracy, predictions, Dataset, Network, ObjectiveParams};
use crate::pruner::{prune, PruneConfig, PruneReport};
use crate::ruleset::{evaluate, simplify, RuleSet};
use crate::trainer::{train, TrainConfig, TrainReport};

pub const DATASET: &str = "dataset.csv";
pub const DATASET_META: &str = "dataset.meta.json";
pub const TEST: &str = "test.csv";
pub const TEST_META: &str = "test.meta.json";
pub const SCHEME: &str = "scheme.json";
pub const ENCODED: &str = "encoded.csv";
pub const MODEL_TRAINED: &str = "model_trained.json";
pub const TRAIN_REPORT: &str = "train_report.json";
pub const TRAIN_TRACE: &str = "train_trace.csv";
pub const MODEL_PRUNED: &str = "model_pruned.json";
pub const PRUNE_REPORT: &str = "prune_report.json";
pub const EXTRACTION: &str = "extraction.txt";
pub const CLUSTERS: &str = "clusters.json";
pub const RULES: &str = "rules.txt";
pub const EVALUATION: &str = "evaluation.csv";
pub const RULE_STATS: &str = "rule_stats.csv";
pub const REPORT: &str = "report.txt";
pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error("stage {stage} failed: {message}")]
    Stage { stage: Stage, message: String },
}

impl PipelineError {
    /// 1 for configuration problems, 2 for stage failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Validation(_) => 1,
            PipelineError::Stage { .. } => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Generate,
    Encode,
    Train,
    Prune,
    Extract,
    Evaluate,
}

impl Stage {
    pub const ALL: [Stage; 6] = [
        Stage::Generate,
        Stage::Encode,
        Stage::Train,
        Stage::Prune,
        Stage::Extract,
        Stage::Evaluate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Generate => "generate",
            Stage::Encode => "encode",
            Stage::Train => "train",
            Stage::Prune => "prune",
            Stage::Extract => "extract",
            Stage::Evaluate => "evaluate",
        }
    }

    /// Files the stage reads from the output directory.
    pub fn inputs(self) -> &'static [&'static str] {
        match self {
            Stage::Generate => &[],
            Stage::Encode => &[DATASET],
            Stage::Train => &[ENCODED],
            Stage::Prune => &[ENCODED, MODEL_TRAINED],
            Stage::Extract => &[DATASET, ENCODED, SCHEME, MODEL_PRUNED],
            Stage::Evaluate => &[DATASET, TEST, SCHEME, MODEL_PRUNED, PRUNE_REPORT, CLUSTERS, RULES],
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Stage {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Stage::ALL
            .into_iter()
            .find(|st| st.name() == s.to_ascii_lowercase())
            .ok_or_else(|| format!("unknown stage `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorSection {
    pub function: FunctionId,
    pub train_count: usize,
    pub test_count: usize,
    pub seed: u64,
    pub test_seed: u64,
    /// Label-noise rate of the training set; the test set is noise free.
    pub perturbation: f64,
}

impl Default for GeneratorSection {
    fn default() -> Self {
        GeneratorSection {
            function: FunctionId::F2,
            train_count: 1000,
            test_count: 1000,
            seed: 1,
            test_seed: 1_000_001,
            perturbation: 0.05,
        }
    }
}

impl GeneratorSection {
    pub fn train_config(&self) -> GeneratorConfig {
        GeneratorConfig::new(self.function, self.train_count, self.seed, self.perturbation)
    }

    pub fn test_config(&self) -> GeneratorConfig {
        GeneratorConfig::new(self.function, self.test_count, self.test_seed, 0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EncodingSection {
    /// Only `default` is available.
    pub scheme: String,
}

impl Default for EncodingSection {
    fn default() -> Self {
        EncodingSection { scheme: "default".into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NetworkSection {
    pub hidden: usize,
    /// Networks trained from seeds `train.seed`, `train.seed + 1`, ...
    pub candidates: usize,
}

impl Default for NetworkSection {
    fn default() -> Self {
        NetworkSection { hidden: 4, candidates: 3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PruneSection {
    pub accuracy_floor: f64,
    pub max_rounds: usize,
    /// Iteration cap for each retraining between pruning rounds.
    pub retrain_iterations: usize,
    /// Candidates are pruned in order until one keeps this training accuracy;
    /// otherwise the most accurate pruned candidate is kept.
    pub target_accuracy: f64,
}

impl Default for PruneSection {
    fn default() -> Self {
        PruneSection { accuracy_floor: 0.9, max_rounds: 200, retrain_iterations: 200, target_accuracy: 0.93 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExtractSection {
    /// Clustering must keep the pruned network's training accuracy within
    /// this much, and never below `required_accuracy`.
    pub accuracy_slack: f64,
    #[serde(flatten)]
    pub config: ExtractConfig,
}

impl Default for ExtractSection {
    fn default() -> Self {
        ExtractSection { accuracy_slack: 0.01, config: ExtractConfig::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StageRange {
    pub from: Stage,
    pub to: Stage,
}

impl Default for StageRange {
    fn default() -> Self {
        StageRange { from: Stage::Generate, to: Stage::Evaluate }
    }
}

impl StageRange {
    pub fn only(stage: Stage) -> Self {
        StageRange { from: stage, to: stage }
    }

    pub fn stages(&self) -> Vec<Stage> {
        Stage::ALL.into_iter().filter(|s| (self.from..=self.to).contains(s)).collect()
    }
}

/// Default objective of the pipeline: stronger decay than the library default
/// so that pruning reaches small networks on noisy data.
pub fn pipeline_objective() -> ObjectiveParams {
    ObjectiveParams { eps1: 0.5, eps2: 0.1, ..ObjectiveParams::default() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub out_dir: PathBuf,
    pub generator: GeneratorSection,
    pub encoding: EncodingSection,
    pub network: NetworkSection,
    pub objective: ObjectiveParams,
    pub train: TrainConfig,
    pub prune: PruneSection,
    pub extract: ExtractSection,
    pub stages: StageRange,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            out_dir: PathBuf::from("out"),
            generator: GeneratorSection::default(),
            encoding: EncodingSection::default(),
            network: NetworkSection::default(),
            objective: pipeline_objective(),
            train: TrainConfig::default(),
            prune: PruneSection::default(),
            extract: ExtractSection::default(),
            stages: StageRange::default(),
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self, PipelineError> {
        toml::from_str(text).map_err(|e| PipelineError::Validation(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = io::read_text(path).map_err(|e| PipelineError::Validation(e.to_string()))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("pipeline config serializes")
    }

    /// Config hash that ignores where outputs go.
    pub fn fingerprint(&self) -> String {
        let mut c = self.clone();
        c.out_dir = PathBuf::new();
        c.stages = StageRange::default();
        io::sha256_hex(c.to_toml().as_bytes())
    }

    pub fn scheme(&self) -> Result<EncodingScheme, PipelineError> {
        match self.encoding.scheme.as_str() {
            "default" => Ok(EncodingScheme::default_scheme()),
            other => Err(PipelineError::Validation(format!("unknown encoding scheme `{other}`"))),
        }
    }

    pub fn prune_config(&self) -> PruneConfig {
        PruneConfig::from_params(&self.objective, self.prune.accuracy_floor, self.prune.max_rounds)
    }

    pub fn retrain_config(&self) -> TrainConfig {
        TrainConfig { max_iterations: self.prune.retrain_iterations, trace: false, ..self.train.clone() }
    }

    /// Checks every section; nothing touches the disk.
    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |e: String| PipelineError::Validation(e);
        self.generator.train_config().validate().map_err(|e| bad(e.to_string()))?;
        self.generator.test_config().validate().map_err(|e| bad(e.to_string()))?;
        self.scheme()?.validate().map_err(|e| bad(e.to_string()))?;
        if self.network.hidden == 0 {
            return Err(bad("network.hidden must be positive".into()));
        }
        if self.network.candidates == 0 {
            return Err(bad("network.candidates must be positive".into()));
        }
        if !(self.prune.target_accuracy >= self.prune.accuracy_floor && self.prune.target_accuracy <= 1.0) {
            return Err(bad("prune.target_accuracy must lie in [accuracy_floor, 1]".into()));
        }
        self.objective.validate().map_err(|e| bad(e.to_string()))?;
        self.train.validate().map_err(|e| bad(e.to_string()))?;
        self.retrain_config().validate().map_err(|e| bad(format!("prune.retrain_iterations: {e}")))?;
        self.prune_config().validate().map_err(|e| bad(e.to_string()))?;
        self.extract.config.validate().map_err(|e| bad(e.to_string()))?;
        if !(0.0..1.0).contains(&self.extract.accuracy_slack) {
            return Err(bad("extract.accuracy_slack must lie in [0, 1)".into()));
        }
        if self.stages.from > self.stages.to {
            return Err(bad(format!("stage range {}..{} is empty", self.stages.from, self.stages.to)));
        }
        Ok(())
    }

    /// Inputs of the selected stages that no earlier selected stage produces
    /// and that are missing from the output directory.
    pub fn missing_inputs(&self) -> Vec<String> {
        let stages = self.stages.stages();
        let mut missing = Vec::new();
        for (k, s) in stages.iter().enumerate() {
            for f in s.inputs() {
                let produced = stages[..k].iter().any(|p| produces(*p, f));
                if !produced && !self.out_dir.join(f).is_file() && !missing.contains(&f.to_string()) {
                    missing.push(f.to_string());
                }
            }
        }
        missing
    }
}

fn produces(stage: Stage, file: &str) -> bool {
    let outs: &[&str] = match stage {
        Stage::Generate => &[DATASET, DATASET_META, TEST, TEST_META],
        Stage::Encode => &[SCHEME, ENCODED],
        Stage::Train => &[MODEL_TRAINED, TRAIN_REPORT],
        Stage::Prune => &[MODEL_PRUNED, PRUNE_REPORT],
        Stage::Extract => &[EXTRACTION, CLUSTERS, RULES],
        Stage::Evaluate => &[EVALUATION, RULE_STATS, REPORT],
    };
    outs.contains(&file)
}

/// Input and output hashes of one stage run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config_sha256: String,
    pub stages: BTreeMap<Stage, StageRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainCandidate {
    pub seed: u64,
    pub report: TrainReport,
}

/// Outcome of pruning one candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PruneCandidate {
    pub seed: u64,
    pub links: Option<usize>,
    pub accuracy: Option<f64>,
    pub error: Option<String>,
}

/// All pruned candidates and the full report of the one kept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PruneSummary {
    pub seed: u64,
    pub candidates: Vec<PruneCandidate>,
    pub report: PruneReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub out_dir: PathBuf,
    pub stages: Vec<Stage>,
}

/// Validates `cfg`, then runs the selected stages in order.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<RunSummary, PipelineError> {
    cfg.validate()?;
    let missing = cfg.missing_inputs();
    if !missing.is_empty() {
        return Err(PipelineError::Validation(format!(
            "stage {} needs {} in {}",
            cfg.stages.from,
            missing.join(", "),
            cfg.out_dir.display()
        )));
    }
    fs::create_dir_all(&cfg.out_dir)
        .map_err(|e| PipelineError::Validation(format!("{}: {e}", cfg.out_dir.display())))?;
    let manifest_path = cfg.out_dir.join(MANIFEST);
    let mut manifest: Manifest = if manifest_path.is_file() {
        io::read_json(&manifest_path).unwrap_or_default()
    } else {
        Manifest::default()
    };
    manifest.config_sha256 = cfg.fingerprint();

    let stages = cfg.stages.stages();
    for &stage in &stages {
        let fail = |message: String| PipelineError::Stage { stage, message };
        let dir = &cfg.out_dir;
        let mut record = StageRecord::default();
        for f in stage.inputs() {
            record.inputs.insert(f.to_string(), io::file_sha256(&dir.join(f)).map_err(|e| fail(e.to_string()))?);
        }
        let written = run_stage(stage, cfg).map_err(fail)?;
        for f in written {
            let hash = io::file_sha256(&dir.join(f)).map_err(|e| fail(e.to_string()))?;
            record.outputs.insert(f.to_string(), hash);
        }
        manifest.stages.insert(stage, record);
        io::write_json(&manifest_path, &manifest).map_err(|e| fail(e.to_string()))?;
    }
    Ok(RunSummary { out_dir: cfg.out_dir.clone(), stages })
}

fn run_stage(stage: Stage, cfg: &PipelineConfig) -> Result<Vec<&'static str>, String> {
    let r = match stage {
        Stage::Generate => stage_generate(cfg),
        Stage::Encode => stage_encode(cfg),
        Stage::Train => stage_train(cfg),
        Stage::Prune => stage_prune(cfg),
        Stage::Extract => stage_extract(cfg),
        Stage::Evaluate => stage_evaluate(cfg),
    };
    r.map_err(|e| e.to_string())
}

type StageResult = Result<Vec<&'static str>, Box<dyn std::error::Error>>;

fn read_tuples_file(path: &Path) -> Result<Vec<Tuple>, IoError> {
    io::read_tuples(io::read_bytes(path)?.as_slice())
}

fn read_encoded_file(path: &Path) -> Result<Dataset, IoError> {
    io::read_encoded(io::read_bytes(path)?.as_slice())
}

fn stage_generate(cfg: &PipelineConfig) -> StageResult {
    let dir = &cfg.out_dir;
    for (file, meta_file, gen) in [
        (DATASET, DATASET_META, cfg.generator.train_config()),
        (TEST, TEST_META, cfg.generator.test_config()),
    ] {
        let tuples = generate_tuples(&gen)?;
        io::write_bytes(&dir.join(file), io::tuples_to_string(&tuples)?.as_bytes())?;
        io::write_json(&dir.join(meta_file), &DatasetMeta::new(gen))?;
    }
    Ok(vec![DATASET, DATASET_META, TEST, TEST_META])
}

fn stage_encode(cfg: &PipelineConfig) -> StageResult {
    let dir = &cfg.out_dir;
    let scheme = cfg.scheme()?;
    let tuples = read_tuples_file(&dir.join(DATASET))?;
    io::write_json(&dir.join(SCHEME), &scheme)?;
    io::write_bytes(&dir.join(ENCODED), io::encoded_to_string(&scheme, &tuples)?.as_bytes())?;
    Ok(vec![SCHEME, ENCODED])
}

fn stage_train(cfg: &PipelineConfig) -> StageResult {
    let dir = &cfg.out_dir;
    let data = read_encoded_file(&dir.join(ENCODED))?;
    let data_hash = io::file_sha256(&dir.join(ENCODED))?;
    let mut models = Vec::new();
    let mut reports = Vec::new();
    for k in 0..cfg.network.candidates {
        let seed = cfg.train.seed.wrapping_add(k as u64);
        let net = Network::random(data.n_inputs(), cfg.network.hidden, data.n_classes(), seed)?;
        let (network, report) = train(&net, &data, &cfg.objective, &TrainConfig { seed, ..cfg.train.clone() })?;
        models.push(ModelFile {
            network,
            params: cfg.objective,
            provenance: Provenance { dataset_sha256: data_hash.clone(), seed },
        });
        reports.push(TrainCandidate { seed, report });
    }
    let mut written = vec![MODEL_TRAINED, TRAIN_REPORT];
    if cfg.train.trace {
        let mut s = String::from("seed,iteration,objective,gradient_norm,step\n");
        for c in &reports {
            for t in &c.report.trace {
                s.push_str(&format!("{},{},{},{},{}\n", c.seed, t.iteration, t.objective, t.gradient_norm, t.step));
            }
        }
        io::write_bytes(&dir.join(TRAIN_TRACE), s.as_bytes())?;
        written.push(TRAIN_TRACE);
    }
    for c in &mut reports {
        c.report.trace.clear();
    }
    io::write_json(&dir.join(MODEL_TRAINED), &models)?;
    io::write_json(&dir.join(TRAIN_REPORT), &reports)?;
    Ok(written)
}

fn stage_prune(cfg: &PipelineConfig) -> StageResult {
    let dir = &cfg.out_dir;
    let data = read_encoded_file(&dir.join(ENCODED))?;
    let trained: Vec<ModelFile> = io::read_json(&dir.join(MODEL_TRAINED))?;
    let mut candidates = Vec::new();
    let mut best: Option<(ModelFile, PruneReport)> = None;
    for model in trained {
        let seed = model.provenance.seed;
        match prune(&model.network, &data, &model.params, &cfg.prune_config(), &cfg.retrain_config()) {
            Ok((network, report)) => {
                candidates.push(PruneCandidate {
                    seed,
                    links: Some(report.final_links),
                    accuracy: Some(report.final_accuracy),
                    error: None,
                });
                let better = best.as_ref().is_none_or(|(_, b)| {
                    (report.final_accuracy, std::cmp::Reverse(report.final_links))
                        > (b.final_accuracy, std::cmp::Reverse(b.final_links))
                });
                let done = report.final_accuracy >= cfg.prune.target_accuracy;
                if better {
                    best = Some((ModelFile { network, ..model }, report));
                }
                if done {
                    break;
                }
            }
            Err(e) => candidates.push(PruneCandidate { seed, links: None, accuracy: None, error: Some(e.to_string()) }),
        }
    }
    let Some((model, report)) = best else {
        let errors: Vec<String> = candidates.iter().filter_map(|c| c.error.clone()).collect();
        return Err(format!("no candidate could be pruned: {}", errors.join("; ")).into());
    };
    let seed = model.provenance.seed;
    io::write_json(&dir.join(MODEL_PRUNED), &model)?;
    io::write_json(&dir.join(PRUNE_REPORT), &PruneSummary { seed, candidates, report })?;
    Ok(vec![MODEL_PRUNED, PRUNE_REPORT])
}

fn stage_extract(cfg: &PipelineConfig) -> StageResult {
    let dir = &cfg.out_dir;
    let data = read_encoded_file(&dir.join(ENCODED))?;
    let tuples = read_tuples_file(&dir.join(DATASET))?;
    let scheme: EncodingScheme = io::read_json(&dir.join(SCHEME))?;
    let model: ModelFile = io::read_json(&dir.join(MODEL_PRUNED))?;
    let net_accuracy = accuracy(&model.network, &data);
    let mut ecfg = cfg.extract.config.clone();
    ecfg.required_accuracy = ecfg.required_accuracy.max(net_accuracy - cfg.extract.accuracy_slack);
    let ex = extract(&model.network, &data, &InputSpace::encoded(&scheme), &ecfg)?;
    let rules = RuleSet::from_bit_rules(&ex.rules, ex.default_class, &scheme)?;
    let rules = simplify(&rules, &tuples);
    let mut text = ex.report();
    text.push_str("\nattribute rules\n");
    text.push_str(&rules.to_string());
    io::write_bytes(&dir.join(EXTRACTION), text.as_bytes())?;
    io::write_json(&dir.join(CLUSTERS), &ex.clusters)?;
    io::write_bytes(&dir.join(RULES), rules.to_string().as_bytes())?;
    Ok(vec![EXTRACTION, CLUSTERS, RULES])
}

/// Accuracy of the pruned network and of the rules on one tuple set, and how
/// often the rules disagree with the cluster-discretized network.
#[derive(Debug, Clone, PartialEq)]
pub struct SetEvaluation {
    pub set: &'static str,
    pub tuples: usize,
    pub network_correct: usize,
    pub rules_correct: usize,
    pub disagreements: usize,
}

fn pct(correct: usize, total: usize) -> String {
    if total == 0 {
        "0.00".into()
    } else {
        format!("{:.2}", 100.0 * correct as f64 / total as f64)
    }
}

fn evaluate_set(
    set: &'static str,
    tuples: &[Tuple],
    scheme: &EncodingScheme,
    net: &Network,
    clusters: &[ClusterTable],
    rules: &RuleSet,
) -> Result<SetEvaluation, Box<dyn std::error::Error>> {
    let data = io::encode_dataset(scheme, tuples)?;
    let predicted = predictions(net, &data);
    let mut out = SetEvaluation { set, tuples: tuples.len(), network_correct: 0, rules_correct: 0, disagreements: 0 };
    for (i, t) in tuples.iter().enumerate() {
        let by_rules = rules.classify(t);
        out.network_correct += usize::from(predicted[i] == t.label.index());
        out.rules_correct += usize::from(by_rules == t.label);
        if discretized_class(net, clusters, data.input(i))? != by_rules.index() {
            out.disagreements += 1;
        }
    }
    Ok(out)
}

fn stage_evaluate(cfg: &PipelineConfig) -> StageResult {
    let dir = &cfg.out_dir;
    let scheme: EncodingScheme = io::read_json(&dir.join(SCHEME))?;
    let model: ModelFile = io::read_json(&dir.join(MODEL_PRUNED))?;
    let clusters: Vec<ClusterTable> = io::read_json(&dir.join(CLUSTERS))?;
    let rules: RuleSet = io::read_text(&dir.join(RULES))?.parse()?;
    let train_tuples = read_tuples_file(&dir.join(DATASET))?;
    let test_tuples = read_tuples_file(&dir.join(TEST))?;
    let mut csv = String::from("set,tuples,network_correct,network_pct,rules_correct,rules_pct,disagreements\n");
    for (name, tuples) in [("training", &train_tuples), ("testing", &test_tuples)] {
        let e = evaluate_set(name, tuples, &scheme, &model.network, &clusters, &rules)?;
        csv.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            e.set,
            e.tuples,
            e.network_correct,
            pct(e.network_correct, e.tuples),
            e.rules_correct,
            pct(e.rules_correct, e.tuples),
            e.disagreements
        ));
    }
    io::write_bytes(&dir.join(EVALUATION), csv.as_bytes())?;
    io::write_bytes(&dir.join(RULE_STATS), evaluate(&rules, &test_tuples).stats_csv().as_bytes())?;
    io::write_bytes(&dir.join(REPORT), report(dir)?.as_bytes())?;
    Ok(vec![EVALUATION, RULE_STATS, REPORT])
}

fn csv_rows(path: &Path) -> Result<Vec<BTreeMap<String, String>>, IoError> {
    let bytes = io::read_bytes(path)?;
    let mut r = csv::Reader::from_reader(bytes.as_slice());
    let header = r.headers()?.clone();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        rows.push(header.iter().zip(rec.iter()).map(|(h, v)| (h.to_string(), v.to_string())).collect());
    }
    Ok(rows)
}

/// Human-readable summary built from the artifacts in `dir`. Numbers are
/// copied verbatim from the CSV files.
pub fn report(dir: &Path) -> Result<String, IoError> {
    let meta: DatasetMeta = io::read_json(&dir.join(DATASET_META))?;
    let pruned: ModelFile = io::read_json(&dir.join(MODEL_PRUNED))?;
    let summary: PruneSummary = io::read_json(&dir.join(PRUNE_REPORT))?;
    let prune_report = &summary.report;
    let rules: RuleSet = io::read_text(&dir.join(RULES))?
        .parse()
        .map_err(|e| IoError::Format(format!("{RULES}: {e}")))?;
    let evaluation = csv_rows(&dir.join(EVALUATION))?;
    let stats = csv_rows(&dir.join(RULE_STATS))?;
    let field = |row: &BTreeMap<String, String>, k: &str| row.get(k).cloned().unwrap_or_default();
    let find = |set: &str| evaluation.iter().find(|r| field(r, "set") == set).cloned().unwrap_or_default();
    let (tr, te) = (find("training"), find("testing"));

    let mut s = String::new();
    s.push_str(&format!("function {}\n", meta.generator.function));
    s.push_str(&format!(
        "tuples: training {}, testing {}\n\n",
        field(&tr, "tuples"),
        field(&te, "tuples")
    ));
    s.push_str("accuracy (%)      training  testing\n");
    s.push_str(&format!("pruned network    {:>8}  {:>7}\n", field(&tr, "network_pct"), field(&te, "network_pct")));
    s.push_str(&format!("rules             {:>8}  {:>7}\n", field(&tr, "rules_pct"), field(&te, "rules_pct")));
    s.push_str(&format!(
        "rules vs discretized network disagreements: training {}, testing {}\n\n",
        field(&tr, "disagreements"),
        field(&te, "disagreements")
    ));
    s.push_str(&format!("network seed {} ({} candidates pruned)\n", summary.seed, summary.candidates.len()));
    s.push_str(&format!("links before pruning {}\n", prune_report.initial_links));
    s.push_str(&format!("links after pruning {}\n", pruned.network.link_count()));
    s.push_str(&format!("hidden nodes after pruning {}\n", pruned.network.n_hidden()));
    s.push_str(&format!("pruning rounds {}\n", prune_report.rounds.len()));
    let irrelevant: Vec<String> = prune_report.irrelevant_inputs.iter().map(|i| format!("I{}", i + 1)).collect();
    s.push_str(&format!("irrelevant inputs {}\n\n", irrelevant.len()));
    s.push_str(&format!("rules {} (default {})\n", rules.rules.len(), rules.default_class));
    for (k, r) in rules.rules.iter().enumerate() {
        s.push_str(&format!("  {}. {}\n", k + 1, r));
    }
    s.push_str("\nrule coverage on testing set\n");
    s.push_str("rule      total  correct (%)\n");
    for row in &stats {
        s.push_str(&format!(
            "{:<8} {:>6}  {:>11}\n",
            field(row, "rule"),
            field(row, "total"),
            field(row, "correct_pct")
        ));
    }
    Ok(s)
}
