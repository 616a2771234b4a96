//! Extracts rules from a pruned Function 2 network and prints every stage.

use rulenet::datagen::generate_tuples;
use rulenet::encoder::EncodingScheme;
use rulenet::extractor::{extract, InputSpace};
use rulenet::io::encode_dataset;
use rulenet::network::{accuracy, Network};
use rulenet::pipeline::PipelineConfig;
use rulenet::pruner::prune;
use rulenet::ruleset::{simplify, RuleSet};
use rulenet::trainer::train;

fn main() {
    let cfg = PipelineConfig::default();
    let scheme = EncodingScheme::default_scheme();
    let tuples = generate_tuples(&cfg.generator.train_config()).unwrap();
    let data = encode_dataset(&scheme, &tuples).unwrap();

    let net = Network::random(data.n_inputs(), 4, 2, 2).unwrap();
    let (net, _) = train(&net, &data, &cfg.objective, &cfg.train).unwrap();
    let (net, _) = prune(&net, &data, &cfg.objective, &cfg.prune_config(), &cfg.retrain_config()).unwrap();

    let mut ecfg = cfg.extract.config.clone();
    ecfg.required_accuracy = accuracy(&net, &data) - cfg.extract.accuracy_slack;
    let extraction = extract(&net, &data, &InputSpace::encoded(&scheme), &ecfg).unwrap();
    print!("{}", extraction.report());

    let rules = RuleSet::from_bit_rules(&extraction.rules, extraction.default_class, &scheme).unwrap();
    println!("\n{}", simplify(&rules, &tuples));
}
