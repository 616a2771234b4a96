//! Trains and prunes a Function 2 network, then lists the surviving links.

use rulenet::datagen::{generate_tuples, FunctionId, GeneratorConfig};
use rulenet::encoder::EncodingScheme;
use rulenet::io::encode_dataset;
use rulenet::network::Network;
use rulenet::pipeline::PipelineConfig;
use rulenet::pruner::prune;
use rulenet::trainer::train;

fn main() {
    let cfg = PipelineConfig::default();
    let scheme = EncodingScheme::default_scheme();
    let tuples = generate_tuples(&cfg.generator.train_config()).unwrap();
    let data = encode_dataset(&scheme, &tuples).unwrap();

    let net = Network::random(data.n_inputs(), cfg.network.hidden, 2, 2).unwrap();
    let (net, _) = train(&net, &data, &cfg.objective, &cfg.train).unwrap();
    let (pruned, report) = prune(&net, &data, &cfg.objective, &cfg.prune_config(), &cfg.retrain_config()).unwrap();

    println!("links {} -> {}", report.initial_links, report.final_links);
    println!("accuracy {:.3} -> {:.3}", report.initial_accuracy, report.final_accuracy);
    println!("{} rounds, hidden nodes removed {:?}", report.rounds.len(), report.removed_hidden);

    for m in 0..pruned.n_hidden() {
        let inputs: Vec<String> = pruned
            .connected_inputs(m)
            .iter()
            .map(|&l| match scheme.locate(l) {
                Some((a, _)) => format!("I{} ({}) {:+.2}", l + 1, a.attribute, pruned.w(m, l)),
                None => format!("bias {:+.2}", pruned.w(m, l)),
            })
            .collect();
        println!("\nhidden {}: v = ({:+.2}, {:+.2})", m + 1, pruned.v(0, m), pruned.v(1, m));
        for s in inputs {
            println!("  {s}");
        }
    }

    let test = generate_tuples(&GeneratorConfig::new(FunctionId::F2, 1000, 5, 0.0)).unwrap();
    let test = encode_dataset(&scheme, &test).unwrap();
    println!("\ntesting accuracy {:.3}", rulenet::network::accuracy(&pruned, &test));
}
