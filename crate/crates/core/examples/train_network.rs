//! Trains a four-hidden-node network on Function 2 with BFGS.

use rulenet::datagen::{generate_tuples, FunctionId, GeneratorConfig};
use rulenet::encoder::EncodingScheme;
use rulenet::io::encode_dataset;
use rulenet::network::{accuracy, Network};
use rulenet::pipeline::pipeline_objective;
use rulenet::trainer::{train, TrainConfig};

fn main() {
    let scheme = EncodingScheme::default_scheme();
    let tuples = generate_tuples(&GeneratorConfig::new(FunctionId::F2, 1000, 1, 0.05)).unwrap();
    let data = encode_dataset(&scheme, &tuples).unwrap();
    let test = generate_tuples(&GeneratorConfig::new(FunctionId::F2, 1000, 99, 0.0)).unwrap();
    let test = encode_dataset(&scheme, &test).unwrap();

    let params = pipeline_objective();
    let net = Network::random(data.n_inputs(), 4, 2, 1).unwrap();
    println!("{} links before training", net.link_count());

    let (net, report) = train(&net, &data, &params, &TrainConfig::default()).unwrap();
    println!(
        "{} iterations ({:?}), objective {:.4}, gradient {:.2e}",
        report.iterations, report.stop, report.final_objective, report.gradient_norm
    );
    println!("training accuracy {:.2}%", 100.0 * report.accuracy);
    println!("margin satisfied on {:.2}%", 100.0 * report.margin_rate);
    println!("testing accuracy {:.2}%", 100.0 * accuracy(&net, &test));
}
