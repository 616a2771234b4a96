//! Generates a perturbed Function 2 training set and prints a summary.

use rulenet::datagen::{generate_tuples, Class, FunctionId, GeneratorConfig};
use rulenet::io::tuples_to_string;

fn main() {
    let config = GeneratorConfig::new(FunctionId::F2, 1000, 7, 0.05);
    let tuples = generate_tuples(&config).expect("valid generator config");

    let group_a = tuples.iter().filter(|t| t.label == Class::A).count();
    let flipped = tuples
        .iter()
        .filter(|t| t.label != FunctionId::F2.classify(t))
        .count();
    println!("{} tuples, {} in group A, {} labels disagree with the function", tuples.len(), group_a, flipped);

    let csv = tuples_to_string(&tuples[..5]).expect("csv");
    println!("\n{csv}");
}
