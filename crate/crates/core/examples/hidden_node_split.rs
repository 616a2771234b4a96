//! A hidden node with 20 inputs is too wide to table exhaustively; it is
//! replaced by a small subnetwork whose rules predict the node's cluster.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rulenet::extractor::{cluster_network, format_bits, split_hidden_node, ExtractConfig, InputSpace};
use rulenet::network::{classify, Dataset, Network};

fn main() {
    // Inputs 1-3 dominate; 4-20 carry tiny weights; input 21 is the bias.
    let mut net = Network::zeros(21, 1, 2).unwrap();
    for l in 0..3 {
        net.set_w(0, l, 8.0);
    }
    for l in 3..20 {
        net.set_w(0, l, 0.01 * (l as f64 - 10.0));
    }
    net.set_w(0, 20, -12.0);
    net.set_v(0, 0, 3.0);
    net.set_v(1, 0, -3.0);

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let rows: Vec<Vec<f64>> = (0..300)
        .map(|_| {
            let mut x: Vec<f64> = (0..20).map(|_| f64::from(rng.gen_range(0..2u8))).collect();
            x.push(1.0);
            x
        })
        .collect();
    let targets = rows.iter().map(|x| classify(&net.forward(x).unwrap())).collect();
    let data = Dataset::new(21, 2, rows, targets).unwrap();

    let tables = cluster_network(&net, &data, 0.6).unwrap();
    println!("node 1 has {} inputs and clusters {:.3?}", net.connected_inputs(0).len(), tables[0].representatives);

    let cfg = ExtractConfig::default();
    let clusters: Vec<usize> = (0..tables[0].len()).collect();
    let space = InputSpace::plain(Some(20));
    let split = split_hidden_node(&net, 0, &tables, &data, &space, &cfg, 0, &clusters).unwrap();

    println!("tabling {:?}, subnetwork links {:?}", split.tabling, split.subnet_links);
    for (cluster, rules) in &split.rules {
        for r in rules {
            println!("  a1 = {:.3} <= {}", tables[0].representatives[*cluster], format_bits(r));
        }
    }
    for w in &split.warnings {
        println!("warning: {w}");
    }
}
