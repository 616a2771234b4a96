use super::*;
use crate::network::{accuracy, Network};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn all_patterns(bits: usize, bias: bool) -> Vec<Vec<f64>> {
    (0..1u32 << bits)
        .map(|code| {
            let mut x: Vec<f64> = (0..bits).map(|i| f64::from((code >> i) & 1)).collect();
            if bias {
                x.push(1.0);
            }
            x
        })
        .collect()
}

/// Three bits plus bias; node 0 follows bit 0, node 1 follows bit 1 and bit 2.
fn small_net() -> Network {
    let mut net = Network::zeros(4, 2, 2).unwrap();
    net.set_w(0, 0, 6.0);
    net.set_w(0, 3, -3.0);
    net.set_w(1, 1, 4.0);
    net.set_w(1, 2, 4.0);
    net.set_w(1, 3, -6.0);
    for l in [1, 2] {
        net.remove_w(0, l);
    }
    net.remove_w(1, 0);
    net.set_v(0, 0, 4.0);
    net.set_v(0, 1, 6.0);
    net.set_v(1, 0, -4.0);
    net.set_v(1, 1, -6.0);
    net
}

fn dataset_for(net: &Network, rows: Vec<Vec<f64>>) -> Dataset {
    let targets = rows.iter().map(|x| classify(&net.forward(x).unwrap())).collect();
    Dataset::new(net.n_inputs(), net.n_outputs(), rows, targets).unwrap()
}

#[test]
fn perfect_net_keeps_initial_radius() {
    let net = small_net();
    let data = dataset_for(&net, all_patterns(3, true));
    assert_eq!(accuracy(&net, &data), 1.0);
    let (eps, tables) = auto_epsilon(&net, &data, 1.0, 0.6).unwrap();
    assert_eq!(eps, 0.6);
    assert_eq!(tables.len(), 2);
    let (ok, acc) = check_cluster_fidelity(&net, &tables, &data, 1.0).unwrap();
    assert!(ok);
    assert_eq!(acc, 1.0);
}

#[test]
fn tiny_radius_matches_undiscretized_accuracy() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let net = Network::random(5, 3, 2, 11).unwrap();
    let rows: Vec<Vec<f64>> = (0..40).map(|_| (0..5).map(|_| f64::from(rng.gen_range(0..2u8))).collect()).collect();
    let targets = (0..40).map(|_| rng.gen_range(0..2)).collect();
    let data = Dataset::new(5, 2, rows, targets).unwrap();
    let tables = cluster_network(&net, &data, 1e-12).unwrap();
    let (_, acc) = check_cluster_fidelity(&net, &tables, &data, 0.0).unwrap();
    assert_eq!(acc, accuracy(&net, &data));
}

#[test]
fn radius_halves_until_accuracy_holds() {
    // Activations near -0.2 and 0.28 fall on opposite sides of the decision
    // boundary but merge under a wide radius.
    let mut net = Network::zeros(2, 1, 2).unwrap();
    net.set_w(0, 0, 0.4904);
    net.set_w(0, 1, -0.2027);
    net.set_v(0, 0, 10.0);
    net.set_v(1, 0, -10.0);
    let data = Dataset::new(2, 2, vec![vec![0.0, 1.0], vec![1.0, 1.0]], vec![1, 0]).unwrap();
    let coarse = cluster_network(&net, &data, 0.99).unwrap();
    let (ok, _) = check_cluster_fidelity(&net, &coarse, &data, 1.0).unwrap();
    assert!(!ok);
    let (eps, tables) = auto_epsilon(&net, &data, 1.0, 0.99).unwrap();
    assert_eq!(eps, 0.99 / 4.0);
    assert_eq!(tables[0].len(), 2);
    let (ok, acc) = check_cluster_fidelity(&net, &tables, &data, 1.0).unwrap();
    assert!(ok);
    assert_eq!(acc, 1.0);
}

#[test]
fn radius_underflow_is_an_error() {
    let net = small_net();
    let rows = all_patterns(3, true);
    let targets = rows.iter().map(|x| 1 - classify(&net.forward(x).unwrap())).collect();
    let data = Dataset::new(4, 2, rows, targets).unwrap();
    let err = auto_epsilon(&net, &data, 0.9, 0.6).unwrap_err();
    assert!(matches!(err, ExtractError::EpsilonUnderflow { .. }));
}

#[test]
fn output_table_enumerates_product() {
    let mut net = Network::zeros(3, 3, 2).unwrap();
    for m in 0..3 {
        net.set_v(0, m, 1.0 + m as f64);
        net.set_v(1, m, -1.0);
    }
    let table = |reps: Vec<f64>| ClusterTable {
        epsilon: 0.6,
        counts: vec![1; reps.len()],
        sums: reps.clone(),
        representatives: reps,
    };
    let tables = vec![table(vec![-1.0, 0.0, 1.0]), table(vec![0.0, 1.0]), table(vec![-1.0, 0.24, 1.0])];
    let t = enumerate_output_table(&net, &tables, 4096).unwrap();
    assert_eq!(t.rows.len(), 18);
    assert_eq!(t.rows[0].clusters, vec![0, 0, 0]);
    assert_eq!(t.rows[1].clusters, vec![0, 0, 1]);
    assert_eq!(t.rows[17].clusters, vec![2, 1, 2]);
    for row in &t.rows {
        assert_eq!(row.outputs, net.outputs_from_hidden(&row.activations));
        assert_eq!(row.class, classify(&row.outputs));
    }
    let err = enumerate_output_table(&net, &tables, 17).unwrap_err();
    assert_eq!(err, ExtractError::TableTooLarge { rows: 18, cap: 17 });
}

#[test]
fn single_bit_node_rule() {
    let mut net = Network::zeros(2, 1, 2).unwrap();
    net.set_w(0, 0, -8.0);
    net.set_w(0, 1, 4.0);
    let rows = vec![vec![0.0, 1.0], vec![1.0, 1.0]];
    let data = Dataset::new(2, 2, rows, vec![0, 1]).unwrap();
    let tables = cluster_network(&net, &data, 0.6).unwrap();
    let space = InputSpace::plain(Some(1));
    let low = tables[0].nearest(-1.0);
    assert!(tables[0].representatives[low] < -0.9);
    let rules = input_rules_for_activation(&net, 0, low, &tables, &space, &ExtractConfig::default()).unwrap();
    assert_eq!(rules, vec![vec![(0, true)]]);
}

#[test]
fn fan_in_over_cap_is_rejected() {
    let net = Network::random(6, 1, 2, 1).unwrap();
    let data = dataset_for(&net, all_patterns(5, true));
    let tables = cluster_network(&net, &data, 0.6).unwrap();
    let cfg = ExtractConfig { fan_in_cap: 3, ..ExtractConfig::default() };
    let err = input_rules_for_activation(&net, 0, 0, &tables, &InputSpace::plain(Some(5)), &cfg).unwrap_err();
    assert_eq!(err, ExtractError::FanIn { node: 0, fan_in: 5, cap: 3 });
}

#[test]
fn node_rules_agree_with_forward_pass() {
    for seed in 0..10 {
        let net = Network::random(7, 2, 2, seed).unwrap();
        let data = dataset_for(&net, all_patterns(6, true));
        let tables = cluster_network(&net, &data, 0.3).unwrap();
        let space = InputSpace::plain(Some(6));
        let cfg = ExtractConfig::default();
        for m in 0..2 {
            for c in 0..tables[m].len() {
                let rules = input_rules_for_activation(&net, m, c, &tables, &space, &cfg).unwrap();
                for x in all_patterns(6, true) {
                    let actual = tables[m].nearest(net.hidden_activations(&x).unwrap()[m]) == c;
                    let predicted = rules.iter().any(|r| fires(r, &x));
                    assert_eq!(actual, predicted, "seed {seed} node {m} cluster {c}");
                }
            }
        }
    }
}

#[test]
fn substitution_drops_infeasible_combinations() {
    let scheme = EncodingScheme::default_scheme();
    let space = InputSpace::encoded(&scheme);
    let output = vec![DiscreteRule { antecedent: vec![(1, 0), (2, 0)], consequent: 0 }];
    let mut node_rules = BTreeMap::new();
    node_rules.insert((1, 0), vec![vec![(1, false), (16, false)]]);
    node_rules.insert((2, 0), vec![vec![(12, false)], vec![(4, true), (14, true)]]);
    let rules = substitute(&output, &node_rules, &space, 1000).unwrap();
    assert_eq!(rules, vec![BitRule { conditions: vec![(1, false), (12, false), (16, false)], class: 0 }]);

    let plain = substitute(&output, &node_rules, &InputSpace::plain(None), 1000).unwrap();
    assert_eq!(plain.len(), 2);
}

#[test]
fn substitution_single_branch_merges() {
    let output = vec![DiscreteRule { antecedent: vec![(0, 1), (1, 0)], consequent: 1 }];
    let mut node_rules = BTreeMap::new();
    node_rules.insert((0, 1), vec![vec![(3, true)]]);
    node_rules.insert((1, 0), vec![vec![(0, false), (3, true)]]);
    let rules = substitute(&output, &node_rules, &InputSpace::plain(None), 10).unwrap();
    assert_eq!(rules, vec![BitRule { conditions: vec![(0, false), (3, true)], class: 1 }]);
}

#[test]
fn observed_output_table_keeps_reached_rows_in_order() {
    let net = small_net();
    let data = dataset_for(&net, all_patterns(3, true));
    let tables = cluster_network(&net, &data, 0.1).unwrap();
    let full = enumerate_output_table(&net, &tables, 4096).unwrap();
    let acts: Vec<Vec<f64>> = (0..data.len()).map(|i| net.hidden_activations(data.input(i)).unwrap()).collect();
    let observed = observed_output_table(&net, &tables, &acts[..3]);
    assert!(!observed.rows.is_empty() && observed.rows.len() <= 3);
    assert!(observed.rows.windows(2).all(|w| w[0].clusters < w[1].clusters));
    for row in &observed.rows {
        assert!(full.rows.contains(row));
    }
}

#[test]
fn supported_substitution_keeps_combinations_seen_in_data() {
    let output = vec![DiscreteRule { antecedent: vec![(0, 1), (1, 0)], consequent: 1 }];
    let mut node_rules = BTreeMap::new();
    node_rules.insert((0, 1), vec![vec![(0, true)], vec![(1, true)]]);
    node_rules.insert((1, 0), vec![vec![(2, true)], vec![(2, false), (1, false)]]);
    let rows = vec![vec![1.0, 0.0, 1.0], vec![0.0, 1.0, 0.0], vec![1.0, 0.0, 0.0]];
    let data = Dataset::new(3, 2, rows, vec![1, 0, 1]).unwrap();
    let rules = substitute_supported(&output, &node_rules, &data, 10).unwrap();
    assert_eq!(
        rules,
        vec![
            BitRule { conditions: vec![(0, true), (2, true)], class: 1 },
            BitRule { conditions: vec![(0, true), (1, false), (2, false)], class: 1 },
        ]
    );
    let err = substitute_supported(&output, &node_rules, &data, 1).unwrap_err();
    assert_eq!(err, ExtractError::Substitution(2));
}

#[test]
fn oversized_output_table_falls_back_to_observed_rows() {
    let net = small_net();
    let data = dataset_for(&net, all_patterns(3, true));
    let cfg = ExtractConfig { required_accuracy: 1.0, enumeration_cap: 1, ..ExtractConfig::default() };
    let ex = extract(&net, &data, &InputSpace::plain(Some(3)), &cfg).unwrap();
    assert!(ex.warnings.iter().any(|w| w.contains("observed combinations")));
    for i in 0..data.len() {
        let x = data.input(i);
        assert_eq!(ex.classify_bits(x), discretized_class(&net, &ex.clusters, x).unwrap());
    }
}

#[test]
fn substitution_requires_every_literal() {
    let output = vec![DiscreteRule { antecedent: vec![(0, 2)], consequent: 1 }];
    let err = substitute(&output, &BTreeMap::new(), &InputSpace::plain(None), 10).unwrap_err();
    assert_eq!(err, ExtractError::MissingInputRules { node: 0, cluster: 2 });
}

#[test]
fn subsumed_rules_are_removed() {
    let rules = vec![
        BitRule { conditions: vec![(0, true), (1, false)], class: 0 },
        BitRule { conditions: vec![(0, true)], class: 0 },
        BitRule { conditions: vec![(0, true)], class: 0 },
        BitRule { conditions: vec![(0, true), (2, true)], class: 1 },
    ];
    let kept = remove_subsumed(rules);
    assert_eq!(
        kept,
        vec![
            BitRule { conditions: vec![(0, true)], class: 0 },
            BitRule { conditions: vec![(0, true), (2, true)], class: 1 },
        ]
    );
}

#[test]
fn extraction_on_small_net() {
    let net = small_net();
    let data = dataset_for(&net, all_patterns(3, true));
    let cfg = ExtractConfig { required_accuracy: 1.0, ..ExtractConfig::default() };
    let ex = extract(&net, &data, &InputSpace::plain(Some(3)), &cfg).unwrap();
    for i in 0..data.len() {
        let x = data.input(i);
        assert_eq!(ex.classify_bits(x), discretized_class(&net, &ex.clusters, x).unwrap());
    }
    assert!(ex.report().contains("activation table"));
    assert!(ex.rules.iter().all(|r| r.class != ex.default_class));
}

#[test]
fn non_binary_inputs_are_rejected() {
    let net = small_net();
    let data = Dataset::new(4, 2, vec![vec![0.5, 0.0, 0.0, 1.0]], vec![0]).unwrap();
    let err = extract(&net, &data, &InputSpace::plain(Some(3)), &ExtractConfig::default()).unwrap_err();
    assert!(matches!(err, ExtractError::NonBinary { input: 0, .. }));
}

#[test]
fn subnet_targets_are_cluster_indicators() {
    let mut net = Network::zeros(3, 1, 2).unwrap();
    net.set_w(0, 0, 5.0);
    net.set_w(0, 1, -5.0);
    let rows = vec![vec![1.0, 0.0, 1.0], vec![0.0, 0.0, 1.0], vec![0.0, 1.0, 1.0]];
    let data = Dataset::new(3, 2, rows, vec![0, 0, 0]).unwrap();
    let tables = cluster_network(&net, &data, 0.6).unwrap();
    assert_eq!(tables[0].len(), 3);
    let sub = split::subnet_dataset(&net, 0, &tables, &data, &[0, 1]).unwrap();
    assert_eq!(sub.n_classes(), 3);
    assert_eq!(sub.input(0), &[1.0, 0.0, 1.0]);
    assert_eq!(sub.target_vector(0), vec![1.0, 0.0, 0.0]);
    assert_eq!(sub.target_vector(2), vec![0.0, 0.0, 1.0]);
}

/// One node over 20 bits whose activation is driven by a majority of the
/// first three; the remaining bits carry negligible weight.
fn wide_node_fixture() -> (Network, Dataset) {
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
    let data = dataset_for(&net, rows);
    (net, data)
}

#[test]
fn wide_node_is_split_through_subnetwork() {
    let (net, data) = wide_node_fixture();
    let tables = cluster_network(&net, &data, 0.6).unwrap();
    assert_eq!(tables[0].len(), 2);
    let cfg = ExtractConfig::default();
    let space = InputSpace::plain(Some(20));
    let clusters: Vec<usize> = (0..tables[0].len()).collect();
    let out = split_hidden_node(&net, 0, &tables, &data, &space, &cfg, 0, &clusters).unwrap();
    assert_eq!(out.tabling, Tabling::Subnetwork, "{:?}", out.warnings);
    let used: BTreeSet<usize> = out.rules.values().flatten().flatten().map(|&(l, _)| l).collect();
    assert!(used.len() <= cfg.fan_in_cap);
    for i in 0..data.len() {
        let x = data.input(i);
        let label = tables[0].nearest(net.hidden_activations(x).unwrap()[0]);
        for (&c, rules) in &out.rules {
            assert_eq!(rules.iter().any(|r| fires(r, x)), c == label);
        }
    }
}

#[test]
fn narrow_node_split_is_passthrough() {
    let net = small_net();
    let data = dataset_for(&net, all_patterns(3, true));
    let tables = cluster_network(&net, &data, 0.6).unwrap();
    let out = split_hidden_node(&net, 1, &tables, &data, &InputSpace::plain(Some(3)), &ExtractConfig::default(), 0, &[0])
        .unwrap();
    assert_eq!(out.tabling, Tabling::Exhaustive);
    assert!(out.subnet_links.is_none());
}

#[test]
fn split_depth_limit() {
    let (net, data) = wide_node_fixture();
    let tables = cluster_network(&net, &data, 0.6).unwrap();
    let cfg = ExtractConfig { max_split_depth: 0, ..ExtractConfig::default() };
    let err = split_hidden_node(&net, 0, &tables, &data, &InputSpace::plain(Some(20)), &cfg, 0, &[0]).unwrap_err();
    assert!(matches!(err, ExtractError::SplitDepth { .. }));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn rules_reproduce_discretized_network(seed in 0u64..1000, hidden in 1usize..4, bits in 2usize..6) {
        let net = Network::random(bits + 1, hidden, 2, seed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<Vec<f64>> = all_patterns(bits, true);
        let targets = rows.iter().map(|_| rng.gen_range(0..2)).collect();
        let data = Dataset::new(bits + 1, 2, rows, targets).unwrap();
        let cfg = ExtractConfig { required_accuracy: 0.0, ..ExtractConfig::default() };
        let ex = extract(&net, &data, &InputSpace::plain(Some(bits)), &cfg).unwrap();
        for i in 0..data.len() {
            let x = data.input(i);
            prop_assert_eq!(ex.classify_bits(x), discretized_class(&net, &ex.clusters, x).unwrap());
        }
    }
}
