use proptest::prelude::*;
use rulenet::datagen::{generate_tuples, Attribute, Class, FunctionId, GeneratorConfig};
use rulenet::ruleset::{evaluate, simplify, Op, Predicate, Rule, RuleSet};

fn predicate() -> impl Strategy<Value = Predicate> {
    prop_oneof![
        (0..3usize, 20_000.0..150_000.0f64).prop_map(|(op, v)| Predicate::Compare {
            attribute: Attribute::Salary,
            op: [Op::Lt, Op::Ge, Op::Le][op],
            value: v.round(),
        }),
        (20u32..80, 1u32..30).prop_map(|(lo, w)| Predicate::Between {
            attribute: Attribute::Age,
            low: f64::from(lo),
            high: f64::from(lo + w),
        }),
        prop::collection::btree_set(0u32..5, 1..4).prop_map(|s| Predicate::NotIn {
            attribute: Attribute::Elevel,
            values: s.into_iter().map(f64::from).collect(),
        }),
    ]
}

fn rule(class: Class) -> impl Strategy<Value = Rule> {
    prop::collection::vec(predicate(), 0..3).prop_map(move |predicates| Rule { predicates, class })
}

fn tuples() -> Vec<rulenet::datagen::Tuple> {
    generate_tuples(&GeneratorConfig::new(FunctionId::F2, 500, 8, 0.05)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn accuracy_matches_recount(rules in prop::collection::vec(rule(Class::A), 0..5), default_b in any::<bool>()) {
        let rs = RuleSet { rules, default_class: if default_b { Class::B } else { Class::A } };
        let data = tuples();
        let eval = evaluate(&rs, &data);
        let recount = data.iter().filter(|t| rs.classify(t) == t.label).count();
        prop_assert_eq!(eval.correct, recount);
        prop_assert_eq!(eval.per_rule.iter().map(|r| r.total).sum::<usize>(), data.len());
        prop_assert_eq!(eval.per_rule.iter().map(|r| r.correct).sum::<usize>(), recount);
    }

    #[test]
    fn same_class_rules_commute(rules in prop::collection::vec(rule(Class::A), 1..5), shift in 0usize..5) {
        let rs = RuleSet { rules: rules.clone(), default_class: Class::B };
        let mut rotated = rules;
        let n = rotated.len();
        rotated.rotate_left(shift % n);
        let rotated = RuleSet { rules: rotated, default_class: Class::B };
        for t in tuples() {
            prop_assert_eq!(rs.classify(&t), rotated.classify(&t));
        }
    }

    #[test]
    fn simplify_keeps_training_classes(rules in prop::collection::vec(prop_oneof![rule(Class::A), rule(Class::B)], 0..6)) {
        let rs = RuleSet { rules, default_class: Class::B };
        let data = tuples();
        let simple = simplify(&rs, &data);
        prop_assert!(simple.rules.len() <= rs.rules.len());
        for t in &data {
            prop_assert_eq!(simple.classify(t), rs.classify(t));
        }
    }

    #[test]
    fn rule_files_round_trip(rules in prop::collection::vec(prop_oneof![rule(Class::A), rule(Class::B)], 0..6)) {
        let rs = RuleSet { rules, default_class: Class::A };
        let text = rs.to_string();
        let back: RuleSet = text.parse().unwrap();
        prop_assert_eq!(back.to_string(), text);
        for t in tuples().iter().take(100) {
            prop_assert_eq!(back.classify(t), rs.classify(t));
        }
    }
}
