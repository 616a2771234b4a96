//! Parses a rule file and reports accuracy and per-rule coverage on fresh data.

use rulenet::datagen::{generate_tuples, FunctionId, GeneratorConfig};
use rulenet::ruleset::{evaluate, RuleSet};

const RULES: &str = "\
IF 50000 <= salary < 100000 AND age < 40 THEN A
IF 75000 <= salary < 125000 AND 40 <= age < 60 THEN A
IF 25000 <= salary < 75000 AND age >= 60 THEN A
DEFAULT B
";

fn main() {
    let rules: RuleSet = RULES.parse().expect("well-formed rules");
    let tuples = generate_tuples(&GeneratorConfig::new(FunctionId::F2, 1000, 3, 0.0)).unwrap();
    let eval = evaluate(&rules, &tuples);

    print!("{rules}");
    println!("\naccuracy {:.2}% ({} of {})\n", 100.0 * eval.accuracy, eval.correct, eval.total);
    print!("{}", eval.stats_csv());
}
