//! Synthetic nine-attribute benchmark data.
//!
//! Tuples follow the classic salary/commission/age/... generator used for
//! benchmarking classification miners. Each tuple is labelled by one of the
//! benchmark classification functions and then, with probability
//! `perturbation`, has its label flipped.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Name of the random generator recorded in dataset metadata.
pub const RNG_NAME: &str = "chacha8";

#[derive(Debug, Error, PartialEq)]
pub enum DataError {
    #[error("invalid generator configuration: {0}")]
    Config(String),
    #[error("unknown classification function `{0}`")]
    UnknownFunction(String),
}

/// Binary class label of a benchmark tuple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Class {
    A,
    B,
}

impl Class {
    /// Output-node index used by the network (A = 0, B = 1).
    pub fn index(self) -> usize {
        match self {
            Class::A => 0,
            Class::B => 1,
        }
    }

    pub fn from_index(i: usize) -> Option<Class> {
        match i {
            0 => Some(Class::A),
            1 => Some(Class::B),
            _ => None,
        }
    }

    pub fn flipped(self) -> Class {
        match self {
            Class::A => Class::B,
            Class::B => Class::A,
        }
    }
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Class::A => f.write_str("A"),
            Class::B => f.write_str("B"),
        }
    }
}

impl FromStr for Class {
    type Err = DataError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "A" => Ok(Class::A),
            "B" => Ok(Class::B),
            other => Err(DataError::Config(format!("bad class label `{other}`"))),
        }
    }
}

/// The nine tuple attributes, in column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Attribute {
    Salary,
    Commission,
    Age,
    Elevel,
    Car,
    Zipcode,
    Hvalue,
    Hyears,
    Loan,
}

impl Attribute {
    pub const ALL: [Attribute; 9] = [
        Attribute::Salary,
        Attribute::Commission,
        Attribute::Age,
        Attribute::Elevel,
        Attribute::Car,
        Attribute::Zipcode,
        Attribute::Hvalue,
        Attribute::Hyears,
        Attribute::Loan,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Attribute::Salary => "salary",
            Attribute::Commission => "commission",
            Attribute::Age => "age",
            Attribute::Elevel => "elevel",
            Attribute::Car => "car",
            Attribute::Zipcode => "zipcode",
            Attribute::Hvalue => "hvalue",
            Attribute::Hyears => "hyears",
            Attribute::Loan => "loan",
        }
    }
}

impl fmt::Display for Attribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Attribute {
    type Err = DataError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Attribute::ALL
            .iter()
            .copied()
            .find(|a| a.name() == s)
            .ok_or_else(|| DataError::Config(format!("unknown attribute `{s}`")))
    }
}

/// One generated record plus its class label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tuple {
    pub salary: f64,
    pub commission: f64,
    pub age: f64,
    pub elevel: f64,
    pub car: f64,
    pub zipcode: f64,
    pub hvalue: f64,
    pub hyears: f64,
    pub loan: f64,
    pub label: Class,
}

impl Tuple {
    pub fn get(&self, attr: Attribute) -> f64 {
        match attr {
            Attribute::Salary => self.salary,
            Attribute::Commission => self.commission,
            Attribute::Age => self.age,
            Attribute::Elevel => self.elevel,
            Attribute::Car => self.car,
            Attribute::Zipcode => self.zipcode,
            Attribute::Hvalue => self.hvalue,
            Attribute::Hyears => self.hyears,
            Attribute::Loan => self.loan,
        }
    }

    pub fn set(&mut self, attr: Attribute, value: f64) {
        match attr {
            Attribute::Salary => self.salary = value,
            Attribute::Commission => self.commission = value,
            Attribute::Age => self.age = value,
            Attribute::Elevel => self.elevel = value,
            Attribute::Car => self.car = value,
            Attribute::Zipcode => self.zipcode = value,
            Attribute::Hvalue => self.hvalue = value,
            Attribute::Hyears => self.hyears = value,
            Attribute::Loan => self.loan = value,
        }
    }

    /// House-value multiplier for this tuple's zipcode.
    pub fn hvalue_factor(&self) -> f64 {
        zipcode_factor(self.zipcode)
    }

    /// Checks every attribute against its generator domain.
    pub fn in_domain(&self) -> bool {
        let int = |x: f64, lo: f64, hi: f64| x.fract() == 0.0 && (lo..=hi).contains(&x);
        let k = self.hvalue_factor();
        (20_000.0..=150_000.0).contains(&self.salary)
            && if self.salary >= 75_000.0 {
                self.commission == 0.0
            } else {
                (10_000.0..=75_000.0).contains(&self.commission)
            }
            && int(self.age, 20.0, 80.0)
            && int(self.elevel, 0.0, 4.0)
            && int(self.car, 1.0, 20.0)
            && int(self.zipcode, 1.0, 9.0)
            && (0.5 * k * 100_000.0..=1.5 * k * 100_000.0).contains(&self.hvalue)
            && int(self.hyears, 1.0, 30.0)
            && (1.0..=500_000.0).contains(&self.loan)
    }
}

/// Zipcodes are numbered 1..=9 and each maps to the house-value factor k = zipcode.
pub fn zipcode_factor(zipcode: f64) -> f64 {
    zipcode
}

/// Built-in benchmark classification functions (8 and 10 are excluded).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FunctionId {
    F1,
    F2,
    F3,
    F4,
    F5,
    F6,
    F7,
    F9,
}

impl FunctionId {
    pub const ALL: [FunctionId; 8] = [
        FunctionId::F1,
        FunctionId::F2,
        FunctionId::F3,
        FunctionId::F4,
        FunctionId::F5,
        FunctionId::F6,
        FunctionId::F7,
        FunctionId::F9,
    ];

    pub fn number(self) -> u32 {
        match self {
            FunctionId::F1 => 1,
            FunctionId::F2 => 2,
            FunctionId::F3 => 3,
            FunctionId::F4 => 4,
            FunctionId::F5 => 5,
            FunctionId::F6 => 6,
            FunctionId::F7 => 7,
            FunctionId::F9 => 9,
        }
    }

    /// Evaluates the pure (unperturbed) class of a tuple.
    pub fn classify(self, t: &Tuple) -> Class {
        match self {
            FunctionId::F2 => label_function2(t),
            FunctionId::F4 => label_function4(t),
            other => label_other(t, other).expect("built-in function"),
        }
    }
}

impl fmt::Display for FunctionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F{}", self.number())
    }
}

impl FromStr for FunctionId {
    type Err = DataError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let digits = s.trim().trim_start_matches(['F', 'f']);
        let n: u32 = digits
            .parse()
            .map_err(|_| DataError::UnknownFunction(s.to_string()))?;
        FunctionId::ALL
            .iter()
            .copied()
            .find(|f| f.number() == n)
            .ok_or_else(|| DataError::UnknownFunction(s.to_string()))
    }
}

fn group(cond: bool) -> Class {
    if cond {
        Class::A
    } else {
        Class::B
    }
}

fn within(x: f64, lo: f64, hi: f64) -> bool {
    lo <= x && x <= hi
}

pub fn label_function2(t: &Tuple) -> Class {
    let (age, salary) = (t.age, t.salary);
    group(
        (age < 40.0 && within(salary, 50_000.0, 100_000.0))
            || ((40.0..60.0).contains(&age) && within(salary, 75_000.0, 125_000.0))
            || (age >= 60.0 && within(salary, 25_000.0, 75_000.0)),
    )
}

pub fn label_function4(t: &Tuple) -> Class {
    let (age, salary, elevel) = (t.age, t.salary, t.elevel);
    let a = if age < 40.0 {
        if within(elevel, 0.0, 1.0) {
            within(salary, 25_000.0, 75_000.0)
        } else {
            within(salary, 50_000.0, 100_000.0)
        }
    } else if age < 60.0 {
        if within(elevel, 1.0, 3.0) {
            within(salary, 50_000.0, 100_000.0)
        } else {
            within(salary, 75_000.0, 125_000.0)
        }
    } else if within(elevel, 2.0, 4.0) {
        within(salary, 50_000.0, 100_000.0)
    } else {
        within(salary, 25_000.0, 75_000.0)
    };
    group(a)
}

/// Functions 1, 3, 5, 6, 7 and 9 of the benchmark generator.
pub fn label_other(t: &Tuple, function: FunctionId) -> Result<Class, DataError> {
    let age = t.age;
    let young = age < 40.0;
    let middle = (40.0..60.0).contains(&age);
    let total = t.salary + t.commission;
    let a = match function {
        FunctionId::F1 => young || age >= 60.0,
        FunctionId::F3 => {
            (young && within(t.elevel, 0.0, 1.0))
                || (middle && within(t.elevel, 1.0, 3.0))
                || (age >= 60.0 && within(t.elevel, 2.0, 4.0))
        }
        FunctionId::F5 => {
            let (s, l) = (t.salary, t.loan);
            if young {
                if within(s, 50_000.0, 100_000.0) {
                    within(l, 100_000.0, 300_000.0)
                } else {
                    within(l, 200_000.0, 400_000.0)
                }
            } else if middle {
                if within(s, 75_000.0, 125_000.0) {
                    within(l, 200_000.0, 400_000.0)
                } else {
                    within(l, 300_000.0, 500_000.0)
                }
            } else if within(s, 25_000.0, 75_000.0) {
                within(l, 300_000.0, 500_000.0)
            } else {
                within(l, 100_000.0, 300_000.0)
            }
        }
        FunctionId::F6 => {
            (young && within(total, 50_000.0, 100_000.0))
                || (middle && within(total, 75_000.0, 125_000.0))
                || (age >= 60.0 && within(total, 25_000.0, 75_000.0))
        }
        FunctionId::F7 => 0.67 * total - 0.2 * t.loan - 20_000.0 > 0.0,
        FunctionId::F9 => 0.67 * total - 5_000.0 * t.elevel - 0.2 * t.loan - 10_000.0 > 0.0,
        FunctionId::F2 | FunctionId::F4 => {
            return Err(DataError::UnknownFunction(format!(
                "{function} is not served by label_other"
            )))
        }
    };
    Ok(group(a))
}

pub type Predicate = Arc<dyn Fn(&Tuple) -> Class + Send + Sync>;

/// Named labelling predicates; pre-populated with the built-in functions.
#[derive(Clone)]
pub struct LabelRegistry {
    predicates: BTreeMap<String, Predicate>,
}

impl Default for LabelRegistry {
    fn default() -> Self {
        let mut reg = LabelRegistry {
            predicates: BTreeMap::new(),
        };
        for f in FunctionId::ALL {
            reg.register(&f.to_string(), move |t: &Tuple| f.classify(t));
        }
        reg
    }
}

impl LabelRegistry {
    pub fn register<F>(&mut self, name: &str, predicate: F)
    where
        F: Fn(&Tuple) -> Class + Send + Sync + 'static,
    {
        self.predicates.insert(name.to_string(), Arc::new(predicate));
    }

    pub fn get(&self, name: &str) -> Result<Predicate, DataError> {
        self.predicates
            .get(name)
            .cloned()
            .ok_or_else(|| DataError::UnknownFunction(name.to_string()))
    }

    pub fn label(&self, name: &str, t: &Tuple) -> Result<Class, DataError> {
        Ok((self.get(name)?)(t))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.predicates.keys().map(String::as_str)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub count: usize,
    pub seed: u64,
    pub perturbation: f64,
    pub function: FunctionId,
}

impl GeneratorConfig {
    pub fn new(function: FunctionId, count: usize, seed: u64, perturbation: f64) -> Self {
        GeneratorConfig {
            count,
            seed,
            perturbation,
            function,
        }
    }

    pub fn validate(&self) -> Result<(), DataError> {
        if self.count == 0 {
            return Err(DataError::Config("count must be positive".into()));
        }
        if !(0.0..0.5).contains(&self.perturbation) {
            return Err(DataError::Config(format!(
                "perturbation {} outside [0, 0.5)",
                self.perturbation
            )));
        }
        Ok(())
    }
}

/// Draws attribute values for one tuple; the label is left as `B`.
fn draw_attributes(rng: &mut ChaCha8Rng) -> Tuple {
    let salary = rng.gen_range(20_000.0..=150_000.0);
    let commission = if salary >= 75_000.0 {
        0.0
    } else {
        rng.gen_range(10_000.0..=75_000.0)
    };
    let age = rng.gen_range(20..=80) as f64;
    let elevel = rng.gen_range(0..=4) as f64;
    let car = rng.gen_range(1..=20) as f64;
    let zipcode = rng.gen_range(1..=9) as f64;
    let k = zipcode_factor(zipcode);
    let hvalue = rng.gen_range(0.5 * k * 100_000.0..=1.5 * k * 100_000.0);
    let hyears = rng.gen_range(1..=30) as f64;
    let loan = rng.gen_range(1.0..=500_000.0);
    Tuple {
        salary,
        commission,
        age,
        elevel,
        car,
        zipcode,
        hvalue,
        hyears,
        loan,
        label: Class::B,
    }
}

/// Generates `config.count` tuples labelled by the configured built-in function.
pub fn generate_tuples(config: &GeneratorConfig) -> Result<Vec<Tuple>, DataError> {
    let f = config.function;
    generate_with(config, &move |t: &Tuple| f.classify(t))
}

/// Same as [`generate_tuples`] but labels with an arbitrary predicate.
pub fn generate_with(
    config: &GeneratorConfig,
    predicate: &dyn Fn(&Tuple) -> Class,
) -> Result<Vec<Tuple>, DataError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut out = Vec::with_capacity(config.count);
    for _ in 0..config.count {
        let mut t = draw_attributes(&mut rng);
        // One flip draw per tuple keeps the stream aligned for any perturbation.
        let flip: f64 = rng.gen();
        let pure = predicate(&t);
        t.label = if flip < config.perturbation {
            pure.flipped()
        } else {
            pure
        };
        out.push(t);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tuple(age: f64, salary: f64, elevel: f64) -> Tuple {
        Tuple {
            salary,
            commission: if salary >= 75_000.0 { 0.0 } else { 20_000.0 },
            age,
            elevel,
            car: 1.0,
            zipcode: 1.0,
            hvalue: 100_000.0,
            hyears: 1.0,
            loan: 1.0,
            label: Class::B,
        }
    }

    #[test]
    fn function2_examples() {
        assert_eq!(label_function2(&tuple(30.0, 60_000.0, 0.0)), Class::A);
        assert_eq!(label_function2(&tuple(50.0, 60_000.0, 0.0)), Class::B);
        assert_eq!(label_function2(&tuple(65.0, 50_000.0, 0.0)), Class::A);
    }

    #[test]
    fn function4_examples() {
        assert_eq!(label_function4(&tuple(30.0, 60_000.0, 1.0)), Class::A);
        assert_eq!(label_function4(&tuple(50.0, 60_000.0, 2.0)), Class::A);
        assert_eq!(label_function4(&tuple(70.0, 90_000.0, 0.0)), Class::B);
    }

    #[test]
    fn salary_commission_structure() {
        let cfg = GeneratorConfig::new(FunctionId::F2, 1000, 11, 0.05);
        let data = generate_tuples(&cfg).unwrap();
        assert_eq!(data.len(), 1000);
        for t in &data {
            assert!((20_000.0..=150_000.0).contains(&t.salary));
            assert_eq!(t.salary >= 75_000.0, t.commission == 0.0);
            assert!(t.in_domain(), "{t:?}");
        }
    }

    #[test]
    fn deterministic_for_seed() {
        let cfg = GeneratorConfig::new(FunctionId::F1, 500, 3, 0.05);
        assert_eq!(generate_tuples(&cfg).unwrap(), generate_tuples(&cfg).unwrap());
    }

    #[test]
    fn perturbation_rate() {
        let cfg = GeneratorConfig::new(FunctionId::F2, 10_000, 5, 0.05);
        let data = generate_tuples(&cfg).unwrap();
        let flips = data
            .iter()
            .filter(|t| label_function2(t) != t.label)
            .count();
        let rate = flips as f64 / data.len() as f64;
        assert!((rate - 0.05).abs() <= 0.01, "rate {rate}");
    }

    #[test]
    fn perturbation_leaves_attributes_alone() {
        let clean = GeneratorConfig::new(FunctionId::F2, 300, 9, 0.0);
        let noisy = GeneratorConfig::new(FunctionId::F2, 300, 9, 0.3);
        let a = generate_tuples(&clean).unwrap();
        let b = generate_tuples(&noisy).unwrap();
        for (x, y) in a.iter().zip(&b) {
            let mut y = y.clone();
            y.label = x.label;
            assert_eq!(x, &y);
        }
    }

    #[test]
    fn invalid_configs() {
        assert!(GeneratorConfig::new(FunctionId::F2, 0, 1, 0.0).validate().is_err());
        assert!(GeneratorConfig::new(FunctionId::F2, 10, 1, 0.5).validate().is_err());
        assert!(GeneratorConfig::new(FunctionId::F2, 10, 1, -0.1).validate().is_err());
    }

    #[test]
    fn registry_is_extensible() {
        let mut reg = LabelRegistry::default();
        reg.register("always-a", |_| Class::A);
        let t = tuple(70.0, 140_000.0, 0.0);
        assert_eq!(reg.label("always-a", &t).unwrap(), Class::A);
        assert!(matches!(
            reg.label("F8", &t),
            Err(DataError::UnknownFunction(_))
        ));
    }

    #[test]
    fn label_other_rejects_f2() {
        let t = tuple(30.0, 60_000.0, 0.0);
        assert!(label_other(&t, FunctionId::F2).is_err());
        assert_eq!(label_other(&t, FunctionId::F1).unwrap(), Class::A);
    }

    #[test]
    fn f1_labels_repeatable() {
        let cfg = GeneratorConfig::new(FunctionId::F1, 1000, 21, 0.0);
        let a: Vec<Class> = generate_tuples(&cfg).unwrap().iter().map(|t| t.label).collect();
        let b: Vec<Class> = generate_tuples(&cfg).unwrap().iter().map(|t| t.label).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn f2_proportions_match_direct_evaluation() {
        let cfg = GeneratorConfig::new(FunctionId::F2, 10_000, 8, 0.0);
        let data = generate_tuples(&cfg).unwrap();
        // Oracle: the disjunction written out independently.
        let oracle = |t: &Tuple| {
            let s = t.salary;
            let a = t.age;
            (a < 40.0 && (50_000.0..=100_000.0).contains(&s))
                || (a >= 40.0 && a < 60.0 && (75_000.0..=125_000.0).contains(&s))
                || (a >= 60.0 && (25_000.0..=75_000.0).contains(&s))
        };
        let ours = data.iter().filter(|t| t.label == Class::A).count();
        let direct = data.iter().filter(|t| oracle(t)).count();
        assert_eq!(ours, direct);
    }
}
