//! Attribute-level rules, ordered application and rule statistics.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::datagen::{Attribute, Class, Tuple};
use crate::encoder::{BitPredicate, Coding, EncodeError, EncodingScheme};
use crate::extractor::BitRule;

#[derive(Debug, Error, PartialEq)]
pub enum RuleError {
    #[error("conditions on {0} cannot all hold")]
    Infeasible(Attribute),
    #[error("the constant input cannot be 0")]
    ConstantInput,
    #[error("class index {0} has no label")]
    Class(usize),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Encode(#[from] EncodeError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Op {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl Op {
    fn symbol(self) -> &'static str {
        match self {
            Op::Eq => "=",
            Op::Ne => "!=",
            Op::Lt => "<",
            Op::Le => "<=",
            Op::Gt => ">",
            Op::Ge => ">=",
        }
    }

    fn parse(s: &str) -> Option<Op> {
        Some(match s {
            "=" => Op::Eq,
            "!=" => Op::Ne,
            "<" => Op::Lt,
            "<=" => Op::Le,
            ">" => Op::Gt,
            ">=" => Op::Ge,
            _ => return None,
        })
    }

    fn holds(self, x: f64, c: f64) -> bool {
        match self {
            Op::Eq => x == c,
            Op::Ne => x != c,
            Op::Lt => x < c,
            Op::Le => x <= c,
            Op::Gt => x > c,
            Op::Ge => x >= c,
        }
    }
}

/// A condition on one attribute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Predicate {
    Compare { attribute: Attribute, op: Op, value: f64 },
    /// `low <= attribute < high`.
    Between { attribute: Attribute, low: f64, high: f64 },
    NotIn { attribute: Attribute, values: Vec<f64> },
}

impl Predicate {
    pub fn attribute(&self) -> Attribute {
        match self {
            Predicate::Compare { attribute, .. }
            | Predicate::Between { attribute, .. }
            | Predicate::NotIn { attribute, .. } => *attribute,
        }
    }

    pub fn holds(&self, t: &Tuple) -> bool {
        let x = t.get(self.attribute());
        match self {
            Predicate::Compare { op, value, .. } => op.holds(x, *value),
            Predicate::Between { low, high, .. } => *low <= x && x < *high,
            Predicate::NotIn { values, .. } => !values.contains(&x),
        }
    }

    /// Whether every value satisfying `self` satisfies `other` (checked conservatively).
    fn implies(&self, other: &Predicate) -> bool {
        if self.attribute() != other.attribute() {
            return false;
        }
        if self == other {
            return true;
        }
        if let Predicate::Compare { op: Op::Eq, value, .. } = self {
            return match other {
                Predicate::Compare { op, value: c, .. } => op.holds(*value, *c),
                Predicate::Between { low, high, .. } => *low <= *value && *value < *high,
                Predicate::NotIn { values, .. } => !values.contains(value),
            };
        }
        match (self.interval(), other.interval()) {
            (Some(a), Some(b)) => a.within(&b),
            _ => match (self, other) {
                (Predicate::NotIn { values: a, .. }, Predicate::NotIn { values: b, .. }) => {
                    b.iter().all(|v| a.contains(v))
                }
                (Predicate::NotIn { values: a, .. }, Predicate::Compare { op: Op::Ne, value, .. }) => {
                    a.contains(value)
                }
                (Predicate::Compare { op: Op::Ne, value, .. }, Predicate::NotIn { values, .. }) => {
                    values.iter().all(|v| v == value)
                }
                _ => false,
            },
        }
    }

    fn interval(&self) -> Option<Interval> {
        let inf = f64::INFINITY;
        Some(match self {
            Predicate::Compare { op, value, .. } => match op {
                Op::Lt => Interval { lo: -inf, lo_closed: false, hi: *value, hi_closed: false },
                Op::Le => Interval { lo: -inf, lo_closed: false, hi: *value, hi_closed: true },
                Op::Gt => Interval { lo: *value, lo_closed: false, hi: inf, hi_closed: false },
                Op::Ge => Interval { lo: *value, lo_closed: true, hi: inf, hi_closed: false },
                Op::Eq | Op::Ne => return None,
            },
            Predicate::Between { low, high, .. } => Interval { lo: *low, lo_closed: true, hi: *high, hi_closed: false },
            Predicate::NotIn { .. } => return None,
        })
    }
}

struct Interval {
    lo: f64,
    lo_closed: bool,
    hi: f64,
    hi_closed: bool,
}

impl Interval {
    fn within(&self, outer: &Interval) -> bool {
        let lo_ok = self.lo > outer.lo || (self.lo == outer.lo && (outer.lo_closed || !self.lo_closed));
        let hi_ok = self.hi < outer.hi || (self.hi == outer.hi && (outer.hi_closed || !self.hi_closed));
        lo_ok && hi_ok
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Predicate::Compare { attribute, op, value } => write!(f, "{attribute} {} {value}", op.symbol()),
            Predicate::Between { attribute, low, high } => write!(f, "{low} <= {attribute} < {high}"),
            Predicate::NotIn { attribute, values } => {
                let v: Vec<String> = values.iter().map(f64::to_string).collect();
                write!(f, "{attribute} NOT IN ({})", v.join(", "))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rule {
    pub predicates: Vec<Predicate>,
    pub class: Class,
}

impl Rule {
    pub fn matches(&self, t: &Tuple) -> bool {
        self.predicates.iter().all(|p| p.holds(t))
    }

    /// True when every tuple matching `self` also matches `other`.
    pub fn implies(&self, other: &Rule) -> bool {
        other
            .predicates
            .iter()
            .all(|q| self.predicates.iter().any(|p| p.implies(q)))
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.predicates.is_empty() {
            return write!(f, "IF TRUE THEN {}", self.class);
        }
        let parts: Vec<String> = self.predicates.iter().map(Predicate::to_string).collect();
        write!(f, "IF {} THEN {}", parts.join(" AND "), self.class)
    }
}

/// Ordered rules with a fallback class; the first matching rule decides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleSet {
    pub rules: Vec<Rule>,
    pub default_class: Class,
}

impl RuleSet {
    /// Index of the first rule matching `t`.
    pub fn fired(&self, t: &Tuple) -> Option<usize> {
        self.rules.iter().position(|r| r.matches(t))
    }

    pub fn classify(&self, t: &Tuple) -> Class {
        self.fired(t).map_or(self.default_class, |i| self.rules[i].class)
    }

    /// Rewrites extracted bit rules into attribute rules.
    pub fn from_bit_rules(rules: &[BitRule], default_class: usize, scheme: &EncodingScheme) -> Result<Self, RuleError> {
        let default_class = Class::from_index(default_class).ok_or(RuleError::Class(default_class))?;
        let rules = rules
            .iter()
            .map(|r| rewrite_to_attributes(r, scheme))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(RuleSet { rules, default_class })
    }
}

impl fmt::Display for RuleSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rules {
            writeln!(f, "{r}")?;
        }
        writeln!(f, "DEFAULT {}", self.default_class)
    }
}

impl FromStr for RuleSet {
    type Err = RuleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut rules = Vec::new();
        let mut default_class = None;
        for (i, raw) in s.lines().enumerate() {
            let line = raw.trim();
            let err = |message: String| RuleError::Parse { line: i + 1, message };
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if default_class.is_some() {
                return Err(err("content after DEFAULT".into()));
            }
            if let Some(rest) = line.strip_prefix("DEFAULT ") {
                default_class = Some(rest.trim().parse::<Class>().map_err(|e| err(e.to_string()))?);
                continue;
            }
            let body = line.strip_prefix("IF ").ok_or_else(|| err("expected IF or DEFAULT".into()))?;
            let (cond, class) = body.rsplit_once(" THEN ").ok_or_else(|| err("missing THEN".into()))?;
            let class = class.trim().parse::<Class>().map_err(|e| err(e.to_string()))?;
            let predicates = if cond.trim() == "TRUE" {
                Vec::new()
            } else {
                cond.split(" AND ").map(|p| parse_predicate(p.trim()).map_err(&err)).collect::<Result<_, _>>()?
            };
            rules.push(Rule { predicates, class });
        }
        let default_class = default_class.ok_or(RuleError::Parse { line: 0, message: "missing DEFAULT".into() })?;
        Ok(RuleSet { rules, default_class })
    }
}

fn parse_number(s: &str) -> Result<f64, String> {
    s.trim().parse::<f64>().map_err(|_| format!("bad number `{s}`"))
}

fn parse_attribute(s: &str) -> Result<Attribute, String> {
    s.trim().parse::<Attribute>().map_err(|e| e.to_string())
}

fn parse_predicate(s: &str) -> Result<Predicate, String> {
    if let Some((attr, list)) = s.split_once(" NOT IN ") {
        let inner = list
            .trim()
            .strip_prefix('(')
            .and_then(|x| x.strip_suffix(')'))
            .ok_or_else(|| format!("bad value list in `{s}`"))?;
        let values = inner.split(',').map(parse_number).collect::<Result<_, _>>()?;
        return Ok(Predicate::NotIn { attribute: parse_attribute(attr)?, values });
    }
    let tokens: Vec<&str> = s.split_whitespace().collect();
    match tokens.as_slice() {
        [low, "<=", attr, "<", high] => Ok(Predicate::Between {
            attribute: parse_attribute(attr)?,
            low: parse_number(low)?,
            high: parse_number(high)?,
        }),
        [attr, op, value] => Ok(Predicate::Compare {
            attribute: parse_attribute(attr)?,
            op: Op::parse(op).ok_or_else(|| format!("unknown operator `{op}`"))?,
            value: parse_number(value)?,
        }),
        _ => Err(format!("cannot parse predicate `{s}`")),
    }
}

/// Turns a conjunction of input-bit conditions into attribute predicates.
///
/// Thresholds on one attribute merge into a single interval. A range that
/// admits only one domain value becomes an equality, and a lower bound that
/// starts a domain segment is stated relative to the preceding segment.
pub fn rewrite_to_attributes(rule: &BitRule, scheme: &EncodingScheme) -> Result<Rule, RuleError> {
    let class = Class::from_index(rule.class).ok_or(RuleError::Class(rule.class))?;
    let mut per_attr: BTreeMap<Attribute, Vec<BitPredicate>> = BTreeMap::new();
    for &(index, value) in &rule.conditions {
        if index == scheme.bias_index() {
            if !value {
                return Err(RuleError::ConstantInput);
            }
            continue;
        }
        let p = scheme.decode_bit_condition(index, value)?;
        per_attr.entry(p.attribute()).or_default().push(p);
    }
    let mut predicates = Vec::new();
    for (attribute, preds) in per_attr {
        let coding = &scheme
            .coding_of(attribute)
            .ok_or(RuleError::Encode(EncodeError::Scheme(format!("{attribute} not encoded"))))?
            .coding;
        if let Some(p) = merge_attribute(attribute, &preds, coding)? {
            predicates.push(p);
        }
    }
    Ok(Rule { predicates, class })
}

fn merge_attribute(attribute: Attribute, preds: &[BitPredicate], coding: &Coding) -> Result<Option<Predicate>, RuleError> {
    let mut low = f64::NEG_INFINITY;
    let mut high = f64::INFINITY;
    let mut equal: Option<f64> = None;
    let mut excluded: Vec<f64> = Vec::new();
    for p in preds {
        match *p {
            BitPredicate::AtLeast { threshold, .. } => low = low.max(threshold),
            BitPredicate::Below { threshold, .. } => high = high.min(threshold),
            BitPredicate::Equals { value, .. } => {
                if equal.is_some_and(|e| e != value) {
                    return Err(RuleError::Infeasible(attribute));
                }
                equal = Some(value);
            }
            BitPredicate::NotEquals { value, .. } => excluded.push(value),
            BitPredicate::Any { .. } => {}
            BitPredicate::Never { .. } => return Err(RuleError::Infeasible(attribute)),
        }
    }
    match coding {
        Coding::OneHot { categories } => {
            if let Some(v) = equal {
                if excluded.contains(&v) {
                    return Err(RuleError::Infeasible(attribute));
                }
                return Ok(Some(Predicate::Compare { attribute, op: Op::Eq, value: v }));
            }
            excluded.sort_by(f64::total_cmp);
            excluded.dedup();
            let left: Vec<f64> = categories.iter().copied().filter(|c| !excluded.contains(c)).collect();
            Ok(match (excluded.len(), left.len()) {
                (_, 0) => return Err(RuleError::Infeasible(attribute)),
                (0, _) => None,
                (_, 1) => Some(Predicate::Compare { attribute, op: Op::Eq, value: left[0] }),
                (1, _) => Some(Predicate::Compare { attribute, op: Op::Ne, value: excluded[0] }),
                _ => Some(Predicate::NotIn { attribute, values: excluded }),
            })
        }
        Coding::Thermometer { domain, .. } => {
            let bounded_low = low > f64::NEG_INFINITY;
            let bounded_high = high < f64::INFINITY;
            if !bounded_low && !bounded_high {
                return Ok(None);
            }
            let pieces: Vec<(f64, f64)> = domain
                .iter()
                .filter_map(|&[a, b]| {
                    let lo = a.max(low);
                    (lo <= b && lo < high).then_some((lo, b))
                })
                .collect();
            if pieces.is_empty() {
                return Err(RuleError::Infeasible(attribute));
            }
            if pieces.len() == 1 && pieces[0].0 == pieces[0].1 {
                return Ok(Some(Predicate::Compare { attribute, op: Op::Eq, value: pieces[0].0 }));
            }
            Ok(Some(match (bounded_low, bounded_high) {
                (true, true) => Predicate::Between { attribute, low, high },
                (true, false) => match domain.iter().position(|&[a, _]| a == low) {
                    Some(k) if k > 0 && domain[k - 1][1] < low => {
                        Predicate::Compare { attribute, op: Op::Gt, value: domain[k - 1][1] }
                    }
                    _ => Predicate::Compare { attribute, op: Op::Ge, value: low },
                },
                _ => Predicate::Compare { attribute, op: Op::Lt, value: high },
            }))
        }
    }
}

/// Firing and accuracy counts for one rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleStats {
    /// 1-based rule number, or `default`.
    pub rule: String,
    pub total: usize,
    pub correct: usize,
}

impl RuleStats {
    pub fn correct_pct(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            100.0 * self.correct as f64 / self.total as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub total: usize,
    pub correct: usize,
    pub accuracy: f64,
    /// One entry per rule, then the default.
    pub per_rule: Vec<RuleStats>,
}

impl Evaluation {
    /// Per-rule statistics as CSV with header `rule,total,correct,correct_pct`.
    pub fn stats_csv(&self) -> String {
        let mut s = String::from("rule,total,correct,correct_pct\n");
        for r in &self.per_rule {
            s.push_str(&format!("{},{},{},{:.2}\n", r.rule, r.total, r.correct, r.correct_pct()));
        }
        s
    }
}

/// Classifies every tuple and attributes each decision to the rule that fired.
pub fn evaluate(rs: &RuleSet, tuples: &[Tuple]) -> Evaluation {
    let n = rs.rules.len();
    let mut totals = vec![0usize; n + 1];
    let mut corrects = vec![0usize; n + 1];
    for t in tuples {
        let (slot, class) = match rs.fired(t) {
            Some(i) => (i, rs.rules[i].class),
            None => (n, rs.default_class),
        };
        totals[slot] += 1;
        if class == t.label {
            corrects[slot] += 1;
        }
    }
    let per_rule = (0..=n)
        .map(|i| RuleStats {
            rule: if i == n { "default".into() } else { (i + 1).to_string() },
            total: totals[i],
            correct: corrects[i],
        })
        .collect();
    let correct: usize = corrects.iter().sum();
    Evaluation {
        total: tuples.len(),
        correct,
        accuracy: if tuples.is_empty() { 0.0 } else { correct as f64 / tuples.len() as f64 },
        per_rule,
    }
}

/// Drops rules that never fire on `training`, duplicates, and rules made
/// redundant by another rule; training classifications are unchanged.
pub fn simplify(rs: &RuleSet, training: &[Tuple]) -> RuleSet {
    let mut rules: Vec<Rule> = Vec::new();
    for r in &rs.rules {
        if rules.iter().any(|k| r.implies(k)) {
            continue;
        }
        rules.push(r.clone());
    }
    // A rule implied by a later rule of the same class is redundant when no
    // rule of another class sits between them.
    let mut i = 0;
    while i < rules.len() {
        let redundant = (i + 1..rules.len()).any(|j| {
            rules[j].class == rules[i].class
                && rules[i + 1..j].iter().all(|m| m.class == rules[i].class)
                && rules[i].implies(&rules[j])
        });
        if redundant {
            rules.remove(i);
        } else {
            i += 1;
        }
    }
    let mut fired = vec![false; rules.len()];
    let current = RuleSet { rules, default_class: rs.default_class };
    for t in training {
        if let Some(i) = current.fired(t) {
            fired[i] = true;
        }
    }
    let rules = current.rules.into_iter().zip(fired).filter(|(_, f)| *f).map(|(r, _)| r).collect();
    RuleSet { rules, default_class: rs.default_class }
}
