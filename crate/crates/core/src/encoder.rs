//! Binary input coding of tuples.
//!
//! Ordered attributes use thermometer codes, categorical ones use one-hot
//! codes. Inside an attribute's input range the leftmost input carries the
//! highest threshold, so a salary below 25000 reads `000001` and a salary in
//! `[25000, 50000)` reads `000011`. The input after the last coded bit is a
//! constant 1 that plays the role of the hidden-node threshold.
//!
//! Input indices are 0-based in the API and printed 1-based (`I1`..`I87`).

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::datagen::{Attribute, Class, Tuple};

#[derive(Debug, Error, PartialEq)]
pub enum EncodeError {
    #[error("{attribute} value {value} is outside the encodable domain")]
    OutOfDomain { attribute: Attribute, value: f64 },
    #[error("input index {0} has no attribute predicate")]
    NoPredicate(usize),
    #[error("invalid encoding scheme: {0}")]
    Scheme(String),
}

/// How one attribute is turned into bits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Coding {
    /// Bit `j` (counted from the low end) is 1 iff `value >= thresholds[j]`.
    /// With `base` set, an extra lowest bit is 1 for every in-domain value.
    Thermometer {
        base: bool,
        thresholds: Vec<f64>,
        /// Closed segments of admissible values.
        domain: Vec<[f64; 2]>,
        /// The value 0 is coded as all zeros (commission).
        zero_coded: bool,
    },
    /// One input per category, in listed order.
    OneHot { categories: Vec<f64> },
}

impl Coding {
    pub fn width(&self) -> usize {
        match self {
            Coding::Thermometer {
                base, thresholds, ..
            } => thresholds.len() + usize::from(*base),
            Coding::OneHot { categories } => categories.len(),
        }
    }

    /// Threshold of a thermometer bit counted from the low end; `None` for the base bit.
    fn threshold(&self, low_pos: usize) -> Option<f64> {
        match self {
            Coding::Thermometer {
                base, thresholds, ..
            } => {
                if *base {
                    low_pos.checked_sub(1).map(|i| thresholds[i])
                } else {
                    Some(thresholds[low_pos])
                }
            }
            Coding::OneHot { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeCoding {
    pub attribute: Attribute,
    /// First input index of this attribute's range.
    pub start: usize,
    pub coding: Coding,
}

impl AttributeCoding {
    pub fn range(&self) -> std::ops::Range<usize> {
        self.start..self.start + self.coding.width()
    }

    /// Uniform interval width of a thermometer coding, if the steps are even.
    pub fn interval_width(&self) -> Option<f64> {
        match &self.coding {
            Coding::Thermometer { thresholds, .. } if thresholds.len() >= 2 => {
                let w = thresholds[1] - thresholds[0];
                thresholds
                    .windows(2)
                    .all(|p| (p[1] - p[0] - w).abs() < 1e-9)
                    .then_some(w)
            }
            _ => None,
        }
    }
}

/// Condition expressed by a single input bit.
#[derive(Debug, Clone, PartialEq)]
pub enum BitPredicate {
    AtLeast { attribute: Attribute, threshold: f64 },
    Below { attribute: Attribute, threshold: f64 },
    Equals { attribute: Attribute, value: f64 },
    NotEquals { attribute: Attribute, value: f64 },
    /// The base bit of a thermometer code set to 1: true for any in-domain value.
    Any { attribute: Attribute },
    /// The base bit set to 0: no in-domain value qualifies.
    Never { attribute: Attribute },
}

impl BitPredicate {
    pub fn attribute(&self) -> Attribute {
        match *self {
            BitPredicate::AtLeast { attribute, .. }
            | BitPredicate::Below { attribute, .. }
            | BitPredicate::Equals { attribute, .. }
            | BitPredicate::NotEquals { attribute, .. }
            | BitPredicate::Any { attribute }
            | BitPredicate::Never { attribute } => attribute,
        }
    }

    pub fn holds(&self, t: &Tuple) -> bool {
        let x = t.get(self.attribute());
        match *self {
            BitPredicate::AtLeast { threshold, .. } => x >= threshold,
            BitPredicate::Below { threshold, .. } => x < threshold,
            BitPredicate::Equals { value, .. } => x == value,
            BitPredicate::NotEquals { value, .. } => x != value,
            BitPredicate::Any { .. } => true,
            BitPredicate::Never { .. } => false,
        }
    }
}

impl fmt::Display for BitPredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BitPredicate::AtLeast {
                attribute,
                threshold,
            } => write!(f, "{attribute} >= {threshold}"),
            BitPredicate::Below {
                attribute,
                threshold,
            } => write!(f, "{attribute} < {threshold}"),
            BitPredicate::Equals { attribute, value } => write!(f, "{attribute} = {value}"),
            BitPredicate::NotEquals { attribute, value } => write!(f, "{attribute} != {value}"),
            BitPredicate::Any { attribute } => write!(f, "{attribute} in domain"),
            BitPredicate::Never { attribute } => write!(f, "{attribute} never"),
        }
    }
}

/// A bit-coded tuple: `bits[i]` is input `I(i+1)`; the last bit is the constant input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedVector {
    pub bits: Vec<u8>,
    pub label: Class,
}

impl EncodedVector {
    pub fn inputs(&self) -> Vec<f64> {
        self.bits.iter().map(|&b| f64::from(b)).collect()
    }
}

/// Layout of all attribute codings plus the trailing bias input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodingScheme {
    pub attributes: Vec<AttributeCoding>,
}

fn steps(first: f64, width: f64, count: usize) -> Vec<f64> {
    (0..count).map(|i| first + width * i as f64).collect()
}

fn thermometer(base: bool, thresholds: Vec<f64>, domain: Vec<[f64; 2]>) -> Coding {
    Coding::Thermometer {
        base,
        thresholds,
        domain,
        zero_coded: false,
    }
}

fn categories(lo: u32, hi: u32) -> Coding {
    Coding::OneHot {
        categories: (lo..=hi).map(f64::from).collect(),
    }
}

impl Default for EncodingScheme {
    fn default() -> Self {
        Self::default_scheme()
    }
}

impl EncodingScheme {
    /// The 86-bit benchmark coding (plus bias input at index 86).
    pub fn default_scheme() -> Self {
        let specs = vec![
            (
                Attribute::Salary,
                thermometer(true, steps(25_000.0, 25_000.0, 5), vec![[20_000.0, 150_000.0]]),
            ),
            (
                Attribute::Commission,
                Coding::Thermometer {
                    base: false,
                    thresholds: steps(10_000.0, 10_000.0, 7),
                    domain: vec![[0.0, 0.0], [10_000.0, 75_000.0]],
                    zero_coded: true,
                },
            ),
            (
                Attribute::Age,
                thermometer(true, steps(30.0, 10.0, 5), vec![[20.0, 80.0]]),
            ),
            (
                Attribute::Elevel,
                thermometer(false, steps(1.0, 1.0, 4), vec![[0.0, 4.0]]),
            ),
            (Attribute::Car, categories(1, 20)),
            (Attribute::Zipcode, categories(1, 9)),
            (
                Attribute::Hvalue,
                thermometer(
                    true,
                    steps(100_000.0, 100_000.0, 13),
                    vec![[50_000.0, 1_350_000.0]],
                ),
            ),
            (
                Attribute::Hyears,
                thermometer(true, steps(4.0, 3.0, 9), vec![[1.0, 30.0]]),
            ),
            (
                Attribute::Loan,
                thermometer(true, steps(50_000.0, 50_000.0, 9), vec![[1.0, 500_000.0]]),
            ),
        ];
        Self::from_codings(specs)
    }

    /// Lays out codings back to back starting at input 0.
    pub fn from_codings(codings: Vec<(Attribute, Coding)>) -> Self {
        let mut start = 0;
        let attributes = codings
            .into_iter()
            .map(|(attribute, coding)| {
                let ac = AttributeCoding {
                    attribute,
                    start,
                    coding,
                };
                start += ac.coding.width();
                ac
            })
            .collect();
        EncodingScheme { attributes }
    }

    /// Number of coded bits (excluding the bias input).
    pub fn bit_count(&self) -> usize {
        self.attributes.iter().map(|a| a.coding.width()).sum()
    }

    /// Total network inputs, bias included.
    pub fn input_count(&self) -> usize {
        self.bit_count() + 1
    }

    pub fn bias_index(&self) -> usize {
        self.bit_count()
    }

    pub fn coding_of(&self, attribute: Attribute) -> Option<&AttributeCoding> {
        self.attributes.iter().find(|a| a.attribute == attribute)
    }

    pub fn validate(&self) -> Result<(), EncodeError> {
        let mut next = 0;
        for a in &self.attributes {
            if a.start != next {
                return Err(EncodeError::Scheme(format!(
                    "{} starts at {} instead of {next}",
                    a.attribute, a.start
                )));
            }
            match &a.coding {
                Coding::Thermometer {
                    thresholds, domain, ..
                } => {
                    if a.coding.width() < 2 {
                        return Err(EncodeError::Scheme(format!(
                            "{} needs at least two intervals",
                            a.attribute
                        )));
                    }
                    if thresholds.windows(2).any(|p| p[0] >= p[1]) || domain.is_empty() {
                        return Err(EncodeError::Scheme(format!(
                            "{} thresholds must increase",
                            a.attribute
                        )));
                    }
                }
                Coding::OneHot { categories } => {
                    if categories.is_empty() {
                        return Err(EncodeError::Scheme(format!(
                            "{} has no categories",
                            a.attribute
                        )));
                    }
                }
            }
            next += a.coding.width();
        }
        Ok(())
    }

    /// Attribute coding and position inside its range for an input index.
    pub fn locate(&self, index: usize) -> Option<(&AttributeCoding, usize)> {
        self.attributes
            .iter()
            .find(|a| a.range().contains(&index))
            .map(|a| (a, index - a.start))
    }

    pub fn encode(&self, t: &Tuple) -> Result<EncodedVector, EncodeError> {
        let mut bits = vec![0u8; self.input_count()];
        for a in &self.attributes {
            let value = t.get(a.attribute);
            if !admissible(&a.coding, value) {
                return Err(EncodeError::OutOfDomain {
                    attribute: a.attribute,
                    value,
                });
            }
            write_bits(a, value, &mut bits);
        }
        bits[self.bias_index()] = 1;
        Ok(EncodedVector {
            bits,
            label: t.label,
        })
    }

    /// Encodes after clamping out-of-domain values; returns the clamped attributes.
    pub fn encode_lenient(&self, t: &Tuple) -> (EncodedVector, Vec<Attribute>) {
        let mut bits = vec![0u8; self.input_count()];
        let mut clamped = Vec::new();
        for a in &self.attributes {
            let mut value = t.get(a.attribute);
            if !admissible(&a.coding, value) {
                value = clamp_into(&a.coding, value);
                clamped.push(a.attribute);
            }
            write_bits(a, value, &mut bits);
        }
        bits[self.bias_index()] = 1;
        (
            EncodedVector {
                bits,
                label: t.label,
            },
            clamped,
        )
    }

    /// Attribute predicate equivalent to `I(index+1) = value`.
    pub fn decode_bit_condition(&self, index: usize, value: bool) -> Result<BitPredicate, EncodeError> {
        let (a, pos) = self.locate(index).ok_or(EncodeError::NoPredicate(index))?;
        let attribute = a.attribute;
        Ok(match &a.coding {
            Coding::Thermometer { .. } => {
                let low_pos = a.coding.width() - 1 - pos;
                match (a.coding.threshold(low_pos), value) {
                    (Some(threshold), true) => BitPredicate::AtLeast {
                        attribute,
                        threshold,
                    },
                    (Some(threshold), false) => BitPredicate::Below {
                        attribute,
                        threshold,
                    },
                    (None, true) => BitPredicate::Any { attribute },
                    (None, false) => BitPredicate::Never { attribute },
                }
            }
            Coding::OneHot { categories } => {
                let c = categories[pos];
                if value {
                    BitPredicate::Equals { attribute, value: c }
                } else {
                    BitPredicate::NotEquals { attribute, value: c }
                }
            }
        })
    }

    /// True iff some admissible tuple satisfies every `(index, value)` bit condition.
    pub fn feasible(&self, conditions: &[(usize, bool)]) -> bool {
        let bias = self.bias_index();
        let mut per_attr: BTreeMap<usize, Vec<(usize, bool)>> = BTreeMap::new();
        for &(index, value) in conditions {
            if index == bias {
                if !value {
                    return false;
                }
                continue;
            }
            let Some(slot) = self.attributes.iter().position(|a| a.range().contains(&index)) else {
                return false;
            };
            per_attr
                .entry(slot)
                .or_default()
                .push((index - self.attributes[slot].start, value));
        }
        per_attr
            .iter()
            .all(|(&slot, conds)| attribute_feasible(&self.attributes[slot].coding, conds))
    }
}

fn admissible(coding: &Coding, value: f64) -> bool {
    match coding {
        Coding::Thermometer { domain, .. } => {
            domain.iter().any(|&[lo, hi]| lo <= value && value <= hi)
        }
        Coding::OneHot { categories } => categories.contains(&value),
    }
}

fn clamp_into(coding: &Coding, value: f64) -> f64 {
    let candidates: Vec<f64> = match coding {
        Coding::Thermometer { domain, .. } => domain
            .iter()
            .map(|&[lo, hi]| value.clamp(lo, hi))
            .collect(),
        Coding::OneHot { categories } => categories.clone(),
    };
    candidates
        .into_iter()
        .min_by(|a, b| (a - value).abs().total_cmp(&(b - value).abs()))
        .unwrap_or(value)
}

fn write_bits(a: &AttributeCoding, value: f64, bits: &mut [u8]) {
    let width = a.coding.width();
    match &a.coding {
        Coding::Thermometer { .. } => {
            for low_pos in 0..width {
                let on = match a.coding.threshold(low_pos) {
                    Some(t) => value >= t,
                    None => true,
                };
                bits[a.start + width - 1 - low_pos] = u8::from(on);
            }
        }
        Coding::OneHot { categories } => {
            for (i, c) in categories.iter().enumerate() {
                bits[a.start + i] = u8::from(*c == value);
            }
        }
    }
}

fn attribute_feasible(coding: &Coding, conds: &[(usize, bool)]) -> bool {
    match coding {
        Coding::Thermometer { domain, .. } => {
            let width = coding.width();
            let mut lo = f64::NEG_INFINITY;
            let mut hi = f64::INFINITY;
            for &(pos, value) in conds {
                match (coding.threshold(width - 1 - pos), value) {
                    (Some(t), true) => lo = lo.max(t),
                    (Some(t), false) => hi = hi.min(t),
                    (None, true) => {}
                    (None, false) => return false,
                }
            }
            domain.iter().any(|&[a, b]| {
                let v = a.max(lo);
                v <= b && v < hi
            })
        }
        Coding::OneHot { categories } => {
            let mut ones: Vec<usize> = Vec::new();
            let mut zeros: Vec<usize> = Vec::new();
            for &(pos, value) in conds {
                if value {
                    ones.push(pos)
                } else {
                    zeros.push(pos)
                }
            }
            ones.sort_unstable();
            ones.dedup();
            zeros.sort_unstable();
            zeros.dedup();
            match ones.as_slice() {
                [] => zeros.len() < categories.len(),
                [one] => !zeros.contains(one),
                _ => false,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::{generate_tuples, FunctionId, GeneratorConfig};

    fn sample() -> Tuple {
        Tuple {
            salary: 20_000.0,
            commission: 0.0,
            age: 45.0,
            elevel: 2.0,
            car: 3.0,
            zipcode: 4.0,
            hvalue: 300_000.0,
            hyears: 5.0,
            loan: 120_000.0,
            label: Class::A,
        }
    }

    fn range_bits(v: &EncodedVector, a: Attribute, s: &EncodingScheme) -> String {
        let r = s.coding_of(a).unwrap().range();
        v.bits[r].iter().map(|b| if *b == 1 { '1' } else { '0' }).collect()
    }

    #[test]
    fn default_layout_matches_input_table() {
        let s = EncodingScheme::default_scheme();
        s.validate().unwrap();
        assert_eq!(s.bit_count(), 86);
        assert_eq!(s.input_count(), 87);
        let expect = [
            (Attribute::Salary, 0..6),
            (Attribute::Commission, 6..13),
            (Attribute::Age, 13..19),
            (Attribute::Elevel, 19..23),
            (Attribute::Car, 23..43),
            (Attribute::Zipcode, 43..52),
            (Attribute::Hvalue, 52..66),
            (Attribute::Hyears, 66..76),
            (Attribute::Loan, 76..86),
        ];
        for (a, r) in expect {
            assert_eq!(s.coding_of(a).unwrap().range(), r, "{a}");
        }
        assert_eq!(s.coding_of(Attribute::Salary).unwrap().interval_width(), Some(25_000.0));
        assert_eq!(s.coding_of(Attribute::Commission).unwrap().interval_width(), Some(10_000.0));
        assert_eq!(s.coding_of(Attribute::Age).unwrap().interval_width(), Some(10.0));
        assert_eq!(s.coding_of(Attribute::Hvalue).unwrap().interval_width(), Some(100_000.0));
        assert_eq!(s.coding_of(Attribute::Hyears).unwrap().interval_width(), Some(3.0));
        assert_eq!(s.coding_of(Attribute::Loan).unwrap().interval_width(), Some(50_000.0));
    }

    #[test]
    fn salary_and_commission_codes() {
        let s = EncodingScheme::default_scheme();
        let mut t = sample();
        let v = s.encode(&t).unwrap();
        assert_eq!(range_bits(&v, Attribute::Salary, &s), "000001");
        assert_eq!(range_bits(&v, Attribute::Commission, &s), "0000000");
        assert_eq!(v.bits[86], 1);
        t.salary = 30_000.0;
        t.commission = 10_000.0;
        let v = s.encode(&t).unwrap();
        assert_eq!(range_bits(&v, Attribute::Salary, &s), "000011");
        assert_eq!(range_bits(&v, Attribute::Commission, &s), "0000001");
    }

    #[test]
    fn one_hot_sets_exactly_one() {
        let s = EncodingScheme::default_scheme();
        let v = s.encode(&sample()).unwrap();
        assert_eq!(range_bits(&v, Attribute::Car, &s), "00100000000000000000");
        assert_eq!(range_bits(&v, Attribute::Zipcode, &s), "000100000");
        assert_eq!(range_bits(&v, Attribute::Elevel, &s), "0011");
    }

    #[test]
    fn strict_rejects_and_lenient_clamps() {
        let s = EncodingScheme::default_scheme();
        let mut t = sample();
        t.age = 85.0;
        assert_eq!(
            s.encode(&t),
            Err(EncodeError::OutOfDomain {
                attribute: Attribute::Age,
                value: 85.0
            })
        );
        let (v, clamped) = s.encode_lenient(&t);
        assert_eq!(clamped, vec![Attribute::Age]);
        assert_eq!(range_bits(&v, Attribute::Age, &s), "111111");
    }

    #[test]
    fn decode_examples() {
        let s = EncodingScheme::default_scheme();
        assert_eq!(
            s.decode_bit_condition(4, true).unwrap(),
            BitPredicate::AtLeast {
                attribute: Attribute::Salary,
                threshold: 25_000.0
            }
        );
        assert_eq!(
            s.decode_bit_condition(12, false).unwrap(),
            BitPredicate::Below {
                attribute: Attribute::Commission,
                threshold: 10_000.0
            }
        );
        // I17 is the age >= 40 bit.
        assert_eq!(
            s.decode_bit_condition(16, true).unwrap(),
            BitPredicate::AtLeast {
                attribute: Attribute::Age,
                threshold: 40.0
            }
        );
        assert_eq!(s.decode_bit_condition(86, true), Err(EncodeError::NoPredicate(86)));
        assert_eq!(
            s.decode_bit_condition(23, true).unwrap(),
            BitPredicate::Equals {
                attribute: Attribute::Car,
                value: 1.0
            }
        );
    }

    #[test]
    fn one_hot_elevel_decodes_to_category() {
        let s = EncodingScheme::from_codings(vec![(
            Attribute::Elevel,
            Coding::OneHot {
                categories: vec![0.0, 1.0, 2.0, 3.0, 4.0],
            },
        )]);
        assert_eq!(
            s.decode_bit_condition(0, true).unwrap(),
            BitPredicate::Equals {
                attribute: Attribute::Elevel,
                value: 0.0
            }
        );
    }

    #[test]
    fn salary_bit_equivalence_over_intervals() {
        // Enumerate one value per salary interval and check bit/predicate agreement.
        let s = EncodingScheme::default_scheme();
        for salary in [20_000.0, 24_999.0, 25_000.0, 49_999.0, 50_000.0, 99_999.0, 100_000.0, 149_000.0] {
            let mut t = sample();
            t.salary = salary;
            t.commission = if salary >= 75_000.0 { 0.0 } else { 12_000.0 };
            let v = s.encode(&t).unwrap();
            for i in 0..6 {
                for value in [false, true] {
                    let p = s.decode_bit_condition(i, value).unwrap();
                    assert_eq!(p.holds(&t), (v.bits[i] == 1) == value, "{salary} I{}", i + 1);
                }
            }
        }
    }

    #[test]
    fn feasibility_examples() {
        let s = EncodingScheme::default_scheme();
        // salary >= 50000 and salary < 25000.
        assert!(!s.feasible(&[(3, true), (4, false)]));
        // age >= 60 and age < 40.
        assert!(!s.feasible(&[(14, true), (16, false)]));
        assert!(s.feasible(&[]));
        // commission > 0 is feasible, but not together with commission >= 70000 and < 20000.
        assert!(s.feasible(&[(12, true)]));
        assert!(!s.feasible(&[(6, true), (11, false)]));
        // Two cars at once.
        assert!(!s.feasible(&[(23, true), (24, true)]));
        // Same bit both ways.
        assert!(!s.feasible(&[(30, true), (30, false)]));
        // No zipcode at all.
        let all_zero: Vec<(usize, bool)> = (43..52).map(|i| (i, false)).collect();
        assert!(!s.feasible(&all_zero));
        assert!(!s.feasible(&[(86, false)]));
    }

    #[test]
    fn round_trip_on_generated_tuples() {
        let s = EncodingScheme::default_scheme();
        let data = generate_tuples(&GeneratorConfig::new(FunctionId::F2, 2000, 4, 0.05)).unwrap();
        for t in &data {
            let v = s.encode(t).unwrap();
            for i in 0..86 {
                let p = s.decode_bit_condition(i, true).unwrap();
                assert_eq!(p.holds(t), v.bits[i] == 1, "I{} on {t:?}", i + 1);
            }
        }
    }
}
