//! Perfect-cover rule induction over small discrete tables.
//!
//! Candidate conjunctions are enumerated by increasing length (variable
//! subsets in lexicographic order, then value combinations that occur in the
//! table). Those touching no negative row are kept, ranked by positive
//! coverage, and chosen greedily so that accepted rules cover disjoint sets of
//! positive rows.

use std::collections::{BTreeMap, HashSet};

use super::ExtractError;

/// Conjunction of `(variable, value)` literals, sorted by variable.
pub type Conjunction = Vec<(usize, usize)>;

/// Default cumulative budget on enumerated candidate conjunctions.
pub const CANDIDATE_CAP: usize = 1 << 20;

struct Candidate {
    literals: Conjunction,
    coverage: usize,
    order: usize,
}

/// Finds conjunctions covering every positive row and no negative row.
///
/// `rows` must all have the same width. Identical rows with opposite labels
/// make a perfect cover impossible and are reported as a conflict. Returns
/// an empty list when there are no positive rows.
pub fn perfect_cover_rules(
    rows: &[Vec<usize>],
    positive: &[bool],
    candidate_cap: usize,
) -> Result<Vec<Conjunction>, ExtractError> {
    if rows.len() != positive.len() {
        return Err(ExtractError::Table(format!(
            "{} rows but {} labels",
            rows.len(),
            positive.len()
        )));
    }
    let width = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != width) {
        return Err(ExtractError::Table("rows differ in width".into()));
    }
    let mut distinct: BTreeMap<&[usize], bool> = BTreeMap::new();
    for (row, &label) in rows.iter().zip(positive) {
        if let Some(&prev) = distinct.get(row.as_slice()) {
            if prev != label {
                return Err(ExtractError::Conflict(row.clone()));
            }
        } else {
            distinct.insert(row, label);
        }
    }
    let pos: Vec<&[usize]> = distinct.iter().filter(|(_, &l)| l).map(|(r, _)| *r).collect();
    if pos.is_empty() {
        return Ok(Vec::new());
    }
    let table: Vec<(&[usize], bool)> = distinct.iter().map(|(r, &l)| (*r, l)).collect();
    let domains: Vec<usize> = (0..width)
        .map(|c| table.iter().map(|(r, _)| r[c] + 1).max().unwrap_or(1))
        .collect();

    let mut candidates = Vec::new();
    let mut spent = 0usize;
    let mut complete = false;
    'sizes: for k in 0..=width {
        let mut cost = 0usize;
        for subset in Combinations::new(width, k) {
            let size = subset.iter().fold(1usize, |a, &c| a.saturating_mul(domains[c]));
            cost = cost.saturating_add(size);
        }
        if spent.saturating_add(cost) > candidate_cap {
            break 'sizes;
        }
        spent += cost;
        for subset in Combinations::new(width, k) {
            let mut groups: BTreeMap<Vec<usize>, (usize, usize)> = BTreeMap::new();
            for (row, label) in &table {
                let key: Vec<usize> = subset.iter().map(|&c| row[c]).collect();
                let e = groups.entry(key).or_insert((0, 0));
                if *label {
                    e.0 += 1;
                } else {
                    e.1 += 1;
                }
            }
            for (values, (p, n)) in groups {
                if n == 0 && p > 0 {
                    candidates.push(Candidate {
                        literals: subset.iter().copied().zip(values).collect(),
                        coverage: p,
                        order: candidates.len(),
                    });
                }
            }
        }
        if k == width {
            complete = true;
        }
    }
    if !complete {
        for row in &pos {
            candidates.push(Candidate {
                literals: row.iter().copied().enumerate().collect(),
                coverage: 1,
                order: candidates.len(),
            });
        }
    }
    candidates.sort_by(|a, b| {
        b.coverage
            .cmp(&a.coverage)
            .then(a.literals.len().cmp(&b.literals.len()))
            .then(a.order.cmp(&b.order))
    });

    let mut covered: HashSet<usize> = HashSet::new();
    let mut chosen = Vec::new();
    for cand in candidates {
        if covered.len() == pos.len() {
            break;
        }
        let hits: Vec<usize> = pos
            .iter()
            .enumerate()
            .filter(|(_, r)| matches(&cand.literals, r))
            .map(|(i, _)| i)
            .collect();
        if hits.iter().any(|i| covered.contains(i)) {
            continue;
        }
        covered.extend(hits);
        chosen.push(cand.literals);
    }
    Ok(chosen)
}

/// Whether `row` satisfies every literal of `conjunction`.
pub fn matches(conjunction: &[(usize, usize)], row: &[usize]) -> bool {
    conjunction.iter().all(|&(c, v)| row[c] == v)
}

/// Size-`k` subsets of `0..n` in lexicographic order.
struct Combinations {
    n: usize,
    idx: Vec<usize>,
    done: bool,
}

impl Combinations {
    fn new(n: usize, k: usize) -> Self {
        Combinations { n, idx: (0..k).collect(), done: k > n }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.idx.clone();
        let k = self.idx.len();
        let mut i = k;
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.idx[i] < self.n - k + i {
                self.idx[i] += 1;
                for j in i + 1..k {
                    self.idx[j] = self.idx[j - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn combinations_are_lexicographic() {
        let all: Vec<Vec<usize>> = Combinations::new(4, 2).collect();
        assert_eq!(all, vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]);
        assert_eq!(Combinations::new(3, 0).count(), 1);
        assert_eq!(Combinations::new(2, 3).count(), 0);
    }

    #[test]
    fn all_positive_gives_empty_antecedent() {
        let rows = vec![vec![0, 1], vec![1, 0]];
        let rules = perfect_cover_rules(&rows, &[true, true], CANDIDATE_CAP).unwrap();
        assert_eq!(rules, vec![Vec::<(usize, usize)>::new()]);
    }

    #[test]
    fn no_positive_gives_nothing() {
        let rows = vec![vec![0], vec![1]];
        assert!(perfect_cover_rules(&rows, &[false, false], CANDIDATE_CAP).unwrap().is_empty());
    }

    #[test]
    fn conflicting_duplicates_are_rejected() {
        let rows = vec![vec![0, 1], vec![0, 1]];
        let err = perfect_cover_rules(&rows, &[true, false], CANDIDATE_CAP).unwrap_err();
        assert!(matches!(err, ExtractError::Conflict(_)));
    }

    #[test]
    fn single_bit_table() {
        let rows = vec![vec![0], vec![1]];
        let rules = perfect_cover_rules(&rows, &[false, true], CANDIDATE_CAP).unwrap();
        assert_eq!(rules, vec![vec![(0, 1)]]);
    }

    #[test]
    fn exhausted_budget_falls_back_to_full_rows() {
        let rows = vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]];
        let positive = [false, true, true, false];
        let rules = perfect_cover_rules(&rows, &positive, 1).unwrap();
        assert_eq!(rules, vec![vec![(0, 0), (1, 1)], vec![(0, 1), (1, 0)]]);
    }

    pub(crate) fn check_cover(rows: &[Vec<usize>], positive: &[bool], rules: &[Conjunction]) -> usize {
        let mut violations = 0;
        for (row, &p) in rows.iter().zip(positive) {
            let hit = rules.iter().any(|r| matches(r, row));
            if hit != p {
                violations += 1;
            }
        }
        violations
    }

    /// Every conjunction over the table's variables, by brute force.
    fn all_conjunctions(width: usize, domains: &[usize]) -> Vec<Conjunction> {
        let mut out = vec![Vec::new()];
        for c in 0..width {
            let mut next = Vec::new();
            for conj in &out {
                next.push(conj.clone());
                for v in 0..domains[c] {
                    let mut e = conj.clone();
                    e.push((c, v));
                    next.push(e);
                }
            }
            out = next;
        }
        out
    }

    #[test]
    fn random_tables_against_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let width = rng.gen_range(1..=4);
            let domains: Vec<usize> = (0..width).map(|_| rng.gen_range(1..=3)).collect();
            let mut rows: Vec<Vec<usize>> = Vec::new();
            let mut positive = Vec::new();
            let mut seen = HashSet::new();
            for _ in 0..rng.gen_range(1..=20) {
                let row: Vec<usize> = domains.iter().map(|&d| rng.gen_range(0..d)).collect();
                if seen.insert(row.clone()) {
                    positive.push(rng.gen_bool(0.5));
                    rows.push(row);
                }
            }
            let rules = perfect_cover_rules(&rows, &positive, CANDIDATE_CAP).unwrap();
            assert_eq!(check_cover(&rows, &positive, &rules), 0);
            let perfect: HashSet<Conjunction> = all_conjunctions(width, &domains)
                .into_iter()
                .filter(|c| {
                    let hits: Vec<bool> = rows.iter().zip(&positive).filter(|(r, _)| matches(c, r)).map(|(_, &p)| p).collect();
                    !hits.is_empty() && hits.iter().all(|&p| p)
                })
                .collect();
            for r in &rules {
                assert!(perfect.contains(r), "{r:?} is not a perfect conjunction");
            }
        }
    }

    /// Discrete activation table of a pruned three-node network: node values
    /// are cluster indices of (-1, 0, 1), (0, 1) and (-1, 0.24, 1).
    pub(crate) fn eighteen_row_table() -> (Vec<Vec<usize>>, Vec<bool>) {
        let a1 = |v: f64| [-1.0, 0.0, 1.0].iter().position(|&x| x == v).unwrap();
        let a2 = |v: f64| [0.0, 1.0].iter().position(|&x| x == v).unwrap();
        let a3 = |v: f64| [-1.0, 0.24, 1.0].iter().position(|&x| x == v).unwrap();
        let raw = [
            (-1.0, 1.0, -1.0, 0.92),
            (-1.0, 1.0, 1.0, 0.00),
            (-1.0, 1.0, 0.24, 0.01),
            (-1.0, 0.0, -1.0, 1.00),
            (-1.0, 0.0, 1.0, 0.11),
            (-1.0, 0.0, 0.24, 0.93),
            (1.0, 1.0, -1.0, 0.00),
            (1.0, 1.0, 1.0, 0.00),
            (1.0, 1.0, 0.24, 0.00),
            (1.0, 0.0, -1.0, 0.89),
            (1.0, 0.0, 1.0, 0.00),
            (1.0, 0.0, 0.24, 0.00),
            (0.0, 1.0, -1.0, 0.18),
            (0.0, 1.0, 1.0, 0.00),
            (0.0, 1.0, 0.24, 0.00),
            (0.0, 0.0, -1.0, 1.00),
            (0.0, 0.0, 1.0, 0.00),
            (0.0, 0.0, 0.24, 0.18),
        ];
        let rows = raw.iter().map(|r| vec![a1(r.0), a2(r.1), a3(r.2)]).collect();
        let positive = raw.iter().map(|r| r.3 > 0.5).collect();
        (rows, positive)
    }

    #[test]
    fn eighteen_row_table_rules() {
        let (rows, positive) = eighteen_row_table();
        let mut rules = perfect_cover_rules(&rows, &positive, CANDIDATE_CAP).unwrap();
        rules.sort();
        let mut expected = vec![
            vec![(1, 0), (2, 0)],
            vec![(0, 0), (1, 1), (2, 0)],
            vec![(0, 0), (1, 0), (2, 1)],
        ];
        expected.sort();
        assert_eq!(rules, expected);
    }
}
