//! Online clustering of hidden-node activation values.

use serde::{Deserialize, Serialize};

/// Discrete activation values of one hidden node.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterTable {
    pub epsilon: f64,
    /// Finalized representatives, one per cluster, in creation order.
    pub representatives: Vec<f64>,
    pub counts: Vec<usize>,
    pub sums: Vec<f64>,
}

/// One step of the clustering pass, kept for auditing.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Insertion {
    pub value: f64,
    pub cluster: usize,
    /// Representative of `cluster` at the moment `value` was placed.
    pub representative: f64,
}

impl ClusterTable {
    pub fn len(&self) -> usize {
        self.representatives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.representatives.is_empty()
    }

    /// Index of the representative closest to `value`; ties go to the lower index.
    pub fn nearest(&self, value: f64) -> usize {
        let mut best = 0;
        let mut best_gap = f64::INFINITY;
        for (j, &h) in self.representatives.iter().enumerate() {
            let gap = (value - h).abs();
            if gap < best_gap {
                best = j;
                best_gap = gap;
            }
        }
        best
    }

    /// Replaces `value` by its nearest representative.
    pub fn discretize(&self, value: f64) -> f64 {
        self.representatives[self.nearest(value)]
    }
}

/// Clusters `values` in the given order with radius `epsilon`.
///
/// Expects `0 < epsilon < 1`. Each value joins the cluster whose seed lies
/// nearest, provided it is within `epsilon`; otherwise it seeds a new cluster.
/// Representatives become member means once the pass is complete.
pub fn cluster_activations(values: &[f64], epsilon: f64) -> ClusterTable {
    cluster_with_log(values, epsilon).0
}

/// Same as [`cluster_activations`], also returning the insertion log.
pub fn cluster_with_log(values: &[f64], epsilon: f64) -> (ClusterTable, Vec<Insertion>) {
    let mut seeds: Vec<f64> = Vec::new();
    let mut counts: Vec<usize> = Vec::new();
    let mut sums: Vec<f64> = Vec::new();
    let mut log = Vec::with_capacity(values.len());
    for &delta in values {
        let mut best = None;
        let mut best_gap = f64::INFINITY;
        for (j, &h) in seeds.iter().enumerate() {
            let gap = (delta - h).abs();
            if gap < best_gap {
                best = Some(j);
                best_gap = gap;
            }
        }
        let j = match best {
            Some(j) if best_gap <= epsilon => {
                counts[j] += 1;
                sums[j] += delta;
                j
            }
            _ => {
                seeds.push(delta);
                counts.push(1);
                sums.push(delta);
                seeds.len() - 1
            }
        };
        log.push(Insertion { value: delta, cluster: j, representative: seeds[j] });
    }
    let representatives = sums.iter().zip(&counts).map(|(s, &c)| s / c as f64).collect();
    (ClusterTable { epsilon, representatives, counts, sums }, log)
}
