//! Regression tree (CART, variance-reduction splits) grown level-wise
//! over presorted feature columns.
//!
//! The presort is done once per dataset and shared across every tree of
//! an ensemble: growing a level costs one ordered scan per feature, with
//! a row→node table routing each row's statistics to its current node.
//! Splits use exact thresholds (midpoints between adjacent distinct
//! values); ties break toward the lowest feature index, then the lowest
//! threshold, by scan order.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Column-major training view with one presorted index per feature.
pub struct Dataset {
    /// `cols[j][i]` = feature j of row i.
    pub cols: Vec<Vec<f64>>,
    /// `sorted[j]` = row indices ordered by feature j (stable by row).
    pub sorted: Vec<Vec<u32>>,
    pub n_rows: usize,
}

impl Dataset {
    /// Build from a row-major matrix. Fails on non-finite entries.
    pub fn from_row_major(features: &[f64], n_rows: usize, n_cols: usize) -> Result<Self> {
        if n_rows == 0 || n_cols == 0 {
            return Err(Error::invalid("empty dataset"));
        }
        if features.len() != n_rows * n_cols {
            return Err(Error::Schema("feature matrix shape mismatch".into()));
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("feature matrix".into()));
        }
        let mut cols = vec![Vec::with_capacity(n_rows); n_cols];
        for i in 0..n_rows {
            for (j, col) in cols.iter_mut().enumerate() {
                col.push(features[i * n_cols + j]);
            }
        }
        let sorted = cols
            .iter()
            .map(|col| {
                let mut idx: Vec<u32> = (0..n_rows as u32).collect();
                idx.sort_unstable_by(|&a, &b| {
                    col[a as usize]
                        .partial_cmp(&col[b as usize])
                        .expect("finite feature values")
                        .then(a.cmp(&b))
                });
                idx
            })
            .collect();
        Ok(Dataset { cols, sorted, n_rows })
    }

    pub fn n_cols(&self) -> usize {
        self.cols.len()
    }
}

/// Tree-growing controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub max_depth: usize,
    /// Minimum weighted row count in each child.
    pub min_samples_leaf: f64,
}

/// One node of a fitted tree, index-linked.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeNode {
    /// Split feature index, or `u32::MAX` for leaves.
    pub feature: u32,
    /// Split threshold (`x <= threshold` goes left).
    pub threshold: f64,
    /// Index of the left child (right child is `left + 1`); 0 for leaves.
    pub left: u32,
    /// Prediction value (mean of weighted targets) — meaningful for
    /// leaves, kept for internal nodes as the node mean.
    pub value: f64,
}

const LEAF: u32 = u32::MAX;

/// A fitted regression tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    pub nodes: Vec<TreeNode>,
}

impl RegressionTree {
    /// Predict one row-major feature row.
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut at = 0usize;
        loop {
            let node = &self.nodes[at];
            if node.feature == LEAF {
                return node.value;
            }
            at = if row[node.feature as usize] <= node.threshold {
                node.left as usize
            } else {
                node.left as usize + 1
            };
        }
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| n.feature == LEAF).count()
    }

    pub fn depth(&self) -> usize {
        // Depth by breadth-first replay.
        let mut depth = vec![0usize; self.nodes.len()];
        let mut max = 0;
        for (i, node) in self.nodes.iter().enumerate() {
            if node.feature != LEAF {
                let d = depth[i] + 1;
                depth[node.left as usize] = d;
                depth[node.left as usize + 1] = d;
                max = max.max(d);
            }
        }
        max
    }
}

/// Per-node split candidate accumulator.
#[derive(Clone, Copy)]
struct NodeStats {
    sum_w: f64,
    sum_wy: f64,
}

#[derive(Clone, Copy)]
struct BestSplit {
    gain: f64,
    feature: u32,
    threshold: f64,
}

/// Grower state shared across the levels of one tree.
pub struct TreeBuilder<'d> {
    data: &'d Dataset,
    params: TreeParams,
    /// Per-row integer weight (bootstrap count); 0 drops the row.
    weights: Vec<f64>,
    targets: Vec<f64>,
}

impl<'d> TreeBuilder<'d> {
    pub fn new(
        data: &'d Dataset,
        targets: &[f64],
        weights: Option<&[f64]>,
        params: TreeParams,
    ) -> Result<Self> {
        if targets.len() != data.n_rows {
            return Err(Error::Schema("target length mismatch".into()));
        }
        if targets.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("targets".into()));
        }
        let weights = match weights {
            Some(w) => {
                if w.len() != data.n_rows {
                    return Err(Error::Schema("weight length mismatch".into()));
                }
                if w.iter().any(|v| !v.is_finite() || *v < 0.0) {
                    return Err(Error::invalid("weights must be finite and >= 0"));
                }
                w.to_vec()
            }
            None => vec![1.0; data.n_rows],
        };
        if params.max_depth == 0 {
            return Err(Error::invalid("max_depth must be >= 1"));
        }
        Ok(TreeBuilder { data, params, weights, targets: targets.to_vec() })
    }

    /// Grow one tree. `feature_mask_for` is called once per created node
    /// (in breadth-first order) and returns the features allowed for that
    /// node's split — full-feature growth passes `|_| None`.
    pub fn grow<F>(&self, mut feature_mask_for: F) -> Result<RegressionTree>
    where
        F: FnMut(usize) -> Option<Vec<bool>>,
    {
        let n = self.data.n_rows;
        let p = self.data.n_cols();
        // Root aggregates.
        let mut root_w = 0.0;
        let mut root_wy = 0.0;
        for i in 0..n {
            root_w += self.weights[i];
            root_wy += self.weights[i] * self.targets[i];
        }
        if root_w <= 0.0 {
            return Err(Error::degenerate("no weighted rows"));
        }
        let mut nodes = vec![TreeNode {
            feature: LEAF,
            threshold: 0.0,
            left: 0,
            value: root_wy / root_w,
        }];
        let mut masks: Vec<Option<Vec<bool>>> = vec![feature_mask_for(0)];

        // row -> current node (u32::MAX marks zero-weight rows).
        let mut node_of_row = vec![0u32; n];
        for i in 0..n {
            if self.weights[i] == 0.0 {
                node_of_row[i] = u32::MAX;
            }
        }
        let mut level: Vec<u32> = vec![0];
        let mut level_stats: Vec<NodeStats> = vec![NodeStats { sum_w: root_w, sum_wy: root_wy }];

        for _depth in 0..self.params.max_depth {
            if level.is_empty() {
                break;
            }
            // node id -> position within this level.
            let mut slot_of_node = vec![usize::MAX; nodes.len()];
            for (slot, &id) in level.iter().enumerate() {
                slot_of_node[id as usize] = slot;
            }
            let n_slots = level.len();
            let mut best: Vec<Option<BestSplit>> = vec![None; n_slots];

            for j in 0..p {
                // Running left-side accumulators per level slot.
                let mut left = vec![NodeStats { sum_w: 0.0, sum_wy: 0.0 }; n_slots];
                // Last seen feature value per slot, to detect candidate
                // boundaries between distinct values.
                let mut prev_val = vec![f64::NAN; n_slots];
                let col = &self.data.cols[j];
                for &r in &self.data.sorted[j] {
                    let r = r as usize;
                    let node = node_of_row[r];
                    if node == u32::MAX {
                        continue;
                    }
                    let slot = slot_of_node[node as usize];
                    if slot == usize::MAX {
                        continue;
                    }
                    if let Some(mask) = &masks[node as usize] {
                        if !mask[j] {
                            continue;
                        }
                    }
                    let v = col[r];
                    let l = &mut left[slot];
                    // A boundary between two distinct values: evaluate the
                    // split putting all previously seen rows left.
                    if l.sum_w > 0.0 && v > prev_val[slot] {
                        let parent = level_stats[slot];
                        let wl = l.sum_w;
                        let wr = parent.sum_w - wl;
                        if wl >= self.params.min_samples_leaf
                            && wr >= self.params.min_samples_leaf
                        {
                            let sl = l.sum_wy;
                            let sr = parent.sum_wy - sl;
                            let gain = sl * sl / wl + sr * sr / wr
                                - parent.sum_wy * parent.sum_wy / parent.sum_w;
                            if gain > 0.0
                                && best[slot].as_ref().map_or(true, |b| gain > b.gain)
                            {
                                best[slot] = Some(BestSplit {
                                    gain,
                                    feature: j as u32,
                                    threshold: 0.5 * (prev_val[slot] + v),
                                });
                            }
                        }
                    }
                    let w = self.weights[r];
                    l.sum_w += w;
                    l.sum_wy += w * self.targets[r];
                    prev_val[slot] = v;
                }
            }

            // Materialize the chosen splits and route rows down.
            let mut next_level = Vec::new();
            let mut next_stats = Vec::new();
            let mut child_of_slot = vec![u32::MAX; n_slots];
            for (slot, &id) in level.iter().enumerate() {
                let Some(b) = best[slot] else { continue };
                let left_id = nodes.len() as u32;
                child_of_slot[slot] = left_id;
                let node = &mut nodes[id as usize];
                node.feature = b.feature;
                node.threshold = b.threshold;
                node.left = left_id;
                let parent_value = node.value;
                for _ in 0..2 {
                    nodes.push(TreeNode {
                        feature: LEAF,
                        threshold: 0.0,
                        left: 0,
                        value: parent_value,
                    });
                    masks.push(feature_mask_for(nodes.len() - 1));
                }
                next_level.push(left_id);
                next_level.push(left_id + 1);
                next_stats.push(NodeStats { sum_w: 0.0, sum_wy: 0.0 });
                next_stats.push(NodeStats { sum_w: 0.0, sum_wy: 0.0 });
            }
            if next_level.is_empty() {
                break;
            }
            // Route rows and rebuild child aggregates.
            let mut slot_of_next = vec![usize::MAX; nodes.len()];
            for (slot, &id) in next_level.iter().enumerate() {
                slot_of_next[id as usize] = slot;
            }
            for r in 0..n {
                let node = node_of_row[r];
                if node == u32::MAX {
                    continue;
                }
                let slot = slot_of_node[node as usize];
                if slot == usize::MAX || child_of_slot[slot] == u32::MAX {
                    continue;
                }
                let parent = &nodes[node as usize];
                let child = if self.data.cols[parent.feature as usize][r] <= parent.threshold {
                    child_of_slot[slot]
                } else {
                    child_of_slot[slot] + 1
                };
                node_of_row[r] = child;
                let st = &mut next_stats[slot_of_next[child as usize]];
                st.sum_w += self.weights[r];
                st.sum_wy += self.weights[r] * self.targets[r];
            }
            // Set child means.
            for (slot, &id) in next_level.iter().enumerate() {
                let st = next_stats[slot];
                if st.sum_w > 0.0 {
                    nodes[id as usize].value = st.sum_wy / st.sum_w;
                }
            }
            level = next_level;
            level_stats = next_stats;
        }
        Ok(RegressionTree { nodes })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fit_plain(
        features: &[f64],
        n: usize,
        p: usize,
        y: &[f64],
        params: TreeParams,
    ) -> RegressionTree {
        let data = Dataset::from_row_major(features, n, p).unwrap();
        let builder = TreeBuilder::new(&data, y, None, params).unwrap();
        builder.grow(|_| None).unwrap()
    }

    #[test]
    fn splits_a_step_function_exactly() {
        // y = 1 for x < 5, 9 for x >= 5.
        let xs: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let y: Vec<f64> = xs.iter().map(|x| if *x < 5.0 { 1.0 } else { 9.0 }).collect();
        let tree = fit_plain(&xs, 10, 1, &y, TreeParams { max_depth: 3, min_samples_leaf: 1.0 });
        assert_eq!(tree.predict_row(&[0.0]), 1.0);
        // The split lands midway between the adjacent training values 4
        // and 5; the boundary value itself routes left.
        assert_eq!(tree.predict_row(&[4.5]), 1.0);
        assert_eq!(tree.predict_row(&[4.6]), 9.0);
        assert_eq!(tree.predict_row(&[5.0]), 9.0);
        assert_eq!(tree.predict_row(&[100.0]), 9.0);
        // One split suffices: root + 2 leaves.
        assert_eq!(tree.nodes.len(), 3);
        assert_eq!(tree.nodes[0].threshold, 4.5);
    }

    #[test]
    fn deep_tree_interpolates_distinct_rows() {
        // Interpolation property: with unlimited depth and min leaf 1,
        // a tree on distinct rows reaches zero training error.
        let n = 64;
        let features: Vec<f64> = (0..n).map(|i| (i as f64) * 1.37 % 29.0).collect();
        let y: Vec<f64> = (0..n).map(|i| ((i * 7) % 13) as f64).collect();
        let tree = fit_plain(
            &features,
            n,
            1,
            &y,
            TreeParams { max_depth: 30, min_samples_leaf: 1.0 },
        );
        for i in 0..n {
            assert_eq!(tree.predict_row(&features[i..=i]), y[i], "row {i}");
        }
    }

    #[test]
    fn respects_min_leaf_and_depth() {
        let n = 100;
        let features: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let y: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let tree = fit_plain(
            &features,
            n,
            1,
            &y,
            TreeParams { max_depth: 3, min_samples_leaf: 10.0 },
        );
        assert!(tree.depth() <= 3);
        assert!(tree.n_leaves() <= 8);
        // Count rows reaching each leaf; every leaf must hold >= 10.
        let mut counts = std::collections::HashMap::new();
        for i in 0..n {
            let mut at = 0usize;
            loop {
                let node = &tree.nodes[at];
                if node.feature == LEAF {
                    *counts.entry(at).or_insert(0usize) += 1;
                    break;
                }
                at = if features[i] <= node.threshold {
                    node.left as usize
                } else {
                    node.left as usize + 1
                };
            }
        }
        assert!(counts.values().all(|c| *c >= 10), "{counts:?}");
    }

    #[test]
    fn predictions_stay_within_target_range() {
        let n = 200;
        let features: Vec<f64> = (0..n * 3).map(|i| ((i * 31) % 97) as f64).collect();
        let y: Vec<f64> = (0..n).map(|i| ((i * 13) % 41) as f64 - 7.0).collect();
        let tree = fit_plain(
            &features,
            n,
            3,
            &y,
            TreeParams { max_depth: 8, min_samples_leaf: 2.0 },
        );
        let (lo, hi) = (-7.0, 33.0);
        for i in 0..n {
            let p = tree.predict_row(&features[i * 3..(i + 1) * 3]);
            assert!(p >= lo && p <= hi);
        }
    }

    #[test]
    fn zero_weight_rows_are_ignored() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let mut y: Vec<f64> = xs.iter().map(|x| if *x < 5.0 { 1.0 } else { 9.0 }).collect();
        // Poison two rows, then zero their weight: the fit must match the
        // clean fixture.
        y[2] = 1000.0;
        y[7] = -1000.0;
        let mut w = vec![1.0; 10];
        w[2] = 0.0;
        w[7] = 0.0;
        let data = Dataset::from_row_major(&xs, 10, 1).unwrap();
        let tree = TreeBuilder::new(
            &data,
            &y,
            Some(&w),
            TreeParams { max_depth: 3, min_samples_leaf: 1.0 },
        )
        .unwrap()
        .grow(|_| None)
        .unwrap();
        assert_eq!(tree.predict_row(&[1.0]), 1.0);
        assert_eq!(tree.predict_row(&[8.0]), 9.0);
    }

    #[test]
    fn integer_weights_match_row_duplication() {
        // A row with weight k behaves exactly like k duplicated rows.
        let xs = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let y = [2.0, 4.0, 6.0, 5.0, 9.0, 11.0];
        let w = [2.0, 1.0, 3.0, 1.0, 2.0, 1.0];
        let params = TreeParams { max_depth: 4, min_samples_leaf: 1.0 };
        let data = Dataset::from_row_major(&xs, 6, 1).unwrap();
        let weighted = TreeBuilder::new(&data, &y, Some(&w), params)
            .unwrap()
            .grow(|_| None)
            .unwrap();
        let mut dup_x = Vec::new();
        let mut dup_y = Vec::new();
        for i in 0..6 {
            for _ in 0..w[i] as usize {
                dup_x.push(xs[i]);
                dup_y.push(y[i]);
            }
        }
        let dup_data = Dataset::from_row_major(&dup_x, dup_x.len(), 1).unwrap();
        let duplicated = TreeBuilder::new(&dup_data, &dup_y, None, params)
            .unwrap()
            .grow(|_| None)
            .unwrap();
        for x in [0.5, 1.5, 2.5, 3.5, 4.5, 5.5, 6.5] {
            assert_eq!(
                weighted.predict_row(&[x]),
                duplicated.predict_row(&[x]),
                "at x={x}"
            );
        }
    }

    #[test]
    fn feature_mask_restricts_split_choice() {
        // Feature 0 perfectly predicts y; feature 1 is noise. Masking
        // feature 0 at the root forces a split on feature 1.
        let n = 40;
        let mut features = Vec::with_capacity(n * 2);
        let mut y = Vec::with_capacity(n);
        for i in 0..n {
            let a = i as f64;
            let b = ((i * 17) % 23) as f64;
            features.push(a);
            features.push(b);
            y.push(if a < 20.0 { 0.0 } else { 10.0 });
        }
        let data = Dataset::from_row_major(&features, n, 2).unwrap();
        let params = TreeParams { max_depth: 1, min_samples_leaf: 1.0 };
        let free = TreeBuilder::new(&data, &y, None, params)
            .unwrap()
            .grow(|_| None)
            .unwrap();
        assert_eq!(free.nodes[0].feature, 0);
        let masked = TreeBuilder::new(&data, &y, None, params)
            .unwrap()
            .grow(|_| Some(vec![false, true]))
            .unwrap();
        assert!(masked.nodes.len() == 1 || masked.nodes[0].feature == 1);
    }

    #[test]
    fn constant_target_gives_single_leaf() {
        let xs: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let y = vec![3.5; 20];
        let tree = fit_plain(&xs, 20, 1, &y, TreeParams { max_depth: 5, min_samples_leaf: 1.0 });
        assert_eq!(tree.nodes.len(), 1);
        assert_eq!(tree.predict_row(&[7.0]), 3.5);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Dataset::from_row_major(&[1.0, f64::NAN], 2, 1).is_err());
        assert!(Dataset::from_row_major(&[], 0, 1).is_err());
        let data = Dataset::from_row_major(&[1.0, 2.0], 2, 1).unwrap();
        assert!(TreeBuilder::new(
            &data,
            &[1.0],
            None,
            TreeParams { max_depth: 2, min_samples_leaf: 1.0 }
        )
        .is_err());
    }
}
