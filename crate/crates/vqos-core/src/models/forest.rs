//! Random forest regression: CART trees on bootstrap resamples with
//! per-node feature subsampling, averaged.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::features::LearningTable;
use crate::models::tree::{Dataset, RegressionTree, TreeBuilder, TreeParams};
use crate::rng::rng_for;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    /// Features tried per split; 0 = ceil(p / 3).
    pub max_features: usize,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams { n_trees: 793, max_depth: 19, min_samples_leaf: 2, max_features: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub schema: Vec<String>,
    pub trees: Vec<RegressionTree>,
    /// Range of training targets (diagnostic; predictions stay inside).
    pub target_range: [f64; 2],
}

pub fn fit(train: &LearningTable, params: &ForestParams, seed: u64) -> Result<ForestModel> {
    let n = train.n_rows();
    let p = train.n_cols();
    let data = Dataset::from_row_major(&train.features, n, p)?;
    let mtry = if params.max_features == 0 {
        p.div_ceil(3)
    } else {
        params.max_features.min(p)
    };
    let tree_params = TreeParams {
        max_depth: params.max_depth,
        min_samples_leaf: params.min_samples_leaf as f64,
    };
    let trees: Vec<RegressionTree> = (0..params.n_trees)
        .into_par_iter()
        .map(|t| {
            // Bootstrap as integer row weights.
            let mut rng = rng_for(seed, t as u64);
            let mut weights = vec![0.0f64; n];
            for _ in 0..n {
                weights[rng.random_range(0..n)] += 1.0;
            }
            let builder = TreeBuilder::new(&data, &train.target, Some(&weights), tree_params)?;
            builder.grow(|_| {
                if mtry >= p {
                    return None;
                }
                // Per-node feature subset.
                let mut mask = vec![false; p];
                let mut chosen = 0;
                while chosen < mtry {
                    let j = rng.random_range(0..p);
                    if !mask[j] {
                        mask[j] = true;
                        chosen += 1;
                    }
                }
                Some(mask)
            })
        })
        .collect::<Result<_>>()?;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &y in &train.target {
        lo = lo.min(y);
        hi = hi.max(y);
    }
    Ok(ForestModel { schema: train.columns.clone(), trees, target_range: [lo, hi] })
}

pub fn predict(model: &ForestModel, table: &LearningTable) -> Vec<f64> {
    let k = model.trees.len() as f64;
    (0..table.n_rows())
        .into_par_iter()
        .map(|i| {
            let row = table.row(i);
            model.trees.iter().map(|t| t.predict_row(row)).sum::<f64>() / k
        })
        .collect()
}
