//! Gradient-boosted regression trees: squared-error boosting with
//! shrinkage, least-squares leaf values, sequential over a shared
//! presorted dataset.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::features::LearningTable;
use crate::models::tree::{Dataset, RegressionTree, TreeBuilder, TreeParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GbmParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    pub shrinkage: f64,
}

impl Default for GbmParams {
    fn default() -> Self {
        GbmParams { n_trees: 715, max_depth: 10, min_samples_leaf: 2, shrinkage: 0.05 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbmModel {
    pub schema: Vec<String>,
    /// Constant initial prediction (training target mean).
    pub init: f64,
    pub shrinkage: f64,
    pub trees: Vec<RegressionTree>,
    /// Training MAE of the staged ensemble after each boosting stage.
    pub staged_train_mae: Vec<f64>,
    pub target_range: [f64; 2],
}

pub fn fit(train: &LearningTable, params: &GbmParams, _seed: u64) -> Result<GbmModel> {
    let n = train.n_rows();
    let p = train.n_cols();
    let data = Dataset::from_row_major(&train.features, n, p)?;
    let tree_params = TreeParams {
        max_depth: params.max_depth,
        min_samples_leaf: params.min_samples_leaf as f64,
    };
    let init = train.target.iter().sum::<f64>() / n as f64;
    let mut predictions = vec![init; n];
    let mut residuals = vec![0.0; n];
    let mut trees = Vec::with_capacity(params.n_trees);
    let mut staged_train_mae = Vec::with_capacity(params.n_trees);
    for _stage in 0..params.n_trees {
        for i in 0..n {
            residuals[i] = train.target[i] - predictions[i];
        }
        let tree = TreeBuilder::new(&data, &residuals, None, tree_params)?.grow(|_| None)?;
        for i in 0..n {
            predictions[i] += params.shrinkage * tree.predict_row(train.row(i));
        }
        staged_train_mae.push(
            predictions
                .iter()
                .zip(&train.target)
                .map(|(p, y)| (p - y).abs())
                .sum::<f64>()
                / n as f64,
        );
        trees.push(tree);
    }
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &y in &train.target {
        lo = lo.min(y);
        hi = hi.max(y);
    }
    Ok(GbmModel {
        schema: train.columns.clone(),
        init,
        shrinkage: params.shrinkage,
        trees,
        staged_train_mae,
        target_range: [lo, hi],
    })
}

pub fn predict(model: &GbmModel, table: &LearningTable) -> Vec<f64> {
    use rayon::prelude::*;
    (0..table.n_rows())
        .into_par_iter()
        .map(|i| {
            let row = table.row(i);
            model.init
                + model.shrinkage
                    * model.trees.iter().map(|t| t.predict_row(row)).sum::<f64>()
        })
        .collect()
}
