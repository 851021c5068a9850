//! Location-table baseline: predicts the mean training target observed
//! in the sample's grid cell, falling back to the global training mean
//! for unvisited cells.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::LearningTable;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemBaselineModel {
    pub schema: Vec<String>,
    pub resolution_deg: f64,
    /// Cell key -> mean training target in that cell.
    #[serde(
        serialize_with = "ser_cells",
        deserialize_with = "de_cells"
    )]
    pub cells: BTreeMap<(i64, i64), f64>,
    pub global_mean: f64,
    pub n_train: usize,
}

fn ser_cells<S: serde::Serializer>(
    cells: &BTreeMap<(i64, i64), f64>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    let v: Vec<((i64, i64), f64)> = cells.iter().map(|(k, st)| (*k, *st)).collect();
    serde::Serialize::serialize(&v, s)
}

fn de_cells<'de, D: serde::Deserializer<'de>>(
    d: D,
) -> std::result::Result<BTreeMap<(i64, i64), f64>, D::Error> {
    let v: Vec<((i64, i64), f64)> = serde::Deserialize::deserialize(d)?;
    Ok(v.into_iter().collect())
}

fn cell_key(pos: [f64; 2], resolution_deg: f64) -> (i64, i64) {
    (
        (pos[0] / resolution_deg).floor() as i64,
        (pos[1] / resolution_deg).floor() as i64,
    )
}

pub fn fit(train: &LearningTable, resolution_deg: f64) -> Result<RemBaselineModel> {
    if !(resolution_deg.is_finite() && resolution_deg > 0.0) {
        return Err(Error::invalid("grid resolution must be positive"));
    }
    let mut sums: BTreeMap<(i64, i64), (f64, usize)> = BTreeMap::new();
    let mut global = 0.0;
    for (pos, y) in train.positions.iter().zip(&train.target) {
        let e = sums.entry(cell_key(*pos, resolution_deg)).or_insert((0.0, 0));
        e.0 += y;
        e.1 += 1;
        global += y;
    }
    Ok(RemBaselineModel {
        schema: train.columns.clone(),
        resolution_deg,
        cells: sums
            .into_iter()
            .map(|(k, (sum, cnt))| (k, sum / cnt as f64))
            .collect(),
        global_mean: global / train.n_rows() as f64,
        n_train: train.n_rows(),
    })
}

pub fn predict(model: &RemBaselineModel, table: &LearningTable) -> Result<Vec<f64>> {
    if table.positions.len() != table.n_rows() {
        return Err(Error::invalid("table has no position column to look up"));
    }
    Ok(table
        .positions
        .iter()
        .map(|pos| {
            model
                .cells
                .get(&cell_key(*pos, model.resolution_deg))
                .copied()
                .unwrap_or(model.global_mean)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::SampleKey;

    fn table(positions: Vec<[f64; 2]>, target: Vec<f64>) -> LearningTable {
        let n = positions.len();
        LearningTable {
            columns: vec!["rsrp".into()],
            features: vec![0.0; n],
            target,
            keys: (0..n)
                .map(|i| SampleKey { run_id: "r0".into(), t_ms: i as u64 * 1000 })
                .collect(),
            positions,
        }
    }

    #[test]
    fn predicts_cell_mean_when_cell_is_known() {
        // Two samples in one cell (mean 12), one elsewhere.
        let train = table(
            vec![[51.2001, 7.5001], [51.2002, 7.5003], [51.3005, 7.6005]],
            vec![10.0, 14.0, 30.0],
        );
        let m = fit(&train, 0.001).unwrap();
        let query = table(vec![[51.2004, 7.5007]], vec![0.0]);
        let preds = predict(&m, &query).unwrap();
        assert_eq!(preds, vec![12.0]);
    }

    #[test]
    fn falls_back_to_global_mean_for_unvisited_cells() {
        let train = table(vec![[51.2, 7.5], [51.3, 7.6]], vec![10.0, 30.0]);
        let m = fit(&train, 0.001).unwrap();
        let query = table(vec![[48.0, 11.0]], vec![0.0]);
        let preds = predict(&m, &query).unwrap();
        assert_eq!(preds, vec![20.0]);
    }

    #[test]
    fn resolution_controls_cell_sharing() {
        // 0.004 degrees apart: separate at 0.001 resolution, shared at 0.01.
        let train = table(vec![[51.2001, 7.5], [51.2049, 7.5]], vec![0.0, 8.0]);
        let fine = fit(&train, 0.001).unwrap();
        let coarse = fit(&train, 0.01).unwrap();
        let q = table(vec![[51.2001, 7.5]], vec![0.0]);
        assert_eq!(predict(&fine, &q).unwrap(), vec![0.0]);
        assert_eq!(predict(&coarse, &q).unwrap(), vec![4.0]);
    }

    #[test]
    fn rejects_nonpositive_resolution() {
        let train = table(vec![[51.2, 7.5]], vec![1.0]);
        assert!(fit(&train, 0.0).is_err());
        assert!(fit(&train, -0.1).is_err());
    }

    #[test]
    fn serde_round_trip() {
        let train = table(vec![[51.2, 7.5], [51.3, 7.6]], vec![10.0, 30.0]);
        let m = fit(&train, 0.001).unwrap();
        let json = serde_json::to_string(&m).unwrap();
        let back: RemBaselineModel = serde_json::from_str(&json).unwrap();
        assert_eq!(m, back);
    }
}
