//! Ordinary least squares with intercept.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::features::LearningTable;
use crate::linalg::ols;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub schema: Vec<String>,
    pub intercept: f64,
    /// One coefficient per schema column.
    pub coefficients: Vec<f64>,
}

pub fn fit(train: &LearningTable) -> Result<LinearModel> {
    let n = train.n_rows();
    let p = train.n_cols();
    // Design = [1 | X].
    let mut design = Vec::with_capacity(n * (p + 1));
    for i in 0..n {
        design.push(1.0);
        design.extend_from_slice(train.row(i));
    }
    let fit = ols(&design, n, p + 1, &train.target)?;
    Ok(LinearModel {
        schema: train.columns.clone(),
        intercept: fit.coef[0],
        coefficients: fit.coef[1..].to_vec(),
    })
}

pub fn predict(model: &LinearModel, table: &LearningTable) -> Vec<f64> {
    (0..table.n_rows())
        .map(|i| {
            model.intercept
                + table
                    .row(i)
                    .iter()
                    .zip(&model.coefficients)
                    .map(|(x, c)| x * c)
                    .sum::<f64>()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::test_support::table_from_fn;

    #[test]
    fn recovers_planted_coefficients_exactly() {
        // y = 2 x1 - 3 x2 + 1, noiseless.
        let train = table_from_fn(
            100,
            &["x1", "x2"],
            |i, j| (((i * 13 + j * 7) % 23) as f64) - 11.0,
            |_, r| 2.0 * r[0] - 3.0 * r[1] + 1.0,
        );
        let m = fit(&train).unwrap();
        assert!((m.coefficients[0] - 2.0).abs() < 1e-8);
        assert!((m.coefficients[1] - -3.0).abs() < 1e-8);
        assert!((m.intercept - 1.0).abs() < 1e-8);
        let preds = predict(&m, &train);
        for (p, y) in preds.iter().zip(&train.target) {
            assert!((p - y).abs() < 1e-8);
        }
    }

    #[test]
    fn row_order_does_not_matter() {
        let a = table_from_fn(
            60,
            &["x1", "x2"],
            |i, j| ((i * 5 + j) % 17) as f64,
            |i, r| r[0] + 0.5 * r[1] + ((i % 3) as f64),
        );
        let mut b = a.clone();
        // Reverse rows.
        let p = b.n_cols();
        let n = b.n_rows();
        let mut features = Vec::with_capacity(n * p);
        for i in (0..n).rev() {
            features.extend_from_slice(a.row(i));
        }
        b.features = features;
        b.target = a.target.iter().rev().copied().collect();
        let ma = fit(&a).unwrap();
        let mb = fit(&b).unwrap();
        for (x, y) in ma.coefficients.iter().zip(&mb.coefficients) {
            assert!((x - y).abs() < 1e-9);
        }
        assert!((ma.intercept - mb.intercept).abs() < 1e-9);
    }
}
