//! The five throughput predictors behind a uniform fit/predict/save
//! contract: map baseline, linear regression, random forest, gradient
//! boosting, and a dense neural network.

pub mod forest;
pub mod gbm;
pub mod linear;
pub mod mlp;
pub mod rem_baseline;
pub mod tree;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::LearningTable;

/// Persistence format version; bumped on any breaking layout change.
pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Which predictor to train.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    RemBaseline,
    Linear,
    RandomForest,
    GradientBoosting,
    Mlp,
}

impl ModelKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ModelKind::RemBaseline => "rem_baseline",
            ModelKind::Linear => "linear",
            ModelKind::RandomForest => "random_forest",
            ModelKind::GradientBoosting => "gradient_boosting",
            ModelKind::Mlp => "mlp",
        }
    }

    pub const ALL: [ModelKind; 5] = [
        ModelKind::RemBaseline,
        ModelKind::Linear,
        ModelKind::RandomForest,
        ModelKind::GradientBoosting,
        ModelKind::Mlp,
    ];
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .iter()
            .find(|k| k.as_str() == s)
            .copied()
            .ok_or_else(|| Error::invalid(format!("unknown model kind `{s}`")))
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Model hyperparameters with the workbench defaults baked in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub seed: u64,
    pub forest: forest::ForestParams,
    pub gbm: gbm::GbmParams,
    pub mlp: mlp::MlpParams,
    /// Grid resolution of the map baseline.
    pub rem_resolution_deg: f64,
}

impl Default for ModelSpec {
    fn default() -> Self {
        ModelSpec {
            kind: ModelKind::GradientBoosting,
            seed: 0,
            forest: forest::ForestParams::default(),
            gbm: gbm::GbmParams::default(),
            mlp: mlp::MlpParams::default(),
            rem_resolution_deg: crate::features::DEFAULT_REM_RESOLUTION_DEG,
        }
    }
}

impl ModelSpec {
    pub fn new(kind: ModelKind, seed: u64) -> Self {
        ModelSpec { kind, seed, ..ModelSpec::default() }
    }
}

/// A trained predictor with its training schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FittedModel {
    RemBaseline(rem_baseline::RemBaselineModel),
    Linear(linear::LinearModel),
    RandomForest(forest::ForestModel),
    GradientBoosting(gbm::GbmModel),
    Mlp(mlp::MlpModel),
}

/// Self-describing persisted form.
#[derive(Debug, Serialize, Deserialize)]
struct ModelDocument {
    version: u32,
    model: FittedModel,
}

impl FittedModel {
    pub fn kind(&self) -> ModelKind {
        match self {
            FittedModel::RemBaseline(_) => ModelKind::RemBaseline,
            FittedModel::Linear(_) => ModelKind::Linear,
            FittedModel::RandomForest(_) => ModelKind::RandomForest,
            FittedModel::GradientBoosting(_) => ModelKind::GradientBoosting,
            FittedModel::Mlp(_) => ModelKind::Mlp,
        }
    }

    /// Feature columns the model was trained on.
    pub fn schema(&self) -> &[String] {
        match self {
            FittedModel::RemBaseline(m) => &m.schema,
            FittedModel::Linear(m) => &m.schema,
            FittedModel::RandomForest(m) => &m.schema,
            FittedModel::GradientBoosting(m) => &m.schema,
            FittedModel::Mlp(m) => &m.schema,
        }
    }

    /// Serialize to a versioned JSON document.
    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        let doc = ModelDocument { version: MODEL_FORMAT_VERSION, model: self.clone() };
        let json = serde_json::to_string(&doc)?;
        std::fs::write(path, json)?;
        Ok(())
    }

    /// Load a versioned JSON document.
    pub fn load(path: &std::path::Path) -> Result<FittedModel> {
        let text = std::fs::read_to_string(path)?;
        let doc: ModelDocument = serde_json::from_str(&text)?;
        if doc.version != MODEL_FORMAT_VERSION {
            return Err(Error::Schema(format!(
                "unsupported model format version {} (expected {})",
                doc.version, MODEL_FORMAT_VERSION
            )));
        }
        Ok(doc.model)
    }
}

/// Train a model on a learning table.
pub fn fit(spec: &ModelSpec, train: &LearningTable) -> Result<FittedModel> {
    if train.is_empty() {
        return Err(Error::invalid("cannot fit on an empty table"));
    }
    if train.n_cols() == 0 {
        return Err(Error::invalid("cannot fit with zero feature columns"));
    }
    if train.features.iter().any(|v| !v.is_finite())
        || train.target.iter().any(|v| !v.is_finite())
    {
        return Err(Error::NonFinite("training table".into()));
    }
    Ok(match spec.kind {
        ModelKind::RemBaseline => {
            FittedModel::RemBaseline(rem_baseline::fit(train, spec.rem_resolution_deg)?)
        }
        ModelKind::Linear => FittedModel::Linear(linear::fit(train)?),
        ModelKind::RandomForest => {
            FittedModel::RandomForest(forest::fit(train, &spec.forest, spec.seed)?)
        }
        ModelKind::GradientBoosting => {
            FittedModel::GradientBoosting(gbm::fit(train, &spec.gbm, spec.seed)?)
        }
        ModelKind::Mlp => FittedModel::Mlp(mlp::fit(train, &spec.mlp, spec.seed)?),
    })
}

/// Predict every row of a table. The table's columns must match the
/// model's training schema exactly (names and order).
pub fn predict(model: &FittedModel, table: &LearningTable) -> Result<Vec<f64>> {
    if table.columns != model.schema() {
        let missing = model
            .schema()
            .iter()
            .find(|c| !table.columns.contains(c))
            .cloned()
            .unwrap_or_else(|| "column order".to_string());
        return Err(Error::Column(missing));
    }
    if table.features.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("prediction table".into()));
    }
    match model {
        FittedModel::RemBaseline(m) => rem_baseline::predict(m, table),
        FittedModel::Linear(m) => Ok(linear::predict(m, table)),
        FittedModel::RandomForest(m) => Ok(forest::predict(m, table)),
        FittedModel::GradientBoosting(m) => Ok(gbm::predict(m, table)),
        FittedModel::Mlp(m) => Ok(mlp::predict(m, table)),
    }
}
