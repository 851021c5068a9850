//! Regression metrics and the experiment grid driver that sweeps
//! models × scenarios × splits × sampling periods × horizons × regimes.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{
    assemble, AccessScenario, AssembleOptions,
};
use crate::models::{fit, predict, ModelKind, ModelSpec};
use crate::resample::downsample_run;
use crate::split::{split, RunLabels, SplitAssignment, SplitLabel, SplitStrategy};
use crate::trace::{CellSite, Direction, Env, MeasurementRun};

/// Targets with |y| at or below this are excluded from MAPE.
pub const MAPE_EPSILON: f64 = 1e-6;

/// The five standard regression metrics plus the sample count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    /// Mean absolute error (target units).
    pub mae: f64,
    /// Mean absolute percentage error as a fraction, over samples with
    /// |y| above the epsilon guard; `None` if no sample qualifies.
    pub mape: Option<f64>,
    /// Median absolute error (target units).
    pub medae: f64,
    /// Root mean squared error (target units).
    pub rmse: f64,
    /// Coefficient of determination, 1 − SSres/SStot.
    pub r2: f64,
    /// Number of evaluated samples.
    pub n: usize,
}

/// Compute all metrics for one prediction vector.
pub fn metrics(y_true: &[f64], y_pred: &[f64]) -> Result<MetricReport> {
    if y_true.len() != y_pred.len() {
        return Err(Error::Schema(format!(
            "length mismatch: {} targets vs {} predictions",
            y_true.len(),
            y_pred.len()
        )));
    }
    if y_true.is_empty() {
        return Err(Error::invalid("metrics need at least one sample"));
    }
    if y_true.iter().chain(y_pred).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("metrics input".into()));
    }
    let n = y_true.len();
    let first = y_true[0];
    if y_true.iter().all(|y| *y == first) {
        return Err(Error::degenerate(
            "R² is undefined for constant targets (zero total variance)",
        ));
    }

    let mut abs_errors: Vec<f64> = Vec::with_capacity(n);
    let mut sse = 0.0;
    let mut mape_sum = 0.0;
    let mut mape_n = 0usize;
    for (y, p) in y_true.iter().zip(y_pred) {
        let e = y - p;
        abs_errors.push(e.abs());
        sse += e * e;
        if y.abs() > MAPE_EPSILON {
            mape_sum += e.abs() / y.abs();
            mape_n += 1;
        }
    }
    let mae = abs_errors.iter().sum::<f64>() / n as f64;
    let rmse = (sse / n as f64).sqrt();
    let mean = y_true.iter().sum::<f64>() / n as f64;
    let sst: f64 = y_true.iter().map(|y| (y - mean) * (y - mean)).sum();
    let r2 = 1.0 - sse / sst;

    abs_errors.sort_by(|a, b| a.partial_cmp(b).expect("finite errors"));
    let medae = if n % 2 == 1 {
        abs_errors[n / 2]
    } else {
        0.5 * (abs_errors[n / 2 - 1] + abs_errors[n / 2])
    };
    let mape = if mape_n > 0 { Some(mape_sum / mape_n as f64) } else { None };
    Ok(MetricReport { mae, mape, medae, rmse, r2, n })
}

/// Train/test regime pairing for one grid cell. `None` pools every
/// regime; two equal entries restrict both sides to one regime (split
/// within it); two different entries train on one regime's stretches and
/// test on the other's.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegimePair {
    pub train_env: Option<Env>,
    pub test_env: Option<Env>,
}

impl RegimePair {
    pub const POOLED: RegimePair = RegimePair { train_env: None, test_env: None };

    pub fn within(env: Env) -> Self {
        RegimePair { train_env: Some(env), test_env: Some(env) }
    }

    pub fn cross(train_env: Env, test_env: Env) -> Self {
        RegimePair { train_env: Some(train_env), test_env: Some(test_env) }
    }

    pub fn is_cross(&self) -> bool {
        self.train_env != self.test_env
    }

    fn validate(&self) -> Result<()> {
        match (self.train_env, self.test_env) {
            (None, Some(_)) | (Some(_), None) => Err(Error::invalid(
                "regime pair must set both sides or neither (pooled)",
            )),
            _ => Ok(()),
        }
    }
}

fn env_label(env: Option<Env>) -> &'static str {
    env.map_or("all", Env::as_str)
}

/// Axes and shared knobs of one experiment grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridSpec {
    pub models: Vec<ModelKind>,
    pub scenarios: Vec<AccessScenario>,
    pub splits: Vec<SplitStrategy>,
    /// Sampling periods in seconds; runs are block-downsampled to each.
    pub periods_s: Vec<f64>,
    /// Prediction horizons in seconds (0 = instantaneous target).
    pub horizons_s: Vec<f64>,
    pub regimes: Vec<RegimePair>,
    pub directions: Vec<Direction>,
    /// Overrides each split strategy's default train fraction.
    pub train_fraction: Option<f64>,
    /// Optional cap on training rows (seeded subsample, time order kept).
    pub max_train_rows: Option<usize>,
    /// Hyperparameters shared by every cell (`kind`/`seed` ignored; the
    /// model axis and per-cell seeds override them).
    pub model_params: ModelSpec,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            models: vec![ModelKind::GradientBoosting],
            scenarios: vec![AccessScenario::Full],
            splits: vec![SplitStrategy::Folds],
            periods_s: vec![1.0],
            horizons_s: vec![0.0],
            regimes: vec![RegimePair::POOLED],
            directions: vec![Direction::Dl],
            train_fraction: None,
            max_train_rows: None,
            model_params: ModelSpec::default(),
        }
    }
}

impl GridSpec {
    fn validate(&self) -> Result<()> {
        if self.models.is_empty()
            || self.scenarios.is_empty()
            || self.splits.is_empty()
            || self.periods_s.is_empty()
            || self.horizons_s.is_empty()
            || self.regimes.is_empty()
            || self.directions.is_empty()
        {
            return Err(Error::invalid("every grid axis needs at least one value"));
        }
        if self.periods_s.iter().any(|p| !(p.is_finite() && *p > 0.0)) {
            return Err(Error::invalid("sampling periods must be positive"));
        }
        if self.horizons_s.iter().any(|h| !(h.is_finite() && *h >= 0.0)) {
            return Err(Error::invalid("horizons must be finite and >= 0"));
        }
        if let Some(f) = self.train_fraction {
            if !(f > 0.0 && f < 1.0) {
                return Err(Error::invalid("train_fraction must be in (0, 1)"));
            }
        }
        for pair in &self.regimes {
            pair.validate()?;
        }
        Ok(())
    }

    /// Number of cells the grid will evaluate.
    pub fn n_cells(&self) -> usize {
        self.models.len()
            * self.scenarios.len()
            * self.splits.len()
            * self.periods_s.len()
            * self.horizons_s.len()
            * self.regimes.len()
            * self.directions.len()
    }
}

/// Coordinates of one grid cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellKey {
    pub model: ModelKind,
    pub scenario: AccessScenario,
    pub split: SplitStrategy,
    pub period_s: f64,
    pub horizon_s: f64,
    pub train_env: Option<Env>,
    pub test_env: Option<Env>,
    pub direction: Direction,
}

impl CellKey {
    /// Canonical text form, also used to derive the cell seed.
    pub fn label(&self) -> String {
        format!(
            "{}|{}|{}|{}|{}|{}|{}|{}",
            self.model,
            self.scenario.as_str(),
            self.split,
            self.period_s,
            self.horizon_s,
            env_label(self.train_env),
            env_label(self.test_env),
            self.direction.as_str()
        )
    }

    /// Deterministic per-cell seed: FNV-1a over the master seed and the
    /// cell label, so partial re-runs reproduce exactly.
    pub fn cell_seed(&self, master_seed: u64) -> u64 {
        fnv1a64(format!("{master_seed}|{}", self.label()).as_bytes())
    }

    /// Seed of the train/test partition (and of train-row subsampling).
    /// Deliberately excludes model and scenario, so cells differing only in
    /// those compare on the exact same split — otherwise partition luck
    /// would confound every model/scenario comparison.
    pub fn partition_seed(&self, master_seed: u64) -> u64 {
        fnv1a64(
            format!(
                "{master_seed}|partition|{}|{}|{}|{}|{}|{}",
                self.split,
                self.period_s,
                self.horizon_s,
                env_label(self.train_env),
                env_label(self.test_env),
                self.direction.as_str()
            )
            .as_bytes(),
        )
    }
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Successful cell evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub report: MetricReport,
    pub n_train: usize,
    pub n_test: usize,
}

/// One evaluated (or failed) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub key: CellKey,
    pub seed: u64,
    pub result: Option<CellResult>,
    pub failure: Option<String>,
}

/// Full grid output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentGrid {
    pub master_seed: u64,
    pub cells: Vec<GridCell>,
}

impl ExperimentGrid {
    /// The result at given coordinates, if that cell succeeded.
    pub fn cell(&self, key: &CellKey) -> Option<&CellResult> {
        self.cells.iter().find(|c| &c.key == key).and_then(|c| c.result.as_ref())
    }

    pub fn n_failed(&self) -> usize {
        self.cells.iter().filter(|c| c.failure.is_some()).count()
    }
}

/// Evaluate every cell of the grid. Cell failures are recorded in the
/// output and do not abort the sweep.
pub fn run_grid(
    runs: &[MeasurementRun],
    sites: &[CellSite],
    spec: &GridSpec,
    seed: u64,
) -> Result<ExperimentGrid> {
    spec.validate()?;
    if runs.is_empty() {
        return Err(Error::invalid("experiment grid needs at least one run"));
    }
    let mut keys = Vec::with_capacity(spec.n_cells());
    for model in &spec.models {
        for scenario in &spec.scenarios {
            for split in &spec.splits {
                for period_s in &spec.periods_s {
                    for horizon_s in &spec.horizons_s {
                        for pair in &spec.regimes {
                            for direction in &spec.directions {
                                keys.push(CellKey {
                                    model: *model,
                                    scenario: *scenario,
                                    split: *split,
                                    period_s: *period_s,
                                    horizon_s: *horizon_s,
                                    train_env: pair.train_env,
                                    test_env: pair.test_env,
                                    direction: *direction,
                                });
                            }
                        }
                    }
                }
            }
        }
    }
    let cells = keys
        .into_par_iter()
        .map(|key| {
            let cell_seed = key.cell_seed(seed);
            let partition_seed = key.partition_seed(seed);
            match evaluate_cell(runs, sites, spec, &key, cell_seed, partition_seed) {
                Ok(result) => {
                    GridCell { key, seed: cell_seed, result: Some(result), failure: None }
                }
                Err(e) => {
                    GridCell { key, seed: cell_seed, result: None, failure: Some(e.to_string()) }
                }
            }
        })
        .collect();
    Ok(ExperimentGrid { master_seed: seed, cells })
}

enum CellPool {
    /// One pool split by the cell's strategy.
    Single(Vec<MeasurementRun>),
    /// Disjoint pools: all of `train` trains, all of `test` tests.
    Cross { train: Vec<MeasurementRun>, test: Vec<MeasurementRun> },
}

fn segments_with_env(runs: &[&MeasurementRun], env: Env) -> Vec<MeasurementRun> {
    runs.iter()
        .flat_map(|r| r.env_segments())
        .filter(|seg| seg.samples.first().is_some_and(|s| s.env == env))
        .collect()
}

fn resample_pool(pool: Vec<MeasurementRun>, period_s: f64) -> Result<Vec<MeasurementRun>> {
    pool.into_iter()
        .map(|run| {
            let ratio = period_s / run.sample_period_s;
            let m = ratio.round();
            if m < 1.0 || (ratio - m).abs() > 1e-9 {
                return Err(Error::invalid(format!(
                    "period {period_s}s is not an integer multiple of the run's {}s",
                    run.sample_period_s
                )));
            }
            downsample_run(&run, m as usize)
        })
        .collect()
}

fn evaluate_cell(
    runs: &[MeasurementRun],
    sites: &[CellSite],
    spec: &GridSpec,
    key: &CellKey,
    cell_seed: u64,
    partition_seed: u64,
) -> Result<CellResult> {
    let directed: Vec<&MeasurementRun> =
        runs.iter().filter(|r| r.direction == key.direction).collect();
    if directed.is_empty() {
        return Err(Error::invalid(format!(
            "no runs in direction {}",
            key.direction.as_str()
        )));
    }

    let pool = match (key.train_env, key.test_env) {
        (None, None) => CellPool::Single(directed.iter().map(|r| (*r).clone()).collect()),
        (Some(a), Some(b)) if a == b => CellPool::Single(segments_with_env(&directed, a)),
        (Some(a), Some(b)) => CellPool::Cross {
            train: segments_with_env(&directed, a),
            test: segments_with_env(&directed, b),
        },
        _ => return Err(Error::invalid("regime pair must set both sides or neither")),
    };

    let fraction =
        spec.train_fraction.unwrap_or_else(|| key.split.default_train_fraction());
    let (all_runs, assignment) = match pool {
        CellPool::Single(rs) => {
            if rs.is_empty() {
                return Err(Error::invalid("no data in the requested regime"));
            }
            let rs = resample_pool(rs, key.period_s)?;
            let assignment = split(&rs, key.split, fraction, partition_seed)?;
            (rs, assignment)
        }
        CellPool::Cross { train, test } => {
            if train.is_empty() || test.is_empty() {
                return Err(Error::invalid("a cross-regime side has no data"));
            }
            let train = resample_pool(train, key.period_s)?;
            let test = resample_pool(test, key.period_s)?;
            let mut assignment = SplitAssignment {
                strategy: key.split,
                train_fraction: fraction,
                seed: partition_seed,
                runs: Vec::with_capacity(train.len() + test.len()),
                warnings: Vec::new(),
            };
            for (pool_runs, label) in
                [(&train, SplitLabel::Train), (&test, SplitLabel::Test)]
            {
                for run in pool_runs {
                    assignment.runs.push(RunLabels {
                        run_id: run.run_id.clone(),
                        t_ms: run.samples.iter().map(|s| s.t_ms).collect(),
                        labels: vec![label; run.samples.len()],
                    });
                }
            }
            let mut all = train;
            all.extend(test);
            (all, assignment)
        }
    };

    let options = AssembleOptions {
        rem_resolution_deg: spec.model_params.rem_resolution_deg,
        horizon_s: key.horizon_s,
    };
    let (mut train_table, test_table) =
        assemble(&all_runs, sites, key.scenario, &assignment, &options)?;
    if train_table.is_empty() || test_table.is_empty() {
        return Err(Error::invalid(format!(
            "empty {} side after assembly",
            if train_table.is_empty() { "train" } else { "test" }
        )));
    }

    if let Some(cap) = spec.max_train_rows {
        if train_table.n_rows() > cap {
            use rand::seq::SliceRandom;
            let mut idx: Vec<usize> = (0..train_table.n_rows()).collect();
            idx.shuffle(&mut crate::rng::rng_for(partition_seed, 101));
            idx.truncate(cap);
            idx.sort_unstable(); // keep rows in time order
            train_table = train_table.take_rows(&idx)?;
        }
    }

    let model_spec = ModelSpec { kind: key.model, seed: cell_seed, ..spec.model_params.clone() };
    let model = fit(&model_spec, &train_table)?;
    let predictions = predict(&model, &test_table)?;
    let report = metrics(&test_table.target, &predictions)?;
    Ok(CellResult { report, n_train: train_table.n_rows(), n_test: test_table.n_rows() })
}

/// Long-format CSV of every successful cell: one row per metric.
pub fn grid_to_long_csv(grid: &ExperimentGrid) -> String {
    let mut out = String::from(
        "model,scenario,split,period_s,horizon_s,train_env,test_env,direction,metric,value\n",
    );
    for cell in &grid.cells {
        let Some(res) = &cell.result else { continue };
        let key = &cell.key;
        let prefix = format!(
            "{},{},{},{},{},{},{},{}",
            key.model,
            key.scenario.as_str(),
            key.split,
            key.period_s,
            key.horizon_s,
            env_label(key.train_env),
            env_label(key.test_env),
            key.direction.as_str()
        );
        let r = &res.report;
        let mut push = |metric: &str, value: f64| {
            out.push_str(&format!("{prefix},{metric},{value}\n"));
        };
        push("mae", r.mae);
        if let Some(mape) = r.mape {
            push("mape", mape);
        }
        push("medae", r.medae);
        push("rmse", r.rmse);
        push("r2", r.r2);
        push("n_train", res.n_train as f64);
        push("n_test", res.n_test as f64);
    }
    out
}

/// The grid (including failures) as a pretty JSON document.
pub fn grid_to_json(grid: &ExperimentGrid) -> Result<String> {
    Ok(serde_json::to_string_pretty(grid)?)
}
