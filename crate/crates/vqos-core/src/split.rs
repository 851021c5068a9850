//! Train/test split strategies for measurement-run collections and the
//! PCA diagnostic used to visualize how a split separates in feature
//! space.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng_for;
use crate::trace::MeasurementRun;

/// Number of contiguous folds per run for [`SplitStrategy::Folds`].
pub const N_FOLDS: usize = 10;

/// The four supported assignment strategies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitStrategy {
    /// Seeded global shuffle; exactly `round(f * n)` samples train.
    Random,
    /// Per run, the first `round(f * n)` samples train (time order).
    Time,
    /// Whole runs assigned greedily to balance sample counts.
    Run,
    /// Per run, 10 contiguous folds; a seeded subset of folds trains.
    Folds,
}

impl SplitStrategy {
    pub fn as_str(&self) -> &'static str {
        match self {
            SplitStrategy::Random => "random",
            SplitStrategy::Time => "time",
            SplitStrategy::Run => "run",
            SplitStrategy::Folds => "folds",
        }
    }

    /// Conventional train fraction for each strategy: time splits halve
    /// each run, the others target 70/30.
    pub fn default_train_fraction(&self) -> f64 {
        match self {
            SplitStrategy::Time => 0.5,
            _ => 0.7,
        }
    }

    pub const ALL: [SplitStrategy; 4] = [
        SplitStrategy::Random,
        SplitStrategy::Time,
        SplitStrategy::Run,
        SplitStrategy::Folds,
    ];
}

impl std::str::FromStr for SplitStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(SplitStrategy::Random),
            "time" => Ok(SplitStrategy::Time),
            "run" => Ok(SplitStrategy::Run),
            "folds" => Ok(SplitStrategy::Folds),
            other => Err(Error::invalid(format!("unknown split strategy `{other}`"))),
        }
    }
}

impl std::fmt::Display for SplitStrategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Per-sample assignment label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitLabel {
    Train,
    Test,
}

impl SplitLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            SplitLabel::Train => "train",
            SplitLabel::Test => "test",
        }
    }
}

/// Labels for one run, aligned with its sample vector.
#[derive(Debug, Clone, PartialEq)]
pub struct RunLabels {
    pub run_id: String,
    /// Timestamps copied from the run (for serialization).
    pub t_ms: Vec<u64>,
    pub labels: Vec<SplitLabel>,
}

/// Complete train/test assignment over a run collection.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitAssignment {
    pub strategy: SplitStrategy,
    pub train_fraction: f64,
    pub seed: u64,
    /// One entry per retained run, in input order.
    pub runs: Vec<RunLabels>,
    /// Runs that could not be split (e.g. too short for folds).
    pub warnings: Vec<String>,
}

impl SplitAssignment {
    pub fn train_count(&self) -> usize {
        self.count(SplitLabel::Train)
    }

    pub fn test_count(&self) -> usize {
        self.count(SplitLabel::Test)
    }

    fn count(&self, which: SplitLabel) -> usize {
        self.runs
            .iter()
            .map(|r| r.labels.iter().filter(|l| **l == which).count())
            .sum()
    }

    /// Achieved train fraction over retained runs.
    pub fn achieved_fraction(&self) -> f64 {
        let train = self.train_count();
        let total = train + self.test_count();
        if total == 0 {
            0.0
        } else {
            train as f64 / total as f64
        }
    }

    /// Labels for a given run id, if the run was retained.
    pub fn labels_for(&self, run_id: &str) -> Option<&RunLabels> {
        self.runs.iter().find(|r| r.run_id == run_id)
    }
}

/// Assign every sample of `runs` to train or test.
pub fn split(
    runs: &[MeasurementRun],
    strategy: SplitStrategy,
    train_fraction: f64,
    seed: u64,
) -> Result<SplitAssignment> {
    if runs.is_empty() {
        return Err(Error::invalid("cannot split an empty run collection"));
    }
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::invalid("train_fraction must be in (0, 1)"));
    }
    let mut assignment = SplitAssignment {
        strategy,
        train_fraction,
        seed,
        runs: Vec::with_capacity(runs.len()),
        warnings: Vec::new(),
    };
    match strategy {
        SplitStrategy::Random => split_random(runs, train_fraction, seed, &mut assignment),
        SplitStrategy::Time => split_time(runs, train_fraction, &mut assignment),
        SplitStrategy::Run => split_run(runs, train_fraction, seed, &mut assignment),
        SplitStrategy::Folds => split_folds(runs, train_fraction, seed, &mut assignment),
    }
    Ok(assignment)
}

fn blank_labels(runs: &[MeasurementRun], assignment: &mut SplitAssignment) {
    for run in runs {
        assignment.runs.push(RunLabels {
            run_id: run.run_id.clone(),
            t_ms: run.samples.iter().map(|s| s.t_ms).collect(),
            labels: vec![SplitLabel::Test; run.samples.len()],
        });
    }
}

fn split_random(
    runs: &[MeasurementRun],
    fraction: f64,
    seed: u64,
    assignment: &mut SplitAssignment,
) {
    blank_labels(runs, assignment);
    let mut positions: Vec<(usize, usize)> = runs
        .iter()
        .enumerate()
        .flat_map(|(ri, run)| (0..run.samples.len()).map(move |si| (ri, si)))
        .collect();
    let n = positions.len();
    let n_train = ((n as f64) * fraction).round() as usize;
    let mut rng = rng_for(seed, 0);
    positions.shuffle(&mut rng);
    for &(ri, si) in positions.iter().take(n_train) {
        assignment.runs[ri].labels[si] = SplitLabel::Train;
    }
}

fn split_time(runs: &[MeasurementRun], fraction: f64, assignment: &mut SplitAssignment) {
    blank_labels(runs, assignment);
    for (ri, run) in runs.iter().enumerate() {
        let n = run.samples.len();
        let n_train = ((n as f64) * fraction).round() as usize;
        for label in assignment.runs[ri].labels.iter_mut().take(n_train) {
            *label = SplitLabel::Train;
        }
    }
}

fn split_run(
    runs: &[MeasurementRun],
    fraction: f64,
    seed: u64,
    assignment: &mut SplitAssignment,
) {
    blank_labels(runs, assignment);
    let total: usize = runs.iter().map(|r| r.samples.len()).sum();
    let target_train = fraction * total as f64;
    let target_test = (1.0 - fraction) * total as f64;
    // Largest runs placed first; equal lengths ordered by a seeded
    // shuffle so ties break differently across seeds.
    let mut order: Vec<usize> = (0..runs.len()).collect();
    let mut rng = rng_for(seed, 1);
    order.shuffle(&mut rng);
    order.sort_by_key(|&ri| std::cmp::Reverse(runs[ri].samples.len()));
    let (mut train_n, mut test_n) = (0usize, 0usize);
    for &ri in &order {
        let len = runs[ri].samples.len();
        let train_deficit = target_train - train_n as f64;
        let test_deficit = target_test - test_n as f64;
        if train_deficit >= test_deficit {
            for label in assignment.runs[ri].labels.iter_mut() {
                *label = SplitLabel::Train;
            }
            train_n += len;
        } else {
            test_n += len;
        }
    }
}

fn split_folds(
    runs: &[MeasurementRun],
    fraction: f64,
    seed: u64,
    assignment: &mut SplitAssignment,
) {
    let n_train_folds = ((N_FOLDS as f64) * fraction).round() as usize;
    let mut retained = Vec::new();
    for (ri, run) in runs.iter().enumerate() {
        let n = run.samples.len();
        if n < N_FOLDS {
            assignment.warnings.push(format!(
                "run `{}` skipped: {} samples is fewer than {} folds",
                run.run_id, n, N_FOLDS
            ));
            continue;
        }
        retained.push(ri);
    }
    for &ri in &retained {
        let run = &runs[ri];
        let n = run.samples.len();
        // Contiguous folds; the first n % N_FOLDS folds carry one extra.
        let base = n / N_FOLDS;
        let rem = n % N_FOLDS;
        let mut rng = rng_for(seed, 2_000 + ri as u64);
        let mut fold_ids: Vec<usize> = (0..N_FOLDS).collect();
        fold_ids.shuffle(&mut rng);
        let train_folds: Vec<bool> = {
            let mut mask = vec![false; N_FOLDS];
            for &f in fold_ids.iter().take(n_train_folds) {
                mask[f] = true;
            }
            mask
        };
        let mut labels = Vec::with_capacity(n);
        for (fold, &is_train) in train_folds.iter().enumerate() {
            let len = base + usize::from(fold < rem);
            let label = if is_train { SplitLabel::Train } else { SplitLabel::Test };
            labels.extend(std::iter::repeat_n(label, len));
        }
        assignment.runs.push(RunLabels {
            run_id: run.run_id.clone(),
            t_ms: run.samples.iter().map(|s| s.t_ms).collect(),
            labels,
        });
    }
}

// ---------------------------------------------------------------------------
// PCA split diagnostic
// ---------------------------------------------------------------------------

/// Two-component PCA of standardized features, fit on train, applied to
/// both sets.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaProjection {
    /// Orthonormal loading vectors (length = retained columns).
    pub components: [Vec<f64>; 2],
    /// Fraction of total variance carried by each component.
    pub explained_variance_ratio: [f64; 2],
    pub train_points: Vec<[f64; 2]>,
    pub test_points: Vec<[f64; 2]>,
    /// Indices of input columns retained (zero-variance columns drop).
    pub retained_columns: Vec<usize>,
    pub warnings: Vec<String>,
}

/// Project train and test feature rows onto the top-2 principal
/// components of the (train-standardized) training data.
pub fn pca_project(train: &[Vec<f64>], test: &[Vec<f64>]) -> Result<PcaProjection> {
    let n = train.len();
    if n < 3 {
        return Err(Error::TooShort { need: 3, got: n });
    }
    let p = train[0].len();
    if p < 2 {
        return Err(Error::invalid("PCA needs at least 2 feature columns"));
    }
    if train.iter().chain(test.iter()).any(|row| row.len() != p) {
        return Err(Error::Schema("ragged feature rows".into()));
    }
    if train
        .iter()
        .chain(test.iter())
        .any(|row| row.iter().any(|v| !v.is_finite()))
    {
        return Err(Error::NonFinite("PCA input".into()));
    }

    // Column statistics on train only.
    let mut mean = vec![0.0; p];
    for row in train {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    let mut var = vec![0.0; p];
    for row in train {
        for ((s, v), m) in var.iter_mut().zip(row).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    let mut warnings = Vec::new();
    let mut retained = Vec::new();
    let mut std_dev = Vec::new();
    for (j, s) in var.iter().enumerate() {
        let sd = (s / (n - 1) as f64).sqrt();
        if sd > 0.0 {
            retained.push(j);
            std_dev.push(sd);
        } else {
            warnings.push(format!("column {j} dropped: zero variance in training data"));
        }
    }
    let k = retained.len();
    if k < 2 {
        return Err(Error::degenerate(
            "fewer than 2 non-degenerate feature columns for PCA",
        ));
    }

    let standardize = |row: &Vec<f64>| -> Vec<f64> {
        retained
            .iter()
            .zip(&std_dev)
            .map(|(&j, sd)| (row[j] - mean[j]) / sd)
            .collect()
    };
    let z_train: Vec<Vec<f64>> = train.iter().map(standardize).collect();
    let z_test: Vec<Vec<f64>> = test.iter().map(standardize).collect();

    // Covariance of the standardized training data.
    let mut cov = nalgebra::DMatrix::<f64>::zeros(k, k);
    for row in &z_train {
        for a in 0..k {
            for b in a..k {
                cov[(a, b)] += row[a] * row[b];
            }
        }
    }
    for a in 0..k {
        for b in a..k {
            let v = cov[(a, b)] / (n - 1) as f64;
            cov[(a, b)] = v;
            cov[(b, a)] = v;
        }
    }
    let eig = nalgebra::SymmetricEigen::new(cov);
    let mut idx: Vec<usize> = (0..k).collect();
    idx.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .expect("finite eigenvalues")
    });
    let total: f64 = eig.eigenvalues.iter().map(|v| v.max(0.0)).sum();
    if total <= 0.0 {
        return Err(Error::degenerate("zero total variance in PCA"));
    }
    let mut components: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
    let mut ratio = [0.0; 2];
    for c in 0..2 {
        let col = eig.eigenvectors.column(idx[c]);
        let mut v: Vec<f64> = col.iter().copied().collect();
        // Deterministic orientation: the entry with the largest magnitude
        // is made positive.
        let pivot = v
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).expect("finite"))
            .map(|(i, _)| i)
            .unwrap_or(0);
        if v[pivot] < 0.0 {
            for x in &mut v {
                *x = -*x;
            }
        }
        components[c] = v;
        ratio[c] = eig.eigenvalues[idx[c]].max(0.0) / total;
    }
    let project = |rows: &[Vec<f64>]| -> Vec<[f64; 2]> {
        rows.iter()
            .map(|row| {
                let mut out = [0.0; 2];
                for (c, comp) in components.iter().enumerate() {
                    out[c] = row.iter().zip(comp).map(|(a, b)| a * b).sum();
                }
                out
            })
            .collect()
    };
    Ok(PcaProjection {
        train_points: project(&z_train),
        test_points: project(&z_test),
        components,
        explained_variance_ratio: ratio,
        retained_columns: retained,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::{generate, GeneratorConfig};

    fn small_traces(seed: u64, n_runs: u32, duration_s: f64) -> Vec<MeasurementRun> {
        let cfg = GeneratorConfig {
            seed,
            n_runs,
            run_duration_s: duration_s,
            ..GeneratorConfig::default()
        };
        generate(&cfg).unwrap()
    }

    fn assert_partition(runs: &[MeasurementRun], a: &SplitAssignment) {
        for rl in &a.runs {
            let run = runs.iter().find(|r| r.run_id == rl.run_id).unwrap();
            assert_eq!(rl.labels.len(), run.samples.len());
            assert_eq!(rl.t_ms.len(), run.samples.len());
        }
    }

    #[test]
    fn random_split_exact_count_and_determinism() {
        let runs = small_traces(11, 4, 120.0);
        let total: usize = runs.iter().map(|r| r.samples.len()).sum();
        let a = split(&runs, SplitStrategy::Random, 0.7, 42).unwrap();
        assert_partition(&runs, &a);
        assert_eq!(a.train_count(), ((total as f64) * 0.7).round() as usize);
        let b = split(&runs, SplitStrategy::Random, 0.7, 42).unwrap();
        assert_eq!(a, b);
        let c = split(&runs, SplitStrategy::Random, 0.7, 43).unwrap();
        assert_ne!(a.runs, c.runs, "different seeds should differ");
    }

    #[test]
    fn time_split_takes_prefix_per_run() {
        let runs = small_traces(12, 2, 100.0);
        assert_eq!(runs[0].samples.len(), 100);
        let a = split(&runs, SplitStrategy::Time, 0.5, 0).unwrap();
        for rl in &a.runs {
            assert!(rl.labels[..50].iter().all(|l| *l == SplitLabel::Train));
            assert!(rl.labels[50..].iter().all(|l| *l == SplitLabel::Test));
        }
        // Seed does not matter for the time strategy.
        let b = split(&runs, SplitStrategy::Time, 0.5, 77).unwrap();
        assert_eq!(a.runs, b.runs);
    }

    #[test]
    fn run_split_keeps_runs_whole_and_balances() {
        let runs = small_traces(13, 10, 100.0);
        let a = split(&runs, SplitStrategy::Run, 0.7, 5).unwrap();
        for rl in &a.runs {
            let first = rl.labels[0];
            assert!(rl.labels.iter().all(|l| *l == first), "run split purity");
        }
        // Ten equal runs at 70%: exactly seven runs train.
        let train_runs = a
            .runs
            .iter()
            .filter(|r| r.labels[0] == SplitLabel::Train)
            .count();
        assert_eq!(train_runs, 7);
        assert!((a.achieved_fraction() - 0.7).abs() < 0.02);
        // Seed changes which runs land where, but not the balance.
        let b = split(&runs, SplitStrategy::Run, 0.7, 6).unwrap();
        assert_eq!(
            b.runs
                .iter()
                .filter(|r| r.labels[0] == SplitLabel::Train)
                .count(),
            7
        );
        assert_ne!(a.runs, b.runs);
    }

    #[test]
    fn folds_split_contiguous_balanced_folds() {
        let runs = small_traces(14, 3, 57.0);
        let a = split(&runs, SplitStrategy::Folds, 0.7, 3).unwrap();
        for rl in &a.runs {
            let n = rl.labels.len();
            // Recover fold boundaries from the construction (n = 57:
            // folds of 6,6,6,6,6,6,6,5,5,5).
            let base = n / N_FOLDS;
            let rem = n % N_FOLDS;
            let mut start = 0;
            let mut train_folds = 0;
            for fold in 0..N_FOLDS {
                let len = base + usize::from(fold < rem);
                let slice = &rl.labels[start..start + len];
                let first = slice[0];
                assert!(slice.iter().all(|l| *l == first), "fold not contiguous");
                train_folds += usize::from(first == SplitLabel::Train);
                start += len;
            }
            assert_eq!(start, n);
            assert_eq!(train_folds, 7);
        }
    }

    #[test]
    fn folds_on_ten_samples_gives_singleton_folds() {
        let mut runs = small_traces(15, 1, 10.0);
        assert_eq!(runs[0].samples.len(), 10);
        let a = split(&runs, SplitStrategy::Folds, 0.7, 9).unwrap();
        assert_eq!(a.runs[0].labels.len(), 10);
        let train = a.runs[0]
            .labels
            .iter()
            .filter(|l| **l == SplitLabel::Train)
            .count();
        assert_eq!(train, 7);
        // 9-sample run is skipped with a warning.
        runs[0].samples.pop();
        let b = split(&runs, SplitStrategy::Folds, 0.7, 9).unwrap();
        assert!(b.runs.is_empty());
        assert_eq!(b.warnings.len(), 1);
        assert!(b.warnings[0].contains("skipped"));
    }

    #[test]
    fn rejects_bad_inputs() {
        let runs = small_traces(16, 1, 30.0);
        assert!(split(&[], SplitStrategy::Random, 0.7, 0).is_err());
        assert!(split(&runs, SplitStrategy::Random, 0.0, 0).is_err());
        assert!(split(&runs, SplitStrategy::Random, 1.0, 0).is_err());
    }

    // ---------------- PCA ----------------

    fn gaussian_rows(seed: u64, n: usize, p: usize) -> Vec<Vec<f64>> {
        use rand_distr::{Distribution, StandardNormal};
        let mut rng = crate::rng::rng_for(seed, 0);
        (0..n)
            .map(|_| {
                (0..p)
                    .map(|_| {
                        let e: f64 = StandardNormal.sample(&mut rng);
                        e
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn pca_collinear_data_loads_first_component() {
        let train: Vec<Vec<f64>> = (0..200)
            .map(|i| {
                let x = i as f64 / 10.0;
                vec![x, x + 1e-6 * ((i % 7) as f64)]
            })
            .collect();
        let p = pca_project(&train, &[]).unwrap();
        assert!(p.explained_variance_ratio[0] > 0.99);
        assert!(p.explained_variance_ratio[0] >= p.explained_variance_ratio[1]);
    }

    #[test]
    fn pca_isotropic_data_splits_variance_evenly() {
        let train = gaussian_rows(21, 1000, 2);
        let p = pca_project(&train, &[]).unwrap();
        for r in p.explained_variance_ratio {
            assert!((0.4..=0.6).contains(&r), "ratio {r}");
        }
    }

    #[test]
    fn pca_loadings_orthonormal() {
        let train = gaussian_rows(22, 300, 5);
        let p = pca_project(&train, &[]).unwrap();
        let dot: f64 = p.components[0]
            .iter()
            .zip(&p.components[1])
            .map(|(a, b)| a * b)
            .sum();
        assert!(dot.abs() < 1e-9);
        for comp in &p.components {
            let norm: f64 = comp.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn pca_invariant_under_column_scaling() {
        let train = gaussian_rows(23, 400, 3);
        let test = gaussian_rows(24, 100, 3);
        let scale = [100.0, 0.01, 7.0];
        let scaled_train: Vec<Vec<f64>> = train
            .iter()
            .map(|row| row.iter().zip(&scale).map(|(v, s)| v * s).collect())
            .collect();
        let scaled_test: Vec<Vec<f64>> = test
            .iter()
            .map(|row| row.iter().zip(&scale).map(|(v, s)| v * s).collect())
            .collect();
        let a = pca_project(&train, &test).unwrap();
        let b = pca_project(&scaled_train, &scaled_test).unwrap();
        for (pa, pb) in a.test_points.iter().zip(&b.test_points) {
            for c in 0..2 {
                assert!((pa[c] - pb[c]).abs() < 1e-6, "{pa:?} vs {pb:?}");
            }
        }
    }

    #[test]
    fn pca_drops_constant_columns_with_warning() {
        let mut train = gaussian_rows(25, 100, 3);
        for row in &mut train {
            row[1] = 4.0;
        }
        let p = pca_project(&train, &[]).unwrap();
        assert_eq!(p.retained_columns, vec![0, 2]);
        assert_eq!(p.warnings.len(), 1);
        // With only one informative column left, it errors.
        let mut degenerate = gaussian_rows(26, 100, 2);
        for row in &mut degenerate {
            row[0] = 1.0;
        }
        assert!(pca_project(&degenerate, &[]).is_err());
    }

    #[test]
    fn pca_rejects_tiny_or_ragged_input() {
        let rows = gaussian_rows(27, 2, 3);
        assert!(pca_project(&rows, &[]).is_err());
        let mut ragged = gaussian_rows(28, 10, 3);
        ragged[4].pop();
        assert!(pca_project(&ragged, &[]).is_err());
    }
}
