//! Feature groups, access scenarios, learning-table assembly, and
//! prediction-horizon targets.
//!
//! A feature group is a set of trace columns available to a given data
//! consumer; an access scenario is the union of the groups a consumer
//! can realistically obtain. Models never see raw runs — they see the
//! [`LearningTable`] assembled here.

pub mod rem;

pub use rem::{RadioEnvironmentMap, DEFAULT_REM_RESOLUTION_DEG};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::haversine_m;
use crate::split::{SplitAssignment, SplitLabel};
use crate::trace::{sample_value, CellSite, Direction, MeasurementRun};

/// The five feature groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum FeatureGroup {
    Phy,
    Chan,
    Bs,
    Veh,
    Rem,
}

/// Radio/physical-layer measurements reported by the modem.
pub const PHY_COLUMNS: [&str; 7] = [
    "rsrp",
    "rsrq",
    "rssi",
    "sinr",
    "rsrp_margin",
    "rsrq_margin",
    "t_since_ho",
];

/// Channel-quality indicators requiring specialist modem access.
pub const CHAN_COLUMNS: [&str; 2] = ["rank", "cqi"];

/// Base-station-side counters known to the network operator.
pub const BS_COLUMNS: [&str; 4] = ["cell_tput_dl", "cell_tput_ul", "active_ues", "cell_load"];

/// Vehicle-side context features.
pub const VEH_COLUMNS: [&str; 4] = ["lat", "lon", "speed", "dist_to_cell"];

/// Map-lookup statistics of the PHY features plus mapped throughput and
/// a miss indicator.
pub const REM_COLUMNS: [&str; 9] = [
    "rem_rsrp_mean",
    "rem_rsrq_mean",
    "rem_rssi_mean",
    "rem_sinr_mean",
    "rem_rsrp_margin_mean",
    "rem_rsrq_margin_mean",
    "rem_t_since_ho_mean",
    "rem_tput_mean",
    "rem_miss",
];

impl FeatureGroup {
    pub fn columns(&self) -> &'static [&'static str] {
        match self {
            FeatureGroup::Phy => &PHY_COLUMNS,
            FeatureGroup::Chan => &CHAN_COLUMNS,
            FeatureGroup::Bs => &BS_COLUMNS,
            FeatureGroup::Veh => &VEH_COLUMNS,
            FeatureGroup::Rem => &REM_COLUMNS,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            FeatureGroup::Phy => "PHY",
            FeatureGroup::Chan => "CHAN",
            FeatureGroup::Bs => "BS",
            FeatureGroup::Veh => "VEH",
            FeatureGroup::Rem => "REM",
        }
    }

    /// Canonical group order used when concatenating columns.
    pub const ALL: [FeatureGroup; 5] = [
        FeatureGroup::Phy,
        FeatureGroup::Chan,
        FeatureGroup::Bs,
        FeatureGroup::Veh,
        FeatureGroup::Rem,
    ];
}

/// The nine access scenarios: which feature groups a consumer can use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum AccessScenario {
    /// Modem data: PHY.
    Md,
    /// Extended modem data: PHY, CHAN.
    Emd,
    /// Modem data + network: PHY, BS.
    Mdnet,
    /// Modem data + map: PHY, REM.
    Mdrem,
    /// Extended modem data + network: PHY, CHAN, BS.
    Emdnet,
    /// Map + network: PHY, BS, REM.
    Remnet,
    /// Vehicle + network: PHY, BS, VEH.
    Devnet,
    /// Vehicle-side only: PHY, CHAN, VEH.
    Dev,
    /// Everything: PHY, CHAN, BS, VEH, REM.
    Full,
}

impl AccessScenario {
    pub fn groups(&self) -> &'static [FeatureGroup] {
        use FeatureGroup::*;
        match self {
            AccessScenario::Md => &[Phy],
            AccessScenario::Emd => &[Phy, Chan],
            AccessScenario::Mdnet => &[Phy, Bs],
            AccessScenario::Mdrem => &[Phy, Rem],
            AccessScenario::Emdnet => &[Phy, Chan, Bs],
            AccessScenario::Remnet => &[Phy, Bs, Rem],
            AccessScenario::Devnet => &[Phy, Bs, Veh],
            AccessScenario::Dev => &[Phy, Chan, Veh],
            AccessScenario::Full => &[Phy, Chan, Bs, Veh, Rem],
        }
    }

    /// Feature columns for this scenario, groups in canonical order.
    pub fn columns(&self) -> Vec<&'static str> {
        let groups = self.groups();
        FeatureGroup::ALL
            .iter()
            .filter(|g| groups.contains(g))
            .flat_map(|g| g.columns().iter().copied())
            .collect()
    }

    pub fn uses_rem(&self) -> bool {
        self.groups().contains(&FeatureGroup::Rem)
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            AccessScenario::Md => "MD",
            AccessScenario::Emd => "EMD",
            AccessScenario::Mdnet => "MDNET",
            AccessScenario::Mdrem => "MDREM",
            AccessScenario::Emdnet => "EMDNET",
            AccessScenario::Remnet => "REMNET",
            AccessScenario::Devnet => "DEVNET",
            AccessScenario::Dev => "DEV",
            AccessScenario::Full => "FULL",
        }
    }

    pub const ALL: [AccessScenario; 9] = [
        AccessScenario::Md,
        AccessScenario::Emd,
        AccessScenario::Mdnet,
        AccessScenario::Mdrem,
        AccessScenario::Emdnet,
        AccessScenario::Remnet,
        AccessScenario::Devnet,
        AccessScenario::Dev,
        AccessScenario::Full,
    ];
}

impl std::str::FromStr for AccessScenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AccessScenario::ALL
            .iter()
            .find(|sc| sc.as_str().eq_ignore_ascii_case(s))
            .copied()
            .ok_or_else(|| Error::UnknownScenario(s.to_string()))
    }
}

impl std::fmt::Display for AccessScenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Identity of one learning-table row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleKey {
    pub run_id: String,
    pub t_ms: u64,
}

/// Model-ready matrix: named feature columns, target vector, and row
/// identities. Row `i` spans `features[i*p .. (i+1)*p]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearningTable {
    pub columns: Vec<String>,
    /// Row-major feature matrix, `n_rows x columns.len()`.
    pub features: Vec<f64>,
    /// Target in Mbit/s (direction resolved per run).
    pub target: Vec<f64>,
    pub keys: Vec<SampleKey>,
    /// Geographic position per row (kept for map-based baselines).
    pub positions: Vec<[f64; 2]>,
}

impl LearningTable {
    pub fn n_rows(&self) -> usize {
        self.target.len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let p = self.n_cols();
        &self.features[i * p..(i + 1) * p]
    }

    pub fn is_empty(&self) -> bool {
        self.target.is_empty()
    }

    fn new(columns: Vec<String>) -> Self {
        LearningTable {
            columns,
            features: Vec::new(),
            target: Vec::new(),
            keys: Vec::new(),
            positions: Vec::new(),
        }
    }

    /// Column index by name.
    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::Column(name.to_string()))
    }

    /// One feature column as a vector.
    pub fn column_values(&self, name: &str) -> Result<Vec<f64>> {
        let j = self.column_index(name)?;
        let p = self.n_cols();
        Ok((0..self.n_rows()).map(|i| self.features[i * p + j]).collect())
    }

    /// A new table containing the given rows, in the given order.
    pub fn take_rows(&self, rows: &[usize]) -> Result<LearningTable> {
        let mut out = LearningTable::new(self.columns.clone());
        for &i in rows {
            if i >= self.n_rows() {
                return Err(Error::invalid(format!(
                    "row {i} out of range ({} rows)",
                    self.n_rows()
                )));
            }
            out.features.extend_from_slice(self.row(i));
            out.target.push(self.target[i]);
            out.keys.push(self.keys[i].clone());
            out.positions.push(self.positions[i]);
        }
        Ok(out)
    }
}

/// Assembly options beyond the scenario itself.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AssembleOptions {
    /// Grid resolution used when the scenario includes REM features.
    pub rem_resolution_deg: f64,
    /// Prediction horizon: 0 keeps the instantaneous target; `w > 0`
    /// replaces it with the mean throughput over `(t, t + w]` seconds and
    /// drops rows whose window runs past the end of their run.
    pub horizon_s: f64,
}

impl Default for AssembleOptions {
    fn default() -> Self {
        AssembleOptions { rem_resolution_deg: DEFAULT_REM_RESOLUTION_DEG, horizon_s: 0.0 }
    }
}

/// Build train and test learning tables for a scenario from labeled runs.
///
/// REM scenarios construct the map from the split's train side only; the
/// same map then serves both sides' lookups (test rows never contribute
/// to it). Every lookup is run-aware: a row queries the map with its own
/// run's contribution subtracted, as a deployed map built from other
/// drives would answer — otherwise per-cell target means leak each
/// training row's own label into its features. Lookups on cells with no
/// other-run data are imputed with the (equally run-excluded) global
/// train mean and flagged in the `rem_miss` column.
pub fn assemble(
    runs: &[MeasurementRun],
    sites: &[CellSite],
    scenario: AccessScenario,
    split: &SplitAssignment,
    options: &AssembleOptions,
) -> Result<(LearningTable, LearningTable)> {
    if options.horizon_s < 0.0 || !options.horizon_s.is_finite() {
        return Err(Error::invalid("horizon must be finite and >= 0"));
    }
    let rem = if scenario.uses_rem() {
        let mut train_samples = Vec::new();
        for run in runs {
            let Some(labels) = split.labels_for(&run.run_id) else { continue };
            for (s, label) in run.samples.iter().zip(&labels.labels) {
                if *label == SplitLabel::Train {
                    train_samples.push((run.run_id.as_str(), s));
                }
            }
        }
        Some(RadioEnvironmentMap::build(train_samples, options.rem_resolution_deg)?)
    } else {
        None
    };

    let column_names: Vec<String> = scenario.columns().iter().map(|c| c.to_string()).collect();
    let mut train = LearningTable::new(column_names.clone());
    let mut test = LearningTable::new(column_names);

    for run in runs {
        let Some(labels) = split.labels_for(&run.run_id) else { continue };
        let targets = run_targets(run, options.horizon_s)?;
        for (i, (s, label)) in run.samples.iter().zip(&labels.labels).enumerate() {
            let Some(target) = targets[i] else { continue };
            let table = match label {
                SplitLabel::Train => &mut train,
                SplitLabel::Test => &mut test,
            };
            for col in scenario.columns() {
                let v = feature_value(col, s, run, sites, rem.as_ref())?;
                table.features.push(v);
            }
            table.target.push(target);
            table.keys.push(SampleKey { run_id: run.run_id.clone(), t_ms: s.t_ms });
            table.positions.push([s.lat, s.lon]);
        }
    }
    Ok((train, test))
}

/// Resolve one feature column for one sample.
fn feature_value(
    column: &str,
    s: &crate::trace::RadioSample,
    run: &MeasurementRun,
    sites: &[CellSite],
    rem: Option<&RadioEnvironmentMap>,
) -> Result<f64> {
    if column == "dist_to_cell" {
        let site = sites
            .iter()
            .find(|c| c.cell_id == s.cell_id)
            .ok_or(Error::Missing(format!("cell site {} not in sidecar", s.cell_id)))?;
        return Ok(haversine_m(s.lat, s.lon, site.lat, site.lon));
    }
    if let Some(rem_col) = column.strip_prefix("rem_") {
        let rem = rem.ok_or_else(|| {
            Error::invalid("REM column requested but no radio environment map supplied")
        })?;
        // The map as this row's own run sees it: regime-matched cell with
        // the run's own contribution excluded.
        let cell = rem.lookup(s.lat, s.lon, s.env, &run.run_id);
        if rem_col == "miss" {
            return Ok(f64::from(cell.is_none()));
        }
        let quantity = rem_col
            .strip_suffix("_mean")
            .ok_or_else(|| Error::Column(column.to_string()))?;
        let quantity = if quantity == "tput" {
            match run.direction {
                Direction::Dl => "tput_dl",
                Direction::Ul => "tput_ul",
            }
        } else {
            quantity
        };
        let q = RadioEnvironmentMap::quantity_index(quantity)?;
        // Imputation for unvisited cells: same-regime map-wide stats, then
        // the whole map, then (sole-contributor degenerate case) the map
        // including the querying run.
        return Ok(match cell {
            Some(c) => c.mean(q),
            None => rem
                .global_env(s.env, &run.run_id)
                .or_else(|| rem.global(&run.run_id))
                .unwrap_or_else(|| rem.global_unfiltered())
                .mean(q),
        });
    }
    sample_value(s, column)
}

/// Per-sample prediction targets for one run: the run's own direction,
/// optionally averaged over a future horizon window.
///
/// With `horizon_s == 0` every sample keeps its instantaneous
/// throughput. Otherwise the target at time `t` is the mean throughput
/// over `(t, t + horizon_s]`; samples whose window extends past the run
/// end (or contains no samples) get `None`.
pub fn run_targets(run: &MeasurementRun, horizon_s: f64) -> Result<Vec<Option<f64>>> {
    let tput = |s: &crate::trace::RadioSample| match run.direction {
        Direction::Dl => s.tput_dl_mbps,
        Direction::Ul => s.tput_ul_mbps,
    };
    if horizon_s == 0.0 {
        return Ok(run.samples.iter().map(|s| Some(tput(s))).collect());
    }
    if horizon_s < 0.0 || !horizon_s.is_finite() {
        return Err(Error::invalid("horizon must be finite and >= 0"));
    }
    let horizon_ms = (horizon_s * 1000.0).round() as u64;
    let last_t = match run.samples.last() {
        Some(s) => s.t_ms,
        None => return Ok(Vec::new()),
    };
    let n = run.samples.len();
    let mut out = vec![None; n];
    let mut hi = 0usize; // exclusive end of the window sample range
    let mut lo = 0usize; // first sample with t > t_i
    for i in 0..n {
        let t0 = run.samples[i].t_ms;
        let end = t0 + horizon_ms;
        if end > last_t {
            break; // window leaves the run; this and later samples drop
        }
        if lo < i + 1 {
            lo = i + 1;
        }
        if hi < lo {
            hi = lo;
        }
        while hi < n && run.samples[hi].t_ms <= end {
            hi += 1;
        }
        if hi > lo {
            let sum: f64 = run.samples[lo..hi].iter().map(&tput).sum();
            out[i] = Some(sum / (hi - lo) as f64);
        }
    }
    Ok(out)
}

/// Standalone horizon-target view (window mean with row-drop semantics).
/// Returns the surviving `(sample_index, target)` pairs.
pub fn horizon_target(run: &MeasurementRun, horizon_s: f64) -> Result<Vec<(usize, f64)>> {
    if horizon_s < 1.0 {
        return Err(Error::invalid("horizon window must be >= 1 s"));
    }
    let targets = run_targets(run, horizon_s)?;
    Ok(targets
        .into_iter()
        .enumerate()
        .filter_map(|(i, t)| t.map(|v| (i, v)))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::split::{split, SplitStrategy};
    use crate::trace::{cell_sites, generate, GeneratorConfig};

    #[test]
    fn scenario_compositions_match_the_access_table() {
        use AccessScenario::*;
        assert_eq!(Md.columns().len(), 7);
        assert_eq!(Emd.columns().len(), 9);
        assert_eq!(Mdnet.columns().len(), 11);
        assert_eq!(Mdrem.columns().len(), 16);
        assert_eq!(Emdnet.columns().len(), 13);
        assert_eq!(Remnet.columns().len(), 20);
        assert_eq!(Devnet.columns().len(), 15);
        assert_eq!(Dev.columns().len(), 13);
        assert_eq!(Full.columns().len(), 26);
        // Group lists are disjoint.
        let mut all: Vec<&str> = FeatureGroup::ALL
            .iter()
            .flat_map(|g| g.columns().iter().copied())
            .collect();
        let before = all.len();
        all.sort_unstable();
        all.dedup();
        assert_eq!(all.len(), before, "duplicate column across groups");
    }

    #[test]
    fn scenario_subset_lattice_holds() {
        let subset = |a: AccessScenario, b: AccessScenario| {
            let cb = b.columns();
            a.columns().iter().all(|c| cb.contains(c))
        };
        assert!(subset(AccessScenario::Md, AccessScenario::Emd));
        assert!(subset(AccessScenario::Md, AccessScenario::Mdnet));
        assert!(subset(AccessScenario::Mdnet, AccessScenario::Emdnet));
        assert!(subset(AccessScenario::Emdnet, AccessScenario::Full));
        assert!(subset(AccessScenario::Mdrem, AccessScenario::Remnet));
        assert!(subset(AccessScenario::Devnet, AccessScenario::Full));
        assert!(subset(AccessScenario::Dev, AccessScenario::Full));
    }

    #[test]
    fn unknown_scenario_errors() {
        assert!(matches!(
            "MDFOO".parse::<AccessScenario>(),
            Err(Error::UnknownScenario(_))
        ));
        assert_eq!("full".parse::<AccessScenario>().unwrap(), AccessScenario::Full);
    }

    fn small_world(seed: u64) -> (Vec<MeasurementRun>, Vec<CellSite>) {
        let cfg = GeneratorConfig {
            seed,
            n_runs: 4,
            run_duration_s: 200.0,
            ..GeneratorConfig::default()
        };
        let runs = generate(&cfg).unwrap();
        let sites = cell_sites(&cfg);
        (runs, sites)
    }

    #[test]
    fn assemble_md_has_exactly_phy_columns_and_full_rows() {
        let (runs, sites) = small_world(31);
        let sp = split(&runs, SplitStrategy::Random, 0.7, 1).unwrap();
        let (train, test) =
            assemble(&runs, &sites, AccessScenario::Md, &sp, &AssembleOptions::default())
                .unwrap();
        assert_eq!(train.columns, PHY_COLUMNS.map(String::from).to_vec());
        let total: usize = runs.iter().map(|r| r.samples.len()).sum();
        assert_eq!(train.n_rows() + test.n_rows(), total);
        assert_eq!(train.features.len(), train.n_rows() * 7);
        assert!(train.features.iter().all(|v| v.is_finite()));
        // Keys align with rows and positions.
        assert_eq!(train.keys.len(), train.n_rows());
        assert_eq!(train.positions.len(), train.n_rows());
    }

    #[test]
    fn assemble_full_is_complete_and_finite() {
        let (runs, sites) = small_world(32);
        let sp = split(&runs, SplitStrategy::Time, 0.5, 0).unwrap();
        let (train, test) =
            assemble(&runs, &sites, AccessScenario::Full, &sp, &AssembleOptions::default())
                .unwrap();
        assert_eq!(train.n_cols(), 26);
        assert!(!train.is_empty() && !test.is_empty());
        for t in [&train, &test] {
            assert!(t.features.iter().all(|v| v.is_finite()), "no missing values");
        }
        // dist_to_cell is a real distance.
        let dist = test.column_values("dist_to_cell").unwrap();
        assert!(dist.iter().all(|d| *d >= 0.0 && *d < 100_000.0));
    }

    #[test]
    fn rem_built_from_train_side_only() {
        let (runs, sites) = small_world(33);
        let sp = split(&runs, SplitStrategy::Run, 0.7, 2).unwrap();
        let (train_a, test_a) =
            assemble(&runs, &sites, AccessScenario::Mdrem, &sp, &AssembleOptions::default())
                .unwrap();
        // Permuting test-side samples (reversing each test run) must not
        // change any REM-derived training column.
        let mut permuted = runs.clone();
        for run in &mut permuted {
            let labels = sp.labels_for(&run.run_id).unwrap();
            if labels.labels[0] == SplitLabel::Test {
                let times: Vec<u64> = run.samples.iter().map(|s| s.t_ms).collect();
                run.samples.reverse();
                for (s, t) in run.samples.iter_mut().zip(&times) {
                    s.t_ms = *t;
                }
            }
        }
        let (train_b, test_b) =
            assemble(&permuted, &sites, AccessScenario::Mdrem, &sp, &AssembleOptions::default())
                .unwrap();
        assert_eq!(train_a, train_b, "train side must ignore test permutation");
        assert_eq!(test_a.n_rows(), test_b.n_rows());
    }

    #[test]
    fn rem_miss_flag_marks_unvisited_cells() {
        let (runs, sites) = small_world(34);
        let sp = split(&runs, SplitStrategy::Run, 0.7, 3).unwrap();
        let (train, test) =
            assemble(&runs, &sites, AccessScenario::Mdrem, &sp, &AssembleOptions::default())
                .unwrap();
        let miss_train = train.column_values("rem_miss").unwrap();
        let miss_test = test.column_values("rem_miss").unwrap();
        // Lookups are run-excluded, so even train rows miss where no OTHER
        // run visited; the flag is binary and imputed values stay finite.
        assert!(miss_train.iter().all(|m| *m == 0.0 || *m == 1.0));
        // Disjoint test drives visit fresh cells; at least some rows miss
        // and are imputed (finite values).
        assert!(miss_test.iter().any(|m| *m == 1.0));
        assert!(test.features.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn horizon_window_fixture() {
        // tput [1,2,3,4] at 1 s sampling, window 2 s -> targets [2.5, 3.5].
        let (mut runs, _) = small_world(35);
        let run = &mut runs[0];
        run.samples.truncate(4);
        run.direction = Direction::Dl;
        for (i, s) in run.samples.iter_mut().enumerate() {
            s.t_ms = i as u64 * 1000;
            s.tput_dl_mbps = (i + 1) as f64;
        }
        let targets = horizon_target(run, 2.0).unwrap();
        assert_eq!(targets, vec![(0, 2.5), (1, 3.5)]);
        // Unit horizon = next sample's throughput.
        let unit = horizon_target(run, 1.0).unwrap();
        assert_eq!(unit, vec![(0, 2.0), (1, 3.0), (2, 4.0)]);
    }

    #[test]
    fn horizon_drops_exactly_ceil_w_over_period_samples() {
        let (runs, _) = small_world(36);
        let run = &runs[0];
        let n = run.samples.len();
        for w in [1.0, 2.0, 5.0, 10.0] {
            let kept = horizon_target(run, w).unwrap();
            let dropped = n - kept.len();
            let expect = (w / run.sample_period_s).ceil() as usize;
            assert_eq!(dropped, expect, "window {w}");
        }
    }

    #[test]
    fn horizon_longer_than_run_empties_target() {
        let (runs, _) = small_world(37);
        let kept = horizon_target(&runs[0], 10_000.0).unwrap();
        assert!(kept.is_empty());
    }

    #[test]
    fn constant_throughput_run_keeps_constant_horizon_target() {
        let (mut runs, _) = small_world(38);
        let run = &mut runs[0];
        run.direction = Direction::Ul;
        for s in &mut run.samples {
            s.tput_ul_mbps = 7.25;
        }
        for (_, v) in horizon_target(run, 5.0).unwrap() {
            assert_eq!(v, 7.25);
        }
    }

    #[test]
    fn assemble_with_horizon_drops_tail_rows_per_run() {
        let (runs, sites) = small_world(39);
        let sp = split(&runs, SplitStrategy::Time, 0.5, 0).unwrap();
        let base =
            assemble(&runs, &sites, AccessScenario::Md, &sp, &AssembleOptions::default())
                .unwrap();
        let opts = AssembleOptions { horizon_s: 5.0, ..AssembleOptions::default() };
        let (train, test) = assemble(&runs, &sites, AccessScenario::Md, &sp, &opts).unwrap();
        let dropped_per_run = 5; // ceil(5 s / 1 s)
        let total_base = base.0.n_rows() + base.1.n_rows();
        let total = train.n_rows() + test.n_rows();
        assert_eq!(total_base - total, dropped_per_run * runs.len());
        // Dropped rows are the run tails, which the time split labels test.
        assert_eq!(base.0.n_rows(), train.n_rows());
    }
}
