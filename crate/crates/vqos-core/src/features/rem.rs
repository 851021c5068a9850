//! Radio environment map: a geographic grid accumulating per-cell
//! statistics of radio features and throughput, built from training data
//! only.
//!
//! Cells are keyed by position *and* environment regime. What a location
//! delivers depends on the deployment context it is measured under —
//! congestion patterns, scheduler behavior, and link efficiency all differ
//! by regime — so folding visits from different regimes into one mean
//! would blur structurally different distributions into a misleading
//! number. A context-indexed map keeps each entry homogeneous.
//!
//! Every lookup also names the *querying run*, and the map answers as if
//! that run had never contributed. A deployed map is assembled from other,
//! historical drives, so the drive being featurized must not see its own
//! measurements in it — per-cell means of the throughput target would
//! otherwise leak the label into training features (one run typically
//! dominates its own cells, making the leak severe). Aggregates are plain
//! sums, which subtract exactly.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trace::{Env, RadioSample};

/// Default angular grid resolution (~100 m in latitude).
pub const DEFAULT_REM_RESOLUTION_DEG: f64 = 0.001;

/// Quantities mapped per grid cell, in storage order.
pub const REM_QUANTITIES: [&str; 9] = [
    "rsrp",
    "rsrq",
    "rssi",
    "sinr",
    "rsrp_margin",
    "rsrq_margin",
    "t_since_ho",
    "tput_dl",
    "tput_ul",
];

const N_QUANTITIES: usize = REM_QUANTITIES.len();

/// Plain sum/sum-of-squares aggregate over a set of samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Agg {
    count: u64,
    sums: [f64; N_QUANTITIES],
    sumsq: [f64; N_QUANTITIES],
}

impl Agg {
    fn zero() -> Self {
        Agg { count: 0, sums: [0.0; N_QUANTITIES], sumsq: [0.0; N_QUANTITIES] }
    }

    fn push(&mut self, values: &[f64; N_QUANTITIES]) {
        self.count += 1;
        for (q, &v) in values.iter().enumerate() {
            self.sums[q] += v;
            self.sumsq[q] += v * v;
        }
    }

    /// `self` minus `other`; only valid when `other` is a subset of `self`.
    fn minus(&self, other: &Agg) -> Agg {
        let mut out = self.clone();
        out.count -= other.count;
        for q in 0..N_QUANTITIES {
            out.sums[q] -= other.sums[q];
            out.sumsq[q] -= other.sumsq[q];
        }
        out
    }
}

/// Aggregate of one grid cell (or the whole map) with per-run subtotals so
/// any single run's contribution can be subtracted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct CellAgg {
    total: Agg,
    /// Sparse per-run subtotals, sorted by run index.
    per_run: Vec<(u32, Agg)>,
}

impl CellAgg {
    fn new() -> Self {
        CellAgg { total: Agg::zero(), per_run: Vec::new() }
    }

    fn push(&mut self, run: u32, values: &[f64; N_QUANTITIES]) {
        self.total.push(values);
        let slot = match self.per_run.binary_search_by_key(&run, |(r, _)| *r) {
            Ok(i) => i,
            Err(i) => {
                self.per_run.insert(i, (run, Agg::zero()));
                i
            }
        };
        self.per_run[slot].1.push(values);
    }

    /// The aggregate without `run`'s contribution; `None` when nothing else
    /// ever contributed. `run = None` (a run unknown to the map) excludes
    /// nothing.
    fn excluding(&self, run: Option<u32>) -> Option<Agg> {
        let sub = run.and_then(|r| {
            self.per_run.binary_search_by_key(&r, |(x, _)| *x).ok().map(|i| &self.per_run[i].1)
        });
        match sub {
            Some(s) => {
                let rest = self.total.minus(s);
                (rest.count > 0).then_some(rest)
            }
            None => Some(self.total.clone()),
        }
    }
}

/// Statistics of one populated grid cell, as visible to one querying run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellStats {
    count: u64,
    means: [f64; N_QUANTITIES],
    stds: [f64; N_QUANTITIES],
}

impl CellStats {
    fn from_agg(agg: &Agg) -> CellStats {
        let n = agg.count as f64;
        let mut means = [0.0; N_QUANTITIES];
        let mut stds = [0.0; N_QUANTITIES];
        for q in 0..N_QUANTITIES {
            let m = agg.sums[q] / n;
            means[q] = m;
            stds[q] = (agg.sumsq[q] / n - m * m).max(0.0).sqrt();
        }
        CellStats { count: agg.count, means, stds }
    }

    /// Samples behind this view.
    pub fn count(&self) -> u64 {
        self.count
    }

    /// Mean of a quantity (index per [`REM_QUANTITIES`]).
    pub fn mean(&self, quantity: usize) -> f64 {
        self.means[quantity]
    }

    /// Population standard deviation of a quantity.
    pub fn std(&self, quantity: usize) -> f64 {
        self.stds[quantity]
    }
}

/// Geographic grid of radio statistics with a fixed angular resolution.
///
/// Cells are indexed by `floor(lat / resolution), floor(lon / resolution)`
/// plus the environment regime of the visit; unvisited combinations hold no
/// entry and queries on them return `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadioEnvironmentMap {
    resolution_deg: f64,
    /// Contributing run ids, interned to dense indices.
    run_index: BTreeMap<String, u32>,
    /// Populated cells, serialized as a sorted pair list (JSON objects
    /// cannot key on integer pairs).
    #[serde(serialize_with = "ser_cells", deserialize_with = "de_cells")]
    cells: BTreeMap<(i64, i64, Env), CellAgg>,
    /// Per-regime aggregates (imputation fallback for unvisited cells).
    env_global: BTreeMap<Env, CellAgg>,
    /// Map-wide aggregate (last-resort fallback).
    global: CellAgg,
}

fn ser_cells<S>(
    cells: &BTreeMap<(i64, i64, Env), CellAgg>,
    s: S,
) -> std::result::Result<S::Ok, S::Error>
where
    S: serde::Serializer,
{
    let entries: Vec<(&(i64, i64, Env), &CellAgg)> = cells.iter().collect();
    serde::Serialize::serialize(&entries, s)
}

fn de_cells<'de, D>(d: D) -> std::result::Result<BTreeMap<(i64, i64, Env), CellAgg>, D::Error>
where
    D: serde::Deserializer<'de>,
{
    let entries: Vec<((i64, i64, Env), CellAgg)> = serde::Deserialize::deserialize(d)?;
    Ok(entries.into_iter().collect())
}

impl RadioEnvironmentMap {
    /// Build a map from `(run id, sample)` pairs (the training rows).
    pub fn build<'a, I>(samples: I, resolution_deg: f64) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a str, &'a RadioSample)>,
    {
        if !(resolution_deg.is_finite() && resolution_deg > 0.0) {
            return Err(Error::invalid("REM resolution must be finite and > 0"));
        }
        let mut map = RadioEnvironmentMap {
            resolution_deg,
            run_index: BTreeMap::new(),
            cells: BTreeMap::new(),
            env_global: BTreeMap::new(),
            global: CellAgg::new(),
        };
        for (run_id, s) in samples {
            let next = map.run_index.len() as u32;
            let run = *map.run_index.entry(run_id.to_string()).or_insert(next);
            let key = map.key_for(s.lat, s.lon, s.env);
            let quantities = Self::quantities_of(s);
            map.cells.entry(key).or_insert_with(CellAgg::new).push(run, &quantities);
            map.env_global.entry(s.env).or_insert_with(CellAgg::new).push(run, &quantities);
            map.global.push(run, &quantities);
        }
        Ok(map)
    }

    fn quantities_of(s: &RadioSample) -> [f64; N_QUANTITIES] {
        [
            s.rsrp_dbm,
            s.rsrq_db,
            s.rssi_dbm,
            s.sinr_db,
            s.rsrp_margin_db,
            s.rsrq_margin_db,
            s.t_since_ho_s,
            s.tput_dl_mbps,
            s.tput_ul_mbps,
        ]
    }

    fn key_for(&self, lat: f64, lon: f64, env: Env) -> (i64, i64, Env) {
        (
            (lat / self.resolution_deg).floor() as i64,
            (lon / self.resolution_deg).floor() as i64,
            env,
        )
    }

    pub fn resolution_deg(&self) -> f64 {
        self.resolution_deg
    }

    /// Number of populated grid cells.
    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    /// Total samples folded into the map.
    pub fn n_samples(&self) -> u64 {
        self.global.total.count
    }

    /// Statistics of the cell containing a position in regime `env`, as
    /// visible to `querying_run`: that run's own contribution is
    /// subtracted, and a cell only it visited reads as missing. Runs
    /// unknown to the map see every cell in full.
    pub fn lookup(&self, lat: f64, lon: f64, env: Env, querying_run: &str) -> Option<CellStats> {
        let run = self.run_index.get(querying_run).copied();
        let agg = self.cells.get(&self.key_for(lat, lon, env))?.excluding(run)?;
        Some(CellStats::from_agg(&agg))
    }

    /// Regime-wide statistics as visible to `querying_run` (imputation
    /// fallback for unvisited cells); `None` for a regime the map never
    /// saw, or one fed only by the querying run.
    pub fn global_env(&self, env: Env, querying_run: &str) -> Option<CellStats> {
        let run = self.run_index.get(querying_run).copied();
        self.env_global.get(&env)?.excluding(run).map(|agg| CellStats::from_agg(&agg))
    }

    /// Map-wide statistics as visible to `querying_run` (imputation
    /// fallback); `None` when that run contributed every sample.
    pub fn global(&self, querying_run: &str) -> Option<CellStats> {
        let run = self.run_index.get(querying_run).copied();
        self.global.excluding(run).map(|agg| CellStats::from_agg(&agg))
    }

    /// Map-wide statistics over all contributors (last-resort fallback when
    /// the querying run is the map's sole contributor).
    pub fn global_unfiltered(&self) -> CellStats {
        CellStats::from_agg(&self.global.total)
    }

    /// Index of a quantity name in [`REM_QUANTITIES`].
    pub fn quantity_index(name: &str) -> Result<usize> {
        REM_QUANTITIES
            .iter()
            .position(|q| *q == name)
            .ok_or_else(|| Error::Column(name.to_string()))
    }
}
