//! Domain types for vehicular radio traces.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub mod csv_io;
pub mod generate;
pub mod preprocess;

pub use generate::{
    cell_sites, generate, EnvProfile, EnvProfiles, GeneratorConfig, LoadProcess, PhyParams,
    RegimeSegment, TargetNoise,
};

/// Radio environment regime of a stretch of road.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Env {
    Highway,
    Suburban,
    Rural,
}

impl Env {
    pub const ALL: [Env; 3] = [Env::Highway, Env::Suburban, Env::Rural];

    pub fn as_str(self) -> &'static str {
        match self {
            Env::Highway => "highway",
            Env::Suburban => "suburban",
            Env::Rural => "rural",
        }
    }
}

impl fmt::Display for Env {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Env {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "highway" => Ok(Env::Highway),
            "suburban" => Ok(Env::Suburban),
            "rural" => Ok(Env::Rural),
            other => Err(Error::invalid(format!("unknown env {other:?}"))),
        }
    }
}

/// Traffic direction a run measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Dl,
    Ul,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Dl => "dl",
            Direction::Ul => "ul",
        }
    }

    /// Name of the per-device throughput column this direction predicts.
    pub fn target_column(self) -> &'static str {
        match self {
            Direction::Dl => "tput_dl",
            Direction::Ul => "tput_ul",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Direction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dl" => Ok(Direction::Dl),
            "ul" => Ok(Direction::Ul),
            other => Err(Error::invalid(format!("unknown direction {other:?}"))),
        }
    }
}

/// Measurement-device quality grade: dedicated measurement equipment
/// (`dme`, high granularity) or consumer-grade terminal (`ce`, noisier).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeviceGrade {
    Dme,
    Ce,
}

impl DeviceGrade {
    pub fn as_str(self) -> &'static str {
        match self {
            DeviceGrade::Dme => "dme",
            DeviceGrade::Ce => "ce",
        }
    }
}

impl fmt::Display for DeviceGrade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DeviceGrade {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dme" => Ok(DeviceGrade::Dme),
            "ce" => Ok(DeviceGrade::Ce),
            other => Err(Error::invalid(format!("unknown device grade {other:?}"))),
        }
    }
}

/// Transport protocol of the traffic sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    Udp,
    Tcp,
}

impl Protocol {
    pub fn as_str(self) -> &'static str {
        match self {
            Protocol::Udp => "udp",
            Protocol::Tcp => "tcp",
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Protocol {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "udp" => Ok(Protocol::Udp),
            "tcp" => Ok(Protocol::Tcp),
            other => Err(Error::invalid(format!("unknown protocol {other:?}"))),
        }
    }
}

/// One time instant of a measurement drive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadioSample {
    /// Milliseconds since run start; strictly increasing within a run.
    pub t_ms: u64,
    pub lat: f64,
    pub lon: f64,
    pub speed_kmh: f64,
    pub env: Env,
    pub rsrp_dbm: f64,
    pub rsrq_db: f64,
    pub rssi_dbm: f64,
    pub sinr_db: f64,
    /// Channel quality indicator, 0–15.
    pub cqi: u8,
    /// Spatial multiplexing rank, 1–2.
    pub rank: u8,
    /// Gap to the second-best cell's RSRP (dB).
    pub rsrp_margin_db: f64,
    /// Gap to the second-best cell's RSRQ (dB).
    pub rsrq_margin_db: f64,
    /// Seconds since the last handover.
    pub t_since_ho_s: f64,
    pub cell_id: u32,
    /// Fraction of the serving cell's resources in use, 0–1.
    pub cell_load: f64,
    pub active_ues: u32,
    pub cell_tput_dl_mbps: f64,
    pub cell_tput_ul_mbps: f64,
    /// Per-device downlink throughput target, Mbit/s in [0, 70].
    pub tput_dl_mbps: f64,
    /// Per-device uplink throughput target, Mbit/s in [0, 23].
    pub tput_ul_mbps: f64,
    pub protocol: Protocol,
}

/// An ordered, timestamped sequence of samples plus run metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRun {
    pub run_id: String,
    pub device_id: String,
    pub device_grade: DeviceGrade,
    pub direction: Direction,
    /// Nominal sampling period in seconds.
    pub sample_period_s: f64,
    pub samples: Vec<RadioSample>,
}

impl MeasurementRun {
    /// Duration covered by the samples, in seconds (0 for < 2 samples).
    pub fn duration_s(&self) -> f64 {
        match (self.samples.first(), self.samples.last()) {
            (Some(a), Some(b)) => (b.t_ms.saturating_sub(a.t_ms)) as f64 / 1000.0,
            _ => 0.0,
        }
    }

    /// Checks structural invariants: strictly increasing timestamps and
    /// in-range bounded fields.
    pub fn validate(&self) -> Result<()> {
        let mut prev: Option<u64> = None;
        for (i, s) in self.samples.iter().enumerate() {
            if let Some(p) = prev {
                if s.t_ms <= p {
                    return Err(Error::Ordering(format!(
                        "run {:?}: t_ms not strictly increasing at sample {i} ({} after {p})",
                        self.run_id, s.t_ms
                    )));
                }
            }
            prev = Some(s.t_ms);
            if !(0.0..=1.0).contains(&s.cell_load) {
                return Err(Error::invalid(format!(
                    "run {:?}: cell_load {} out of [0,1] at sample {i}",
                    self.run_id, s.cell_load
                )));
            }
            if s.speed_kmh < 0.0 {
                return Err(Error::invalid(format!(
                    "run {:?}: negative speed at sample {i}",
                    self.run_id
                )));
            }
            if s.cqi > 15 {
                return Err(Error::invalid(format!(
                    "run {:?}: cqi {} out of [0,15] at sample {i}",
                    self.run_id, s.cqi
                )));
            }
        }
        Ok(())
    }

    /// Slice the run into maximal contiguous same-regime stretches, each
    /// returned as its own run (metadata preserved, ids suffixed `#sN`).
    /// Useful for training and testing within or across single regimes.
    pub fn env_segments(&self) -> Vec<MeasurementRun> {
        let mut segments = Vec::new();
        let mut start = 0;
        for i in 1..=self.samples.len() {
            if i == self.samples.len() || self.samples[i].env != self.samples[start].env {
                segments.push(MeasurementRun {
                    run_id: format!("{}#s{}", self.run_id, segments.len()),
                    device_id: self.device_id.clone(),
                    device_grade: self.device_grade,
                    direction: self.direction,
                    sample_period_s: self.sample_period_s,
                    samples: self.samples[start..i].to_vec(),
                });
                start = i;
            }
        }
        segments
    }
}

/// A base-station site position, shipped as a sidecar with generated traces
/// so distance features can be engineered from the serving cell id.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellSite {
    pub cell_id: u32,
    pub lat: f64,
    pub lon: f64,
}

/// Numeric per-sample columns addressable by name. These are the raw trace
/// columns; engineered columns (e.g. `dist_to_cell`, REM lookups) are added
/// at feature-assembly time.
pub const SAMPLE_COLUMNS: [&str; 19] = [
    "lat",
    "lon",
    "speed",
    "rsrp",
    "rsrq",
    "rssi",
    "sinr",
    "cqi",
    "rank",
    "rsrp_margin",
    "rsrq_margin",
    "t_since_ho",
    "cell_id",
    "cell_load",
    "active_ues",
    "cell_tput_dl",
    "cell_tput_ul",
    "tput_dl",
    "tput_ul",
];

/// Extract one named numeric column from a sample.
pub fn sample_value(s: &RadioSample, column: &str) -> Result<f64> {
    Ok(match column {
        "lat" => s.lat,
        "lon" => s.lon,
        "speed" => s.speed_kmh,
        "rsrp" => s.rsrp_dbm,
        "rsrq" => s.rsrq_db,
        "rssi" => s.rssi_dbm,
        "sinr" => s.sinr_db,
        "cqi" => f64::from(s.cqi),
        "rank" => f64::from(s.rank),
        "rsrp_margin" => s.rsrp_margin_db,
        "rsrq_margin" => s.rsrq_margin_db,
        "t_since_ho" => s.t_since_ho_s,
        "cell_id" => f64::from(s.cell_id),
        "cell_load" => s.cell_load,
        "active_ues" => f64::from(s.active_ues),
        "cell_tput_dl" => s.cell_tput_dl_mbps,
        "cell_tput_ul" => s.cell_tput_ul_mbps,
        "tput_dl" => s.tput_dl_mbps,
        "tput_ul" => s.tput_ul_mbps,
        other => return Err(Error::Column(other.to_string())),
    })
}

/// Extract a named column of a whole run as a vector.
pub fn column_series(run: &MeasurementRun, column: &str) -> Result<Vec<f64>> {
    run.samples.iter().map(|s| sample_value(s, column)).collect()
}
