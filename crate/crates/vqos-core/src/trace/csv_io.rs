//! Trace CSV and cell-site sidecar serialization.
//!
//! The trace schema is a fixed 26-column CSV (UTF-8, `.` decimal,
//! newline-terminated rows) with one row per sample; rows carry the run
//! metadata so files are self-contained and round-trip losslessly.

use std::collections::HashMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::trace::{CellSite, DeviceGrade, Direction, Env, MeasurementRun, Protocol, RadioSample};

/// The exact trace CSV header.
pub const TRACE_HEADER: [&str; 26] = [
    "run_id",
    "device_id",
    "device_grade",
    "direction",
    "t_ms",
    "lat",
    "lon",
    "speed_kmh",
    "env",
    "rsrp_dbm",
    "rsrq_db",
    "rssi_dbm",
    "sinr_db",
    "cqi",
    "rank",
    "rsrp_margin_db",
    "rsrq_margin_db",
    "t_since_ho_s",
    "cell_id",
    "cell_load",
    "active_ues",
    "cell_tput_dl_mbps",
    "cell_tput_ul_mbps",
    "tput_dl_mbps",
    "tput_ul_mbps",
    "protocol",
];

/// Serialize runs to trace CSV.
pub fn save_csv<W: Write>(runs: &[MeasurementRun], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_HEADER)?;
    for run in runs {
        for s in &run.samples {
            w.write_record([
                run.run_id.as_str(),
                run.device_id.as_str(),
                run.device_grade.as_str(),
                run.direction.as_str(),
                &s.t_ms.to_string(),
                &s.lat.to_string(),
                &s.lon.to_string(),
                &s.speed_kmh.to_string(),
                s.env.as_str(),
                &s.rsrp_dbm.to_string(),
                &s.rsrq_db.to_string(),
                &s.rssi_dbm.to_string(),
                &s.sinr_db.to_string(),
                &s.cqi.to_string(),
                &s.rank.to_string(),
                &s.rsrp_margin_db.to_string(),
                &s.rsrq_margin_db.to_string(),
                &s.t_since_ho_s.to_string(),
                &s.cell_id.to_string(),
                &s.cell_load.to_string(),
                &s.active_ues.to_string(),
                &s.cell_tput_dl_mbps.to_string(),
                &s.cell_tput_ul_mbps.to_string(),
                &s.tput_dl_mbps.to_string(),
                &s.tput_ul_mbps.to_string(),
                s.protocol.as_str(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Serialize runs to a trace CSV file.
pub fn save_csv_path(runs: &[MeasurementRun], path: impl AsRef<Path>) -> Result<()> {
    save_csv(runs, File::create(path)?)
}

fn parse_f64(field: &str, column: &str) -> Result<f64> {
    field
        .parse::<f64>()
        .map_err(|_| Error::Column(column.to_string()))
}

fn parse_int<T: std::str::FromStr>(field: &str, column: &str) -> Result<T> {
    field
        .parse::<T>()
        .map_err(|_| Error::Column(column.to_string()))
}

/// Parse a trace CSV: rows grouped by `run_id` (groups in first-appearance
/// order), strictly increasing `t_ms` within each run, consistent per-run
/// metadata. A header-only file yields an empty list.
pub fn load_csv<R: Read>(input: R) -> Result<Vec<MeasurementRun>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = reader.headers()?.clone();
    let mut col: HashMap<&str, usize> = HashMap::new();
    for (i, name) in header.iter().enumerate() {
        col.insert(name, i);
    }
    let mut idx = [0usize; 26];
    for (k, name) in TRACE_HEADER.iter().enumerate() {
        idx[k] = col
            .get(name)
            .copied()
            .ok_or_else(|| Error::Column((*name).to_string()))?;
    }
    let get = |record: &csv::StringRecord, k: usize| -> String {
        record.get(idx[k]).unwrap_or("").to_string()
    };

    let mut order: Vec<String> = Vec::new();
    let mut runs: HashMap<String, MeasurementRun> = HashMap::new();
    for record in reader.records() {
        let record = record?;
        let run_id = get(&record, 0);
        let device_id = get(&record, 1);
        let device_grade: DeviceGrade = get(&record, 2).parse()?;
        let direction: Direction = get(&record, 3).parse()?;
        let sample = RadioSample {
            t_ms: parse_int(&get(&record, 4), "t_ms")?,
            lat: parse_f64(&get(&record, 5), "lat")?,
            lon: parse_f64(&get(&record, 6), "lon")?,
            speed_kmh: parse_f64(&get(&record, 7), "speed_kmh")?,
            env: get(&record, 8).parse::<Env>()?,
            rsrp_dbm: parse_f64(&get(&record, 9), "rsrp_dbm")?,
            rsrq_db: parse_f64(&get(&record, 10), "rsrq_db")?,
            rssi_dbm: parse_f64(&get(&record, 11), "rssi_dbm")?,
            sinr_db: parse_f64(&get(&record, 12), "sinr_db")?,
            cqi: parse_int(&get(&record, 13), "cqi")?,
            rank: parse_int(&get(&record, 14), "rank")?,
            rsrp_margin_db: parse_f64(&get(&record, 15), "rsrp_margin_db")?,
            rsrq_margin_db: parse_f64(&get(&record, 16), "rsrq_margin_db")?,
            t_since_ho_s: parse_f64(&get(&record, 17), "t_since_ho_s")?,
            cell_id: parse_int(&get(&record, 18), "cell_id")?,
            cell_load: parse_f64(&get(&record, 19), "cell_load")?,
            active_ues: parse_int(&get(&record, 20), "active_ues")?,
            cell_tput_dl_mbps: parse_f64(&get(&record, 21), "cell_tput_dl_mbps")?,
            cell_tput_ul_mbps: parse_f64(&get(&record, 22), "cell_tput_ul_mbps")?,
            tput_dl_mbps: parse_f64(&get(&record, 23), "tput_dl_mbps")?,
            tput_ul_mbps: parse_f64(&get(&record, 24), "tput_ul_mbps")?,
            protocol: get(&record, 25).parse::<Protocol>()?,
        };
        match runs.get_mut(&run_id) {
            None => {
                order.push(run_id.clone());
                runs.insert(
                    run_id.clone(),
                    MeasurementRun {
                        run_id,
                        device_id,
                        device_grade,
                        direction,
                        sample_period_s: 1.0,
                        samples: vec![sample],
                    },
                );
            }
            Some(run) => {
                if run.device_id != device_id
                    || run.device_grade != device_grade
                    || run.direction != direction
                {
                    return Err(Error::Schema(format!(
                        "run {run_id:?} has inconsistent metadata across rows"
                    )));
                }
                let last_t = run.samples.last().map(|s| s.t_ms).unwrap_or(0);
                if sample.t_ms <= last_t {
                    return Err(Error::Ordering(format!(
                        "run {run_id:?}: t_ms {} not greater than previous {last_t}",
                        sample.t_ms
                    )));
                }
                run.samples.push(sample);
            }
        }
    }

    let mut out = Vec::with_capacity(order.len());
    for run_id in order {
        let mut run = runs.remove(&run_id).expect("run present by construction");
        run.sample_period_s = infer_period_s(&run);
        out.push(run);
    }
    Ok(out)
}

/// Parse a trace CSV file.
pub fn load_csv_path(path: impl AsRef<Path>) -> Result<Vec<MeasurementRun>> {
    load_csv(File::open(path)?)
}

/// Median inter-sample gap in seconds (1.0 for runs with < 2 samples).
fn infer_period_s(run: &MeasurementRun) -> f64 {
    if run.samples.len() < 2 {
        return 1.0;
    }
    let mut gaps: Vec<u64> = run
        .samples
        .windows(2)
        .map(|w| w[1].t_ms - w[0].t_ms)
        .collect();
    gaps.sort_unstable();
    gaps[gaps.len() / 2] as f64 / 1000.0
}

/// Write the cell-site sidecar: a JSON array of `{cell_id, lat, lon}`
/// records sorted by `cell_id`.
pub fn save_cell_sites<W: Write>(sites: &[CellSite], mut out: W) -> Result<()> {
    let mut sorted: Vec<CellSite> = sites.to_vec();
    sorted.sort_by_key(|c| c.cell_id);
    let json = serde_json::to_string_pretty(&sorted)?;
    out.write_all(json.as_bytes())?;
    out.write_all(b"\n")?;
    Ok(())
}

/// Read the cell-site sidecar.
pub fn load_cell_sites<R: Read>(mut input: R) -> Result<Vec<CellSite>> {
    let mut buf = String::new();
    input.read_to_string(&mut buf)?;
    Ok(serde_json::from_str(&buf)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_runs() -> Vec<MeasurementRun> {
        let mk = |t_ms: u64, sinr: f64| RadioSample {
            t_ms,
            lat: 51.123456,
            lon: 7.654321,
            speed_kmh: 88.25,
            env: Env::Highway,
            rsrp_dbm: -97.5,
            rsrq_db: -11.25,
            rssi_dbm: -70.125,
            sinr_db: sinr,
            cqi: 9,
            rank: 2,
            rsrp_margin_db: 3.5,
            rsrq_margin_db: 1.75,
            t_since_ho_s: 4.0,
            cell_id: 12,
            cell_load: 0.35,
            active_ues: 3,
            cell_tput_dl_mbps: 95.5,
            cell_tput_ul_mbps: 31.0,
            tput_dl_mbps: 41.0625,
            tput_ul_mbps: 12.5,
            protocol: Protocol::Udp,
        };
        vec![
            MeasurementRun {
                run_id: "run00".into(),
                device_id: "dev0".into(),
                device_grade: DeviceGrade::Dme,
                direction: Direction::Dl,
                sample_period_s: 1.0,
                samples: vec![mk(0, 7.5), mk(1000, 8.0), mk(2000, 6.25)],
            },
            MeasurementRun {
                run_id: "run01".into(),
                device_id: "dev1".into(),
                device_grade: DeviceGrade::Ce,
                direction: Direction::Ul,
                sample_period_s: 1.0,
                samples: vec![mk(0, 1.5), mk(1000, 2.5)],
            },
        ]
    }

    #[test]
    fn round_trip_is_lossless() {
        let runs = toy_runs();
        let mut buf = Vec::new();
        save_csv(&runs, &mut buf).unwrap();
        let loaded = load_csv(buf.as_slice()).unwrap();
        assert_eq!(runs, loaded);
    }

    #[test]
    fn header_only_file_is_empty_ok() {
        let csv = TRACE_HEADER.join(",") + "\n";
        let loaded = load_csv(csv.as_bytes()).unwrap();
        assert!(loaded.is_empty());
    }

    #[test]
    fn missing_column_is_named() {
        let mut cols: Vec<&str> = TRACE_HEADER.to_vec();
        cols.retain(|c| *c != "sinr_db");
        let csv = cols.join(",") + "\n";
        match load_csv(csv.as_bytes()) {
            Err(Error::Column(c)) => assert_eq!(c, "sinr_db"),
            other => panic!("expected named-column error, got {other:?}"),
        }
    }

    #[test]
    fn non_monotone_time_is_ordering_error() {
        let runs = toy_runs();
        let mut buf = Vec::new();
        save_csv(&runs, &mut buf).unwrap();
        let mut text = String::from_utf8(buf).unwrap();
        // Duplicate the second data row (same t_ms for run00).
        let second_row = text.lines().nth(2).unwrap().to_string();
        let insert_at = text.find(&second_row).unwrap() + second_row.len() + 1;
        text.insert_str(insert_at, &(second_row.clone() + "\n"));
        assert!(matches!(load_csv(text.as_bytes()), Err(Error::Ordering(_))));
    }

    #[test]
    fn cell_sites_round_trip_sorted() {
        let sites = vec![
            CellSite { cell_id: 5, lat: 51.1, lon: 7.2 },
            CellSite { cell_id: 1, lat: 51.0, lon: 7.0 },
        ];
        let mut buf = Vec::new();
        save_cell_sites(&sites, &mut buf).unwrap();
        let loaded = load_cell_sites(buf.as_slice()).unwrap();
        assert_eq!(loaded.len(), 2);
        assert_eq!(loaded[0].cell_id, 1);
        assert_eq!(loaded[1].cell_id, 5);
    }
}
