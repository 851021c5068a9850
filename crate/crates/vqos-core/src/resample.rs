//! Sampling-interval analysis: averaging downsample, forward-fill
//! reconstruction, reconstruction error, and speed-binned error statistics.
//!
//! For an original series `x_o` of length `K` and a downsampling ratio `M`:
//!
//! * downsample: `x_ds(k') = mean(x_o[k'M .. k'M + M))` (trailing partial
//!   block averaged over its actual length),
//! * reconstruct: `x_rs(k) = x_ds(floor(k / M))`,
//! * reconstruction error: `RE(k) = x_o(k) − x_rs(k)`, which collapses to
//!   the closed form `RE(k) = (1/M) Σ_m [x_o(k) − x_o(m + k − (k mod M))]`
//!   — the deviation of each sample from its block mean.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::trace::{column_series, MeasurementRun};

/// Result of one resampling experiment on one series.
#[derive(Debug, Clone, PartialEq)]
pub struct ResampleResult {
    /// Downsampling ratio (samples per block).
    pub m: usize,
    /// Original series.
    pub x_o: Vec<f64>,
    /// Block-averaged series, length `ceil(K / M)`.
    pub x_ds: Vec<f64>,
    /// Forward-fill reconstruction, length `K`.
    pub x_rs: Vec<f64>,
    /// Reconstruction error `x_o − x_rs`, length `K`.
    pub re: Vec<f64>,
}

/// Speed bin layout: [0, 140) km/h in 5 km/h steps.
pub const SPEED_BIN_WIDTH_KMH: f64 = 5.0;
pub const SPEED_BIN_MAX_KMH: f64 = 140.0;
pub const N_SPEED_BINS: usize = (SPEED_BIN_MAX_KMH / SPEED_BIN_WIDTH_KMH) as usize;

/// Per-speed-bin absolute reconstruction error statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeedBinnedError {
    /// Lower edge of each bin in km/h (0, 5, …, 135).
    pub bin_lo_kmh: Vec<f64>,
    /// Mean |RE| per bin; `None` where the bin is empty.
    pub mae: Vec<Option<f64>>,
    /// 25th percentile of |RE| per bin.
    pub p25: Vec<Option<f64>>,
    /// 75th percentile of |RE| per bin.
    pub p75: Vec<Option<f64>>,
    /// Number of samples per bin.
    pub count: Vec<usize>,
}

/// Block-average downsampling.
pub fn downsample(x_o: &[f64], m: usize) -> Result<Vec<f64>> {
    if m < 1 {
        return Err(Error::invalid("downsampling ratio M must be >= 1"));
    }
    if x_o.is_empty() {
        return Err(Error::invalid("cannot downsample an empty series"));
    }
    Ok(x_o
        .chunks(m)
        .map(|block| block.iter().sum::<f64>() / block.len() as f64)
        .collect())
}

/// Forward-fill reconstruction to length `k`.
pub fn reconstruct(x_ds: &[f64], m: usize, k: usize) -> Result<Vec<f64>> {
    if m < 1 {
        return Err(Error::invalid("downsampling ratio M must be >= 1"));
    }
    let expected = k.div_ceil(m);
    if x_ds.len() != expected {
        return Err(Error::invalid(format!(
            "inconsistent lengths: {} downsampled values cannot cover {k} samples at M={m} (need {expected})",
            x_ds.len()
        )));
    }
    Ok((0..k).map(|i| x_ds[i / m]).collect())
}

/// Downsample + reconstruct + error, cross-checked against the closed-form
/// block-mean deviation to 1e-12.
pub fn reconstruction_error(x_o: &[f64], m: usize) -> Result<ResampleResult> {
    let x_ds = downsample(x_o, m)?;
    let x_rs = reconstruct(&x_ds, m, x_o.len())?;
    let re: Vec<f64> = x_o.iter().zip(&x_rs).map(|(o, r)| o - r).collect();

    // Closed form: each sample minus the mean of its block.
    for (k, &err) in re.iter().enumerate() {
        let start = k - (k % m);
        let block = &x_o[start..(start + m).min(x_o.len())];
        let closed = x_o[k] - block.iter().sum::<f64>() / block.len() as f64;
        if (err - closed).abs() > 1e-12 {
            return Err(Error::NonFinite(format!(
                "pipeline and closed-form reconstruction error disagree at k={k}: {err} vs {closed}"
            )));
        }
    }

    Ok(ResampleResult { m, x_o: x_o.to_vec(), x_ds, x_rs, re })
}

/// Downsample a whole run at ratio `m`: each block of `m` consecutive
/// samples collapses to one sample carrying the block means (continuous
/// fields), rounded means (discrete counts), and the block's final
/// regime and serving cell. The new sample keeps the block's first
/// timestamp and the run's nominal period is scaled by `m`.
pub fn downsample_run(run: &MeasurementRun, m: usize) -> Result<MeasurementRun> {
    if m < 1 {
        return Err(Error::invalid("downsampling ratio M must be >= 1"));
    }
    if run.samples.is_empty() {
        return Err(Error::invalid("cannot downsample an empty run"));
    }
    if m == 1 {
        return Ok(run.clone());
    }
    let samples = run
        .samples
        .chunks(m)
        .map(|block| {
            let n = block.len() as f64;
            let mean = |f: fn(&crate::trace::RadioSample) -> f64| {
                block.iter().map(f).sum::<f64>() / n
            };
            let last = block.last().expect("non-empty block");
            crate::trace::RadioSample {
                t_ms: block[0].t_ms,
                lat: mean(|s| s.lat),
                lon: mean(|s| s.lon),
                speed_kmh: mean(|s| s.speed_kmh),
                env: last.env,
                rsrp_dbm: mean(|s| s.rsrp_dbm),
                rsrq_db: mean(|s| s.rsrq_db),
                rssi_dbm: mean(|s| s.rssi_dbm),
                sinr_db: mean(|s| s.sinr_db),
                cqi: mean(|s| f64::from(s.cqi)).round().clamp(0.0, 15.0) as u8,
                rank: mean(|s| f64::from(s.rank)).round().clamp(1.0, 2.0) as u8,
                rsrp_margin_db: mean(|s| s.rsrp_margin_db),
                rsrq_margin_db: mean(|s| s.rsrq_margin_db),
                t_since_ho_s: mean(|s| s.t_since_ho_s),
                cell_id: last.cell_id,
                cell_load: mean(|s| s.cell_load),
                active_ues: mean(|s| f64::from(s.active_ues)).round().max(0.0) as u32,
                cell_tput_dl_mbps: mean(|s| s.cell_tput_dl_mbps),
                cell_tput_ul_mbps: mean(|s| s.cell_tput_ul_mbps),
                tput_dl_mbps: mean(|s| s.tput_dl_mbps),
                tput_ul_mbps: mean(|s| s.tput_ul_mbps),
                protocol: block[0].protocol,
            }
        })
        .collect();
    Ok(MeasurementRun {
        run_id: run.run_id.clone(),
        device_id: run.device_id.clone(),
        device_grade: run.device_grade,
        direction: run.direction,
        sample_period_s: run.sample_period_s * m as f64,
        samples,
    })
}

/// Index of the speed bin for `speed_kmh`, or `None` outside [0, 140).
fn speed_bin(speed_kmh: f64) -> Option<usize> {
    if !(0.0..SPEED_BIN_MAX_KMH).contains(&speed_kmh) {
        return None;
    }
    Some((speed_kmh / SPEED_BIN_WIDTH_KMH) as usize)
}

/// Linear-interpolation percentile of a sorted slice (q in [0, 1]).
fn percentile_sorted(sorted: &[f64], q: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    if sorted.len() == 1 {
        return sorted[0];
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Speed-binned mean |RE| with interquartile range, aggregated over runs.
/// Each run's named feature series is resampled independently at ratio `m`;
/// absolute errors land in the 5 km/h bin of their sample's speed.
pub fn speed_binned_mae(
    runs: &[MeasurementRun],
    feature: &str,
    m: usize,
) -> Result<SpeedBinnedError> {
    let per_run: Vec<(Vec<f64>, Vec<f64>)> = runs
        .par_iter()
        .map(|run| -> Result<(Vec<f64>, Vec<f64>)> {
            let series = column_series(run, feature)?;
            if series.is_empty() {
                return Ok((Vec::new(), Vec::new()));
            }
            let rr = reconstruction_error(&series, m)?;
            let speeds = run.samples.iter().map(|s| s.speed_kmh).collect();
            Ok((rr.re, speeds))
        })
        .collect::<Result<_>>()?;

    let mut bins: Vec<Vec<f64>> = vec![Vec::new(); N_SPEED_BINS];
    for (re, speeds) in &per_run {
        for (err, speed) in re.iter().zip(speeds) {
            if let Some(b) = speed_bin(*speed) {
                bins[b].push(err.abs());
            }
        }
    }

    let mut out = SpeedBinnedError {
        bin_lo_kmh: (0..N_SPEED_BINS).map(|b| b as f64 * SPEED_BIN_WIDTH_KMH).collect(),
        mae: vec![None; N_SPEED_BINS],
        p25: vec![None; N_SPEED_BINS],
        p75: vec![None; N_SPEED_BINS],
        count: vec![0; N_SPEED_BINS],
    };
    for (b, vals) in bins.iter_mut().enumerate() {
        out.count[b] = vals.len();
        if vals.is_empty() {
            continue;
        }
        vals.sort_by(|a, b| a.partial_cmp(b).expect("finite |RE|"));
        out.mae[b] = Some(vals.iter().sum::<f64>() / vals.len() as f64);
        out.p25[b] = Some(percentile_sorted(vals, 0.25));
        out.p75[b] = Some(percentile_sorted(vals, 0.75));
    }
    Ok(out)
}
