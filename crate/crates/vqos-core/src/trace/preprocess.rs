//! Trace preprocessing: protocol filtering and removal of parked stretches.

use crate::trace::{MeasurementRun, Protocol};

/// Default minimum speed below which a sample counts as stationary (km/h).
pub const DEFAULT_MIN_SPEED_KMH: f64 = 2.0;
/// Default minimum duration a slow stretch must last to be excised (s).
pub const DEFAULT_MIN_PARK_DURATION_S: f64 = 60.0;

/// Drops non-UDP samples, then excises every contiguous stretch of samples
/// slower than `min_speed_kmh` that lasts at least `min_park_duration_s`.
/// Runs left empty are removed. Surviving samples keep their original order
/// and timestamps (excisions leave gaps in `t_ms`).
pub fn preprocess(
    runs: &[MeasurementRun],
    min_speed_kmh: f64,
    min_park_duration_s: f64,
) -> Vec<MeasurementRun> {
    runs.iter()
        .filter_map(|run| {
            let mut kept = run.clone();
            kept.samples.retain(|s| s.protocol == Protocol::Udp);
            excise_parked(&mut kept, min_speed_kmh, min_park_duration_s);
            if kept.samples.is_empty() {
                None
            } else {
                Some(kept)
            }
        })
        .collect()
}

fn excise_parked(run: &mut MeasurementRun, min_speed_kmh: f64, min_park_duration_s: f64) {
    let n = run.samples.len();
    if n == 0 {
        return;
    }
    let period = run.sample_period_s;
    let mut drop = vec![false; n];
    let mut i = 0;
    while i < n {
        if run.samples[i].speed_kmh < min_speed_kmh {
            let start = i;
            while i < n && run.samples[i].speed_kmh < min_speed_kmh {
                i += 1;
            }
            let end = i; // exclusive
            // Inclusive span: gap between endpoints plus one sample period,
            // so a single slow sample counts as one period long.
            let span_s = (run.samples[end - 1].t_ms - run.samples[start].t_ms) as f64 / 1000.0
                + period;
            if span_s >= min_park_duration_s {
                for flag in &mut drop[start..end] {
                    *flag = true;
                }
            }
        } else {
            i += 1;
        }
    }
    let mut keep_iter = drop.into_iter();
    run.samples.retain(|_| !keep_iter.next().unwrap());
}
