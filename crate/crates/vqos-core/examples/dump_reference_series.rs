//! Dumps the seeded reference series used by the stationarity test
//! fixtures as CSV files, so they can be cross-checked against other
//! statistics packages.

use std::io::Write;

use vqos_core::stationarity::{ar1_series, gaussian_series, random_walk_series};

fn main() {
    let out_dir = std::env::args().nth(1).unwrap_or_else(|| "/tmp/ref_series".into());
    std::fs::create_dir_all(&out_dir).unwrap();
    // (name, series, max_lag)
    let fixtures: Vec<(&str, Vec<f64>, usize)> = vec![
        ("wn_120", gaussian_series(11, 120), 4),
        ("wn_250", gaussian_series(12, 250), 6),
        ("wn_500", gaussian_series(13, 500), 8),
        ("wn_800", gaussian_series(14, 800), 10),
        ("rw_200", random_walk_series(21, 200), 5),
        ("rw_500", random_walk_series(22, 500), 8),
        ("rw_600", random_walk_series(23, 600), 9),
        ("ar_07_400", ar1_series(31, 400, 0.7, 1.0, 0.0), 8),
        ("ar_09_500", ar1_series(32, 500, 0.9, 1.0, 0.0), 10),
        ("ar_05_m50_300", ar1_series(33, 300, 0.5, 2.0, 50.0), 6),
    ];
    for (name, series, max_lag) in &fixtures {
        let path = format!("{out_dir}/{name}.csv");
        let mut f = std::fs::File::create(&path).unwrap();
        writeln!(f, "# max_lag={max_lag}").unwrap();
        for v in series {
            writeln!(f, "{v:.17e}").unwrap();
        }
        println!("{path}");
    }
}
