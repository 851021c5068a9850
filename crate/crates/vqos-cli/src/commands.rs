//! The seven workbench commands. Each resolves traces, computes its
//! payload, writes CSV/SVG/JSON files under the configured output
//! directory, and finishes with a hash manifest covering everything it
//! emitted.

use std::fmt::Write as _;
use std::path::PathBuf;

use vqos_core::eval::{grid_to_json, grid_to_long_csv, run_grid};
use vqos_core::explain::{
    ale, ale_csv, ale_svg, beeswarm_csv, beeswarm_svg, sample_background, shap_summary,
    ShapConfig,
};
use vqos_core::features::{assemble, AssembleOptions, LearningTable};
use vqos_core::linalg::pca2;
use vqos_core::models::{fit, ModelSpec};
use vqos_core::resample::speed_binned_mae;
use vqos_core::split::split;
use vqos_core::stationarity::{accumulated_adf, autocorrelation, MIN_SERIES_LEN};
use vqos_core::trace::preprocess::preprocess;
use vqos_core::trace::{
    cell_sites, column_series, csv_io, generate, CellSite, MeasurementRun,
};
use vqos_core::drift::{detect_drifts, PhConfig};

use crate::config::{TraceSource, WorkbenchConfig};
use crate::manifest::{emit, write_manifest};
use crate::CliError;

/// Load or synthesize the measurement runs plus the cell-site list.
fn resolve_runs(cfg: &WorkbenchConfig) -> Result<(Vec<MeasurementRun>, Vec<CellSite>), CliError> {
    match &cfg.source {
        TraceSource::Generate(g) => Ok((generate(g)?, cell_sites(g))),
        TraceSource::Csv { traces, cell_sites } => {
            let runs = csv_io::load_csv_path(traces)?;
            let sites = match cell_sites {
                Some(p) => {
                    let file = std::fs::File::open(p).map_err(|e| {
                        CliError::Config(format!("cannot open cell sites {}: {e}", p.display()))
                    })?;
                    csv_io::load_cell_sites(file)?
                }
                None => Vec::new(),
            };
            Ok((runs, sites))
        }
    }
}

/// Runs after the configured preprocessing (if any).
fn resolve_clean_runs(
    cfg: &WorkbenchConfig,
) -> Result<(Vec<MeasurementRun>, Vec<CellSite>), CliError> {
    let (runs, sites) = resolve_runs(cfg)?;
    let runs = match &cfg.preprocess {
        Some(p) => preprocess(&runs, p.min_speed_kmh, p.min_park_duration_s),
        None => runs,
    };
    if runs.is_empty() {
        return Err(CliError::Runtime("no runs left after preprocessing".into()));
    }
    Ok((runs, sites))
}

fn ensure_out_dir(cfg: &WorkbenchConfig) -> Result<(), CliError> {
    std::fs::create_dir_all(&cfg.out_dir).map_err(|e| {
        CliError::Config(format!("output directory {}: {e}", cfg.out_dir.display()))
    })
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// `generate`: write the synthetic corpus and its cell-site sidecar.
pub fn cmd_generate(cfg: &WorkbenchConfig) -> Result<(), CliError> {
    let TraceSource::Generate(gen_cfg) = &cfg.source else {
        return Err(CliError::Config(
            "generate needs a generator trace source, not csv".into(),
        ));
    };
    ensure_out_dir(cfg)?;
    let runs = generate(gen_cfg)?;
    let sites = cell_sites(gen_cfg);

    let mut traces = Vec::new();
    csv_io::save_csv(&runs, &mut traces)?;
    let mut sites_csv = Vec::new();
    csv_io::save_cell_sites(&sites, &mut sites_csv)?;

    let mut files = Vec::new();
    emit(&cfg.out_dir, &mut files, "traces.csv", traces)?;
    emit(&cfg.out_dir, &mut files, "cell_sites.csv", sites_csv)?;
    write_manifest(&cfg.out_dir, "generate", cfg, &files)?;
    Ok(())
}

/// `resample-study`: speed-binned reconstruction error per feature × ratio.
pub fn cmd_resample_study(cfg: &WorkbenchConfig) -> Result<(), CliError> {
    ensure_out_dir(cfg)?;
    let (runs, _) = resolve_clean_runs(cfg)?;
    let mut csv = String::from("feature,m,bin_lo_kmh,count,mae,p25,p75\n");
    for feature in &cfg.resample.features {
        for &m in &cfg.resample.ratios {
            let binned = speed_binned_mae(&runs, feature, m)?;
            for (b, &lo) in binned.bin_lo_kmh.iter().enumerate() {
                let _ = writeln!(
                    csv,
                    "{feature},{m},{lo},{},{},{},{}",
                    binned.count[b],
                    opt(binned.mae[b]),
                    opt(binned.p25[b]),
                    opt(binned.p75[b]),
                );
            }
        }
    }
    let mut files = Vec::new();
    emit(&cfg.out_dir, &mut files, "resample_speed_binned.csv", csv)?;
    write_manifest(&cfg.out_dir, "resample-study", cfg, &files)?;
    Ok(())
}

/// `stationarity`: accumulated ADF p-values and autocorrelation per
/// run × feature.
pub fn cmd_stationarity(cfg: &WorkbenchConfig) -> Result<(), CliError> {
    ensure_out_dir(cfg)?;
    let (runs, _) = resolve_clean_runs(cfg)?;
    let st = &cfg.stationarity;
    if st.stride == 0 {
        return Err(CliError::Config("stationarity.stride must be positive".into()));
    }

    let mut adf = String::from("run_id,feature,t_index,p_value\n");
    let mut acf = String::from("run_id,feature,lag,acf\n");
    for run in &runs {
        for feature in &st.features {
            let series = column_series(run, feature)?;
            if series.len() < MIN_SERIES_LEN {
                continue;
            }
            let accumulated = accumulated_adf(&series, st.stride)?;
            for (t, p) in accumulated.p_values.iter().enumerate() {
                if let Some(p) = p {
                    let _ = writeln!(adf, "{},{feature},{t},{p}", run.run_id);
                }
            }
            let max_lag = st.acf_max_lag.min(series.len().saturating_sub(2));
            let rho = autocorrelation(&series, max_lag)?;
            for (lag, r) in rho.iter().enumerate() {
                let _ = writeln!(acf, "{},{feature},{lag},{r}", run.run_id);
            }
        }
    }
    let mut files = Vec::new();
    emit(&cfg.out_dir, &mut files, "adf_accumulated.csv", adf)?;
    emit(&cfg.out_dir, &mut files, "acf.csv", acf)?;
    write_manifest(&cfg.out_dir, "stationarity", cfg, &files)?;
    Ok(())
}

/// `drift`: change-point alarms and per-series counts.
pub fn cmd_drift(cfg: &WorkbenchConfig) -> Result<(), CliError> {
    ensure_out_dir(cfg)?;
    let (runs, _) = resolve_clean_runs(cfg)?;
    let dr = &cfg.drift;
    if !(dr.sigma_multiplier.is_finite() && dr.sigma_multiplier > 0.0) {
        return Err(CliError::Config("drift.sigma_multiplier must be positive".into()));
    }

    let mut alarms = String::from("run_id,feature,index,t_ms,ph_value\n");
    let mut counts = String::from("run_id,feature,n_samples,delta,lambda,n_alarms\n");
    for run in &runs {
        for feature in &dr.features {
            let series = column_series(run, feature)?;
            let n = series.len();
            let mean = series.iter().sum::<f64>() / n.max(1) as f64;
            let sd =
                (series.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n.max(1) as f64)
                    .sqrt();
            if !(sd.is_finite() && sd > 0.0) {
                let _ = writeln!(counts, "{},{feature},{n},0,0,0", run.run_id);
                continue;
            }
            let delta = dr.sigma_multiplier * sd;
            let ph = PhConfig::with_default_lambda(delta, dr.two_sided);
            let log = detect_drifts(&series, ph)?;
            for alarm in &log.alarms {
                let _ = writeln!(
                    alarms,
                    "{},{feature},{},{},{}",
                    run.run_id,
                    alarm.index,
                    run.samples[alarm.index].t_ms,
                    alarm.ph_value,
                );
            }
            let _ = writeln!(
                counts,
                "{},{feature},{n},{delta},{},{}",
                run.run_id,
                ph.lambda,
                log.len(),
            );
        }
    }
    let mut files = Vec::new();
    emit(&cfg.out_dir, &mut files, "drift_alarms.csv", alarms)?;
    emit(&cfg.out_dir, &mut files, "drift_counts.csv", counts)?;
    write_manifest(&cfg.out_dir, "drift", cfg, &files)?;
    Ok(())
}

/// `split-viz`: 2-D principal-component projections of the assembled
/// feature table, labeled train/test, one file per split strategy.
pub fn cmd_split_viz(cfg: &WorkbenchConfig) -> Result<(), CliError> {
    ensure_out_dir(cfg)?;
    let (runs, sites) = resolve_clean_runs(cfg)?;
    let scenario = cfg.grid.scenarios[0];
    let options = AssembleOptions {
        rem_resolution_deg: cfg.grid.model_params.rem_resolution_deg,
        ..AssembleOptions::default()
    };

    let mut files = Vec::new();
    let mut variance = String::from("strategy,component,explained\n");
    for &strategy in &cfg.grid.splits {
        let fraction =
            cfg.grid.train_fraction.unwrap_or_else(|| strategy.default_train_fraction());
        let assignment = split(&runs, strategy, fraction, cfg.seed)?;
        let (train, test) = assemble(&runs, &sites, scenario, &assignment, &options)?;

        // Standardize the pooled table so no single feature's scale owns
        // the projection, then project everything into one shared plane.
        let k = train.n_cols();
        let n = train.n_rows() + test.n_rows();
        let mut flat = Vec::with_capacity(n * k);
        flat.extend_from_slice(&train.features);
        flat.extend_from_slice(&test.features);
        for j in 0..k {
            let mut mean = 0.0;
            for i in 0..n {
                mean += flat[i * k + j];
            }
            mean /= n as f64;
            let mut var = 0.0;
            for i in 0..n {
                let d = flat[i * k + j] - mean;
                var += d * d;
            }
            let sd = (var / n as f64).sqrt();
            let scale = if sd > 0.0 { 1.0 / sd } else { 0.0 };
            for i in 0..n {
                let v = &mut flat[i * k + j];
                *v = (*v - mean) * scale;
            }
        }
        let pca = pca2(&flat, n, k)?;

        let mut csv = String::from("role,run_id,t_ms,pc1,pc2\n");
        let roles = [("train", &train), ("test", &test)];
        let mut row = 0usize;
        for (role, table) in roles {
            for key in &table.keys {
                let s = pca.scores[row];
                let _ = writeln!(csv, "{role},{},{},{},{}", key.run_id, key.t_ms, s[0], s[1]);
                row += 1;
            }
        }
        for c in 0..2 {
            let _ = writeln!(variance, "{},{},{}", strategy.as_str(), c + 1, pca.explained[c]);
        }
        emit(&cfg.out_dir, &mut files, format!("split_pca_{}.csv", strategy.as_str()), csv)?;
    }
    emit(&cfg.out_dir, &mut files, "split_pca_variance.csv", variance)?;
    write_manifest(&cfg.out_dir, "split-viz", cfg, &files)?;
    Ok(())
}

/// `experiment`: evaluate the configured grid and write the long-form
/// results table plus the full JSON report.
pub fn cmd_experiment(cfg: &WorkbenchConfig) -> Result<(), CliError> {
    ensure_out_dir(cfg)?;
    let (runs, sites) = resolve_clean_runs(cfg)?;
    let grid = run_grid(&runs, &sites, &cfg.grid, cfg.seed)?;
    let mut files = Vec::new();
    emit(&cfg.out_dir, &mut files, "grid_long.csv", grid_to_long_csv(&grid))?;
    emit(&cfg.out_dir, &mut files, "grid.json", grid_to_json(&grid)?)?;
    write_manifest(&cfg.out_dir, "experiment", cfg, &files)?;
    Ok(())
}

/// `explain`: attribution summary (CSV + beeswarm SVG) and accumulated
/// local effect curves for the leading features.
pub fn cmd_explain(cfg: &WorkbenchConfig) -> Result<(), CliError> {
    ensure_out_dir(cfg)?;
    let (runs, sites) = resolve_clean_runs(cfg)?;
    let ex = &cfg.explain;
    let direction = cfg.grid.directions.first().copied().ok_or_else(|| {
        CliError::Config("grid.directions must be non-empty for explain".into())
    })?;
    let dir_runs: Vec<MeasurementRun> =
        runs.iter().filter(|r| r.direction == direction).cloned().collect();
    if dir_runs.is_empty() {
        return Err(CliError::Runtime(format!("no runs with direction {direction:?}")));
    }
    let strategy = cfg.grid.splits[0];
    let fraction = cfg.grid.train_fraction.unwrap_or_else(|| strategy.default_train_fraction());
    let assignment = split(&dir_runs, strategy, fraction, cfg.seed)?;
    let scenario = cfg.grid.scenarios[0];
    let options = AssembleOptions {
        rem_resolution_deg: cfg.grid.model_params.rem_resolution_deg,
        ..AssembleOptions::default()
    };
    let (train, _test) = assemble(&dir_runs, &sites, scenario, &assignment, &options)?;
    let spec = ModelSpec {
        kind: cfg.grid.models[0],
        seed: cfg.seed,
        ..cfg.grid.model_params.clone()
    };
    let model = fit(&spec, &train)?;

    let background = sample_background(&train, ex.n_background.min(train.n_rows()), cfg.seed)?;
    let instances =
        sample_background(&train, ex.n_instances.min(train.n_rows()), cfg.seed.wrapping_add(1))?;
    let shap_cfg =
        ShapConfig { n_coalitions: ex.n_coalitions, seed: cfg.seed, ..ShapConfig::default() };
    let summary = shap_summary(&model, &instances, &background, &shap_cfg)?;

    let mut ranking = String::from("rank,feature,mean_abs_phi\n");
    for (rank, &f) in summary.ranking.iter().enumerate() {
        let _ = writeln!(ranking, "{rank},{},{}", summary.columns[f], summary.mean_abs_phi[f]);
    }

    let mut files = Vec::new();
    emit(&cfg.out_dir, &mut files, "shap_mean_abs.csv", ranking)?;
    emit(&cfg.out_dir, &mut files, "shap_beeswarm.csv", beeswarm_csv(&summary))?;
    emit(&cfg.out_dir, &mut files, "shap_beeswarm.svg", beeswarm_svg(&summary, 10))?;

    let ale_features: Vec<String> = if ex.ale_features.is_empty() {
        summary.ranking.iter().take(4).map(|&f| summary.columns[f].clone()).collect()
    } else {
        ex.ale_features.clone()
    };
    for feature in &ale_features {
        let curve = ale(&model, &train, feature, ex.ale_bins)?;
        emit(&cfg.out_dir, &mut files, format!("ale_{feature}.csv"), ale_csv(&curve))?;
        emit(&cfg.out_dir, &mut files, format!("ale_{feature}.svg"), ale_svg(&curve))?;
    }
    write_manifest(&cfg.out_dir, "explain", cfg, &files)?;
    Ok(())
}
