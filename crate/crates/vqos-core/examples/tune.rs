//! Development driver: tallies the qualitative/directional properties on
//! reduced-scale default traces across 20 seeds. Run with
//! `cargo run -p vqos-core --example tune --release -- [check...]`.

use std::time::Instant;

use vqos_core::drift::{regime_drift_count, RegimeDriftConfig};
use vqos_core::eval::{run_grid, GridSpec, RegimePair};
use vqos_core::explain::{sample_background, shap_summary, ShapConfig};
use vqos_core::features::{assemble, AccessScenario, AssembleOptions};
use vqos_core::models::{fit, gbm::GbmParams, ModelKind, ModelSpec};
use vqos_core::split::{split, SplitStrategy};
use vqos_core::trace::{cell_sites, generate, Direction, Env, GeneratorConfig};

fn reduced_traces(seed: u64) -> GeneratorConfig {
    GeneratorConfig { seed, n_runs: 8, run_duration_s: 600.0, ..GeneratorConfig::default() }
}

fn reduced_gbm() -> GbmParams {
    GbmParams { n_trees: 120, max_depth: 6, min_samples_leaf: 2, shrinkage: 0.1 }
}

fn reduced_spec() -> ModelSpec {
    ModelSpec { gbm: reduced_gbm(), ..ModelSpec::default() }
}

fn mae_of(grid: &vqos_core::eval::ExperimentGrid, pred: impl Fn(&vqos_core::eval::CellKey) -> bool) -> f64 {
    for cell in &grid.cells {
        if pred(&cell.key) {
            match (&cell.result, &cell.failure) {
                (Some(r), _) => return r.report.mae,
                (None, f) => panic!("cell failed: {f:?}"),
            }
        }
    }
    panic!("no matching cell");
}

fn r2_of(grid: &vqos_core::eval::ExperimentGrid, pred: impl Fn(&vqos_core::eval::CellKey) -> bool) -> f64 {
    for cell in &grid.cells {
        if pred(&cell.key) {
            match (&cell.result, &cell.failure) {
                (Some(r), _) => return r.report.r2,
                (None, f) => panic!("cell failed: {f:?}"),
            }
        }
    }
    panic!("no matching cell");
}

fn check_split_ordering() {
    println!("== split ordering: mae(random) < mae(folds) < max(mae(time), mae(run)) ==");
    let mut pass = 0;
    for seed in 0..20u64 {
        let t = Instant::now();
        let runs = generate(&reduced_traces(seed)).unwrap();
        let sites = cell_sites(&reduced_traces(seed));
        let spec = GridSpec {
            models: vec![ModelKind::GradientBoosting],
            scenarios: vec![AccessScenario::Full],
            splits: vec![
                SplitStrategy::Random,
                SplitStrategy::Time,
                SplitStrategy::Run,
                SplitStrategy::Folds,
            ],
            model_params: reduced_spec(),
            ..GridSpec::default()
        };
        let grid = run_grid(&runs, &sites, &spec, seed).unwrap();
        let m_random = mae_of(&grid, |k| k.split == SplitStrategy::Random);
        let m_time = mae_of(&grid, |k| k.split == SplitStrategy::Time);
        let m_run = mae_of(&grid, |k| k.split == SplitStrategy::Run);
        let m_folds = mae_of(&grid, |k| k.split == SplitStrategy::Folds);
        let ok = m_random < m_folds && m_folds < m_time.max(m_run);
        if ok {
            pass += 1;
        }
        println!(
            "seed {seed:2}: random {m_random:7.4}  folds {m_folds:7.4}  time {m_time:7.4}  run {m_run:7.4}  {}  ({:.1}s)",
            if ok { "ok" } else { "VIOLATION" },
            t.elapsed().as_secs_f64()
        );
    }
    println!("split ordering: {pass}/20\n");
}

fn check_scenarios() {
    println!("== scenarios: mae(MDNET) <= 0.7 mae(MD); mae(FULL) <= 1.05 mae(MDNET) ==");
    let mut ratio_pass = 0;
    let mut full_pass = 0;
    for seed in 0..20u64 {
        let runs = generate(&reduced_traces(seed)).unwrap();
        let sites = cell_sites(&reduced_traces(seed));
        let spec = GridSpec {
            models: vec![ModelKind::GradientBoosting],
            scenarios: vec![AccessScenario::Md, AccessScenario::Mdnet, AccessScenario::Full],
            splits: vec![SplitStrategy::Random],
            model_params: reduced_spec(),
            ..GridSpec::default()
        };
        let grid = run_grid(&runs, &sites, &spec, seed).unwrap();
        let m_md = mae_of(&grid, |k| k.scenario == AccessScenario::Md);
        let m_mdnet = mae_of(&grid, |k| k.scenario == AccessScenario::Mdnet);
        let m_full = mae_of(&grid, |k| k.scenario == AccessScenario::Full);
        let r_ok = m_mdnet <= 0.7 * m_md;
        let f_ok = m_full <= 1.05 * m_mdnet;
        ratio_pass += r_ok as u32;
        full_pass += f_ok as u32;
        println!(
            "seed {seed:2}: md {m_md:7.4}  mdnet {m_mdnet:7.4} (ratio {:.3})  full {m_full:7.4}  {} {}",
            m_mdnet / m_md,
            if r_ok { "ok" } else { "RATIO" },
            if f_ok { "ok" } else { "FULL" }
        );
    }
    println!("scenario ratio: {ratio_pass}/20, full-not-worse: {full_pass}/20\n");
}

fn check_periods() {
    println!("== periods: mae non-decreasing over {{1,2,5,10}} s, <=1 adjacent violation ==");
    let mut pass = 0;
    for seed in 0..20u64 {
        let runs = generate(&reduced_traces(seed)).unwrap();
        let sites = cell_sites(&reduced_traces(seed));
        let spec = GridSpec {
            models: vec![ModelKind::GradientBoosting],
            scenarios: vec![AccessScenario::Full],
            splits: vec![SplitStrategy::Random],
            periods_s: vec![1.0, 2.0, 5.0, 10.0],
            model_params: reduced_spec(),
            ..GridSpec::default()
        };
        let grid = run_grid(&runs, &sites, &spec, seed).unwrap();
        let maes: Vec<f64> = [1.0, 2.0, 5.0, 10.0]
            .iter()
            .map(|&p| mae_of(&grid, |k| (k.period_s - p).abs() < 1e-9))
            .collect();
        let violations =
            maes.windows(2).filter(|w| w[1] < w[0] - 1e-12).count();
        let ok = violations <= 1;
        pass += ok as u32;
        println!(
            "seed {seed:2}: {:?} violations {violations} {}",
            maes.iter().map(|m| format!("{m:.4}")).collect::<Vec<_>>(),
            if ok { "ok" } else { "VIOLATION" }
        );
    }
    println!("period monotonicity: {pass}/20\n");
}

fn check_cross_env() {
    println!("== cross-env: R2(sub->hwy) < 0.3, R2(sub->sub) > 0.7; drift(cross) > drift(in) ==");
    let mut r2_pass = 0;
    let mut drift_pass = 0;
    for seed in 0..20u64 {
        let cfg = GeneratorConfig { run_duration_s: 900.0, ..reduced_traces(seed) };
        let runs = generate(&cfg).unwrap();
        let sites = cell_sites(&cfg);
        let spec = GridSpec {
            models: vec![ModelKind::GradientBoosting],
            scenarios: vec![AccessScenario::Full],
            splits: vec![SplitStrategy::Folds],
            regimes: vec![
                RegimePair::within(Env::Suburban),
                RegimePair::cross(Env::Suburban, Env::Highway),
            ],
            model_params: reduced_spec(),
            ..GridSpec::default()
        };
        let grid = run_grid(&runs, &sites, &spec, seed).unwrap();
        let r2_in = r2_of(&grid, |k| k.test_env == Some(Env::Suburban));
        let r2_cross = r2_of(&grid, |k| k.test_env == Some(Env::Highway));
        let ok = r2_cross < 0.3 && r2_in > 0.7;
        r2_pass += ok as u32;

        // Drift counts on the underlying regime segments.
        let mut sub: Vec<vqos_core::MeasurementRun> = Vec::new();
        let mut hwy: Vec<vqos_core::MeasurementRun> = Vec::new();
        for run in &runs {
            for seg in run.env_segments() {
                match seg.samples[0].env {
                    Env::Suburban => sub.push(seg),
                    Env::Highway => hwy.push(seg),
                    Env::Rural => {}
                }
            }
        }
        let half = sub.len() / 2;
        let dcfg = RegimeDriftConfig::default();
        let d_in = regime_drift_count(&sub[..half], &sub[half..], &dcfg).unwrap();
        let d_cross = regime_drift_count(&sub[..half], &hwy, &dcfg).unwrap();
        let d_ok = d_cross > d_in;
        drift_pass += d_ok as u32;
        println!(
            "seed {seed:2}: r2_in {r2_in:6.3}  r2_cross {r2_cross:6.3} {}  drift in/cross {d_in}/{d_cross} {}",
            if ok { "ok" } else { "R2" },
            if d_ok { "ok" } else { "DRIFT" }
        );
    }
    println!("cross-env r2: {r2_pass}/20, drift ordering: {drift_pass}/20\n");
}

fn check_shap_ranking() {
    println!("== shap: cell_load in top-2 by mean |phi|, both directions ==");
    let mut pass = 0;
    for seed in 0..20u64 {
        let t = Instant::now();
        let cfg = GeneratorConfig { seed, ..GeneratorConfig::default() };
        let runs = generate(&cfg).unwrap();
        let sites = cell_sites(&cfg);
        let mut both = true;
        let mut note = String::new();
        for direction in [Direction::Dl, Direction::Ul] {
            let dir_runs: Vec<_> =
                runs.iter().filter(|r| r.direction == direction).cloned().collect();
            let assignment = split(&dir_runs, SplitStrategy::Run, 0.7, seed).unwrap();
            let (train, test) = assemble(
                &dir_runs,
                &sites,
                AccessScenario::Full,
                &assignment,
                &AssembleOptions::default(),
            )
            .unwrap();
            let spec = ModelSpec { kind: ModelKind::GradientBoosting, seed, ..reduced_spec() };
            let model = fit(&spec, &train).unwrap();
            let background = sample_background(&train, 32, seed).unwrap();
            let instances = sample_background(&train, 24, seed + 1).unwrap();
            let cfg = ShapConfig { seed, n_coalitions: 3072, ..Default::default() };
            let summary = shap_summary(&model, &instances, &background, &cfg).unwrap();
            let _ = &test;
            let rank = summary.rank_of("cell_load").unwrap();
            let names: Vec<&str> = summary.ranking[..3]
                .iter()
                .map(|&f| summary.columns[f].as_str())
                .collect();
            note.push_str(&format!(" {direction:?}: rank {rank} top3 {names:?}"));
            if rank > 1 {
                both = false;
            }
        }
        pass += both as u32;
        println!(
            "seed {seed:2}:{note} {} ({:.1}s)",
            if both { "ok" } else { "RANK" },
            t.elapsed().as_secs_f64()
        );
    }
    println!("shap ranking: {pass}/20\n");
}

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let all = args.is_empty();
    let want = |name: &str| all || args.iter().any(|a| a == name);
    let t = Instant::now();
    if want("splits") {
        check_split_ordering();
    }
    if want("scenarios") {
        check_scenarios();
    }
    if want("periods") {
        check_periods();
    }
    if want("crossenv") {
        check_cross_env();
    }
    if want("shap") {
        check_shap_ranking();
    }
    println!("total {:.1}s", t.elapsed().as_secs_f64());
}
