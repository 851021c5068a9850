use vqos_core::eval::{run_grid, GridSpec};
use vqos_core::features::AccessScenario;
use vqos_core::models::{gbm::GbmParams, ModelKind, ModelSpec};
use vqos_core::split::SplitStrategy;
use vqos_core::trace::{cell_sites, generate, GeneratorConfig};

fn main() {
    let configs = [
        ("leaf8", GbmParams { n_trees: 120, max_depth: 6, min_samples_leaf: 8, shrinkage: 0.1 }),
        ("leaf16", GbmParams { n_trees: 120, max_depth: 6, min_samples_leaf: 16, shrinkage: 0.1 }),
        ("leaf16d5", GbmParams { n_trees: 160, max_depth: 5, min_samples_leaf: 16, shrinkage: 0.1 }),
        ("leaf32s05", GbmParams { n_trees: 240, max_depth: 5, min_samples_leaf: 32, shrinkage: 0.05 }),
    ];
    for (name, gbm) in configs {
        println!("== {name} ==");
        for &seed in &[9u64, 10, 12, 13, 15, 16] {
            let cfg = GeneratorConfig { seed, n_runs: 8, run_duration_s: 600.0, ..GeneratorConfig::default() };
            let runs = generate(&cfg).unwrap();
            let sites = cell_sites(&cfg);
            let spec = GridSpec {
                models: vec![ModelKind::GradientBoosting],
                scenarios: vec![AccessScenario::Mdnet, AccessScenario::Full],
                splits: vec![SplitStrategy::Folds],
                model_params: ModelSpec { gbm: gbm.clone(), ..ModelSpec::default() },
                ..GridSpec::default()
            };
            let grid = run_grid(&runs, &sites, &spec, seed).unwrap();
            let mae = |sc: AccessScenario| {
                grid.cells.iter().find(|c| c.key.scenario == sc).unwrap().result.as_ref().unwrap().report.mae
            };
            let (m, f) = (mae(AccessScenario::Mdnet), mae(AccessScenario::Full));
            println!("  seed {seed:2}: mdnet {m:6.3}  full {f:6.3}  ratio {:5.3} {}", f / m, if f <= 1.05 * m { "ok" } else { "X" });
        }
    }
}
