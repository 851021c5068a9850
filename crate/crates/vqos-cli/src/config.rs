//! Workbench configuration: one JSON file describing where traces come
//! from, how they are cleaned, and what each command should compute.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use vqos_core::eval::GridSpec;
use vqos_core::trace::preprocess::{DEFAULT_MIN_PARK_DURATION_S, DEFAULT_MIN_SPEED_KMH};
use vqos_core::GeneratorConfig;

use crate::CliError;

/// Where measurement runs come from. Exactly one variant — the JSON form is
/// `{"generate": {…}}` or `{"csv": {…}}` — so a config can never name two
/// sources at once.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceSource {
    /// Synthesize runs from a generator configuration.
    Generate(GeneratorConfig),
    /// Load runs (and optionally cell sites) from CSV files.
    Csv {
        traces: PathBuf,
        #[serde(default)]
        cell_sites: Option<PathBuf>,
    },
}

impl Default for TraceSource {
    fn default() -> Self {
        TraceSource::Generate(GeneratorConfig::default())
    }
}

/// Thresholds for dropping parked stretches and non-UDP samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PreprocessSettings {
    pub min_speed_kmh: f64,
    pub min_park_duration_s: f64,
}

impl Default for PreprocessSettings {
    fn default() -> Self {
        PreprocessSettings {
            min_speed_kmh: DEFAULT_MIN_SPEED_KMH,
            min_park_duration_s: DEFAULT_MIN_PARK_DURATION_S,
        }
    }
}

/// What the `resample-study` command sweeps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResampleSettings {
    /// Trace columns to resample.
    pub features: Vec<String>,
    /// Downsampling ratios (samples per block).
    pub ratios: Vec<usize>,
}

impl Default for ResampleSettings {
    fn default() -> Self {
        ResampleSettings {
            features: vec!["tput_dl".into(), "rsrp".into(), "sinr".into()],
            ratios: vec![2, 5, 10, 30, 60],
        }
    }
}

/// What the `stationarity` command examines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StationaritySettings {
    /// Trace columns to test.
    pub features: Vec<String>,
    /// Prefix-length stride between accumulated ADF evaluations.
    pub stride: usize,
    /// Largest autocorrelation lag.
    pub acf_max_lag: usize,
}

impl Default for StationaritySettings {
    fn default() -> Self {
        StationaritySettings {
            features: vec!["tput_dl".into(), "rsrp".into(), "sinr".into(), "cell_load".into()],
            stride: 60,
            acf_max_lag: 120,
        }
    }
}

/// What the `drift` command monitors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DriftSettings {
    /// Trace columns to stream through the detector.
    pub features: Vec<String>,
    /// Detector insensitivity as a multiple of each series' own standard
    /// deviation.
    pub sigma_multiplier: f64,
    /// Alarm on shifts in either direction.
    pub two_sided: bool,
}

impl Default for DriftSettings {
    fn default() -> Self {
        DriftSettings {
            features: vec!["rsrp".into(), "tput_dl".into()],
            sigma_multiplier: 2.0,
            two_sided: true,
        }
    }
}

/// Budgets for the `explain` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExplainSettings {
    /// Background sample size for attribution baselines.
    pub n_background: usize,
    /// Instances whose predictions are explained.
    pub n_instances: usize,
    /// Coalition budget per instance when sampling is needed.
    pub n_coalitions: usize,
    /// Bin count for accumulated-local-effect curves.
    pub ale_bins: usize,
    /// Features to draw ALE curves for; empty means the top four by
    /// mean absolute attribution.
    pub ale_features: Vec<String>,
}

impl Default for ExplainSettings {
    fn default() -> Self {
        ExplainSettings {
            n_background: 32,
            n_instances: 24,
            n_coalitions: 3072,
            ale_bins: 20,
            ale_features: Vec::new(),
        }
    }
}

/// Full workbench configuration. Every field has a default, so `{}` is a
/// valid config that generates the default synthetic corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WorkbenchConfig {
    /// Exactly one trace source.
    pub source: TraceSource,
    /// Parked-stretch removal; `null` skips preprocessing entirely.
    pub preprocess: Option<PreprocessSettings>,
    /// Experiment grid for `experiment`, `split-viz`, and `explain`.
    pub grid: GridSpec,
    pub resample: ResampleSettings,
    pub stationarity: StationaritySettings,
    pub drift: DriftSettings,
    pub explain: ExplainSettings,
    /// Directory all outputs (and the manifest) are written under.
    pub out_dir: PathBuf,
    /// Global seed: drives trace generation and every seeded stage.
    pub seed: u64,
}

impl Default for WorkbenchConfig {
    fn default() -> Self {
        WorkbenchConfig {
            source: TraceSource::default(),
            preprocess: Some(PreprocessSettings::default()),
            grid: GridSpec::default(),
            resample: ResampleSettings::default(),
            stationarity: StationaritySettings::default(),
            drift: DriftSettings::default(),
            explain: ExplainSettings::default(),
            out_dir: PathBuf::from("out"),
            seed: 7,
        }
    }
}

impl WorkbenchConfig {
    /// Load a config file, apply flag overrides, and normalize.
    ///
    /// With no `path` the defaults apply. The global seed is pushed into a
    /// generator source so one knob reseeds the entire pipeline.
    pub fn resolve(
        path: Option<&Path>,
        out_override: Option<&Path>,
        seed_override: Option<u64>,
    ) -> Result<Self, CliError> {
        let mut cfg = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| {
                    CliError::Config(format!("cannot read config {}: {e}", p.display()))
                })?;
                serde_json::from_str::<WorkbenchConfig>(&text)
                    .map_err(|e| CliError::Config(format!("invalid config: {e}")))?
            }
            None => WorkbenchConfig::default(),
        };
        if let Some(out) = out_override {
            cfg.out_dir = out.to_path_buf();
        }
        if let Some(seed) = seed_override {
            cfg.seed = seed;
        }
        if let TraceSource::Generate(g) = &mut cfg.source {
            g.seed = cfg.seed;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        if let TraceSource::Csv { traces, .. } = &self.source {
            if !traces.is_file() {
                return Err(CliError::Config(format!(
                    "source.csv.traces: no such file: {}",
                    traces.display()
                )));
            }
        }
        if self.grid.models.is_empty()
            || self.grid.scenarios.is_empty()
            || self.grid.splits.is_empty()
        {
            return Err(CliError::Config(
                "grid.models, grid.scenarios, and grid.splits must be non-empty".into(),
            ));
        }
        Ok(())
    }
}
