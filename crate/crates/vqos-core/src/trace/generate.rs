//! Synthetic vehicular radio trace generator.
//!
//! Each run simulates one measurement drive: the vehicle follows a smooth
//! random path through a fixed cell grid while every radio quantity evolves
//! as a first-order autoregressive (AR(1)) deviation around an
//! environment-regime-dependent mean. Regime switches follow a configured
//! schedule, so traces exhibit temporal correlation, level shifts at regime
//! boundaries, and load-coupled throughput:
//!
//! `tput = min(cap, share_of_cell × spectral_efficiency(sinr))`, where the
//! granted share collapses as cell utilization grows,
//!
//! plus a slowly varying unobserved disturbance. Everything is a pure
//! function of the configuration, including its seed.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::haversine_m;
use crate::rng::rng_for;
use crate::trace::{
    CellSite, DeviceGrade, Direction, Env, MeasurementRun, Protocol, RadioSample,
};

/// Per-device throughput caps in Mbit/s, mirroring observed ranges.
pub const TPUT_DL_CAP_MBPS: f64 = 70.0;
pub const TPUT_UL_CAP_MBPS: f64 = 23.0;

/// One segment of the regime schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeSegment {
    pub env: Env,
    pub duration_s: f64,
}

/// One value per autoregressively modelled PHY feature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhyParams {
    pub rsrp: f64,
    pub rsrq: f64,
    pub rssi: f64,
    pub sinr: f64,
    pub rsrp_margin: f64,
    pub rsrq_margin: f64,
}

/// Cell-load process parameters. The load follows AR(1) around an
/// environment mean shifted by a per-run offset and a slow in-run ramp;
/// active UE counts are derived from the load with their own jitter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoadProcess {
    /// AR(1) coefficient at the 1 s reference step.
    pub phi: f64,
    /// Stationary standard deviation of the load deviation.
    pub sigma: f64,
    /// Std-dev of the per-run constant load offset.
    pub per_run_offset_sd: f64,
    /// Std-dev of the per-run linear ramp over the run (start→end delta).
    pub ramp_sd: f64,
    /// Std-dev of the active-UE jitter around its load-derived mean.
    pub ues_jitter_sd: f64,
}

impl Default for LoadProcess {
    fn default() -> Self {
        LoadProcess {
            phi: 0.995,
            sigma: 0.16,
            per_run_offset_sd: 0.10,
            ramp_sd: 0.12,
            ues_jitter_sd: 0.7,
        }
    }
}

/// Unobserved throughput disturbance: a slow AR(1) component plus white
/// noise plus a per-run multiplicative gain. None of these are visible in
/// any feature column, which is what separates the split strategies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetNoise {
    /// AR(1) coefficient of the slow disturbance at the 1 s step.
    pub phi: f64,
    /// Stationary std-dev of the slow disturbance, DL (Mbit/s).
    pub sigma_dl: f64,
    /// Stationary std-dev of the slow disturbance, UL (Mbit/s).
    pub sigma_ul: f64,
    /// White measurement noise std-dev, DL (Mbit/s).
    pub iid_sigma_dl: f64,
    /// White measurement noise std-dev, UL (Mbit/s).
    pub iid_sigma_ul: f64,
    /// Std-dev of log of the per-run multiplicative gain.
    pub per_run_gain_sd: f64,
}

impl Default for TargetNoise {
    fn default() -> Self {
        TargetNoise {
            phi: 0.985,
            sigma_dl: 2.0,
            sigma_ul: 0.7,
            iid_sigma_dl: 0.3,
            iid_sigma_ul: 0.12,
            per_run_gain_sd: 0.08,
        }
    }
}

/// Mean levels and link characteristics of one environment regime.
///
/// Beyond the observable mean levels, each regime carries its own
/// spectral-efficiency curve parameters. Deployments genuinely differ per
/// road type — suburban areas are covered by dense small cells, highways by
/// wide macro cells whose links also suffer high-Doppler penalties — so the
/// same measured SINR buys a different rate in different regimes. None of
/// this is visible in the per-sample measurements, which is what makes
/// models trained in one regime degrade in another.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvProfile {
    pub rsrp_dbm: f64,
    pub rsrq_db: f64,
    pub sinr_db: f64,
    pub speed_kmh: f64,
    pub cell_load: f64,
    /// Multiplies the peak spectral efficiency (deployment capability).
    #[serde(default = "default_se_peak_scale")]
    pub se_peak_scale: f64,
    /// Shifts the SINR midpoint of the rate curve (link efficiency).
    #[serde(default)]
    pub se_mid_shift_db: f64,
}

fn default_se_peak_scale() -> f64 {
    1.0
}

/// Profiles for the three regimes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvProfiles {
    pub highway: EnvProfile,
    pub suburban: EnvProfile,
    pub rural: EnvProfile,
}

impl EnvProfiles {
    pub fn get(&self, env: Env) -> &EnvProfile {
        match env {
            Env::Highway => &self.highway,
            Env::Suburban => &self.suburban,
            Env::Rural => &self.rural,
        }
    }
}

impl Default for EnvProfiles {
    fn default() -> Self {
        EnvProfiles {
            highway: EnvProfile {
                rsrp_dbm: -96.0,
                rsrq_db: -12.0,
                sinr_db: 7.0,
                speed_kmh: 100.0,
                cell_load: 0.38,
                // Macro cells and ~100 km/h Doppler: lower ceiling, and the
                // curve needs several more dB for the same relative rate.
                se_peak_scale: 0.70,
                se_mid_shift_db: 3.0,
            },
            suburban: EnvProfile {
                rsrp_dbm: -84.0,
                rsrq_db: -9.5,
                sinr_db: 12.0,
                speed_kmh: 40.0,
                cell_load: 0.48,
                // Dense small cells: the reference deployment.
                se_peak_scale: 1.0,
                se_mid_shift_db: 0.0,
            },
            rural: EnvProfile {
                rsrp_dbm: -104.0,
                rsrq_db: -10.5,
                sinr_db: 15.0,
                speed_kmh: 70.0,
                cell_load: 0.28,
                // Sparse macro coverage, moderate speeds.
                se_peak_scale: 0.85,
                se_mid_shift_db: 1.5,
            },
        }
    }
}

/// Full generator configuration. `seed` determines the output completely.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorConfig {
    pub seed: u64,
    pub n_runs: u32,
    /// Duration of each run in seconds.
    pub run_duration_s: f64,
    /// Sampling period in seconds.
    pub sample_period_s: f64,
    /// Regime schedule, cycled over the run duration.
    pub regime_schedule: Vec<RegimeSegment>,
    /// Each run starts this many seconds further into the (cycled)
    /// schedule, so runs see regime boundaries at different in-run times.
    pub schedule_rotation_s: f64,
    /// AR(1) coefficient per PHY feature (at the 1 s reference step).
    pub ar_coefficient: PhyParams,
    /// Stationary std-dev of the AR(1) deviation per PHY feature.
    pub noise_sigma: PhyParams,
    pub load_process: LoadProcess,
    pub target_noise: TargetNoise,
    /// Grade of the simulated devices.
    pub device_grade: DeviceGrade,
    /// Extra i.i.d. measurement noise added to every reported dB metric
    /// for consumer-grade (`ce`) devices.
    pub device_grade_noise_db: f64,
    pub env_profiles: EnvProfiles,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            seed: 7,
            n_runs: 16,
            run_duration_s: 2400.0,
            sample_period_s: 1.0,
            regime_schedule: vec![
                RegimeSegment { env: Env::Suburban, duration_s: 800.0 },
                RegimeSegment { env: Env::Highway, duration_s: 800.0 },
                RegimeSegment { env: Env::Rural, duration_s: 800.0 },
            ],
            schedule_rotation_s: 300.0,
            ar_coefficient: PhyParams {
                rsrp: 0.97,
                rsrq: 0.96,
                rssi: 0.96,
                sinr: 0.95,
                rsrp_margin: 0.94,
                rsrq_margin: 0.94,
            },
            noise_sigma: PhyParams {
                rsrp: 3.0,
                rsrq: 1.2,
                rssi: 1.5,
                sinr: 2.2,
                rsrp_margin: 1.3,
                rsrq_margin: 1.0,
            },
            load_process: LoadProcess::default(),
            target_noise: TargetNoise::default(),
            device_grade: DeviceGrade::Dme,
            device_grade_noise_db: 1.5,
            env_profiles: EnvProfiles::default(),
        }
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.regime_schedule.is_empty() {
            return Err(Error::invalid("regime_schedule must not be empty"));
        }
        if self.regime_schedule.iter().any(|s| s.duration_s <= 0.0) {
            return Err(Error::invalid("regime segment durations must be positive"));
        }
        if self.run_duration_s <= 0.0 {
            return Err(Error::invalid("run_duration_s must be positive"));
        }
        if self.sample_period_s <= 0.0 {
            return Err(Error::invalid("sample_period_s must be positive"));
        }
        if self.n_runs == 0 {
            return Err(Error::invalid("n_runs must be at least 1"));
        }
        Ok(())
    }

    fn schedule_cycle_s(&self) -> f64 {
        self.regime_schedule.iter().map(|s| s.duration_s).sum()
    }

    /// Environment at `t` seconds into the cycled schedule, for a run that
    /// starts `offset_s` into the cycle.
    fn env_at(&self, offset_s: f64, t_s: f64) -> Env {
        let cycle = self.schedule_cycle_s();
        let mut pos = (offset_s + t_s) % cycle;
        for seg in &self.regime_schedule {
            if pos < seg.duration_s {
                return seg.env;
            }
            pos -= seg.duration_s;
        }
        self.regime_schedule.last().expect("non-empty schedule").env
    }
}

// ---------------------------------------------------------------------------
// Cell grid
// ---------------------------------------------------------------------------

/// Simulated region bounds (degrees).
const REGION_LAT: (f64, f64) = (51.15, 51.45);
const REGION_LON: (f64, f64) = (7.26, 7.74);
/// Cell grid spacing (degrees): roughly a 2 km site grid.
const CELL_STEP_LAT: f64 = 0.018;
const CELL_STEP_LON: f64 = 0.028;
/// A handover fires when another site is this much closer (meters).
const HANDOVER_HYSTERESIS_M: f64 = 150.0;

fn grid_dims() -> (usize, usize) {
    let rows = ((REGION_LAT.1 - REGION_LAT.0) / CELL_STEP_LAT).floor() as usize + 1;
    let cols = ((REGION_LON.1 - REGION_LON.0) / CELL_STEP_LON).floor() as usize + 1;
    (rows, cols)
}

/// The deterministic cell-site grid covering the simulated region.
/// Independent of the seed so traces from different seeds share geometry.
pub fn cell_sites(_cfg: &GeneratorConfig) -> Vec<CellSite> {
    let (rows, cols) = grid_dims();
    let mut sites = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            sites.push(CellSite {
                cell_id: (r * cols + c) as u32,
                lat: REGION_LAT.0 + r as f64 * CELL_STEP_LAT,
                lon: REGION_LON.0 + c as f64 * CELL_STEP_LON,
            });
        }
    }
    sites
}

fn nearest_cell(lat: f64, lon: f64) -> u32 {
    let (rows, cols) = grid_dims();
    let r = (((lat - REGION_LAT.0) / CELL_STEP_LAT).round() as i64).clamp(0, rows as i64 - 1);
    let c = (((lon - REGION_LON.0) / CELL_STEP_LON).round() as i64).clamp(0, cols as i64 - 1);
    (r as usize * cols + c as usize) as u32
}

fn cell_position(cell_id: u32) -> (f64, f64) {
    let (_, cols) = grid_dims();
    let r = cell_id as usize / cols;
    let c = cell_id as usize % cols;
    (
        REGION_LAT.0 + r as f64 * CELL_STEP_LAT,
        REGION_LON.0 + c as f64 * CELL_STEP_LON,
    )
}

// ---------------------------------------------------------------------------
// AR(1) machinery
// ---------------------------------------------------------------------------

/// AR(1) deviation process with period-independent stationary variance:
/// the coefficient is defined at a 1 s reference step and raised to the
/// sampling period, and the innovation variance is scaled so the
/// stationary std-dev equals `sigma` at any period.
struct Ar1 {
    phi_step: f64,
    innov: Option<Normal<f64>>,
    value: f64,
}

impl Ar1 {
    fn new(phi_1s: f64, sigma: f64, period_s: f64, rng: &mut ChaCha8Rng) -> Ar1 {
        let phi_step = if phi_1s <= 0.0 { 0.0 } else { phi_1s.powf(period_s) };
        let innov_sd = sigma * (1.0 - phi_step * phi_step).max(0.0).sqrt();
        let mut ar = Ar1 {
            phi_step,
            innov: if innov_sd > 0.0 {
                Some(Normal::new(0.0, innov_sd).expect("finite innovation sd"))
            } else {
                None
            },
            value: 0.0,
        };
        // Start at a stationary draw.
        ar.value = if sigma > 0.0 {
            Normal::new(0.0, sigma).expect("finite sd").sample(rng)
        } else {
            0.0
        };
        ar
    }

    fn step(&mut self, rng: &mut ChaCha8Rng) -> f64 {
        let eps = match &self.innov {
            Some(n) => n.sample(rng),
            None => 0.0,
        };
        self.value = self.phi_step * self.value + eps;
        self.value
    }
}

fn normal_draw(rng: &mut ChaCha8Rng, sd: f64) -> f64 {
    if sd > 0.0 {
        Normal::new(0.0, sd).expect("finite sd").sample(rng)
    } else {
        0.0
    }
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

// ---------------------------------------------------------------------------
// Throughput model constants
// ---------------------------------------------------------------------------

const SE_PEAK_DL_MBPS: f64 = 85.0;
const SE_PEAK_UL_MBPS: f64 = 30.0;
const SE_MID_DL_DB: f64 = 8.0;
const SE_MID_UL_DB: f64 = 6.0;
const SE_WIDTH_DB: f64 = 5.0;

/// Spectral-efficiency curve (Mbit/s a single unshared user would get).
fn se_curve(sinr_db: f64, peak: f64, mid: f64) -> f64 {
    peak * logistic((sinr_db - mid) / SE_WIDTH_DB)
}

/// Fraction of the cell's capacity granted to the probe device. Resource
/// headroom shrinks sharply as utilization grows (schedulers defend loaded
/// cells), with a milder additional penalty per competing active user.
fn share_of_cell(cell_load: f64, active_ues: u32) -> f64 {
    let u = f64::from(active_ues.max(1));
    let headroom = (1.0 - 0.85 * cell_load).max(0.0);
    0.6 * headroom.powf(1.6) / (1.0 + 0.12 * (u - 1.0))
}

// ---------------------------------------------------------------------------
// Generation
// ---------------------------------------------------------------------------

// Per-run RNG stream indices (one independent stream per process).
const STREAM_RUN_LEVEL: u64 = 0;
const STREAM_RSRP: u64 = 1;
const STREAM_RSRQ: u64 = 2;
const STREAM_RSSI: u64 = 3;
const STREAM_SINR: u64 = 4;
const STREAM_MARGIN_P: u64 = 5;
const STREAM_MARGIN_Q: u64 = 6;
const STREAM_LOAD: u64 = 7;
const STREAM_UES: u64 = 8;
const STREAM_SPEED: u64 = 9;
const STREAM_PATH: u64 = 10;
const STREAM_TGT_DL: u64 = 11;
const STREAM_TGT_UL: u64 = 12;
const STREAM_IID: u64 = 13;
const STREAM_CE: u64 = 14;

/// Generate synthetic measurement runs. Deterministic in `config`.
pub fn generate(config: &GeneratorConfig) -> Result<Vec<MeasurementRun>> {
    config.validate()?;
    let runs: Vec<MeasurementRun> = (0..config.n_runs)
        .into_par_iter()
        .map(|run_idx| generate_run(config, run_idx))
        .collect();
    Ok(runs)
}

fn generate_run(cfg: &GeneratorConfig, run_idx: u32) -> MeasurementRun {
    let run_seed = crate::rng::derive_seed(cfg.seed, u64::from(run_idx));
    let mut rl = rng_for(run_seed, STREAM_RUN_LEVEL);
    let period = cfg.sample_period_s;
    let n_samples = (cfg.run_duration_s / period).round().max(1.0) as usize;

    // Run-level draws.
    let run_gain = (normal_draw(&mut rl, cfg.target_noise.per_run_gain_sd)).exp();
    let load_offset = normal_draw(&mut rl, cfg.load_process.per_run_offset_sd);
    let load_ramp = normal_draw(&mut rl, cfg.load_process.ramp_sd);
    let start_lat = REGION_LAT.0 + rl.random::<f64>() * (REGION_LAT.1 - REGION_LAT.0);
    let start_lon = REGION_LON.0 + rl.random::<f64>() * (REGION_LON.1 - REGION_LON.0);
    let mut heading = rl.random::<f64>() * std::f64::consts::TAU;
    let schedule_offset = (f64::from(run_idx) * cfg.schedule_rotation_s)
        % cfg.schedule_cycle_s();

    // Per-process RNG streams.
    let mut r_rsrp = rng_for(run_seed, STREAM_RSRP);
    let mut r_rsrq = rng_for(run_seed, STREAM_RSRQ);
    let mut r_rssi = rng_for(run_seed, STREAM_RSSI);
    let mut r_sinr = rng_for(run_seed, STREAM_SINR);
    let mut r_mp = rng_for(run_seed, STREAM_MARGIN_P);
    let mut r_mq = rng_for(run_seed, STREAM_MARGIN_Q);
    let mut r_load = rng_for(run_seed, STREAM_LOAD);
    let mut r_ues = rng_for(run_seed, STREAM_UES);
    let mut r_speed = rng_for(run_seed, STREAM_SPEED);
    let mut r_path = rng_for(run_seed, STREAM_PATH);
    let mut r_tdl = rng_for(run_seed, STREAM_TGT_DL);
    let mut r_tul = rng_for(run_seed, STREAM_TGT_UL);
    let mut r_iid = rng_for(run_seed, STREAM_IID);
    let mut r_ce = rng_for(run_seed, STREAM_CE);

    let ar = &cfg.ar_coefficient;
    let ns = &cfg.noise_sigma;
    let mut dev_rsrp = Ar1::new(ar.rsrp, ns.rsrp, period, &mut r_rsrp);
    let mut dev_rsrq = Ar1::new(ar.rsrq, ns.rsrq, period, &mut r_rsrq);
    let mut dev_rssi = Ar1::new(ar.rssi, ns.rssi, period, &mut r_rssi);
    let mut dev_sinr = Ar1::new(ar.sinr, ns.sinr, period, &mut r_sinr);
    let mut dev_mp = Ar1::new(ar.rsrp_margin, ns.rsrp_margin, period, &mut r_mp);
    let mut dev_mq = Ar1::new(ar.rsrq_margin, ns.rsrq_margin, period, &mut r_mq);
    let mut dev_load = Ar1::new(cfg.load_process.phi, cfg.load_process.sigma, period, &mut r_load);
    let mut dev_ues = Ar1::new(0.99, cfg.load_process.ues_jitter_sd, period, &mut r_ues);
    let mut dev_speed = Ar1::new(0.97, 6.0, period, &mut r_speed);
    let mut noise_dl = Ar1::new(cfg.target_noise.phi, cfg.target_noise.sigma_dl, period, &mut r_tdl);
    let mut noise_ul = Ar1::new(cfg.target_noise.phi, cfg.target_noise.sigma_ul, period, &mut r_tul);

    let mut lat = start_lat;
    let mut lon = start_lon;
    let mut serving = nearest_cell(lat, lon);
    let mut t_since_ho = 0.0_f64;

    let direction = if run_idx % 2 == 0 { Direction::Dl } else { Direction::Ul };
    let device_id = format!("dev{}", run_idx % 4);

    let mut samples = Vec::with_capacity(n_samples);
    for i in 0..n_samples {
        let t_s = i as f64 * period;
        let env = cfg.env_at(schedule_offset, t_s);
        let prof = cfg.env_profiles.get(env);

        // Mobility.
        let speed = (prof.speed_kmh + dev_speed.step(&mut r_speed)).max(0.0);
        heading += normal_draw(&mut r_path, 0.035); // ~2 degrees/s wander
        // Steer back toward the region center when drifting out.
        let center_lat = (REGION_LAT.0 + REGION_LAT.1) / 2.0;
        let center_lon = (REGION_LON.0 + REGION_LON.1) / 2.0;
        if lat < REGION_LAT.0 || lat > REGION_LAT.1 || lon < REGION_LON.0 || lon > REGION_LON.1 {
            heading = (center_lon - lon).atan2(center_lat - lat);
        }
        let dist_m = speed / 3.6 * period;
        lat += dist_m * heading.cos() / 111_195.0;
        lon += dist_m * heading.sin() / (111_195.0 * lat.to_radians().cos());

        // Serving cell with hysteresis.
        t_since_ho += period;
        let candidate = nearest_cell(lat, lon);
        if candidate != serving {
            let (clat, clon) = cell_position(candidate);
            let (slat, slon) = cell_position(serving);
            let d_new = haversine_m(lat, lon, clat, clon);
            let d_old = haversine_m(lat, lon, slat, slon);
            if d_old - d_new > HANDOVER_HYSTERESIS_M {
                serving = candidate;
                t_since_ho = 0.0;
            }
        }

        // Load process: env mean + per-run offset + slow ramp + AR deviation.
        let progress = if n_samples > 1 { i as f64 / (n_samples - 1) as f64 } else { 0.5 };
        let load_mean = prof.cell_load + load_offset + load_ramp * (progress - 0.5);
        let cell_load = (load_mean + dev_load.step(&mut r_load)).clamp(0.02, 0.98);
        let active_ues = ((1.4 + 2.6 * cell_load + dev_ues.step(&mut r_ues)).round())
            .clamp(1.0, 8.0) as u32;

        // PHY quantities: AR(1) deviations around regime means, with weak
        // cross-couplings (load raises RSSI, lowers RSRQ/SINR slightly).
        let rsrp = prof.rsrp_dbm + dev_rsrp.step(&mut r_rsrp);
        let rsrp_dev = rsrp - prof.rsrp_dbm;
        let rsrq = prof.rsrq_db - 1.2 * (cell_load - prof.cell_load) + dev_rsrq.step(&mut r_rsrq);
        let rssi = rsrp + 18.0 + 4.0 * cell_load + dev_rssi.step(&mut r_rssi);
        let sinr = prof.sinr_db + 0.35 * rsrp_dev - 1.5 * (cell_load - prof.cell_load)
            + dev_sinr.step(&mut r_sinr);
        let rsrp_margin = (3.0 + dev_mp.step(&mut r_mp)).max(0.0);
        let rsrq_margin = (2.0 + dev_mq.step(&mut r_mq)).max(0.0);

        // Consumer-grade devices report every dB metric with extra noise.
        let grade_noise = |rng: &mut ChaCha8Rng, base: f64| -> f64 {
            if cfg.device_grade == DeviceGrade::Ce {
                base + normal_draw(rng, cfg.device_grade_noise_db)
            } else {
                base
            }
        };
        let rsrp_rep = grade_noise(&mut r_ce, rsrp);
        let rsrq_rep = grade_noise(&mut r_ce, rsrq);
        let rssi_rep = grade_noise(&mut r_ce, rssi);
        let sinr_rep = grade_noise(&mut r_ce, sinr);
        let margin_p_rep = grade_noise(&mut r_ce, rsrp_margin).max(0.0);
        let margin_q_rep = grade_noise(&mut r_ce, rsrq_margin).max(0.0);

        // Terminal-reported channel state follows the (reported) SINR.
        let cqi = (0.5357 * sinr_rep + 3.21).round().clamp(0.0, 15.0) as u8;
        let rank: u8 = if cqi >= 9 { 2 } else { 1 };

        // Cell-level aggregate throughputs (BS counters): grow with load
        // and with how efficient the cell's radio conditions are.
        let cell_eff = 0.5 + 0.5 * logistic((sinr - 6.0) / 6.0);
        let cell_tput_dl =
            (170.0 * cell_load * cell_eff + normal_draw(&mut r_iid, 4.0)).max(0.0);
        let cell_tput_ul =
            (55.0 * cell_load * cell_eff + normal_draw(&mut r_iid, 1.5)).max(0.0);

        // Per-device targets: capped fair share times spectral efficiency,
        // plus the unobserved slow disturbance and white noise.
        let share = share_of_cell(cell_load, active_ues);
        let base_dl = (share
            * se_curve(
                sinr,
                SE_PEAK_DL_MBPS * prof.se_peak_scale,
                SE_MID_DL_DB + prof.se_mid_shift_db,
            )
            * run_gain)
            .min(TPUT_DL_CAP_MBPS);
        let base_ul = (share
            * se_curve(
                sinr,
                SE_PEAK_UL_MBPS * prof.se_peak_scale,
                SE_MID_UL_DB + prof.se_mid_shift_db,
            )
            * run_gain)
            .min(TPUT_UL_CAP_MBPS);
        let tput_dl = (base_dl
            + noise_dl.step(&mut r_tdl)
            + normal_draw(&mut r_iid, cfg.target_noise.iid_sigma_dl))
        .clamp(0.0, TPUT_DL_CAP_MBPS);
        let tput_ul = (base_ul
            + noise_ul.step(&mut r_tul)
            + normal_draw(&mut r_iid, cfg.target_noise.iid_sigma_ul))
        .clamp(0.0, TPUT_UL_CAP_MBPS);

        samples.push(RadioSample {
            t_ms: (t_s * 1000.0).round() as u64,
            lat,
            lon,
            speed_kmh: speed,
            env,
            rsrp_dbm: rsrp_rep,
            rsrq_db: rsrq_rep,
            rssi_dbm: rssi_rep,
            sinr_db: sinr_rep,
            cqi,
            rank,
            rsrp_margin_db: margin_p_rep,
            rsrq_margin_db: margin_q_rep,
            t_since_ho_s: t_since_ho,
            cell_id: serving,
            cell_load,
            active_ues,
            cell_tput_dl_mbps: cell_tput_dl,
            cell_tput_ul_mbps: cell_tput_ul,
            tput_dl_mbps: tput_dl,
            tput_ul_mbps: tput_ul,
            protocol: Protocol::Udp,
        });
    }

    MeasurementRun {
        run_id: format!("run{run_idx:02}"),
        device_id,
        device_grade: cfg.device_grade,
        direction,
        sample_period_s: period,
        samples,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::column_series;

    fn small_cfg() -> GeneratorConfig {
        GeneratorConfig {
            n_runs: 2,
            run_duration_s: 300.0,
            ..GeneratorConfig::default()
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let cfg = small_cfg();
        let a = generate(&cfg).unwrap();
        let b = generate(&cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn different_seeds_differ() {
        let cfg = small_cfg();
        let other = GeneratorConfig { seed: 8, ..small_cfg() };
        let a = generate(&cfg).unwrap();
        let b = generate(&other).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn zero_noise_fixed_regime_gives_constant_phy() {
        let mut cfg = small_cfg();
        cfg.regime_schedule = vec![RegimeSegment { env: Env::Suburban, duration_s: 300.0 }];
        cfg.noise_sigma = PhyParams {
            rsrp: 0.0,
            rsrq: 0.0,
            rssi: 0.0,
            sinr: 0.0,
            rsrp_margin: 0.0,
            rsrq_margin: 0.0,
        };
        cfg.load_process = LoadProcess {
            sigma: 0.0,
            per_run_offset_sd: 0.0,
            ramp_sd: 0.0,
            ues_jitter_sd: 0.0,
            ..LoadProcess::default()
        };
        cfg.target_noise = TargetNoise {
            sigma_dl: 0.0,
            sigma_ul: 0.0,
            iid_sigma_dl: 0.0,
            iid_sigma_ul: 0.0,
            per_run_gain_sd: 0.0,
            ..TargetNoise::default()
        };
        let runs = generate(&cfg).unwrap();
        let prof = cfg.env_profiles.suburban;
        for run in &runs {
            for col in ["rsrp", "rsrq", "rssi", "sinr", "rsrp_margin", "rsrq_margin"] {
                let series = column_series(run, col).unwrap();
                let first = series[0];
                assert!(
                    series.iter().all(|v| (v - first).abs() < 1e-12),
                    "{col} not constant"
                );
            }
            assert_eq!(run.samples[0].rsrp_dbm, prof.rsrp_dbm);
            assert_eq!(run.samples[0].sinr_db, prof.sinr_db);
            assert_eq!(run.samples[0].cell_load, prof.cell_load);
        }
    }

    #[test]
    fn bounds_hold_on_default_config() {
        let cfg = small_cfg();
        let runs = generate(&cfg).unwrap();
        for run in &runs {
            run.validate().unwrap();
            for s in &run.samples {
                assert!((0.0..=TPUT_DL_CAP_MBPS).contains(&s.tput_dl_mbps));
                assert!((0.0..=TPUT_UL_CAP_MBPS).contains(&s.tput_ul_mbps));
                assert!(s.active_ues >= 1);
                assert!(s.rank == 1 || s.rank == 2);
            }
        }
    }

    #[test]
    fn regime_means_separate() {
        let mut cfg = GeneratorConfig { n_runs: 4, run_duration_s: 1200.0, ..small_cfg() };
        cfg.regime_schedule = vec![
            RegimeSegment { env: Env::Suburban, duration_s: 600.0 },
            RegimeSegment { env: Env::Highway, duration_s: 600.0 },
        ];
        cfg.schedule_rotation_s = 0.0;
        let runs = generate(&cfg).unwrap();
        let mut sub = Vec::new();
        let mut hwy = Vec::new();
        for run in &runs {
            for s in &run.samples {
                match s.env {
                    Env::Suburban => sub.push(s.rsrp_dbm),
                    Env::Highway => hwy.push(s.rsrp_dbm),
                    Env::Rural => {}
                }
            }
        }
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let diff = mean(&sub) - mean(&hwy);
        let expected = cfg.env_profiles.suburban.rsrp_dbm - cfg.env_profiles.highway.rsrp_dbm;
        // 3-sigma band around the configured offset; AR(1) samples are
        // correlated, so the effective sample count shrinks by
        // (1 - phi) / (1 + phi).
        let phi = cfg.ar_coefficient.rsrp;
        let n_eff = (sub.len().min(hwy.len()) as f64) * (1.0 - phi) / (1.0 + phi);
        let band = 2.0 * 3.0 * cfg.noise_sigma.rsrp / n_eff.sqrt();
        assert!(
            (diff - expected).abs() < band,
            "offset {diff} vs configured {expected} (band {band})"
        );
    }

    #[test]
    fn throughput_couplings_have_expected_signs() {
        let cfg = GeneratorConfig { n_runs: 6, run_duration_s: 900.0, ..small_cfg() };
        let runs = generate(&cfg).unwrap();
        let mut load = Vec::new();
        let mut sinr = Vec::new();
        let mut tput = Vec::new();
        for run in &runs {
            for s in &run.samples {
                load.push(s.cell_load);
                sinr.push(s.sinr_db);
                tput.push(s.tput_dl_mbps);
            }
        }
        let corr = |a: &[f64], b: &[f64]| {
            let n = a.len() as f64;
            let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
            let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
            let va: f64 = a.iter().map(|x| (x - ma) * (x - ma)).sum();
            let vb: f64 = b.iter().map(|y| (y - mb) * (y - mb)).sum();
            cov / (va.sqrt() * vb.sqrt())
        };
        assert!(corr(&load, &tput) < -0.1, "load-tput corr {}", corr(&load, &tput));
        assert!(corr(&sinr, &tput) > 0.1, "sinr-tput corr {}", corr(&sinr, &tput));
    }

    #[test]
    fn rejects_bad_configs() {
        let mut cfg = small_cfg();
        cfg.regime_schedule.clear();
        assert!(generate(&cfg).is_err());
        let mut cfg = small_cfg();
        cfg.regime_schedule[0].duration_s = -1.0;
        assert!(generate(&cfg).is_err());
        let mut cfg = small_cfg();
        cfg.sample_period_s = 0.0;
        assert!(generate(&cfg).is_err());
    }

    #[test]
    fn ce_grade_adds_reporting_noise() {
        let dme = GeneratorConfig { device_grade: DeviceGrade::Dme, ..small_cfg() };
        let ce = GeneratorConfig { device_grade: DeviceGrade::Ce, ..small_cfg() };
        let a = generate(&dme).unwrap();
        let b = generate(&ce).unwrap();
        // Same underlying truth, different reported PHY values.
        let d: Vec<f64> = a[0]
            .samples
            .iter()
            .zip(&b[0].samples)
            .map(|(x, y)| (x.rsrp_dbm - y.rsrp_dbm).abs())
            .collect();
        let mean_abs = d.iter().sum::<f64>() / d.len() as f64;
        assert!(mean_abs > 0.5, "ce noise too small: {mean_abs}");
        assert!(mean_abs < 4.0, "ce noise too large: {mean_abs}");
        // Targets unaffected by reporting noise.
        for (x, y) in a[0].samples.iter().zip(&b[0].samples) {
            assert_eq!(x.tput_dl_mbps, y.tput_dl_mbps);
        }
    }
}
