//! Page-Hinkley change detection for streaming QoS features, plus a
//! regime-drift counter used in cross-environment experiments.

use crate::error::{Error, Result};
use crate::trace::{column_series, MeasurementRun};

/// Page-Hinkley detector configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhConfig {
    /// Magnitude tolerance: deviations below `delta` are ignored.
    pub delta: f64,
    /// Alarm threshold on the accumulated drift statistic.
    pub lambda: f64,
    /// Track downward deviations as well as upward ones.
    pub two_sided: bool,
}

impl PhConfig {
    pub fn one_sided(delta: f64, lambda: f64) -> Self {
        Self { delta, lambda, two_sided: false }
    }

    pub fn two_sided(delta: f64, lambda: f64) -> Self {
        Self { delta, lambda, two_sided: true }
    }

    /// Conventional pairing `lambda = 10 * delta` for a positive delta.
    pub fn with_default_lambda(delta: f64, two_sided: bool) -> Self {
        Self { delta, lambda: 10.0 * delta, two_sided }
    }

    fn validate(&self) -> Result<()> {
        if !self.delta.is_finite() || self.delta < 0.0 {
            return Err(Error::invalid("delta must be finite and >= 0"));
        }
        if !self.lambda.is_finite() || self.lambda <= 0.0 {
            return Err(Error::invalid("lambda must be finite and > 0"));
        }
        Ok(())
    }
}

/// Incremental Page-Hinkley state. Feed samples with [`PhState::step`];
/// the detector resets itself after each alarm.
///
/// The running mean normally starts empty (first sample becomes the
/// mean). [`PhState::with_reference`] instead anchors it on a known
/// reference level with a given history weight — used when monitoring a
/// stream against a training distribution — and resets return to that
/// anchored state.
#[derive(Debug, Clone, PartialEq)]
pub struct PhState {
    config: PhConfig,
    ref_mean: f64,
    ref_weight: usize,
    n: usize,
    mean: f64,
    cum_up: f64,
    min_up: f64,
    cum_dn: f64,
    max_dn: f64,
}

/// Outcome of one detector step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhStep {
    /// Current test statistic (largest side if two-sided).
    pub ph_value: f64,
    /// True when the statistic exceeded lambda at this sample.
    pub alarm: bool,
}

impl PhState {
    pub fn new(config: PhConfig) -> Result<Self> {
        Self::with_reference(config, 0.0, 0)
    }

    /// Detector whose running mean starts at `ref_mean` carrying
    /// `ref_weight` samples of history.
    pub fn with_reference(config: PhConfig, ref_mean: f64, ref_weight: usize) -> Result<Self> {
        config.validate()?;
        if !ref_mean.is_finite() {
            return Err(Error::NonFinite("reference mean".into()));
        }
        let mut state = Self {
            config,
            ref_mean,
            ref_weight,
            n: 0,
            mean: 0.0,
            cum_up: 0.0,
            min_up: 0.0,
            cum_dn: 0.0,
            max_dn: 0.0,
        };
        state.reset();
        Ok(state)
    }

    /// Number of samples absorbed since the last reset (excluding any
    /// reference history weight).
    pub fn samples_since_reset(&self) -> usize {
        self.n.saturating_sub(self.ref_weight)
    }

    fn reset(&mut self) {
        self.n = self.ref_weight;
        self.mean = if self.ref_weight > 0 { self.ref_mean } else { 0.0 };
        self.cum_up = 0.0;
        self.min_up = 0.0;
        self.cum_dn = 0.0;
        self.max_dn = 0.0;
    }

    /// Absorb one sample and report the updated statistic.
    pub fn step(&mut self, x: f64) -> Result<PhStep> {
        if !x.is_finite() {
            return Err(Error::NonFinite("drift detector input".into()));
        }
        self.n += 1;
        // Running mean includes the current sample.
        self.mean += (x - self.mean) / self.n as f64;
        self.cum_up += x - self.mean - self.config.delta;
        self.min_up = self.min_up.min(self.cum_up);
        let mut ph = self.cum_up - self.min_up;
        if self.config.two_sided {
            self.cum_dn += x - self.mean + self.config.delta;
            self.max_dn = self.max_dn.max(self.cum_dn);
            ph = ph.max(self.max_dn - self.cum_dn);
        }
        let alarm = ph > self.config.lambda;
        if alarm {
            self.reset();
        }
        Ok(PhStep { ph_value: ph, alarm })
    }
}

/// One detected change point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftAlarm {
    /// Sample index (0-based) at which the alarm fired.
    pub index: usize,
    /// Statistic value at the alarm.
    pub ph_value: f64,
}

/// All change points detected over one stream.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DriftLog {
    /// Alarms in stream order (strictly increasing indices).
    pub alarms: Vec<DriftAlarm>,
}

impl DriftLog {
    pub fn len(&self) -> usize {
        self.alarms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alarms.is_empty()
    }
}

/// Run the detector over a whole series and collect every alarm.
pub fn detect_drifts(x: &[f64], config: PhConfig) -> Result<DriftLog> {
    let mut state = PhState::new(config)?;
    let mut log = DriftLog::default();
    for (i, &v) in x.iter().enumerate() {
        let step = state.step(v)?;
        if step.alarm {
            log.alarms.push(DriftAlarm { index: i, ph_value: step.ph_value });
        }
    }
    Ok(log)
}

/// Configuration for counting drift alarms that a train/test regime pair
/// induces on a monitored feature.
#[derive(Debug, Clone, PartialEq)]
pub struct RegimeDriftConfig {
    /// Monitored feature column (e.g. `"rsrp"`).
    pub feature: String,
    /// `delta = sigma_multiplier * std(train feature)`.
    pub sigma_multiplier: f64,
    /// `lambda = lambda_multiplier * delta`.
    pub lambda_multiplier: f64,
    /// Two-sided detection (recommended for regime analysis).
    pub two_sided: bool,
}

impl Default for RegimeDriftConfig {
    fn default() -> Self {
        Self {
            feature: "rsrp".into(),
            sigma_multiplier: 2.0,
            lambda_multiplier: 10.0,
            two_sided: true,
        }
    }
}

/// Count drift alarms raised while streaming the test runs through a
/// detector calibrated on the training runs.
///
/// The tolerance `delta` is `sigma_multiplier` times the training-set
/// standard deviation of the monitored feature and the alarm threshold is
/// `lambda_multiplier * delta`. The detector's running mean is anchored
/// on the training mean (with the training sample count as history
/// weight), then the test runs are streamed back to back; every alarm
/// re-arms the detector against the training reference, mimicking a
/// deployed monitor that keeps its calibration.
pub fn regime_drift_count(
    train: &[MeasurementRun],
    test: &[MeasurementRun],
    config: &RegimeDriftConfig,
) -> Result<usize> {
    if train.is_empty() || test.is_empty() {
        return Err(Error::invalid("regime drift needs non-empty train and test sets"));
    }
    let mut values = Vec::new();
    for run in train {
        values.extend(column_series(run, &config.feature)?);
    }
    let n = values.len();
    if n < 2 {
        return Err(Error::TooShort { need: 2, got: n });
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
    let sd = var.sqrt();
    if sd <= 0.0 {
        return Err(Error::degenerate("zero-variance training feature"));
    }
    let delta = config.sigma_multiplier * sd;
    let lambda = config.lambda_multiplier * delta;
    let ph_config = PhConfig { delta, lambda, two_sided: config.two_sided };
    let mut state = PhState::with_reference(ph_config, mean, n)?;
    let mut count = 0;
    for run in test {
        for v in column_series(run, &config.feature)? {
            if state.step(v)?.alarm {
                count += 1;
            }
        }
    }
    Ok(count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, StandardNormal};

    fn normal_stream(seed: u64, n: usize, mean: f64) -> Vec<f64> {
        let mut rng = crate::rng::rng_for(seed, 0);
        (0..n)
            .map(|_| {
                let e: f64 = StandardNormal.sample(&mut rng);
                mean + e
            })
            .collect()
    }

    /// Hand-traced fixture: x = [0,0,0,10], delta = 0, lambda = 4.
    ///
    /// t=1..3: mean 0, U = 0, min 0, PH 0
    /// t=4: mean 2.5, U = 0 + (10 - 2.5) = 7.5, min 0, PH 7.5 > 4 -> alarm
    #[test]
    fn step_fixture_hand_traced() {
        let cfg = PhConfig::one_sided(0.0, 4.0);
        let log = detect_drifts(&[0.0, 0.0, 0.0, 10.0], cfg).unwrap();
        assert_eq!(log.len(), 1);
        assert_eq!(log.alarms[0].index, 3);
        assert_eq!(log.alarms[0].ph_value, 7.5);
    }

    #[test]
    fn statistic_is_shift_invariant() {
        // Fixture chosen so every running mean is exactly representable
        // (each prefix sum divides exactly by its length), making the
        // shifted trace reproduce the statistic bit for bit.
        let x = [4.0, 0.0, 2.0, 10.0, 4.0, 4.0, 4.0, 12.0];
        for shift in [64.0, -128.0, 0.25] {
            let cfg = PhConfig::one_sided(0.5, 3.0);
            let mut a = PhState::new(cfg).unwrap();
            let mut b = PhState::new(cfg).unwrap();
            for &v in &x {
                let sa = a.step(v).unwrap();
                let sb = b.step(v + shift).unwrap();
                assert_eq!(sa.ph_value, sb.ph_value, "shift {shift}");
                assert_eq!(sa.alarm, sb.alarm, "shift {shift}");
            }
        }
    }

    #[test]
    fn no_alarm_on_constant_stream() {
        let cfg = PhConfig::one_sided(0.0, 0.5);
        let log = detect_drifts(&vec![5.0; 1000], cfg).unwrap();
        assert!(log.is_empty());
    }

    #[test]
    fn empty_stream_gives_empty_log() {
        let cfg = PhConfig::one_sided(0.5, 5.0);
        assert!(detect_drifts(&[], cfg).unwrap().is_empty());
    }

    #[test]
    fn detects_mean_shift_within_hundred_samples() {
        // 500 samples N(0,1) then 500 samples N(5,1): the first alarm must
        // land within 100 samples of the change point on every seed.
        for seed in 0..20 {
            let mut x = normal_stream(9_000 + seed, 500, 0.0);
            x.extend(normal_stream(19_000 + seed, 500, 5.0));
            let log = detect_drifts(&x, PhConfig::one_sided(0.5, 50.0)).unwrap();
            assert!(!log.is_empty(), "seed {seed}: no alarm");
            let first = log.alarms[0].index;
            assert!(
                (500..600).contains(&first),
                "seed {seed}: first alarm at {first}"
            );
        }
    }

    #[test]
    fn two_sided_detects_downward_shift() {
        let mut x = normal_stream(77, 400, 0.0);
        x.extend(normal_stream(78, 400, -5.0));
        let one = detect_drifts(&x, PhConfig::one_sided(0.5, 50.0)).unwrap();
        let two = detect_drifts(&x, PhConfig::two_sided(0.5, 50.0)).unwrap();
        assert!(
            !one.alarms.iter().any(|a| (400..500).contains(&a.index)),
            "up-only detector should miss a downward shift"
        );
        assert!(two.alarms.iter().any(|a| (400..500).contains(&a.index)));
    }

    #[test]
    fn false_alarm_rate_is_low_on_stationary_noise() {
        let mut with_alarm = 0;
        let trials = 100;
        for seed in 0..trials {
            let x = normal_stream(50_000 + seed, 500, 0.0);
            let cfg = PhConfig::one_sided(1.0, 50.0);
            if !detect_drifts(&x, cfg).unwrap().is_empty() {
                with_alarm += 1;
            }
        }
        assert!(with_alarm <= 5, "{with_alarm}/{trials} stationary streams alarmed");
    }

    #[test]
    fn alarm_set_shrinks_with_larger_lambda() {
        let mut x = normal_stream(31, 300, 0.0);
        x.extend(normal_stream(32, 300, 4.0));
        x.extend(normal_stream(33, 300, -2.0));
        let small = detect_drifts(&x, PhConfig::two_sided(0.25, 20.0)).unwrap();
        let large = detect_drifts(&x, PhConfig::two_sided(0.25, 60.0)).unwrap();
        assert!(large.len() <= small.len());
        // And alarm counts are non-increasing in delta too.
        let tight = detect_drifts(&x, PhConfig::two_sided(0.1, 20.0)).unwrap();
        let loose = detect_drifts(&x, PhConfig::two_sided(1.0, 20.0)).unwrap();
        assert!(loose.len() <= tight.len());
    }

    #[test]
    fn detector_resets_after_alarm() {
        let cfg = PhConfig::one_sided(0.0, 4.0);
        let mut st = PhState::new(cfg).unwrap();
        let fresh = st.clone();
        for &v in &[0.0, 0.0, 0.0, 10.0] {
            st.step(v).unwrap();
        }
        assert_eq!(st, fresh, "state after alarm equals the initial state");
        // An identical follow-up stream alarms again at its own 4th sample.
        let mut alarm_at = None;
        for (i, &v) in [0.0, 0.0, 0.0, 10.0].iter().enumerate() {
            if st.step(v).unwrap().alarm {
                alarm_at = Some(i);
            }
        }
        assert_eq!(alarm_at, Some(3));
    }

    #[test]
    fn rejects_bad_config_and_input() {
        assert!(PhState::new(PhConfig::one_sided(-0.1, 1.0)).is_err());
        assert!(PhState::new(PhConfig::one_sided(0.1, 0.0)).is_err());
        assert!(PhState::new(PhConfig::one_sided(f64::NAN, 1.0)).is_err());
        let mut st = PhState::new(PhConfig::one_sided(0.1, 1.0)).unwrap();
        assert!(st.step(f64::INFINITY).is_err());
    }

    fn regime_runs(env: crate::trace::Env, seed: u64) -> Vec<MeasurementRun> {
        use crate::trace::{generate, GeneratorConfig, RegimeSegment};
        let cfg = GeneratorConfig {
            seed,
            n_runs: 4,
            run_duration_s: 600.0,
            regime_schedule: vec![RegimeSegment { env, duration_s: 600.0 }],
            ..GeneratorConfig::default()
        };
        generate(&cfg).unwrap()
    }

    #[test]
    fn regime_drift_cross_env_exceeds_in_env() {
        use crate::trace::Env;
        let sub_a = regime_runs(Env::Suburban, 1);
        let sub_b = regime_runs(Env::Suburban, 2);
        let hwy = regime_runs(Env::Highway, 3);
        let cfg = RegimeDriftConfig::default();
        let in_env = regime_drift_count(&sub_a, &sub_b, &cfg).unwrap();
        let cross = regime_drift_count(&sub_a, &hwy, &cfg).unwrap();
        assert!(
            cross > in_env,
            "cross-env alarms ({cross}) should exceed in-env ({in_env})"
        );
    }

    #[test]
    fn regime_drift_in_distribution_with_generous_lambda_is_zero() {
        use crate::trace::Env;
        let sub_a = regime_runs(Env::Suburban, 4);
        let sub_b = regime_runs(Env::Suburban, 5);
        let cfg = RegimeDriftConfig {
            lambda_multiplier: 40.0,
            ..RegimeDriftConfig::default()
        };
        assert_eq!(regime_drift_count(&sub_a, &sub_b, &cfg).unwrap(), 0);
    }

    #[test]
    fn regime_drift_monotone_in_sigma_multiplier() {
        use crate::trace::Env;
        let sub = regime_runs(Env::Suburban, 6);
        let hwy = regime_runs(Env::Highway, 7);
        let at = |m: f64| {
            let cfg = RegimeDriftConfig { sigma_multiplier: m, ..RegimeDriftConfig::default() };
            regime_drift_count(&sub, &hwy, &cfg).unwrap()
        };
        assert!(at(1.0) >= at(2.0));
    }

    #[test]
    fn regime_drift_zero_variance_train_errors() {
        use crate::trace::Env;
        let mut runs = regime_runs(Env::Suburban, 8);
        for run in &mut runs {
            for s in &mut run.samples {
                s.rsrp_dbm = -84.0;
            }
        }
        let test = regime_runs(Env::Suburban, 9);
        let cfg = RegimeDriftConfig::default();
        assert!(matches!(
            regime_drift_count(&runs, &test, &cfg),
            Err(Error::Degenerate(_))
        ));
    }
}
