//! Stationarity diagnostics: augmented Dickey-Fuller testing (single-shot
//! and accumulated over growing prefixes) and autocorrelation analysis.

pub mod mackinnon;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::GramOls;

/// Minimum series length accepted by [`adf_test`].
pub const MIN_SERIES_LEN: usize = 15;

/// Result of one augmented Dickey-Fuller test.
#[derive(Debug, Clone, PartialEq)]
pub struct AdfResult {
    /// t-statistic of the unit-root (lagged level) coefficient.
    pub statistic: f64,
    /// MacKinnon approximate p-value (constant-only regression).
    pub p_value: f64,
    /// AIC-selected lag order.
    pub lag_order: usize,
    /// Effective observations in the final regression.
    pub n_obs: usize,
    /// 1% / 5% / 10% critical values at `n_obs`.
    pub critical_values: [f64; 3],
}

/// p-values of ADF tests over growing prefixes of a series.
#[derive(Debug, Clone, PartialEq)]
pub struct AccumulatedAdf {
    /// Entry `t` is the p-value of the test on the prefix `[0..=t]`,
    /// present only at sampled prefix lengths that were long enough.
    pub p_values: Vec<Option<f64>>,
}

/// Schwert's rule for the default maximum lag: `floor(12 (T/100)^{1/4})`,
/// clamped so the regression keeps positive degrees of freedom.
pub fn default_max_lag(n: usize) -> usize {
    let schwert = (12.0 * (n as f64 / 100.0).powf(0.25)).floor() as usize;
    let cap = (n / 2).saturating_sub(2);
    schwert.min(cap)
}

/// Augmented Dickey-Fuller unit-root test with constant, no trend.
///
/// Fits `Δx_t = α + γ x_{t−1} + Σ_{i=1..p} β_i Δx_{t−i} + ε` by OLS for
/// every `p ∈ [0, max_lag]` over a common sample, selects `p` minimizing
/// the AIC (ties to the smaller `p`), refits at the chosen lag on the full
/// usable sample, and reports the t-value of `γ` with its MacKinnon
/// approximate p-value. A low p-value is evidence of stationarity.
pub fn adf_test(x: &[f64], max_lag: Option<usize>) -> Result<AdfResult> {
    let n = x.len();
    if n < MIN_SERIES_LEN {
        return Err(Error::TooShort { need: MIN_SERIES_LEN, got: n });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("series contains non-finite values".into()));
    }
    let first = x[0];
    if x.iter().all(|v| *v == first) {
        return Err(Error::degenerate("zero-variance series"));
    }

    let hard_cap = (n / 2).saturating_sub(2);
    let max_lag = match max_lag {
        Some(m) => {
            if m > hard_cap {
                return Err(Error::invalid(format!(
                    "max_lag {m} too large for series of length {n} (cap {hard_cap})"
                )));
            }
            m
        }
        None => default_max_lag(n),
    };

    let xdiff: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let nd = xdiff.len();

    // Lag selection on the common trimmed sample (rows t = max_lag..nd-1):
    // design columns [const, x_{t-1}, Δx_{t-1}, .., Δx_{t-max_lag}], so the
    // first 2+p columns form the design for lag order p.
    let n_auto = nd - max_lag;
    let k_full = 2 + max_lag;
    let mut design = Vec::with_capacity(n_auto * k_full);
    let mut y_auto = Vec::with_capacity(n_auto);
    for t in max_lag..nd {
        design.push(1.0);
        design.push(x[t]);
        for j in 1..=max_lag {
            design.push(xdiff[t - j]);
        }
        y_auto.push(xdiff[t]);
    }
    let gram = GramOls::new(&design, n_auto, k_full, &y_auto);
    let mut best: Option<(f64, usize)> = None;
    for p in 0..=max_lag {
        let fit = gram.fit_leading(2 + p)?;
        if fit.ssr <= 0.0 {
            return Err(Error::degenerate("perfect fit in lag selection"));
        }
        let aic = fit.aic();
        if best.map_or(true, |(b, _)| aic < b) {
            best = Some((aic, p));
        }
    }
    let (_, best_lag) = best.expect("at least one lag candidate");

    // Refit at the selected lag over the full usable sample.
    let n_fit = nd - best_lag;
    let k_fit = 2 + best_lag;
    let mut design = Vec::with_capacity(n_fit * k_fit);
    let mut y_fit = Vec::with_capacity(n_fit);
    for t in best_lag..nd {
        design.push(1.0);
        design.push(x[t]);
        for j in 1..=best_lag {
            design.push(xdiff[t - j]);
        }
        y_fit.push(xdiff[t]);
    }
    let gram = GramOls::new(&design, n_fit, k_fit, &y_fit);
    let (fit, se) = gram.fit_leading_with_se(k_fit)?;
    if se[1] <= 0.0 || !se[1].is_finite() {
        return Err(Error::degenerate("degenerate standard error in ADF regression"));
    }
    let statistic = fit.coef[1] / se[1];
    Ok(AdfResult {
        statistic,
        p_value: mackinnon::mackinnon_p(statistic),
        lag_order: best_lag,
        n_obs: n_fit,
        critical_values: mackinnon::critical_values(n_fit),
    })
}

/// Accumulated ADF: tests every `stride`-th prefix of the series.
/// Prefixes that are too short (or degenerate) are recorded as missing.
pub fn accumulated_adf(x: &[f64], stride: usize) -> Result<AccumulatedAdf> {
    if stride < 1 {
        return Err(Error::invalid("stride must be >= 1"));
    }
    let n = x.len();
    let lengths: Vec<usize> = (1..=n / stride).map(|k| k * stride).collect();
    let computed: Vec<(usize, Option<f64>)> = lengths
        .par_iter()
        .map(|&len| {
            let p = adf_test(&x[..len], None).ok().map(|r| r.p_value);
            (len, p)
        })
        .collect();
    let mut p_values = vec![None; n];
    for (len, p) in computed {
        p_values[len - 1] = p;
    }
    Ok(AccumulatedAdf { p_values })
}

/// Sample autocorrelation function: `acf(l)` = autocovariance at lag `l`
/// divided by the sample variance; `acf(0) = 1`.
pub fn autocorrelation(x: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let n = x.len();
    if n <= max_lag {
        return Err(Error::TooShort { need: max_lag + 1, got: n });
    }
    let mean = x.iter().sum::<f64>() / n as f64;
    let var: f64 = x.iter().map(|v| (v - mean) * (v - mean)).sum();
    if var <= 0.0 {
        return Err(Error::degenerate("zero-variance series"));
    }
    let mut acf = Vec::with_capacity(max_lag + 1);
    for lag in 0..=max_lag {
        let cov: f64 = (0..n - lag)
            .map(|t| (x[t] - mean) * (x[t + lag] - mean))
            .sum();
        acf.push(cov / var);
    }
    Ok(acf)
}

// ---------------------------------------------------------------------------
// Reference series generators (used by diagnostics, tests, and benchmarks)
// ---------------------------------------------------------------------------

/// i.i.d. standard normal series from a seeded stream.
pub fn gaussian_series(seed: u64, n: usize) -> Vec<f64> {
    use rand_distr::{Distribution, StandardNormal};
    let mut rng = crate::rng::rng_for(seed, 0);
    (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
}

/// Random walk: cumulative sum of i.i.d. standard normal increments.
pub fn random_walk_series(seed: u64, n: usize) -> Vec<f64> {
    let mut acc = 0.0;
    gaussian_series(seed, n)
        .into_iter()
        .map(|e| {
            acc += e;
            acc
        })
        .collect()
}

/// AR(1) series `x_t = mean + d_t`, `d_t = phi d_{t−1} + ε_t` with
/// innovation std-dev `sigma`, started at the mean.
pub fn ar1_series(seed: u64, n: usize, phi: f64, sigma: f64, mean: f64) -> Vec<f64> {
    let mut d = 0.0;
    gaussian_series(seed, n)
        .into_iter()
        .map(|e| {
            d = phi * d + sigma * e;
            mean + d
        })
        .collect()
}
