//! MacKinnon approximate p-values and critical values for the
//! augmented Dickey-Fuller test, constant-only regression, one I(1) series.
//!
//! The p-value uses the published response-surface polynomials: a
//! quadratic below the switch point `tau_star` and a cubic above it, both
//! mapped through the standard normal CDF; statistics outside
//! [`TAU_MIN`, `TAU_MAX`] saturate at p = 0 / 1. Critical values use the
//! 2010 refresh of the response surfaces, polynomial in `1/nobs`.

use statrs::function::erf::erfc;

/// Saturation bounds and small/large-p switch point for the constant-only
/// case with one I(1) series.
const TAU_MAX: f64 = 2.74;
const TAU_MIN: f64 = -18.83;
const TAU_STAR: f64 = -1.61;

/// Ascending-power polynomial coefficients of the response surface.
const SMALL_P: [f64; 3] = [2.1659, 1.4412, 0.038269];
const LARGE_P: [f64; 4] = [1.7339, 0.93202, -0.12745, -0.010368];

/// 2010 critical-value response surfaces (1%, 5%, 10%), ascending powers
/// of `1/nobs`.
const CRIT_1: [f64; 4] = [-3.43035, -6.5393, -16.786, -79.433];
const CRIT_5: [f64; 4] = [-2.86154, -2.8903, -4.234, -40.04];
const CRIT_10: [f64; 4] = [-2.56677, -1.5384, -2.809, 0.0];

fn polyval(coefs: &[f64], x: f64) -> f64 {
    coefs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// Standard normal CDF.
fn norm_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Approximate p-value for an ADF t-statistic (constant-only regression).
pub fn mackinnon_p(stat: f64) -> f64 {
    if stat > TAU_MAX {
        return 1.0;
    }
    if stat < TAU_MIN {
        return 0.0;
    }
    let z = if stat <= TAU_STAR {
        polyval(&SMALL_P, stat)
    } else {
        polyval(&LARGE_P, stat)
    };
    norm_cdf(z)
}

/// Finite-sample 1% / 5% / 10% critical values for `nobs` effective
/// observations (constant-only regression).
pub fn critical_values(nobs: usize) -> [f64; 3] {
    let inv = 1.0 / nobs as f64;
    [
        polyval(&CRIT_1, inv),
        polyval(&CRIT_5, inv),
        polyval(&CRIT_10, inv),
    ]
}
