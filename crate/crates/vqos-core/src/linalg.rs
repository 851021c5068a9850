//! Shared ordinary-least-squares plumbing built on nalgebra.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// An OLS fit of `y ≈ X β`.
#[derive(Debug, Clone)]
pub struct OlsFit {
    /// Estimated coefficients, one per design column.
    pub coef: Vec<f64>,
    /// Residual sum of squares.
    pub ssr: f64,
    /// Rows used.
    pub n: usize,
    /// Design columns (assumed full rank).
    pub k: usize,
}

impl OlsFit {
    /// Gaussian log-likelihood at the MLE variance.
    pub fn log_likelihood(&self) -> f64 {
        let n = self.n as f64;
        -n / 2.0 * ((2.0 * std::f64::consts::PI).ln() + (self.ssr / n).ln() + 1.0)
    }

    /// Akaike information criterion (`-2 llf + 2 k`).
    pub fn aic(&self) -> f64 {
        -2.0 * self.log_likelihood() + 2.0 * self.k as f64
    }
}

/// Fit OLS via QR decomposition. `x` is row-major `n × k`.
pub fn ols(x_flat: &[f64], n: usize, k: usize, y: &[f64]) -> Result<OlsFit> {
    debug_assert_eq!(x_flat.len(), n * k);
    debug_assert_eq!(y.len(), n);
    if n < k {
        return Err(Error::degenerate(format!(
            "OLS needs at least as many rows ({n}) as columns ({k})"
        )));
    }
    let x = DMatrix::from_row_slice(n, k, x_flat);
    let yv = DVector::from_column_slice(y);
    let svd = x.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smax <= 0.0 || smin <= smax * 1e-12 {
        return Err(Error::degenerate("rank-deficient design matrix"));
    }
    let coef = svd
        .solve(&yv, 0.0)
        .map_err(|e| Error::degenerate(format!("OLS solve failed: {e}")))?;
    let resid = &yv - &x * &coef;
    let ssr = resid.dot(&resid);
    Ok(OlsFit { coef: coef.iter().copied().collect(), ssr, n, k })
}

/// Fit OLS and also return the standard error of each coefficient,
/// using `sigma^2 (X'X)^{-1}` with `sigma^2 = ssr / (n - k)`.
pub fn ols_with_se(x_flat: &[f64], n: usize, k: usize, y: &[f64]) -> Result<(OlsFit, Vec<f64>)> {
    let fit = ols(x_flat, n, k, y)?;
    if n <= k {
        return Err(Error::degenerate("no residual degrees of freedom"));
    }
    let x = DMatrix::from_row_slice(n, k, x_flat);
    let xtx = x.transpose() * &x;
    let inv = xtx
        .try_inverse()
        .ok_or_else(|| Error::degenerate("singular X'X in OLS"))?;
    let sigma2 = fit.ssr / (n - k) as f64;
    let se = (0..k).map(|j| (sigma2 * inv[(j, j)]).sqrt()).collect();
    Ok((fit, se))
}

/// Precomputed Gram matrices for fitting a family of nested OLS designs
/// that share leading columns (cheap repeated fits over the same rows).
#[derive(Debug, Clone)]
pub struct GramOls {
    xtx: DMatrix<f64>,
    xty: DVector<f64>,
    yty: f64,
    n: usize,
}

impl GramOls {
    /// Accumulate Gram matrices from a row-major `n × k` design and `y`.
    pub fn new(x_flat: &[f64], n: usize, k: usize, y: &[f64]) -> GramOls {
        debug_assert_eq!(x_flat.len(), n * k);
        debug_assert_eq!(y.len(), n);
        let x = DMatrix::from_row_slice(n, k, x_flat);
        let yv = DVector::from_column_slice(y);
        GramOls {
            xtx: x.transpose() * &x,
            xty: x.transpose() * &yv,
            yty: yv.dot(&yv),
            n,
        }
    }

    /// Fit the design restricted to its first `k` columns.
    pub fn fit_leading(&self, k: usize) -> Result<OlsFit> {
        let xtx = self.xtx.view((0, 0), (k, k)).into_owned();
        let xty = DVector::from_iterator(k, self.xty.iter().take(k).copied());
        let chol = xtx
            .cholesky()
            .ok_or_else(|| Error::degenerate("singular design in nested OLS"))?;
        let coef = chol.solve(&xty);
        // At the minimizer, ssr = y'y - b'X'y.
        let ssr = (self.yty - coef.dot(&xty)).max(0.0);
        Ok(OlsFit { coef: coef.iter().copied().collect(), ssr, n: self.n, k })
    }

    /// Fit the first `k` columns and return per-coefficient standard errors.
    pub fn fit_leading_with_se(&self, k: usize) -> Result<(OlsFit, Vec<f64>)> {
        let fit = self.fit_leading(k)?;
        if self.n <= k {
            return Err(Error::degenerate("no residual degrees of freedom"));
        }
        let xtx = self.xtx.view((0, 0), (k, k)).into_owned();
        let inv = xtx
            .try_inverse()
            .ok_or_else(|| Error::degenerate("singular X'X in nested OLS"))?;
        let sigma2 = fit.ssr / (self.n - k) as f64;
        let se = (0..k).map(|j| (sigma2 * inv[(j, j)]).sqrt()).collect();
        Ok((fit, se))
    }
}

/// First two principal components of a row-major `n × k` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Pca2 {
    /// Per-row projections onto the two components.
    pub scores: Vec<[f64; 2]>,
    /// Component loadings, one length-`k` vector per component.
    pub components: [Vec<f64>; 2],
    /// Fraction of total variance captured by each component.
    pub explained: [f64; 2],
}

/// Project rows onto their first two principal components (columns are
/// mean-centered internally; standardize beforehand if scales differ).
///
/// Component signs follow a fixed convention — the largest-magnitude
/// loading of each component is positive — so results are deterministic.
/// A rank-1 input yields a second component of zero loadings, zero scores,
/// and zero explained variance.
pub fn pca2(x_flat: &[f64], n: usize, k: usize) -> Result<Pca2> {
    debug_assert_eq!(x_flat.len(), n * k);
    if n < 2 {
        return Err(Error::invalid("PCA needs at least 2 rows"));
    }
    if k < 2 {
        return Err(Error::invalid("PCA needs at least 2 columns"));
    }
    let mut x = DMatrix::from_row_slice(n, k, x_flat);
    for j in 0..k {
        let mean = x.column(j).sum() / n as f64;
        for i in 0..n {
            x[(i, j)] -= mean;
        }
    }
    let svd = x.clone().svd(false, true);
    let v_t = svd.v_t.as_ref().expect("SVD with V requested");
    let total: f64 = svd.singular_values.iter().map(|s| s * s).sum();

    let mut scores = vec![[0.0; 2]; n];
    let mut components: [Vec<f64>; 2] = [vec![0.0; k], vec![0.0; k]];
    let mut explained = [0.0; 2];
    for c in 0..2usize.min(v_t.nrows()) {
        let sigma = svd.singular_values[c];
        if sigma * sigma <= total * 1e-24 {
            continue; // effectively rank-deficient: leave the component zero
        }
        let mut load: Vec<f64> = v_t.row(c).iter().copied().collect();
        let top = load
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let flip = if load[top] < 0.0 { -1.0 } else { 1.0 };
        for l in &mut load {
            *l *= flip;
        }
        for i in 0..n {
            let mut dot = 0.0;
            for j in 0..k {
                dot += x[(i, j)] * load[j];
            }
            scores[i][c] = dot;
        }
        explained[c] = if total > 0.0 { sigma * sigma / total } else { 0.0 };
        components[c] = load;
    }
    Ok(Pca2 { scores, components, explained })
}
