//! Shapley-value feature attributions for fitted models.
//!
//! The value function of a coalition `S` is the interventional expectation
//! `v(S) = mean over background rows b of f(x_S ∪ b_{!S})`: features in `S`
//! take the explained instance's values, the rest are substituted from each
//! background row in turn. With `p` features at most
//! [`DEFAULT_MAX_EXACT_FEATURES`], all `2^p` coalitions are enumerated and
//! the classic factorial-weighted sum gives exact Shapley values. Above the
//! threshold, coalitions are drawn under the Shapley kernel (complete
//! per-size strata first, then kernel-mass-proportional sampling) and the
//! attributions solve a weighted least squares with the efficiency
//! constraint `Σ phi = f(x) − base` eliminated analytically.

use std::collections::HashMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{LearningTable, SampleKey};
use crate::linalg;
use crate::models::{predict, FittedModel};
use crate::rng::rng_for;

/// Largest feature count explained by full coalition enumeration.
pub const DEFAULT_MAX_EXACT_FEATURES: usize = 12;
/// Coalition budget of the sampled (kernel-weighted) path.
pub const DEFAULT_SAMPLED_COALITIONS: usize = 2048;
/// Default number of background rows drawn by [`sample_background`].
pub const DEFAULT_BACKGROUND_SIZE: usize = 100;

/// Knobs of the attribution procedure. Defaults match the documented
/// behaviour: enumeration up to 12 features, 2048 sampled coalitions beyond.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShapConfig {
    /// Schemas up to this many features use exact enumeration.
    pub max_exact_features: usize,
    /// Coalition budget when sampling (must be at least `2p`).
    pub n_coalitions: usize,
    /// Master seed for coalition sampling (the exact path consumes no
    /// randomness). Row `i` of a summary draws from stream `i`.
    pub seed: u64,
}

impl Default for ShapConfig {
    fn default() -> Self {
        ShapConfig {
            max_exact_features: DEFAULT_MAX_EXACT_FEATURES,
            n_coalitions: DEFAULT_SAMPLED_COALITIONS,
            seed: 0,
        }
    }
}

/// Attribution of one prediction to the model's input features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapExplanation {
    /// Feature names, aligned with `phi`.
    pub columns: Vec<String>,
    /// Mean model output over the background (`v(∅)`).
    pub base_value: f64,
    /// Per-feature attribution; `base_value + Σ phi = f(x)`.
    pub phi: Vec<f64>,
    /// True when every coalition was enumerated (no sampling error).
    pub exact: bool,
}

impl ShapExplanation {
    /// Reconstructed prediction `base_value + Σ phi`.
    pub fn prediction(&self) -> f64 {
        self.base_value + self.phi.iter().sum::<f64>()
    }
}

/// One `(instance, feature)` point of a beeswarm plot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeeswarmRecord {
    /// Row index within the explained instance table.
    pub row: usize,
    /// Feature index within `columns`.
    pub feature: usize,
    /// The instance's value of that feature.
    pub value: f64,
    /// The feature's attribution for that instance.
    pub phi: f64,
}

/// Aggregate attribution over a set of instances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapSummary {
    /// Feature names, aligned with `mean_abs_phi`.
    pub columns: Vec<String>,
    /// Mean |phi| per feature over all explained instances.
    pub mean_abs_phi: Vec<f64>,
    /// Feature indices sorted by descending `mean_abs_phi` (ties by index).
    pub ranking: Vec<usize>,
    /// One record per instance × feature, beeswarm-ready.
    pub records: Vec<BeeswarmRecord>,
    /// True when every per-instance explanation was exact.
    pub exact: bool,
}

impl ShapSummary {
    /// Rank (0 = most important) of the named feature, if present.
    pub fn rank_of(&self, column: &str) -> Option<usize> {
        let idx = self.columns.iter().position(|c| c == column)?;
        self.ranking.iter().position(|&f| f == idx)
    }
}

/// Draw `n` background rows uniformly without replacement (seeded shuffle).
/// Fewer rows than `n` returns the whole table reordered.
pub fn sample_background(table: &LearningTable, n: usize, seed: u64) -> Result<LearningTable> {
    if table.is_empty() {
        return Err(Error::invalid("background source table is empty"));
    }
    if n == 0 {
        return Err(Error::invalid("background size must be positive"));
    }
    let mut idx: Vec<usize> = (0..table.n_rows()).collect();
    let mut rng = rng_for(seed, 17);
    for i in (1..idx.len()).rev() {
        let j = rng.random_range(0..=i);
        idx.swap(i, j);
    }
    idx.truncate(n.min(table.n_rows()));
    table.take_rows(&idx)
}

/// Explain one row of `instances` against the model, marginalizing absent
/// features over `background`. Exact enumeration when the schema has at most
/// `cfg.max_exact_features` features, kernel-weighted sampling otherwise.
pub fn shap_explain(
    model: &FittedModel,
    instances: &LearningTable,
    row: usize,
    background: &LearningTable,
    cfg: &ShapConfig,
) -> Result<ShapExplanation> {
    validate_inputs(model, instances, background, cfg)?;
    if row >= instances.n_rows() {
        return Err(Error::invalid(format!(
            "instance row {row} out of range ({} rows)",
            instances.n_rows()
        )));
    }
    let p = instances.n_cols();
    let x = instances.row(row).to_vec();
    let position = instances.positions[row];
    let ctx = EvalContext { model, schema: &instances.columns, x: &x, position, background };
    let (base_value, phi, exact) = if p <= cfg.max_exact_features {
        let (b, f) = exact_shap(&ctx)?;
        (b, f, true)
    } else {
        sampled_shap(&ctx, cfg, row as u64)?
    };
    Ok(ShapExplanation { columns: instances.columns.clone(), base_value, phi, exact })
}

/// Explain every row of `instances` and aggregate mean |phi| per feature.
pub fn shap_summary(
    model: &FittedModel,
    instances: &LearningTable,
    background: &LearningTable,
    cfg: &ShapConfig,
) -> Result<ShapSummary> {
    validate_inputs(model, instances, background, cfg)?;
    if instances.is_empty() {
        return Err(Error::invalid("no instances to explain"));
    }
    let explanations: Vec<ShapExplanation> = (0..instances.n_rows())
        .into_par_iter()
        .map(|row| shap_explain(model, instances, row, background, cfg))
        .collect::<Result<_>>()?;

    let p = instances.n_cols();
    let n = instances.n_rows();
    let mut mean_abs_phi = vec![0.0; p];
    let mut records = Vec::with_capacity(n * p);
    for (row, ex) in explanations.iter().enumerate() {
        let values = instances.row(row);
        for j in 0..p {
            mean_abs_phi[j] += ex.phi[j].abs();
            records.push(BeeswarmRecord { row, feature: j, value: values[j], phi: ex.phi[j] });
        }
    }
    for m in &mut mean_abs_phi {
        *m /= n as f64;
    }
    let mut ranking: Vec<usize> = (0..p).collect();
    ranking.sort_by(|&a, &b| {
        mean_abs_phi[b].partial_cmp(&mean_abs_phi[a]).unwrap().then(a.cmp(&b))
    });
    let exact = explanations.iter().all(|e| e.exact);
    Ok(ShapSummary {
        columns: instances.columns.clone(),
        mean_abs_phi,
        ranking,
        records,
        exact,
    })
}

fn validate_inputs(
    model: &FittedModel,
    instances: &LearningTable,
    background: &LearningTable,
    cfg: &ShapConfig,
) -> Result<()> {
    let schema = model.schema();
    if instances.columns != schema {
        return Err(Error::Schema(format!(
            "instance columns {:?} do not match model schema {:?}",
            instances.columns, schema
        )));
    }
    if background.columns != schema {
        return Err(Error::Schema(format!(
            "background columns {:?} do not match model schema {:?}",
            background.columns, schema
        )));
    }
    if background.is_empty() {
        return Err(Error::invalid("background table is empty"));
    }
    let p = schema.len();
    if p == 0 {
        return Err(Error::invalid("model has no features to attribute"));
    }
    if p > 63 {
        return Err(Error::invalid(format!("too many features for attribution ({p} > 63)")));
    }
    if p > cfg.max_exact_features && cfg.n_coalitions < 2 * p {
        return Err(Error::invalid(format!(
            "coalition budget {} is too small for {p} features (need at least {})",
            cfg.n_coalitions,
            2 * p
        )));
    }
    Ok(())
}

/// Everything needed to evaluate the coalition value function.
struct EvalContext<'a> {
    model: &'a FittedModel,
    schema: &'a [String],
    x: &'a [f64],
    position: [f64; 2],
    background: &'a LearningTable,
}

impl EvalContext<'_> {
    /// `v(mask) = mean over background rows of f(x_mask ∪ b_!mask)`.
    /// Evaluated for many masks in parallel.
    fn coalition_values(&self, masks: &[u64]) -> Result<Vec<f64>> {
        masks.par_iter().map(|&mask| self.value(mask)).collect()
    }

    fn value(&self, mask: u64) -> Result<f64> {
        let p = self.schema.len();
        let nb = self.background.n_rows();
        let mut features = Vec::with_capacity(nb * p);
        for b in 0..nb {
            let brow = self.background.row(b);
            for j in 0..p {
                features.push(if mask >> j & 1 == 1 { self.x[j] } else { brow[j] });
            }
        }
        let table = LearningTable {
            columns: self.schema.to_vec(),
            features,
            target: vec![0.0; nb],
            keys: vec![SampleKey { run_id: "coalition".into(), t_ms: 0 }; nb],
            positions: vec![self.position; nb],
        };
        let preds = predict(self.model, &table)?;
        Ok(preds.iter().sum::<f64>() / nb as f64)
    }
}

/// Exact Shapley values by full enumeration of the `2^p` coalitions.
fn exact_shap(ctx: &EvalContext<'_>) -> Result<(f64, Vec<f64>)> {
    let p = ctx.schema.len();
    let n_masks = 1u64 << p;
    let masks: Vec<u64> = (0..n_masks).collect();
    let v = ctx.coalition_values(&masks)?;

    // Marginal-contribution weight of a coalition of size s (feature absent):
    // s! (p-1-s)! / p!, exact in f64 for p <= 18.
    let weights: Vec<f64> =
        (0..p).map(|s| factorial(s) * factorial(p - 1 - s) / factorial(p)).collect();
    let phi: Vec<f64> = (0..p)
        .into_par_iter()
        .map(|i| {
            let bit = 1u64 << i;
            let mut acc = 0.0;
            for mask in 0..n_masks {
                if mask & bit == 0 {
                    let s = mask.count_ones() as usize;
                    acc += weights[s] * (v[(mask | bit) as usize] - v[mask as usize]);
                }
            }
            acc
        })
        .collect();
    Ok((v[0], phi))
}

/// Kernel-weighted sampling path for large schemas. Returns
/// `(base, phi, exact)` where `exact` is true when the budget covered every
/// coalition (the weighted solve is then the exact Shapley solution).
fn sampled_shap(
    ctx: &EvalContext<'_>,
    cfg: &ShapConfig,
    stream: u64,
) -> Result<(f64, Vec<f64>, bool)> {
    let p = ctx.schema.len();
    let full_mask = (1u64 << p) - 1;
    let base = ctx.value(0)?;
    let fx = ctx.value(full_mask)?;
    let delta = fx - base;

    let set = build_coalitions(p, cfg.n_coalitions, cfg.seed, stream);
    let values = ctx.coalition_values(&set.masks)?;

    // Weighted least squares with the efficiency constraint eliminated:
    // substituting phi_{p-1} = delta - sum_{j<p-1} phi_j turns
    //   v(z) - base = sum_j phi_j z_j
    // into a regression of y = v(z) - base - z_{p-1} delta on the columns
    // (z_j - z_{p-1}), j < p-1, each row scaled by sqrt(kernel weight).
    let rows = set.masks.len();
    let k = p - 1;
    let mut design = Vec::with_capacity(rows * k);
    let mut response = Vec::with_capacity(rows);
    for (i, &mask) in set.masks.iter().enumerate() {
        let w = set.weights[i].sqrt();
        let z_last = (mask >> (p - 1) & 1) as f64;
        for j in 0..k {
            let z_j = (mask >> j & 1) as f64;
            design.push(w * (z_j - z_last));
        }
        response.push(w * (values[i] - base - z_last * delta));
    }
    let fit = linalg::ols(&design, rows, k, &response)?;
    let mut phi = fit.coef;
    let tail = delta - phi.iter().sum::<f64>();
    phi.push(tail);
    Ok((base, phi, set.fully_enumerated))
}

struct CoalitionSet {
    masks: Vec<u64>,
    weights: Vec<f64>,
    fully_enumerated: bool,
}

/// Shapley kernel weight of one coalition of size `s` among `p` features:
/// `(p-1) / (C(p,s) * s * (p-s))`.
fn kernel_weight(p: usize, s: usize) -> f64 {
    (p as f64 - 1.0) / (binomial(p, s) * s as f64 * (p - s) as f64)
}

/// Total kernel mass of the size-`s` stratum: `(p-1) / (s * (p-s))`.
fn stratum_mass(p: usize, s: usize) -> f64 {
    (p as f64 - 1.0) / (s as f64 * (p - s) as f64)
}

/// Pick coalitions under the Shapley kernel: complete per-size strata
/// smallest-first (paired `s` / `p-s`) while the budget allows, then fill the
/// remainder with size-stratified random draws whose merged counts share the
/// leftover kernel mass.
fn build_coalitions(p: usize, budget: usize, seed: u64, stream: u64) -> CoalitionSet {
    let mut masks = Vec::new();
    let mut weights = Vec::new();
    let mut enumerated = vec![false; p]; // index s in 1..=p-1
    let mut remaining = budget;

    let mut pairs: Vec<Vec<usize>> = Vec::new();
    for s in 1..=p / 2 {
        let partner = p - s;
        if partner == s {
            pairs.push(vec![s]);
        } else {
            pairs.push(vec![s, partner]);
        }
    }
    for sizes in &pairs {
        let count: usize = sizes.iter().map(|&s| binomial_usize(p, s)).sum();
        if count > remaining {
            break;
        }
        for &s in sizes {
            let w = kernel_weight(p, s);
            for mask in subsets_of_size(p, s) {
                masks.push(mask);
                weights.push(w);
            }
            enumerated[s] = true;
        }
        remaining -= count;
    }

    let leftover_sizes: Vec<usize> = (1..p).filter(|&s| !enumerated[s]).collect();
    if leftover_sizes.is_empty() {
        return CoalitionSet { masks, weights, fully_enumerated: true };
    }
    if remaining == 0 {
        // Budget exactly consumed by full strata; the solve proceeds on those.
        return CoalitionSet { masks, weights, fully_enumerated: false };
    }

    let leftover_mass: f64 = leftover_sizes.iter().map(|&s| stratum_mass(p, s)).sum();
    let cumulative: Vec<f64> = leftover_sizes
        .iter()
        .scan(0.0, |acc, &s| {
            *acc += stratum_mass(p, s);
            Some(*acc)
        })
        .collect();

    let mut rng = rng_for(seed, stream);
    let mut counts: HashMap<u64, usize> = HashMap::new();
    let mut scratch: Vec<usize> = (0..p).collect();
    for _ in 0..remaining {
        let u: f64 = rng.random::<f64>() * leftover_mass;
        let pick = cumulative.partition_point(|&c| c < u).min(leftover_sizes.len() - 1);
        let s = leftover_sizes[pick];
        // Partial Fisher-Yates: the first s entries become a uniform subset.
        for i in 0..s {
            let j = rng.random_range(i..p);
            scratch.swap(i, j);
        }
        let mask = scratch[..s].iter().fold(0u64, |m, &j| m | 1 << j);
        *counts.entry(mask).or_insert(0) += 1;
    }
    // Deterministic row order for the solve: sort merged masks.
    let mut sampled: Vec<(u64, usize)> = counts.into_iter().collect();
    sampled.sort_unstable();
    for (mask, count) in sampled {
        masks.push(mask);
        weights.push(leftover_mass * count as f64 / remaining as f64);
    }
    CoalitionSet { masks, weights, fully_enumerated: false }
}

/// All bitmasks over `p` items with exactly `s` bits set, ascending
/// (Gosper's hack).
fn subsets_of_size(p: usize, s: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(binomial_usize(p, s));
    let limit = 1u64 << p;
    let mut mask = (1u64 << s) - 1;
    while mask < limit {
        out.push(mask);
        if s == 0 {
            break;
        }
        let c = mask & mask.wrapping_neg();
        let r = mask + c;
        if r >= limit {
            break;
        }
        mask = (((r ^ mask) >> 2) / c) | r;
    }
    out
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

fn binomial_usize(n: usize, k: usize) -> usize {
    binomial(n, k).round() as usize
}
