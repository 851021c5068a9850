//! Post-hoc model explanation: Shapley-value attributions (exact coalition
//! enumeration for small schemas, kernel-weighted sampling for large ones)
//! and accumulated local effects, plus plain-text renderers (CSV/SVG) so a
//! report can embed both without a plotting stack.

mod ale;
mod render;
mod shap;

pub use ale::{ale, AleCurve, DEFAULT_ALE_BINS};
pub use render::{ale_csv, ale_svg, beeswarm_csv, beeswarm_svg};
pub use shap::{
    sample_background, shap_explain, shap_summary, BeeswarmRecord, ShapConfig, ShapExplanation,
    ShapSummary, DEFAULT_BACKGROUND_SIZE, DEFAULT_MAX_EXACT_FEATURES, DEFAULT_SAMPLED_COALITIONS,
};
