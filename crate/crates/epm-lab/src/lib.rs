//! Counterfactual experiment harness: paired perturbations over recorded
//! dialogue, ablation scorers, and the statistics that compare them.
//!
//! A perturbation pair holds one conversational context twice, differing
//! in exactly one factor: either the persona's priority profile is
//! flipped while every word stays fixed, or one model reply is replaced
//! while the persona stays fixed. Both sides replay through the same
//! judge pipeline; scorers differ only in how the judged trajectory is
//! aggregated, which is what makes the comparisons attributable to the
//! scoring rule rather than the evidence.

pub mod fixtures;
pub mod flip;
pub mod pairs;
pub mod scoring;
pub mod stats;

use epm_agents::AgentError;
use epm_core::{AxisId, KernelError, RubricError};
use thiserror::Error;

pub use flip::{flip_axis, persona_flip};
pub use pairs::{
    sycophancy_replacement, PairContext, PairKind, PairSet, PairSource, PerturbationPair,
    PerturbedElement, SycophancyVariant, PAIRS_FORMAT,
};
pub use scoring::{score_pair, score_pair_full, score_side, scorer_value, ScorerKind};
pub use stats::{
    case_level_aggregate, pair_diffs, paired_diff, paired_stats, stats_report, PairedStats,
    StatsConfig, StatsReport,
};

#[derive(Debug, Error)]
pub enum LabError {
    #[error("no axis is marked high priority; nothing to flip")]
    NoHighPriority,
    #[error("{axes:?} are all high priority; name the axis to flip")]
    MultipleHighPriorities { axes: Vec<AxisId> },
    #[error("axis {axis} is neither high nor low priority; flipping it is undefined")]
    AxisNotFlippable { axis: AxisId },
    #[error("pair kind {kind} does not match perturbed element {element}")]
    MismatchedPerturbation { kind: String, element: String },
    #[error("need at least {need} values, got {got}")]
    InsufficientData { got: usize, need: usize },
    #[error("pair {pair_id} has no recorded score for {scorer_id}")]
    UnscoredPair { pair_id: String, scorer_id: String },
    #[error("invalid stats config: {0}")]
    InvalidConfig(String),
    #[error("unsupported pair-set format {found:?}, expected {expected:?}")]
    UnsupportedFormat { found: String, expected: &'static str },
    #[error("judge backend failed: {cause}")]
    Backend {
        #[source]
        cause: AgentError,
    },
    #[error(transparent)]
    Rubric(#[from] RubricError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
