//! Trajectory-level evaluation kernel for long-horizon supportive dialogue.
//!
//! An episode is modeled as motion through a three-axis latent deficit space:
//! a judge rates each adjudication window against a fixed scoring key, the
//! rating becomes a displacement, and the displacement's projection onto the
//! current healing direction is the work the window actually performed.
//! Raw metrics summarize the finished path; index mappings normalize them
//! against the scenario's severity; a weighted composite rolls them up.
//!
//! The crate is pure math over validated value types. Dialogue, judging, and
//! storage live in the crates built on top of it.

pub mod kernel;
pub mod metrics;
pub mod rubric;

pub use kernel::{
    check_gate, effective_work, projected_work, ActionVector, AxisId, EffectiveWork, EnergyGate,
    GateConfig, GateOutcome, KernelError, PsychState, TerminationType, TrajectoryState,
    WindowOutcome, EPS,
};
pub use metrics::{
    index_bundle, linear_score, magnitude_score, phi_map, raw_metrics, rho_max, IndexBundle,
    MappingSpec, MetricBundle, MetricsError, ALPHA_NET, WEIGHT_EFFICIENCY, WEIGHT_OUTCOME,
    WEIGHT_STABILITY,
};
pub use rubric::{
    IedrAssessment, IedrIndicator, IndicatorId, MdepChannel, MdepChannelRating, MdepWindowRating,
    RubricError, WeightClass,
};
