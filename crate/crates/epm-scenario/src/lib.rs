//! Scenario layer: persona cards, scenario files, the dialogue-to-scenario
//! pipeline, quality validation, difficulty banding, and stratified sampling.
//!
//! Everything here is plain data plus deterministic functions. Live text
//! generation hides behind [`pipeline::ScenarioGenerator`]; the bundled
//! template generator and the synthetic corpus need no network at all.

use std::path::PathBuf;
use thiserror::Error;

pub mod builtin;
pub mod card;
pub mod corpus;
pub mod fixtures;
pub mod pipeline;
pub mod sample;
pub mod scenario;
pub mod validate;

pub use card::{
    AxisPriorities, CurrentSituation, EmpathyNeeds, EmpathyThreshold, PastExperiences, PersonaCard,
    PriorityLevel, RoleInfo, RoleTraits, Story,
};
pub use corpus::{load_corpus, load_scenario, save_corpus, save_scenario, CorpusManifest};
pub use pipeline::{
    build_corpus, extract_features, generate_scenario, DialogueTurn, ExtractorRules, FeatureBundle,
    FilterRules, PipelineReport, RawDialogue, ScenarioGenerator, SkipReason, Speaker,
    TemplateGenerator,
};
pub use sample::{stratified_sample, SamplingSpec, StratumDeficit};
pub use scenario::{
    BandingParams, DifficultyBand, LabelRank, Mechanism, MechanismKind, PersonaType, Scenario,
    TaggedLabel, SCENARIO_FORMAT,
};
pub use validate::{validate_scenario, QualityCriteria, ValidationIssue, ValidationReport};

/// The six default life-domain labels. The first four are fixed by the
/// rubric material; the last two are local configuration.
pub const DEFAULT_DOMAINS: [&str; 6] = [
    "values_beliefs",
    "health",
    "daily_life",
    "interpersonal",
    "career_achievement",
    "family_origins",
];

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("unsupported scenario format {found:?}, expected {expected:?}")]
    UnsupportedFormat { found: String, expected: &'static str },

    #[error("generator failure: {0}")]
    GeneratorFailure(String),

    #[error("generated scenario is schema-incomplete, missing {missing}")]
    SchemaIncomplete { missing: String },

    #[error("sampling spec is internally inconsistent: {0}")]
    InvalidSamplingSpec(String),

    #[error("stratified sampling infeasible: {}", format_deficits(.0))]
    InfeasibleStrata(Vec<sample::StratumDeficit>),

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{}: {source}", path.display())]
    Parse { path: PathBuf, source: serde_json::Error },

    #[error("duplicate scenario id {0:?} in corpus")]
    DuplicateId(String),

    #[error(transparent)]
    Rubric(#[from] epm_core::RubricError),
}

fn format_deficits(deficits: &[sample::StratumDeficit]) -> String {
    deficits
        .iter()
        .map(|d| format!("{} needs {}, corpus offers {}", d.stratum, d.required, d.available))
        .collect::<Vec<_>>()
        .join("; ")
}
