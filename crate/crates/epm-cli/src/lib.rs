//! Benchmark plumbing around the evaluation engine: a declarative run
//! config, an append-only line-delimited run store, log replay and
//! aggregation, leaderboard and plot-data emission, and the perturbation
//! workflow. The `epm` binary is a thin dispatcher over this crate.

pub mod benchmark;
pub mod config;
pub mod export;
pub mod leaderboard;
pub mod perturb;
pub mod score;
pub mod store;

use epm_lab::LabError;
use epm_orchestrator::EpisodeError;
use epm_scenario::ScenarioError;
use serde::Serialize;
use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("store at {root} has no manifest; run `epm run` first")]
    NoManifest { root: PathBuf },
    #[error("store at {root} has no scores file; run `epm score` first")]
    NoScores { root: PathBuf },
    #[error("unsupported format marker {found:?}, expected {expected:?}")]
    UnsupportedFormat { found: String, expected: &'static str },
    #[error("episode {model_id}/{scenario_id}: {problem}")]
    CorruptedEpisode { model_id: String, scenario_id: String, problem: String },
    #[error("episode {model_id}/{scenario_id}, window {window}: {problem}")]
    CorruptedWindow { model_id: String, scenario_id: String, window: u32, problem: String },
    #[error("{count} episode(s) incomplete; pass --allow-partial to aggregate anyway")]
    PartialStore { count: usize },
    #[error("store holds no complete episodes")]
    EmptyStore,
    #[error("no usable pairs: {0}")]
    NoPairs(String),
    #[error("scenario validation failed for {failed} of {checked} scenario(s)")]
    ValidationFailed { checked: usize, failed: usize },
    #[error("episode run aborted for {count} episode(s)")]
    EpisodesAborted { count: usize },
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Episode(#[from] EpisodeError),
    #[error(transparent)]
    Lab(#[from] LabError),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io { context: context.into(), source }
    }

    /// Stable machine-readable discriminant, independent of the message.
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::NoManifest { .. } => "no-manifest",
            CliError::NoScores { .. } => "no-scores",
            CliError::UnsupportedFormat { .. } => "unsupported-format",
            CliError::CorruptedEpisode { .. } => "corrupted-episode",
            CliError::CorruptedWindow { .. } => "corrupted-window",
            CliError::PartialStore { .. } => "partial-store",
            CliError::EmptyStore => "empty-store",
            CliError::NoPairs(_) => "no-pairs",
            CliError::ValidationFailed { .. } => "validation-failed",
            CliError::EpisodesAborted { .. } => "episodes-aborted",
            CliError::Scenario(_) => "scenario",
            CliError::Episode(_) => "episode",
            CliError::Lab(_) => "lab",
            CliError::Io { .. } => "io",
            CliError::Json(_) => "json",
        }
    }

    /// Exit code taxonomy: 2 config/usage, 3 data or validation, 4
    /// backend/runtime. Documented in docs/cli.md.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::NoManifest { .. }
            | CliError::NoScores { .. }
            | CliError::UnsupportedFormat { .. }
            | CliError::CorruptedEpisode { .. }
            | CliError::CorruptedWindow { .. }
            | CliError::PartialStore { .. }
            | CliError::EmptyStore
            | CliError::NoPairs(_)
            | CliError::ValidationFailed { .. }
            | CliError::Scenario(_)
            | CliError::Json(_) => 3,
            CliError::EpisodesAborted { .. }
            | CliError::Episode(_)
            | CliError::Lab(_)
            | CliError::Io { .. } => 4,
        }
    }

    /// The stderr payload: one JSON object per failure.
    pub fn to_wire(&self) -> String {
        #[derive(Serialize)]
        struct Wire<'a> {
            error: Inner<'a>,
        }
        #[derive(Serialize)]
        struct Inner<'a> {
            kind: &'a str,
            message: String,
            exit_code: i32,
        }
        let wire = Wire {
            error: Inner {
                kind: self.kind(),
                message: self.to_string(),
                exit_code: self.exit_code(),
            },
        };
        serde_json::to_string(&wire).expect("error serialization is infallible")
    }
}
