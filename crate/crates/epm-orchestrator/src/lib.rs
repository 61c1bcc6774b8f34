//! Episode execution: the generate-evaluate-control loop that turns a
//! scenario plus four role backends into a scored trajectory.
//!
//! Two entry points cover the two consumption styles. [`run_episode`]
//! drives a model backend to completion and returns the full
//! [`EpisodeResult`]. [`EpisodeEnv`] exposes the same loop one step at a
//! time (reset, then step with each model reply) for callers that sit
//! outside, such as training harnesses; both paths share the exact same
//! state machine, so their outputs agree by construction.

pub mod env;
pub mod episode;

use epm_agents::{AgentError, RoleId};
use epm_core::{KernelError, MetricsError};
use epm_scenario::ScenarioError;
use thiserror::Error;

pub use env::{
    director_verdict, DirectorRecord, EpisodeConfig, EpisodeEnv, EvidenceEntry, RewardPacket,
    StateSummary, StepInfo, StepPacket, WindowRecord,
};
pub use episode::{
    finish_env, run_episode, run_episode_observed, EpisodeResult, EpisodeSink, NullSink,
};

#[derive(Debug, Error)]
pub enum EpisodeError {
    #[error("invalid episode config: {0}")]
    Config(String),
    /// The initial assessment carries zero deficit; no trajectory can start.
    #[error("scenario {id} carries no measurable initial deficit")]
    DegenerateScenario { id: String },
    #[error("step called before reset")]
    NotReset,
    #[error("reset called twice; build a fresh env per episode")]
    AlreadyStarted,
    #[error("step called after the episode finished")]
    SteppedAfterDone,
    #[error("episode has not finished")]
    NotFinished,
    /// A backend failed past the one-retry allowance; the episode aborts
    /// and whatever was logged stays flagged incomplete.
    #[error("{role} backend failed: {cause}")]
    Backend {
        role: RoleId,
        #[source]
        cause: AgentError,
    },
    #[error("director released unknown memory key {key:?}")]
    UnknownMemoryKey { key: String },
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
}
