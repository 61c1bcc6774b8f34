//! Role backends for episode simulation: the simulated user, the model
//! under test, the window judge, and the director.
//!
//! Two families implement the same four traits. Scripted backends
//! ([`scripted`]) are fully deterministic and power offline benchmarks and
//! tests. Live backends ([`live`]) adapt a chat-completion endpoint
//! ([`chat`]) with structured-output parsing and bounded repair for the
//! judge ([`wire`]). Orchestration code only ever sees the traits.

pub mod backends;
pub mod chat;
pub mod live;
pub mod scripted;
pub mod wire;

use epm_core::RubricError;
use thiserror::Error;

pub use backends::{
    Director, DirectorAction, DirectorDecision, DirectorObservation, DialoguePair, EnvBackends,
    JudgeWindowContext, ModelTurnContext, Pacing, RoleId, TestModel, UserSimulator,
    UserTurnContext, WindowJudge,
};
pub use chat::{ChatClient, ChatEndpointConfig, ChatMessage, ChatRole};
pub use live::{LiveDirector, LiveJudge, LiveTestModel, LiveUserSimulator};
pub use scripted::{
    DirectorProgram, InitialProgram, JudgeProgram, ModelProgram, ScriptedBackendSpec,
    ScriptedDirector, ScriptedJudge, ScriptedModel, ScriptedUser, UserProgram, WindowProgram,
};
pub use wire::{
    adjudicate_with_repair, parse_judge_output, JudgeMode, JudgeWireOutput, RepairPolicy,
    WireFault, WIRE_VERSION,
};

#[derive(Debug, Error)]
pub enum AgentError {
    /// The named key variable is unset or empty; no request was sent.
    #[error("environment variable {var} is unset or empty; refusing to call the endpoint")]
    AuthMissing { var: String },
    #[error("request timed out after {after_ms} ms")]
    Timeout { after_ms: u64 },
    #[error("rate limited by the endpoint; gave up after {attempts} attempts")]
    RateLimited { attempts: u32 },
    #[error("endpoint returned HTTP {status}: {detail}")]
    Http { status: u16, detail: String },
    #[error("transport failure: {detail}")]
    Transport { detail: String },
    /// The endpoint answered but not in the chat-completion shape.
    #[error("malformed endpoint response: {detail}")]
    MalformedResponse { detail: String },
    /// Judge output still failed validation once the repair budget ran out.
    #[error("judge output invalid after {attempts} attempts: {last_error}")]
    MalformedJudgeOutput { attempts: u32, last_error: String },
    /// A canned program ran out of steps mid-episode.
    #[error("{role} program exhausted at step {at}")]
    ProgramExhausted { role: RoleId, at: usize },
    #[error("director action outside the closed set: {got}")]
    InvalidDirectorAction { got: String },
    #[error(transparent)]
    Rubric(#[from] RubricError),
}

impl AgentError {
    /// True for faults worth retrying at a higher level (one fresh attempt
    /// per failed turn, per the run policy). Validation and auth faults are
    /// never retried.
    pub fn is_transient(&self) -> bool {
        matches!(
            self,
            AgentError::Timeout { .. }
                | AgentError::RateLimited { .. }
                | AgentError::Transport { .. }
                | AgentError::Http { status: 500..=599, .. }
        )
    }
}
