//! Role interfaces for the four participants in an episode, and the context
//! structs that define exactly what each role is allowed to see.
//!
//! The visibility rules are enforced by construction: a judge context has no
//! field that could carry director guidance, and a test-model context has no
//! field that could carry latent state. Code that cannot name a thing cannot
//! leak it.

use crate::AgentError;
use epm_core::{IedrAssessment, MdepWindowRating};
use epm_scenario::PersonaCard;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

/// One completed exchange: the user spoke, the evaluated model replied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DialoguePair {
    /// 1-based turn number.
    pub turn: u32,
    pub user: String,
    pub model: String,
}

/// Conversation tempo requested by the director.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pacing {
    Slower,
    #[default]
    Hold,
    Faster,
}

impl fmt::Display for Pacing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Pacing::Slower => "slower",
            Pacing::Hold => "hold",
            Pacing::Faster => "faster",
        };
        f.write_str(s)
    }
}

/// The closed set of moves a director may make. Anything a live backend
/// emits outside this set is rejected, never coerced.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DirectorAction {
    Continue,
    ReleaseMemory { key: String },
    AdjustGuidance { guidance: String },
    AdjustPacing { pacing: Pacing },
    Terminate { reason: String },
}

impl DirectorAction {
    pub fn is_terminate(&self) -> bool {
        matches!(self, DirectorAction::Terminate { .. })
    }
}

/// A director's move plus the free-text rationale it logged alongside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectorDecision {
    pub action: DirectorAction,
    pub rationale: String,
}

/// Everything the user simulator may consult before producing the next
/// utterance. Director guidance arrives here as side-channel context; it is
/// never spliced into dialogue text.
#[derive(Debug)]
pub struct UserTurnContext<'a> {
    pub persona: &'a PersonaCard,
    pub crisis_event: &'a str,
    /// Completed pairs so far.
    pub history: &'a [DialoguePair],
    /// Deep-memory blocks the director has released, by key.
    pub released_memories: &'a BTreeMap<String, String>,
    pub guidance: Option<&'a str>,
    pub pacing: Pacing,
    /// 1-based number of the turn being generated.
    pub turn: u32,
}

pub trait UserSimulator {
    fn next_utterance(&mut self, ctx: &UserTurnContext<'_>) -> Result<String, AgentError>;
}

/// The evaluated model sees dialogue only: completed history plus the
/// utterance awaiting a reply. No state, no scenario, no direction.
#[derive(Debug)]
pub struct ModelTurnContext<'a> {
    pub history: &'a [DialoguePair],
    pub user_utterance: &'a str,
}

pub trait TestModel {
    fn reply(&mut self, ctx: &ModelTurnContext<'_>) -> Result<String, AgentError>;
}

/// What the judge sees when rating one window: the persona it grounds
/// evidence against and the window's dialogue. Nothing the director said or
/// did is representable here.
#[derive(Debug)]
pub struct JudgeWindowContext<'a> {
    pub persona: &'a PersonaCard,
    pub crisis_event: &'a str,
    /// 1-based index of the window being rated.
    pub window_index: u32,
    /// The pairs buffered since the last adjudication.
    pub window: &'a [DialoguePair],
}

pub trait WindowJudge {
    /// Rate the starting severity once, before any dialogue. Skipped when
    /// the scenario ships a precomputed assessment.
    fn assess_initial(
        &mut self,
        persona: &PersonaCard,
        crisis_event: &str,
    ) -> Result<IedrAssessment, AgentError>;

    fn rate_window(&mut self, ctx: &JudgeWindowContext<'_>) -> Result<MdepWindowRating, AgentError>;
}

/// Structured progress summary the director decides on. Numbers only; the
/// director never reads dialogue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectorObservation {
    /// 1-based index of the window just adjudicated.
    pub window_index: u32,
    pub r0: f64,
    pub resistance: f64,
    pub e_total: f64,
    pub last_delta_e: f64,
    pub mean_cos: Option<f64>,
    /// Consecutive closed windows with no forward work.
    pub stagnation_streak: u32,
    /// Regression penalty of the window just closed.
    pub penalty_intensity: f64,
    pub pacing: Pacing,
    /// Memory keys already released.
    pub released: Vec<String>,
    /// Memory keys still available to release.
    pub available: Vec<String>,
}

pub trait Director {
    fn decide(&mut self, obs: &DirectorObservation) -> Result<DirectorDecision, AgentError>;
}

/// The three backends the episode environment owns. The test model stays
/// outside: it is the thing being evaluated, not part of the harness.
pub struct EnvBackends {
    pub user: Box<dyn UserSimulator>,
    pub judge: Box<dyn WindowJudge>,
    pub director: Box<dyn Director>,
}

impl fmt::Debug for EnvBackends {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EnvBackends").finish_non_exhaustive()
    }
}

/// Which seat a failing backend occupied, for error reporting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoleId {
    User,
    TestModel,
    Judge,
    Director,
}

impl fmt::Display for RoleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RoleId::User => "user",
            RoleId::TestModel => "test_model",
            RoleId::Judge => "judge",
            RoleId::Director => "director",
        };
        f.write_str(s)
    }
}
