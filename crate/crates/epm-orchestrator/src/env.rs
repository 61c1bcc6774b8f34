//! Step-level episode environment.
//!
//! The env owns the user, judge, and director backends; the model under
//! test stays outside and is driven through [`EpisodeEnv::step`]. One
//! turn = one user utterance plus one model reply. Every `k` turns the
//! buffered pairs form an adjudication window: the judge rates it, the
//! kernel applies the action, and checks fire in a fixed order (success,
//! then failure, then the director). The final turn adjudicates whatever
//! the buffer still holds, so every pair lands in exactly one window; a
//! trailing short window gets gate checks but no director decision,
//! because there is no next turn to steer.

use crate::EpisodeError;
use epm_agents::{
    AgentError, DialoguePair, DirectorAction, DirectorDecision, DirectorObservation, EnvBackends,
    JudgeWindowContext, Pacing, RoleId, UserTurnContext,
};
use epm_core::{
    check_gate, ActionVector, GateConfig, GateOutcome, MdepWindowRating, TerminationType,
    TrajectoryState,
};
use epm_scenario::Scenario;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Loop bounds and thresholds for one episode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EpisodeConfig {
    /// Hard turn cap.
    pub t_max: u32,
    /// Adjudication interval in turns.
    pub k: u32,
    pub gate: GateConfig,
    pub seed: u64,
    /// Episodes run concurrently by batch drivers; each episode itself is
    /// strictly sequential.
    pub parallelism: u32,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        EpisodeConfig {
            t_max: 20,
            k: 1,
            gate: GateConfig::default(),
            seed: 0,
            parallelism: 1,
        }
    }
}

impl EpisodeConfig {
    pub fn validate(&self) -> Result<(), EpisodeError> {
        if self.t_max < 1 {
            return Err(EpisodeError::Config("t_max must be >= 1".to_string()));
        }
        if self.k < 1 {
            return Err(EpisodeError::Config("k must be >= 1".to_string()));
        }
        if self.k > self.t_max {
            return Err(EpisodeError::Config(format!(
                "k ({}) must not exceed t_max ({})",
                self.k, self.t_max
            )));
        }
        if self.parallelism < 1 {
            return Err(EpisodeError::Config("parallelism must be >= 1".to_string()));
        }
        self.gate.validate()?;
        Ok(())
    }
}

/// Kernel-level view of the episode after a step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSummary {
    /// Current latent deficit, axis order C, A, P.
    pub deficit: [f64; 3],
    pub r0: f64,
    pub resistance: f64,
    pub e_total: f64,
    pub mean_cos: Option<f64>,
    pub windows_closed: u32,
}

/// Window-level learning signals. All zero between adjudications.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardPacket {
    pub delta_e: f64,
    pub penalty_intensity: f64,
    /// Trailing windows without positive work; raw signal, not scalarized.
    pub stagnation_streak: u32,
    pub window_closed: bool,
}

impl RewardPacket {
    fn quiet(stagnation_streak: u32) -> Self {
        RewardPacket { delta_e: 0.0, penalty_intensity: 0.0, stagnation_streak, window_closed: false }
    }
}

/// One adjudicated window as recorded in the evidence log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowRecord {
    pub window_index: u32,
    /// Inclusive turn span the window covered.
    pub first_turn: u32,
    pub last_turn: u32,
    pub rating: MdepWindowRating,
    pub action: ActionVector,
    pub delta_e: f64,
    pub penalty_intensity: f64,
}

/// One director decision plus the structured state it consumed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectorRecord {
    pub window_index: u32,
    pub observation: DirectorObservation,
    pub decision: DirectorDecision,
}

/// Evidence log entry: window ratings and director decisions, in event
/// order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "entry", rename_all = "snake_case")]
pub enum EvidenceEntry {
    Window(WindowRecord),
    Director(DirectorRecord),
}

impl EvidenceEntry {
    pub fn as_window(&self) -> Option<&WindowRecord> {
        match self {
            EvidenceEntry::Window(w) => Some(w),
            EvidenceEntry::Director(_) => None,
        }
    }

    pub fn as_director(&self) -> Option<&DirectorRecord> {
        match self {
            EvidenceEntry::Director(d) => Some(d),
            EvidenceEntry::Window(_) => None,
        }
    }
}

/// Diagnostic payload of a step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepInfo {
    /// Turn just completed; 0 on the reset packet.
    pub turn: u32,
    /// The pair appended this step; absent on the reset packet.
    pub pair: Option<DialoguePair>,
    /// Next prompt for the model under test; absent once done.
    pub user_utterance: Option<String>,
    pub window: Option<WindowRecord>,
    pub director: Option<DirectorRecord>,
}

/// Everything an external consumer learns from one env transition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepPacket {
    pub state: StateSummary,
    pub reward: RewardPacket,
    pub done: bool,
    pub termination: Option<TerminationType>,
    pub info: StepInfo,
}

/// Validates a director decision and splits it into its effects. The
/// backend only ever saw the structured observation; dialogue text is
/// deliberately not an input here.
pub fn director_verdict(decision: &DirectorDecision) -> (Option<&str>, &DirectorAction, bool) {
    let guidance = match &decision.action {
        DirectorAction::AdjustGuidance { guidance } => Some(guidance.as_str()),
        _ => None,
    };
    (guidance, &decision.action, !decision.action.is_terminate())
}

enum Phase {
    Fresh,
    Running,
    Done(TerminationType),
}

/// Sequential episode state machine. Build one env (and fresh backends)
/// per episode; `reset` arms it exactly once.
pub struct EpisodeEnv {
    scenario: Scenario,
    backends: EnvBackends,
    cfg: EpisodeConfig,
    traj: Option<TrajectoryState>,
    history: Vec<DialoguePair>,
    buffer: Vec<DialoguePair>,
    evidence: Vec<EvidenceEntry>,
    penalties: Vec<f64>,
    memory_bank: BTreeMap<String, String>,
    released: BTreeMap<String, String>,
    guidance: Option<String>,
    pacing: Pacing,
    phase: Phase,
    pending_user: Option<String>,
}

/// Runs a backend call, retrying exactly once on a transient fault.
pub(crate) fn call_backend<T>(
    role: RoleId,
    mut f: impl FnMut() -> Result<T, AgentError>,
) -> Result<T, EpisodeError> {
    match f() {
        Ok(v) => Ok(v),
        Err(first) if first.is_transient() => {
            f().map_err(|cause| EpisodeError::Backend { role, cause })
        }
        Err(cause) => Err(EpisodeError::Backend { role, cause }),
    }
}

impl EpisodeEnv {
    pub fn new(
        scenario: Scenario,
        backends: EnvBackends,
        cfg: EpisodeConfig,
    ) -> Result<Self, EpisodeError> {
        cfg.validate()?;
        scenario.check_format()?;
        let memory_bank = scenario.persona.memory_blocks();
        Ok(EpisodeEnv {
            scenario,
            backends,
            cfg,
            traj: None,
            history: Vec::new(),
            buffer: Vec::new(),
            evidence: Vec::new(),
            penalties: Vec::new(),
            memory_bank,
            released: BTreeMap::new(),
            guidance: None,
            pacing: Pacing::Hold,
            phase: Phase::Fresh,
            pending_user: None,
        })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn config(&self) -> &EpisodeConfig {
        &self.cfg
    }

    /// Completed pairs so far; exactly what the model under test may see.
    pub fn history(&self) -> &[DialoguePair] {
        &self.history
    }

    pub fn evidence(&self) -> &[EvidenceEntry] {
        &self.evidence
    }

    pub fn is_done(&self) -> bool {
        matches!(self.phase, Phase::Done(_))
    }

    fn traj(&self) -> &TrajectoryState {
        self.traj.as_ref().expect("reset initializes the trajectory")
    }

    /// Initializes the latent state and produces the first user prompt.
    /// A scenario that ships a precomputed initial assessment skips the
    /// judge here.
    pub fn reset(&mut self) -> Result<StepPacket, EpisodeError> {
        if !matches!(self.phase, Phase::Fresh) {
            return Err(EpisodeError::AlreadyStarted);
        }
        let assessment = match &self.scenario.iedr {
            Some(precomputed) => precomputed.clone(),
            None => call_backend(RoleId::Judge, || {
                self.backends
                    .judge
                    .assess_initial(&self.scenario.persona, &self.scenario.crisis_event)
            })?,
        };
        let traj = TrajectoryState::new(assessment.initial_state()).map_err(|_| {
            EpisodeError::DegenerateScenario { id: self.scenario.id.clone() }
        })?;
        self.traj = Some(traj);
        self.phase = Phase::Running;
        self.pending_user = Some(self.next_user_utterance(1)?);
        Ok(StepPacket {
            state: self.state_summary(),
            reward: RewardPacket::quiet(0),
            done: false,
            termination: None,
            info: StepInfo {
                turn: 0,
                pair: None,
                user_utterance: self.pending_user.clone(),
                window: None,
                director: None,
            },
        })
    }

    /// Advances one turn with the model's reply to the pending prompt.
    pub fn step(&mut self, model_reply: &str) -> Result<StepPacket, EpisodeError> {
        match self.phase {
            Phase::Fresh => return Err(EpisodeError::NotReset),
            Phase::Done(_) => return Err(EpisodeError::SteppedAfterDone),
            Phase::Running => {}
        }
        let user = self.pending_user.take().expect("running env has a pending prompt");
        let turn = self.history.len() as u32 + 1;
        let pair = DialoguePair { turn, user, model: model_reply.to_string() };
        self.history.push(pair.clone());
        self.buffer.push(pair.clone());

        let boundary = self.buffer.len() as u32 == self.cfg.k;
        let last_turn = turn == self.cfg.t_max;
        let (window, director, termination) = if boundary || last_turn {
            self.adjudicate(turn, boundary && !last_turn)?
        } else {
            (None, None, None)
        };

        if let Some(t) = termination {
            self.phase = Phase::Done(t);
        } else if last_turn {
            self.phase = Phase::Done(TerminationType::MaxTurns);
        }

        let done = self.is_done();
        if !done {
            self.pending_user = Some(self.next_user_utterance(turn + 1)?);
        }

        let termination = match self.phase {
            Phase::Done(t) => Some(t),
            _ => None,
        };
        let reward = match &window {
            Some(w) => RewardPacket {
                delta_e: w.delta_e,
                penalty_intensity: w.penalty_intensity,
                stagnation_streak: self.traj().trailing_nonpositive_windows(),
                window_closed: true,
            },
            None => RewardPacket::quiet(self.traj().trailing_nonpositive_windows()),
        };
        Ok(StepPacket {
            state: self.state_summary(),
            reward,
            done,
            termination,
            info: StepInfo {
                turn,
                pair: Some(pair),
                user_utterance: self.pending_user.clone(),
                window,
                director: director.clone(),
            },
        })
    }

    /// Rates the buffer, applies the action, and fires the checks in
    /// order: success, failure, then (only at a true interval boundary
    /// with turns remaining) the director.
    fn adjudicate(
        &mut self,
        turn: u32,
        allow_director: bool,
    ) -> Result<(Option<WindowRecord>, Option<DirectorRecord>, Option<TerminationType>), EpisodeError>
    {
        let window_index = self.penalties.len() as u32 + 1;
        let first_turn = turn - self.buffer.len() as u32 + 1;
        let rating = {
            let ctx = JudgeWindowContext {
                persona: &self.scenario.persona,
                crisis_event: &self.scenario.crisis_event,
                window_index,
                window: &self.buffer,
            };
            let judge = &mut self.backends.judge;
            call_backend(RoleId::Judge, || judge.rate_window(&ctx))?
        };
        let action = rating.action_vector();
        let penalty_intensity = rating.penalty_intensity();
        let traj = self.traj.as_mut().expect("running env has a trajectory");
        let outcome = traj.apply_window(action);
        self.penalties.push(penalty_intensity);
        self.buffer.clear();

        let record = WindowRecord {
            window_index,
            first_turn,
            last_turn: turn,
            rating,
            action,
            delta_e: outcome.work.delta_e,
            penalty_intensity,
        };
        self.evidence.push(EvidenceEntry::Window(record.clone()));

        let traj = self.traj();
        let gate = check_gate(traj, &self.cfg.gate, traj.mean_cos().unwrap_or(0.0));
        match gate {
            GateOutcome::Success => return Ok((Some(record), None, Some(TerminationType::Success))),
            GateOutcome::Failure => {
                return Ok((Some(record), None, Some(TerminationType::EpmFailure)))
            }
            GateOutcome::Continue => {}
        }
        if !allow_director {
            return Ok((Some(record), None, None));
        }

        let observation = self.observation(window_index, &record);
        let director = &mut self.backends.director;
        let decision = call_backend(RoleId::Director, || director.decide(&observation))?;
        let drecord = DirectorRecord {
            window_index,
            observation,
            decision: decision.clone(),
        };
        self.evidence.push(EvidenceEntry::Director(drecord.clone()));

        let termination = self.apply_director_action(&decision)?;
        Ok((Some(record), Some(drecord), termination))
    }

    fn apply_director_action(
        &mut self,
        decision: &DirectorDecision,
    ) -> Result<Option<TerminationType>, EpisodeError> {
        match &decision.action {
            DirectorAction::Continue => Ok(None),
            DirectorAction::ReleaseMemory { key } => {
                let Some(text) = self.memory_bank.get(key) else {
                    return Err(EpisodeError::UnknownMemoryKey { key: key.clone() });
                };
                self.released.insert(key.clone(), text.clone());
                Ok(None)
            }
            DirectorAction::AdjustGuidance { guidance } => {
                self.guidance = Some(guidance.clone());
                Ok(None)
            }
            DirectorAction::AdjustPacing { pacing } => {
                self.pacing = *pacing;
                Ok(None)
            }
            DirectorAction::Terminate { .. } => Ok(Some(TerminationType::DirectorStop)),
        }
    }

    fn observation(&self, window_index: u32, last: &WindowRecord) -> DirectorObservation {
        let traj = self.traj();
        DirectorObservation {
            window_index,
            r0: traj.r0(),
            resistance: traj.resistance(),
            e_total: traj.e_total(),
            last_delta_e: last.delta_e,
            mean_cos: traj.mean_cos(),
            stagnation_streak: traj.trailing_nonpositive_windows(),
            penalty_intensity: last.penalty_intensity,
            pacing: self.pacing,
            released: self.released.keys().cloned().collect(),
            available: self
                .memory_bank
                .keys()
                .filter(|k| !self.released.contains_key(*k))
                .cloned()
                .collect(),
        }
    }

    /// Generates the prompt for `turn`, consuming any one-shot guidance.
    fn next_user_utterance(&mut self, turn: u32) -> Result<String, EpisodeError> {
        let utterance = {
            let ctx = UserTurnContext {
                persona: &self.scenario.persona,
                crisis_event: &self.scenario.crisis_event,
                history: &self.history,
                released_memories: &self.released,
                guidance: self.guidance.as_deref(),
                pacing: self.pacing,
                turn,
            };
            let user = &mut self.backends.user;
            call_backend(RoleId::User, || user.next_utterance(&ctx))?
        };
        self.guidance = None;
        Ok(utterance)
    }

    fn state_summary(&self) -> StateSummary {
        let traj = self.traj();
        StateSummary {
            deficit: traj.current().as_array(),
            r0: traj.r0(),
            resistance: traj.resistance(),
            e_total: traj.e_total(),
            mean_cos: traj.mean_cos(),
            windows_closed: traj.window_count() as u32,
        }
    }

    /// Consumes the finished env into its durable pieces: history,
    /// evidence, termination, trajectory, and per-window penalties.
    pub fn into_parts(
        self,
    ) -> Result<
        (Vec<DialoguePair>, Vec<EvidenceEntry>, TerminationType, TrajectoryState, Vec<f64>),
        EpisodeError,
    > {
        match self.phase {
            Phase::Done(termination) => Ok((
                self.history,
                self.evidence,
                termination,
                self.traj.expect("done env has a trajectory"),
                self.penalties,
            )),
            _ => Err(EpisodeError::NotFinished),
        }
    }
}
