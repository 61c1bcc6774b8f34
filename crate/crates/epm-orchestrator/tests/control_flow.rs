//! Loop mechanics: window buffering, director effect channels, the
//! information walls between roles, retry policy, and lifecycle misuse.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use epm_agents::{
    AgentError, DirectorAction, DirectorProgram, EnvBackends, InitialProgram, JudgeProgram,
    JudgeWindowContext, ModelProgram, ModelTurnContext, RoleId, ScriptedDirector, ScriptedJudge,
    ScriptedModel, ScriptedUser, TestModel, UserProgram, UserSimulator, UserTurnContext,
    WindowJudge, WindowProgram,
};
use epm_core::{IedrAssessment, MdepWindowRating, TerminationType};
use epm_orchestrator::{
    run_episode, run_episode_observed, EpisodeConfig, EpisodeEnv, EpisodeError, EpisodeResult,
    EpisodeSink, StepPacket,
};
use epm_scenario::fixtures::scenario_with_levels;
use epm_scenario::{PersonaCard, Scenario};

fn scenario(id: &str) -> Scenario {
    scenario_with_levels(id, [3; 9])
}

fn idle_judge() -> ScriptedJudge {
    ScriptedJudge::new(JudgeProgram {
        initial: InitialProgram::DeriveFromCard,
        windows: WindowProgram::Cycle { windows: vec![[(0, 0), (0, 0), (0, 0)]] },
    })
}

fn steady_user() -> ScriptedUser {
    ScriptedUser::new(UserProgram::Cycle { utterances: vec!["still heavy".to_string()] })
}

fn steady_model() -> ScriptedModel {
    ScriptedModel::new(ModelProgram::Cycle { replies: vec!["with you".to_string()] })
}

#[derive(Default)]
struct RecordingSink {
    packets: Vec<StepPacket>,
    finished: bool,
    aborted: Option<String>,
}

impl EpisodeSink for RecordingSink {
    fn on_packet(&mut self, packet: &StepPacket) {
        self.packets.push(packet.clone());
    }

    fn on_finished(&mut self, _result: &EpisodeResult) {
        self.finished = true;
    }

    fn on_aborted(&mut self, error: &EpisodeError) {
        self.aborted = Some(error.to_string());
    }
}

#[test]
fn windows_partition_turns_with_a_short_tail() {
    let cfg = EpisodeConfig { t_max: 5, k: 2, ..Default::default() };
    let backends = EnvBackends {
        user: Box::new(steady_user()),
        judge: Box::new(idle_judge()),
        director: Box::new(ScriptedDirector::new(DirectorProgram::AlwaysContinue)),
    };
    let mut model = steady_model();
    let mut sink = RecordingSink::default();
    let result =
        run_episode_observed(scenario("tail"), backends, &mut model, cfg, &mut sink).unwrap();

    assert_eq!(result.termination, TerminationType::MaxTurns);
    let spans: Vec<(u32, u32)> = result
        .evidence_log
        .iter()
        .filter_map(|e| e.as_window())
        .map(|w| (w.first_turn, w.last_turn))
        .collect();
    assert_eq!(spans, vec![(1, 2), (3, 4), (5, 5)], "every turn lands in exactly one window");
    assert_eq!(result.director_count(), 2, "the trailing short window takes no decision");

    assert!(sink.finished);
    // Reset packet plus one per turn.
    assert_eq!(sink.packets.len(), 6);
    let t1 = &sink.packets[1];
    assert!(!t1.reward.window_closed);
    assert_eq!(t1.reward.delta_e, 0.0);
    assert_eq!(t1.state.windows_closed, 0);
    assert!(t1.info.window.is_none());
    let t2 = &sink.packets[2];
    assert!(t2.reward.window_closed);
    assert_eq!(t2.state.windows_closed, 1);
    assert!(t2.info.director.is_some());
    let t5 = &sink.packets[5];
    assert!(t5.done);
    assert_eq!(t5.termination, Some(TerminationType::MaxTurns));
    assert!(t5.info.window.is_some());
    assert!(t5.info.director.is_none());
    assert!(t5.info.user_utterance.is_none());
}

/// Records everything the user seat is shown, turn by turn.
struct ProbeUser {
    log: Arc<Mutex<Vec<(u32, Option<String>, Vec<String>)>>>,
}

impl UserSimulator for ProbeUser {
    fn next_utterance(&mut self, ctx: &UserTurnContext<'_>) -> Result<String, AgentError> {
        self.log.lock().unwrap().push((
            ctx.turn,
            ctx.guidance.map(str::to_string),
            ctx.released_memories.keys().cloned().collect(),
        ));
        Ok(format!("probe turn {}", ctx.turn))
    }
}

#[test]
fn guidance_reaches_the_user_once_and_nothing_else() {
    let cfg = EpisodeConfig { t_max: 4, k: 1, ..Default::default() };
    let secret = "SECRET-STEER-92";
    let log = Arc::new(Mutex::new(Vec::new()));
    let backends = EnvBackends {
        user: Box::new(ProbeUser { log: Arc::clone(&log) }),
        judge: Box::new(idle_judge()),
        director: Box::new(ScriptedDirector::new(DirectorProgram::Script {
            actions: vec![
                DirectorAction::AdjustGuidance { guidance: secret.to_string() },
                DirectorAction::Continue,
                DirectorAction::Continue,
            ],
        })),
    };
    let mut model = steady_model();
    let result = run_episode(scenario("steer"), backends, &mut model, cfg).unwrap();

    let seen: Vec<Option<String>> =
        log.lock().unwrap().iter().map(|(_, g, _)| g.clone()).collect();
    assert_eq!(
        seen,
        vec![None, Some(secret.to_string()), None, None],
        "guidance lands on the next user turn and only that one"
    );

    // The dialogue record and the judge's inputs never carry the steer.
    for pair in &result.history {
        assert!(!pair.user.contains(secret));
        assert!(!pair.model.contains(secret));
    }
    for window in result.evidence_log.iter().filter_map(|e| e.as_window()) {
        let rating_json = serde_json::to_string(&window.rating).unwrap();
        assert!(!rating_json.contains(secret));
    }
}

#[test]
fn released_memory_surfaces_in_later_user_turns() {
    let cfg = EpisodeConfig { t_max: 4, k: 1, ..Default::default() };
    let backends = EnvBackends {
        user: Box::new(ScriptedUser::new(UserProgram::Narrate)),
        judge: Box::new(idle_judge()),
        director: Box::new(ScriptedDirector::new(DirectorProgram::Script {
            actions: vec![
                DirectorAction::ReleaseMemory { key: "epilogue".to_string() },
                DirectorAction::Continue,
                DirectorAction::Continue,
            ],
        })),
    };
    let mut model = steady_model();
    let result = run_episode(scenario("release"), backends, &mut model, cfg).unwrap();

    assert!(!result.history[0].user.contains("epilogue"));
    assert!(result.history[1].user.contains("epilogue"), "{}", result.history[1].user);

    let decisions: Vec<_> =
        result.evidence_log.iter().filter_map(|e| e.as_director()).collect();
    assert_eq!(decisions[0].observation.released, Vec::<String>::new());
    assert_eq!(decisions[0].observation.available.len(), 5);
    assert_eq!(decisions[1].observation.released, vec!["epilogue".to_string()]);
    assert_eq!(decisions[1].observation.available.len(), 4);
    assert!(!decisions[1].observation.available.contains(&"epilogue".to_string()));
}

#[test]
fn unknown_memory_keys_abort_the_episode() {
    let cfg = EpisodeConfig { t_max: 4, k: 1, ..Default::default() };
    let backends = EnvBackends {
        user: Box::new(steady_user()),
        judge: Box::new(idle_judge()),
        director: Box::new(ScriptedDirector::new(DirectorProgram::Script {
            actions: vec![DirectorAction::ReleaseMemory { key: "attic".to_string() }],
        })),
    };
    let mut model = steady_model();
    let mut sink = RecordingSink::default();
    let err = run_episode_observed(scenario("badkey"), backends, &mut model, cfg, &mut sink)
        .unwrap_err();

    assert!(matches!(err, EpisodeError::UnknownMemoryKey { ref key } if key == "attic"));
    assert!(!sink.finished);
    assert!(sink.aborted.unwrap().contains("attic"));
    assert_eq!(sink.packets.len(), 1, "only the reset packet lands before the abort");
}

/// Counts initial-assessment calls, delegating the judging itself.
struct CountingJudge {
    inner: ScriptedJudge,
    initial_calls: Arc<AtomicUsize>,
}

impl WindowJudge for CountingJudge {
    fn assess_initial(
        &mut self,
        persona: &PersonaCard,
        crisis_event: &str,
    ) -> Result<IedrAssessment, AgentError> {
        self.initial_calls.fetch_add(1, Ordering::SeqCst);
        self.inner.assess_initial(persona, crisis_event)
    }

    fn rate_window(
        &mut self,
        ctx: &JudgeWindowContext<'_>,
    ) -> Result<MdepWindowRating, AgentError> {
        self.inner.rate_window(ctx)
    }
}

#[test]
fn precomputed_assessments_skip_the_initial_judge_call() {
    let cfg = EpisodeConfig { t_max: 2, k: 1, ..Default::default() };
    let run = |scenario: Scenario| {
        let calls = Arc::new(AtomicUsize::new(0));
        let backends = EnvBackends {
            user: Box::new(steady_user()),
            judge: Box::new(CountingJudge {
                inner: idle_judge(),
                initial_calls: Arc::clone(&calls),
            }),
            director: Box::new(ScriptedDirector::new(DirectorProgram::AlwaysContinue)),
        };
        let mut model = steady_model();
        let result = run_episode(scenario, backends, &mut model, cfg).unwrap();
        (calls.load(Ordering::SeqCst), result)
    };

    let (calls, result) = run(scenario("preset"));
    assert_eq!(calls, 0, "a shipped assessment is reused, not recomputed");
    assert!((result.trajectory.r0() - 1899.0f64.sqrt()).abs() < 1e-12);

    let mut stripped = scenario("derive");
    stripped.iedr = None;
    let (calls, result) = run(stripped);
    assert_eq!(calls, 1);
    // Card priorities C low, A medium, P high give axis deficits 7, 18, 27.
    let expected_r0 = (49.0f64 + 324.0 + 729.0).sqrt();
    assert!((result.trajectory.r0() - expected_r0).abs() < 1e-12);
}

#[test]
fn zero_deficit_scenarios_are_rejected_at_reset() {
    let cfg = EpisodeConfig::default();
    let backends = EnvBackends {
        user: Box::new(steady_user()),
        judge: Box::new(idle_judge()),
        director: Box::new(ScriptedDirector::new(DirectorProgram::AlwaysContinue)),
    };
    let mut model = steady_model();
    let err = run_episode(scenario_with_levels("flat", [0; 9]), backends, &mut model, cfg)
        .unwrap_err();
    assert!(matches!(err, EpisodeError::DegenerateScenario { ref id } if id == "flat"));
}

/// Fails the first `failures_left` calls with a transport fault, then
/// delegates.
struct FlakyModel {
    inner: ScriptedModel,
    failures_left: u32,
    calls: Arc<AtomicUsize>,
}

impl TestModel for FlakyModel {
    fn reply(&mut self, ctx: &ModelTurnContext<'_>) -> Result<String, AgentError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        if self.failures_left > 0 {
            self.failures_left -= 1;
            return Err(AgentError::Transport { detail: "socket dropped".to_string() });
        }
        self.inner.reply(ctx)
    }
}

struct FlakyJudge {
    inner: ScriptedJudge,
    failures_left: u32,
}

impl WindowJudge for FlakyJudge {
    fn assess_initial(
        &mut self,
        persona: &PersonaCard,
        crisis_event: &str,
    ) -> Result<IedrAssessment, AgentError> {
        self.inner.assess_initial(persona, crisis_event)
    }

    fn rate_window(
        &mut self,
        ctx: &JudgeWindowContext<'_>,
    ) -> Result<MdepWindowRating, AgentError> {
        if self.failures_left > 0 {
            self.failures_left -= 1;
            return Err(AgentError::Transport { detail: "judge endpoint reset".to_string() });
        }
        self.inner.rate_window(ctx)
    }
}

#[test]
fn one_transient_fault_per_call_is_absorbed() {
    let cfg = EpisodeConfig { t_max: 2, k: 1, ..Default::default() };
    let backends = EnvBackends {
        user: Box::new(steady_user()),
        judge: Box::new(idle_judge()),
        director: Box::new(ScriptedDirector::new(DirectorProgram::AlwaysContinue)),
    };
    let calls = Arc::new(AtomicUsize::new(0));
    let mut model =
        FlakyModel { inner: steady_model(), failures_left: 1, calls: Arc::clone(&calls) };
    let result = run_episode(scenario("flaky-ok"), backends, &mut model, cfg).unwrap();

    assert_eq!(result.termination, TerminationType::MaxTurns);
    assert_eq!(result.history.len(), 2);
    assert_eq!(result.history[0].model, "with you", "the retried call's reply is used");
    assert_eq!(calls.load(Ordering::SeqCst), 3, "failed call, its retry, then one clean turn");
}

#[test]
fn a_second_consecutive_fault_aborts_with_the_failing_role() {
    let cfg = EpisodeConfig { t_max: 2, k: 1, ..Default::default() };
    let backends = EnvBackends {
        user: Box::new(steady_user()),
        judge: Box::new(FlakyJudge { inner: idle_judge(), failures_left: 2 }),
        director: Box::new(ScriptedDirector::new(DirectorProgram::AlwaysContinue)),
    };
    let mut model = steady_model();
    let err = run_episode(scenario("flaky-bad"), backends, &mut model, cfg).unwrap_err();
    assert!(matches!(
        err,
        EpisodeError::Backend { role: RoleId::Judge, cause: AgentError::Transport { .. } }
    ));
}

#[test]
fn non_transient_faults_abort_without_retry() {
    let cfg = EpisodeConfig { t_max: 3, k: 1, ..Default::default() };
    let backends = EnvBackends {
        // One scripted utterance, then the program runs dry.
        user: Box::new(ScriptedUser::new(UserProgram::Fixed {
            utterances: vec!["only line".to_string()],
        })),
        judge: Box::new(idle_judge()),
        director: Box::new(ScriptedDirector::new(DirectorProgram::AlwaysContinue)),
    };
    let mut model = steady_model();
    let mut sink = RecordingSink::default();
    let err = run_episode_observed(scenario("dry"), backends, &mut model, cfg, &mut sink)
        .unwrap_err();

    assert!(matches!(
        err,
        EpisodeError::Backend { role: RoleId::User, cause: AgentError::ProgramExhausted { .. } }
    ));
    assert!(!sink.finished);
    assert!(sink.aborted.is_some());
    assert_eq!(sink.packets.len(), 1);
}

#[test]
fn lifecycle_misuse_is_rejected() {
    let backends = || EnvBackends {
        user: Box::new(steady_user()),
        judge: Box::new(idle_judge()),
        director: Box::new(ScriptedDirector::new(DirectorProgram::AlwaysContinue)),
    };

    let bad = EpisodeConfig { t_max: 2, k: 3, ..Default::default() };
    assert!(matches!(
        EpisodeEnv::new(scenario("cfg"), backends(), bad),
        Err(EpisodeError::Config(_))
    ));
    let bad = EpisodeConfig { parallelism: 0, ..Default::default() };
    assert!(matches!(
        EpisodeEnv::new(scenario("cfg2"), backends(), bad),
        Err(EpisodeError::Config(_))
    ));

    let cfg = EpisodeConfig { t_max: 1, k: 1, ..Default::default() };
    let mut env = EpisodeEnv::new(scenario("life"), backends(), cfg).unwrap();
    assert!(matches!(env.step("early"), Err(EpisodeError::NotReset)));

    let packet = env.reset().unwrap();
    assert!(matches!(env.reset(), Err(EpisodeError::AlreadyStarted)));
    assert!(!packet.done);

    let packet = env.step("one and only turn").unwrap();
    assert!(packet.done);
    assert_eq!(packet.termination, Some(TerminationType::MaxTurns));
    assert!(matches!(env.step("too late"), Err(EpisodeError::SteppedAfterDone)));

    let mut unfinished =
        EpisodeEnv::new(scenario("open"), backends(), EpisodeConfig::default()).unwrap();
    unfinished.reset().unwrap();
    assert!(matches!(unfinished.into_parts(), Err(EpisodeError::NotFinished)));
}
