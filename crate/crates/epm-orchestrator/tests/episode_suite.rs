//! End-to-end episode runs over scripted backends, checked against
//! independently folded arithmetic.

use epm_agents::{
    DirectorAction, DirectorProgram, EnvBackends, InitialProgram, JudgeProgram, ModelProgram,
    ModelTurnContext, ScriptedDirector, ScriptedJudge, ScriptedModel, ScriptedUser, TestModel,
    UserProgram, WindowProgram,
};
use epm_core::{index_bundle, raw_metrics, TerminationType};
use epm_orchestrator::{finish_env, run_episode, EpisodeConfig, EpisodeEnv};
use epm_scenario::fixtures::scenario_with_levels;
use epm_scenario::Scenario;

const DEEP_DEFICIT: [u8; 9] = [3; 9];

fn backends(windows: WindowProgram, director: DirectorProgram) -> EnvBackends {
    EnvBackends {
        user: Box::new(ScriptedUser::new(UserProgram::Cycle {
            utterances: vec!["it is all still sitting on me".to_string()],
        })),
        judge: Box::new(ScriptedJudge::new(JudgeProgram {
            initial: InitialProgram::DeriveFromCard,
            windows,
        })),
        director: Box::new(ScriptedDirector::new(director)),
    }
}

fn steady_model() -> ScriptedModel {
    ScriptedModel::new(ModelProgram::Cycle { replies: vec!["I am here with you.".to_string()] })
}

fn full_progress() -> WindowProgram {
    WindowProgram::Cycle { windows: vec![[(2, 0), (2, 0), (2, 0)]] }
}

fn idle_windows() -> WindowProgram {
    WindowProgram::Cycle { windows: vec![[(0, 0), (0, 0), (0, 0)]] }
}

fn full_regression() -> WindowProgram {
    WindowProgram::Cycle { windows: vec![[(0, -2), (0, -2), (0, -2)]] }
}

/// Folds the deep-deficit trajectory under a constant per-window move
/// with plain arithmetic, outside the kernel's own types.
fn fold_expected(per_axis: [f64; 3], windows: usize) -> ([f64; 3], f64) {
    let mut state = [-21.0f64, -27.0, -27.0];
    let mut energy = 0.0f64;
    for _ in 0..windows {
        let r = state.iter().map(|x| x * x).sum::<f64>().sqrt();
        let dot: f64 = state.iter().zip(per_axis).map(|(s, v)| s * v).sum();
        energy += -dot / r;
        for (x, v) in state.iter_mut().zip(per_axis) {
            *x = (*x + v).min(0.0);
        }
    }
    (state, energy)
}

#[test]
fn steady_full_progress_succeeds_at_the_ninth_window() {
    let scenario = scenario_with_levels("oracle-success", DEEP_DEFICIT);
    let cfg = EpisodeConfig { t_max: 12, k: 1, ..Default::default() };
    let mut model = steady_model();
    let result = run_episode(
        scenario,
        backends(full_progress(), DirectorProgram::AlwaysContinue),
        &mut model,
        cfg,
    )
    .unwrap();

    assert_eq!(result.termination, TerminationType::Success);
    assert_eq!(result.window_count(), 9, "eight full-progress windows stay under the bar");
    assert_eq!(result.history.len(), 9, "no turns run after the success check fires");

    let (expected_state, expected_energy) = fold_expected([3.0, 3.0, 3.0], 9);
    assert_eq!(expected_state, [0.0, 0.0, 0.0]);
    assert!((result.trajectory.e_total() - expected_energy).abs() < 1e-12);
    assert_eq!(result.trajectory.resistance(), 0.0);

    let r0 = 1899.0f64.sqrt();
    assert!((result.trajectory.r0() - r0).abs() < 1e-12);
    let (_, after_eight) = fold_expected([3.0, 3.0, 3.0], 8);
    assert!(after_eight < r0, "the eighth window must not clear the energy bar");
    assert!(expected_energy > r0);

    // Per-window energies in the evidence log sum to the trajectory total.
    let logged: f64 =
        result.evidence_log.iter().filter_map(|e| e.as_window()).map(|w| w.delta_e).sum();
    assert!((logged - result.trajectory.e_total()).abs() < 1e-12);
}

#[test]
fn idle_windows_run_to_the_turn_cap() {
    let scenario = scenario_with_levels("oracle-idle", DEEP_DEFICIT);
    let cfg = EpisodeConfig { t_max: 10, k: 1, ..Default::default() };
    let mut model = steady_model();
    let result = run_episode(
        scenario,
        backends(idle_windows(), DirectorProgram::AlwaysContinue),
        &mut model,
        cfg,
    )
    .unwrap();

    assert_eq!(result.termination, TerminationType::MaxTurns);
    assert_eq!(result.window_count(), 10);
    assert_eq!(result.trajectory.e_total(), 0.0);
    assert_eq!(result.trajectory.resistance(), result.trajectory.r0());
}

#[test]
fn sustained_regression_fails_at_the_second_window() {
    let scenario = scenario_with_levels("oracle-regress", DEEP_DEFICIT);
    let cfg = EpisodeConfig { t_max: 10, k: 1, ..Default::default() };
    let mut model = steady_model();
    let result = run_episode(
        scenario,
        backends(full_regression(), DirectorProgram::AlwaysContinue),
        &mut model,
        cfg,
    )
    .unwrap();

    assert_eq!(result.termination, TerminationType::EpmFailure);
    assert_eq!(result.window_count(), 2, "one regressed window stays under the failure bar");
    assert_eq!(result.history.len(), 2);

    // Two steps of (-4, -5, -5) from (-21, -27, -27).
    let expected_resistance = (29.0f64 * 29.0 + 37.0 * 37.0 + 37.0 * 37.0).sqrt();
    assert!((result.trajectory.resistance() - expected_resistance).abs() < 1e-12);
    assert!(result.trajectory.resistance() >= 1.25 * result.trajectory.r0());

    let penalties: Vec<f64> = result
        .evidence_log
        .iter()
        .filter_map(|e| e.as_window())
        .map(|w| w.penalty_intensity)
        .collect();
    assert_eq!(penalties, vec![3.0, 3.0], "three axes at full negative depth saturate the scale");
}

#[test]
fn director_stop_is_recorded_with_full_evidence() {
    let scenario = scenario_with_levels("oracle-stop", DEEP_DEFICIT);
    let cfg = EpisodeConfig { t_max: 10, k: 1, ..Default::default() };
    let script = DirectorProgram::Script {
        actions: vec![
            DirectorAction::Continue,
            DirectorAction::Continue,
            DirectorAction::Terminate { reason: "cut here".to_string() },
        ],
    };
    let mut model = steady_model();
    let result = run_episode(scenario, backends(idle_windows(), script), &mut model, cfg).unwrap();

    assert_eq!(result.termination, TerminationType::DirectorStop);
    assert_eq!(result.window_count(), 3);
    assert_eq!(result.director_count(), 3);
    assert_eq!(result.history.len(), 3);

    // Strict alternation: each rated window is followed by its decision.
    let kinds: Vec<&str> = result
        .evidence_log
        .iter()
        .map(|e| if e.as_window().is_some() { "w" } else { "d" })
        .collect();
    assert_eq!(kinds, vec!["w", "d", "w", "d", "w", "d"]);

    let last = result.evidence_log.last().unwrap().as_director().unwrap();
    assert!(last.decision.action.is_terminate());
    assert_eq!(last.observation.window_index, 3);
}

#[test]
fn scores_replay_exactly_from_the_logged_trajectory() {
    let scenario = scenario_with_levels("oracle-replay", DEEP_DEFICIT);
    let cfg = EpisodeConfig { t_max: 12, k: 1, ..Default::default() };
    let mut model = steady_model();
    let result = run_episode(
        scenario,
        backends(full_progress(), DirectorProgram::AlwaysContinue),
        &mut model,
        cfg,
    )
    .unwrap();

    let penalties: Vec<f64> = result
        .evidence_log
        .iter()
        .filter_map(|e| e.as_window())
        .map(|w| w.penalty_intensity)
        .collect();
    let metrics = raw_metrics(&result.trajectory, result.termination, &penalties).unwrap();
    let indices = index_bundle(&metrics, result.trajectory.r0()).unwrap();
    assert_eq!(metrics, result.metrics);
    assert_eq!(indices, result.indices);
}

fn rich_stack(seed: u64) -> (EnvBackends, ScriptedModel) {
    let backends = EnvBackends {
        user: Box::new(ScriptedUser::new(UserProgram::Narrate)),
        judge: Box::new(ScriptedJudge::markers()),
        director: Box::new(ScriptedDirector::new(DirectorProgram::Reactive { patience: 2 })),
    };
    let model =
        ScriptedModel::new(ModelProgram::Profile { quality: 0.45, volatility: 0.5, seed });
    (backends, model)
}

fn rich_scenario() -> Scenario {
    scenario_with_levels("oracle-rich", DEEP_DEFICIT)
}

#[test]
fn episodes_serialize_byte_identically_across_runs() {
    let cfg = EpisodeConfig { t_max: 9, k: 2, ..Default::default() };
    let run = |seed: u64| {
        let (backends, mut model) = rich_stack(seed);
        let result = run_episode(rich_scenario(), backends, &mut model, cfg).unwrap();
        serde_json::to_string(&result).unwrap()
    };
    let first = run(17);
    let second = run(17);
    assert_eq!(first, second);
    assert_ne!(first, run(18), "a different seed must actually change the episode");
}

#[test]
fn stepwise_driving_matches_the_packaged_runner() {
    let cfg = EpisodeConfig { t_max: 9, k: 2, ..Default::default() };

    let (backends, mut model) = rich_stack(23);
    let packaged = run_episode(rich_scenario(), backends, &mut model, cfg).unwrap();

    let (backends, mut model) = rich_stack(23);
    let mut env = EpisodeEnv::new(rich_scenario(), backends, cfg).unwrap();
    let mut packet = env.reset().unwrap();
    while !packet.done {
        let prompt = packet.info.user_utterance.clone().unwrap();
        let reply = model
            .reply(&ModelTurnContext { history: env.history(), user_utterance: &prompt })
            .unwrap();
        packet = env.step(&reply).unwrap();
    }
    let manual = finish_env(env).unwrap();

    assert_eq!(
        serde_json::to_string(&packaged).unwrap(),
        serde_json::to_string(&manual).unwrap()
    );
}
