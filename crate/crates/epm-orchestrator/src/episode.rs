//! Whole-episode driver built on [`EpisodeEnv`].
//!
//! `run_episode` owns the loop: prompt the model under test with each
//! pending user utterance, feed the reply back, and when the env reports
//! done, fold the trajectory into raw metrics and normalized indices. A
//! sink hook observes every packet as it happens, so a crash mid-episode
//! still leaves a usable partial record on the caller's side.

use crate::env::{call_backend, EpisodeConfig, EpisodeEnv, EvidenceEntry, StepPacket};
use crate::EpisodeError;
use epm_agents::{DialoguePair, EnvBackends, ModelTurnContext, RoleId, TestModel};
use epm_core::{
    index_bundle, raw_metrics, IndexBundle, MetricBundle, TerminationType, TrajectoryState,
};
use epm_scenario::Scenario;
use serde::{Deserialize, Serialize};

/// Everything a finished episode produced, self-contained and
/// serializable: replaying the metrics from `trajectory` and the
/// penalties embedded in `evidence_log` reproduces `metrics` and
/// `indices` exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub scenario_id: String,
    pub history: Vec<DialoguePair>,
    pub evidence_log: Vec<EvidenceEntry>,
    pub termination: TerminationType,
    pub trajectory: TrajectoryState,
    pub metrics: MetricBundle,
    pub indices: IndexBundle,
}

impl EpisodeResult {
    pub fn window_count(&self) -> usize {
        self.evidence_log.iter().filter(|e| e.as_window().is_some()).count()
    }

    pub fn director_count(&self) -> usize {
        self.evidence_log.iter().filter(|e| e.as_director().is_some()).count()
    }
}

/// Observer for episode progress. Default impls ignore everything, so a
/// sink overrides only what it records.
pub trait EpisodeSink {
    fn on_packet(&mut self, _packet: &StepPacket) {}
    fn on_finished(&mut self, _result: &EpisodeResult) {}
    /// The episode aborted; packets already delivered are the partial
    /// record and must be flagged incomplete by the consumer.
    fn on_aborted(&mut self, _error: &EpisodeError) {}
}

pub struct NullSink;

impl EpisodeSink for NullSink {}

/// Folds a finished env into the final result.
pub fn finish_env(env: EpisodeEnv) -> Result<EpisodeResult, EpisodeError> {
    let scenario_id = env.scenario().id.clone();
    let (history, evidence_log, termination, trajectory, penalties) = env.into_parts()?;
    let metrics = raw_metrics(&trajectory, termination, &penalties)?;
    let indices = index_bundle(&metrics, trajectory.r0())?;
    Ok(EpisodeResult {
        scenario_id,
        history,
        evidence_log,
        termination,
        trajectory,
        metrics,
        indices,
    })
}

/// Runs one episode to termination and scores it.
pub fn run_episode(
    scenario: Scenario,
    backends: EnvBackends,
    model: &mut dyn TestModel,
    cfg: EpisodeConfig,
) -> Result<EpisodeResult, EpisodeError> {
    run_episode_observed(scenario, backends, model, cfg, &mut NullSink)
}

/// [`run_episode`] with a sink watching every step.
pub fn run_episode_observed(
    scenario: Scenario,
    backends: EnvBackends,
    model: &mut dyn TestModel,
    cfg: EpisodeConfig,
    sink: &mut dyn EpisodeSink,
) -> Result<EpisodeResult, EpisodeError> {
    let outcome = drive(scenario, backends, model, cfg, sink);
    match &outcome {
        Ok(result) => sink.on_finished(result),
        Err(error) => sink.on_aborted(error),
    }
    outcome
}

fn drive(
    scenario: Scenario,
    backends: EnvBackends,
    model: &mut dyn TestModel,
    cfg: EpisodeConfig,
    sink: &mut dyn EpisodeSink,
) -> Result<EpisodeResult, EpisodeError> {
    let mut env = EpisodeEnv::new(scenario, backends, cfg)?;
    let mut packet = env.reset()?;
    sink.on_packet(&packet);
    while !packet.done {
        let prompt = packet
            .info
            .user_utterance
            .take()
            .expect("running episode always has a pending prompt");
        let reply = call_backend(RoleId::TestModel, || {
            model.reply(&ModelTurnContext {
                history: env.history(),
                user_utterance: &prompt,
            })
        })?;
        packet = env.step(&reply)?;
        sink.on_packet(&packet);
    }
    finish_env(env)
}
