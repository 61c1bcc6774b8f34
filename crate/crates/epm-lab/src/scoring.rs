//! Side replays and the three aggregation rules under comparison.
//!
//! Both sides of a pair run through the identical pipeline: the judge
//! assesses the side's persona, rates each turn as a one-turn window,
//! and the kernel folds the ratings into a trajectory. The scorer then
//! reduces that trajectory to one number. Keeping the reduction as the
//! only difference is what licenses attributing score gaps to the
//! scoring rule.

use crate::pairs::PerturbationPair;
use crate::LabError;
use epm_agents::{AgentError, DialoguePair, JudgeWindowContext, WindowJudge};
use epm_core::{linear_score, magnitude_score, TrajectoryState};
use epm_scenario::PersonaCard;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScorerKind {
    /// Directed work against the latent state: the full physics score.
    FullEpm,
    /// Net rubric points, state-blind: what a rubric-only reading sees.
    NoPhysics,
    /// Total action strength, direction-blind: intensity without aim.
    MagnitudeOnly,
}

impl ScorerKind {
    pub const ALL: [ScorerKind; 3] =
        [ScorerKind::FullEpm, ScorerKind::NoPhysics, ScorerKind::MagnitudeOnly];

    pub fn id(self) -> &'static str {
        match self {
            ScorerKind::FullEpm => "full_epm",
            ScorerKind::NoPhysics => "no_physics",
            ScorerKind::MagnitudeOnly => "magnitude_only",
        }
    }
}

fn backend(cause: AgentError) -> LabError {
    LabError::Backend { cause }
}

/// Replays one side: initial assessment from the card, then one judged
/// window per turn, folded into a trajectory.
pub fn score_side(
    persona: &PersonaCard,
    crisis_event: &str,
    dialogue: &[DialoguePair],
    judge: &mut dyn WindowJudge,
) -> Result<TrajectoryState, LabError> {
    let initial = judge.assess_initial(persona, crisis_event).map_err(backend)?;
    let mut traj = TrajectoryState::new(initial.initial_state())?;
    for (i, pair) in dialogue.iter().enumerate() {
        let ctx = JudgeWindowContext {
            persona,
            crisis_event,
            window_index: i as u32 + 1,
            window: std::slice::from_ref(pair),
        };
        let rating = judge.rate_window(&ctx).map_err(backend)?;
        traj.apply_window(rating.action_vector());
    }
    Ok(traj)
}

/// Reduces a replayed trajectory under the named rule.
pub fn scorer_value(kind: ScorerKind, traj: &TrajectoryState) -> f64 {
    match kind {
        ScorerKind::FullEpm => traj.e_total(),
        ScorerKind::NoPhysics => linear_score(traj),
        ScorerKind::MagnitudeOnly => magnitude_score(traj),
    }
}

fn replay_sides(
    pair: &PerturbationPair,
    judge: &mut dyn WindowJudge,
) -> Result<(TrajectoryState, TrajectoryState), LabError> {
    let crisis = pair.context.crisis_event.as_str();
    let original = score_side(pair.side_persona(false), crisis, &pair.side_dialogue(false), judge)?;
    let perturbed = score_side(pair.side_persona(true), crisis, &pair.side_dialogue(true), judge)?;
    Ok((original, perturbed))
}

/// Scores both sides under one rule and records the values on the pair.
pub fn score_pair(
    pair: &mut PerturbationPair,
    scorer: ScorerKind,
    judge: &mut dyn WindowJudge,
) -> Result<(f64, f64), LabError> {
    let (original, perturbed) = replay_sides(pair, judge)?;
    let values = (scorer_value(scorer, &original), scorer_value(scorer, &perturbed));
    pair.record_score(scorer.id(), values.0, values.1);
    Ok(values)
}

/// One replay per side, all three aggregations recorded.
pub fn score_pair_full(
    pair: &mut PerturbationPair,
    judge: &mut dyn WindowJudge,
) -> Result<(), LabError> {
    let (original, perturbed) = replay_sides(pair, judge)?;
    for scorer in ScorerKind::ALL {
        pair.record_score(
            scorer.id(),
            scorer_value(scorer, &original),
            scorer_value(scorer, &perturbed),
        );
    }
    Ok(())
}
