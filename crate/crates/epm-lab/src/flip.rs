//! Priority flips: the persona-side counterfactual.
//!
//! The flip inverts one axis's support priority (high to low, or back)
//! and appends a matching constraint sentence to the card's hard
//! constraints, so the character still reads coherently. Everything
//! else on the card, and every word of any dialogue scored against it,
//! stays byte-identical.

use crate::LabError;
use epm_core::AxisId;
use epm_scenario::{PriorityLevel, Scenario};

/// Flips the single high-priority axis to low. Cards without exactly one
/// high axis need [`flip_axis`] with the axis named.
pub fn persona_flip(scenario: &Scenario) -> Result<Scenario, LabError> {
    let high = scenario.persona.empathy_priority.high_axes();
    match high.as_slice() {
        [] => Err(LabError::NoHighPriority),
        [axis] => flip_axis(scenario, *axis),
        axes => Err(LabError::MultipleHighPriorities { axes: axes.to_vec() }),
    }
}

/// Inverts the named axis between high and low and appends the matching
/// preference or anti-preference constraint. An involution on the
/// priority field: flipping the same axis twice restores the original
/// priorities (the constraint text accumulates).
///
/// Any precomputed initial assessment or difficulty band on the scenario
/// is dropped: both were derived from the unflipped card.
pub fn flip_axis(scenario: &Scenario, axis: AxisId) -> Result<Scenario, LabError> {
    let current = scenario.persona.empathy_priority.get(axis);
    let (next, constraint) = match current {
        Some(PriorityLevel::High) => (PriorityLevel::Low, anti_preference(axis)),
        Some(PriorityLevel::Low) => (PriorityLevel::High, preference(axis)),
        _ => return Err(LabError::AxisNotFlippable { axis }),
    };

    let mut flipped = scenario.clone();
    flipped.persona.empathy_priority.set(axis, next);
    let constraints = &mut flipped.persona.empathy_needs.threshold_constraints;
    if !constraints.is_empty() {
        constraints.push(' ');
    }
    constraints.push_str(constraint);
    flipped.iedr = None;
    flipped.difficulty_band = None;
    Ok(flipped)
}

fn anti_preference(axis: AxisId) -> &'static str {
    match axis {
        AxisId::Cognitive => {
            "Reacts against being helped to make sense of things: reframing, sorting causes, or \
             offering a clearer picture now lands as being graded on a test they did not agree \
             to take."
        }
        AxisId::Affective => {
            "Reacts against feeling-talk: having emotions named or dwelt on now reads as \
             condescension, and warmth aimed directly at the hurt makes them close up."
        }
        AxisId::Proactive => {
            "Reacts against forward motion: suggestions, plans, or even gentle nudges toward a \
             next step now land as pressure and get pushed back on reflexively."
        }
    }
}

fn preference(axis: AxisId) -> &'static str {
    match axis {
        AxisId::Cognitive => {
            "Now actively seeks help making sense of things: wants causes sorted, the story \
             straightened, and a frame that holds."
        }
        AxisId::Affective => {
            "Now actively seeks feeling-talk: wants the emotion named, stayed with, and taken \
             seriously before anything else happens."
        }
        AxisId::Proactive => {
            "Now actively seeks forward motion: wants a concrete next step on the table and \
             feels held back without one."
        }
    }
}
