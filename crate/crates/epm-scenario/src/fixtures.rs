//! Schema-complete sample data. Tests across the workspace and the demo
//! corpus generator build on these; all of it is synthetic.

use crate::card::{
    AxisPriorities, CurrentSituation, EmpathyNeeds, EmpathyThreshold, PastExperiences, PersonaCard,
    PriorityLevel, RoleInfo, RoleTraits, Story,
};
use crate::pipeline::{DialogueTurn, RawDialogue, Speaker};
use crate::scenario::{
    BandingParams, Mechanism, MechanismKind, PersonaType, Scenario, TaggedLabel, SCENARIO_FORMAT,
};
use epm_core::{IedrAssessment, IedrIndicator, IndicatorId};

/// A complete hand-written scenario: a night-shift paramedic stalled on the
/// application she used to care about most. Assessment included, band Hard.
pub fn exemplar_scenario() -> Scenario {
    let card = PersonaCard {
        role_info: RoleInfo {
            name: "Mara Voss".to_string(),
            gender: "female".to_string(),
            age: 34,
        },
        role_traits: RoleTraits {
            social_persona: "The steady one on shift: dry jokes over the radio, checklists for \
                             everyone else's panic, first to volunteer for the worst hours."
                .to_string(),
            inner_core: "Runs on the belief that competence is the only reliable apology for \
                         existing; a single bad outcome can therefore bankrupt her."
                .to_string(),
        },
        empathy_threshold: EmpathyThreshold::Medium,
        chat_topic: "the flight-medic application sitting unsubmitted for five months".to_string(),
        empathy_needs: EmpathyNeeds {
            vent_content: "I re-ran the Keller Street call a hundred times and I still pick the \
                           same triage order, so why did it end the way it did. The application \
                           deadline is in six weeks and I open the form and close it again. \
                           Everyone says take the next step and I want to throw the phone."
                .to_string(),
            hoped_points: "Someone who notices she already did the analysis and does not repeat \
                           it back to her; acknowledgment that the stall is about trust in \
                           herself, not laziness; one small next move she chose herself."
                .to_string(),
            threshold_constraints: "Platitudes about everything happening for a reason end the \
                                    conversation. Unsolicited step-by-step plans get deflected \
                                    with procedure jokes. Do not push on the patient's family."
                .to_string(),
        },
        empathy_priority: AxisPriorities::new(
            PriorityLevel::Low,
            PriorityLevel::Medium,
            PriorityLevel::High,
        ),
        past_experiences: PastExperiences {
            childhood: "Oldest of three in a house where the parents' restaurant failed slowly; \
                        she learned to make dinner, sign her own permission slips, and treat \
                        asking for help as queue-jumping."
                .to_string(),
            adolescence: "Got an EMT ride-along at sixteen through a teacher who noticed her; \
                          discovered that emergencies felt calmer than home because they had \
                          protocols."
                .to_string(),
            young_adulthood: "Built a reputation as the medic who never freezes; turned down two \
                              chances to train for flight duty because the team was short-staffed, \
                              and called it loyalty."
                .to_string(),
            implicit_arc: "Every role she takes is structured so that her needs are the last \
                           agenda item; the application terrifies her because it is the first \
                           thing she has wanted only for herself."
                .to_string(),
        },
        current_situation: CurrentSituation {
            circumstances: "Four months past a pediatric call on Keller Street that ended badly \
                            despite textbook triage; cleared by review, still on full shifts, \
                            sleeping through alarms she used to beat."
                .to_string(),
            main_goal: "Decide about the flight-medic application while it is still her decision \
                        and not the deadline's."
                .to_string(),
            vision: "A version of the job where she trusts her own judgment again enough to be \
                     the one strapped in the helicopter."
                .to_string(),
        },
        story: Story {
            trigger: "The program coordinator emailed a friendly reminder that her started \
                      application expires at the end of the cycle."
                .to_string(),
            development: vec![
                "She drafted a withdrawal email, did not send it, and took three extra shifts \
                 instead."
                    .to_string(),
                "A rookie asked why she never went for flight duty and she heard herself give \
                 the loyalty answer and not believe it."
                    .to_string(),
                "She drove past Keller Street on a day off, parked for twenty minutes, and told \
                 no one."
                    .to_string(),
                "Her sister forwarded the application link with the subject line 'six weeks', \
                 and Mara opened a chat window instead of the form."
                    .to_string(),
            ],
            outcome: "She is talking, twelve minutes at a time, in the parking garage before \
                      shifts."
                .to_string(),
            epilogue: "What she cannot say yet: if she becomes the medic in the helicopter and \
                       fails, there will be no team around her to absorb it, and she does not \
                       know who she is in a failure that is fully hers."
                .to_string(),
        },
    };

    let iedr = exemplar_assessment();
    let band = BandingParams::default().band(iedr.r0());

    Scenario {
        format: SCENARIO_FORMAT.to_string(),
        id: "exemplar-mara-voss".to_string(),
        synthetic: true,
        persona: card,
        crisis_event: "A deadline reminder has forced a stalled, identity-heavy career decision \
                       back into the open, four months after a professional loss she cannot \
                       reason her way out of."
            .to_string(),
        labels: vec![
            TaggedLabel::primary("career decision paralysis after a critical incident"),
            TaggedLabel::secondary("self-trust erosion"),
            TaggedLabel::secondary("competence as identity"),
        ],
        domain_label: "career_achievement".to_string(),
        mechanism_label: Mechanism { axis: epm_core::AxisId::Proactive, kind: MechanismKind::Challenging },
        persona_type: PersonaType::Defensive,
        iedr: Some(iedr),
        difficulty_band: Some(band),
    }
}

/// Initial ratings for the exemplar, evidence quoting the card.
pub fn exemplar_assessment() -> IedrAssessment {
    let rated = [
        (
            IndicatorId::C1,
            2,
            "\"I still pick the same triage order, so why did it end the way it did\": the event \
             resists the causal account she needs.",
        ),
        (
            IndicatorId::C2,
            2,
            "Calls the stalled application laziness in others' mouths while knowing it is not; \
             her framing of her own state is split.",
        ),
        (
            IndicatorId::C3,
            2,
            "Re-ran the call a hundred times; rumination loops without producing a usable \
             interpretation.",
        ),
        (
            IndicatorId::A1,
            2,
            "Sleeping through alarms she used to beat; flattened drive bleeding into the body.",
        ),
        (
            IndicatorId::A2,
            2,
            "Wants to throw the phone when told to take the next step; affect spikes she \
             immediately cloaks in jokes.",
        ),
        (
            IndicatorId::A3,
            2,
            "Parked at Keller Street for twenty minutes and told no one; feeling is managed by \
             concealment.",
        ),
        (
            IndicatorId::P1,
            2,
            "Opens the form and closes it again; initiative stalls at the point of contact.",
        ),
        (
            IndicatorId::P2,
            3,
            "Drafted a withdrawal email and took three extra shifts instead; action flows only \
             into self-erasure.",
        ),
        (
            IndicatorId::P3,
            3,
            "Five months of avoidance on the one goal she chose for herself, now outsourced to \
             a deadline.",
        ),
    ];
    let indicators = rated
        .into_iter()
        .map(|(id, level, evidence)| IedrIndicator {
            id,
            level,
            evidence: evidence.to_string(),
            reasoning: String::new(),
        })
        .collect();
    IedrAssessment::new(indicators).expect("exemplar ratings are well formed")
}

/// Clone the exemplar with a different id and a fresh assessment built from
/// plain levels. Handy for tests that need a specific starting severity.
pub fn scenario_with_levels(id: &str, levels: [u8; 9]) -> Scenario {
    let mut s = exemplar_scenario();
    s.id = id.to_string();
    let iedr = IedrAssessment::from_levels(levels).expect("levels in range");
    s.difficulty_band = Some(BandingParams::default().band(iedr.r0()));
    s.iedr = Some(iedr);
    s
}

/// Seeker-heavy conversation with clear affective cues, one memory line,
/// and explicit support preferences. The stub extractor rates it
/// affective-High.
pub fn venting_dialogue() -> RawDialogue {
    RawDialogue {
        id: "fixture-venting".to_string(),
        turns: vec![
            DialogueTurn {
                speaker: Speaker::Seeker,
                text: "I have been overwhelmed for weeks and I keep crying at small things, \
                       then going numb for a whole evening."
                    .to_string(),
            },
            DialogueTurn {
                speaker: Speaker::Supporter,
                text: "That sounds heavy. What is taking the most out of you?".to_string(),
            },
            DialogueTurn {
                speaker: Speaker::Seeker,
                text: "Honestly I can't explain it, I am just exhausted and a bit stuck. \
                       Please just listen, I hate advice right now."
                    .to_string(),
            },
            DialogueTurn {
                speaker: Speaker::Seeker,
                text: "When I was a kid my mother handled every crisis, and I never learned \
                       who to be when things fall apart."
                    .to_string(),
            },
        ],
    }
}

/// Conversation carrying a blocked term; the pre-filter must drop it.
pub fn blocked_dialogue() -> RawDialogue {
    RawDialogue {
        id: "fixture-blocked".to_string(),
        turns: vec![
            DialogueTurn {
                speaker: Speaker::Seeker,
                text: "A forum thread kept pointing me at a crisis hotline and I closed the \
                       tab; I do not want that conversation, I want to talk about my week, \
                       which was long and badly slept."
                    .to_string(),
            },
            DialogueTurn {
                speaker: Speaker::Supporter,
                text: "I hear you. Tell me about the week.".to_string(),
            },
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::DifficultyBand;

    #[test]
    fn exemplar_assessment_lands_in_the_hard_band() {
        let s = exemplar_scenario();
        let iedr = s.iedr.as_ref().unwrap();
        let expected = (196.0f64 + 324.0 + 625.0).sqrt();
        assert!((iedr.r0() - expected).abs() < 1e-12);
        assert_eq!(s.difficulty_band, Some(DifficultyBand::Hard));
    }

    #[test]
    fn level_override_recomputes_band() {
        let s = scenario_with_levels("all-threes", [3; 9]);
        let iedr = s.iedr.as_ref().unwrap();
        assert!((iedr.r0() - 1899f64.sqrt()).abs() < 1e-12);
        assert_eq!(s.difficulty_band, Some(DifficultyBand::Extreme));
    }
}
