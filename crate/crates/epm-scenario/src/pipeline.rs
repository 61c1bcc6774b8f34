//! Dialogue-to-scenario pipeline: filter raw conversations, extract
//! psychological features, expand features into a full scenario.
//!
//! Each stage is pluggable. The bundled implementations are deterministic
//! stubs: a keyword filter, a cue-counting extractor, and a template
//! expander. A live text generator can slot in behind the same trait.

use crate::card::{
    AxisPriorities, CurrentSituation, EmpathyNeeds, EmpathyThreshold, PastExperiences, PersonaCard,
    PriorityLevel, RoleInfo, RoleTraits, Story,
};
use crate::scenario::{
    BandingParams, Mechanism, MechanismKind, PersonaType, Scenario, TaggedLabel, SCENARIO_FORMAT,
};
use crate::validate::{validate_scenario, QualityCriteria, ValidationIssue};
use crate::{ScenarioError, DEFAULT_DOMAINS};
use epm_core::{AxisId, IedrAssessment, IedrIndicator, IndicatorId};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Speaker {
    /// The person bringing the problem.
    Seeker,
    /// The person responding.
    Supporter,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DialogueTurn {
    pub speaker: Speaker,
    pub text: String,
}

/// An unprocessed source conversation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawDialogue {
    pub id: String,
    pub turns: Vec<DialogueTurn>,
}

impl RawDialogue {
    fn seeker_text(&self) -> String {
        self.turns
            .iter()
            .filter(|t| t.speaker == Speaker::Seeker)
            .map(|t| t.text.as_str())
            .collect::<Vec<_>>()
            .join("\n")
    }
}

/// Keyword stub for the pre-filter stage: drops conversations that carry
/// blocked content or too little seeker material to build a card from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterRules {
    pub blocked_terms: Vec<String>,
    pub min_seeker_chars: usize,
}

impl Default for FilterRules {
    fn default() -> Self {
        FilterRules {
            blocked_terms: vec!["self-harm".to_string(), "crisis hotline".to_string()],
            min_seeker_chars: 80,
        }
    }
}

impl FilterRules {
    /// True when the dialogue should continue down the pipeline.
    pub fn keep(&self, dialogue: &RawDialogue) -> bool {
        let all_text = dialogue
            .turns
            .iter()
            .map(|t| t.text.to_lowercase())
            .collect::<Vec<_>>()
            .join("\n");
        if self.blocked_terms.iter().any(|term| all_text.contains(&term.to_lowercase())) {
            return false;
        }
        dialogue.seeker_text().chars().count() >= self.min_seeker_chars
    }
}

/// Cue keyword lists for the stub extractor, one list per axis plus
/// support-preference and memory markers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractorRules {
    pub cognitive_cues: Vec<String>,
    pub affective_cues: Vec<String>,
    pub proactive_cues: Vec<String>,
    pub threshold_cues: Vec<String>,
    pub memory_markers: Vec<String>,
}

fn lowered(words: &[&str]) -> Vec<String> {
    words.iter().map(|w| w.to_lowercase()).collect()
}

impl Default for ExtractorRules {
    fn default() -> Self {
        ExtractorRules {
            cognitive_cues: lowered(&[
                "makes no sense",
                "don't understand",
                "can't explain",
                "confusing",
                "why me",
                "keep going over it",
            ]),
            affective_cues: lowered(&[
                "overwhelmed",
                "crying",
                "lonely",
                "ashamed",
                "anxious",
                "numb",
                "exhausted",
            ]),
            proactive_cues: lowered(&[
                "stuck",
                "pointless",
                "give up",
                "no use",
                "can't start",
                "what's the point",
                "frozen",
            ]),
            threshold_cues: lowered(&[
                "don't tell me what to do",
                "don't lecture",
                "just listen",
                "hate advice",
                "don't pity me",
            ]),
            memory_markers: lowered(&["when i was", "back then", "growing up", "as a kid"]),
        }
    }
}

/// Structured features pulled from one source conversation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureBundle {
    pub source_id: String,
    /// Inferred support priorities; exactly one axis is High.
    pub need_axes: BTreeMap<AxisId, PriorityLevel>,
    /// Support-preference phrases found verbatim in the seeker's turns.
    pub threshold_cues: Vec<String>,
    /// Seeker sentences that reference the past.
    pub memory_cues: Vec<String>,
    /// Short topic summary taken from the seeker's opening.
    pub topic_hint: String,
}

impl FeatureBundle {
    pub fn high_axis(&self) -> AxisId {
        *self
            .need_axes
            .iter()
            .find(|(_, p)| **p == PriorityLevel::High)
            .map(|(a, _)| a)
            .expect("extractor guarantees one High axis")
    }
}

fn count_hits(text: &str, cues: &[String]) -> usize {
    cues.iter().map(|cue| text.matches(cue.as_str()).count()).sum()
}

/// Stub extractor: count axis cues in the seeker's turns. Returns `None`
/// (the empty bundle) when there is nothing to build on, which tells the
/// pipeline to skip the dialogue.
pub fn extract_features(dialogue: &RawDialogue, rules: &ExtractorRules) -> Option<FeatureBundle> {
    let seeker = dialogue.seeker_text();
    let lower = seeker.to_lowercase();
    if lower.trim().is_empty() {
        return None;
    }

    let hits = [
        (AxisId::Cognitive, count_hits(&lower, &rules.cognitive_cues)),
        (AxisId::Affective, count_hits(&lower, &rules.affective_cues)),
        (AxisId::Proactive, count_hits(&lower, &rules.proactive_cues)),
    ];
    let total: usize = hits.iter().map(|(_, n)| n).sum();
    if total == 0 {
        return None;
    }

    // Unique High axis: highest count, earlier axis wins ties.
    let max = hits.iter().map(|(_, n)| *n).max().unwrap_or(0);
    let high = hits.iter().find(|(_, n)| *n == max).map(|(a, _)| *a).unwrap();
    let need_axes = hits
        .iter()
        .map(|(axis, n)| {
            let level = if *axis == high {
                PriorityLevel::High
            } else if *n > 0 {
                PriorityLevel::Medium
            } else {
                PriorityLevel::Low
            };
            (*axis, level)
        })
        .collect();

    let threshold_cues: Vec<String> =
        rules.threshold_cues.iter().filter(|cue| lower.contains(cue.as_str())).cloned().collect();

    let mut memory_cues: Vec<String> = Vec::new();
    for sentence in seeker.split(['.', '!', '?']) {
        let trimmed = sentence.trim();
        if trimmed.is_empty() {
            continue;
        }
        let sentence_lower = trimmed.to_lowercase();
        if rules.memory_markers.iter().any(|m| sentence_lower.contains(m.as_str())) {
            memory_cues.push(trimmed.to_string());
            if memory_cues.len() == 3 {
                break;
            }
        }
    }

    let topic_hint = seeker
        .lines()
        .find(|l| !l.trim().is_empty())
        .map(|l| l.split_whitespace().take(8).collect::<Vec<_>>().join(" "))
        .unwrap_or_default();

    Some(FeatureBundle {
        source_id: dialogue.id.clone(),
        need_axes,
        threshold_cues,
        memory_cues,
        topic_hint,
    })
}

/// A pluggable three-stage generator. The stub implementation is pure; a
/// live implementation may call out and return `GeneratorFailure`.
pub trait ScenarioGenerator {
    fn filter(&self, dialogue: &RawDialogue) -> Result<bool, ScenarioError>;
    fn extract(&self, dialogue: &RawDialogue) -> Result<Option<FeatureBundle>, ScenarioError>;
    fn generate(&self, features: &FeatureBundle) -> Result<Scenario, ScenarioError>;
}

/// Expand features into a scenario and insist the result is schema-complete.
pub fn generate_scenario(
    features: &FeatureBundle,
    generator: &dyn ScenarioGenerator,
) -> Result<Scenario, ScenarioError> {
    let scenario = generator.generate(features)?;
    let mut sections = scenario.persona.text_sections();
    sections.push(("crisis_event".to_string(), scenario.crisis_event.as_str()));
    if let Some((path, _)) = sections.iter().find(|(_, text)| text.trim().is_empty()) {
        return Err(ScenarioError::SchemaIncomplete { missing: path.clone() });
    }
    if scenario.persona.story.development.len() != 4 {
        return Err(ScenarioError::SchemaIncomplete { missing: "story.development".to_string() });
    }
    Ok(scenario)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SkipReason {
    Filtered,
    EmptyFeatures,
    GeneratorFailed { detail: String },
    FailedValidation { issues: Vec<ValidationIssue> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedDialogue {
    pub id: String,
    pub reason: SkipReason,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub scenarios: Vec<Scenario>,
    pub skipped: Vec<SkippedDialogue>,
}

/// Run the whole pipeline over a batch: filter, extract, generate, validate.
/// Dialogues that fall out at any stage land in `skipped` with the reason.
pub fn build_corpus(
    dialogues: &[RawDialogue],
    generator: &dyn ScenarioGenerator,
    criteria: &QualityCriteria,
) -> Result<PipelineReport, ScenarioError> {
    let mut report = PipelineReport { scenarios: Vec::new(), skipped: Vec::new() };
    for dialogue in dialogues {
        if !generator.filter(dialogue)? {
            report
                .skipped
                .push(SkippedDialogue { id: dialogue.id.clone(), reason: SkipReason::Filtered });
            continue;
        }
        let Some(features) = generator.extract(dialogue)? else {
            report.skipped.push(SkippedDialogue {
                id: dialogue.id.clone(),
                reason: SkipReason::EmptyFeatures,
            });
            continue;
        };
        let scenario = match generate_scenario(&features, generator) {
            Ok(s) => s,
            Err(e) => {
                report.skipped.push(SkippedDialogue {
                    id: dialogue.id.clone(),
                    reason: SkipReason::GeneratorFailed { detail: e.to_string() },
                });
                continue;
            }
        };
        let verdict = validate_scenario(&scenario, criteria);
        if verdict.passed() {
            report.scenarios.push(scenario);
        } else {
            report.skipped.push(SkippedDialogue {
                id: dialogue.id.clone(),
                reason: SkipReason::FailedValidation { issues: verdict.issues },
            });
        }
    }
    Ok(report)
}

/// Stable 64-bit string hash used to pick template slots deterministically.
fn fnv1a(text: &str) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in text.bytes() {
        hash ^= u64::from(byte);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

const TEMPLATE_NAMES: [(&str, &str); 8] = [
    ("Ida Kovalenko", "female"),
    ("Tomasz Brandt", "male"),
    ("June Okafor", "female"),
    ("Ravi Menon", "male"),
    ("Petra Halvorsen", "female"),
    ("Dario Ferreyra", "male"),
    ("Sanne Vermeulen", "female"),
    ("Caleb Whitford", "male"),
];

/// Deterministic template expander. The same bundle always produces the
/// same scenario; no network, no RNG.
#[derive(Debug, Clone)]
pub struct TemplateGenerator {
    pub filter: FilterRules,
    pub extractor: ExtractorRules,
    pub domains: Vec<String>,
    pub banding: BandingParams,
}

impl Default for TemplateGenerator {
    fn default() -> Self {
        TemplateGenerator {
            filter: FilterRules::default(),
            extractor: ExtractorRules::default(),
            domains: DEFAULT_DOMAINS.iter().map(|d| d.to_string()).collect(),
            banding: BandingParams::default(),
        }
    }
}

impl TemplateGenerator {
    fn priority_level_for(&self, features: &FeatureBundle, axis: AxisId) -> PriorityLevel {
        features.need_axes.get(&axis).copied().unwrap_or(PriorityLevel::Low)
    }

    fn iedr_for(&self, features: &FeatureBundle, vent: &str) -> Result<IedrAssessment, ScenarioError> {
        let indicators = IndicatorId::ALL
            .into_iter()
            .map(|id| {
                let level = match self.priority_level_for(features, id.axis()) {
                    PriorityLevel::High => 3,
                    PriorityLevel::Medium => 2,
                    PriorityLevel::Low => 1,
                };
                IedrIndicator {
                    id,
                    level,
                    evidence: format!("card: {vent}"),
                    reasoning: format!("template severity for a {:?} priority axis", {
                        self.priority_level_for(features, id.axis())
                    }),
                }
            })
            .collect();
        Ok(IedrAssessment::new(indicators)?)
    }
}

impl ScenarioGenerator for TemplateGenerator {
    fn filter(&self, dialogue: &RawDialogue) -> Result<bool, ScenarioError> {
        Ok(self.filter.keep(dialogue))
    }

    fn extract(&self, dialogue: &RawDialogue) -> Result<Option<FeatureBundle>, ScenarioError> {
        Ok(extract_features(dialogue, &self.extractor))
    }

    fn generate(&self, f: &FeatureBundle) -> Result<Scenario, ScenarioError> {
        let hash = fnv1a(&f.source_id);
        let (name, gender) = TEMPLATE_NAMES[(hash % TEMPLATE_NAMES.len() as u64) as usize];
        let age = 24 + (hash / 7 % 30) as u32;
        let first_name = name.split_whitespace().next().unwrap_or(name);
        let topic = if f.topic_hint.is_empty() { "a weight they carry" } else { &f.topic_hint };
        let high_axis = f.high_axis();

        let struggle = match high_axis {
            AxisId::Cognitive => "cannot put the situation into an account that holds together",
            AxisId::Affective => "is flooded by feelings faster than words can catch them",
            AxisId::Proactive => "sees every next step as already failed",
        };

        let memory = f
            .memory_cues
            .first()
            .cloned()
            .unwrap_or_else(|| format!("{first_name} rarely talks about earlier years"));

        let vent = format!("{topic} keeps coming back, and {first_name} {struggle}.");
        let constraints = if f.threshold_cues.is_empty() {
            format!("{first_name} shuts down when the other person takes over the conversation.")
        } else {
            format!("Hard limits, in their own words: {}.", f.threshold_cues.join("; "))
        };

        let card = PersonaCard {
            role_info: RoleInfo {
                name: name.to_string(),
                gender: gender.to_string(),
                age,
            },
            role_traits: RoleTraits {
                social_persona: format!(
                    "{first_name} keeps conversations light and deflects questions about {topic}."
                ),
                inner_core: format!("Privately, {first_name} {struggle}."),
            },
            empathy_threshold: match f.threshold_cues.len() {
                0 => EmpathyThreshold::Low,
                1 => EmpathyThreshold::Medium,
                _ => EmpathyThreshold::High,
            },
            chat_topic: topic.to_string(),
            empathy_needs: EmpathyNeeds {
                vent_content: vent.clone(),
                hoped_points: format!(
                    "Wants the listener to notice that {topic} is not a small thing for them."
                ),
                threshold_constraints: constraints,
            },
            empathy_priority: AxisPriorities::new(
                self.priority_level_for(f, AxisId::Cognitive),
                self.priority_level_for(f, AxisId::Affective),
                self.priority_level_for(f, AxisId::Proactive),
            ),
            past_experiences: PastExperiences {
                childhood: format!("{first_name} learned early that complaints were unwelcome."),
                adolescence: format!(
                    "School years taught {first_name} to perform fine while feeling otherwise."
                ),
                young_adulthood: memory,
                implicit_arc: format!(
                    "{first_name} treats needing help as a debt they cannot repay."
                ),
            },
            current_situation: CurrentSituation {
                circumstances: format!("Right now, {vent}"),
                main_goal: format!("{first_name} wants one conversation that does not end in advice."),
                vision: format!("On a good day, {first_name} imagines {topic} taking up less room."),
            },
            story: Story {
                trigger: format!("This week, {topic} surfaced again without warning."),
                development: vec![
                    format!("{first_name} mentioned it sideways and changed the subject."),
                    format!("A second attempt to talk ended with {first_name} apologizing."),
                    format!("{first_name} started drafting messages and deleting them."),
                    format!("Finally {first_name} opened a chat window late at night."),
                ],
                outcome: format!("{first_name} is still circling the same conversation."),
                epilogue: format!(
                    "What {first_name} never says aloud: {topic} is tied to who they think they are."
                ),
            },
        };

        let iedr = self.iedr_for(f, &vent)?;
        let band = self.banding.band(iedr.r0());
        let domain = self
            .domains
            .get((hash / 13 % self.domains.len().max(1) as u64) as usize)
            .cloned()
            .unwrap_or_else(|| "daily_life".to_string());

        Ok(Scenario {
            format: SCENARIO_FORMAT.to_string(),
            id: format!("gen-{}", f.source_id),
            synthetic: true,
            persona: card,
            crisis_event: format!("{first_name} has hit a wall around {topic}."),
            labels: vec![
                TaggedLabel::primary(topic.to_string()),
                TaggedLabel::secondary(format!("{} support first", high_axis.short())),
            ],
            domain_label: domain,
            mechanism_label: Mechanism {
                axis: high_axis,
                kind: if f.memory_cues.is_empty() {
                    MechanismKind::Routine
                } else {
                    MechanismKind::Challenging
                },
            },
            persona_type: if f.threshold_cues.is_empty() {
                PersonaType::Receptive
            } else {
                PersonaType::Defensive
            },
            iedr: Some(iedr),
            difficulty_band: Some(band),
        })
    }
}
