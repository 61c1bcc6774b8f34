//! Persona cards: the structured character sheet a user simulator plays and
//! a judge grounds its assessment in.

use epm_core::AxisId;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriorityLevel {
    Low,
    Medium,
    High,
}

/// How much interaction it takes before the persona opens up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmpathyThreshold {
    Low,
    Medium,
    High,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoleInfo {
    pub name: String,
    pub gender: String,
    pub age: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoleTraits {
    /// The face shown to others.
    pub social_persona: String,
    /// What actually drives the character underneath.
    pub inner_core: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpathyNeeds {
    /// What the persona wants to unload in conversation.
    pub vent_content: String,
    /// What a good listener would pick up on.
    pub hoped_points: String,
    /// Hard constraints: support styles that backfire for this persona.
    pub threshold_constraints: String,
}

/// Per-axis support priorities. Stored as a map so a card missing an axis is
/// representable; validation flags the gap instead of the parser.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AxisPriorities(BTreeMap<AxisId, PriorityLevel>);

impl AxisPriorities {
    pub fn new(
        cognitive: PriorityLevel,
        affective: PriorityLevel,
        proactive: PriorityLevel,
    ) -> Self {
        AxisPriorities(BTreeMap::from([
            (AxisId::Cognitive, cognitive),
            (AxisId::Affective, affective),
            (AxisId::Proactive, proactive),
        ]))
    }

    pub fn get(&self, axis: AxisId) -> Option<PriorityLevel> {
        self.0.get(&axis).copied()
    }

    pub fn set(&mut self, axis: AxisId, level: PriorityLevel) {
        self.0.insert(axis, level);
    }

    pub fn remove(&mut self, axis: AxisId) -> Option<PriorityLevel> {
        self.0.remove(&axis)
    }

    /// Axes with no assigned priority.
    pub fn missing_axes(&self) -> Vec<AxisId> {
        AxisId::ALL.into_iter().filter(|axis| !self.0.contains_key(axis)).collect()
    }

    /// Axes currently marked High.
    pub fn high_axes(&self) -> Vec<AxisId> {
        AxisId::ALL
            .into_iter()
            .filter(|axis| self.get(*axis) == Some(PriorityLevel::High))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PastExperiences {
    pub childhood: String,
    pub adolescence: String,
    pub young_adulthood: String,
    /// The through-line the character cannot articulate themselves.
    pub implicit_arc: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurrentSituation {
    pub circumstances: String,
    pub main_goal: String,
    pub vision: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Story {
    pub trigger: String,
    /// Exactly four development stages in order.
    pub development: Vec<String>,
    pub outcome: String,
    pub epilogue: String,
}

/// Full character sheet. Field groups mirror the scenario file schema
/// one-to-one; validation lives with the scenario, not here.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersonaCard {
    pub role_info: RoleInfo,
    pub role_traits: RoleTraits,
    pub empathy_threshold: EmpathyThreshold,
    pub chat_topic: String,
    pub empathy_needs: EmpathyNeeds,
    pub empathy_priority: AxisPriorities,
    pub past_experiences: PastExperiences,
    pub current_situation: CurrentSituation,
    pub story: Story,
}

impl PersonaCard {
    /// Deep-memory blocks a director can release to the user simulator
    /// mid-episode, keyed by stable names.
    pub fn memory_blocks(&self) -> BTreeMap<String, String> {
        BTreeMap::from([
            ("childhood".to_string(), self.past_experiences.childhood.clone()),
            ("adolescence".to_string(), self.past_experiences.adolescence.clone()),
            ("young_adulthood".to_string(), self.past_experiences.young_adulthood.clone()),
            ("implicit_arc".to_string(), self.past_experiences.implicit_arc.clone()),
            ("epilogue".to_string(), self.story.epilogue.clone()),
        ])
    }

    /// Every free-text section with a stable path, for validation sweeps.
    pub fn text_sections(&self) -> Vec<(String, &str)> {
        let mut sections = vec![
            ("role_info.name".to_string(), self.role_info.name.as_str()),
            ("role_info.gender".to_string(), self.role_info.gender.as_str()),
            ("role_traits.social_persona".to_string(), self.role_traits.social_persona.as_str()),
            ("role_traits.inner_core".to_string(), self.role_traits.inner_core.as_str()),
            ("chat_topic".to_string(), self.chat_topic.as_str()),
            ("empathy_needs.vent_content".to_string(), self.empathy_needs.vent_content.as_str()),
            ("empathy_needs.hoped_points".to_string(), self.empathy_needs.hoped_points.as_str()),
            (
                "empathy_needs.threshold_constraints".to_string(),
                self.empathy_needs.threshold_constraints.as_str(),
            ),
            ("past_experiences.childhood".to_string(), self.past_experiences.childhood.as_str()),
            (
                "past_experiences.adolescence".to_string(),
                self.past_experiences.adolescence.as_str(),
            ),
            (
                "past_experiences.young_adulthood".to_string(),
                self.past_experiences.young_adulthood.as_str(),
            ),
            (
                "past_experiences.implicit_arc".to_string(),
                self.past_experiences.implicit_arc.as_str(),
            ),
            (
                "current_situation.circumstances".to_string(),
                self.current_situation.circumstances.as_str(),
            ),
            ("current_situation.main_goal".to_string(), self.current_situation.main_goal.as_str()),
            ("current_situation.vision".to_string(), self.current_situation.vision.as_str()),
            ("story.trigger".to_string(), self.story.trigger.as_str()),
            ("story.outcome".to_string(), self.story.outcome.as_str()),
            ("story.epilogue".to_string(), self.story.epilogue.as_str()),
        ];
        for (i, stage) in self.story.development.iter().enumerate() {
            sections.push((format!("story.development[{i}]"), stage.as_str()));
        }
        sections
    }
}
