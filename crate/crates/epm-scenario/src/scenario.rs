//! Scenario files: a persona plus the crisis framing, stratification labels,
//! and optional precomputed initial assessment.

use crate::card::PersonaCard;
use crate::ScenarioError;
use epm_core::{AxisId, IedrAssessment};
use serde::{Deserialize, Serialize};

pub const SCENARIO_FORMAT: &str = "epm-scenario/1";

/// Whether the persona mainly guards or mainly opens up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PersonaType {
    Receptive,
    Defensive,
}

/// How the crisis leans on the focal axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MechanismKind {
    Routine,
    Challenging,
}

/// The psychological mechanism label: which axis carries the crisis and how.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mechanism {
    pub axis: AxisId,
    pub kind: MechanismKind,
}

impl Mechanism {
    /// Stable label for grouping, e.g. "affective/challenging".
    pub fn label(&self) -> String {
        let kind = match self.kind {
            MechanismKind::Routine => "routine",
            MechanismKind::Challenging => "challenging",
        };
        format!("{}/{}", self.axis.short(), kind)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelRank {
    Primary,
    Secondary,
}

/// A free-text scenario tag. Exactly one label per scenario should be
/// primary; validation enforces that, not the type.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaggedLabel {
    pub text: String,
    pub rank: LabelRank,
}

impl TaggedLabel {
    pub fn primary(text: impl Into<String>) -> Self {
        TaggedLabel { text: text.into(), rank: LabelRank::Primary }
    }

    pub fn secondary(text: impl Into<String>) -> Self {
        TaggedLabel { text: text.into(), rank: LabelRank::Secondary }
    }
}

/// Difficulty bands partition initial resistance around corpus statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DifficultyBand {
    Easy,
    Medium,
    Hard,
    Extreme,
}

impl DifficultyBand {
    pub const ALL: [DifficultyBand; 4] = [
        DifficultyBand::Easy,
        DifficultyBand::Medium,
        DifficultyBand::Hard,
        DifficultyBand::Extreme,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            DifficultyBand::Easy => "easy",
            DifficultyBand::Medium => "medium",
            DifficultyBand::Hard => "hard",
            DifficultyBand::Extreme => "extreme",
        }
    }
}

/// Corpus-level location and spread of initial resistance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandingParams {
    pub mu: f64,
    pub sigma: f64,
}

impl Default for BandingParams {
    fn default() -> Self {
        BandingParams { mu: 32.32, sigma: 4.52 }
    }
}

impl BandingParams {
    /// Assign a band from initial resistance. Medium is closed at both ends;
    /// the four intervals tile the line with no gaps.
    pub fn band(&self, r0: f64) -> DifficultyBand {
        if r0 > self.mu + self.sigma {
            DifficultyBand::Extreme
        } else if r0 > self.mu {
            DifficultyBand::Hard
        } else if r0 >= self.mu - self.sigma {
            DifficultyBand::Medium
        } else {
            DifficultyBand::Easy
        }
    }
}

/// A complete scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    /// Format tag, always [`SCENARIO_FORMAT`] for files this crate writes.
    pub format: String,
    pub id: String,
    /// True when the card came from the template generator rather than a
    /// filtered real dialogue.
    pub synthetic: bool,
    pub persona: PersonaCard,
    /// Short third-person framing of the precipitating event.
    pub crisis_event: String,
    /// Free-text tags, one of which should be primary.
    pub labels: Vec<TaggedLabel>,
    /// One of the configured life domains.
    pub domain_label: String,
    pub mechanism_label: Mechanism,
    pub persona_type: PersonaType,
    /// Precomputed initial assessment; episodes reuse it instead of asking
    /// the judge again.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iedr: Option<IedrAssessment>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub difficulty_band: Option<DifficultyBand>,
}

impl Scenario {
    /// Recompute the band from the stored assessment, if any.
    pub fn band_from_iedr(&self, params: &BandingParams) -> Option<DifficultyBand> {
        self.iedr.as_ref().map(|a| params.band(a.r0()))
    }

    /// The single primary label, if the labels are well formed.
    pub fn primary_label(&self) -> Option<&str> {
        let mut primaries =
            self.labels.iter().filter(|l| l.rank == LabelRank::Primary).map(|l| l.text.as_str());
        let first = primaries.next()?;
        if primaries.next().is_some() {
            None
        } else {
            Some(first)
        }
    }

    /// Check the format tag before trusting the rest of the file.
    pub fn check_format(&self) -> Result<(), ScenarioError> {
        if self.format == SCENARIO_FORMAT {
            Ok(())
        } else {
            Err(ScenarioError::UnsupportedFormat {
                found: self.format.clone(),
                expected: SCENARIO_FORMAT,
            })
        }
    }
}
