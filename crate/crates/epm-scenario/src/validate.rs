//! Deterministic scenario quality checks with machine-readable reasons.

use crate::scenario::{BandingParams, DifficultyBand, LabelRank, Scenario};
use crate::DEFAULT_DOMAINS;
use epm_core::AxisId;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// Tunable acceptance rules. Same criteria and same scenario always produce
/// the same verdict; nothing here consults a clock, RNG, or network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityCriteria {
    /// Upper bound on any single text section, in characters.
    pub max_section_chars: usize,
    /// Required number of story development stages.
    pub development_stages: usize,
    /// Accepted domain labels; empty list accepts any.
    pub allowed_domains: Vec<String>,
    /// Case-insensitive substrings that disqualify a card outright.
    pub banned_terms: Vec<String>,
    /// Banding rule used to cross-check a stored difficulty band.
    pub banding: BandingParams,
}

impl Default for QualityCriteria {
    fn default() -> Self {
        QualityCriteria {
            max_section_chars: 4000,
            development_stages: 4,
            allowed_domains: DEFAULT_DOMAINS.iter().map(|d| d.to_string()).collect(),
            banned_terms: Vec::new(),
            banding: BandingParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "code", rename_all = "snake_case")]
pub enum ValidationIssue {
    MissingSection { path: String },
    SectionTooLong { path: String, chars: usize, max: usize },
    WrongStageCount { found: usize, expected: usize },
    MissingPriority { axis: AxisId },
    NoPrimaryLabel,
    LabelConflict { detail: String },
    UnknownDomain { found: String },
    BannedContent { path: String, term: String },
    BandMismatch { stored: DifficultyBand, computed: DifficultyBand },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub id: String,
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.issues.is_empty()
    }
}

/// Run every check and collect all findings rather than stopping at the
/// first, so a report names everything wrong with a card at once.
pub fn validate_scenario(s: &Scenario, q: &QualityCriteria) -> ValidationReport {
    let mut issues = Vec::new();

    let mut sections = s.persona.text_sections();
    sections.push(("crisis_event".to_string(), s.crisis_event.as_str()));
    for (path, text) in &sections {
        if text.trim().is_empty() {
            issues.push(ValidationIssue::MissingSection { path: path.clone() });
        } else if text.chars().count() > q.max_section_chars {
            issues.push(ValidationIssue::SectionTooLong {
                path: path.clone(),
                chars: text.chars().count(),
                max: q.max_section_chars,
            });
        }
    }

    let stages = s.persona.story.development.len();
    if stages != q.development_stages {
        issues.push(ValidationIssue::WrongStageCount {
            found: stages,
            expected: q.development_stages,
        });
    }

    for axis in s.persona.empathy_priority.missing_axes() {
        issues.push(ValidationIssue::MissingPriority { axis });
    }

    let primaries: Vec<&str> = s
        .labels
        .iter()
        .filter(|l| l.rank == LabelRank::Primary)
        .map(|l| l.text.as_str())
        .collect();
    match primaries.len() {
        0 => issues.push(ValidationIssue::NoPrimaryLabel),
        1 => {}
        n => issues.push(ValidationIssue::LabelConflict {
            detail: format!("{n} primary labels: {}", primaries.join(", ")),
        }),
    }
    let mut seen = BTreeSet::new();
    for label in &s.labels {
        if !seen.insert(label.text.as_str()) {
            issues.push(ValidationIssue::LabelConflict {
                detail: format!("label {:?} appears more than once", label.text),
            });
        }
    }

    if !q.allowed_domains.is_empty() && !q.allowed_domains.contains(&s.domain_label) {
        issues.push(ValidationIssue::UnknownDomain { found: s.domain_label.clone() });
    }

    if !q.banned_terms.is_empty() {
        for (path, text) in &sections {
            let lower = text.to_lowercase();
            for term in &q.banned_terms {
                if lower.contains(&term.to_lowercase()) {
                    issues.push(ValidationIssue::BannedContent {
                        path: path.clone(),
                        term: term.clone(),
                    });
                }
            }
        }
    }

    if let (Some(stored), Some(computed)) = (s.difficulty_band, s.band_from_iedr(&q.banding)) {
        if stored != computed {
            issues.push(ValidationIssue::BandMismatch { stored, computed });
        }
    }

    ValidationReport { id: s.id.clone(), issues }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::card::PriorityLevel;
    use crate::fixtures;
    use crate::scenario::TaggedLabel;

    #[test]
    fn exemplar_passes_default_criteria() {
        let s = fixtures::exemplar_scenario();
        let report = validate_scenario(&s, &QualityCriteria::default());
        assert!(report.passed(), "unexpected issues: {:?}", report.issues);
    }

    #[test]
    fn missing_axis_priority_is_named() {
        let mut s = fixtures::exemplar_scenario();
        s.persona.empathy_priority.remove(AxisId::Affective);
        let report = validate_scenario(&s, &QualityCriteria::default());
        assert!(report
            .issues
            .contains(&ValidationIssue::MissingPriority { axis: AxisId::Affective }));
    }

    #[test]
    fn duplicate_primary_labels_conflict() {
        let mut s = fixtures::exemplar_scenario();
        s.labels.push(TaggedLabel::primary("a second primary"));
        let report = validate_scenario(&s, &QualityCriteria::default());
        assert!(report
            .issues
            .iter()
            .any(|i| matches!(i, ValidationIssue::LabelConflict { .. })));
    }

    #[test]
    fn empty_section_and_stage_count_are_flagged() {
        let mut s = fixtures::exemplar_scenario();
        s.persona.story.epilogue = "   ".to_string();
        s.persona.story.development.pop();
        let report = validate_scenario(&s, &QualityCriteria::default());
        assert!(report
            .issues
            .contains(&ValidationIssue::MissingSection { path: "story.epilogue".to_string() }));
        assert!(report
            .issues
            .contains(&ValidationIssue::WrongStageCount { found: 3, expected: 4 }));
    }

    #[test]
    fn banned_terms_match_case_insensitively() {
        let mut s = fixtures::exemplar_scenario();
        s.persona.chat_topic = "Lottery Winnings".to_string();
        let q = QualityCriteria {
            banned_terms: vec!["lottery".to_string()],
            ..QualityCriteria::default()
        };
        let report = validate_scenario(&s, &q);
        assert!(report.issues.iter().any(|i| matches!(
            i,
            ValidationIssue::BannedContent { path, .. } if path == "chat_topic"
        )));
    }

    #[test]
    fn stale_band_is_cross_checked_against_assessment() {
        let mut s = fixtures::exemplar_scenario();
        assert!(s.iedr.is_some());
        s.difficulty_band = Some(DifficultyBand::Easy);
        let report = validate_scenario(&s, &QualityCriteria::default());
        assert!(report
            .issues
            .iter()
            .any(|i| matches!(i, ValidationIssue::BandMismatch { .. })));
    }

    #[test]
    fn unknown_domain_is_flagged_and_empty_list_accepts_any() {
        let mut s = fixtures::exemplar_scenario();
        s.domain_label = "astral_projection".to_string();
        let report = validate_scenario(&s, &QualityCriteria::default());
        assert!(report
            .issues
            .iter()
            .any(|i| matches!(i, ValidationIssue::UnknownDomain { .. })));

        let open = QualityCriteria { allowed_domains: Vec::new(), ..QualityCriteria::default() };
        assert!(validate_scenario(&s, &open).passed());
    }

    #[test]
    fn priorities_are_not_part_of_section_scan() {
        let s = fixtures::exemplar_scenario();
        let report = validate_scenario(&s, &QualityCriteria::default());
        assert_eq!(report.id, s.id);
        assert!(report.passed());
        assert_eq!(s.persona.empathy_priority.get(AxisId::Proactive), Some(PriorityLevel::High));
    }
}
