//! Corpus layout on disk: one scenario per JSON file plus a manifest that
//! carries ids, labels, and bands for quick listing.

use crate::scenario::{DifficultyBand, Mechanism, PersonaType, Scenario};
use crate::ScenarioError;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

pub const MANIFEST_FORMAT: &str = "epm-corpus/1";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    pub file: String,
    pub domain: String,
    pub mechanism: Mechanism,
    pub persona_type: PersonaType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub band: Option<DifficultyBand>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub format: String,
    pub entries: Vec<ManifestEntry>,
}

impl CorpusManifest {
    pub fn for_scenarios(scenarios: &[Scenario]) -> Self {
        let entries = scenarios
            .iter()
            .map(|s| ManifestEntry {
                id: s.id.clone(),
                file: format!("{}.json", s.id),
                domain: s.domain_label.clone(),
                mechanism: s.mechanism_label,
                persona_type: s.persona_type,
                band: s.difficulty_band,
            })
            .collect();
        CorpusManifest { format: MANIFEST_FORMAT.to_string(), entries }
    }
}

fn io_err(path: &Path, source: std::io::Error) -> ScenarioError {
    ScenarioError::Io { path: path.to_path_buf(), source }
}

fn parse_err(path: &Path, source: serde_json::Error) -> ScenarioError {
    ScenarioError::Parse { path: path.to_path_buf(), source }
}

pub fn save_scenario(path: &Path, scenario: &Scenario) -> Result<(), ScenarioError> {
    let json = serde_json::to_string_pretty(scenario).map_err(|e| parse_err(path, e))?;
    fs::write(path, json + "\n").map_err(|e| io_err(path, e))
}

pub fn load_scenario(path: &Path) -> Result<Scenario, ScenarioError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let scenario: Scenario = serde_json::from_str(&text).map_err(|e| parse_err(path, e))?;
    scenario.check_format()?;
    Ok(scenario)
}

/// Write one file per scenario plus the manifest. Ids must be unique since
/// they name the files.
pub fn save_corpus(dir: &Path, scenarios: &[Scenario]) -> Result<PathBuf, ScenarioError> {
    let mut seen = BTreeSet::new();
    for s in scenarios {
        if !seen.insert(s.id.as_str()) {
            return Err(ScenarioError::DuplicateId(s.id.clone()));
        }
    }
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    for s in scenarios {
        save_scenario(&dir.join(format!("{}.json", s.id)), s)?;
    }
    let manifest = CorpusManifest::for_scenarios(scenarios);
    let manifest_path = dir.join(MANIFEST_FILE);
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| parse_err(&manifest_path, e))?;
    fs::write(&manifest_path, json + "\n").map_err(|e| io_err(&manifest_path, e))?;
    Ok(manifest_path)
}

/// Load every scenario listed in the directory's manifest, in manifest
/// order.
pub fn load_corpus(dir: &Path) -> Result<Vec<Scenario>, ScenarioError> {
    let manifest_path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&manifest_path).map_err(|e| io_err(&manifest_path, e))?;
    let manifest: CorpusManifest =
        serde_json::from_str(&text).map_err(|e| parse_err(&manifest_path, e))?;
    if manifest.format != MANIFEST_FORMAT {
        return Err(ScenarioError::UnsupportedFormat {
            found: manifest.format,
            expected: MANIFEST_FORMAT,
        });
    }
    let mut scenarios = Vec::with_capacity(manifest.entries.len());
    let mut seen = BTreeSet::new();
    for entry in &manifest.entries {
        if !seen.insert(entry.id.as_str()) {
            return Err(ScenarioError::DuplicateId(entry.id.clone()));
        }
        scenarios.push(load_scenario(&dir.join(&entry.file))?);
    }
    Ok(scenarios)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn corpus_round_trips_through_a_directory() {
        let dir = tempfile::tempdir().unwrap();
        let scenarios =
            vec![fixtures::exemplar_scenario(), fixtures::scenario_with_levels("alt", [1; 9])];
        save_corpus(dir.path(), &scenarios).unwrap();
        let loaded = load_corpus(dir.path()).unwrap();
        assert_eq!(loaded, scenarios);
    }

    #[test]
    fn duplicate_ids_refuse_to_save() {
        let dir = tempfile::tempdir().unwrap();
        let s = fixtures::exemplar_scenario();
        let err = save_corpus(dir.path(), &[s.clone(), s]).unwrap_err();
        assert!(matches!(err, ScenarioError::DuplicateId(_)));
    }

    #[test]
    fn foreign_format_tag_is_rejected_on_load() {
        let dir = tempfile::tempdir().unwrap();
        let mut s = fixtures::exemplar_scenario();
        s.format = "someone-elses/9".to_string();
        let path = dir.path().join("x.json");
        fs::write(&path, serde_json::to_string(&s).unwrap()).unwrap();
        let err = load_scenario(&path).unwrap_err();
        assert!(matches!(err, ScenarioError::UnsupportedFormat { .. }));
    }
}
