//! Append-only run store. One manifest names every episode the run
//! intends; each episode is a line-delimited log flushed record by
//! record, so a crash leaves everything already written intact and the
//! reader can tell a finished episode (End record) from a flagged abort
//! (Abort record) or a truncated file (neither).
//!
//! Layout under the store root:
//!   manifest.json
//!   episodes/<model_id>/<scenario_id>.jsonl
//!   aggregates/scores.json            (written by score)
//!   aggregates/leaderboard.{json,csv,txt} and series/*  (written by report)

use crate::config::ConfigEcho;
use crate::CliError;
use epm_agents::DialoguePair;
use epm_core::{IndexBundle, MetricBundle, TerminationType};
use epm_orchestrator::{DirectorRecord, EpisodeError, EpisodeResult, EpisodeSink, StepPacket, WindowRecord};
use serde::{Deserialize, Serialize};
use std::fs::{self, File};
use std::io::{BufWriter, Write as _};
use std::path::{Path, PathBuf};

pub const STORE_FORMAT: &str = "epm-store/1";
pub const MANIFEST_FILE: &str = "manifest.json";

/// One intended episode, written before any episode runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRef {
    pub model_id: String,
    pub scenario_id: String,
    /// Store-relative log path, forward slashes.
    pub path: String,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoreManifest {
    pub format: String,
    pub config: ConfigEcho,
    pub scenario_ids: Vec<String>,
    pub episodes: Vec<EpisodeRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub started_at_epoch_ms: Option<u128>,
}

impl StoreManifest {
    pub fn episode_path(root: &Path, episode: &EpisodeRef) -> PathBuf {
        root.join(&episode.path)
    }
}

/// One line of an episode log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
pub enum EpisodeRecord {
    Meta {
        model_id: String,
        scenario_id: String,
        seed: u64,
        r0: f64,
        /// Initial latent deficit, axis order C, A, P.
        initial: [f64; 3],
        t_max: u32,
        k: u32,
        domain_label: String,
        mechanism_label: String,
    },
    Turn { pair: DialoguePair },
    Window { window: WindowRecord },
    Director { director: DirectorRecord },
    End {
        termination: TerminationType,
        metrics: MetricBundle,
        indices: IndexBundle,
    },
    /// The episode aborted after the records above; kept so partial logs
    /// are flagged, never silently dropped.
    Abort { error: String },
}

pub fn write_manifest(root: &Path, manifest: &StoreManifest) -> Result<(), CliError> {
    fs::create_dir_all(root)
        .map_err(|e| CliError::io(format!("creating store {}", root.display()), e))?;
    let path = root.join(MANIFEST_FILE);
    let mut json = serde_json::to_string_pretty(manifest)?;
    json.push('\n');
    fs::write(&path, json).map_err(|e| CliError::io(format!("writing {}", path.display()), e))
}

pub fn read_manifest(root: &Path) -> Result<StoreManifest, CliError> {
    let path = root.join(MANIFEST_FILE);
    let text = match fs::read_to_string(&path) {
        Ok(text) => text,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return Err(CliError::NoManifest { root: root.to_path_buf() })
        }
        Err(e) => return Err(CliError::io(format!("reading {}", path.display()), e)),
    };
    let manifest: StoreManifest = serde_json::from_str(&text)?;
    if manifest.format != STORE_FORMAT {
        return Err(CliError::UnsupportedFormat { found: manifest.format, expected: STORE_FORMAT });
    }
    Ok(manifest)
}

/// Everything the meta record knows before the episode starts; the
/// initial state and r0 arrive with the reset packet.
#[derive(Debug, Clone)]
pub struct MetaSeed {
    pub model_id: String,
    pub scenario_id: String,
    pub seed: u64,
    pub t_max: u32,
    pub k: u32,
    pub domain_label: String,
    pub mechanism_label: String,
}

impl MetaSeed {
    fn into_record(self, r0: f64, initial: [f64; 3]) -> EpisodeRecord {
        EpisodeRecord::Meta {
            model_id: self.model_id,
            scenario_id: self.scenario_id,
            seed: self.seed,
            r0,
            initial,
            t_max: self.t_max,
            k: self.k,
            domain_label: self.domain_label,
            mechanism_label: self.mechanism_label,
        }
    }
}

/// Streams one episode's records to its log file as the episode runs.
/// Sink hooks cannot return errors, so the first write failure is
/// stashed and surfaced by [`EpisodeLogger::finish`].
pub struct EpisodeLogger {
    writer: BufWriter<File>,
    path: PathBuf,
    meta: Option<MetaSeed>,
    io_error: Option<std::io::Error>,
}

impl EpisodeLogger {
    /// Opens the log; the meta record is written once the reset packet
    /// supplies the initial state.
    pub fn create(path: &Path, meta: MetaSeed) -> Result<Self, CliError> {
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)
                .map_err(|e| CliError::io(format!("creating {}", dir.display()), e))?;
        }
        let file = File::create(path)
            .map_err(|e| CliError::io(format!("creating {}", path.display()), e))?;
        Ok(EpisodeLogger {
            writer: BufWriter::new(file),
            path: path.to_path_buf(),
            meta: Some(meta),
            io_error: None,
        })
    }

    fn append(&mut self, record: &EpisodeRecord) {
        if self.io_error.is_some() {
            return;
        }
        let result = serde_json::to_string(record)
            .map_err(std::io::Error::other)
            .and_then(|line| {
                self.writer.write_all(line.as_bytes())?;
                self.writer.write_all(b"\n")?;
                self.writer.flush()
            });
        if let Err(e) = result {
            self.io_error = Some(e);
        }
    }

    /// Surfaces any write failure; call after the episode settles.
    pub fn finish(mut self) -> Result<(), CliError> {
        if self.io_error.is_none() {
            if let Err(e) = self.writer.flush() {
                self.io_error = Some(e);
            }
        }
        match self.io_error {
            None => Ok(()),
            Some(e) => Err(CliError::io(format!("writing {}", self.path.display()), e)),
        }
    }
}

impl EpisodeSink for EpisodeLogger {
    fn on_packet(&mut self, packet: &StepPacket) {
        if let Some(meta) = self.meta.take() {
            let record = meta.into_record(packet.state.r0, packet.state.deficit);
            self.append(&record);
        }
        if let Some(pair) = &packet.info.pair {
            self.append(&EpisodeRecord::Turn { pair: pair.clone() });
        }
        if let Some(window) = &packet.info.window {
            self.append(&EpisodeRecord::Window { window: window.clone() });
        }
        if let Some(director) = &packet.info.director {
            self.append(&EpisodeRecord::Director { director: director.clone() });
        }
    }

    fn on_finished(&mut self, result: &EpisodeResult) {
        self.append(&EpisodeRecord::End {
            termination: result.termination,
            metrics: result.metrics.clone(),
            indices: result.indices.clone(),
        });
    }

    fn on_aborted(&mut self, error: &EpisodeError) {
        // Aborting before reset leaves no state to put in a meta record;
        // the abort line alone flags the episode.
        self.meta = None;
        self.append(&EpisodeRecord::Abort { error: error.to_string() });
    }
}

/// Reads one episode log into records, naming the episode on any
/// malformed line and the window on a malformed window record.
pub fn read_episode_log(
    path: &Path,
    episode: &EpisodeRef,
) -> Result<Vec<EpisodeRecord>, CliError> {
    let corrupt = |problem: String| CliError::CorruptedEpisode {
        model_id: episode.model_id.clone(),
        scenario_id: episode.scenario_id.clone(),
        problem,
    };
    let text = fs::read_to_string(path)
        .map_err(|e| corrupt(format!("unreadable log {}: {e}", path.display())))?;
    let mut records = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        // Two-pass parse: pull the record tag and window index out of
        // the raw value first, so a validation failure inside a window
        // rating can still name the window it struck.
        let value: serde_json::Value = serde_json::from_str(line)
            .map_err(|e| corrupt(format!("line {}: {e}", lineno + 1)))?;
        let tag = value.get("record").and_then(|t| t.as_str()).unwrap_or("?").to_string();
        match serde_json::from_value::<EpisodeRecord>(value.clone()) {
            Ok(record) => records.push(record),
            Err(e) if tag == "window" => {
                let window = value
                    .get("window")
                    .and_then(|w| w.get("window_index"))
                    .and_then(|i| i.as_u64())
                    .unwrap_or(0) as u32;
                return Err(CliError::CorruptedWindow {
                    model_id: episode.model_id.clone(),
                    scenario_id: episode.scenario_id.clone(),
                    window,
                    problem: e.to_string(),
                });
            }
            Err(e) => return Err(corrupt(format!("line {} ({tag}): {e}", lineno + 1))),
        }
    }
    if records.is_empty() {
        return Err(corrupt("empty log".to_string()));
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::RunConfig;

    fn sample_manifest() -> StoreManifest {
        StoreManifest {
            format: STORE_FORMAT.to_string(),
            config: RunConfig::default().echo(),
            scenario_ids: vec!["s-1".into()],
            episodes: vec![EpisodeRef {
                model_id: "m".into(),
                scenario_id: "s-1".into(),
                path: "episodes/m/s-1.jsonl".into(),
                seed: 7,
            }],
            started_at_epoch_ms: None,
        }
    }

    #[test]
    fn manifests_round_trip_and_reject_foreign_formats() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = sample_manifest();
        write_manifest(dir.path(), &manifest).unwrap();
        assert_eq!(read_manifest(dir.path()).unwrap(), manifest);

        let missing = dir.path().join("nowhere");
        assert!(matches!(read_manifest(&missing), Err(CliError::NoManifest { .. })));

        let mut foreign = manifest;
        foreign.format = "epm-store/9".into();
        write_manifest(dir.path(), &foreign).unwrap();
        assert!(matches!(read_manifest(dir.path()), Err(CliError::UnsupportedFormat { .. })));
    }

    #[test]
    fn malformed_window_lines_name_the_episode_and_window() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ep.jsonl");
        let episode = sample_manifest().episodes.remove(0);

        let meta = r#"{"record":"meta","model_id":"m","scenario_id":"s-1","seed":7,"r0":10.0,"initial":[-6.0,-8.0,0.0],"t_max":4,"k":1,"domain_label":"d","mechanism_label":"A/routine"}"#;
        let bad_window = r#"{"record":"window","window":{"window_index":3,"first_turn":3,"last_turn":3,"rating":{"window_index":3,"channels":[]},"action":[0.0,0.0,0.0],"delta_e":0.0,"penalty_intensity":0.0}}"#;
        std::fs::write(&path, format!("{meta}\n{bad_window}\n")).unwrap();

        match read_episode_log(&path, &episode) {
            Err(CliError::CorruptedWindow { model_id, scenario_id, window, .. }) => {
                assert_eq!(model_id, "m");
                assert_eq!(scenario_id, "s-1");
                assert_eq!(window, 3);
            }
            other => panic!("expected a corrupted-window error, got {other:?}"),
        }

        std::fs::write(&path, format!("{meta}\nnot json\n")).unwrap();
        match read_episode_log(&path, &episode) {
            Err(CliError::CorruptedEpisode { problem, .. }) => {
                assert!(problem.contains("line 2"), "problem was: {problem}");
            }
            other => panic!("expected a corrupted-episode error, got {other:?}"),
        }
    }
}
