//! Log replay and aggregate scoring. Every complete episode is replayed
//! from its window ratings alone and the replay is checked against the
//! values the run logged, so a hand-edited log fails loudly instead of
//! aggregating quietly. Scoring the same store twice writes identical
//! bytes.

use crate::store::{read_episode_log, read_manifest, EpisodeRecord, EpisodeRef, StoreManifest};
use crate::CliError;
use epm_core::{
    index_bundle, raw_metrics, IndexBundle, MetricBundle, PsychState, TerminationType,
    TrajectoryState,
};
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::Path;

pub const SCORES_FORMAT: &str = "epm-scores/1";
pub const SCORES_FILE: &str = "aggregates/scores.json";

/// Tolerance for logged-versus-replayed numeric agreement.
const REPLAY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeScore {
    pub model_id: String,
    pub scenario_id: String,
    pub seed: u64,
    pub r0: f64,
    pub domain_label: String,
    pub mechanism_label: String,
    pub termination: TerminationType,
    pub turns: u32,
    pub windows: u32,
    pub metrics: MetricBundle,
    pub indices: IndexBundle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncompleteEpisode {
    pub model_id: String,
    pub scenario_id: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoresFile {
    pub format: String,
    pub episodes: Vec<EpisodeScore>,
    pub incomplete: Vec<IncompleteEpisode>,
}

/// A complete episode replayed from its log: the score plus the latent
/// path the plot exports need.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplayedEpisode {
    pub score: EpisodeScore,
    /// Latent state after window 0..=n; always windows + 1 points.
    pub points: Vec<[f64; 3]>,
}

pub enum ReplayOutcome {
    Complete(Box<ReplayedEpisode>),
    Incomplete(IncompleteEpisode),
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= REPLAY_TOL
}

fn check_metrics(stored: &MetricBundle, replayed: &MetricBundle) -> Result<(), String> {
    if stored.status != replayed.status {
        return Err(format!(
            "stored termination {:?} disagrees with replay {:?}",
            stored.status, replayed.status
        ));
    }
    let pairs = [
        ("rdi_raw", stored.rdi_raw, replayed.rdi_raw),
        ("e_total", stored.e_total, replayed.e_total),
        ("e_surplus", stored.e_surplus, replayed.e_surplus),
        ("s_net", stored.s_net, replayed.s_net),
        ("rho", stored.rho, replayed.rho),
        ("s_proj", stored.s_proj, replayed.s_proj),
        ("tortuosity_raw", stored.tortuosity_raw, replayed.tortuosity_raw),
        ("mean_cos", stored.mean_cos, replayed.mean_cos),
        ("r_pos", stored.r_pos, replayed.r_pos),
        ("r_pen", stored.r_pen, replayed.r_pen),
    ];
    for (name, s, r) in pairs {
        if !close(s, r) {
            return Err(format!("stored {name} {s} disagrees with replay {r}"));
        }
    }
    Ok(())
}

fn check_indices(stored: &IndexBundle, replayed: &IndexBundle) -> Result<(), String> {
    let spairs = stored.as_array();
    let rpairs = replayed.as_array();
    for (i, (s, r)) in spairs.iter().zip(rpairs.iter()).enumerate() {
        if !close(*s, *r) {
            return Err(format!("stored index {i} {s} disagrees with replay {r}"));
        }
    }
    if !close(stored.epm_index, replayed.epm_index) {
        return Err(format!(
            "stored composite {} disagrees with replay {}",
            stored.epm_index, replayed.epm_index
        ));
    }
    Ok(())
}

/// Replays one episode log. Corruption is an error; a missing or
/// truncated log is a flagged incomplete episode.
pub fn replay_episode(root: &Path, episode: &EpisodeRef) -> Result<ReplayOutcome, CliError> {
    let incomplete = |reason: String| {
        Ok(ReplayOutcome::Incomplete(IncompleteEpisode {
            model_id: episode.model_id.clone(),
            scenario_id: episode.scenario_id.clone(),
            reason,
        }))
    };
    let corrupt = |problem: String| CliError::CorruptedEpisode {
        model_id: episode.model_id.clone(),
        scenario_id: episode.scenario_id.clone(),
        problem,
    };

    let path = StoreManifest::episode_path(root, episode);
    if !path.exists() {
        return incomplete("log file missing".to_string());
    }
    let records = read_episode_log(&path, episode)?;

    // A flagged abort short-circuits: whatever precedes it is a partial
    // record, not a scoreable episode.
    if let Some(EpisodeRecord::Abort { error }) =
        records.iter().find(|r| matches!(r, EpisodeRecord::Abort { .. }))
    {
        return incomplete(format!("aborted: {error}"));
    }

    let (seed, r0, initial, domain_label, mechanism_label) = match &records[0] {
        EpisodeRecord::Meta { model_id, scenario_id, seed, r0, initial, domain_label, mechanism_label, .. } => {
            if model_id != &episode.model_id || scenario_id != &episode.scenario_id {
                return Err(corrupt(format!(
                    "log claims to be {model_id}/{scenario_id}"
                )));
            }
            (*seed, *r0, *initial, domain_label.clone(), mechanism_label.clone())
        }
        _ => return Err(corrupt("first record is not the meta record".to_string())),
    };
    if seed != episode.seed {
        return Err(corrupt(format!(
            "log seed {seed} disagrees with manifest seed {}",
            episode.seed
        )));
    }

    let state = PsychState::new(initial[0], initial[1], initial[2])
        .map_err(|e| corrupt(format!("meta initial state: {e}")))?;
    let mut traj = TrajectoryState::new(state).map_err(|e| corrupt(format!("meta r0: {e}")))?;
    if !close(traj.r0(), r0) {
        return Err(corrupt(format!("meta r0 {r0} disagrees with initial state {}", traj.r0())));
    }

    let mut points = vec![initial];
    let mut penalties = Vec::new();
    let mut turns = 0u32;
    let mut end: Option<(TerminationType, MetricBundle, IndexBundle)> = None;

    for record in &records[1..] {
        if end.is_some() {
            return Err(corrupt("records continue past the end record".to_string()));
        }
        match record {
            EpisodeRecord::Meta { .. } => {
                return Err(corrupt("second meta record".to_string()));
            }
            EpisodeRecord::Turn { .. } => turns += 1,
            EpisodeRecord::Window { window } => {
                let bad_window = |problem: String| CliError::CorruptedWindow {
                    model_id: episode.model_id.clone(),
                    scenario_id: episode.scenario_id.clone(),
                    window: window.window_index,
                    problem,
                };
                let expected_index = traj.window_count() as u32 + 1;
                if window.window_index != expected_index {
                    return Err(bad_window(format!("expected window {expected_index} next")));
                }
                let action = window.rating.action_vector();
                if action != window.action {
                    return Err(bad_window(format!(
                        "logged action {:?} disagrees with the rating's {:?}",
                        window.action.as_array(),
                        action.as_array()
                    )));
                }
                let penalty = window.rating.penalty_intensity();
                if !close(penalty, window.penalty_intensity) {
                    return Err(bad_window(format!(
                        "logged penalty {} disagrees with the rating's {penalty}",
                        window.penalty_intensity
                    )));
                }
                let outcome = traj.apply_window(action);
                if !close(outcome.work.delta_e, window.delta_e) {
                    return Err(bad_window(format!(
                        "logged work {} disagrees with replay {}",
                        window.delta_e, outcome.work.delta_e
                    )));
                }
                penalties.push(penalty);
                points.push(traj.current().as_array());
            }
            EpisodeRecord::Director { .. } => {}
            EpisodeRecord::End { termination, metrics, indices } => {
                end = Some((*termination, metrics.clone(), indices.clone()));
            }
            EpisodeRecord::Abort { .. } => unreachable!("aborts short-circuit above"),
        }
    }

    let Some((termination, stored_metrics, stored_indices)) = end else {
        return incomplete("truncated: no end record".to_string());
    };

    let metrics = raw_metrics(&traj, termination, &penalties)
        .map_err(|e| corrupt(format!("replayed metrics: {e}")))?;
    let indices = index_bundle(&metrics, traj.r0())
        .map_err(|e| corrupt(format!("replayed indices: {e}")))?;
    check_metrics(&stored_metrics, &metrics).map_err(&corrupt)?;
    check_indices(&stored_indices, &indices).map_err(&corrupt)?;

    Ok(ReplayOutcome::Complete(Box::new(ReplayedEpisode {
        score: EpisodeScore {
            model_id: episode.model_id.clone(),
            scenario_id: episode.scenario_id.clone(),
            seed,
            r0: traj.r0(),
            domain_label,
            mechanism_label,
            termination,
            turns,
            windows: traj.window_count() as u32,
            metrics,
            indices,
        },
        points,
    })))
}

/// Replays every episode the manifest names, in manifest order.
pub fn replay_store(
    root: &Path,
) -> Result<(StoreManifest, Vec<ReplayedEpisode>, Vec<IncompleteEpisode>), CliError> {
    let manifest = read_manifest(root)?;
    let mut complete = Vec::new();
    let mut incomplete = Vec::new();
    for episode in &manifest.episodes {
        match replay_episode(root, episode)? {
            ReplayOutcome::Complete(replayed) => complete.push(*replayed),
            ReplayOutcome::Incomplete(entry) => incomplete.push(entry),
        }
    }
    Ok((manifest, complete, incomplete))
}

/// Scores the whole store and writes the aggregate scores file.
pub fn score_store(root: &Path) -> Result<ScoresFile, CliError> {
    let (_, complete, incomplete) = replay_store(root)?;
    let mut episodes: Vec<EpisodeScore> = complete.into_iter().map(|r| r.score).collect();
    episodes.sort_by(|a, b| {
        (a.model_id.as_str(), a.scenario_id.as_str())
            .cmp(&(b.model_id.as_str(), b.scenario_id.as_str()))
    });
    let scores =
        ScoresFile { format: SCORES_FORMAT.to_string(), episodes, incomplete };
    write_scores(root, &scores)?;
    Ok(scores)
}

pub fn write_scores(root: &Path, scores: &ScoresFile) -> Result<(), CliError> {
    let path = root.join(SCORES_FILE);
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)
            .map_err(|e| CliError::io(format!("creating {}", dir.display()), e))?;
    }
    let mut json = serde_json::to_string_pretty(scores)?;
    json.push('\n');
    fs::write(&path, json).map_err(|e| CliError::io(format!("writing {}", path.display()), e))
}

pub fn read_scores(root: &Path) -> Result<ScoresFile, CliError> {
    let path = root.join(SCORES_FILE);
    let text = match fs::read_to_string(&path) {
        Ok(text) => text,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return Err(CliError::NoScores { root: root.to_path_buf() })
        }
        Err(e) => return Err(CliError::io(format!("reading {}", path.display()), e)),
    };
    let scores: ScoresFile = serde_json::from_str(&text)?;
    if scores.format != SCORES_FORMAT {
        return Err(CliError::UnsupportedFormat { found: scores.format, expected: SCORES_FORMAT });
    }
    Ok(scores)
}
