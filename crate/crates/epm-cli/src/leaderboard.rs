//! Aggregates verified episode scores into one row per model and
//! renders the table as JSON, CSV, and plain text.

use crate::score::ScoresFile;
use crate::CliError;
use epm_core::{IndexBundle, TerminationType};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

pub const LEADERBOARD_FORMAT: &str = "epm-leaderboard/1";
pub const LEADERBOARD_BASE: &str = "aggregates/leaderboard";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LeaderboardRow {
    pub model_id: String,
    pub episodes: usize,
    pub success: usize,
    pub epm_failure: usize,
    pub director_stop: usize,
    pub max_turns: usize,
    /// Dataset score: dimensions and composite rebuilt from the nine
    /// per-model index means, not averaged per-episode composites.
    pub indices: IndexBundle,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Leaderboard {
    pub format: String,
    pub rows: Vec<LeaderboardRow>,
}

/// Collapses scores to model rows. A store with unverifiable episodes
/// only aggregates when the caller opts in, so a default report never
/// silently ranks models on partial evidence.
pub fn build_leaderboard(scores: &ScoresFile, allow_partial: bool) -> Result<Leaderboard, CliError> {
    if !scores.incomplete.is_empty() && !allow_partial {
        return Err(CliError::PartialStore {
            count: scores.incomplete.len(),
        });
    }
    if scores.episodes.is_empty() {
        return Err(CliError::EmptyStore);
    }

    let mut groups: BTreeMap<&str, Vec<&crate::score::EpisodeScore>> = BTreeMap::new();
    for ep in &scores.episodes {
        groups.entry(&ep.model_id).or_default().push(ep);
    }

    let mut rows: Vec<LeaderboardRow> = groups
        .into_iter()
        .map(|(model_id, eps)| {
            let mut tally = [0usize; 4];
            let mut sums = [0.0f64; 9];
            for ep in &eps {
                let slot = match ep.termination {
                    TerminationType::Success => 0,
                    TerminationType::EpmFailure => 1,
                    TerminationType::DirectorStop => 2,
                    TerminationType::MaxTurns => 3,
                };
                tally[slot] += 1;
                for (sum, idx) in sums.iter_mut().zip(ep.indices.as_array()) {
                    *sum += idx;
                }
            }
            let n = eps.len() as f64;
            let m: Vec<f64> = sums.iter().map(|s| s / n).collect();
            LeaderboardRow {
                model_id: model_id.to_string(),
                episodes: eps.len(),
                success: tally[0],
                epm_failure: tally[1],
                director_stop: tally[2],
                max_turns: tally[3],
                indices: IndexBundle::from_indices(
                    m[0], m[1], m[2], m[3], m[4], m[5], m[6], m[7], m[8],
                ),
            }
        })
        .collect();
    rows.sort_by(|a, b| {
        b.indices
            .epm_index
            .total_cmp(&a.indices.epm_index)
            .then_with(|| a.model_id.cmp(&b.model_id))
    });
    Ok(Leaderboard {
        format: LEADERBOARD_FORMAT.to_string(),
        rows,
    })
}

const CSV_HEADER: &str = "model_id,episodes,success,epm_failure,director_stop,max_turns,\
idx_rdi,idx_etot,idx_snet,idx_rho,idx_sproj,idx_tau,idx_rpos,idx_align,idx_pen,\
outcome,efficiency,stability,epm_index";

pub fn render_csv(board: &Leaderboard) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in &board.rows {
        let i = &row.indices;
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            row.model_id,
            row.episodes,
            row.success,
            row.epm_failure,
            row.director_stop,
            row.max_turns,
            i.idx_rdi,
            i.idx_etot,
            i.idx_snet,
            i.idx_rho,
            i.idx_sproj,
            i.idx_tau,
            i.idx_rpos,
            i.idx_align,
            i.idx_pen,
            i.outcome,
            i.efficiency,
            i.stability,
            i.epm_index,
        ));
    }
    out
}

pub fn render_text(board: &Leaderboard) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<4} {:<24} {:>8} {:>4} {:>4} {:>4} {:>4} {:>8} {:>8} {:>8} {:>8}\n",
        "rank", "model", "episodes", "ok", "fail", "stop", "max", "outcome", "effcy", "stabil", "index",
    ));
    for (rank, row) in board.rows.iter().enumerate() {
        let i = &row.indices;
        out.push_str(&format!(
            "{:<4} {:<24} {:>8} {:>4} {:>4} {:>4} {:>4} {:>8.1} {:>8.1} {:>8.1} {:>8.1}\n",
            rank + 1,
            row.model_id,
            row.episodes,
            row.success,
            row.epm_failure,
            row.director_stop,
            row.max_turns,
            i.outcome,
            i.efficiency,
            i.stability,
            i.epm_index,
        ));
    }
    out
}

/// Writes leaderboard.json, .csv, and .txt under the store root and
/// returns their paths in that order.
pub fn write_leaderboard(root: &Path, board: &Leaderboard) -> Result<[PathBuf; 3], CliError> {
    let base = root.join(LEADERBOARD_BASE);
    if let Some(dir) = base.parent() {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::io(format!("creating {}", dir.display()), e))?;
    }
    let mut json = serde_json::to_string_pretty(board)?;
    json.push('\n');
    let renders = [("json", json), ("csv", render_csv(board)), ("txt", render_text(board))];
    let mut paths = [base.clone(), base.clone(), base];
    for (path, (ext, body)) in paths.iter_mut().zip(renders) {
        path.set_extension(ext);
        std::fs::write(&*path, body)
            .map_err(|e| CliError::io(format!("writing {}", path.display()), e))?;
    }
    Ok(paths)
}
