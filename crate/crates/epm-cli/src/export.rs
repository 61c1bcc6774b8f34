//! Plot-data series derived from a scored store. Data only; rendering
//! charts from these files happens downstream.

use crate::score::{EpisodeScore, ReplayedEpisode};
use crate::CliError;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

pub const SERIES_FORMAT: &str = "epm-series/1";
pub const SERIES_DIR: &str = "series";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesKind {
    Trajectory3d,
    Radar,
    Heatmap,
}

impl SeriesKind {
    pub const ALL: [SeriesKind; 3] = [SeriesKind::Trajectory3d, SeriesKind::Radar, SeriesKind::Heatmap];

    pub fn name(self) -> &'static str {
        match self {
            SeriesKind::Trajectory3d => "trajectory3d",
            SeriesKind::Radar => "radar",
            SeriesKind::Heatmap => "heatmap",
        }
    }
}

impl FromStr for SeriesKind {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        SeriesKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                CliError::Config(format!(
                    "unknown series kind {s:?}; expected trajectory3d, radar, or heatmap"
                ))
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryTrace {
    pub model_id: String,
    pub scenario_id: String,
    pub r0: f64,
    /// Latent state before any window, then after each; windows + 1 rows.
    pub points: Vec<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory3dSeries {
    pub format: String,
    pub kind: String,
    pub episodes: Vec<TrajectoryTrace>,
}

pub fn build_trajectory3d(replayed: &[ReplayedEpisode]) -> Result<Trajectory3dSeries, CliError> {
    if replayed.is_empty() {
        return Err(CliError::EmptyStore);
    }
    Ok(Trajectory3dSeries {
        format: SERIES_FORMAT.to_string(),
        kind: SeriesKind::Trajectory3d.name().to_string(),
        episodes: replayed
            .iter()
            .map(|r| TrajectoryTrace {
                model_id: r.score.model_id.clone(),
                scenario_id: r.score.scenario_id.clone(),
                r0: r.score.r0,
                points: r.points.clone(),
            })
            .collect(),
    })
}

/// Axis order matches `IndexBundle::as_array`.
pub const RADAR_AXES: [&str; 9] =
    ["rdi", "etot", "snet", "rho", "sproj", "tau", "rpos", "align", "pen"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadarGroup {
    pub model_id: String,
    pub mechanism_label: String,
    pub episodes: usize,
    pub values: [f64; 9],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadarSeries {
    pub format: String,
    pub kind: String,
    pub axes: Vec<String>,
    pub groups: Vec<RadarGroup>,
}

pub fn build_radar(episodes: &[EpisodeScore]) -> Result<RadarSeries, CliError> {
    if episodes.is_empty() {
        return Err(CliError::EmptyStore);
    }
    let mut groups: BTreeMap<(&str, &str), Vec<&EpisodeScore>> = BTreeMap::new();
    for ep in episodes {
        groups
            .entry((&ep.model_id, &ep.mechanism_label))
            .or_default()
            .push(ep);
    }
    Ok(RadarSeries {
        format: SERIES_FORMAT.to_string(),
        kind: SeriesKind::Radar.name().to_string(),
        axes: RADAR_AXES.iter().map(|a| a.to_string()).collect(),
        groups: groups
            .into_iter()
            .map(|((model_id, mechanism_label), eps)| {
                let mut values = [0.0f64; 9];
                for ep in &eps {
                    for (v, idx) in values.iter_mut().zip(ep.indices.as_array()) {
                        *v += idx;
                    }
                }
                for v in &mut values {
                    *v /= eps.len() as f64;
                }
                RadarGroup {
                    model_id: model_id.to_string(),
                    mechanism_label: mechanism_label.to_string(),
                    episodes: eps.len(),
                    values,
                }
            })
            .collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatmapSeries {
    pub format: String,
    pub kind: String,
    pub models: Vec<String>,
    pub scenarios: Vec<String>,
    /// Composite score per cell, row per model, column per scenario;
    /// a hole marks a pair with no verified episode.
    pub cells: Vec<Vec<Option<f64>>>,
}

pub fn build_heatmap(episodes: &[EpisodeScore]) -> Result<HeatmapSeries, CliError> {
    if episodes.is_empty() {
        return Err(CliError::EmptyStore);
    }
    let mut by_pair: BTreeMap<&str, BTreeMap<&str, f64>> = BTreeMap::new();
    let mut scenario_ids: std::collections::BTreeSet<&str> = std::collections::BTreeSet::new();
    for ep in episodes {
        scenario_ids.insert(&ep.scenario_id);
        by_pair
            .entry(&ep.model_id)
            .or_default()
            .insert(&ep.scenario_id, ep.indices.epm_index);
    }
    let scenarios: Vec<String> = scenario_ids.iter().map(|s| s.to_string()).collect();
    let mut models = Vec::new();
    let mut cells = Vec::new();
    for (model, row) in &by_pair {
        models.push(model.to_string());
        cells.push(scenario_ids.iter().map(|s| row.get(*s).copied()).collect());
    }
    Ok(HeatmapSeries {
        format: SERIES_FORMAT.to_string(),
        kind: SeriesKind::Heatmap.name().to_string(),
        models,
        scenarios,
        cells,
    })
}

/// Writes one series file under `series/` and returns its path.
pub fn write_series<S: Serialize>(
    root: &Path,
    kind: SeriesKind,
    series: &S,
) -> Result<PathBuf, CliError> {
    let dir = root.join(SERIES_DIR);
    std::fs::create_dir_all(&dir)
        .map_err(|e| CliError::io(format!("creating {}", dir.display()), e))?;
    let path = dir.join(format!("{}.json", kind.name()));
    let mut json = serde_json::to_string_pretty(series)?;
    json.push('\n');
    std::fs::write(&path, json)
        .map_err(|e| CliError::io(format!("writing {}", path.display()), e))?;
    Ok(path)
}
