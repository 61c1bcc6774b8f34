//! Command-line driver for the counterfactual lab: assembles pair sets
//! from bundled fixtures, saved files, or recorded runs, scores them in
//! parallel, and packages the per-scorer statistics.

use crate::store::{read_episode_log, read_manifest, EpisodeRecord, StoreManifest};
use crate::CliError;
use epm_agents::{DialoguePair, ScriptedJudge};
use epm_lab::fixtures::{persona_flip_set, sycophancy_set};
use epm_lab::{
    persona_flip, score_pair_full, stats_report, sycophancy_replacement, LabError, PairContext,
    PairSet, PairSource, PerturbationPair, ScorerKind, StatsConfig, StatsReport,
    SycophancyVariant, PAIRS_FORMAT,
};
use epm_scenario::{load_corpus, Scenario};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::str::FromStr;

pub const PERTURB_REPORT_FORMAT: &str = "epm-perturb-report/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PerturbationKind {
    PersonaFlip,
    Sycophancy,
}

impl PerturbationKind {
    pub fn name(self) -> &'static str {
        match self {
            PerturbationKind::PersonaFlip => "persona-flip",
            PerturbationKind::Sycophancy => "sycophancy",
        }
    }
}

impl FromStr for PerturbationKind {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "persona-flip" => Ok(PerturbationKind::PersonaFlip),
            "sycophancy" => Ok(PerturbationKind::Sycophancy),
            other => Err(CliError::Config(format!(
                "unknown perturbation kind {other:?}; expected persona-flip or sycophancy"
            ))),
        }
    }
}

pub fn parse_variant(s: &str) -> Result<SycophancyVariant, CliError> {
    SycophancyVariant::ALL
        .into_iter()
        .find(|v| v.id() == s)
        .ok_or_else(|| {
            let ids: Vec<&str> = SycophancyVariant::ALL.iter().map(|v| v.id()).collect();
            CliError::Config(format!(
                "unknown sycophancy variant {s:?}; expected one of {}",
                ids.join(", ")
            ))
        })
}

/// An episode that could not yield a pair, and why. Skips are reported,
/// not fatal, unless they leave the set empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkipNote {
    pub model_id: String,
    pub scenario_id: String,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub enum PairsInput {
    Builtin(PerturbationKind),
    File(PathBuf),
    FromStore {
        store: PathBuf,
        corpus: PathBuf,
        kind: PerturbationKind,
        variants: Vec<SycophancyVariant>,
    },
}

pub struct GatheredPairs {
    pub set: PairSet,
    pub skipped: Vec<SkipNote>,
}

pub fn gather_pairs(input: &PairsInput) -> Result<GatheredPairs, CliError> {
    let gathered = match input {
        PairsInput::Builtin(PerturbationKind::PersonaFlip) => {
            GatheredPairs { set: persona_flip_set(), skipped: Vec::new() }
        }
        PairsInput::Builtin(PerturbationKind::Sycophancy) => {
            GatheredPairs { set: sycophancy_set(), skipped: Vec::new() }
        }
        PairsInput::File(path) => {
            let set = PairSet::load(path).map_err(|e| match e {
                LabError::UnsupportedFormat { found, .. } => {
                    CliError::UnsupportedFormat { found, expected: PAIRS_FORMAT }
                }
                LabError::Io(e) => CliError::io(format!("reading {}", path.display()), e),
                other => CliError::from(other),
            })?;
            GatheredPairs { set, skipped: Vec::new() }
        }
        PairsInput::FromStore { store, corpus, kind, variants } => {
            pairs_from_store(store, corpus, *kind, variants)?
        }
    };
    if gathered.set.pairs.is_empty() {
        let mut reasons: Vec<String> = gathered
            .skipped
            .iter()
            .map(|s| format!("{}/{}: {}", s.model_id, s.scenario_id, s.reason))
            .collect();
        reasons.sort();
        reasons.dedup();
        return Err(CliError::NoPairs(if reasons.is_empty() {
            "the source holds no pairs".to_string()
        } else {
            format!("every candidate episode was skipped ({})", reasons.join("; "))
        }));
    }
    Ok(gathered)
}

/// Lifts one pair per completed episode (or one per requested variant)
/// out of a recorded run: the last exchange becomes the reply under
/// test, everything before it stays shared context.
fn pairs_from_store(
    store: &Path,
    corpus_dir: &Path,
    kind: PerturbationKind,
    variants: &[SycophancyVariant],
) -> Result<GatheredPairs, CliError> {
    let manifest = read_manifest(store)?;
    let corpus = load_corpus(corpus_dir)?;
    let by_id: BTreeMap<&str, &Scenario> = corpus.iter().map(|s| (s.id.as_str(), s)).collect();
    let variants: Vec<SycophancyVariant> = if variants.is_empty() {
        SycophancyVariant::ALL.to_vec()
    } else {
        variants.to_vec()
    };

    let mut pairs = Vec::new();
    let mut skipped = Vec::new();
    for episode in &manifest.episodes {
        let note = |reason: String| SkipNote {
            model_id: episode.model_id.clone(),
            scenario_id: episode.scenario_id.clone(),
            reason,
        };
        let Some(scenario) = by_id.get(episode.scenario_id.as_str()) else {
            skipped.push(note("scenario not in the given corpus".to_string()));
            continue;
        };
        let path = StoreManifest::episode_path(store, episode);
        if !path.exists() {
            skipped.push(note("log file missing".to_string()));
            continue;
        }
        let records = read_episode_log(&path, episode)?;
        if let Some(EpisodeRecord::Abort { error }) =
            records.iter().find(|r| matches!(r, EpisodeRecord::Abort { .. }))
        {
            skipped.push(note(format!("aborted: {error}")));
            continue;
        }
        if !records.iter().any(|r| matches!(r, EpisodeRecord::End { .. })) {
            skipped.push(note("truncated: no end record".to_string()));
            continue;
        }
        let turns: Vec<&DialoguePair> = records
            .iter()
            .filter_map(|r| match r {
                EpisodeRecord::Turn { pair } => Some(pair),
                _ => None,
            })
            .collect();
        let Some((last, shared)) = turns.split_last() else {
            skipped.push(note("no dialogue recorded".to_string()));
            continue;
        };
        let context = PairContext {
            persona: scenario.persona.clone(),
            crisis_event: scenario.crisis_event.clone(),
            dialogue: shared.iter().map(|p| (*p).clone()).collect(),
            prompt: last.user.clone(),
        };
        let source = PairSource {
            model_id: episode.model_id.clone(),
            scenario_id: episode.scenario_id.clone(),
            turn: last.turn,
        };
        match kind {
            PerturbationKind::PersonaFlip => match persona_flip(scenario) {
                Ok(flipped) => {
                    let mut pair = PerturbationPair::persona_flip(
                        format!("{}/{}/flip", episode.model_id, episode.scenario_id),
                        episode.scenario_id.clone(),
                        context,
                        last.model.clone(),
                        flipped.persona,
                    )?;
                    pair.source = Some(source);
                    pairs.push(pair);
                }
                Err(e) => skipped.push(note(e.to_string())),
            },
            PerturbationKind::Sycophancy => {
                for variant in &variants {
                    let mut pair = PerturbationPair::sycophancy(
                        format!(
                            "{}/{}/{}",
                            episode.model_id,
                            episode.scenario_id,
                            variant.id()
                        ),
                        episode.scenario_id.clone(),
                        *variant,
                        context.clone(),
                        last.model.clone(),
                        sycophancy_replacement(*variant, &scenario.persona),
                    )?;
                    pair.source = Some(source.clone());
                    pairs.push(pair);
                }
            }
        }
    }
    Ok(GatheredPairs { set: PairSet::new(pairs), skipped })
}

/// Scores every pair under all three rules, each worker with its own
/// judge. Judges are deterministic text readers, so parallelism never
/// changes recorded values.
pub fn score_pairs(set: &mut PairSet, parallelism: usize) -> Result<(), CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.max(1))
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    pool.install(|| {
        set.pairs.par_iter_mut().try_for_each(|pair| {
            let mut judge = ScriptedJudge::markers();
            score_pair_full(pair, &mut judge)
        })
    })?;
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PerturbReport {
    pub format: String,
    pub pairs: usize,
    pub cases: usize,
    pub skipped: Vec<SkipNote>,
    /// One entry per scoring rule, in `ScorerKind::ALL` order.
    pub scorers: Vec<StatsReport>,
}

pub fn build_report(
    set: &PairSet,
    cfg: &StatsConfig,
    skipped: Vec<SkipNote>,
) -> Result<PerturbReport, CliError> {
    let cases: BTreeSet<&str> = set.pairs.iter().map(|p| p.case_id.as_str()).collect();
    let scorers = ScorerKind::ALL
        .iter()
        .map(|scorer| stats_report(&set.pairs, *scorer, cfg))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(PerturbReport {
        format: PERTURB_REPORT_FORMAT.to_string(),
        pairs: set.pairs.len(),
        cases: cases.len(),
        skipped,
        scorers,
    })
}
