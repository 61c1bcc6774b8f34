//! Runs the full model-by-scenario grid. The manifest is written first
//! as the statement of intent; each episode then streams to its own log,
//! so any interruption leaves a store where every intended episode is
//! either fully logged, flagged aborted, or visibly missing.
//!
//! Episode seeds derive from the run seed and both ids, which makes
//! every episode reproducible in isolation and the whole store
//! byte-identical across reruns.

use crate::config::{build_model, build_support, RunConfig};
use crate::store::{write_manifest, EpisodeLogger, EpisodeRef, MetaSeed, StoreManifest, STORE_FORMAT};
use crate::CliError;
use epm_orchestrator::run_episode_observed;
use epm_scenario::{load_corpus, Scenario};
use rayon::prelude::*;
use serde::Serialize;
use std::path::Path;

/// FNV-1a over the run seed and both ids, with a separator so id
/// boundaries cannot alias.
pub fn derive_seed(run_seed: u64, model_id: &str, scenario_id: &str) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut hash = OFFSET;
    let mut eat = |bytes: &[u8]| {
        for &b in bytes {
            hash = (hash ^ u64::from(b)).wrapping_mul(PRIME);
        }
    };
    eat(&run_seed.to_le_bytes());
    eat(model_id.as_bytes());
    eat(&[0x1f]);
    eat(scenario_id.as_bytes());
    hash
}

#[derive(Debug, Clone, Serialize)]
pub struct AbortedEpisode {
    pub model_id: String,
    pub scenario_id: String,
    pub error: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub episodes: usize,
    pub completed: usize,
    pub aborted: Vec<AbortedEpisode>,
}

fn episode_refs(cfg: &RunConfig, corpus: &[Scenario]) -> Vec<EpisodeRef> {
    cfg.models
        .iter()
        .flat_map(|model| {
            corpus.iter().map(|scenario| EpisodeRef {
                model_id: model.id.clone(),
                scenario_id: scenario.id.clone(),
                path: format!("episodes/{}/{}.jsonl", model.id, scenario.id),
                seed: derive_seed(cfg.episode.seed, &model.id, &scenario.id),
            })
        })
        .collect()
}

fn wall_clock_ms() -> u128 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0)
}

/// One episode end to end: fresh backends, streamed log, flagged abort
/// on a backend failure. Only an unwritable log is a hard error.
fn run_one(
    root: &Path,
    cfg: &RunConfig,
    scenario: &Scenario,
    episode: &EpisodeRef,
) -> Result<Option<AbortedEpisode>, CliError> {
    let model_spec = cfg
        .models
        .iter()
        .find(|m| m.id == episode.model_id)
        .expect("episode refs come from cfg.models");
    let mut logger = EpisodeLogger::create(
        &StoreManifest::episode_path(root, episode),
        MetaSeed {
            model_id: episode.model_id.clone(),
            scenario_id: episode.scenario_id.clone(),
            seed: episode.seed,
            t_max: cfg.episode.t_max,
            k: cfg.episode.k,
            domain_label: scenario.domain_label.clone(),
            mechanism_label: scenario.mechanism_label.label(),
        },
    )?;

    let backends = build_support(&cfg.backends)?;
    let mut model = build_model(&model_spec.backend, episode.seed)?;
    let mut episode_cfg = cfg.episode.clone();
    episode_cfg.seed = episode.seed;

    let outcome = run_episode_observed(
        scenario.clone(),
        backends,
        model.as_mut(),
        episode_cfg,
        &mut logger,
    );
    logger.finish()?;
    Ok(match outcome {
        Ok(_) => None,
        Err(e) => Some(AbortedEpisode {
            model_id: episode.model_id.clone(),
            scenario_id: episode.scenario_id.clone(),
            error: e.to_string(),
        }),
    })
}

/// Executes the configured grid into `cfg.store`. Episodes run
/// concurrently up to `cfg.episode.parallelism`; every log is owned by
/// exactly one worker, so parallelism never changes file contents.
pub fn run_benchmark(cfg: &RunConfig) -> Result<RunReport, CliError> {
    cfg.validate()?;
    let corpus = load_corpus(&cfg.corpus)?;
    if corpus.is_empty() {
        return Err(CliError::Config(format!(
            "corpus at {} holds no scenarios",
            cfg.corpus.display()
        )));
    }

    let episodes = episode_refs(cfg, &corpus);
    let manifest = StoreManifest {
        format: STORE_FORMAT.to_string(),
        config: cfg.echo(),
        scenario_ids: corpus.iter().map(|s| s.id.clone()).collect(),
        episodes: episodes.clone(),
        started_at_epoch_ms: cfg.record_wall_clock.then(wall_clock_ms),
    };
    let root = cfg.store.as_path();
    write_manifest(root, &manifest)?;

    let by_id: std::collections::BTreeMap<&str, &Scenario> =
        corpus.iter().map(|s| (s.id.as_str(), s)).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.episode.parallelism as usize)
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    let outcomes: Result<Vec<Option<AbortedEpisode>>, CliError> = pool.install(|| {
        episodes
            .par_iter()
            .map(|episode| {
                let scenario = by_id[episode.scenario_id.as_str()];
                run_one(root, cfg, scenario, episode)
            })
            .collect()
    });

    let aborted: Vec<AbortedEpisode> = outcomes?.into_iter().flatten().collect();
    Ok(RunReport {
        episodes: episodes.len(),
        completed: episodes.len() - aborted.len(),
        aborted,
    })
}
