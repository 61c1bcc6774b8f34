//! Declarative run configuration: one TOML file names the corpus, the
//! store, the episode knobs, and a backend choice per role. Flags
//! override the file, the file overrides defaults. Relative paths
//! resolve against the config file's own directory, so a config stays
//! valid no matter where the command is invoked from.
//!
//! Endpoint keys never appear here: an HTTP backend names the
//! environment variable that holds its key, nothing more.

use crate::CliError;
use epm_agents::{
    ChatClient, ChatEndpointConfig, DirectorProgram, EnvBackends, LiveDirector, LiveJudge,
    LiveTestModel, LiveUserSimulator, ModelProgram, ScriptedDirector, ScriptedJudge,
    ScriptedModel, ScriptedUser, TestModel, UserProgram,
};
use epm_core::GateConfig;
use epm_orchestrator::EpisodeConfig;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

pub const RUN_CONFIG_FORMAT: &str = "epm-run-config/1";

/// How the simulated user produces utterances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum UserSpec {
    /// Deterministic persona narration from the card and released memories.
    Narrate,
    Fixed { utterances: Vec<String> },
    Cycle { utterances: Vec<String> },
    Http { endpoint: ChatEndpointConfig },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum JudgeSpec {
    /// Counts in-text axis markers; the offline default.
    Markers,
    Http { endpoint: ChatEndpointConfig },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DirectorSpec {
    Continue,
    Reactive { patience: u32 },
    Http { endpoint: ChatEndpointConfig },
}

/// How one model under test produces replies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ModelSpec {
    /// Seeded marker emitter; the episode seed is injected per episode.
    Profile { quality: f64, volatility: f64 },
    Fixed { replies: Vec<String> },
    Cycle { replies: Vec<String> },
    Http { endpoint: ChatEndpointConfig },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelEntry {
    pub id: String,
    pub backend: ModelSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SupportBackends {
    pub user: UserSpec,
    pub judge: JudgeSpec,
    pub director: DirectorSpec,
}

impl Default for SupportBackends {
    fn default() -> Self {
        SupportBackends {
            user: UserSpec::Narrate,
            judge: JudgeSpec::Markers,
            director: DirectorSpec::Continue,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub format: String,
    pub corpus: PathBuf,
    pub store: PathBuf,
    pub episode: EpisodeConfig,
    pub backends: SupportBackends,
    pub models: Vec<ModelEntry>,
    /// Off by default: scripted runs are reproducible artifacts and a
    /// wall-clock stamp would make equal runs compare unequal.
    pub record_wall_clock: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            format: RUN_CONFIG_FORMAT.to_string(),
            corpus: PathBuf::from("assets/corpus"),
            store: PathBuf::from("out/store"),
            episode: EpisodeConfig::default(),
            backends: SupportBackends::default(),
            models: Vec::new(),
            record_wall_clock: false,
        }
    }
}

/// Flag-level overrides, applied on top of the file.
#[derive(Debug, Clone, Default)]
pub struct RunOverrides {
    pub store: Option<PathBuf>,
    pub corpus: Option<PathBuf>,
    pub seed: Option<u64>,
    pub t_max: Option<u32>,
    pub k: Option<u32>,
    pub parallelism: Option<u32>,
    /// Restrict the run to these model ids; empty keeps all.
    pub models: Vec<String>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::io(format!("reading config {}", path.display()), e))?;
        let mut cfg: RunConfig =
            toml::from_str(&text).map_err(|e| CliError::Config(e.to_string()))?;
        if cfg.format != RUN_CONFIG_FORMAT {
            return Err(CliError::UnsupportedFormat {
                found: cfg.format,
                expected: RUN_CONFIG_FORMAT,
            });
        }
        if let Some(dir) = path.parent() {
            cfg.corpus = resolve(dir, &cfg.corpus);
            cfg.store = resolve(dir, &cfg.store);
        }
        Ok(cfg)
    }

    pub fn apply(&mut self, ov: &RunOverrides) -> Result<(), CliError> {
        if let Some(store) = &ov.store {
            self.store = store.clone();
        }
        if let Some(corpus) = &ov.corpus {
            self.corpus = corpus.clone();
        }
        if let Some(seed) = ov.seed {
            self.episode.seed = seed;
        }
        if let Some(t_max) = ov.t_max {
            self.episode.t_max = t_max;
        }
        if let Some(k) = ov.k {
            self.episode.k = k;
        }
        if let Some(parallelism) = ov.parallelism {
            self.episode.parallelism = parallelism;
        }
        if !ov.models.is_empty() {
            for wanted in &ov.models {
                if !self.models.iter().any(|m| &m.id == wanted) {
                    return Err(CliError::Config(format!("unknown model id {wanted:?}")));
                }
            }
            self.models.retain(|m| ov.models.contains(&m.id));
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.episode.validate().map_err(|e| CliError::Config(e.to_string()))?;
        if self.models.is_empty() {
            return Err(CliError::Config("at least one model entry is required".into()));
        }
        let mut ids: Vec<&str> = self.models.iter().map(|m| m.id.as_str()).collect();
        ids.sort_unstable();
        ids.dedup();
        if ids.len() != self.models.len() {
            return Err(CliError::Config("model ids must be unique".into()));
        }
        for model in &self.models {
            if model.id.is_empty() || model.id.contains(['/', '\\']) {
                return Err(CliError::Config(format!(
                    "model id {:?} must be non-empty and path-safe",
                    model.id
                )));
            }
            if let ModelSpec::Profile { quality, volatility } = &model.backend {
                if !(0.0..=1.0).contains(quality) || !(0.0..=1.0).contains(volatility) {
                    return Err(CliError::Config(format!(
                        "model {:?}: profile quality and volatility must lie in [0, 1]",
                        model.id
                    )));
                }
            }
        }
        Ok(())
    }

    /// What the store manifest echoes: the run's identity without its
    /// location or worker count, so equal runs into different
    /// directories or thread pools stay byte-comparable.
    pub fn echo(&self) -> ConfigEcho {
        ConfigEcho {
            episode: EpisodeEcho {
                t_max: self.episode.t_max,
                k: self.episode.k,
                gate: self.episode.gate,
                seed: self.episode.seed,
            },
            backends: self.backends.clone(),
            models: self.models.clone(),
        }
    }
}

/// The episode knobs that shape results; parallelism is execution
/// detail and deliberately absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeEcho {
    pub t_max: u32,
    pub k: u32,
    pub gate: GateConfig,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub episode: EpisodeEcho,
    pub backends: SupportBackends,
    pub models: Vec<ModelEntry>,
}

fn resolve(base: &Path, path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        base.join(path)
    }
}

fn client(endpoint: &ChatEndpointConfig) -> Result<ChatClient, CliError> {
    ChatClient::new(endpoint.clone()).map_err(|e| CliError::Config(e.to_string()))
}

/// Fresh support backends for one episode; scripted backends hold
/// per-episode cursors, so nothing is shared between episodes.
pub fn build_support(spec: &SupportBackends) -> Result<EnvBackends, CliError> {
    let user: Box<dyn epm_agents::UserSimulator> = match &spec.user {
        UserSpec::Narrate => Box::new(ScriptedUser::new(UserProgram::Narrate)),
        UserSpec::Fixed { utterances } => {
            Box::new(ScriptedUser::new(UserProgram::Fixed { utterances: utterances.clone() }))
        }
        UserSpec::Cycle { utterances } => {
            Box::new(ScriptedUser::new(UserProgram::Cycle { utterances: utterances.clone() }))
        }
        UserSpec::Http { endpoint } => Box::new(LiveUserSimulator::new(client(endpoint)?)),
    };
    let judge: Box<dyn epm_agents::WindowJudge> = match &spec.judge {
        JudgeSpec::Markers => Box::new(ScriptedJudge::markers()),
        JudgeSpec::Http { endpoint } => Box::new(LiveJudge::new(client(endpoint)?)),
    };
    let director: Box<dyn epm_agents::Director> = match &spec.director {
        DirectorSpec::Continue => {
            Box::new(ScriptedDirector::new(DirectorProgram::AlwaysContinue))
        }
        DirectorSpec::Reactive { patience } => {
            Box::new(ScriptedDirector::new(DirectorProgram::Reactive { patience: *patience }))
        }
        DirectorSpec::Http { endpoint } => Box::new(LiveDirector::new(client(endpoint)?)),
    };
    Ok(EnvBackends { user, judge, director })
}

/// Fresh model under test for one episode. Profile models take the
/// derived per-episode seed; canned programs ignore it.
pub fn build_model(spec: &ModelSpec, episode_seed: u64) -> Result<Box<dyn TestModel>, CliError> {
    Ok(match spec {
        ModelSpec::Profile { quality, volatility } => {
            Box::new(ScriptedModel::new(ModelProgram::Profile {
                quality: *quality,
                volatility: *volatility,
                seed: episode_seed,
            }))
        }
        ModelSpec::Fixed { replies } => {
            Box::new(ScriptedModel::new(ModelProgram::Fixed { replies: replies.clone() }))
        }
        ModelSpec::Cycle { replies } => {
            Box::new(ScriptedModel::new(ModelProgram::Cycle { replies: replies.clone() }))
        }
        ModelSpec::Http { endpoint } => Box::new(LiveTestModel::new(client(endpoint)?, None)),
    })
}
