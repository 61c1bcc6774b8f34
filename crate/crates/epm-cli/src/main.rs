//! `epm`: benchmark runs, store verification and aggregation, the
//! perturbation lab, and corpus management. Summaries print to stdout
//! as JSON; failures print one JSON error object to stderr and exit
//! with the taxonomy code (2 config, 3 data, 4 runtime).

use clap::{Args, Parser, Subcommand};
use epm_cli::benchmark::run_benchmark;
use epm_cli::config::{RunConfig, RunOverrides};
use epm_cli::export::{build_heatmap, build_radar, build_trajectory3d, write_series, SeriesKind};
use epm_cli::leaderboard::{build_leaderboard, write_leaderboard};
use epm_cli::perturb::{
    build_report, gather_pairs, parse_variant, score_pairs, PairsInput, PerturbationKind,
};
use epm_cli::score::{read_scores, replay_store, score_store, SCORES_FILE};
use epm_cli::CliError;
use epm_lab::fixtures::{persona_flip_set, sycophancy_set};
use epm_lab::StatsConfig;
use epm_scenario::{
    build_corpus, load_corpus, save_corpus, stratified_sample, validate_scenario, QualityCriteria,
    RawDialogue, SamplingSpec, TemplateGenerator,
};
use serde_json::json;
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "epm", version, about = "Trajectory benchmark for support dialogue")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured model-by-scenario grid into a store
    Run(RunArgs),
    /// Replay a store's logs, verify them, and write aggregate scores
    Score(StoreArgs),
    /// Emit the leaderboard and plot-data series from a scored store
    Report(ReportArgs),
    /// Score perturbation pairs and print per-rule statistics
    Perturb(PerturbArgs),
    /// Check every scenario in a corpus against the quality gate
    Validate(ValidateArgs),
    /// Draw a stratified subset of a corpus into a new corpus
    Sample(SampleArgs),
    /// Generate bundled assets
    #[command(subcommand)]
    Gen(GenCommand),
}

#[derive(Args)]
struct RunArgs {
    /// Run config TOML; relative paths inside resolve against it
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    store: Option<PathBuf>,
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    t_max: Option<u32>,
    #[arg(long)]
    k: Option<u32>,
    #[arg(long)]
    parallelism: Option<u32>,
    /// Restrict the run to this model id (repeatable)
    #[arg(long = "model")]
    models: Vec<String>,
}

#[derive(Args)]
struct StoreArgs {
    #[arg(long)]
    store: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long)]
    store: PathBuf,
    /// Aggregate even when some episodes are incomplete
    #[arg(long)]
    allow_partial: bool,
    /// Emit only this series kind (repeatable); default all three
    #[arg(long = "series")]
    series: Vec<String>,
    /// Emit the leaderboard only
    #[arg(long, conflicts_with = "series")]
    no_series: bool,
}

#[derive(Args)]
struct PerturbArgs {
    /// Score a bundled pair set: persona-flip or sycophancy
    #[arg(long, conflicts_with_all = ["pairs", "from_store"])]
    builtin: Option<String>,
    /// Score a saved pair-set file
    #[arg(long, conflicts_with = "from_store")]
    pairs: Option<PathBuf>,
    /// Lift pairs out of a recorded run store
    #[arg(long, requires = "corpus", requires = "kind")]
    from_store: Option<PathBuf>,
    /// Corpus the store was run against (with --from-store)
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Perturbation to apply (with --from-store)
    #[arg(long)]
    kind: Option<String>,
    /// Sycophancy variant to apply (repeatable); default all
    #[arg(long = "variant")]
    variants: Vec<String>,
    #[arg(long, default_value_t = 1)]
    parallelism: usize,
    /// Save the scored pair set here
    #[arg(long)]
    save_pairs: Option<PathBuf>,
    /// Write the report here as well as stdout
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    resamples: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    tie_tol: Option<f64>,
    #[arg(long)]
    confidence: Option<f64>,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    corpus: PathBuf,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// Sampling spec JSON
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Override the spec's seed
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum GenCommand {
    /// Write the bundled synthetic corpus
    Corpus {
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a bundled pair set
    Pairs {
        /// persona-flip or sycophancy
        #[arg(long)]
        kind: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build a corpus from raw dialogues through the template pipeline
    Pipeline {
        /// JSON array of raw dialogues
        #[arg(long)]
        dialogues: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = dispatch(cli.command) {
        eprintln!("{}", e.to_wire());
        std::process::exit(e.exit_code());
    }
}

fn emit(summary: serde_json::Value) {
    println!("{summary:#}");
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Run(args) => cmd_run(args),
        Command::Score(args) => cmd_score(args),
        Command::Report(args) => cmd_report(args),
        Command::Perturb(args) => cmd_perturb(args),
        Command::Validate(args) => cmd_validate(args),
        Command::Sample(args) => cmd_sample(args),
        Command::Gen(args) => cmd_gen(args),
    }
}

fn cmd_run(args: RunArgs) -> Result<(), CliError> {
    let mut cfg = RunConfig::load(&args.config)?;
    cfg.apply(&RunOverrides {
        store: args.store,
        corpus: args.corpus,
        seed: args.seed,
        t_max: args.t_max,
        k: args.k,
        parallelism: args.parallelism,
        models: args.models,
    })?;
    let report = run_benchmark(&cfg)?;
    emit(json!({
        "store": cfg.store,
        "episodes": report.episodes,
        "completed": report.completed,
        "aborted": report.aborted,
    }));
    if report.aborted.is_empty() {
        Ok(())
    } else {
        Err(CliError::EpisodesAborted { count: report.aborted.len() })
    }
}

fn cmd_score(args: StoreArgs) -> Result<(), CliError> {
    let scores = score_store(&args.store)?;
    emit(json!({
        "scores": args.store.join(SCORES_FILE),
        "episodes": scores.episodes.len(),
        "incomplete": scores.incomplete,
    }));
    Ok(())
}

fn cmd_report(args: ReportArgs) -> Result<(), CliError> {
    let scores = read_scores(&args.store)?;
    let board = build_leaderboard(&scores, args.allow_partial)?;
    let board_paths = write_leaderboard(&args.store, &board)?;
    let mut files: Vec<PathBuf> = board_paths.to_vec();

    if !args.no_series {
        let kinds: Vec<SeriesKind> = if args.series.is_empty() {
            SeriesKind::ALL.to_vec()
        } else {
            args.series.iter().map(|s| s.parse()).collect::<Result<_, _>>()?
        };
        for kind in kinds {
            let path = match kind {
                SeriesKind::Trajectory3d => {
                    let (_, replayed, _) = replay_store(&args.store)?;
                    write_series(&args.store, kind, &build_trajectory3d(&replayed)?)?
                }
                SeriesKind::Radar => {
                    write_series(&args.store, kind, &build_radar(&scores.episodes)?)?
                }
                SeriesKind::Heatmap => {
                    write_series(&args.store, kind, &build_heatmap(&scores.episodes)?)?
                }
            };
            files.push(path);
        }
    }
    emit(json!({
        "models": board.rows.len(),
        "episodes": scores.episodes.len(),
        "files": files,
    }));
    Ok(())
}

fn cmd_perturb(args: PerturbArgs) -> Result<(), CliError> {
    let variants = args
        .variants
        .iter()
        .map(|v| parse_variant(v))
        .collect::<Result<Vec<_>, _>>()?;
    if !variants.is_empty() && args.from_store.is_none() {
        return Err(CliError::Config(
            "--variant only applies with --from-store".to_string(),
        ));
    }
    let input = if let Some(kind) = &args.builtin {
        PairsInput::Builtin(kind.parse()?)
    } else if let Some(path) = &args.pairs {
        PairsInput::File(path.clone())
    } else if let Some(store) = &args.from_store {
        PairsInput::FromStore {
            store: store.clone(),
            corpus: args.corpus.clone().expect("clap enforces --corpus"),
            kind: args.kind.as_deref().expect("clap enforces --kind").parse()?,
            variants,
        }
    } else {
        return Err(CliError::Config(
            "pick a pair source: --builtin, --pairs, or --from-store".to_string(),
        ));
    };

    let mut gathered = gather_pairs(&input)?;
    score_pairs(&mut gathered.set, args.parallelism)?;
    if let Some(path) = &args.save_pairs {
        gathered.set.save(path)?;
    }

    let mut cfg = StatsConfig::default();
    if let Some(r) = args.resamples {
        cfg.bootstrap_resamples = r;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(t) = args.tie_tol {
        cfg.tie_tol = t;
    }
    if let Some(c) = args.confidence {
        cfg.confidence = c;
    }
    cfg.validate()?;

    let report = build_report(&gathered.set, &cfg, gathered.skipped)?;
    let mut rendered = serde_json::to_string_pretty(&report)?;
    rendered.push('\n');
    if let Some(path) = &args.out {
        std::fs::write(path, &rendered)
            .map_err(|e| CliError::io(format!("writing {}", path.display()), e))?;
    }
    print!("{rendered}");
    Ok(())
}

fn cmd_validate(args: ValidateArgs) -> Result<(), CliError> {
    let corpus = load_corpus(&args.corpus)?;
    let criteria = QualityCriteria::default();
    let failing: Vec<_> = corpus
        .iter()
        .map(|s| validate_scenario(s, &criteria))
        .filter(|r| !r.passed())
        .collect();
    emit(json!({
        "checked": corpus.len(),
        "failed": failing.len(),
        "reports": failing,
    }));
    if failing.is_empty() {
        Ok(())
    } else {
        Err(CliError::ValidationFailed { checked: corpus.len(), failed: failing.len() })
    }
}

fn cmd_sample(args: SampleArgs) -> Result<(), CliError> {
    let corpus = load_corpus(&args.corpus)?;
    let text = std::fs::read_to_string(&args.spec)
        .map_err(|e| CliError::io(format!("reading spec {}", args.spec.display()), e))?;
    let mut spec: SamplingSpec = serde_json::from_str(&text)?;
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    let sampled = stratified_sample(&corpus, &spec)?;
    save_corpus(&args.out, &sampled)?;
    emit(json!({
        "selected": sampled.len(),
        "out": args.out,
    }));
    Ok(())
}

fn cmd_gen(command: GenCommand) -> Result<(), CliError> {
    match command {
        GenCommand::Corpus { out } => {
            let corpus = epm_scenario::builtin::synthetic_corpus();
            save_corpus(&out, &corpus)?;
            emit(json!({ "scenarios": corpus.len(), "out": out }));
        }
        GenCommand::Pairs { kind, out } => {
            let set = match kind.parse::<PerturbationKind>()? {
                PerturbationKind::PersonaFlip => persona_flip_set(),
                PerturbationKind::Sycophancy => sycophancy_set(),
            };
            set.save(&out)?;
            emit(json!({ "pairs": set.pairs.len(), "out": out }));
        }
        GenCommand::Pipeline { dialogues, out } => {
            let text = std::fs::read_to_string(&dialogues)
                .map_err(|e| CliError::io(format!("reading {}", dialogues.display()), e))?;
            let raw: Vec<RawDialogue> = serde_json::from_str(&text)?;
            let report = build_corpus(&raw, &TemplateGenerator::default(), &QualityCriteria::default())?;
            save_corpus(&out, &report.scenarios)?;
            emit(json!({
                "scenarios": report.scenarios.len(),
                "skipped": report.skipped,
                "out": out,
            }));
        }
    }
    Ok(())
}
