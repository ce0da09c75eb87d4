//! `gridqa`: generate, inspect, validate and score gridworld QA datasets.
//!
//! Exit codes: 0 success, 1 bad config, usage, alignment or invalid data,
//! 2 samples lost to capacity failures, 3 I/O errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::anyhow;
use clap::{Args, Parser, Subcommand};
use gridqa_core::pipeline::PipelineError;
use gridqa_core::record::RecordError;
use gridqa_core::score::{score_files, ScoreError};
use gridqa_core::{generate_dataset, read_samples, validate_sample, GenConfig, Sample, ScenePools};

/// Environment variable naming a directory of replacement word pools.
const POOL_DIR_ENV: &str = "GRIDQA_POOL_DIR";

#[derive(Parser)]
#[command(name = "gridqa", version, about = "Synthetic question answering over a simulated gridworld")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a dataset into an output directory.
    Generate {
        #[command(flatten)]
        config: ConfigArgs,
        /// Output directory (overrides `output_dir`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the effective config as TOML.
    Config {
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Score predictions against a dataset file by exact match.
    Score {
        /// JSONL with `id` and `answer_text` per line.
        #[arg(long)]
        predictions: PathBuf,
        /// Dataset JSONL to score against.
        #[arg(long)]
        references: PathBuf,
    },
    /// Print samples in readable form.
    Inspect {
        file: PathBuf,
        /// Show only the sample with this id.
        #[arg(long, conflicts_with = "index")]
        id: Option<String>,
        /// Show only the sample at this line (0-based).
        #[arg(long)]
        index: Option<usize>,
        /// Show at most this many samples.
        #[arg(long, default_value_t = 5)]
        limit: usize,
        /// Print raw JSON records instead.
        #[arg(long)]
        json: bool,
    },
    /// Check that every record is self-consistent.
    Validate {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
}

#[derive(Args)]
struct ConfigArgs {
    /// TOML config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Starting preset: all, properties, temporal or geometric.
    #[arg(long)]
    preset: Option<String>,
    /// Override a config key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl Failure {
    fn usage(error: impl Into<anyhow::Error>) -> Self {
        Self { code: 1, error: error.into() }
    }

    fn io(error: impl Into<anyhow::Error>) -> Self {
        Self { code: 3, error: error.into() }
    }
}

fn from_record(e: RecordError) -> Failure {
    match e {
        RecordError::Io { .. } => Failure::io(e),
        RecordError::Parse { .. } => Failure::usage(e),
    }
}

impl ConfigArgs {
    fn load(&self) -> Result<GenConfig, Failure> {
        let mut overrides = Vec::new();
        if let Some(p) = &self.preset {
            overrides.push(("preset".to_string(), format!("{p:?}")));
        }
        for kv in &self.overrides {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Failure::usage(anyhow!("--set expects KEY=VALUE, got {kv:?}")))?;
            overrides.push((k.trim().to_string(), v.trim().to_string()));
        }
        let result = match &self.config {
            Some(path) => GenConfig::from_file(path, &overrides),
            None => GenConfig::from_toml_with_overrides("", &overrides),
        };
        result.map_err(|e| match e {
            gridqa_core::ConfigError::Io { .. } => Failure::io(e),
            _ => Failure::usage(e),
        })
    }
}

fn load_pools(config: &GenConfig) -> Result<ScenePools, Failure> {
    let mut paths = config.pool_paths();
    if let Some(dir) = std::env::var_os(POOL_DIR_ENV) {
        paths = paths.with_default_dir(Path::new(&dir));
    }
    ScenePools::load(&paths).map_err(|e| match e {
        gridqa_core::pools::PoolError::Io { .. } => Failure::io(e),
        _ => Failure::usage(e),
    })
}

fn generate(args: &ConfigArgs, out: Option<PathBuf>) -> Result<(), Failure> {
    let mut config = args.load()?;
    if let Some(out) = out {
        config.output_dir = out;
    }
    let pools = load_pools(&config)?;
    let stats = generate_dataset(&config, &pools, &config.output_dir).map_err(|e| match e {
        PipelineError::Record(r) => from_record(r),
        PipelineError::Io { .. } => Failure::io(e),
        PipelineError::Workers(_) => Failure::usage(e),
    })?;
    eprintln!(
        "wrote {} of {} samples to {} ({})",
        stats.written,
        stats.requested,
        config.output_dir.display(),
        stats
            .per_split
            .iter()
            .map(|(k, v)| format!("{k} {v}"))
            .collect::<Vec<_>>()
            .join(", ")
    );
    if stats.capacity_failures > 0 {
        for m in &stats.failure_examples {
            eprintln!("  {m}");
        }
        return Err(Failure {
            code: 2,
            error: anyhow!(
                "{} samples failed; try a larger world_size, fewer NPCs or more max_scene_attempts",
                stats.capacity_failures
            ),
        });
    }
    Ok(())
}

fn score(predictions: &Path, references: &Path) -> Result<(), Failure> {
    let report = score_files(predictions, references).map_err(|e| match e {
        ScoreError::Record(r) => from_record(r),
        other => Failure::usage(other),
    })?;
    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    Ok(())
}

fn show(s: &Sample) {
    println!("== {} [{} / {}]", s.id, s.split.as_str(), s.query_class);
    println!("{}", s.context_text);
    println!("Q: {}", s.query_text);
    println!("A: {}", s.answer_text);
    println!("form: {}", s.query_logical_form);
    let ids: Vec<String> = s.answer_memids.iter().map(|m| m.to_string()).collect();
    println!("memids: {}", ids.join(" "));
    println!();
}

fn inspect(file: &Path, id: Option<&str>, index: Option<usize>, limit: usize, json: bool) -> Result<(), Failure> {
    let samples = read_samples(file).map_err(from_record)?;
    let chosen: Vec<&Sample> = match (id, index) {
        (Some(id), _) => vec![samples
            .iter()
            .find(|s| s.id == id)
            .ok_or_else(|| Failure::usage(anyhow!("no sample with id {id:?} in {}", file.display())))?],
        (None, Some(i)) => vec![samples
            .get(i)
            .ok_or_else(|| Failure::usage(anyhow!("{} has {} samples", file.display(), samples.len())))?],
        (None, None) => samples.iter().take(limit).collect(),
    };
    for s in chosen {
        if json {
            println!("{}", serde_json::to_string_pretty(s).expect("samples serialize"));
        } else {
            show(s);
        }
    }
    Ok(())
}

fn validate(files: &[PathBuf]) -> Result<(), Failure> {
    let mut bad = 0;
    let mut total = 0;
    for f in files {
        let samples = read_samples(f).map_err(from_record)?;
        for s in &samples {
            total += 1;
            if let Err(e) = validate_sample(s) {
                bad += 1;
                eprintln!("{}: {}: {e}", f.display(), s.id);
            }
        }
    }
    println!("{total} samples checked, {bad} invalid");
    if bad > 0 {
        return Err(Failure::usage(anyhow!("{bad} invalid samples")));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Generate { config, out } => generate(&config, out),
        Command::Config { config } => {
            print!("{}", config.load()?.to_toml());
            Ok(())
        }
        Command::Score { predictions, references } => score(&predictions, &references),
        Command::Inspect { file, id, index, limit, json } => inspect(&file, id.as_deref(), index, limit, json),
        Command::Validate { files } => validate(&files),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.error);
            ExitCode::from(f.code)
        }
    }
}
