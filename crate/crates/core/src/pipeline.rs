//! Per-sample pipeline and dataset generation.
//!
//! Sample `i` draws everything from its own stream `(seed, i)`: query class,
//! scene, episode, query, and the text-context shuffle. Samples are
//! generated in parallel and written in index order, so output does not
//! depend on the worker count.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::GenConfig;
use crate::context::{render_relational_context, render_text_context};
use crate::dynamics::run_episode;
use crate::pools::ScenePools;
use crate::query::{choose_class, sample_query, QueryParams};
use crate::record::{sample_id, write_samples, GenerationMetadata, RecordError, Sample, Split, FORMAT_VERSION};
use crate::rng::{derive_seed, sample_rng, unit_interval};
use crate::scene::build_scene;

const SPLIT_SALT: u64 = 0x5350_4c49_545f_5f5f;

#[derive(Debug, Error, PartialEq)]
pub enum GenerateError {
    #[error("sample {index}: no answerable scene after {attempts} attempts (last failure: {last})")]
    Capacity { index: u64, attempts: usize, last: String },
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("creating {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Record(#[from] RecordError),
    #[error("building worker pool: {0}")]
    Workers(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleOutcome {
    pub sample: Sample,
    /// Query forms rejected in the accepted scene.
    pub query_rejections: usize,
    /// Scenes discarded before the accepted one.
    pub scene_retries: usize,
}

/// Deterministic split membership, by hashing `(seed, index)`.
pub fn assign_split(config: &GenConfig, index: u64) -> Split {
    let u = unit_interval(derive_seed(config.seed ^ SPLIT_SALT, index));
    if u < config.split_train {
        Split::Train
    } else if u < config.split_train + config.split_valid {
        Split::Valid
    } else {
        Split::Test
    }
}

/// Generate sample `index` from scratch.
pub fn generate_sample(config: &GenConfig, pools: &ScenePools, index: u64) -> Result<SampleOutcome, GenerateError> {
    let mut rng = sample_rng(config.seed, index);
    let class = choose_class(config, &mut rng);
    let params = QueryParams::from_config(config);
    let mut last = String::new();
    for attempt in 0..config.max_scene_attempts {
        let mut world = match build_scene(config, pools, &mut rng) {
            Ok(w) => w,
            Err(e) => {
                last = e.to_string();
                continue;
            }
        };
        let snapshots = match run_episode(&mut world, config, pools, &mut rng) {
            Ok(s) => s,
            Err(e) => {
                last = e.to_string();
                continue;
            }
        };
        let q = match sample_query(class, &snapshots, &world.action_log, &params, &mut rng) {
            Ok(q) => q,
            Err(e) => {
                last = e.to_string();
                continue;
            }
        };
        let sample = Sample {
            format_version: FORMAT_VERSION,
            id: sample_id(config.seed, index),
            split: assign_split(config, index),
            query_class: class,
            context_text: render_text_context(&snapshots, &mut rng),
            context_relational: render_relational_context(&snapshots),
            query_text: q.text,
            query_logical_form: q.form,
            answer_text: q.answer.text,
            answer_memids: q.answer.relevant_memids,
            generation_metadata: GenerationMetadata {
                seed: config.seed,
                sample_index: index,
                config_digest: config.digest(),
                world_size: config.world_size,
                action_log: world.action_log,
            },
        };
        return Ok(SampleOutcome {
            sample,
            query_rejections: q.rejections,
            scene_retries: attempt,
        });
    }
    Err(GenerateError::Capacity {
        index,
        attempts: config.max_scene_attempts,
        last,
    })
}

fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T, PipelineError> {
    if workers == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| PipelineError::Workers(e.to_string()))?;
    Ok(pool.install(f))
}

/// Generate samples `0..config.n_samples` in parallel, in index order.
pub fn generate_all(
    config: &GenConfig,
    pools: &ScenePools,
) -> Result<Vec<Result<SampleOutcome, GenerateError>>, PipelineError> {
    with_workers(config.workers, || {
        (0..config.n_samples as u64)
            .into_par_iter()
            .map(|i| generate_sample(config, pools, i))
            .collect()
    })
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub requested: usize,
    pub written: usize,
    pub capacity_failures: usize,
    /// First few failure messages.
    pub failure_examples: Vec<String>,
    pub per_class: BTreeMap<String, usize>,
    pub per_return_type: BTreeMap<String, usize>,
    pub per_clause_kind: BTreeMap<String, usize>,
    pub per_split: BTreeMap<String, usize>,
    pub two_clause_queries: usize,
    pub negated_clauses: usize,
    pub query_rejections: usize,
    pub scene_retries: usize,
    pub seed: u64,
    pub config_digest: String,
}

impl DatasetStats {
    pub fn collect(config: &GenConfig, outcomes: &[Result<SampleOutcome, GenerateError>]) -> Self {
        let mut st = DatasetStats {
            requested: outcomes.len(),
            seed: config.seed,
            config_digest: config.digest(),
            ..Default::default()
        };
        for o in outcomes {
            match o {
                Ok(o) => {
                    let s = &o.sample;
                    let form = &s.query_logical_form;
                    st.written += 1;
                    *st.per_class.entry(s.query_class.as_str().into()).or_default() += 1;
                    *st.per_return_type.entry(form.return_type.as_str().into()).or_default() += 1;
                    *st.per_split.entry(s.split.as_str().into()).or_default() += 1;
                    for c in form.clauses() {
                        *st.per_clause_kind.entry(c.clause_type().as_str().into()).or_default() += 1;
                        st.negated_clauses += usize::from(c.negated);
                    }
                    st.two_clause_queries += usize::from(form.clauses().len() == 2);
                    st.query_rejections += o.query_rejections;
                    st.scene_retries += o.scene_retries;
                }
                Err(e) => {
                    st.capacity_failures += 1;
                    if st.failure_examples.len() < 10 {
                        st.failure_examples.push(e.to_string());
                    }
                }
            }
        }
        st
    }
}

/// Generate the dataset into `out_dir`: `train.jsonl`, `valid.jsonl`,
/// `test.jsonl`, `stats.json` and the effective `config.toml`.
pub fn generate_dataset(config: &GenConfig, pools: &ScenePools, out_dir: &Path) -> Result<DatasetStats, PipelineError> {
    fs::create_dir_all(out_dir).map_err(|source| PipelineError::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let outcomes = generate_all(config, pools)?;
    for split in Split::ALL {
        let path = out_dir.join(format!("{}.jsonl", split.as_str()));
        let samples = outcomes
            .iter()
            .filter_map(|o| o.as_ref().ok())
            .map(|o| &o.sample)
            .filter(|s| s.split == split);
        write_samples(samples, &path)?;
    }
    let stats = DatasetStats::collect(config, &outcomes);
    let write = |name: &str, text: String| {
        let path = out_dir.join(name);
        fs::write(&path, text).map_err(|source| PipelineError::Io { path, source })
    };
    write("stats.json", serde_json::to_string_pretty(&stats).expect("stats serialize") + "\n")?;
    write("config.toml", config.to_toml())?;
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::record::validate_sample;

    #[test]
    fn samples_validate_and_regenerate() {
        let config = GenConfig { n_samples: 30, ..GenConfig::default() };
        let pools = ScenePools::default();
        for i in 0..30 {
            let a = generate_sample(&config, &pools, i).unwrap();
            validate_sample(&a.sample).unwrap();
            let b = generate_sample(&config, &pools, i).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn properties_preset_uses_one_static_snapshot() {
        let config = GenConfig::preset("properties").unwrap();
        let s = generate_sample(&config, &ScenePools::default(), 3).unwrap().sample;
        assert_eq!(s.context_relational.snapshots.len(), 1);
        assert_eq!(s.context_relational.snapshots[0].step, 0);
        assert!(s.generation_metadata.action_log.is_empty());
    }

    #[test]
    fn splits_follow_fractions() {
        let config = GenConfig::default();
        let n = 20_000;
        let train = (0..n).filter(|i| assign_split(&config, *i) == Split::Train).count();
        let frac = train as f64 / n as f64;
        assert!((frac - 0.8).abs() < 0.02, "{frac}");
    }

    #[test]
    fn impossible_world_reports_capacity() {
        let config = GenConfig {
            world_size: 4,
            n_npcs: 40,
            max_scene_attempts: 2,
            ..GenConfig::default()
        };
        let err = generate_sample(&config, &ScenePools::default(), 0).unwrap_err();
        assert!(matches!(err, GenerateError::Capacity { attempts: 2, .. }));
    }
}
