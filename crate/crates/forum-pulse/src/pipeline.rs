//! End-to-end runs driven by a flat JSON config with stage-scoped keys.
//!
//! ```json
//! {
//!   "seed": 7,
//!   "ingest.posts": "posts.jsonl",
//!   "ingest.comments": "comments.jsonl",
//!   "topics.kmin": 2,
//!   "topics.kmax": 8,
//!   "lda.iterations": 400
//! }
//! ```
//!
//! Relative paths in the file resolve against the file's directory.

use std::path::{Path, PathBuf};

use forum_pulse_core::corpus::{
    CorpusConfig, DEFAULT_MAX_DF_FRACTION, DEFAULT_MIN_DF, DEFAULT_PHRASE_MIN_COUNT,
};
use forum_pulse_core::lda::{LdaConfig, DEFAULT_BETA, DEFAULT_BURN_IN, DEFAULT_ITERATIONS};
use forum_pulse_core::lexicon::DEFAULT_COMPONENTS;
use forum_pulse_core::rng::derive_seed;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::formats::sha256_hex;
use crate::manifest::Project;
use crate::stages::{GraphFormat, IngestParams, LexiconParams, Outcome, Runner, SelectParams};

pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_K_MIN: usize = 2;
pub const DEFAULT_K_MAX: usize = 30;
pub const DEFAULT_TOP_K: usize = 10;

const PATH_KEYS: [&str; 3] = ["ingest.posts", "ingest.comments", "lexicon.path"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(rename = "ingest.posts")]
    pub posts: PathBuf,
    #[serde(rename = "ingest.comments")]
    pub comments: PathBuf,
    #[serde(rename = "ingest.from", default)]
    pub from: Option<i64>,
    #[serde(rename = "ingest.to", default)]
    pub to: Option<i64>,
    #[serde(rename = "corpus.min_df", default = "default_min_df")]
    pub min_df: usize,
    #[serde(rename = "corpus.max_df_fraction", default = "default_max_df")]
    pub max_df_fraction: f64,
    #[serde(rename = "corpus.phrase_min_count", default = "default_phrase")]
    pub phrase_min_count: usize,
    /// Fixed topic count; skips model selection.
    #[serde(rename = "topics.k", default)]
    pub k: Option<usize>,
    #[serde(rename = "topics.kmin", default = "default_kmin")]
    pub k_min: usize,
    #[serde(rename = "topics.kmax", default = "default_kmax")]
    pub k_max: usize,
    #[serde(rename = "topics.patience", default)]
    pub patience: Option<usize>,
    /// Defaults to `50 / k`.
    #[serde(rename = "lda.alpha", default)]
    pub alpha: Option<f64>,
    #[serde(rename = "lda.beta", default = "default_beta")]
    pub beta: f64,
    #[serde(rename = "lda.iterations", default = "default_iterations")]
    pub iterations: usize,
    #[serde(rename = "lda.burn_in", default = "default_burn_in")]
    pub burn_in: usize,
    /// Defaults to the bundled demo lexicon.
    #[serde(rename = "lexicon.path", default)]
    pub lexicon: Option<PathBuf>,
    #[serde(rename = "lexicon.components", default = "default_components")]
    pub components: usize,
    #[serde(rename = "users.top_k", default = "default_top_k")]
    pub top_k: usize,
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}
fn default_min_df() -> usize {
    DEFAULT_MIN_DF
}
fn default_max_df() -> f64 {
    DEFAULT_MAX_DF_FRACTION
}
fn default_phrase() -> usize {
    DEFAULT_PHRASE_MIN_COUNT
}
fn default_kmin() -> usize {
    DEFAULT_K_MIN
}
fn default_kmax() -> usize {
    DEFAULT_K_MAX
}
fn default_beta() -> f64 {
    DEFAULT_BETA
}
fn default_iterations() -> usize {
    DEFAULT_ITERATIONS
}
fn default_burn_in() -> usize {
    DEFAULT_BURN_IN
}
fn default_components() -> usize {
    DEFAULT_COMPONENTS
}
fn default_top_k() -> usize {
    DEFAULT_TOP_K
}

/// Parse a `KEY=VALUE` override. The value is read as JSON when it parses,
/// otherwise as a string.
pub fn parse_override(s: &str) -> std::result::Result<(String, Value), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected KEY=VALUE, got {s:?}"))?;
    let v = serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.to_string()));
    Ok((k.trim().to_string(), v))
}

impl PipelineConfig {
    /// Merge the file's keys with `overrides` (later wins).
    pub fn from_parts(
        file: Map<String, Value>,
        base_dir: &Path,
        overrides: &[(String, Value)],
    ) -> Result<Self> {
        let mut map = file;
        for key in PATH_KEYS {
            if let Some(Value::String(p)) = map.get(key) {
                let p = Path::new(p);
                if p.is_relative() {
                    let joined = base_dir.join(p).to_string_lossy().into_owned();
                    map.insert(key.to_string(), Value::String(joined));
                }
            }
        }
        for (k, v) in overrides {
            map.insert(k.clone(), v.clone());
        }
        let cfg: Self = serde_json::from_value(Value::Object(map))
            .map_err(|e| Error::Usage(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path, overrides: &[(String, Value)]) -> Result<(Self, String)> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        let map: Map<String, Value> = serde_json::from_slice(&bytes)
            .map_err(|e| Error::Usage(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        Ok((Self::from_parts(map, base, overrides)?, sha256_hex(&bytes)))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Usage(m));
        if let Some(k) = self.k {
            if k < 2 {
                return bad(format!("topics.k must be at least 2, got {k}"));
            }
        } else if self.k_min < 2 || self.k_max < self.k_min {
            return bad(format!(
                "topics.kmin/kmax must satisfy 2 <= kmin <= kmax, got {}..{}",
                self.k_min, self.k_max
            ));
        }
        if self.components == 0 || self.top_k == 0 {
            return bad("lexicon.components and users.top_k must be at least 1".into());
        }
        Ok(())
    }

    pub fn corpus_config(&self) -> CorpusConfig {
        CorpusConfig {
            min_df: self.min_df,
            max_df_fraction: self.max_df_fraction,
            phrase_min_count: self.phrase_min_count,
        }
    }

    /// LDA settings for topic count `k`; the sampler seed is derived from
    /// the run seed.
    pub fn lda_config(&self, k: usize) -> LdaConfig {
        let mut c = LdaConfig::new(k, derive_seed(self.seed, "lda"));
        if let Some(a) = self.alpha {
            c.alpha = a;
        }
        c.beta = self.beta;
        c.iterations = self.iterations;
        c.burn_in = self.burn_in;
        c
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PipelineSummary {
    pub ran: Vec<String>,
    pub skipped: Vec<String>,
}

/// Run every stage in order, skipping the ones whose inputs and parameters
/// are unchanged. Stops at the first failing stage.
pub fn run_pipeline(
    config_path: &Path,
    project: &Path,
    overrides: &[(String, Value)],
) -> Result<PipelineSummary> {
    let (cfg, digest) = PipelineConfig::load(config_path, overrides)?;
    run_with_config(&cfg, Some(digest), project)
}

pub fn run_with_config(
    cfg: &PipelineConfig,
    config_sha256: Option<String>,
    project: &Path,
) -> Result<PipelineSummary> {
    let mut r = Runner::open(Project::new(project), false)?;
    r.manifest.seed = Some(cfg.seed);
    r.manifest.config =
        serde_json::to_value(cfg).map_err(|e| Error::Internal(e.to_string()))?;
    r.manifest.config_sha256 = config_sha256;

    let mut summary = PipelineSummary::default();
    let mut note = |name: &str, o: Outcome| match o {
        Outcome::Ran => summary.ran.push(name.to_string()),
        Outcome::Skipped => summary.skipped.push(name.to_string()),
    };

    let ingest = IngestParams {
        posts: cfg.posts.clone(),
        comments: cfg.comments.clone(),
        from: cfg.from,
        to: cfg.to,
    };
    note("ingest", r.ingest(&ingest)?);
    note("stats", r.stats()?);
    note("corpus", r.corpus(&cfg.corpus_config())?);
    match cfg.k {
        Some(k) => note("topics_fit", r.fit(&cfg.lda_config(k))?),
        None => {
            let p = SelectParams {
                k_min: cfg.k_min,
                k_max: cfg.k_max,
                patience: cfg.patience,
                base: cfg.lda_config(cfg.k_min),
            };
            note("topics_select_k", r.select_k(&p)?)
        }
    }
    note("topics_dominance", r.dominance()?);
    note("topics_cooccur", r.cooccur()?);
    note("topics_timeline", r.timeline()?);
    let lex = LexiconParams {
        lexicon: cfg.lexicon.clone(),
        components: cfg.components,
    };
    note("lexicon_profile", r.lexicon(&lex)?);
    note("graph_build", r.graph()?);
    for f in [GraphFormat::Csv, GraphFormat::Graphml, GraphFormat::Dot] {
        note(&format!("graph_export_{}", f.name()), r.export(f)?);
    }
    note("users_metrics", r.metrics()?);
    note("users_top", r.top(cfg.top_k)?);
    note("report", r.report()?);
    r.manifest.save(&r.project.manifest_path())?;
    Ok(summary)
}
