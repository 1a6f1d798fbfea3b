//! Analysis stages. Each stage reads artifacts, writes artifacts and records
//! itself in the run manifest; a stage whose parameters, inputs and outputs
//! are unchanged since its last run is skipped.

use std::fs;
use std::path::{Path, PathBuf};

use forum_pulse_core::corpus::{build_corpus, Corpus, CorpusConfig, Tokenizer};
use forum_pulse_core::ingest::{
    author_activity_table, response_times, score_relations, Dataset, IngestTally, TimeWindow,
};
use forum_pulse_core::interaction::{
    build_graph, rank_by_influence, spread_influence_rows, top_influencers_subgraph, user_classes,
    user_metrics, InteractionGraph, UserMetrics,
};
use forum_pulse_core::lda::{self, LdaConfig, TopicModel};
use forum_pulse_core::lexicon::{categorize, pca, topicwise_profile};
use forum_pulse_core::topics::{
    choose_k, cooccurrence, count_nonpositive, dominant_topics, monthly_distribution,
    validate_k_range, DominantTopicAssignment, SkewnessReport,
};
use log::{info, warn};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::formats::{
    dot, file_digest, graphml, num, opt_num, read_corpus, read_json, read_lexicon, read_model,
    write_csv, write_edges_csv, write_json, write_model, write_text, write_vocabulary,
};
use crate::jsonl::parse_dump_files;
use crate::manifest::{fingerprint, now, FileDigest, Project, RunManifest, StageRecord};

pub const DATASET: &str = "dataset.json";
pub const CORPUS: &str = "corpus.json";
pub const MODEL: &str = "model.json";
pub const TOP_WORDS: usize = 10;

const STAGING_DIR: &str = ".staging";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Ran,
    Skipped,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphFormat {
    Csv,
    Graphml,
    Dot,
}

impl GraphFormat {
    pub fn file_name(self) -> &'static str {
        match self {
            Self::Csv => "graph.csv",
            Self::Graphml => "graph.graphml",
            Self::Dot => "graph.dot",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Csv => "csv",
            Self::Graphml => "graphml",
            Self::Dot => "dot",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IngestParams {
    pub posts: PathBuf,
    pub comments: PathBuf,
    pub from: Option<i64>,
    pub to: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectParams {
    pub k_min: usize,
    pub k_max: usize,
    pub patience: Option<usize>,
    pub base: LdaConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LexiconParams {
    pub lexicon: Option<PathBuf>,
    pub components: usize,
}

#[derive(Serialize)]
struct IngestReport {
    posts: usize,
    comments: usize,
    authors: usize,
    dangling_refs: usize,
    dangling_roots: usize,
    malformed: usize,
    duplicates: usize,
    tally: IngestTally,
}

/// Executes stages against one project and keeps its manifest up to date.
pub struct Runner {
    pub project: Project,
    pub manifest: RunManifest,
    /// Run stages even when their records are current.
    pub force: bool,
}

impl Runner {
    pub fn open(project: Project, force: bool) -> Result<Self> {
        project.ensure()?;
        let manifest = RunManifest::load_or_new(&project.manifest_path())?;
        Ok(Self {
            project,
            manifest,
            force,
        })
    }

    fn label(&self, path: &Path) -> String {
        path.strip_prefix(self.project.root())
            .unwrap_or(path)
            .to_string_lossy()
            .replace('\\', "/")
    }

    fn digests(&self, paths: &[PathBuf]) -> Result<Vec<FileDigest>> {
        paths
            .iter()
            .map(|p| {
                Ok(FileDigest {
                    path: self.label(p),
                    sha256: file_digest(p)?,
                })
            })
            .collect()
    }

    fn is_current(&self, name: &str, fp: &str, outputs: &[&str]) -> bool {
        let Some(rec) = self.manifest.stage(name) else {
            return false;
        };
        rec.fingerprint == fp
            && rec.outputs.len() == outputs.len()
            && rec.outputs.iter().all(|o| {
                file_digest(&self.project.root().join(&o.path)).is_ok_and(|d| d == o.sha256)
            })
    }

    /// Run `body` in a scratch directory, then move its outputs into the
    /// artifacts directory and record the stage. Earlier artifacts are left
    /// untouched when the body fails.
    fn stage<F>(
        &mut self,
        name: &str,
        params: &impl Serialize,
        inputs: Vec<PathBuf>,
        outputs: &[&str],
        body: F,
    ) -> Result<Outcome>
    where
        F: FnOnce(&Path) -> Result<()>,
    {
        let run = || -> Result<Outcome> {
            let params = serde_json::to_value(params).map_err(|e| Error::Internal(e.to_string()))?;
            let inputs = self.digests(&inputs)?;
            let fp = fingerprint(name, &params, &inputs);
            if !self.force && self.is_current(name, &fp, outputs) {
                info!("{name}: up to date, skipped");
                return Ok(Outcome::Skipped);
            }
            info!("{name}: running");
            let started_at = now();
            let scratch = self.project.root().join(STAGING_DIR).join(name);
            if scratch.exists() {
                fs::remove_dir_all(&scratch).map_err(|e| Error::io(&scratch, e))?;
            }
            fs::create_dir_all(&scratch).map_err(|e| Error::io(&scratch, e))?;
            let result = body(&scratch).and_then(|()| {
                let mut paths = Vec::with_capacity(outputs.len());
                for o in outputs {
                    let (from, to) = (scratch.join(o), self.project.artifact(o));
                    if !from.exists() {
                        return Err(Error::Internal(format!("stage did not produce {o}")));
                    }
                    fs::rename(&from, &to).map_err(|e| Error::io(&to, e))?;
                    paths.push(to);
                }
                Ok(paths)
            });
            let _ = fs::remove_dir_all(&scratch);
            let _ = fs::remove_dir(self.project.root().join(STAGING_DIR));
            let outputs = self.digests(&result?)?;
            self.manifest.record(StageRecord {
                stage: name.to_string(),
                params,
                fingerprint: fp,
                inputs,
                outputs,
                started_at,
                finished_at: now(),
            });
            self.manifest.save(&self.project.manifest_path())?;
            Ok(Outcome::Ran)
        };
        run().map_err(|e| e.in_stage(name))
    }

    pub fn ingest(&mut self, p: &IngestParams) -> Result<Outcome> {
        let inputs = vec![p.posts.clone(), p.comments.clone()];
        self.stage("ingest", p, inputs, &[DATASET, "ingest_report.json"], |out| {
            let window = TimeWindow {
                from: p.from,
                to: p.to,
            };
            let d = parse_dump_files(&p.posts, &p.comments, window)?;
            if d.tally.malformed() > 0 {
                warn!("{} malformed lines skipped", d.tally.malformed());
            }
            if d.posts.is_empty() {
                return Err(Error::Data("no well-formed posts in the window".into()));
            }
            write_json(&out.join(DATASET), &d)?;
            write_json(
                &out.join("ingest_report.json"),
                &IngestReport {
                    posts: d.posts.len(),
                    comments: d.comments.len(),
                    authors: d.authors.len(),
                    dangling_refs: d.dangling_refs,
                    dangling_roots: d.dangling_roots,
                    malformed: d.tally.malformed(),
                    duplicates: d.tally.duplicates(),
                    tally: d.tally,
                },
            )
        })
    }

    pub fn stats(&mut self) -> Result<Outcome> {
        let proj = self.project.clone();
        let outputs = [
            "activity.csv",
            "score_relations.csv",
            "response_times.csv",
            "stats_summary.json",
        ];
        let inputs = vec![proj.artifact(DATASET)];
        self.stage("stats", &json!({}), inputs, &outputs, |out| {
            let d = load_dataset(&proj)?;
            let rows = author_activity_table(&d).map(Vec::from).unwrap_or_default();
            write_csv(
                &out.join("activity.csv"),
                &[
                    "category",
                    "authors",
                    "posts",
                    "comments",
                    "authors_pct",
                    "posts_pct",
                    "comments_pct",
                ],
                rows.iter().map(|r| {
                    [
                        r.category.name().to_string(),
                        r.authors.to_string(),
                        r.posts.to_string(),
                        r.comments.to_string(),
                        num(r.authors_pct),
                        num(r.posts_pct),
                        num(r.comments_pct),
                    ]
                }),
            )?;
            let rel = score_relations(&d);
            write_csv(
                &out.join("score_relations.csv"),
                &["post_id", "post_score", "max_comment_score"],
                rel.pairs.iter().map(|p| {
                    [
                        p.post_id.clone(),
                        p.post_score.to_string(),
                        p.max_comment_score.to_string(),
                    ]
                }),
            )?;
            let rt = response_times(&d);
            write_csv(
                &out.join("response_times.csv"),
                &["comment_id", "seconds", "score"],
                rt.samples.iter().map(|&(i, secs, score)| {
                    [d.comments[i].id.clone(), secs.to_string(), score.to_string()]
                }),
            )?;
            write_json(
                &out.join("stats_summary.json"),
                &json!({
                    "posts": d.posts.len(),
                    "comments": d.comments.len(),
                    "authors": d.authors.len(),
                    "posts_without_comments": rel.posts_without_comments,
                    "post_score_one_fraction": rel.post_score_one_fraction,
                    "comment_score_one_fraction": rel.comment_score_one_fraction,
                    "response_time_samples": rt.samples.len(),
                    "response_time_anomalies": rt.anomalies,
                    "response_time_undefined": rt.undefined,
                }),
            )
        })
    }

    pub fn corpus(&mut self, cfg: &CorpusConfig) -> Result<Outcome> {
        let proj = self.project.clone();
        let inputs = vec![proj.artifact(DATASET)];
        let dataset_path = inputs[0].clone();
        self.stage("corpus", cfg, inputs, &[CORPUS, "vocabulary.csv"], |out| {
            cfg.validate()?;
            let d: Dataset = read_json(&dataset_path)?;
            let corpus = build_corpus(&d, cfg)?;
            if !corpus.excluded_doc_ids.is_empty() {
                info!(
                    "{} posts left no tokens and are not modeled",
                    corpus.excluded_doc_ids.len()
                );
            }
            write_json(&out.join(CORPUS), &corpus)?;
            write_vocabulary(&out.join("vocabulary.csv"), &corpus)
        })
    }

    pub fn fit(&mut self, config: &LdaConfig) -> Result<Outcome> {
        let proj = self.project.clone();
        let corpus_path = proj.artifact(CORPUS);
        self.stage("topics_fit", config, vec![corpus_path.clone()], TOPIC_OUTPUTS, |out| {
            config.validate()?;
            let corpus = read_corpus(&corpus_path)?;
            let mut model = lda::fit(&corpus, *config)?;
            model.assignments.clear();
            let report = count_nonpositive(&model)?;
            write_topic_outputs(out, &corpus, &model, &[report])
        })
    }

    pub fn select_k(&mut self, p: &SelectParams) -> Result<Outcome> {
        let proj = self.project.clone();
        let corpus_path = proj.artifact(CORPUS);
        self.stage("topics_select_k", p, vec![corpus_path.clone()], TOPIC_OUTPUTS, |out| {
            validate_k_range(p.k_min, p.k_max)?;
            p.base.with_k(p.k_min).validate()?;
            let corpus = read_corpus(&corpus_path)?;
            let fitted: Vec<(TopicModel, SkewnessReport)> = (p.k_min..=p.k_max)
                .into_par_iter()
                .map(|k| {
                    let mut model = lda::fit(&corpus, p.base.with_k(k))?;
                    model.assignments.clear();
                    let report = count_nonpositive(&model)?;
                    info!("k = {k}: W_k = {}", report.w_k);
                    Ok((model, report))
                })
                .collect::<Result<_>>()?;
            let (models, reports): (Vec<_>, Vec<_>) = fitted.into_iter().unzip();
            let (best, scanned) = choose_k(&reports, p.patience).expect("k range is non-empty");
            info!("selected k = {}", reports[best].k);
            write_topic_outputs(out, &corpus, &models[best], &reports[..scanned])
        })
    }

    pub fn dominance(&mut self) -> Result<Outcome> {
        let proj = self.project.clone();
        let outputs = ["dominance.csv", "thresholds.csv"];
        let model_path = proj.artifact(MODEL);
        self.stage("topics_dominance", &json!({}), vec![model_path], &outputs, |out| {
            let a = dominant_topics(&load_model(&proj)?);
            write_csv(
                &out.join("dominance.csv"),
                &["post_id", "topics"],
                a.doc_ids.iter().zip(&a.dominant).map(|(id, set)| {
                    [id.clone(), join_topics(set)]
                }),
            )?;
            write_csv(
                &out.join("thresholds.csv"),
                &["topic", "mean", "sd", "threshold", "posts", "presence"],
                a.thresholds.iter().enumerate().map(|(t, &(mu, sd))| {
                    [
                        t.to_string(),
                        num(mu),
                        num(sd),
                        num(mu + sd),
                        a.presence_counts[t].to_string(),
                        num(a.topic_presence[t]),
                    ]
                }),
            )
        })
    }

    pub fn cooccur(&mut self) -> Result<Outcome> {
        let proj = self.project.clone();
        let model_path = proj.artifact(MODEL);
        self.stage("topics_cooccur", &json!({}), vec![model_path], &["cooccurrence.csv"], |out| {
            let m = cooccurrence(&dominant_topics(&load_model(&proj)?));
            let k = m.k();
            write_csv(
                &out.join("cooccurrence.csv"),
                &["i", "j", "count"],
                (0..k).flat_map(|i| (0..k).map(move |j| (i, j))).map(|(i, j)| {
                    [i.to_string(), j.to_string(), m.counts[i][j].to_string()]
                }),
            )
        })
    }

    pub fn timeline(&mut self) -> Result<Outcome> {
        let proj = self.project.clone();
        let inputs = vec![proj.artifact(DATASET), proj.artifact(MODEL)];
        self.stage("topics_timeline", &json!({}), inputs, &["monthly.csv"], |out| {
            let a = dominant_topics(&load_model(&proj)?);
            let monthly = monthly_distribution(&a, &load_dataset(&proj)?)?;
            let mut rows = Vec::new();
            for t in 0..a.k() {
                for (month, counts) in &monthly.months {
                    rows.push([t.to_string(), month.to_string(), counts[t].to_string()]);
                }
            }
            write_csv(&out.join("monthly.csv"), &["topic", "month", "count"], rows)
        })
    }

    pub fn lexicon(&mut self, p: &LexiconParams) -> Result<Outcome> {
        let proj = self.project.clone();
        let mut inputs = vec![proj.artifact(DATASET), proj.artifact(MODEL)];
        inputs.extend(p.lexicon.clone());
        let outputs = ["category_matrix.csv", "components.csv", "topicwise_profile.csv"];
        self.stage("lexicon_profile", p, inputs, &outputs, |out| {
            if p.components == 0 {
                return Err(Error::Usage("components must be at least 1".into()));
            }
            let lexicon = read_lexicon(p.lexicon.as_deref())?;
            let (d, model) = (load_dataset(&proj)?, load_model(&proj)?);
            let tokenizer = Tokenizer::default();
            let docs = model
                .doc_ids
                .iter()
                .map(|id| {
                    d.post(id)
                        .map(|post| tokenizer.tokenize(&post.text()))
                        .ok_or_else(|| Error::Data(format!("model post {id} not in dataset")))
                })
                .collect::<Result<Vec<_>>>()?;
            let matrix = categorize(&docs, &lexicon);
            let n_comp = if p.components > lexicon.len() {
                warn!(
                    "{} components requested but the lexicon has {} categories; using {}",
                    p.components,
                    lexicon.len(),
                    lexicon.len()
                );
                lexicon.len()
            } else {
                p.components
            };
            let result = pca(&matrix.rows, n_comp)?;
            if result.surplus_components > 0 {
                warn!(
                    "{} components exceed the rank of the category matrix",
                    result.surplus_components
                );
            }

            let mut header = vec!["post_id".to_string()];
            header.extend(matrix.categories.iter().cloned());
            write_csv(
                &out.join("category_matrix.csv"),
                &header.iter().map(String::as_str).collect::<Vec<_>>(),
                model.doc_ids.iter().zip(&matrix.rows).map(|(id, row)| {
                    std::iter::once(id.clone()).chain(row.iter().map(|&x| num(x)))
                }),
            )?;

            let mut header = vec![
                "component".to_string(),
                "explained_variance".into(),
                "explained_ratio".into(),
                "surplus".into(),
            ];
            header.extend(matrix.categories.iter().cloned());
            let first_surplus = result.components.len() - result.surplus_components;
            write_csv(
                &out.join("components.csv"),
                &header.iter().map(String::as_str).collect::<Vec<_>>(),
                result.components.iter().enumerate().map(|(c, v)| {
                    let ev = result.explained_variance[c];
                    let ratio = if result.total_variance > 0.0 {
                        num(ev / result.total_variance)
                    } else {
                        String::new()
                    };
                    [
                        (c + 1).to_string(),
                        num(ev),
                        ratio,
                        (c >= first_surplus).to_string(),
                    ]
                    .into_iter()
                    .chain(v.iter().map(|&x| num(x)))
                    .collect::<Vec<_>>()
                }),
            )?;

            let a = dominant_topics(&model);
            let profile = topicwise_profile(&result, &a)?;
            let mut header = vec!["topic".to_string(), "posts".into()];
            header.extend((1..=result.components.len()).map(|c| format!("pc{c}")));
            write_csv(
                &out.join("topicwise_profile.csv"),
                &header.iter().map(String::as_str).collect::<Vec<_>>(),
                profile.iter().enumerate().map(|(t, row)| {
                    let cells: Vec<String> = match row {
                        Some(r) => r.iter().map(|&x| num(x)).collect(),
                        None => vec![String::new(); result.components.len()],
                    };
                    [t.to_string(), a.presence_counts[t].to_string()]
                        .into_iter()
                        .chain(cells)
                        .collect::<Vec<_>>()
                }),
            )
        })
    }

    pub fn graph(&mut self) -> Result<Outcome> {
        let proj = self.project.clone();
        let inputs = vec![proj.artifact(DATASET)];
        self.stage("graph_build", &json!({}), inputs, &["edges.csv", "graph_summary.json"], |out| {
            let g = build_graph(&load_dataset(&proj)?);
            write_edges_csv(&out.join("edges.csv"), &g)?;
            let c = user_classes(&g);
            write_json(
                &out.join("graph_summary.json"),
                &json!({
                    "nodes": c.nodes,
                    "edges": g.edges.len(),
                    "total_weight": g.total_weight(),
                    "passive_users": c.passive,
                    "passive_pct": c.passive_pct,
                    "never_responded_users": c.never_responded,
                    "never_responded_pct": c.never_responded_pct,
                }),
            )
        })
    }

    pub fn export(&mut self, format: GraphFormat) -> Result<Outcome> {
        let proj = self.project.clone();
        let name = format!("graph_export_{}", format.name());
        let inputs = vec![proj.artifact(DATASET)];
        let file = format.file_name();
        self.stage(&name, &json!({ "format": format }), inputs, &[file], |out| {
            let g = build_graph(&load_dataset(&proj)?);
            write_graph(&out.join(file), &g, format)
        })
    }

    pub fn metrics(&mut self) -> Result<Outcome> {
        let proj = self.project.clone();
        let inputs = vec![proj.artifact(DATASET), proj.artifact(MODEL)];
        let outputs = ["metrics.csv", "spread_influence.csv"];
        self.stage("users_metrics", &json!({}), inputs, &outputs, |out| {
            let (_, metrics) = load_user_metrics(&proj)?;
            write_csv(
                &out.join("metrics.csv"),
                &[
                    "user",
                    "C",
                    "out_degree",
                    "in_degree",
                    "tau",
                    "R",
                    "alpha",
                    "I",
                    "agg_score",
                ],
                metrics.iter().map(|m| {
                    [
                        m.user.clone(),
                        m.comments.to_string(),
                        m.out_degree.to_string(),
                        m.in_degree.to_string(),
                        opt_num(m.tau),
                        num(m.reach),
                        num(m.alpha),
                        num(m.influence),
                        m.aggregate_comment_score.to_string(),
                    ]
                }),
            )?;
            write_csv(
                &out.join("spread_influence.csv"),
                &["user", "tau", "I", "log10_comments", "log10_agg_score"],
                spread_influence_rows(&metrics).iter().map(|r| {
                    [
                        r.user.clone(),
                        opt_num(r.tau),
                        num(r.influence),
                        num(r.log10_comments),
                        opt_num(r.log10_aggregate_score),
                    ]
                }),
            )
        })
    }

    pub fn top(&mut self, k: usize) -> Result<Outcome> {
        let proj = self.project.clone();
        let inputs = vec![proj.artifact(DATASET), proj.artifact(MODEL)];
        let outputs = [
            "top_influencers.csv",
            "top_influencers_edges.csv",
            "top_influencers.dot",
        ];
        self.stage("users_top", &json!({ "k": k }), inputs, &outputs, |out| {
            let (g, metrics) = load_user_metrics(&proj)?;
            let sub = top_influencers_subgraph(&g, &metrics, k)?;
            write_csv(
                &out.join("top_influencers.csv"),
                &["rank", "user", "I", "C", "R", "alpha", "tau"],
                rank_by_influence(&metrics).iter().take(k).enumerate().map(|(i, m)| {
                    [
                        (i + 1).to_string(),
                        m.user.clone(),
                        num(m.influence),
                        m.comments.to_string(),
                        num(m.reach),
                        num(m.alpha),
                        opt_num(m.tau),
                    ]
                }),
            )?;
            write_edges_csv(&out.join("top_influencers_edges.csv"), &sub)?;
            write_text(&out.join("top_influencers.dot"), &dot(&sub))
        })
    }

    pub fn report(&mut self) -> Result<Outcome> {
        let proj = self.project.clone();
        let inputs = vec![proj.artifact(DATASET), proj.artifact(CORPUS), proj.artifact(MODEL)];
        self.stage("report", &json!({}), inputs, &["report.json"], |out| {
            let d = load_dataset(&proj)?;
            let corpus = read_corpus(&proj.artifact(CORPUS))?;
            let model = read_model(&proj.artifact(MODEL), Some(&corpus))?;
            let a = dominant_topics(&model);
            let g = build_graph(&d);
            let mut metrics = user_metrics(&d, &g, &a);
            let w_k = count_nonpositive(&model)?.w_k;
            let topics = (0..model.k())
                .map(|t| {
                    let words = model
                        .top_words(t, TOP_WORDS)?
                        .into_iter()
                        .map(|w| corpus.vocabulary.term(w).to_string())
                        .collect::<Vec<_>>();
                    Ok(json!({
                        "topic": t,
                        "top_words": words,
                        "dominant_posts": a.presence_counts[t],
                        "presence": a.topic_presence[t],
                    }))
                })
                .collect::<Result<Vec<_>>>()?;
            let c = user_classes(&g);
            metrics.retain(|m| m.comments > 0);
            let top: Vec<Value> = rank_by_influence(&metrics)
                .into_iter()
                .take(10)
                .map(|m| json!({ "user": m.user, "I": m.influence, "C": m.comments, "tau": m.tau }))
                .collect();
            write_json(
                &out.join("report.json"),
                &json!({
                    "dataset": {
                        "posts": d.posts.len(),
                        "comments": d.comments.len(),
                        "authors": d.authors.len(),
                        "malformed_lines": d.tally.malformed(),
                        "duplicates": d.tally.duplicates(),
                        "outside_window": d.tally.outside_window,
                    },
                    "corpus": {
                        "documents": corpus.len(),
                        "vocabulary": corpus.vocabulary.len(),
                        "tokens": corpus.total_tokens,
                        "excluded_posts": corpus.excluded_doc_ids.len(),
                    },
                    "model": {
                        "k": model.k(),
                        "alpha": model.config.alpha,
                        "beta": model.config.beta,
                        "iterations": model.config.iterations,
                        "w_k": w_k,
                        "posts_without_dominant_topic": a.unassigned(),
                        "final_log_likelihood": model.log_likelihood_trace.last(),
                    },
                    "topics": topics,
                    "graph": {
                        "nodes": c.nodes,
                        "edges": g.edges.len(),
                        "total_weight": g.total_weight(),
                        "passive_pct": c.passive_pct,
                        "never_responded_pct": c.never_responded_pct,
                    },
                    "top_influencers": top,
                }),
            )
        })
    }

}

fn load_dataset(p: &Project) -> Result<Dataset> {
    read_json(&p.artifact(DATASET))
}

fn load_model(p: &Project) -> Result<TopicModel> {
    read_model(&p.artifact(MODEL), None)
}

fn load_user_metrics(p: &Project) -> Result<(InteractionGraph, Vec<UserMetrics>)> {
    let d = load_dataset(p)?;
    let a: DominantTopicAssignment = dominant_topics(&load_model(p)?);
    let g = build_graph(&d);
    let m = user_metrics(&d, &g, &a);
    Ok((g, m))
}

const TOPIC_OUTPUTS: &[&str] = &[MODEL, "topic_words.csv", "skewness.csv", "doc_skewness.csv"];

fn write_topic_outputs(
    out: &Path,
    corpus: &Corpus,
    model: &TopicModel,
    reports: &[SkewnessReport],
) -> Result<()> {
    write_model(&out.join(MODEL), model, corpus)?;
    let mut rows = Vec::new();
    for t in 0..model.k() {
        for (rank, w) in model.top_words(t, TOP_WORDS)?.into_iter().enumerate() {
            rows.push([
                t.to_string(),
                (rank + 1).to_string(),
                corpus.vocabulary.term(w).to_string(),
                num(model.phi[t][w as usize]),
            ]);
        }
    }
    write_csv(&out.join("topic_words.csv"), &["topic", "rank", "term", "probability"], rows)?;
    write_csv(
        &out.join("skewness.csv"),
        &["k", "W_k"],
        reports.iter().map(|r| [r.k.to_string(), r.w_k.to_string()]),
    )?;
    let chosen = reports
        .iter()
        .find(|r| r.k == model.k())
        .ok_or_else(|| Error::Internal("selected k has no report".into()))?;
    write_csv(
        &out.join("doc_skewness.csv"),
        &["post_id", "skewness"],
        model
            .doc_ids
            .iter()
            .zip(&chosen.per_doc_skewness)
            .map(|(id, s)| [id.clone(), opt_num(*s)]),
    )
}

fn join_topics(set: &[usize]) -> String {
    set.iter().map(usize::to_string).collect::<Vec<_>>().join(";")
}

pub fn write_graph(path: &Path, g: &InteractionGraph, format: GraphFormat) -> Result<()> {
    match format {
        GraphFormat::Csv => write_edges_csv(path, g),
        GraphFormat::Graphml => write_text(path, &graphml(g)),
        GraphFormat::Dot => write_text(path, &dot(g)),
    }
}
