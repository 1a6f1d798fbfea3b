use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use forum_pulse::error::{exit, Error, Result};
use forum_pulse::jsonl::write_dump;
use forum_pulse::manifest::Project;
use forum_pulse::pipeline::{parse_override, run_pipeline, DEFAULT_K_MAX, DEFAULT_K_MIN};
use forum_pulse::stages::{GraphFormat, IngestParams, LexiconParams, Runner, SelectParams};
use forum_pulse_core::corpus::{
    CorpusConfig, DEFAULT_MAX_DF_FRACTION, DEFAULT_MIN_DF, DEFAULT_PHRASE_MIN_COUNT,
};
use forum_pulse_core::fixture::{generate, FixtureConfig};
use forum_pulse_core::lda::{LdaConfig, DEFAULT_BETA, DEFAULT_BURN_IN, DEFAULT_ITERATIONS};
use forum_pulse_core::lexicon::DEFAULT_COMPONENTS;
use forum_pulse_core::rng::derive_seed;

const AFTER_HELP: &str = "\
Artifacts are written to <PROJECT>/artifacts and every stage is recorded in
<PROJECT>/manifest.json. All tables are UTF-8 CSV with a header row:

  activity.csv            category,authors,posts,comments,authors_pct,posts_pct,comments_pct
  score_relations.csv     post_id,post_score,max_comment_score
  response_times.csv      comment_id,seconds,score
  vocabulary.csv          term_id,term,document_frequency
  topic_words.csv         topic,rank,term,probability
  skewness.csv            k,W_k
  doc_skewness.csv        post_id,skewness
  dominance.csv           post_id,topics (';'-separated)
  thresholds.csv          topic,mean,sd,threshold,posts,presence
  cooccurrence.csv        i,j,count
  monthly.csv             topic,month (YYYY-MM),count
  category_matrix.csv     post_id,<category>...
  components.csv          component,explained_variance,explained_ratio,surplus,<category>...
  topicwise_profile.csv   topic,posts,pc1...
  edges.csv, graph.csv    from,to,weight
  metrics.csv             user,C,out_degree,in_degree,tau,R,alpha,I,agg_score
  spread_influence.csv    user,tau,I,log10_comments,log10_agg_score
  top_influencers.csv     rank,user,I,C,R,alpha,tau

Undefined values are empty cells.
Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.";

#[derive(Parser)]
#[command(name = "forum-pulse", version, about = "Topic, influence and interaction analytics for forum dumps", after_help = AFTER_HELP)]
struct Cli {
    /// Project directory holding artifacts/ and manifest.json.
    #[arg(long, global = true, default_value = ".")]
    project: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "FORUM_PULSE_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse post and comment dumps into artifacts/dataset.json.
    Ingest {
        #[arg(long)]
        posts: PathBuf,
        #[arg(long)]
        comments: PathBuf,
        /// Inclusive lower bound on created_utc.
        #[arg(long)]
        from: Option<i64>,
        /// Exclusive upper bound on created_utc.
        #[arg(long)]
        to: Option<i64>,
    },
    /// Activity table, score relations and response times.
    Stats,
    #[command(subcommand)]
    Topics(TopicsCommand),
    #[command(subcommand)]
    Lexicon(LexiconCommand),
    #[command(subcommand)]
    Users(UsersCommand),
    #[command(subcommand)]
    Graph(GraphCommand),
    /// Summary of all analyses as report.json.
    Report,
    /// Write a synthetic posts/comments dump pair.
    Fixture {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        posts: usize,
        #[arg(long, default_value_t = 60)]
        users: usize,
        #[arg(long, default_value_t = 4)]
        k_true: usize,
        /// Output directory for posts.jsonl and comments.jsonl.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the whole pipeline from a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Override the run seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Fix the topic count and skip model selection.
        #[arg(long)]
        k: Option<usize>,
        /// Override any config key, e.g. --set lda.iterations=200.
        #[arg(long = "set", value_name = "KEY=VALUE", value_parser = parse_override)]
        overrides: Vec<(String, serde_json::Value)>,
    },
}

#[derive(Args)]
struct CorpusArgs {
    #[arg(long, default_value_t = DEFAULT_MIN_DF)]
    min_df: usize,
    #[arg(long, default_value_t = DEFAULT_MAX_DF_FRACTION)]
    max_df: f64,
    /// Minimum bigram count for phrase merging; 0 disables.
    #[arg(long, default_value_t = DEFAULT_PHRASE_MIN_COUNT)]
    phrase_min_count: usize,
}

#[derive(Args)]
struct LdaArgs {
    /// Run seed; the sampler seed is derived from it.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_ITERATIONS)]
    iters: usize,
    #[arg(long, default_value_t = DEFAULT_BURN_IN)]
    burn_in: usize,
    /// Document-topic prior (default 50/k).
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_BETA)]
    beta: f64,
}

impl LdaArgs {
    fn config(&self, k: usize) -> LdaConfig {
        let mut c = LdaConfig::new(k, derive_seed(self.seed, "lda"));
        if let Some(a) = self.alpha {
            c.alpha = a;
        }
        c.beta = self.beta;
        c.iterations = self.iters;
        c.burn_in = self.burn_in;
        c
    }
}

#[derive(Subcommand)]
enum TopicsCommand {
    /// Fit a topic model with a fixed number of topics.
    Fit {
        #[arg(long)]
        k: usize,
        #[command(flatten)]
        lda: LdaArgs,
        #[command(flatten)]
        corpus: CorpusArgs,
    },
    /// Fit every k in a range and keep the one with the fewest
    /// non-positively skewed posts.
    SelectK {
        #[arg(long, default_value_t = DEFAULT_K_MIN)]
        kmin: usize,
        #[arg(long, default_value_t = DEFAULT_K_MAX)]
        kmax: usize,
        /// Stop after this many k values without improvement.
        #[arg(long)]
        patience: Option<usize>,
        #[command(flatten)]
        lda: LdaArgs,
        #[command(flatten)]
        corpus: CorpusArgs,
    },
    /// Dominant topics per post and per-topic thresholds.
    Dominance,
    /// Topic co-occurrence counts.
    Cooccur,
    /// Dominant-topic counts per calendar month.
    Timeline,
}

#[derive(Subcommand)]
enum LexiconCommand {
    /// Category scores and their principal components.
    Profile {
        /// JSON object of category -> words (default: bundled demo lexicon).
        #[arg(long)]
        lexicon: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_COMPONENTS)]
        components: usize,
    },
}

#[derive(Subcommand)]
enum UsersCommand {
    /// Per-user topic spread, reach, contribution and influence.
    Metrics,
    /// Top influencers and their interaction neighborhood.
    Top {
        #[arg(long, default_value_t = 10)]
        k: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Graphml,
    Dot,
}

#[derive(Subcommand)]
enum GraphCommand {
    /// Build the reply graph and its edge list.
    Build,
    /// Export the reply graph.
    Export {
        #[arg(long, value_enum)]
        format: FormatArg,
    },
}

fn corpus_config(a: &CorpusArgs) -> CorpusConfig {
    CorpusConfig {
        min_df: a.min_df,
        max_df_fraction: a.max_df,
        phrase_min_count: a.phrase_min_count,
    }
}

fn write_fixture(seed: u64, posts: usize, users: usize, k_true: usize, out: &Path) -> Result<()> {
    let dump = generate(&FixtureConfig::new(seed, posts, users, k_true))
        .map_err(|e| Error::Usage(e.to_string()))?;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let (pp, cp) = (out.join("posts.jsonl"), out.join("comments.jsonl"));
    let create = |p: &Path| File::create(p).map(BufWriter::new).map_err(|e| Error::io(p, e));
    write_dump(&dump, create(&pp)?, create(&cp)?).map_err(|e| Error::io(out, e))
}

fn execute(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Internal(e.to_string()))?;
    }
    let runner = || Runner::open(Project::new(&cli.project), true);
    match cli.command {
        Command::Fixture {
            seed,
            posts,
            users,
            k_true,
            out,
        } => write_fixture(seed, posts, users, k_true, &out),
        Command::Run {
            config,
            seed,
            k,
            mut overrides,
        } => {
            if let Some(s) = seed {
                overrides.push(("seed".into(), s.into()));
            }
            if let Some(k) = k {
                overrides.push(("topics.k".into(), k.into()));
            }
            let s = run_pipeline(&config, &cli.project, &overrides)?;
            log::info!("{} stages ran, {} skipped", s.ran.len(), s.skipped.len());
            Ok(())
        }
        Command::Ingest {
            posts,
            comments,
            from,
            to,
        } => runner()?
            .ingest(&IngestParams {
                posts,
                comments,
                from,
                to,
            })
            .map(drop),
        Command::Stats => runner()?.stats().map(drop),
        Command::Report => runner()?.report().map(drop),
        Command::Topics(t) => {
            let mut r = runner()?;
            match t {
                TopicsCommand::Fit { k, lda, corpus } => {
                    r.force = false;
                    r.corpus(&corpus_config(&corpus))?;
                    r.force = true;
                    r.fit(&lda.config(k)).map(drop)
                }
                TopicsCommand::SelectK {
                    kmin,
                    kmax,
                    patience,
                    lda,
                    corpus,
                } => {
                    r.force = false;
                    r.corpus(&corpus_config(&corpus))?;
                    r.force = true;
                    r.select_k(&SelectParams {
                        k_min: kmin,
                        k_max: kmax,
                        patience,
                        base: lda.config(kmin),
                    })
                    .map(drop)
                }
                TopicsCommand::Dominance => r.dominance().map(drop),
                TopicsCommand::Cooccur => r.cooccur().map(drop),
                TopicsCommand::Timeline => r.timeline().map(drop),
            }
        }
        Command::Lexicon(LexiconCommand::Profile {
            lexicon,
            components,
        }) => runner()?
            .lexicon(&LexiconParams {
                lexicon,
                components,
            })
            .map(drop),
        Command::Users(UsersCommand::Metrics) => runner()?.metrics().map(drop),
        Command::Users(UsersCommand::Top { k }) => runner()?.top(k).map(drop),
        Command::Graph(GraphCommand::Build) => runner()?.graph().map(drop),
        Command::Graph(GraphCommand::Export { format }) => {
            let f = match format {
                FormatArg::Csv => GraphFormat::Csv,
                FormatArg::Graphml => GraphFormat::Graphml,
                FormatArg::Dot => GraphFormat::Dot,
            };
            runner()?.export(f).map(drop)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::USAGE } else { exit::SUCCESS } as u8);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::from(exit::SUCCESS as u8),
        Err(e) => {
            log::error!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
