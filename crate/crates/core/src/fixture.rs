//! Deterministic synthetic dumps for tests and demos.
//!
//! Posts are written from `k_true` topics with disjoint vocabularies; each
//! post gets a reply tree whose commenters are drawn from a skewed user
//! population so that a few prolific users stand out.

use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};
use crate::ingest::{RawComment, RawPost, COMMENT_PREFIX, POST_PREFIX};
use crate::rng;

/// 2021-01-01T00:00:00Z
pub const EPOCH_START: i64 = 1_609_459_200;
const YEAR_SECS: i64 = 365 * 24 * 3600;

const THEMES: [&[&str]; 8] = [
    &[
        "credit", "card", "debt", "bill", "payment", "limit", "collection", "balance",
        "statement", "apr", "minimum", "overdue", "issuer", "cashback", "rewards", "score",
        "utilization", "transfer", "chargeoff", "billing",
    ],
    &[
        "house", "home", "rent", "apartment", "landlord", "lease", "mortgage", "downpayment",
        "closing", "realtor", "property", "escrow", "appraisal", "condo", "tenant", "deposit",
        "roommate", "neighborhood", "inspection", "renovation",
    ],
    &[
        "job", "salary", "offer", "company", "employer", "raise", "promotion", "interview",
        "manager", "career", "hourly", "overtime", "bonus", "contract", "resume", "hiring",
        "coworker", "paycheck", "benefits", "severance",
    ],
    &[
        "tax", "income", "refund", "irs", "deduction", "filing", "withholding", "bracket",
        "return", "audit", "exemption", "taxable", "dependent", "accountant", "w2", "1099",
        "quarterly", "liability", "credits", "agi",
    ],
    &[
        "car", "vehicle", "insurance", "dealer", "leasing", "loan", "truck", "mileage",
        "premium", "accident", "repair", "mechanic", "trade", "financing", "engine", "dealership",
        "policy", "deductible", "sedan", "warranty",
    ],
    &[
        "stock", "invest", "fund", "index", "portfolio", "retirement", "roth", "ira",
        "brokerage", "dividend", "etf", "shares", "market", "allocation", "bonds", "vanguard",
        "fidelity", "compound", "returns", "401k",
    ],
    &[
        "bank", "account", "checking", "overdraft", "branch", "teller", "fraud", "dispute",
        "wire", "atm", "routing", "savings", "interest", "customer", "service", "hold",
        "chargeback", "unauthorized", "zelle", "cashier",
    ],
    &[
        "family", "parent", "mom", "dad", "wedding", "divorce", "kids", "childcare",
        "inheritance", "sibling", "spouse", "husband", "wife", "funeral", "support", "relatives",
        "grandma", "custody", "baby", "tuition",
    ],
];

const FILLER: [&str; 16] = [
    "the", "and", "my", "is", "to", "of", "it", "for", "in", "that", "was", "with", "so", "but",
    "have", "this",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixtureConfig {
    pub seed: u64,
    pub n_posts: usize,
    pub n_users: usize,
    pub k_true: usize,
    /// Average number of comments per post.
    pub mean_comments: f64,
}

impl FixtureConfig {
    pub fn new(seed: u64, n_posts: usize, n_users: usize, k_true: usize) -> Self {
        Self {
            seed,
            n_posts,
            n_users,
            k_true,
            mean_comments: 4.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntheticDump {
    pub posts: Vec<RawPost>,
    pub comments: Vec<RawComment>,
    /// Generating topic of each post.
    pub post_topics: Vec<usize>,
}

/// Vocabulary of generated topic `t`: one of the built-in themes, or
/// synthetic words beyond them.
pub fn topic_vocabulary(t: usize) -> Vec<String> {
    if let Some(theme) = THEMES.get(t) {
        theme.iter().map(|w| String::from(*w)).collect()
    } else {
        (0..20).map(|j| alloc::format!("topic{t}term{j}")).collect()
    }
}

fn pick<'a, T>(rng: &mut ChaCha8Rng, xs: &'a [T]) -> &'a T {
    &xs[rng.gen_range(0..xs.len())]
}

/// Zipf-like word choice so that a few words lead each topic.
fn topic_word<'a>(rng: &mut ChaCha8Rng, words: &'a [String]) -> &'a str {
    let n = words.len() as f64;
    let u: f64 = rng.gen();
    let i = (libm::pow(n + 1.0, u) - 1.0) as usize;
    &words[i.min(words.len() - 1)]
}

fn sentence(rng: &mut ChaCha8Rng, words: &[String], len: usize) -> String {
    let mut s = String::new();
    for i in 0..len {
        if i > 0 {
            s.push(' ');
        }
        if rng.gen_bool(0.3) {
            s.push_str(pick(rng, &FILLER));
            s.push(' ');
        }
        s.push_str(topic_word(rng, words));
    }
    s
}

/// Skewed user pick: low indices are far more active.
fn user(rng: &mut ChaCha8Rng, n_users: usize) -> String {
    let u: f64 = rng.gen();
    let i = ((libm::pow(n_users as f64 + 1.0, u * u) - 1.0) as usize).min(n_users - 1);
    alloc::format!("user{i:04}")
}

fn score(rng: &mut ChaCha8Rng, p_one: f64) -> i64 {
    if rng.gen_bool(p_one) {
        1
    } else {
        libm::pow(10.0, rng.gen_range(0.0..3.0)) as i64 + 1
    }
}

pub fn generate(config: &FixtureConfig) -> Result<SyntheticDump> {
    if config.n_posts == 0 || config.n_users == 0 || config.k_true == 0 {
        return Err(invalid!("fixture sizes must be positive"));
    }
    if config.mean_comments.is_nan() || config.mean_comments < 0.0 {
        return Err(invalid!("mean_comments must be non-negative"));
    }
    let mut rng = rng::stream(config.seed, "fixture");
    let vocab: Vec<Vec<String>> = (0..config.k_true).map(topic_vocabulary).collect();
    let mut posts = Vec::with_capacity(config.n_posts);
    let mut comments: Vec<RawComment> = Vec::new();
    let mut post_topics = Vec::with_capacity(config.n_posts);

    for i in 0..config.n_posts {
        let topic = i % config.k_true;
        let words = &vocab[topic];
        let id = alloc::format!("p{i:05}");
        let created = EPOCH_START + rng.gen_range(0..YEAR_SECS);
        let post_author = user(&mut rng, config.n_users);
        let title_len = rng.gen_range(3..7);
        let body_len = rng.gen_range(25..46);
        posts.push(RawPost {
            id: id.clone(),
            author: post_author,
            created_utc: created,
            score: score(&mut rng, 0.9),
            title: sentence(&mut rng, words, title_len),
            selftext: sentence(&mut rng, words, body_len),
        });
        post_topics.push(topic);

        let n_comments = rng.gen_range(0.0..=2.0 * config.mean_comments) as usize;
        // (comment id, created) of this thread so far
        let mut thread: Vec<(String, i64)> = Vec::with_capacity(n_comments);
        for _ in 0..n_comments {
            let (parent_id, parent_time) = if thread.is_empty() || rng.gen_bool(0.6) {
                (alloc::format!("{POST_PREFIX}{id}"), created)
            } else {
                let (cid, t) = pick(&mut rng, &thread);
                (alloc::format!("{COMMENT_PREFIX}{cid}"), *t)
            };
            let delay = libm::pow(2.0, rng.gen_range(5.0..16.0)) as i64;
            let cid = alloc::format!("c{:06}", comments.len());
            let author = if rng.gen_bool(0.02) {
                String::from("[deleted]")
            } else {
                user(&mut rng, config.n_users)
            };
            let body_len = rng.gen_range(5..16);
            comments.push(RawComment {
                id: cid.clone(),
                author,
                created_utc: parent_time + delay,
                score: score(&mut rng, 0.7),
                body: sentence(&mut rng, words, body_len),
                parent_id,
                link_id: alloc::format!("{POST_PREFIX}{id}"),
            });
            thread.push((cid, parent_time + delay));
        }
    }
    Ok(SyntheticDump {
        posts,
        comments,
        post_topics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::tokenize;
    use crate::ingest::{Dataset, Record, TimeWindow};
    use crate::interaction::build_graph;
    use alloc::collections::BTreeSet;

    #[test]
    fn same_seed_same_dump() {
        let c = FixtureConfig::new(3, 40, 10, 4);
        assert_eq!(generate(&c).unwrap(), generate(&c).unwrap());
        assert_ne!(generate(&c).unwrap(), generate(&FixtureConfig { seed: 4, ..c }).unwrap());
    }

    #[test]
    fn themes_are_disjoint_and_not_stopwords() {
        let mut seen = BTreeSet::new();
        for t in 0..12 {
            for w in topic_vocabulary(t) {
                assert_eq!(tokenize(&w), alloc::vec![w.clone()], "{w}");
                assert!(seen.insert(w.clone()), "{w} repeats");
            }
        }
    }

    #[test]
    fn single_user_has_no_edges() {
        let dump = generate(&FixtureConfig::new(1, 30, 1, 2)).unwrap();
        let records = dump
            .posts
            .into_iter()
            .map(Record::Post)
            .chain(dump.comments.into_iter().map(Record::Comment));
        let d = Dataset::from_records(records, TimeWindow::default());
        assert!(!d.comments.is_empty());
        assert!(build_graph(&d).edges.is_empty());
    }

    #[test]
    fn replies_follow_parents_in_time() {
        let dump = generate(&FixtureConfig::new(9, 50, 20, 3)).unwrap();
        let records = dump
            .posts
            .into_iter()
            .map(Record::Post)
            .chain(dump.comments.into_iter().map(Record::Comment));
        let d = Dataset::from_records(records, TimeWindow::default());
        assert_eq!(d.dangling_refs, 0);
        assert!(d.comments.iter().all(|c| crate::ingest::response_time(c, &d).seconds().unwrap() > 0));
    }

    #[test]
    fn rejects_zero_sizes() {
        assert!(generate(&FixtureConfig::new(1, 0, 1, 1)).is_err());
        assert!(generate(&FixtureConfig::new(1, 1, 0, 1)).is_err());
        assert!(generate(&FixtureConfig::new(1, 1, 1, 0)).is_err());
    }
}
