//! Dataset assembly and platform activity statistics.
//!
//! Records arrive already decoded (see the `forum-pulse` crate for the JSONL
//! reader). [`DatasetBuilder`] validates them, drops duplicates and records
//! outside the time window, resolves reply parents and builds the author
//! table. The resulting [`Dataset`] is immutable and ordered by id.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use crate::is_sentinel_author;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

/// Pushshift prefix of a post fullname.
pub const POST_PREFIX: &str = "t3_";
/// Pushshift prefix of a comment fullname.
pub const COMMENT_PREFIX: &str = "t1_";

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Post {
    pub id: String,
    pub author: String,
    pub created_at: i64,
    pub score: i64,
    pub title: String,
    pub body: String,
}

impl Post {
    /// Title and body joined by a newline; the text that gets topic-modeled.
    pub fn text(&self) -> String {
        let mut s = String::with_capacity(self.title.len() + self.body.len() + 1);
        s.push_str(&self.title);
        s.push('\n');
        s.push_str(&self.body);
        s
    }
}

/// Where a comment's `parent_id` points once resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub enum Parent {
    /// Index into [`Dataset::posts`].
    Post(usize),
    /// Index into [`Dataset::comments`].
    Comment(usize),
    Dangling,
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Comment {
    pub id: String,
    pub author: String,
    pub created_at: i64,
    pub score: i64,
    pub body: String,
    /// Raw, possibly prefixed parent reference.
    pub parent_id: String,
    /// Id of the thread's post, prefix stripped.
    pub root_post_id: String,
    pub parent: Parent,
    /// Index into [`Dataset::posts`] of the thread's post, if present.
    pub root: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub enum AuthorCategory {
    OnlyPosting,
    OnlyCommenting,
    Both,
}

impl AuthorCategory {
    pub const ALL: [AuthorCategory; 3] = [Self::OnlyPosting, Self::OnlyCommenting, Self::Both];

    pub fn name(self) -> &'static str {
        match self {
            Self::OnlyPosting => "OnlyPosting",
            Self::OnlyCommenting => "OnlyCommenting",
            Self::Both => "Both",
        }
    }

    fn classify(post_count: usize, comment_count: usize) -> Option<Self> {
        match (post_count > 0, comment_count > 0) {
            (true, false) => Some(Self::OnlyPosting),
            (false, true) => Some(Self::OnlyCommenting),
            (true, true) => Some(Self::Both),
            (false, false) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct AuthorRecord {
    pub author: String,
    pub post_count: usize,
    pub comment_count: usize,
    pub category: AuthorCategory,
    pub aggregate_comment_score: i64,
}

/// Counters for records that did not make it into the dataset.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct IngestTally {
    pub malformed_posts: usize,
    pub malformed_comments: usize,
    pub duplicate_posts: usize,
    pub duplicate_comments: usize,
    pub outside_window: usize,
}

impl IngestTally {
    pub fn malformed(&self) -> usize {
        self.malformed_posts + self.malformed_comments
    }

    pub fn duplicates(&self) -> usize {
        self.duplicate_posts + self.duplicate_comments
    }
}

/// Half-open window `[from, to)` on `created_at`; either bound may be open.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct TimeWindow {
    pub from: Option<i64>,
    pub to: Option<i64>,
}

impl TimeWindow {
    pub fn contains(&self, t: i64) -> bool {
        self.from.is_none_or(|f| t >= f) && self.to.is_none_or(|e| t < e)
    }
}

/// A post record as decoded from a dump line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawPost {
    pub id: String,
    pub author: String,
    pub created_utc: i64,
    pub score: i64,
    pub title: String,
    pub selftext: String,
}

/// A comment record as decoded from a dump line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawComment {
    pub id: String,
    pub author: String,
    pub created_utc: i64,
    pub score: i64,
    pub body: String,
    pub parent_id: String,
    pub link_id: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecordKind {
    Post,
    Comment,
}

#[derive(Debug, Default)]
pub struct DatasetBuilder {
    window: TimeWindow,
    posts: Vec<Post>,
    comments: Vec<RawComment>,
    post_ids: BTreeSet<String>,
    comment_ids: BTreeSet<String>,
    tally: IngestTally,
}

fn strip_prefix<'a>(id: &'a str, prefix: &str) -> &'a str {
    id.strip_prefix(prefix).unwrap_or(id)
}

impl DatasetBuilder {
    pub fn new(window: TimeWindow) -> Self {
        Self {
            window,
            ..Self::default()
        }
    }

    /// Count a line that could not be decoded at all.
    pub fn record_malformed(&mut self, kind: RecordKind) {
        match kind {
            RecordKind::Post => self.tally.malformed_posts += 1,
            RecordKind::Comment => self.tally.malformed_comments += 1,
        }
    }

    pub fn push_post(&mut self, raw: RawPost) {
        if raw.id.is_empty() || raw.created_utc <= 0 {
            self.tally.malformed_posts += 1;
            return;
        }
        if !self.window.contains(raw.created_utc) {
            self.tally.outside_window += 1;
            return;
        }
        let id = String::from(strip_prefix(&raw.id, POST_PREFIX));
        if !self.post_ids.insert(id.clone()) {
            self.tally.duplicate_posts += 1;
            return;
        }
        self.posts.push(Post {
            id,
            author: raw.author,
            created_at: raw.created_utc,
            score: raw.score,
            title: raw.title,
            body: raw.selftext,
        });
    }

    pub fn push_comment(&mut self, mut raw: RawComment) {
        if raw.id.is_empty()
            || raw.created_utc <= 0
            || raw.parent_id.is_empty()
            || raw.link_id.is_empty()
        {
            self.tally.malformed_comments += 1;
            return;
        }
        if !self.window.contains(raw.created_utc) {
            self.tally.outside_window += 1;
            return;
        }
        raw.id = String::from(strip_prefix(&raw.id, COMMENT_PREFIX));
        if !self.comment_ids.insert(raw.id.clone()) {
            self.tally.duplicate_comments += 1;
            return;
        }
        self.comments.push(raw);
    }

    pub fn push(&mut self, record: Record) {
        match record {
            Record::Post(p) => self.push_post(p),
            Record::Comment(c) => self.push_comment(c),
        }
    }

    pub fn build(self) -> Dataset {
        let DatasetBuilder {
            mut posts,
            comments: raw_comments,
            tally,
            ..
        } = self;
        posts.sort_by(|a, b| a.id.cmp(&b.id));
        let mut raw_comments = raw_comments;
        raw_comments.sort_by(|a, b| a.id.cmp(&b.id));

        let post_index: BTreeMap<&str, usize> = posts
            .iter()
            .enumerate()
            .map(|(i, p)| (p.id.as_str(), i))
            .collect();
        let comment_index: BTreeMap<&str, usize> = raw_comments
            .iter()
            .enumerate()
            .map(|(i, c)| (c.id.as_str(), i))
            .collect();

        let resolve_parent = |parent_id: &str| -> Parent {
            if let Some(p) = parent_id.strip_prefix(POST_PREFIX) {
                post_index.get(p).map_or(Parent::Dangling, |&i| Parent::Post(i))
            } else if let Some(c) = parent_id.strip_prefix(COMMENT_PREFIX) {
                comment_index
                    .get(c)
                    .map_or(Parent::Dangling, |&i| Parent::Comment(i))
            } else if let Some(&i) = comment_index.get(parent_id) {
                Parent::Comment(i)
            } else {
                post_index.get(parent_id).map_or(Parent::Dangling, |&i| Parent::Post(i))
            }
        };

        let comments: Vec<Comment> = raw_comments
            .iter()
            .map(|raw| {
                let root_post_id = String::from(strip_prefix(&raw.link_id, POST_PREFIX));
                let root = post_index.get(root_post_id.as_str()).copied();
                Comment {
                    id: raw.id.clone(),
                    author: raw.author.clone(),
                    created_at: raw.created_utc,
                    score: raw.score,
                    body: raw.body.clone(),
                    parent_id: raw.parent_id.clone(),
                    parent: resolve_parent(&raw.parent_id),
                    root_post_id,
                    root,
                }
            })
            .collect();

        let dangling_refs = comments.iter().filter(|c| c.parent == Parent::Dangling).count();
        let dangling_roots = comments.iter().filter(|c| c.root.is_none()).count();
        let authors = author_table(&posts, &comments);

        Dataset {
            posts,
            comments,
            authors,
            dangling_refs,
            dangling_roots,
            tally,
        }
    }
}

/// A decoded record of either kind.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Record {
    Post(RawPost),
    Comment(RawComment),
}

fn author_table(posts: &[Post], comments: &[Comment]) -> Vec<AuthorRecord> {
    // (posts, comments, aggregate comment score)
    let mut acc: BTreeMap<&str, (usize, usize, i64)> = BTreeMap::new();
    for p in posts.iter().filter(|p| !is_sentinel_author(&p.author)) {
        acc.entry(&p.author).or_default().0 += 1;
    }
    for c in comments.iter().filter(|c| !is_sentinel_author(&c.author)) {
        let e = acc.entry(&c.author).or_default();
        e.1 += 1;
        e.2 += c.score;
    }
    acc.into_iter()
        .filter_map(|(author, (p, c, s))| {
            AuthorCategory::classify(p, c).map(|category| AuthorRecord {
                author: String::from(author),
                post_count: p,
                comment_count: c,
                category,
                aggregate_comment_score: s,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Dataset {
    /// Ordered by id.
    pub posts: Vec<Post>,
    /// Ordered by id.
    pub comments: Vec<Comment>,
    /// Ordered by author name; sentinel authors excluded.
    pub authors: Vec<AuthorRecord>,
    /// Comments whose parent is not in the dataset.
    pub dangling_refs: usize,
    /// Comments whose thread post is not in the dataset.
    pub dangling_roots: usize,
    pub tally: IngestTally,
}

impl Dataset {
    /// Assemble a dataset from decoded records in stream order.
    pub fn from_records<I>(records: I, window: TimeWindow) -> Self
    where
        I: IntoIterator<Item = Record>,
    {
        let mut b = DatasetBuilder::new(window);
        records.into_iter().for_each(|r| b.push(r));
        b.build()
    }

    pub fn is_empty(&self) -> bool {
        self.posts.is_empty() && self.comments.is_empty()
    }

    pub fn post_index(&self, id: &str) -> Option<usize> {
        self.posts.binary_search_by(|p| p.id.as_str().cmp(id)).ok()
    }

    pub fn comment_index(&self, id: &str) -> Option<usize> {
        self.comments.binary_search_by(|c| c.id.as_str().cmp(id)).ok()
    }

    pub fn post(&self, id: &str) -> Option<&Post> {
        self.post_index(id).map(|i| &self.posts[i])
    }

    /// Author of the record a comment replies to, if the parent resolved.
    pub fn parent_author(&self, c: &Comment) -> Option<&str> {
        match c.parent {
            Parent::Post(i) => Some(&self.posts[i].author),
            Parent::Comment(i) => Some(&self.comments[i].author),
            Parent::Dangling => None,
        }
    }

    pub fn parent_created_at(&self, c: &Comment) -> Option<i64> {
        match c.parent {
            Parent::Post(i) => Some(self.posts[i].created_at),
            Parent::Comment(i) => Some(self.comments[i].created_at),
            Parent::Dangling => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ActivityRow {
    pub category: AuthorCategory,
    pub authors: usize,
    pub posts: usize,
    pub comments: usize,
    pub authors_pct: f64,
    pub posts_pct: f64,
    pub comments_pct: f64,
}

fn pct(part: usize, whole: usize) -> f64 {
    if whole == 0 {
        0.0
    } else {
        100.0 * part as f64 / whole as f64
    }
}

/// Share of authors, posts and comments per author category, in the order
/// OnlyPosting, OnlyCommenting, Both. `None` when there are no authors.
///
/// Posts and comments by sentinel authors belong to no category and are not
/// part of the denominators.
pub fn author_activity_table(d: &Dataset) -> Option<[ActivityRow; 3]> {
    if d.authors.is_empty() {
        return None;
    }
    let mut rows = AuthorCategory::ALL.map(|category| ActivityRow {
        category,
        authors: 0,
        posts: 0,
        comments: 0,
        authors_pct: 0.0,
        posts_pct: 0.0,
        comments_pct: 0.0,
    });
    for a in &d.authors {
        let row = &mut rows[a.category as usize];
        row.authors += 1;
        row.posts += a.post_count;
        row.comments += a.comment_count;
    }
    let authors: usize = rows.iter().map(|r| r.authors).sum();
    let posts: usize = rows.iter().map(|r| r.posts).sum();
    let comments: usize = rows.iter().map(|r| r.comments).sum();
    for r in &mut rows {
        r.authors_pct = pct(r.authors, authors);
        r.posts_pct = pct(r.posts, posts);
        r.comments_pct = pct(r.comments, comments);
    }
    Some(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResponseTime {
    Seconds(i64),
    /// The reply predates its parent; the raw (negative) lapse is kept.
    Anomalous(i64),
    /// Parent not in the dataset.
    Undefined,
}

impl ResponseTime {
    pub fn seconds(self) -> Option<i64> {
        match self {
            Self::Seconds(s) => Some(s),
            _ => None,
        }
    }
}

/// Time between a comment and the post or comment it replies to.
pub fn response_time(c: &Comment, d: &Dataset) -> ResponseTime {
    match d.parent_created_at(c) {
        None => ResponseTime::Undefined,
        Some(t) if c.created_at >= t => ResponseTime::Seconds(c.created_at - t),
        Some(t) => ResponseTime::Anomalous(c.created_at - t),
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResponseTimes {
    /// (comment index, seconds, comment score) for every aggregated comment.
    pub samples: Vec<(usize, i64, i64)>,
    pub anomalies: usize,
    pub undefined: usize,
}

pub fn response_times(d: &Dataset) -> ResponseTimes {
    let mut out = ResponseTimes::default();
    for (i, c) in d.comments.iter().enumerate() {
        match response_time(c, d) {
            ResponseTime::Seconds(s) => out.samples.push((i, s, c.score)),
            ResponseTime::Anomalous(_) => out.anomalies += 1,
            ResponseTime::Undefined => out.undefined += 1,
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ScorePair {
    pub post_id: String,
    pub post_score: i64,
    pub max_comment_score: i64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRelations {
    /// One pair per post with at least one comment in its thread, post order.
    pub pairs: Vec<ScorePair>,
    pub posts_without_comments: usize,
    /// `None` when there are no posts.
    pub post_score_one_fraction: Option<f64>,
    /// `None` when there are no comments.
    pub comment_score_one_fraction: Option<f64>,
}

pub fn score_relations(d: &Dataset) -> ScoreRelations {
    let mut max_by_post: Vec<Option<i64>> = alloc::vec![None; d.posts.len()];
    for c in &d.comments {
        if let Some(r) = c.root {
            let slot = &mut max_by_post[r];
            *slot = Some(slot.map_or(c.score, |m| m.max(c.score)));
        }
    }
    let pairs = d
        .posts
        .iter()
        .zip(&max_by_post)
        .filter_map(|(p, m)| {
            m.map(|max_comment_score| ScorePair {
                post_id: p.id.clone(),
                post_score: p.score,
                max_comment_score,
            })
        })
        .collect();
    let fraction = |hits: usize, n: usize| (n > 0).then(|| hits as f64 / n as f64);
    ScoreRelations {
        pairs,
        posts_without_comments: max_by_post.iter().filter(|m| m.is_none()).count(),
        post_score_one_fraction: fraction(
            d.posts.iter().filter(|p| p.score == 1).count(),
            d.posts.len(),
        ),
        comment_score_one_fraction: fraction(
            d.comments.iter().filter(|c| c.score == 1).count(),
            d.comments.len(),
        ),
    }
}
