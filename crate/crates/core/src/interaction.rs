//! Directed user interaction graph and per-user influence metrics.
//!
//! An edge A -> B carries the number of replies A wrote to B's posts or
//! comments. Self-replies and replies to unresolved parents make no edge.
//!
//! Per commenter A with C(A) comments (all of them, including self-replies
//! and replies to missing parents):
//! - topic spread `tau = sum over s_i > 0 of 1 / s_i^2`, where `s_i` is the
//!   fraction of A's comments on dominant-topic posts that went to topic `i`
//!   (a post with m dominant topics gives 1/m to each),
//! - reach `R = out_degree / C`,
//! - contribution `alpha = C / max C`,
//! - influence `I = alpha * R`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Result};
use crate::ingest::Dataset;
use crate::is_sentinel_author;
use crate::topics::DominantTopicAssignment;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub weight: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct InteractionGraph {
    /// Sorted user names.
    pub nodes: Vec<String>,
    /// Sorted by (from, to).
    pub edges: Vec<Edge>,
    /// Distinct targets per node.
    pub out_degree: Vec<usize>,
    /// Distinct sources per node.
    pub in_degree: Vec<usize>,
}

impl InteractionGraph {
    fn from_named_edges(weights: BTreeMap<(&str, &str), u64>) -> Self {
        let names: BTreeSet<&str> = weights.keys().flat_map(|&(a, b)| [a, b]).collect();
        let nodes: Vec<String> = names.into_iter().map(String::from).collect();
        let idx = |n: &str| nodes.binary_search_by(|x| x.as_str().cmp(n)).unwrap();
        let mut edges: Vec<Edge> = weights
            .iter()
            .map(|(&(a, b), &w)| Edge { from: idx(a), to: idx(b), weight: w })
            .collect();
        edges.sort();
        let mut out_degree = vec![0; nodes.len()];
        let mut in_degree = vec![0; nodes.len()];
        for e in &edges {
            out_degree[e.from] += 1;
            in_degree[e.to] += 1;
        }
        Self { nodes, edges, out_degree, in_degree }
    }

    pub fn node_index(&self, user: &str) -> Option<usize> {
        self.nodes.binary_search_by(|x| x.as_str().cmp(user)).ok()
    }

    pub fn weight(&self, from: &str, to: &str) -> Option<u64> {
        let (f, t) = (self.node_index(from)?, self.node_index(to)?);
        self.edges
            .binary_search_by(|e| (e.from, e.to).cmp(&(f, t)))
            .ok()
            .map(|i| self.edges[i].weight)
    }

    pub fn out_degree_of(&self, user: &str) -> usize {
        self.node_index(user).map_or(0, |i| self.out_degree[i])
    }

    pub fn in_degree_of(&self, user: &str) -> usize {
        self.node_index(user).map_or(0, |i| self.in_degree[i])
    }

    pub fn total_weight(&self) -> u64 {
        self.edges.iter().map(|e| e.weight).sum()
    }

    /// Nodes adjacent to `node` in either direction.
    pub fn neighbors(&self, node: usize) -> BTreeSet<usize> {
        self.edges
            .iter()
            .filter_map(|e| {
                if e.from == node {
                    Some(e.to)
                } else if e.to == node {
                    Some(e.from)
                } else {
                    None
                }
            })
            .collect()
    }

    /// Subgraph induced by `keep` (node indices); degrees are recomputed
    /// within it.
    pub fn induced(&self, keep: &BTreeSet<usize>) -> Self {
        let weights = self
            .edges
            .iter()
            .filter(|e| keep.contains(&e.from) && keep.contains(&e.to))
            .map(|e| ((self.nodes[e.from].as_str(), self.nodes[e.to].as_str()), e.weight))
            .collect();
        let mut g = Self::from_named_edges(weights);
        // Keep isolated members of `keep` as nodes.
        let present: BTreeSet<&str> = g.nodes.iter().map(String::as_str).collect();
        let missing: Vec<String> = keep
            .iter()
            .map(|&i| self.nodes[i].as_str())
            .filter(|n| !present.contains(n))
            .map(String::from)
            .collect();
        if !missing.is_empty() {
            let mut all: Vec<String> = g.nodes.clone();
            all.extend(missing);
            all.sort();
            let remap: Vec<usize> = g
                .nodes
                .iter()
                .map(|n| all.binary_search(n).unwrap())
                .collect();
            let mut out_degree = vec![0; all.len()];
            let mut in_degree = vec![0; all.len()];
            for e in &mut g.edges {
                e.from = remap[e.from];
                e.to = remap[e.to];
                out_degree[e.from] += 1;
                in_degree[e.to] += 1;
            }
            g.edges.sort();
            g.nodes = all;
            g.out_degree = out_degree;
            g.in_degree = in_degree;
        }
        g
    }
}

/// One edge per (replier, replied-to) pair of distinct, non-sentinel users.
pub fn build_graph(d: &Dataset) -> InteractionGraph {
    let mut weights: BTreeMap<(&str, &str), u64> = BTreeMap::new();
    for c in &d.comments {
        if is_sentinel_author(&c.author) {
            continue;
        }
        let Some(target) = d.parent_author(c) else { continue };
        if is_sentinel_author(target) || target == c.author {
            continue;
        }
        *weights.entry((c.author.as_str(), target)).or_default() += 1;
    }
    InteractionGraph::from_named_edges(weights)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserClasses {
    pub nodes: usize,
    /// Out-degree 0.
    pub passive: usize,
    /// In-degree 0.
    pub never_responded: usize,
    pub passive_pct: f64,
    pub never_responded_pct: f64,
}

pub fn user_classes(g: &InteractionGraph) -> UserClasses {
    let nodes = g.nodes.len();
    let passive = g.out_degree.iter().filter(|&&d| d == 0).count();
    let never_responded = g.in_degree.iter().filter(|&&d| d == 0).count();
    let pct = |n: usize| if nodes == 0 { 0.0 } else { 100.0 * n as f64 / nodes as f64 };
    UserClasses {
        nodes,
        passive,
        never_responded,
        passive_pct: pct(passive),
        never_responded_pct: pct(never_responded),
    }
}

/// Topic spread from the dominant-topic sets of the posts a user commented
/// on (one entry per comment). Posts without dominant topics are ignored.
///
/// Returns `(tau, s)` with `s` of length `k`, or `None` when no comment
/// landed on a post with a dominant topic.
pub fn topic_spread(commented: &[&[usize]], k: usize) -> Option<(f64, Vec<f64>)> {
    let mut share = vec![0.0; k];
    let mut counted = 0usize;
    for set in commented.iter().filter(|s| !s.is_empty()) {
        counted += 1;
        let w = 1.0 / set.len() as f64;
        for &t in set.iter() {
            share[t] += w;
        }
    }
    if counted == 0 {
        return None;
    }
    let n = counted as f64;
    share.iter_mut().for_each(|s| *s /= n);
    let tau = share.iter().filter(|&&s| s > 0.0).map(|&s| 1.0 / (s * s)).sum();
    Some((tau, share))
}

/// Distinct users replied to per comment; `None` for non-commenters.
pub fn reach(out_degree: usize, comments: usize) -> Option<f64> {
    (comments > 0).then(|| out_degree as f64 / comments as f64)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct UserMetrics {
    pub user: String,
    /// Total comments made.
    pub comments: usize,
    pub out_degree: usize,
    pub in_degree: usize,
    /// `None` when the user never commented on a dominant-topic post.
    pub tau: Option<f64>,
    pub reach: f64,
    pub alpha: f64,
    pub influence: f64,
    pub aggregate_comment_score: i64,
    /// Per-topic comment fractions `s_i` (all zero when `tau` is `None`).
    pub topic_fractions: Vec<f64>,
}

/// Fill contribution and influence from the global maximum comment count.
pub fn contribution_and_influence(metrics: &mut [UserMetrics]) {
    let Some(max_c) = metrics.iter().map(|m| m.comments).max() else {
        return;
    };
    if max_c == 0 {
        return;
    }
    for m in metrics.iter_mut() {
        m.alpha = m.comments as f64 / max_c as f64;
        m.influence = m.alpha * m.reach;
    }
}

/// Metrics for every non-sentinel user with at least one comment, sorted by
/// user name. `dominance` supplies the dominant topics of modeled posts.
pub fn user_metrics(
    d: &Dataset,
    g: &InteractionGraph,
    dominance: &DominantTopicAssignment,
) -> Vec<UserMetrics> {
    let k = dominance.k();
    let by_post: BTreeMap<&str, &[usize]> = dominance
        .doc_ids
        .iter()
        .map(String::as_str)
        .zip(dominance.dominant.iter().map(Vec::as_slice))
        .collect();

    // user -> (comment count, aggregate score, dominant sets commented on)
    let mut per_user: BTreeMap<&str, (usize, i64, Vec<&[usize]>)> = BTreeMap::new();
    for c in d.comments.iter().filter(|c| !is_sentinel_author(&c.author)) {
        let e = per_user.entry(&c.author).or_default();
        e.0 += 1;
        e.1 += c.score;
        if let Some(set) = by_post.get(c.root_post_id.as_str()) {
            e.2.push(set);
        }
    }

    let mut metrics: Vec<UserMetrics> = per_user
        .into_iter()
        .map(|(user, (comments, score, sets))| {
            let out_degree = g.out_degree_of(user);
            let (tau, topic_fractions) = match topic_spread(&sets, k) {
                Some((t, s)) => (Some(t), s),
                None => (None, vec![0.0; k]),
            };
            UserMetrics {
                user: String::from(user),
                comments,
                out_degree,
                in_degree: g.in_degree_of(user),
                tau,
                reach: reach(out_degree, comments).unwrap_or(0.0),
                alpha: 0.0,
                influence: 0.0,
                aggregate_comment_score: score,
                topic_fractions,
            }
        })
        .collect();
    contribution_and_influence(&mut metrics);
    metrics
}

/// Row of the topic-spread versus influence scatter.
#[derive(Debug, Clone, PartialEq)]
pub struct SpreadInfluenceRow {
    pub user: String,
    pub tau: Option<f64>,
    pub influence: f64,
    pub log10_comments: f64,
    /// `None` when the aggregate score is not positive.
    pub log10_aggregate_score: Option<f64>,
}

pub fn spread_influence_rows(metrics: &[UserMetrics]) -> Vec<SpreadInfluenceRow> {
    metrics
        .iter()
        .map(|m| SpreadInfluenceRow {
            user: m.user.clone(),
            tau: m.tau,
            influence: m.influence,
            log10_comments: libm::log10(m.comments as f64),
            log10_aggregate_score: (m.aggregate_comment_score > 0)
                .then(|| libm::log10(m.aggregate_comment_score as f64)),
        })
        .collect()
}

/// Users ranked by influence, then comment count (both descending), then name.
pub fn rank_by_influence(metrics: &[UserMetrics]) -> Vec<&UserMetrics> {
    let mut ranked: Vec<&UserMetrics> = metrics.iter().collect();
    ranked.sort_by(|a, b| {
        b.influence
            .total_cmp(&a.influence)
            .then(b.comments.cmp(&a.comments))
            .then(a.user.cmp(&b.user))
    });
    ranked
}

/// The top `k` influencers together with all their direct neighbors, and
/// every edge among those users.
pub fn top_influencers_subgraph(
    g: &InteractionGraph,
    metrics: &[UserMetrics],
    k: usize,
) -> Result<InteractionGraph> {
    if k == 0 {
        return Err(invalid!("number of influencers must be at least 1"));
    }
    let mut keep = BTreeSet::new();
    for m in rank_by_influence(metrics).into_iter().take(k) {
        if let Some(i) = g.node_index(&m.user) {
            keep.insert(i);
            keep.extend(g.neighbors(i));
        }
    }
    Ok(g.induced(&keep))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{RawComment, RawPost, Record, TimeWindow};
    use alloc::string::ToString;

    fn post(id: &str, author: &str) -> Record {
        Record::Post(RawPost {
            id: id.to_string(),
            author: author.to_string(),
            created_utc: 10,
            score: 1,
            title: String::new(),
            selftext: String::new(),
        })
    }

    fn comment(id: &str, author: &str, parent: &str, link: &str) -> Record {
        Record::Comment(RawComment {
            id: id.to_string(),
            author: author.to_string(),
            created_utc: 20,
            score: 2,
            body: String::new(),
            parent_id: parent.to_string(),
            link_id: link.to_string(),
        })
    }

    fn dataset(records: Vec<Record>) -> Dataset {
        Dataset::from_records(records, TimeWindow::default())
    }

    #[test]
    fn weight_versus_degree() {
        let d = dataset(vec![
            post("p", "b"),
            comment("c1", "a", "t3_p", "t3_p"),
            comment("c2", "a", "t3_p", "t3_p"),
        ]);
        let g = build_graph(&d);
        assert_eq!(g.weight("a", "b"), Some(2));
        assert_eq!(g.out_degree_of("a"), 1);
        assert_eq!(g.edges.len(), 1);
    }

    #[test]
    fn self_replies_make_no_edge() {
        let d = dataset(vec![post("p", "a"), comment("c1", "a", "t3_p", "t3_p")]);
        let g = build_graph(&d);
        assert!(g.edges.is_empty());
        assert!(g.nodes.is_empty());
    }

    #[test]
    fn star_hub_is_the_only_passive_user() {
        let mut records = vec![post("p", "hub")];
        for (i, u) in ["u1", "u2", "u3", "u4"].iter().enumerate() {
            records.push(comment(&alloc::format!("c{i}"), u, "t3_p", "t3_p"));
        }
        let g = build_graph(&dataset(records));
        let classes = user_classes(&g);
        assert_eq!(classes.passive, 1);
        assert_eq!(g.out_degree_of("hub"), 0);
        assert_eq!(classes.never_responded, 4);
        assert_eq!(classes.passive_pct, 20.0);
    }

    #[test]
    fn spread_values() {
        let one: &[usize] = &[1];
        let two: &[usize] = &[2];
        let both: &[usize] = &[1, 2];
        let three: &[usize] = &[3];
        assert_eq!(topic_spread(&[one, one, one], 4).unwrap().0, 1.0);
        assert_eq!(topic_spread(&[one, two], 4).unwrap().0, 8.0);
        assert_eq!(topic_spread(&[both], 4).unwrap().0, 8.0);
        let (tau, s) = topic_spread(&[one, two, three], 4).unwrap();
        assert!((tau - 27.0).abs() < 1e-12);
        assert!((s.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(topic_spread(&[&[], &[]], 4), None);
    }

    #[test]
    fn reach_values() {
        assert_eq!(reach(5, 5), Some(1.0));
        assert_eq!(reach(1, 4), Some(0.25));
        assert_eq!(reach(0, 0), None);
    }

    fn metric(user: &str, comments: usize, reach: f64) -> UserMetrics {
        UserMetrics {
            user: user.to_string(),
            comments,
            out_degree: 0,
            in_degree: 0,
            tau: None,
            reach,
            alpha: 0.0,
            influence: 0.0,
            aggregate_comment_score: 0,
            topic_fractions: vec![],
        }
    }

    #[test]
    fn contribution_and_influence_examples() {
        let mut m = vec![metric("a", 10, 1.0), metric("b", 5, 0.8)];
        contribution_and_influence(&mut m);
        assert_eq!(m[0].alpha, 1.0);
        assert!((m[1].influence - 0.4).abs() < 1e-15);
        let mut same = vec![metric("a", 3, 1.0), metric("b", 3, 1.0)];
        contribution_and_influence(&mut same);
        assert!(same.iter().all(|m| m.influence == 1.0));
    }

    #[test]
    fn ranking_tie_breaks() {
        let mut m = vec![metric("b", 4, 0.5), metric("a", 4, 0.5), metric("c", 2, 1.0)];
        contribution_and_influence(&mut m);
        // a, b: alpha 1, R 0.5; c: alpha 0.5, R 1 -> all I = 0.5.
        let order: Vec<&str> = rank_by_influence(&m).iter().map(|m| m.user.as_str()).collect();
        assert_eq!(order, vec!["a", "b", "c"]);
    }

    #[test]
    fn egonet_of_star_hub() {
        let mut records = vec![post("p", "hub"), post("q", "x"), comment("cx", "y", "t3_q", "t3_q")];
        for (i, u) in ["u1", "u2", "u3"].iter().enumerate() {
            records.push(comment(&alloc::format!("c{i}"), "hub", "t3_q", "t3_q"));
            records.push(comment(&alloc::format!("r{i}"), u, "t3_p", "t3_p"));
        }
        let d = dataset(records);
        let g = build_graph(&d);
        let a = DominantTopicAssignment {
            thresholds: vec![(0.0, 0.0)],
            dominant: vec![],
            doc_ids: vec![],
            presence_counts: vec![0],
            topic_presence: vec![0.0],
        };
        let m = user_metrics(&d, &g, &a);
        let sub = top_influencers_subgraph(&g, &m, 1).unwrap();
        // hub: C = 3, R = 1/3; u*: C = 1, alpha 1/3, R = 1 -> tie on I, hub
        // wins on comment count.
        assert_eq!(sub.nodes, vec!["hub", "u1", "u2", "u3", "x"]);
        assert_eq!(sub.total_weight(), 6);
        let whole = top_influencers_subgraph(&g, &m, 100).unwrap();
        assert_eq!(whole, g);
        assert!(top_influencers_subgraph(&g, &m, 0).is_err());
    }
}
