//! Topic-count selection by distribution skewness, dominant-topic assignment,
//! topic co-occurrence and the monthly topic timeline.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use chrono::Datelike;

use crate::corpus::Corpus;
use crate::error::{invalid, Error, Result};
use crate::ingest::Dataset;
use crate::lda::{self, LdaConfig, TopicModel};

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

/// Tolerance on the total mass of a distribution passed to [`skewness`].
pub const SUM_TOLERANCE: f64 = 1e-6;

/// Pearson's second skewness coefficient `3 (mean - median) / sd` of the
/// values of `dist`, with the population standard deviation.
///
/// `Ok(None)` when every entry is equal (zero spread).
pub fn skewness(dist: &[f64]) -> Result<Option<f64>> {
    let k = dist.len();
    if k < 2 {
        return Err(invalid!("skewness needs at least 2 topics, got {k}"));
    }
    let total: f64 = dist.iter().sum();
    if (total - 1.0).abs() > SUM_TOLERANCE {
        return Err(invalid!("distribution sums to {total}, not 1"));
    }
    let (min, max) = dist
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    if min == max {
        return Ok(None);
    }
    let n = k as f64;
    let mean = total / n;
    let var = dist.iter().map(|&x| (x - mean) * (x - mean)).sum::<f64>() / n;
    let sd = libm::sqrt(var);
    if sd == 0.0 {
        return Ok(None);
    }
    let mut sorted = dist.to_vec();
    sorted.sort_by(f64::total_cmp);
    let median = if k % 2 == 1 {
        sorted[k / 2]
    } else {
        (sorted[k / 2 - 1] + sorted[k / 2]) / 2.0
    };
    Ok(Some(3.0 * (mean - median) / sd))
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct SkewnessReport {
    pub k: usize,
    pub per_doc_skewness: Vec<Option<f64>>,
    /// Documents whose skewness is non-positive or undefined.
    pub w_k: usize,
}

impl SkewnessReport {
    pub fn from_skewness(k: usize, per_doc_skewness: Vec<Option<f64>>) -> Self {
        let w_k = per_doc_skewness
            .iter()
            .filter(|s| s.map_or(true, |v| v <= 0.0))
            .count();
        Self {
            k,
            per_doc_skewness,
            w_k,
        }
    }
}

/// Skewness of every document's topic distribution and the resulting W_k.
pub fn count_nonpositive(model: &TopicModel) -> Result<SkewnessReport> {
    let per_doc = model
        .theta
        .iter()
        .map(|row| skewness(row))
        .collect::<Result<Vec<_>>>()?;
    Ok(SkewnessReport::from_skewness(model.k(), per_doc))
}

/// Index into `reports` of the selected topic count, and how many reports (in
/// ascending k) the scan consumed.
///
/// The winner minimizes W_k with ties going to the smaller k. With
/// `patience = Some(p)` the scan stops after `p` consecutive k values that
/// fail to improve on the best W_k so far. Input order does not matter.
pub fn choose_k(reports: &[SkewnessReport], patience: Option<usize>) -> Option<(usize, usize)> {
    let mut order: Vec<usize> = (0..reports.len()).collect();
    order.sort_by_key(|&i| reports[i].k);
    let mut best: Option<usize> = None;
    let mut stale = 0;
    let mut scanned = 0;
    for &i in &order {
        scanned += 1;
        match best {
            Some(b) if reports[i].w_k >= reports[b].w_k => stale += 1,
            _ => {
                best = Some(i);
                stale = 0;
            }
        }
        if patience.is_some_and(|p| stale >= p) {
            break;
        }
    }
    best.map(|b| (b, scanned))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub k: usize,
    pub model: TopicModel,
    /// One report per fitted k, ascending.
    pub reports: Vec<SkewnessReport>,
}

pub fn validate_k_range(k_min: usize, k_max: usize) -> Result<()> {
    if k_min < 2 {
        return Err(invalid!("k_min must be at least 2, got {k_min}"));
    }
    if k_max < k_min {
        return Err(invalid!("k_max ({k_max}) is below k_min ({k_min})"));
    }
    Ok(())
}

/// Fit a model for every k in `k_min..=k_max` with the seed of `base` and
/// keep the one with the fewest non-positive-skew documents.
pub fn select_k(
    corpus: &Corpus,
    k_min: usize,
    k_max: usize,
    base: &LdaConfig,
    patience: Option<usize>,
) -> Result<Selection> {
    validate_k_range(k_min, k_max)?;
    let mut reports = Vec::new();
    let mut best: Option<(usize, TopicModel)> = None;
    let mut stale = 0;
    for k in k_min..=k_max {
        let model = lda::fit(corpus, base.with_k(k))?;
        let report = count_nonpositive(&model)?;
        let improved = best
            .as_ref()
            .map_or(true, |(w, _)| report.w_k < *w);
        if improved {
            best = Some((report.w_k, model));
            stale = 0;
        } else {
            stale += 1;
        }
        reports.push(report);
        if patience.is_some_and(|p| stale >= p) {
            break;
        }
    }
    let (_, model) = best.expect("k range is non-empty");
    Ok(Selection {
        k: model.k(),
        model,
        reports,
    })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct DominantTopicAssignment {
    /// Per topic `(mean, population sd)` of its probability across documents.
    pub thresholds: Vec<(f64, f64)>,
    /// Per document, ascending topic indices.
    pub dominant: Vec<Vec<usize>>,
    pub doc_ids: Vec<String>,
    /// Documents in which each topic is dominant.
    pub presence_counts: Vec<usize>,
    /// `presence_counts` over the number of documents.
    pub topic_presence: Vec<f64>,
}

impl DominantTopicAssignment {
    pub fn k(&self) -> usize {
        self.thresholds.len()
    }

    /// Documents with no dominant topic.
    pub fn unassigned(&self) -> usize {
        self.dominant.iter().filter(|d| d.is_empty()).count()
    }
}

/// Topic `i` is dominant in a document when its probability is strictly
/// greater than `mean_i + sd_i` over all documents.
pub fn dominant_topics(model: &TopicModel) -> DominantTopicAssignment {
    let k = model.k();
    let n = model.theta.len();
    let thresholds: Vec<(f64, f64)> = (0..k)
        .map(|t| {
            let column = || model.theta.iter().map(move |row| row[t]);
            let (lo, hi) = column().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
                (lo.min(x), hi.max(x))
            });
            if n == 0 {
                (0.0, 0.0)
            } else if lo == hi {
                (lo, 0.0)
            } else {
                let mean = column().sum::<f64>() / n as f64;
                let var = column().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
                (mean, libm::sqrt(var))
            }
        })
        .collect();
    let dominant: Vec<Vec<usize>> = model
        .theta
        .iter()
        .map(|row| {
            (0..k)
                .filter(|&t| row[t] > thresholds[t].0 + thresholds[t].1)
                .collect()
        })
        .collect();
    let mut presence_counts = vec![0usize; k];
    for set in &dominant {
        for &t in set {
            presence_counts[t] += 1;
        }
    }
    let topic_presence = presence_counts
        .iter()
        .map(|&c| if n == 0 { 0.0 } else { c as f64 / n as f64 })
        .collect();
    DominantTopicAssignment {
        thresholds,
        dominant,
        doc_ids: model.doc_ids.clone(),
        presence_counts,
        topic_presence,
    }
}

/// Symmetric k x k counts: off-diagonal `[i][j]` is the number of documents
/// where both are dominant; the diagonal counts documents where `i` is the
/// only dominant topic.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct CooccurrenceMatrix {
    pub counts: Vec<Vec<usize>>,
}

impl CooccurrenceMatrix {
    pub fn k(&self) -> usize {
        self.counts.len()
    }
}

pub fn cooccurrence(a: &DominantTopicAssignment) -> CooccurrenceMatrix {
    let k = a.k();
    let mut counts = vec![vec![0usize; k]; k];
    for set in &a.dominant {
        match set.as_slice() {
            [] => {}
            [only] => counts[*only][*only] += 1,
            many => {
                for (x, &i) in many.iter().enumerate() {
                    for &j in &many[x + 1..] {
                        counts[i][j] += 1;
                        counts[j][i] += 1;
                    }
                }
            }
        }
    }
    CooccurrenceMatrix { counts }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct YearMonth {
    pub year: i32,
    pub month: u32,
}

impl YearMonth {
    /// Calendar month (UTC) of an epoch timestamp.
    pub fn from_epoch(secs: i64) -> Option<Self> {
        chrono::DateTime::from_timestamp(secs, 0).map(|t| Self {
            year: t.year(),
            month: t.month(),
        })
    }
}

impl fmt::Display for YearMonth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

/// Per calendar month, how many documents each topic is dominant in.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MonthlyDistribution {
    /// Month -> per-topic counts (length k).
    pub months: BTreeMap<YearMonth, Vec<usize>>,
}

impl MonthlyDistribution {
    pub fn count(&self, topic: usize, month: YearMonth) -> usize {
        self.months.get(&month).map_or(0, |c| c[topic])
    }
}

/// A post with several dominant topics adds one to each of them.
pub fn monthly_distribution(a: &DominantTopicAssignment, d: &Dataset) -> Result<MonthlyDistribution> {
    let k = a.k();
    let mut months: BTreeMap<YearMonth, Vec<usize>> = BTreeMap::new();
    for (id, set) in a.doc_ids.iter().zip(&a.dominant) {
        let post = d.post(id).ok_or_else(|| Error::UnknownId(id.clone()))?;
        if set.is_empty() {
            continue;
        }
        let month = YearMonth::from_epoch(post.created_at)
            .ok_or_else(|| invalid!("timestamp {} out of range", post.created_at))?;
        let row = months.entry(month).or_insert_with(|| vec![0; k]);
        for &t in set {
            row[t] += 1;
        }
    }
    Ok(MonthlyDistribution { months })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{RawPost, Record, TimeWindow};
    use alloc::string::ToString;

    fn model_with_theta(theta: Vec<Vec<f64>>) -> TopicModel {
        let k = theta[0].len();
        TopicModel {
            config: LdaConfig::new(k, 0),
            doc_ids: (0..theta.len()).map(|i| alloc::format!("p{i}")).collect(),
            theta,
            phi: vec![vec![1.0]; k],
            assignments: vec![],
            log_likelihood_trace: vec![],
        }
    }

    #[test]
    fn skewness_examples() {
        assert_eq!(skewness(&[0.25; 4]).unwrap(), None);
        assert_eq!(skewness(&[1.0 / 7.0; 7]).unwrap(), None);
        let s = skewness(&[0.7, 0.1, 0.1, 0.1]).unwrap().unwrap();
        // mean 0.25, median 0.1, sd sqrt(0.0675)
        assert!((s - 3.0 * 0.15 / libm::sqrt(0.0675)).abs() < 1e-12);
        assert!((s - 1.7320508075688772).abs() < 1e-4);
        let s = skewness(&[0.1, 0.2, 0.3, 0.4]).unwrap().unwrap();
        assert!(s.abs() < 1e-12);
        assert!(skewness(&[1.0]).is_err());
        assert!(skewness(&[0.5, 0.6]).is_err());
    }

    #[test]
    fn two_topic_skewness_is_never_positive() {
        assert!(skewness(&[0.9, 0.1]).unwrap().unwrap().abs() < 1e-12);
    }

    #[test]
    fn w_k_counts_nonpositive_and_undefined() {
        let m = model_with_theta(vec![
            vec![0.7, 0.1, 0.1, 0.1],
            vec![0.25, 0.25, 0.25, 0.25],
            vec![0.1, 0.2, 0.3, 0.4],
        ]);
        let r = count_nonpositive(&m).unwrap();
        assert_eq!(r.w_k, 2);
        assert_eq!(r.per_doc_skewness[1], None);
        let spiked = model_with_theta(vec![vec![0.7, 0.1, 0.1, 0.1]; 5]);
        assert_eq!(count_nonpositive(&spiked).unwrap().w_k, 0);
    }

    fn report(k: usize, w_k: usize) -> SkewnessReport {
        SkewnessReport { k, per_doc_skewness: vec![], w_k }
    }

    #[test]
    fn choose_k_prefers_smallest_minimizer() {
        let reports = [report(2, 10), report(3, 4), report(4, 6), report(5, 4), report(6, 5)];
        assert_eq!(choose_k(&reports, None), Some((1, 5)));
        let mut reversed = reports.clone();
        reversed.reverse();
        let (i, _) = choose_k(&reversed, None).unwrap();
        assert_eq!(reversed[i].k, 3);
        assert_eq!(choose_k(&[], None), None);
    }

    #[test]
    fn choose_k_patience() {
        let reports = [report(2, 10), report(3, 9), report(4, 9), report(5, 9), report(6, 1)];
        assert_eq!(choose_k(&reports, Some(2)), Some((1, 4)));
        assert_eq!(choose_k(&reports, Some(3)), Some((4, 5)));
        assert_eq!(choose_k(&reports, None), Some((4, 5)));
    }

    #[test]
    fn k_range_validation() {
        assert!(validate_k_range(1, 4).is_err());
        assert!(validate_k_range(4, 3).is_err());
        assert!(validate_k_range(3, 3).is_ok());
    }

    #[test]
    fn dominance_threshold_example() {
        // Column (0.9, 0.1, 0.1, 0.1): mean 0.3, sd ~0.3464, threshold ~0.6464.
        let m = model_with_theta(vec![
            vec![0.9, 0.1],
            vec![0.1, 0.9],
            vec![0.1, 0.9],
            vec![0.1, 0.9],
        ]);
        let a = dominant_topics(&m);
        let (mu, sd) = a.thresholds[0];
        assert!((mu - 0.3).abs() < 1e-12);
        assert!((sd - libm::sqrt(0.12)).abs() < 1e-12);
        assert_eq!(a.dominant[0], vec![0]);
        assert!(a.dominant[1].is_empty());
        // Column 1 (0.1, 0.9, 0.9, 0.9) has threshold 0.7 + 0.3464 > 0.9.
        assert_eq!(a.presence_counts, vec![1, 0]);
    }

    #[test]
    fn identical_rows_have_no_dominant_topic() {
        let m = model_with_theta(vec![vec![0.6, 0.3, 0.1]; 9]);
        let a = dominant_topics(&m);
        assert!(a.dominant.iter().all(Vec::is_empty));
        assert_eq!(a.unassigned(), 9);
        assert_eq!(a.thresholds[0], (0.6, 0.0));
    }

    fn assignment(dominant: Vec<Vec<usize>>, k: usize) -> DominantTopicAssignment {
        DominantTopicAssignment {
            thresholds: vec![(0.0, 0.0); k],
            doc_ids: (0..dominant.len()).map(|i| alloc::format!("p{i}")).collect(),
            presence_counts: vec![0; k],
            topic_presence: vec![0.0; k],
            dominant,
        }
    }

    #[test]
    fn cooccurrence_hand_count() {
        let c = cooccurrence(&assignment(vec![vec![1, 2], vec![1], vec![2, 3], vec![]], 4));
        assert_eq!(c.counts[1][2], 1);
        assert_eq!(c.counts[2][1], 1);
        assert_eq!(c.counts[2][3], 1);
        assert_eq!(c.counts[1][1], 1);
        assert_eq!(c.counts[2][2], 0);
        assert_eq!(c.counts.iter().flatten().sum::<usize>(), 5);
        let singles = cooccurrence(&assignment(vec![vec![0], vec![1], vec![0]], 2));
        assert_eq!(singles.counts, vec![vec![2, 0], vec![0, 1]]);
    }

    fn dataset_at(times: &[i64]) -> Dataset {
        Dataset::from_records(
            times.iter().enumerate().map(|(i, &t)| {
                Record::Post(RawPost {
                    id: alloc::format!("p{i}"),
                    author: "a".to_string(),
                    created_utc: t,
                    score: 1,
                    title: String::new(),
                    selftext: String::new(),
                })
            }),
            TimeWindow::default(),
        )
    }

    #[test]
    fn monthly_counts() {
        // 2021-01-15 and 2021-03-01 UTC
        let d = dataset_at(&[1_610_668_800, 1_614_556_800]);
        let a = assignment(vec![vec![0], vec![0, 1]], 2);
        let m = monthly_distribution(&a, &d).unwrap();
        let jan = YearMonth { year: 2021, month: 1 };
        let mar = YearMonth { year: 2021, month: 3 };
        assert_eq!(m.count(0, jan), 1);
        assert_eq!(m.count(0, mar), 1);
        assert_eq!(m.count(1, mar), 1);
        assert_eq!(m.count(1, jan), 0);
        assert_eq!(alloc::format!("{jan}"), "2021-01");

        let missing = assignment(vec![vec![0]; 3], 2);
        assert!(matches!(monthly_distribution(&missing, &d), Err(Error::UnknownId(_))));
    }

    #[test]
    fn month_boundaries_are_utc() {
        assert_eq!(YearMonth::from_epoch(1_609_459_199), Some(YearMonth { year: 2020, month: 12 }));
        assert_eq!(YearMonth::from_epoch(1_609_459_200), Some(YearMonth { year: 2021, month: 1 }));
    }
}
