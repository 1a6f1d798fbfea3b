//! Lexical category profiles of posts and their principal components.
//!
//! A post's score for a category is the share of its tokens that belong to
//! the category's word set. PCA runs on the mean-centered category matrix
//! with the population covariance, solved with [`crate::linalg`].

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::linalg;
use crate::topics::DominantTopicAssignment;

pub const DEFAULT_COMPONENTS: usize = 15;

/// Eigenvalues at or below this fraction of the largest one are treated as
/// zero when flagging surplus components.
pub const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lexicon {
    categories: Vec<String>,
    words: Vec<BTreeSet<String>>,
}

impl Lexicon {
    /// Categories keep their given order; words are lowercased.
    pub fn new<I, W>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (String, W)>,
        W: IntoIterator,
        W::Item: AsRef<str>,
    {
        let mut categories = Vec::new();
        let mut words = Vec::new();
        for (name, list) in entries {
            if categories.contains(&name) {
                return Err(invalid!("duplicate lexicon category {name:?}"));
            }
            let set: BTreeSet<String> = list
                .into_iter()
                .map(|w| w.as_ref().trim().to_lowercase())
                .filter(|w| !w.is_empty())
                .collect();
            if set.is_empty() {
                return Err(invalid!("lexicon category {name:?} has no words"));
            }
            categories.push(name);
            words.push(set);
        }
        if categories.is_empty() {
            return Err(Error::EmptyInput("lexicon has no categories".into()));
        }
        Ok(Self { categories, words })
    }

    pub fn categories(&self) -> &[String] {
        &self.categories
    }

    pub fn words(&self, category: usize) -> &BTreeSet<String> {
        &self.words[category]
    }

    pub fn len(&self) -> usize {
        self.categories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.categories.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CategoryMatrix {
    pub categories: Vec<String>,
    /// One row per post; columns follow `categories`.
    pub rows: Vec<Vec<f64>>,
}

/// Normalized category scores for each tokenized post. Empty posts score 0.
pub fn categorize<S: AsRef<str>>(posts: &[Vec<S>], lexicon: &Lexicon) -> CategoryMatrix {
    let rows = posts
        .iter()
        .map(|tokens| {
            let n = tokens.len();
            lexicon
                .words
                .iter()
                .map(|set| {
                    if n == 0 {
                        0.0
                    } else {
                        let hits = tokens.iter().filter(|t| set.contains(t.as_ref())).count();
                        hits as f64 / n as f64
                    }
                })
                .collect()
        })
        .collect();
    CategoryMatrix {
        categories: lexicon.categories.clone(),
        rows,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PcaResult {
    /// Unit directions over categories, by decreasing explained variance.
    pub components: Vec<Vec<f64>>,
    pub explained_variance: Vec<f64>,
    /// Per post, its score on each component.
    pub projections: Vec<Vec<f64>>,
    pub mean: Vec<f64>,
    /// Trace of the covariance matrix.
    pub total_variance: f64,
    /// Trailing components beyond the data's rank (explained variance ~ 0).
    pub surplus_components: usize,
}

impl PcaResult {
    /// `mean + sum_i projection_i * component_i` for one post.
    pub fn reconstruct(&self, projection: &[f64]) -> Vec<f64> {
        let mut out = self.mean.clone();
        for (p, c) in projection.iter().zip(&self.components) {
            out.iter_mut().zip(c).for_each(|(o, x)| *o += p * x);
        }
        out
    }
}

/// Population covariance of the rows of `data` and their column means.
pub fn covariance(data: &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<f64>) {
    let dims = data.first().map_or(0, Vec::len);
    let n = data.len() as f64;
    let mut mean = vec![0.0; dims];
    for row in data {
        mean.iter_mut().zip(row).for_each(|(m, x)| *m += x);
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut cov = vec![vec![0.0; dims]; dims];
    for row in data {
        let centered: Vec<f64> = row.iter().zip(&mean).map(|(x, m)| x - m).collect();
        for i in 0..dims {
            for j in i..dims {
                cov[i][j] += centered[i] * centered[j];
            }
        }
    }
    for i in 0..dims {
        for j in i..dims {
            cov[i][j] /= n;
            cov[j][i] = cov[i][j];
        }
    }
    (cov, mean)
}

/// Principal components of the rows of `data`.
///
/// Each component's largest-magnitude entry is made positive. Asking for
/// more components than the data's rank is allowed; the surplus ones carry
/// zero variance and are counted in [`PcaResult::surplus_components`].
pub fn pca(data: &[Vec<f64>], n_comp: usize) -> Result<PcaResult> {
    let dims = data.first().map_or(0, Vec::len);
    if data.is_empty() || dims == 0 {
        return Err(Error::EmptyInput("PCA needs at least one row and one column".into()));
    }
    if data.iter().any(|r| r.len() != dims) {
        return Err(Error::DimensionMismatch("rows differ in length".into()));
    }
    if n_comp == 0 || n_comp > dims {
        return Err(invalid!("n_comp must be in 1..={dims}, got {n_comp}"));
    }
    let (cov, mean) = covariance(data);
    let total_variance: f64 = (0..dims).map(|i| cov[i][i]).sum();
    let (values, vectors) = linalg::symmetric_eigen(&cov)?;

    let top = values.first().copied().unwrap_or(0.0).max(0.0);
    let mut components = Vec::with_capacity(n_comp);
    let mut explained_variance = Vec::with_capacity(n_comp);
    let mut surplus_components = 0;
    for (value, mut v) in values.into_iter().zip(vectors).take(n_comp) {
        let lead = v
            .iter()
            .enumerate()
            .fold(0, |best, (i, x)| if x.abs() > v[best].abs() { i } else { best });
        if v[lead] < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        if value <= RANK_TOLERANCE * top || top == 0.0 {
            surplus_components += 1;
        }
        explained_variance.push(value.max(0.0));
        components.push(v);
    }
    let projections = data
        .iter()
        .map(|row| {
            let centered: Vec<f64> = row.iter().zip(&mean).map(|(x, m)| x - m).collect();
            components.iter().map(|c| linalg::dot(&centered, c)).collect()
        })
        .collect();
    Ok(PcaResult {
        components,
        explained_variance,
        projections,
        mean,
        total_variance,
        surplus_components,
    })
}

/// Mean component scores over the posts where each topic is dominant;
/// `None` for topics dominant nowhere.
pub fn topicwise_profile(
    pca: &PcaResult,
    a: &DominantTopicAssignment,
) -> Result<Vec<Option<Vec<f64>>>> {
    if pca.projections.len() != a.dominant.len() {
        return Err(Error::DimensionMismatch(alloc::format!(
            "{} projections but {} dominance rows",
            pca.projections.len(),
            a.dominant.len()
        )));
    }
    let width = pca.components.len();
    let mut sums = vec![vec![0.0; width]; a.k()];
    let mut counts = vec![0usize; a.k()];
    for (proj, set) in pca.projections.iter().zip(&a.dominant) {
        for &t in set {
            counts[t] += 1;
            sums[t].iter_mut().zip(proj).for_each(|(s, p)| *s += p);
        }
    }
    Ok(sums
        .into_iter()
        .zip(counts)
        .map(|(s, n)| (n > 0).then(|| s.into_iter().map(|x| x / n as f64).collect()))
        .collect())
}
