//! Latent Dirichlet allocation fitted by collapsed Gibbs sampling.
//!
//! Each document owns a ChaCha8 stream keyed by `(seed, doc_id)`, and
//! documents are visited in doc-id order regardless of their position in the
//! corpus, so a fit depends only on the set of (id, document) pairs and the
//! config. Point estimates average the count tables of post-burn-in snapshots
//! taken every [`SNAPSHOT_INTERVAL`] sweeps (and at the final sweep).

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::Corpus;
use crate::error::{invalid, Error, Result};
use crate::rng;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

pub const DEFAULT_BETA: f64 = 0.01;
pub const DEFAULT_ITERATIONS: usize = 1000;
pub const DEFAULT_BURN_IN: usize = 500;
pub const SNAPSHOT_INTERVAL: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct LdaConfig {
    pub k: usize,
    pub alpha: f64,
    pub beta: f64,
    pub iterations: usize,
    pub burn_in: usize,
    pub seed: u64,
}

impl LdaConfig {
    /// Defaults: alpha = 50 / k, beta = 0.01, 1000 sweeps with 500 burn-in.
    pub fn new(k: usize, seed: u64) -> Self {
        Self {
            k,
            alpha: 50.0 / k.max(1) as f64,
            beta: DEFAULT_BETA,
            iterations: DEFAULT_ITERATIONS,
            burn_in: DEFAULT_BURN_IN,
            seed,
        }
    }

    /// Same settings for a different topic count; alpha is rescaled to
    /// `50 / k` only if it was at that default for the old `k`.
    pub fn with_k(&self, k: usize) -> Self {
        let default_alpha = 50.0 / self.k.max(1) as f64;
        let alpha = if self.alpha == default_alpha {
            50.0 / k.max(1) as f64
        } else {
            self.alpha
        };
        Self { k, alpha, ..*self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(invalid!("topic count must be at least 2, got {}", self.k));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(invalid!("alpha must be positive, got {}", self.alpha));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(invalid!("beta must be positive, got {}", self.beta));
        }
        if self.iterations < 1 {
            return Err(invalid!("iterations must be at least 1"));
        }
        if self.burn_in >= self.iterations {
            return Err(invalid!(
                "burn_in ({}) must be smaller than iterations ({})",
                self.burn_in,
                self.iterations
            ));
        }
        Ok(())
    }
}

/// A fitted model. Rows of `theta` follow the corpus document order.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct TopicModel {
    pub config: LdaConfig,
    pub doc_ids: Vec<String>,
    /// Per document, a length-k topic distribution.
    pub theta: Vec<Vec<f64>>,
    /// Per topic, a length-V word distribution.
    pub phi: Vec<Vec<f64>>,
    /// Final-sweep topic of every token, in [`crate::corpus::Document::tokens`] order.
    pub assignments: Vec<Vec<u32>>,
    pub log_likelihood_trace: Vec<f64>,
}

impl TopicModel {
    pub fn k(&self) -> usize {
        self.config.k
    }

    pub fn vocabulary_len(&self) -> usize {
        self.phi.first().map_or(0, Vec::len)
    }

    /// The `n` most probable term ids of `topic`; ties go to the lower id.
    /// Returns every term when `n` exceeds the vocabulary.
    pub fn top_words(&self, topic: usize, n: usize) -> Result<Vec<u32>> {
        let row = self
            .phi
            .get(topic)
            .ok_or_else(|| invalid!("topic {topic} out of range for k = {}", self.k()))?;
        let mut ids: Vec<u32> = (0..row.len() as u32).collect();
        ids.sort_by(|&a, &b| {
            row[b as usize]
                .total_cmp(&row[a as usize])
                .then(a.cmp(&b))
        });
        ids.truncate(n);
        Ok(ids)
    }
}

/// Collapsed Gibbs sampler state. [`fit`] drives it to completion; tests and
/// diagnostics can step it one sweep at a time.
pub struct GibbsSampler<'c> {
    corpus: &'c Corpus,
    config: LdaConfig,
    vocab: usize,
    /// Document indices in visitation order.
    order: Vec<usize>,
    tokens: Vec<Vec<u32>>,
    assignments: Vec<Vec<u32>>,
    doc_topic: Vec<u32>,
    topic_word: Vec<u32>,
    topic_total: Vec<u64>,
    rngs: Vec<ChaCha8Rng>,
    sweeps: usize,
    snapshots: usize,
    acc_doc_topic: Vec<f64>,
    acc_topic_word: Vec<f64>,
    acc_topic_total: Vec<f64>,
    trace: Vec<f64>,
    weights: Vec<f64>,
}

impl<'c> GibbsSampler<'c> {
    /// Validate inputs and draw the initial topic of every token uniformly.
    pub fn new(corpus: &'c Corpus, config: LdaConfig) -> Result<Self> {
        config.validate()?;
        if corpus.is_empty() || corpus.total_tokens == 0 {
            return Err(Error::EmptyInput("corpus has no tokens".into()));
        }
        if corpus.doc_ids.len() != corpus.documents.len() {
            return Err(Error::DimensionMismatch("doc_ids not aligned with documents".into()));
        }
        let k = config.k;
        let v = corpus.vocabulary.len();
        let d = corpus.documents.len();

        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| corpus.doc_ids[a].cmp(&corpus.doc_ids[b]).then(a.cmp(&b)));

        let tokens: Vec<Vec<u32>> = corpus.documents.iter().map(|doc| doc.tokens().collect()).collect();
        let mut rngs: Vec<ChaCha8Rng> = corpus
            .doc_ids
            .iter()
            .map(|id| rng::stream(config.seed, id))
            .collect();

        let mut assignments: Vec<Vec<u32>> = tokens.iter().map(|t| vec![0; t.len()]).collect();
        let mut doc_topic = vec![0u32; d * k];
        let mut topic_word = vec![0u32; k * v];
        let mut topic_total = vec![0u64; k];
        for &di in &order {
            let r = &mut rngs[di];
            for (slot, &w) in assignments[di].iter_mut().zip(&tokens[di]) {
                let t = r.gen_range(0..k);
                *slot = t as u32;
                doc_topic[di * k + t] += 1;
                topic_word[t * v + w as usize] += 1;
                topic_total[t] += 1;
            }
        }

        Ok(Self {
            corpus,
            config,
            vocab: v,
            order,
            tokens,
            assignments,
            doc_topic,
            topic_word,
            topic_total,
            rngs,
            sweeps: 0,
            snapshots: 0,
            acc_doc_topic: vec![0.0; d * k],
            acc_topic_word: vec![0.0; k * v],
            acc_topic_total: vec![0.0; k],
            trace: Vec::with_capacity(config.iterations),
            weights: vec![0.0; k],
        })
    }

    pub fn sweeps_done(&self) -> usize {
        self.sweeps
    }

    pub fn is_done(&self) -> bool {
        self.sweeps >= self.config.iterations
    }

    /// Sum of the document-topic count table.
    pub fn doc_topic_total(&self) -> u64 {
        self.doc_topic.iter().map(|&n| u64::from(n)).sum()
    }

    /// Sum of the topic-word count table.
    pub fn topic_word_total(&self) -> u64 {
        self.topic_word.iter().map(|&n| u64::from(n)).sum()
    }

    pub fn topic_totals(&self) -> &[u64] {
        &self.topic_total
    }

    pub fn assignments(&self) -> &[Vec<u32>] {
        &self.assignments
    }

    /// Resample every token once, then record the log-likelihood and, past
    /// burn-in, a count snapshot.
    pub fn sweep(&mut self) {
        let k = self.config.k;
        let v = self.vocab;
        let alpha = self.config.alpha;
        let beta = self.config.beta;
        let vbeta = v as f64 * beta;
        for &di in &self.order {
            let r = &mut self.rngs[di];
            let dt = &mut self.doc_topic[di * k..(di + 1) * k];
            for (slot, &w) in self.assignments[di].iter_mut().zip(&self.tokens[di]) {
                let w = w as usize;
                let old = *slot as usize;
                dt[old] -= 1;
                self.topic_word[old * v + w] -= 1;
                self.topic_total[old] -= 1;

                let mut total = 0.0;
                for t in 0..k {
                    total += (f64::from(dt[t]) + alpha) * (f64::from(self.topic_word[t * v + w]) + beta)
                        / (self.topic_total[t] as f64 + vbeta);
                    self.weights[t] = total;
                }
                let u = r.gen::<f64>() * total;
                let new = self.weights.iter().position(|&c| u < c).unwrap_or(k - 1);

                *slot = new as u32;
                dt[new] += 1;
                self.topic_word[new * v + w] += 1;
                self.topic_total[new] += 1;
            }
        }
        self.sweeps += 1;
        let ll = self.current_log_likelihood();
        self.trace.push(ll);

        let s = self.sweeps;
        let burn = self.config.burn_in;
        if s > burn && ((s - burn) % SNAPSHOT_INTERVAL == 0 || s == self.config.iterations) {
            self.snapshot();
        }
    }

    fn snapshot(&mut self) {
        let add = |acc: &mut [f64], src: &[u32]| {
            acc.iter_mut().zip(src).for_each(|(a, &n)| *a += f64::from(n));
        };
        add(&mut self.acc_doc_topic, &self.doc_topic);
        add(&mut self.acc_topic_word, &self.topic_word);
        self.acc_topic_total
            .iter_mut()
            .zip(&self.topic_total)
            .for_each(|(a, &n)| *a += n as f64);
        self.snapshots += 1;
    }

    fn current_log_likelihood(&self) -> f64 {
        let (theta, phi) = self.estimates(
            |i| f64::from(self.doc_topic[i]),
            |i| f64::from(self.topic_word[i]),
            |t| self.topic_total[t] as f64,
        );
        token_log_likelihood(&theta, &phi, self.corpus)
    }

    fn estimates(
        &self,
        doc_topic: impl Fn(usize) -> f64,
        topic_word: impl Fn(usize) -> f64,
        topic_total: impl Fn(usize) -> f64,
    ) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let k = self.config.k;
        let v = self.vocab;
        let alpha = self.config.alpha;
        let beta = self.config.beta;
        let theta = self
            .tokens
            .iter()
            .enumerate()
            .map(|(d, toks)| {
                let denom = toks.len() as f64 + k as f64 * alpha;
                (0..k).map(|t| (doc_topic(d * k + t) + alpha) / denom).collect()
            })
            .collect();
        let phi = (0..k)
            .map(|t| {
                let denom = topic_total(t) + v as f64 * beta;
                (0..v).map(|w| (topic_word(t * v + w) + beta) / denom).collect()
            })
            .collect();
        (theta, phi)
    }

    /// Point estimates from the averaged snapshots (current counts if no
    /// snapshot has been taken yet).
    pub fn finish(self) -> TopicModel {
        let (theta, phi) = if self.snapshots == 0 {
            self.estimates(
                |i| f64::from(self.doc_topic[i]),
                |i| f64::from(self.topic_word[i]),
                |t| self.topic_total[t] as f64,
            )
        } else {
            let n = self.snapshots as f64;
            self.estimates(
                |i| self.acc_doc_topic[i] / n,
                |i| self.acc_topic_word[i] / n,
                |t| self.acc_topic_total[t] / n,
            )
        };
        TopicModel {
            config: self.config,
            doc_ids: self.corpus.doc_ids.clone(),
            theta,
            phi,
            assignments: self.assignments,
            log_likelihood_trace: self.trace,
        }
    }
}

/// Run the sampler for `config.iterations` sweeps.
pub fn fit(corpus: &Corpus, config: LdaConfig) -> Result<TopicModel> {
    let mut sampler = GibbsSampler::new(corpus, config)?;
    while !sampler.is_done() {
        sampler.sweep();
    }
    Ok(sampler.finish())
}

fn token_log_likelihood(theta: &[Vec<f64>], phi: &[Vec<f64>], corpus: &Corpus) -> f64 {
    let mut ll = 0.0;
    for (doc, th) in corpus.documents.iter().zip(theta) {
        for &(w, n) in &doc.counts {
            let p: f64 = th.iter().zip(phi).map(|(a, row)| a * row[w as usize]).sum();
            ll += f64::from(n) * libm::log(p);
        }
    }
    ll
}

/// Log-probability of every corpus token under the model's smoothed
/// estimates: the sum over tokens of `ln sum_t theta[d][t] * phi[t][w]`.
pub fn log_likelihood(model: &TopicModel, corpus: &Corpus) -> Result<f64> {
    if model.theta.len() != corpus.documents.len() || model.vocabulary_len() != corpus.vocabulary.len() {
        return Err(Error::DimensionMismatch("model was not fitted on this corpus".into()));
    }
    Ok(token_log_likelihood(&model.theta, &model.phi, corpus))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn disjoint_corpus() -> Corpus {
        let terms = ["a", "b", "c", "x", "y", "z"].iter().map(|s| s.to_string()).collect();
        Corpus::from_parts(
            terms,
            vec![vec![(0, 20), (1, 20), (2, 20)], vec![(3, 20), (4, 20), (5, 20)]],
            vec!["d0".into(), "d1".into()],
        )
        .unwrap()
    }

    fn quick(k: usize, seed: u64) -> LdaConfig {
        LdaConfig { iterations: 200, burn_in: 100, ..LdaConfig::new(k, seed) }
    }

    #[test]
    fn config_validation() {
        let c = disjoint_corpus();
        assert!(fit(&c, quick(1, 0)).is_err());
        assert!(fit(&c, LdaConfig { burn_in: 200, ..quick(2, 0) }).is_err());
        assert!(fit(&c, LdaConfig { alpha: 0.0, ..quick(2, 0) }).is_err());
        assert!(fit(&c, LdaConfig { iterations: 0, burn_in: 0, ..quick(2, 0) }).is_err());
        assert!(fit(&Corpus::default(), quick(2, 0)).is_err());
    }

    #[test]
    fn defaults() {
        let c = LdaConfig::new(10, 3);
        assert_eq!((c.alpha, c.beta, c.iterations, c.burn_in), (5.0, 0.01, 1000, 500));
        assert_eq!(c.with_k(5).alpha, 10.0);
        let custom = LdaConfig { alpha: 0.1, ..c };
        assert_eq!(custom.with_k(5).alpha, 0.1);
    }

    #[test]
    fn disjoint_documents_separate() {
        let c = disjoint_corpus();
        let cfg = LdaConfig { alpha: 0.1, ..quick(2, 11) };
        let m = fit(&c, cfg).unwrap();
        let top0 = if m.theta[0][0] > m.theta[0][1] { 0 } else { 1 };
        assert!(m.theta[0][top0] > 0.9);
        assert!(m.theta[1][1 - top0] > 0.9);
    }

    #[test]
    fn single_token_matches_count_formula() {
        let c = Corpus::from_parts(vec!["a".into(), "b".into()], vec![vec![(0, 1)]], vec!["d".into()]).unwrap();
        let cfg = LdaConfig { k: 2, alpha: 0.5, beta: 0.01, iterations: 1, burn_in: 0, seed: 4 };
        let m = fit(&c, cfg).unwrap();
        let z = m.assignments[0][0] as usize;
        let a = cfg.alpha;
        assert!((m.theta[0][z] - (1.0 + a) / (1.0 + 2.0 * a)).abs() < 1e-15);
        assert!((m.theta[0][1 - z] - a / (1.0 + 2.0 * a)).abs() < 1e-15);

        // ln(theta_z * phi_z(a) + theta_o * phi_o(a)), phi_o(a) = beta / (2 beta).
        let b = cfg.beta;
        let expected = libm::log(
            (1.0 + a) / (1.0 + 2.0 * a) * (1.0 + b) / (1.0 + 2.0 * b) + a / (1.0 + 2.0 * a) * 0.5,
        );
        assert!((log_likelihood(&m, &c).unwrap() - expected).abs() < 1e-12);
        assert!((m.log_likelihood_trace[0] - expected).abs() < 1e-12);
    }

    #[test]
    fn trace_has_one_entry_per_sweep() {
        let m = fit(&disjoint_corpus(), LdaConfig { iterations: 37, burn_in: 5, ..quick(3, 1) }).unwrap();
        assert_eq!(m.log_likelihood_trace.len(), 37);
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let c = disjoint_corpus();
        let a = fit(&c, quick(3, 99)).unwrap();
        let b = fit(&c, quick(3, 99)).unwrap();
        assert_eq!(a.assignments, b.assignments);
        assert_eq!(a, b);
        let other = fit(&c, quick(3, 100)).unwrap();
        assert_ne!(a.log_likelihood_trace, other.log_likelihood_trace);
    }

    #[test]
    fn top_words_order_and_ties() {
        let m = TopicModel {
            config: LdaConfig::new(2, 0),
            doc_ids: vec![],
            theta: vec![],
            phi: vec![vec![0.5, 0.3, 0.2], vec![0.4, 0.4, 0.2]],
            assignments: vec![],
            log_likelihood_trace: vec![],
        };
        assert_eq!(m.top_words(0, 2).unwrap(), vec![0, 1]);
        assert_eq!(m.top_words(1, 1).unwrap(), vec![0]);
        assert_eq!(m.top_words(1, 10).unwrap(), vec![0, 1, 2]);
        assert!(m.top_words(2, 1).is_err());
    }

    #[test]
    fn counts_are_conserved_every_sweep() {
        let c = disjoint_corpus();
        let mut s = GibbsSampler::new(&c, quick(4, 5)).unwrap();
        let total = c.total_tokens as u64;
        while !s.is_done() {
            s.sweep();
            assert_eq!(s.doc_topic_total(), total);
            assert_eq!(s.topic_word_total(), total);
            assert_eq!(s.topic_totals().iter().sum::<u64>(), total);
        }
    }
}
