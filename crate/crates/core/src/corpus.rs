//! Tokenization, phrase detection and the bag-of-words corpus fed to LDA.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::ingest::Dataset;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

/// The shipped English stopword list, one word per line, `#` comments.
pub const DEFAULT_STOPWORDS: &str = include_str!("stopwords_en.txt");

pub const DEFAULT_MIN_DF: usize = 5;
pub const DEFAULT_MAX_DF_FRACTION: f64 = 0.5;
pub const DEFAULT_PHRASE_MIN_COUNT: usize = 20;

/// Joins the two halves of a detected bigram.
pub const PHRASE_JOINER: char = '_';

#[derive(Debug, Clone)]
pub struct Tokenizer {
    stopwords: BTreeSet<String>,
}

impl Default for Tokenizer {
    fn default() -> Self {
        Self::with_stopwords(DEFAULT_STOPWORDS.lines())
    }
}

fn is_url(chunk: &str) -> bool {
    chunk.starts_with("http://") || chunk.starts_with("https://") || chunk.starts_with("www.")
}

impl Tokenizer {
    /// Lines starting with `#` and blank lines are ignored.
    pub fn with_stopwords<'a, I: IntoIterator<Item = &'a str>>(words: I) -> Self {
        let stopwords = words
            .into_iter()
            .map(str::trim)
            .filter(|w| !w.is_empty() && !w.starts_with('#'))
            .map(str::to_lowercase)
            .collect();
        Self { stopwords }
    }

    pub fn is_stopword(&self, w: &str) -> bool {
        self.stopwords.contains(w)
    }

    /// Lowercase, drop URLs, remove apostrophes, split on anything that is not
    /// alphanumeric, then drop single-character tokens and stopwords.
    pub fn tokenize(&self, text: &str) -> Vec<String> {
        let lower = text.to_lowercase();
        let mut out = Vec::new();
        for chunk in lower.split_whitespace().filter(|c| !is_url(c)) {
            let joined: String = chunk.chars().filter(|&c| c != '\'' && c != '\u{2019}').collect();
            for tok in joined.split(|c: char| !c.is_alphanumeric()) {
                if tok.chars().count() >= 2 && !self.stopwords.contains(tok) {
                    out.push(String::from(tok));
                }
            }
        }
        out
    }
}

/// Tokenize with the default stopword list.
pub fn tokenize(text: &str) -> Vec<String> {
    Tokenizer::default().tokenize(text)
}

/// Adjacent token pairs frequent enough to be merged into one token.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PhraseModel {
    // first token -> second tokens
    pairs: BTreeMap<String, BTreeSet<String>>,
}

impl PhraseModel {
    /// Collect every adjacent pair occurring at least `min_count` times across
    /// `docs`. A `min_count` of zero disables phrase detection.
    pub fn learn(docs: &[Vec<String>], min_count: usize) -> Self {
        let mut model = Self::default();
        if min_count == 0 {
            return model;
        }
        let mut counts: BTreeMap<(&str, &str), usize> = BTreeMap::new();
        for doc in docs {
            for w in doc.windows(2) {
                *counts.entry((&w[0], &w[1])).or_default() += 1;
            }
        }
        for ((a, b), _) in counts.into_iter().filter(|&(_, n)| n >= min_count) {
            model
                .pairs
                .entry(String::from(a))
                .or_default()
                .insert(String::from(b));
        }
        model
    }

    pub fn len(&self) -> usize {
        self.pairs.values().map(BTreeSet::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn contains(&self, a: &str, b: &str) -> bool {
        self.pairs.get(a).is_some_and(|s| s.contains(b))
    }

    /// Merge known pairs greedily from the left; merged tokens do not overlap.
    pub fn apply(&self, tokens: &[String]) -> Vec<String> {
        if self.pairs.is_empty() {
            return tokens.to_vec();
        }
        let mut out = Vec::with_capacity(tokens.len());
        let mut i = 0;
        while i < tokens.len() {
            if i + 1 < tokens.len() && self.contains(&tokens[i], &tokens[i + 1]) {
                let mut merged = tokens[i].clone();
                merged.push(PHRASE_JOINER);
                merged.push_str(&tokens[i + 1]);
                out.push(merged);
                i += 2;
            } else {
                out.push(tokens[i].clone());
                i += 1;
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct CorpusConfig {
    pub min_df: usize,
    pub max_df_fraction: f64,
    pub phrase_min_count: usize,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        Self {
            min_df: DEFAULT_MIN_DF,
            max_df_fraction: DEFAULT_MAX_DF_FRACTION,
            phrase_min_count: DEFAULT_PHRASE_MIN_COUNT,
        }
    }
}

impl CorpusConfig {
    pub fn validate(&self) -> Result<()> {
        if self.min_df < 1 {
            return Err(invalid!("min_df must be at least 1"));
        }
        if !(self.max_df_fraction > 0.0 && self.max_df_fraction <= 1.0) {
            return Err(invalid!(
                "max_df_fraction must lie in (0, 1], got {}",
                self.max_df_fraction
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Vocabulary {
    terms: Vec<String>,
    #[cfg_attr(feature = "serde", serde(skip))]
    index: BTreeMap<String, u32>,
    document_frequency: Vec<usize>,
}

impl Vocabulary {
    fn from_terms(terms: Vec<String>, document_frequency: Vec<usize>) -> Self {
        let index = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        Self {
            terms,
            index,
            document_frequency,
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn term(&self, id: u32) -> &str {
        &self.terms[id as usize]
    }

    pub fn id(&self, term: &str) -> Option<u32> {
        self.index.get(term).copied()
    }

    pub fn document_frequency(&self) -> &[usize] {
        &self.document_frequency
    }
}

/// Sparse term counts of one document, sorted by term id.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Document {
    pub counts: Vec<(u32, u32)>,
}

impl Document {
    pub fn len(&self) -> usize {
        self.counts.iter().map(|&(_, n)| n as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Term ids repeated by count, in term order.
    pub fn tokens(&self) -> impl Iterator<Item = u32> + '_ {
        self.counts
            .iter()
            .flat_map(|&(t, n)| core::iter::repeat(t).take(n as usize))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Corpus {
    pub documents: Vec<Document>,
    /// Post id of each document.
    pub doc_ids: Vec<String>,
    pub vocabulary: Vocabulary,
    pub total_tokens: usize,
    /// Posts whose documents came out empty.
    pub excluded_doc_ids: Vec<String>,
}

impl Corpus {
    /// Assemble a corpus from already-indexed documents. Document frequency and
    /// the token total are recomputed; zero counts are dropped.
    pub fn from_parts(
        terms: Vec<String>,
        documents: Vec<Vec<(u32, u32)>>,
        doc_ids: Vec<String>,
    ) -> Result<Self> {
        if documents.len() != doc_ids.len() {
            return Err(Error::DimensionMismatch(alloc::format!(
                "{} documents but {} ids",
                documents.len(),
                doc_ids.len()
            )));
        }
        let v = terms.len();
        let mut df = alloc::vec![0usize; v];
        let mut docs = Vec::with_capacity(documents.len());
        let mut total = 0;
        for counts in documents {
            let mut merged: BTreeMap<u32, u32> = BTreeMap::new();
            for (t, n) in counts {
                if t as usize >= v {
                    return Err(invalid!("term id {t} out of range for vocabulary of {v}"));
                }
                if n > 0 {
                    *merged.entry(t).or_default() += n;
                }
            }
            for (&t, &n) in &merged {
                df[t as usize] += 1;
                total += n as usize;
            }
            docs.push(Document {
                counts: merged.into_iter().collect(),
            });
        }
        Ok(Self {
            documents: docs,
            doc_ids,
            vocabulary: Vocabulary::from_terms(terms, df),
            total_tokens: total,
            excluded_doc_ids: Vec::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    /// Rebuild the term index after deserialization.
    pub fn reindex(&mut self) {
        let v = core::mem::take(&mut self.vocabulary);
        self.vocabulary = Vocabulary::from_terms(v.terms, v.document_frequency);
    }
}

/// Build the corpus from post titles and bodies. Comments are not modeled.
pub fn build_corpus(d: &Dataset, config: &CorpusConfig) -> Result<Corpus> {
    let texts: Vec<(&str, String)> = d.posts.iter().map(|p| (p.id.as_str(), p.text())).collect();
    build_corpus_from_texts(
        texts.iter().map(|(id, t)| (*id, t.as_str())),
        config,
        &Tokenizer::default(),
    )
}

pub fn build_corpus_from_texts<'a, I>(
    texts: I,
    config: &CorpusConfig,
    tokenizer: &Tokenizer,
) -> Result<Corpus>
where
    I: IntoIterator<Item = (&'a str, &'a str)>,
{
    config.validate()?;
    let (ids, raw): (Vec<&str>, Vec<Vec<String>>) = texts
        .into_iter()
        .map(|(id, text)| (id, tokenizer.tokenize(text)))
        .unzip();
    let phrases = PhraseModel::learn(&raw, config.phrase_min_count);
    let tokens: Vec<Vec<String>> = raw.iter().map(|t| phrases.apply(t)).collect();

    let mut df: BTreeMap<&str, usize> = BTreeMap::new();
    for doc in &tokens {
        let distinct: BTreeSet<&str> = doc.iter().map(String::as_str).collect();
        for t in distinct {
            *df.entry(t).or_default() += 1;
        }
    }
    let n_docs = tokens.len();
    let max_df = config.max_df_fraction * n_docs as f64;
    let keep = |t: &str| {
        let n = df[t];
        n >= config.min_df && n as f64 <= max_df
    };

    // Ids in first-occurrence order over documents in input order.
    let mut index: BTreeMap<&str, u32> = BTreeMap::new();
    let mut terms: Vec<String> = Vec::new();
    let mut documents = Vec::new();
    let mut doc_ids = Vec::new();
    let mut excluded = Vec::new();
    for (id, doc) in ids.iter().zip(&tokens) {
        let mut counts: BTreeMap<u32, u32> = BTreeMap::new();
        for t in doc.iter().map(String::as_str).filter(|t| keep(t)) {
            let next = index.len() as u32;
            let tid = *index.entry(t).or_insert_with(|| {
                terms.push(String::from(t));
                next
            });
            *counts.entry(tid).or_default() += 1;
        }
        if counts.is_empty() {
            excluded.push(String::from(*id));
        } else {
            documents.push(counts.into_iter().collect::<Vec<_>>());
            doc_ids.push(String::from(*id));
        }
    }
    if terms.is_empty() {
        return Err(Error::EmptyVocabulary(alloc::format!(
            "{} documents, {} distinct tokens, none with document frequency in [{}, {:.1}]",
            n_docs,
            df.len(),
            config.min_df,
            max_df
        )));
    }
    let mut corpus = Corpus::from_parts(terms, documents, doc_ids)?;
    corpus.excluded_doc_ids = excluded;
    Ok(corpus)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;
    use alloc::vec::Vec;

    fn strings(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn normalizes_text() {
        assert_eq!(tokenize("Pay my Credit CARD bill!"), strings(&["pay", "credit", "card", "bill"]));
        assert!(tokenize("").is_empty());
    }

    #[test]
    fn strips_urls_and_apostrophes() {
        assert_eq!(
            tokenize("I can't see https://example.com/x?y=1 www.bank.com rates, a b"),
            strings(&["see", "rates"])
        );
        assert_eq!(tokenize("401k vs. Roth-IRA"), strings(&["401k", "roth", "ira"]));
    }

    #[test]
    fn phrase_threshold_is_inclusive() {
        let doc = strings(&["credit", "card", "bill"]);
        let docs = vec![doc.clone(); 3];
        let at = PhraseModel::learn(&docs, 3);
        assert!(at.contains("credit", "card"));
        assert_eq!(at.apply(&doc), strings(&["credit_card", "bill"]));
        let above = PhraseModel::learn(&docs, 4);
        assert!(above.is_empty());
        assert_eq!(above.apply(&doc), doc);
    }

    #[test]
    fn phrase_merge_is_greedy_and_non_overlapping() {
        let docs = vec![strings(&["aa", "aa", "aa"]); 5];
        let m = PhraseModel::learn(&docs, 5);
        assert_eq!(m.apply(&docs[0]), strings(&["aa_aa", "aa"]));
    }

    #[test]
    fn phrase_pass_in_corpus() {
        let texts: Vec<(String, String)> = (0..20)
            .map(|i| (alloc::format!("p{i:02}"), alloc::format!("credit card payment number{}", i % 2)))
            .collect();
        let cfg = CorpusConfig { min_df: 1, max_df_fraction: 1.0, phrase_min_count: 20 };
        let c = build_corpus_from_texts(
            texts.iter().map(|(a, b)| (a.as_str(), b.as_str())),
            &cfg,
            &Tokenizer::default(),
        )
        .unwrap();
        assert!(c.vocabulary.id("credit_card").is_some());
        assert!(c.vocabulary.id("credit").is_none());
        let cfg = CorpusConfig { phrase_min_count: 21, ..cfg };
        let c = build_corpus_from_texts(
            texts.iter().map(|(a, b)| (a.as_str(), b.as_str())),
            &cfg,
            &Tokenizer::default(),
        )
        .unwrap();
        assert!(c.vocabulary.id("credit_card").is_none());
    }

    fn corpus(texts: &[&str], cfg: CorpusConfig) -> Result<Corpus> {
        let ids: Vec<String> = (0..texts.len()).map(|i| alloc::format!("p{i}")).collect();
        build_corpus_from_texts(
            ids.iter().map(String::as_str).zip(texts.iter().copied()),
            &cfg,
            &Tokenizer::default(),
        )
    }

    #[test]
    fn min_df_filters_rare_words() {
        let cfg = CorpusConfig { min_df: 2, max_df_fraction: 1.0, phrase_min_count: 0 };
        let c = corpus(&["loan rate", "loan", "loan banana"], cfg).unwrap();
        assert_eq!(c.vocabulary.terms(), &strings(&["loan"])[..]);
    }

    #[test]
    fn max_df_filters_ubiquitous_words() {
        let cfg = CorpusConfig { min_df: 1, max_df_fraction: 0.5, phrase_min_count: 0 };
        let c = corpus(&["money tax", "money tax", "money car", "money car"], cfg).unwrap();
        assert!(c.vocabulary.id("money").is_none());
        assert!(c.vocabulary.id("tax").is_some());
    }

    #[test]
    fn empty_vocabulary_is_an_error() {
        let cfg = CorpusConfig { min_df: 3, max_df_fraction: 1.0, phrase_min_count: 0 };
        assert!(matches!(corpus(&["alpha", "beta"], cfg), Err(Error::EmptyVocabulary(_))));
        assert!(matches!(
            corpus(&["alpha"], CorpusConfig { min_df: 0, ..cfg }),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            corpus(&["alpha"], CorpusConfig { max_df_fraction: 0.0, ..cfg }),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn hand_tokenized_five_post_fixture() {
        let texts = [
            "My credit card bill is due, should I pay the credit card?",
            "Paying off a car loan early: good idea? The loan rate is 5%.",
            "Bank charged me an overdraft fee on my checking account",
            "Car insurance went up after the accident. Any advice?",
            "Is it OK to pay rent with a credit card? The bank says no!",
        ];
        let cfg = CorpusConfig { min_df: 1, max_df_fraction: 0.5, phrase_min_count: 0 };
        let c = corpus(&texts, cfg).unwrap();
        // Hand tokenization: "credit" and "card" appear in 2 of 5 posts
        // (<= 2.5) and stay; "pay" appears in 2. Everything else once.
        let expected = strings(&[
            "credit", "card", "bill", "pay", "paying", "car", "loan", "early", "good",
            "idea", "rate", "bank", "charged", "overdraft", "fee", "checking", "account",
            "insurance", "accident", "advice", "rent", "says",
        ]);
        assert_eq!(c.vocabulary.terms(), &expected[..]);
        let c = corpus(&texts, CorpusConfig { min_df: 2, ..cfg }).unwrap();
        assert_eq!(c.vocabulary.terms(), &strings(&["credit", "card", "pay", "car", "bank"])[..]);
        assert_eq!(c.documents.len(), 5);
        assert!(c.excluded_doc_ids.is_empty());
    }

    #[test]
    fn twelve_term_fixture() {
        // Hand count: 12 distinct terms over 5 posts.
        let texts = [
            "mortgage refinance rate house",
            "house rent apartment",
            "salary offer job mortgage",
            "tax refund income salary",
            "refund job income apartment",
        ];
        let cfg = CorpusConfig { min_df: 1, max_df_fraction: 1.0, phrase_min_count: 0 };
        let c = corpus(&texts, cfg).unwrap();
        let expected = strings(&[
            "mortgage", "refinance", "rate", "house", "rent", "apartment", "salary", "offer",
            "job", "tax", "refund", "income",
        ]);
        assert_eq!(c.vocabulary.terms(), &expected[..]);
        // min_df = 2 keeps exactly the terms shared by two posts.
        let c = corpus(&texts, CorpusConfig { min_df: 2, ..cfg }).unwrap();
        assert_eq!(
            c.vocabulary.terms(),
            &strings(&["mortgage", "house", "apartment", "salary", "job", "refund", "income"])[..]
        );
        assert_eq!(c.vocabulary.document_frequency(), &[2, 2, 2, 2, 2, 2, 2]);
        assert_eq!(c.total_tokens, 14);
    }

    #[test]
    fn empty_documents_are_excluded() {
        let cfg = CorpusConfig { min_df: 1, max_df_fraction: 1.0, phrase_min_count: 0 };
        let c = corpus(&["loan", "", "the and"], cfg).unwrap();
        assert_eq!(c.doc_ids, strings(&["p0"]));
        assert_eq!(c.excluded_doc_ids, strings(&["p1", "p2"]));
    }

    #[test]
    fn from_parts_rejects_bad_ids() {
        assert!(Corpus::from_parts(strings(&["a"]), vec![vec![(1, 1)]], strings(&["d"])).is_err());
        assert!(Corpus::from_parts(strings(&["a"]), vec![vec![(0, 1)]], vec![]).is_err());
    }
}
