use forum_pulse_core::corpus::{build_corpus_from_texts, CorpusConfig, Tokenizer};
use forum_pulse_core::fixture::{generate, FixtureConfig};
use forum_pulse_core::ingest::{Dataset, Record, TimeWindow};
use proptest::prelude::*;

fn records(seed: u64) -> Vec<Record> {
    let dump = generate(&FixtureConfig::new(seed, 30, 10, 3)).unwrap();
    dump.posts
        .into_iter()
        .map(Record::Post)
        .chain(dump.comments.into_iter().map(Record::Comment))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn reingesting_duplicates_changes_only_the_tally(seed in any::<u64>()) {
        let r = records(seed);
        let once = Dataset::from_records(r.clone(), TimeWindow::default());
        let twice = Dataset::from_records(r.iter().chain(&r).cloned(), TimeWindow::default());
        prop_assert_eq!(&once.posts, &twice.posts);
        prop_assert_eq!(&once.comments, &twice.comments);
        prop_assert_eq!(&once.authors, &twice.authors);
        prop_assert_eq!(twice.tally.duplicates(), r.len());
    }

    #[test]
    fn record_order_does_not_matter(seed in any::<u64>()) {
        let r = records(seed);
        let mut rev = r.clone();
        rev.reverse();
        prop_assert_eq!(
            Dataset::from_records(r, TimeWindow::default()),
            Dataset::from_records(rev, TimeWindow::default())
        );
    }

    #[test]
    fn corpus_is_deterministic_and_df_consistent(
        docs in prop::collection::vec(prop::collection::vec("[a-e]{2,3}", 1..12), 1..30),
    ) {
        let texts: Vec<(String, String)> = docs
            .iter()
            .enumerate()
            .map(|(i, words)| (format!("d{i:03}"), words.join(" ")))
            .collect();
        let cfg = CorpusConfig { min_df: 1, max_df_fraction: 1.0, phrase_min_count: 0 };
        let tok = Tokenizer::with_stopwords([]);
        let build = || {
            build_corpus_from_texts(texts.iter().map(|(a, b)| (a.as_str(), b.as_str())), &cfg, &tok)
        };
        let (a, b) = (build().unwrap(), build().unwrap());
        prop_assert_eq!(&a, &b);
        let mut df = vec![0usize; a.vocabulary.len()];
        let mut total = 0;
        for doc in &a.documents {
            for &(t, n) in &doc.counts {
                df[t as usize] += 1;
                total += n as usize;
            }
        }
        prop_assert_eq!(df.as_slice(), a.vocabulary.document_frequency());
        prop_assert_eq!(total, a.total_tokens);
    }
}
