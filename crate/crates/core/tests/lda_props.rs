use forum_pulse_core::corpus::Corpus;
use forum_pulse_core::fixture::topic_vocabulary;
use forum_pulse_core::lda::{fit, LdaConfig};
use forum_pulse_core::topics::select_k;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `docs_per_topic` documents per topic, each drawing 30 tokens from its own
/// 20-word vocabulary.
fn disjoint_corpus(k: usize, docs_per_topic: usize) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut terms = Vec::new();
    for t in 0..k {
        terms.extend(topic_vocabulary(t));
    }
    let mut docs = Vec::new();
    let mut ids = Vec::new();
    for i in 0..k * docs_per_topic {
        let t = i % k;
        let counts = (0..30).map(|_| ((t * 20 + rng.gen_range(0..20)) as u32, 1)).collect();
        docs.push(counts);
        ids.push(format!("doc{i:04}"));
    }
    Corpus::from_parts(terms, docs, ids).unwrap()
}

fn quick(k: usize, seed: u64, iterations: usize) -> LdaConfig {
    let mut c = LdaConfig::new(k, seed);
    c.iterations = iterations;
    c.burn_in = 40;
    c
}

#[test]
fn permuting_documents_permutes_theta() {
    let corpus = disjoint_corpus(3, 10);
    let n = corpus.len();
    let perm: Vec<usize> = (0..n).map(|i| (i * 7 + 3) % n).collect();
    let docs = perm
        .iter()
        .map(|&i| corpus.documents[i].counts.clone())
        .collect();
    let ids = perm.iter().map(|&i| corpus.doc_ids[i].clone()).collect();
    let shuffled = Corpus::from_parts(corpus.vocabulary.terms().to_vec(), docs, ids).unwrap();

    let a = fit(&corpus, quick(3, 9, 120)).unwrap();
    let b = fit(&shuffled, quick(3, 9, 120)).unwrap();
    for (j, &i) in perm.iter().enumerate() {
        assert_eq!(a.theta[i], b.theta[j]);
    }
    assert_eq!(a.phi, b.phi);
}

#[test]
fn doubling_iterations_never_lowers_the_best_likelihood() {
    let corpus = disjoint_corpus(4, 8);
    for seed in 0..10 {
        let short = fit(&corpus, quick(4, seed, 100)).unwrap();
        let long = fit(&corpus, quick(4, seed, 200)).unwrap();
        let best = |t: &[f64]| t.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert!(
            best(&long.log_likelihood_trace) >= best(&short.log_likelihood_trace),
            "seed {seed}"
        );
    }
}

#[test]
fn likelihood_trends_upward() {
    let corpus = disjoint_corpus(4, 8);
    let m = fit(&corpus, quick(4, 1, 200)).unwrap();
    let t = &m.log_likelihood_trace;
    let head: f64 = t[..10].iter().sum::<f64>() / 10.0;
    let tail: f64 = t[t.len() - 10..].iter().sum::<f64>() / 10.0;
    assert!(tail > head, "{head} -> {tail}");
}

#[test]
fn selection_on_disjoint_topics_reaches_zero_w_k() {
    let corpus = disjoint_corpus(4, 15);
    let base = quick(2, 5, 300);
    let sel = select_k(&corpus, 2, 6, &base, None).unwrap();
    assert_eq!(sel.reports.len(), 5);
    let best = sel.reports.iter().map(|r| r.w_k).min().unwrap();
    assert_eq!(sel.reports.iter().find(|r| r.k == sel.k).unwrap().w_k, best);
    assert!(best * 20 <= corpus.len(), "W_k* = {best}");
    // With two topics mean equals median, so every document counts.
    assert_eq!(sel.reports[0].w_k, corpus.len());
}
