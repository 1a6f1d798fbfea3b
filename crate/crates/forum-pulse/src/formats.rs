//! On-disk formats: CSV tables, the topic-model file, graph exports and
//! lexicon files.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use forum_pulse_core::corpus::Corpus;
use forum_pulse_core::interaction::InteractionGraph;
use forum_pulse_core::lda::{LdaConfig, TopicModel};
use forum_pulse_core::lexicon::Lexicon;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Shortest round-trip decimal form; used for every float cell.
pub fn num(x: f64) -> String {
    format!("{x}")
}

/// Empty cell for undefined values.
pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn file_digest(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(sha256_hex(&bytes))
}

pub fn write_csv<I, R>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_csv(path: &Path) -> Result<Vec<csv::StringRecord>> {
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut r = csv::Reader::from_path(path).map_err(|e| match e.kind() {
        csv::ErrorKind::Io(io) if io.kind() == std::io::ErrorKind::NotFound => {
            Error::MissingInput(path.to_path_buf())
        }
        _ => csv_err(e),
    })?;
    r.records()
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(csv_err)
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })?;
    w.write_all(b"\n")
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_slice(&bytes).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_corpus(path: &Path) -> Result<Corpus> {
    let mut corpus: Corpus = read_json(path)?;
    corpus.reindex();
    Ok(corpus)
}

pub fn vocabulary_hash(corpus: &Corpus) -> String {
    let mut h = Sha256::new();
    for t in corpus.vocabulary.terms() {
        h.update(t.as_bytes());
        h.update(b"\n");
    }
    hex::encode(h.finalize())
}

pub fn write_vocabulary(path: &Path, corpus: &Corpus) -> Result<()> {
    let v = &corpus.vocabulary;
    write_csv(
        path,
        &["term_id", "term", "document_frequency"],
        v.terms()
            .iter()
            .zip(v.document_frequency())
            .enumerate()
            .map(|(i, (t, df))| [i.to_string(), t.clone(), df.to_string()]),
    )
}

/// Serialized topic model. Per-token assignments are not stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format_version: u32,
    pub vocabulary_hash: String,
    pub config: LdaConfig,
    pub doc_ids: Vec<String>,
    pub theta: Vec<Vec<f64>>,
    pub phi: Vec<Vec<f64>>,
    pub log_likelihood_trace: Vec<f64>,
}

impl ModelFile {
    pub fn new(model: &TopicModel, corpus: &Corpus) -> Self {
        Self {
            format_version: MODEL_FORMAT_VERSION,
            vocabulary_hash: vocabulary_hash(corpus),
            config: model.config,
            doc_ids: model.doc_ids.clone(),
            theta: model.theta.clone(),
            phi: model.phi.clone(),
            log_likelihood_trace: model.log_likelihood_trace.clone(),
        }
    }

    pub fn into_model(self) -> TopicModel {
        TopicModel {
            config: self.config,
            doc_ids: self.doc_ids,
            theta: self.theta,
            phi: self.phi,
            assignments: Vec::new(),
            log_likelihood_trace: self.log_likelihood_trace,
        }
    }
}

pub fn write_model(path: &Path, model: &TopicModel, corpus: &Corpus) -> Result<()> {
    write_json(path, &ModelFile::new(model, corpus))
}

/// Load a model and check it was fitted on `corpus` when one is given.
pub fn read_model(path: &Path, corpus: Option<&Corpus>) -> Result<TopicModel> {
    let file: ModelFile = read_json(path)?;
    if file.format_version != MODEL_FORMAT_VERSION {
        return Err(Error::Data(format!(
            "{}: unsupported model format version {}",
            path.display(),
            file.format_version
        )));
    }
    if let Some(c) = corpus {
        if file.vocabulary_hash != vocabulary_hash(c) {
            return Err(Error::Data(format!(
                "{}: model was fitted on a different vocabulary",
                path.display()
            )));
        }
    }
    Ok(file.into_model())
}

pub fn write_edges_csv(path: &Path, g: &InteractionGraph) -> Result<()> {
    write_csv(
        path,
        &["from", "to", "weight"],
        g.edges.iter().map(|e| {
            [
                g.nodes[e.from].clone(),
                g.nodes[e.to].clone(),
                e.weight.to_string(),
            ]
        }),
    )
}

fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

pub fn graphml(g: &InteractionGraph) -> String {
    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    s.push_str("<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n");
    s.push_str("  <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"long\"/>\n");
    s.push_str("  <graph id=\"interactions\" edgedefault=\"directed\">\n");
    for n in &g.nodes {
        s.push_str(&format!("    <node id=\"{}\"/>\n", xml_escape(n)));
    }
    for e in &g.edges {
        s.push_str(&format!(
            "    <edge source=\"{}\" target=\"{}\">\n      <data key=\"weight\">{}</data>\n    </edge>\n",
            xml_escape(&g.nodes[e.from]),
            xml_escape(&g.nodes[e.to]),
            e.weight
        ));
    }
    s.push_str("  </graph>\n</graphml>\n");
    s
}

pub fn dot(g: &InteractionGraph) -> String {
    let mut s = String::from("digraph interactions {\n");
    for n in &g.nodes {
        s.push_str(&format!("  \"{}\";\n", dot_escape(n)));
    }
    for e in &g.edges {
        s.push_str(&format!(
            "  \"{}\" -> \"{}\" [weight={}];\n",
            dot_escape(&g.nodes[e.from]),
            dot_escape(&g.nodes[e.to]),
            e.weight
        ));
    }
    s.push_str("}\n");
    s
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub const DEMO_LEXICON: &str = include_str!("../data/demo_lexicon.json");

/// Parse a lexicon given as a JSON object mapping category names to word
/// arrays. Category order follows the file.
pub fn parse_lexicon(json: &str) -> std::result::Result<Lexicon, String> {
    let map: serde_json::Map<String, serde_json::Value> =
        serde_json::from_str(json).map_err(|e| e.to_string())?;
    let mut entries = Vec::with_capacity(map.len());
    for (name, words) in map {
        let words: Vec<String> = serde_json::from_value(words)
            .map_err(|_| format!("category {name:?} must be an array of strings"))?;
        entries.push((name, words));
    }
    Lexicon::new(entries).map_err(|e| e.to_string())
}

pub fn read_lexicon(path: Option<&Path>) -> Result<Lexicon> {
    match path {
        None => parse_lexicon(DEMO_LEXICON).map_err(Error::Internal),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            parse_lexicon(&text).map_err(|e| Error::Data(format!("{}: {e}", p.display())))
        }
    }
}
