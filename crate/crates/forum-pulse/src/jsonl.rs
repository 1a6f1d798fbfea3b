//! Pushshift-style JSONL dumps: one post or comment object per line.
//!
//! Field names follow Pushshift (`id`, `author`, `created_utc`, `score`,
//! `title`, `selftext`, `body`, `parent_id`, `link_id`). Lines that fail to
//! decode are counted in the dataset's tally and skipped; blank lines are
//! ignored.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use forum_pulse_core::fixture::SyntheticDump;
use forum_pulse_core::ingest::{
    Dataset, DatasetBuilder, RawComment, RawPost, RecordKind, TimeWindow,
};
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};

/// Accepts integer, float or numeric-string timestamps, as found in dumps.
fn epoch<'de, D: Deserializer<'de>>(de: D) -> std::result::Result<i64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Epoch {
        Int(i64),
        Float(f64),
        Text(String),
    }
    match Epoch::deserialize(de)? {
        Epoch::Int(i) => Ok(i),
        Epoch::Float(f) if f.is_finite() => Ok(f as i64),
        Epoch::Float(f) => Err(serde::de::Error::custom(format!("bad timestamp {f}"))),
        Epoch::Text(s) => s
            .trim()
            .parse::<f64>()
            .ok()
            .filter(|f| f.is_finite())
            .map(|f| f as i64)
            .ok_or_else(|| serde::de::Error::custom(format!("bad timestamp {s:?}"))),
    }
}

fn text_or_null<'de, D: Deserializer<'de>>(de: D) -> std::result::Result<String, D::Error> {
    Ok(Option::<String>::deserialize(de)?.unwrap_or_default())
}

#[derive(Debug, Serialize, Deserialize)]
struct PostLine {
    id: String,
    author: String,
    #[serde(deserialize_with = "epoch")]
    created_utc: i64,
    score: i64,
    #[serde(default, deserialize_with = "text_or_null")]
    title: String,
    #[serde(default, deserialize_with = "text_or_null")]
    selftext: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct CommentLine {
    id: String,
    author: String,
    #[serde(deserialize_with = "epoch")]
    created_utc: i64,
    score: i64,
    #[serde(default, deserialize_with = "text_or_null")]
    body: String,
    parent_id: String,
    link_id: String,
}

fn decode_post(line: &[u8]) -> Option<RawPost> {
    let p: PostLine = serde_json::from_slice(line).ok()?;
    Some(RawPost {
        id: p.id,
        author: p.author,
        created_utc: p.created_utc,
        score: p.score,
        title: p.title,
        selftext: p.selftext,
    })
}

fn decode_comment(line: &[u8]) -> Option<RawComment> {
    let c: CommentLine = serde_json::from_slice(line).ok()?;
    Some(RawComment {
        id: c.id,
        author: c.author,
        created_utc: c.created_utc,
        score: c.score,
        body: c.body,
        parent_id: c.parent_id,
        link_id: c.link_id,
    })
}

fn read_lines(mut reader: impl BufRead) -> std::io::Result<Vec<Vec<u8>>> {
    let mut lines = Vec::new();
    loop {
        let mut buf = Vec::new();
        if reader.read_until(b'\n', &mut buf)? == 0 {
            return Ok(lines);
        }
        if buf.iter().any(|b| !b.is_ascii_whitespace()) {
            lines.push(buf);
        }
    }
}

/// Decode both streams and assemble the dataset. Lines are decoded in
/// parallel; assembly follows stream order, so the result does not depend on
/// the thread count.
pub fn parse_dump(
    posts: impl BufRead,
    comments: impl BufRead,
    window: TimeWindow,
) -> std::io::Result<Dataset> {
    let post_lines = read_lines(posts)?;
    let comment_lines = read_lines(comments)?;
    let decoded_posts: Vec<Option<RawPost>> =
        post_lines.par_iter().map(|l| decode_post(l)).collect();
    let decoded_comments: Vec<Option<RawComment>> =
        comment_lines.par_iter().map(|l| decode_comment(l)).collect();

    let mut builder = DatasetBuilder::new(window);
    for p in decoded_posts {
        match p {
            Some(p) => builder.push_post(p),
            None => builder.record_malformed(RecordKind::Post),
        }
    }
    for c in decoded_comments {
        match c {
            Some(c) => builder.push_comment(c),
            None => builder.record_malformed(RecordKind::Comment),
        }
    }
    Ok(builder.build())
}

pub fn parse_dump_files(posts: &Path, comments: &Path, window: TimeWindow) -> Result<Dataset> {
    let open = |p: &Path| File::open(p).map(BufReader::new).map_err(|e| Error::io(p, e));
    let (pr, cr) = (open(posts)?, open(comments)?);
    parse_dump(pr, cr, window).map_err(|e| Error::io(posts, e))
}

/// Write a synthetic dump as two JSONL streams.
pub fn write_dump(
    dump: &SyntheticDump,
    mut posts: impl Write,
    mut comments: impl Write,
) -> std::io::Result<()> {
    for p in &dump.posts {
        let line = PostLine {
            id: p.id.clone(),
            author: p.author.clone(),
            created_utc: p.created_utc,
            score: p.score,
            title: p.title.clone(),
            selftext: p.selftext.clone(),
        };
        serde_json::to_writer(&mut posts, &line)?;
        posts.write_all(b"\n")?;
    }
    for c in &dump.comments {
        let line = CommentLine {
            id: c.id.clone(),
            author: c.author.clone(),
            created_utc: c.created_utc,
            score: c.score,
            body: c.body.clone(),
            parent_id: c.parent_id.clone(),
            link_id: c.link_id.clone(),
        };
        serde_json::to_writer(&mut comments, &line)?;
        comments.write_all(b"\n")?;
    }
    posts.flush()?;
    comments.flush()
}
