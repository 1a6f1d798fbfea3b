//! Allocation-only analytics for discussion-forum dumps.
//!
//! Everything in this crate is pure computation over in-memory data: dataset
//! assembly and activity statistics, corpus construction, collapsed Gibbs LDA,
//! skewness-driven topic-count selection, dominant-topic analytics, lexicon
//! profiling with PCA, and user interaction metrics. File formats, the CLI and
//! parallel drivers live in the `forum-pulse` crate.
//!
//! The crate is `no_std` unless the `std` feature is enabled; it only needs
//! `alloc`.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod corpus;
pub mod error;
pub mod fixture;
pub mod ingest;
pub mod interaction;
pub mod lda;
pub mod lexicon;
pub mod linalg;
pub mod rng;
pub mod topics;

pub use error::{Error, Result};

/// Author names that stand for removed accounts. Their content is kept, but
/// they never appear in author tables, graphs or user metrics.
pub const SENTINEL_AUTHORS: [&str; 2] = ["[deleted]", "[removed]"];

/// True when `author` is a deleted/removed placeholder or empty.
pub fn is_sentinel_author(author: &str) -> bool {
    author.is_empty() || SENTINEL_AUTHORS.contains(&author)
}
