//! TREC qrels and run files.
//!
//! qrels: `query_id 0 doc_id grade`, whitespace separated.
//! run:   `query_id Q0 doc_id rank score tag`.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Relevance judgments: query -> doc -> grade (`> 0` is relevant).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Qrels {
    judgments: BTreeMap<String, HashMap<String, i32>>,
}

impl Qrels {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, query_id: impl Into<String>, doc_id: impl Into<String>, grade: i32) {
        self.judgments.entry(query_id.into()).or_default().insert(doc_id.into(), grade);
    }

    pub fn for_query(&self, query_id: &str) -> Option<&HashMap<String, i32>> {
        self.judgments.get(query_id)
    }

    pub fn query_ids(&self) -> impl Iterator<Item = &str> {
        self.judgments.keys().map(String::as_str)
    }

    pub fn num_relevant(&self, query_id: &str) -> usize {
        self.for_query(query_id)
            .map_or(0, |j| j.values().filter(|&&g| g > 0).count())
    }

    pub fn relevant_docs(&self, query_id: &str) -> impl Iterator<Item = &str> {
        self.for_query(query_id)
            .into_iter()
            .flat_map(|j| j.iter().filter(|(_, &g)| g > 0).map(|(d, _)| d.as_str()))
    }

    pub fn parse(reader: impl BufRead, source: &Path) -> Result<Self> {
        let mut qrels = Qrels::new();
        let mut offset = 0u64;
        for (n, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::io(source, e))?;
            let start = offset;
            offset += line.len() as u64 + 1;
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.is_empty() {
                continue;
            }
            let grade = match fields.as_slice() {
                [_, _, _, g] => g.parse::<i32>().ok(),
                _ => None,
            };
            let Some(grade) = grade else {
                return Err(Error::Malformed {
                    path: source.to_path_buf(),
                    offset: start,
                    docs: n,
                    message: "expected `query_id 0 doc_id grade`".into(),
                });
            };
            qrels.insert(fields[0], fields[2], grade);
        }
        Ok(qrels)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let f = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::parse(BufReader::new(f), path)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunEntry {
    pub doc_id: String,
    pub rank: u32,
    pub score: f64,
    pub tag: String,
}

/// A ranked result list per query.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Run {
    queries: BTreeMap<String, Vec<RunEntry>>,
}

impl Run {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a ranked list for `query_id`; ranks are assigned 1..n.
    pub fn push_ranking<I, S>(&mut self, query_id: impl Into<String>, ranked: I, tag: &str)
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        let entries = self.queries.entry(query_id.into()).or_default();
        for (doc_id, score) in ranked {
            entries.push(RunEntry {
                doc_id: doc_id.into(),
                rank: entries.len() as u32 + 1,
                score,
                tag: tag.to_string(),
            });
        }
    }

    pub fn query_ids(&self) -> impl Iterator<Item = &str> {
        self.queries.keys().map(String::as_str)
    }

    pub fn entries(&self, query_id: &str) -> Option<&[RunEntry]> {
        self.queries.get(query_id).map(Vec::as_slice)
    }

    /// Doc ids in evaluation order: descending score, ties by rank.
    pub fn ranked_docs(&self, query_id: &str) -> Vec<&str> {
        let Some(entries) = self.queries.get(query_id) else {
            return Vec::new();
        };
        let mut sorted: Vec<&RunEntry> = entries.iter().collect();
        sorted.sort_by(|a, b| {
            b.score
                .partial_cmp(&a.score)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.rank.cmp(&b.rank))
        });
        sorted.into_iter().map(|e| e.doc_id.as_str()).collect()
    }

    pub fn parse(reader: impl BufRead, source: &Path) -> Result<Self> {
        let mut run = Run::new();
        let mut offset = 0u64;
        for (n, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::io(source, e))?;
            let start = offset;
            offset += line.len() as u64 + 1;
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.is_empty() {
                continue;
            }
            let parsed = match fields.as_slice() {
                [q, _, d, r, s, t] => r.parse::<u32>().ok().zip(s.parse::<f64>().ok()).map(|(rank, score)| {
                    (
                        q.to_string(),
                        RunEntry {
                            doc_id: d.to_string(),
                            rank,
                            score,
                            tag: t.to_string(),
                        },
                    )
                }),
                _ => None,
            };
            let Some((q, entry)) = parsed else {
                return Err(Error::Malformed {
                    path: source.to_path_buf(),
                    offset: start,
                    docs: n,
                    message: "expected `query_id Q0 doc_id rank score tag`".into(),
                });
            };
            run.queries.entry(q).or_default().push(entry);
        }
        Ok(run)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let f = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::parse(BufReader::new(f), path)
    }

    pub fn write(&self, mut w: impl Write) -> io::Result<()> {
        for (q, entries) in &self.queries {
            for e in entries {
                writeln!(w, "{q} Q0 {} {} {} {}", e.doc_id, e.rank, format_score(e.score), e.tag)?;
            }
        }
        Ok(())
    }
}

/// Fixed-point rendering with ten significant digits.
pub fn format_score(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (9 - magnitude).clamp(0, 20) as usize;
    format!("{x:.decimals$}")
}
