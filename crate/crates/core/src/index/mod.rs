//! Positional inverted index and the window statistics the scorers consume.

mod collection;
mod persist;
pub mod window;

pub use collection::{Collection, IndexOverlay};
pub use persist::{manifest_hash, FORMAT_VERSION};
pub use window::{WindowKind, WindowSpec};

use std::collections::HashMap;
use std::sync::RwLock;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::text::{Document, TermId, Vocabulary};

/// Documents per parallel build batch.
const BUILD_BATCH: usize = 4096;

/// Occurrences of one term: ascending doc ordinals, each with ascending positions.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PostingList {
    docs: Vec<u32>,
    /// `positions[offsets[k]..offsets[k + 1]]` belongs to `docs[k]`.
    offsets: Vec<u32>,
    positions: Vec<u32>,
}

impl PostingList {
    fn new() -> Self {
        PostingList {
            docs: Vec::new(),
            offsets: vec![0],
            positions: Vec::new(),
        }
    }

    pub(crate) fn from_parts(docs: Vec<u32>, offsets: Vec<u32>, positions: Vec<u32>) -> Result<Self> {
        let well_formed = offsets.len() == docs.len() + 1
            && offsets.first() == Some(&0)
            && offsets.last().map(|&o| o as usize) == Some(positions.len())
            && offsets.windows(2).all(|w| w[0] < w[1])
            && docs.windows(2).all(|w| w[0] < w[1]);
        if !well_formed {
            return Err(Error::Format("inconsistent posting list".into()));
        }
        Ok(PostingList {
            docs,
            offsets,
            positions,
        })
    }

    fn push(&mut self, doc: u32, positions: &[u32]) {
        self.docs.push(doc);
        self.positions.extend_from_slice(positions);
        self.offsets.push(self.positions.len() as u32);
    }

    /// Collection frequency.
    pub fn cf(&self) -> u64 {
        self.positions.len() as u64
    }

    /// Document frequency.
    pub fn df(&self) -> usize {
        self.docs.len()
    }

    pub fn docs(&self) -> &[u32] {
        &self.docs
    }

    pub(crate) fn offsets(&self) -> &[u32] {
        &self.offsets
    }

    pub(crate) fn all_positions(&self) -> &[u32] {
        &self.positions
    }

    pub fn entries(&self) -> impl Iterator<Item = (u32, &[u32])> + '_ {
        self.docs.iter().enumerate().map(move |(k, &d)| {
            let (s, e) = (self.offsets[k] as usize, self.offsets[k + 1] as usize);
            (d, &self.positions[s..e])
        })
    }

    pub fn positions_in(&self, doc: u32) -> &[u32] {
        match self.docs.binary_search(&doc) {
            Ok(k) => &self.positions[self.offsets[k] as usize..self.offsets[k + 1] as usize],
            Err(_) => &[],
        }
    }
}

/// Collection-level statistics.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CollectionStats {
    pub num_docs: usize,
    /// `|C|`, the total token count.
    pub total_tokens: u64,
    pub doc_lengths: Vec<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum PairKey {
    Window(TermId, TermId, WindowSpec),
    DocFreq(TermId, TermId, u32),
}

/// Immutable positional index over a document collection.
#[derive(Debug)]
pub struct PositionalIndex {
    vocab: Vocabulary,
    doc_ids: Vec<String>,
    doc_map: HashMap<String, u32>,
    stats: CollectionStats,
    postings: Vec<PostingList>,
    cache: RwLock<HashMap<PairKey, u64>>,
}

static EMPTY_POSTINGS: PostingList = PostingList {
    docs: Vec::new(),
    offsets: Vec::new(),
    positions: Vec::new(),
};

impl PositionalIndex {
    /// Builds an index from documents whose terms were interned into `vocab`.
    ///
    /// Documents are processed in parallel batches and merged in input order,
    /// so the result does not depend on the worker count.
    pub fn build<I>(vocab: Vocabulary, documents: I) -> Result<Self>
    where
        I: IntoIterator<Item = Document>,
    {
        Self::try_build(vocab, documents.into_iter().map(Ok))
    }

    /// As [`PositionalIndex::build`], over a fallible document stream.
    pub fn try_build<I>(vocab: Vocabulary, documents: I) -> Result<Self>
    where
        I: IntoIterator<Item = Result<Document>>,
    {
        let mut postings: Vec<PostingList> = Vec::new();
        let mut doc_ids = Vec::new();
        let mut doc_lengths = Vec::new();
        let mut batch = Vec::with_capacity(BUILD_BATCH);
        let mut iter = documents.into_iter();
        loop {
            batch.clear();
            for doc in iter.by_ref().take(BUILD_BATCH) {
                batch.push(doc?);
            }
            if batch.is_empty() {
                break;
            }
            let grouped: Vec<Vec<(TermId, Vec<u32>)>> = batch.par_iter().map(group_positions).collect();
            for (doc, groups) in batch.iter_mut().zip(grouped) {
                let ordinal = doc_ids.len() as u32;
                for (term, positions) in groups {
                    let t = term.0 as usize;
                    if t >= vocab.len() {
                        return Err(Error::Invalid(format!(
                            "document {} uses term id {} outside the vocabulary",
                            doc.external_id, term.0
                        )));
                    }
                    if postings.len() <= t {
                        postings.resize_with(t + 1, PostingList::new);
                    }
                    postings[t].push(ordinal, &positions);
                }
                doc_lengths.push(doc.terms.len() as u32);
                doc_ids.push(std::mem::take(&mut doc.external_id));
            }
        }
        if doc_ids.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        postings.resize_with(vocab.len(), PostingList::new);
        Ok(Self::from_parts(vocab, doc_ids, doc_lengths, postings))
    }

    pub(crate) fn from_parts(
        vocab: Vocabulary,
        doc_ids: Vec<String>,
        doc_lengths: Vec<u32>,
        postings: Vec<PostingList>,
    ) -> Self {
        let total_tokens = doc_lengths.iter().map(|&l| l as u64).sum();
        let doc_map = doc_ids.iter().enumerate().map(|(i, d)| (d.clone(), i as u32)).collect();
        PositionalIndex {
            doc_map,
            vocab,
            stats: CollectionStats {
                num_docs: doc_ids.len(),
                total_tokens,
                doc_lengths,
            },
            doc_ids,
            postings,
            cache: RwLock::new(HashMap::new()),
        }
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn stats(&self) -> &CollectionStats {
        &self.stats
    }

    pub fn doc_ids(&self) -> &[String] {
        &self.doc_ids
    }

    pub fn postings(&self, term: TermId) -> &PostingList {
        self.postings.get(term.0 as usize).unwrap_or(&EMPTY_POSTINGS)
    }

    pub fn doc_ordinal(&self, external_id: &str) -> Option<u32> {
        self.doc_map.get(external_id).copied()
    }

    /// Rebuilds the term sequence of one document from the postings.
    pub fn reconstruct(&self, doc: u32) -> Vec<TermId> {
        let mut terms = vec![TermId(u32::MAX); self.stats.doc_lengths[doc as usize] as usize];
        for (t, list) in self.postings.iter().enumerate() {
            for &p in list.positions_in(doc) {
                terms[p as usize] = TermId(t as u32);
            }
        }
        terms
    }

    fn cached(&self, key: PairKey, compute: impl FnOnce() -> u64) -> u64 {
        if let Some(&v) = self.cache.read().expect("cache lock").get(&key) {
            return v;
        }
        let v = compute();
        self.cache.write().expect("cache lock").insert(key, v);
        v
    }

    /// Visits every document containing both terms.
    fn for_each_common(&self, a: TermId, b: TermId, mut f: impl FnMut(&[u32], &[u32]) -> bool) {
        let (pa, pb) = (self.postings(a), self.postings(b));
        let mut ea = pa.entries().peekable();
        let mut eb = pb.entries().peekable();
        while let (Some(&(da, xa)), Some(&(db, xb))) = (ea.peek(), eb.peek()) {
            match da.cmp(&db) {
                std::cmp::Ordering::Less => {
                    ea.next();
                }
                std::cmp::Ordering::Greater => {
                    eb.next();
                }
                std::cmp::Ordering::Equal => {
                    if !f(xa, xb) {
                        return;
                    }
                    ea.next();
                    eb.next();
                }
            }
        }
    }

    fn compute_collection_window_count(&self, a: TermId, b: TermId, spec: WindowSpec) -> u64 {
        let mut total = 0;
        self.for_each_common(a, b, |xa, xb| {
            total += spec.count(xa, xb, a == b);
            true
        });
        total
    }

    fn compute_pair_doc_freq(&self, a: TermId, b: TermId, window: u32) -> u64 {
        let mut n = 0;
        self.for_each_common(a, b, |xa, xb| {
            n += window::has_ordered(xa, xb, window) as u64;
            true
        });
        n
    }
}

/// Splits one document into per-term ascending position lists, ordered by term id.
fn group_positions(doc: &Document) -> Vec<(TermId, Vec<u32>)> {
    let mut pairs: Vec<(TermId, u32)> = doc.terms.iter().enumerate().map(|(p, &t)| (t, p as u32)).collect();
    pairs.sort_unstable();
    let mut groups: Vec<(TermId, Vec<u32>)> = Vec::new();
    for (t, p) in pairs {
        match groups.last_mut() {
            Some((last, ps)) if *last == t => ps.push(p),
            _ => groups.push((t, vec![p])),
        }
    }
    groups
}

impl Collection for PositionalIndex {
    fn num_docs(&self) -> usize {
        self.stats.num_docs
    }

    fn total_tokens(&self) -> u64 {
        self.stats.total_tokens
    }

    fn cf(&self, term: TermId) -> u64 {
        self.postings(term).cf()
    }

    fn doc_len(&self, doc: u32) -> u32 {
        self.stats.doc_lengths[doc as usize]
    }

    fn external_id(&self, doc: u32) -> &str {
        &self.doc_ids[doc as usize]
    }

    fn positions(&self, term: TermId, doc: u32) -> &[u32] {
        self.postings(term).positions_in(doc)
    }

    fn docs_containing(&self, term: TermId) -> Vec<u32> {
        self.postings(term).docs().to_vec()
    }

    fn collection_window_count(&self, a: TermId, b: TermId, spec: WindowSpec) -> u64 {
        self.cached(PairKey::Window(a, b, spec), || {
            self.compute_collection_window_count(a, b, spec)
        })
    }

    fn pair_doc_freq(&self, a: TermId, b: TermId, window: u32) -> u64 {
        self.cached(PairKey::DocFreq(a, b, window), || {
            self.compute_pair_doc_freq(a, b, window)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn index_of(docs: &[&str]) -> PositionalIndex {
        let mut vocab = Vocabulary::new();
        let docs: Vec<Document> = docs
            .iter()
            .enumerate()
            .map(|(i, text)| {
                let terms = text.split_whitespace().map(|t| vocab.intern(t)).collect();
                Document::new(format!("d{i}"), terms)
            })
            .collect();
        PositionalIndex::build(vocab, docs).unwrap()
    }

    fn t(index: &PositionalIndex, s: &str) -> TermId {
        index.vocab().get(s).unwrap()
    }

    #[test]
    fn single_doc_stats() {
        let idx = index_of(&["a b a"]);
        assert_eq!(idx.cf(t(&idx, "a")), 2);
        assert_eq!(idx.cf(t(&idx, "b")), 1);
        assert_eq!(idx.total_tokens(), 3);
        assert_eq!(idx.num_docs(), 1);
        assert_eq!(index_of(&["x", "y"]).num_docs(), 2);
    }

    #[test]
    fn empty_stream_is_an_error() {
        assert!(matches!(
            PositionalIndex::build(Vocabulary::new(), Vec::new()),
            Err(Error::EmptyCorpus)
        ));
    }

    #[test]
    fn window_counts_on_abcab() {
        let idx = index_of(&["a b c a b"]);
        let (a, b) = (t(&idx, "a"), t(&idx, "b"));
        assert_eq!(idx.window_count(0, a, b, WindowSpec::exact_phrase()), 2);
        assert_eq!(idx.window_count(0, a, b, WindowSpec::ordered(4)), 2);
        assert_eq!(idx.window_count(0, a, b, WindowSpec::unordered(8)), 4);
        assert_eq!(idx.window_count(0, a, TermId(999), WindowSpec::unordered(8)), 0);
        // single-doc collection
        assert_eq!(idx.collection_window_count(a, b, WindowSpec::exact_phrase()), 2);
    }

    #[test]
    fn collection_counts_sum_docs() {
        let idx = index_of(&["a b x a b", "a b a b", "c d"]);
        let (a, b, c) = (t(&idx, "a"), t(&idx, "b"), t(&idx, "c"));
        assert_eq!(idx.collection_window_count(a, b, WindowSpec::exact_phrase()), 4);
        assert_eq!(idx.collection_window_count(a, c, WindowSpec::unordered(8)), 0);
    }

    #[test]
    fn pair_doc_freq_examples() {
        let idx = index_of(&["a x b", "b a", "a y y b", "q"]);
        let (a, b) = (t(&idx, "a"), t(&idx, "b"));
        assert_eq!(idx.pair_doc_freq(a, b, 4), 2);
        assert_eq!(idx.pair_doc_freq(b, a, 4), 1);
        assert_eq!(idx.pair_doc_freq(a, t(&idx, "q"), 4), 0);

        let idx = index_of(&["a z a", "a"]);
        assert_eq!(idx.pair_doc_freq(t(&idx, "a"), t(&idx, "a"), 4), 1);
    }

    #[test]
    fn posting_invariants() {
        let idx = index_of(&["a b a c", "c c a", "b"]);
        for term in 0..idx.vocab().len() as u32 {
            let list = idx.postings(TermId(term));
            assert!(list.docs().windows(2).all(|w| w[0] < w[1]));
            let mut sum = 0;
            for (_, ps) in list.entries() {
                assert!(ps.windows(2).all(|w| w[0] < w[1]));
                sum += ps.len() as u64;
            }
            assert_eq!(sum, list.cf());
        }
        let cf_total: u64 = (0..idx.vocab().len() as u32).map(|x| idx.cf(TermId(x))).sum();
        assert_eq!(cf_total, idx.total_tokens());
        assert_eq!(idx.reconstruct(1), vec![t(&idx, "c"), t(&idx, "c"), t(&idx, "a")]);
    }
}
