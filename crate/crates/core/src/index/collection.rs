use std::collections::HashMap;

use super::window::{self, WindowSpec};
use super::PositionalIndex;
use crate::text::{Document, TermId};

/// Read access to the statistics every scorer needs.
///
/// Implemented by [`PositionalIndex`] and by [`IndexOverlay`], which layers a
/// few ephemeral documents over an existing index.
pub trait Collection: Sync {
    fn num_docs(&self) -> usize;

    /// `|C|`.
    fn total_tokens(&self) -> u64;

    fn cf(&self, term: TermId) -> u64;

    /// `|D|`.
    fn doc_len(&self, doc: u32) -> u32;

    fn external_id(&self, doc: u32) -> &str;

    /// Ascending positions of `term` in `doc`; empty when absent.
    fn positions(&self, term: TermId, doc: u32) -> &[u32];

    /// Ascending ordinals of the documents containing `term`.
    fn docs_containing(&self, term: TermId) -> Vec<u32>;

    /// Sum of [`Collection::window_count`] over all documents.
    fn collection_window_count(&self, a: TermId, b: TermId, spec: WindowSpec) -> u64;

    /// `Df(a, b)`: documents with `a` followed by `b` within `window` positions.
    fn pair_doc_freq(&self, a: TermId, b: TermId, window: u32) -> u64;

    fn window_count(&self, doc: u32, a: TermId, b: TermId, spec: WindowSpec) -> u64 {
        spec.count(self.positions(a, doc), self.positions(b, doc), a == b)
    }
}

struct OverlayDoc {
    external_id: String,
    len: u32,
    positions: HashMap<TermId, Vec<u32>>,
}

impl OverlayDoc {
    fn new(doc: &Document) -> Self {
        let mut positions: HashMap<TermId, Vec<u32>> = HashMap::new();
        for (p, &t) in doc.terms.iter().enumerate() {
            positions.entry(t).or_default().push(p as u32);
        }
        OverlayDoc {
            external_id: doc.external_id.clone(),
            len: doc.terms.len() as u32,
            positions,
        }
    }

    fn positions(&self, t: TermId) -> &[u32] {
        self.positions.get(&t).map(Vec::as_slice).unwrap_or(&[])
    }
}

/// An index plus a handful of extra documents that are never persisted.
///
/// Extra documents take ordinals `base.num_docs()..` and contribute to every
/// collection statistic.
pub struct IndexOverlay<'a> {
    base: &'a PositionalIndex,
    extra: Vec<OverlayDoc>,
    extra_tokens: u64,
}

impl<'a> IndexOverlay<'a> {
    pub fn new(base: &'a PositionalIndex, docs: &[Document]) -> Self {
        let extra: Vec<OverlayDoc> = docs.iter().map(OverlayDoc::new).collect();
        let extra_tokens = extra.iter().map(|d| d.len as u64).sum();
        IndexOverlay {
            base,
            extra,
            extra_tokens,
        }
    }

    /// Ordinal of the `k`-th extra document.
    pub fn ordinal(&self, k: usize) -> u32 {
        (self.base.num_docs() + k) as u32
    }

    fn extra_doc(&self, doc: u32) -> Option<&OverlayDoc> {
        (doc as usize).checked_sub(self.base.num_docs()).map(|k| &self.extra[k])
    }
}

impl Collection for IndexOverlay<'_> {
    fn num_docs(&self) -> usize {
        self.base.num_docs() + self.extra.len()
    }

    fn total_tokens(&self) -> u64 {
        self.base.total_tokens() + self.extra_tokens
    }

    fn cf(&self, term: TermId) -> u64 {
        self.base.cf(term) + self.extra.iter().map(|d| d.positions(term).len() as u64).sum::<u64>()
    }

    fn doc_len(&self, doc: u32) -> u32 {
        match self.extra_doc(doc) {
            Some(d) => d.len,
            None => self.base.doc_len(doc),
        }
    }

    fn external_id(&self, doc: u32) -> &str {
        match self.extra_doc(doc) {
            Some(d) => &d.external_id,
            None => self.base.external_id(doc),
        }
    }

    fn positions(&self, term: TermId, doc: u32) -> &[u32] {
        match self.extra_doc(doc) {
            Some(d) => d.positions(term),
            None => self.base.positions(term, doc),
        }
    }

    fn docs_containing(&self, term: TermId) -> Vec<u32> {
        let mut docs = self.base.docs_containing(term);
        docs.extend(
            self.extra
                .iter()
                .enumerate()
                .filter(|(_, d)| !d.positions(term).is_empty())
                .map(|(k, _)| self.ordinal(k)),
        );
        docs
    }

    fn collection_window_count(&self, a: TermId, b: TermId, spec: WindowSpec) -> u64 {
        self.base.collection_window_count(a, b, spec)
            + self
                .extra
                .iter()
                .map(|d| spec.count(d.positions(a), d.positions(b), a == b))
                .sum::<u64>()
    }

    fn pair_doc_freq(&self, a: TermId, b: TermId, window: u32) -> u64 {
        self.base.pair_doc_freq(a, b, window)
            + self
                .extra
                .iter()
                .filter(|d| window::has_ordered(d.positions(a), d.positions(b), window))
                .count() as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::Vocabulary;

    #[test]
    fn overlay_adds_to_every_statistic() {
        let mut vocab = Vocabulary::new();
        let (a, b, x) = (vocab.intern("a"), vocab.intern("b"), vocab.intern("x"));
        let base = PositionalIndex::build(vocab, vec![Document::new("d0", vec![a, b, x])]).unwrap();
        let extra = [Document::new("e0", vec![x, a, x, b]), Document::new("e1", vec![b, a])];
        let ov = IndexOverlay::new(&base, &extra);
        assert_eq!(ov.num_docs(), 3);
        assert_eq!(ov.total_tokens(), 9);
        assert_eq!(ov.cf(a), 3);
        assert_eq!(ov.doc_len(ov.ordinal(0)), 4);
        assert_eq!(ov.external_id(ov.ordinal(1)), "e1");
        assert_eq!(ov.positions(b, ov.ordinal(0)), &[3]);
        assert_eq!(ov.docs_containing(a), vec![0, 1, 2]);
        assert_eq!(ov.pair_doc_freq(a, b, 4), 2);
        assert_eq!(ov.pair_doc_freq(b, a, 4), 1);
        assert_eq!(ov.collection_window_count(a, b, WindowSpec::exact_phrase()), 1);
        assert_eq!(ov.collection_window_count(a, b, WindowSpec::unordered(8)), 3);
        // base is untouched
        assert_eq!(base.cf(a), 1);
    }
}
