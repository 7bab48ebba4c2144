//! Text ingestion: tokenization, stemming, vocabulary mapping and the
//! corpus/topic readers.

mod corpus;
pub mod porter;

pub use corpus::{read_corpus, read_topics, CorpusFormat, CorpusReader};

use std::collections::{HashMap, HashSet};

/// Dense term identifier, assigned at first sight during ingestion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TermId(pub u32);

impl TermId {
    /// Ids at or above this value are query-local out-of-vocabulary terms.
    pub const OOV_BASE: u32 = u32::MAX / 2;

    pub fn is_oov(self) -> bool {
        self.0 >= Self::OOV_BASE
    }
}

/// A stemmed token with its vocabulary id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub surface: String,
    pub term_id: TermId,
}

/// An ingested document: its collection identifier and term sequence.
///
/// Positions are implicit, 0-based and consecutive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub external_id: String,
    pub terms: Vec<TermId>,
}

impl Document {
    pub fn new(external_id: impl Into<String>, terms: Vec<TermId>) -> Self {
        Document {
            external_id: external_id.into(),
            terms,
        }
    }

    /// Token count, `|D|`.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

/// A topic turned into an ordered term sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    pub query_id: String,
    pub terms: Vec<TermId>,
}

/// Splits raw text into lowercased maximal alphanumeric runs.
///
/// Markup tags (`<...>` starting with a letter, `/` or `!`) are skipped
/// entirely, as is every other non-alphanumeric character.
pub fn tokenize(raw: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    let mut chars = raw.char_indices().peekable();
    while let Some((idx, c)) = chars.next() {
        if c == '<' {
            let rest = &raw[idx + 1..];
            let opens_tag = rest
                .chars()
                .next()
                .is_some_and(|n| n.is_ascii_alphabetic() || n == '/' || n == '!');
            if opens_tag {
                if let Some(close) = rest.find('>') {
                    if !current.is_empty() {
                        tokens.push(std::mem::take(&mut current));
                    }
                    let end = idx + 1 + close;
                    while chars.peek().is_some_and(|&(i, _)| i <= end) {
                        chars.next();
                    }
                    continue;
                }
            }
        }
        if c.is_alphanumeric() {
            current.extend(c.to_lowercase());
        } else if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

pub use porter::stem;

/// A small English stopword list, used only when explicitly enabled.
pub const DEFAULT_STOPWORDS: &[&str] = &[
    "a", "an", "and", "are", "as", "at", "be", "but", "by", "for", "from", "has", "have", "he",
    "in", "is", "it", "its", "of", "on", "or", "that", "the", "their", "there", "these", "they",
    "this", "to", "was", "were", "which", "will", "with",
];

/// Tokenize + optional stopword removal + stem.
#[derive(Debug, Clone, Default)]
pub struct Analyzer {
    stopwords: Option<HashSet<String>>,
}

impl Analyzer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_stopwords<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Analyzer {
            stopwords: Some(words.into_iter().map(Into::into).collect()),
        }
    }

    pub fn with_default_stopwords() -> Self {
        Self::with_stopwords(DEFAULT_STOPWORDS.iter().copied())
    }

    /// Stemmed surface forms, in text order.
    pub fn analyze(&self, raw: &str) -> Vec<String> {
        tokenize(raw)
            .into_iter()
            .filter(|t| self.stopwords.as_ref().is_none_or(|s| !s.contains(t)))
            .map(|t| stem(&t))
            .collect()
    }
}

/// Bidirectional surface <-> id map. Ids are dense and assigned in order of
/// first appearance.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocabulary {
    ids: HashMap<String, TermId>,
    terms: Vec<String>,
}

impl Vocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_terms(terms: Vec<String>) -> Self {
        let ids = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), TermId(i as u32)))
            .collect();
        Vocabulary { ids, terms }
    }

    pub fn intern(&mut self, surface: &str) -> TermId {
        if let Some(&id) = self.ids.get(surface) {
            return id;
        }
        let id = TermId(self.terms.len() as u32);
        self.terms.push(surface.to_string());
        self.ids.insert(surface.to_string(), id);
        id
    }

    pub fn get(&self, surface: &str) -> Option<TermId> {
        self.ids.get(surface).copied()
    }

    pub fn surface(&self, id: TermId) -> Option<&str> {
        self.terms.get(id.0 as usize).map(String::as_str)
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

    /// Maps stemmed surfaces to ids without growing the vocabulary.
    ///
    /// Unknown surfaces receive query-local ids at [`TermId::OOV_BASE`] and
    /// above (repeats of the same surface share one id), so they keep their
    /// position in the query but never match any posting.
    pub fn lookup_query(&self, surfaces: &[String]) -> Vec<TermId> {
        let mut oov: HashMap<&str, TermId> = HashMap::new();
        surfaces
            .iter()
            .map(|s| match self.get(s) {
                Some(id) => id,
                None => {
                    let next = TermId(TermId::OOV_BASE + oov.len() as u32);
                    *oov.entry(s.as_str()).or_insert(next)
                }
            })
            .collect()
    }

    pub fn tokens(&self, ids: &[TermId]) -> Vec<Token> {
        ids.iter()
            .map(|&term_id| Token {
                surface: self.surface(term_id).unwrap_or("<oov>").to_string(),
                term_id,
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokenize_examples() {
        assert!(tokenize("").is_empty());
        assert_eq!(tokenize("U.S. Trade"), vec!["u", "s", "trade"]);
        assert_eq!(tokenize("query-term order!"), vec!["query", "term", "order"]);
    }

    #[test]
    fn tokenize_strips_tags_keeps_numbers() {
        assert_eq!(
            tokenize("<TEXT>Oil prices in 1988</TEXT>"),
            vec!["oil", "prices", "in", "1988"]
        );
        assert_eq!(tokenize("a < b"), vec!["a", "b"]);
        assert_eq!(tokenize("<p class=\"x\">Ünïcode</p>"), vec!["ünïcode"]);
    }

    #[test]
    fn stopwords_off_by_default() {
        assert_eq!(Analyzer::new().analyze("the cat"), vec!["the", "cat"]);
        assert_eq!(Analyzer::with_default_stopwords().analyze("the cat"), vec!["cat"]);
    }

    #[test]
    fn oov_query_terms_get_distinct_ids() {
        let mut v = Vocabulary::new();
        let a = v.intern("a");
        let q = v.lookup_query(&["x".into(), "a".into(), "y".into(), "x".into()]);
        assert_eq!(q[1], a);
        assert!(q[0].is_oov() && q[2].is_oov());
        assert_ne!(q[0], q[2]);
        assert_eq!(q[0], q[3]);
    }

    #[test]
    fn query_and_document_parity() {
        let an = Analyzer::new();
        let mut v = Vocabulary::new();
        let doc: Vec<TermId> = an
            .analyze("Retrieval of ordered terms")
            .iter()
            .map(|s| v.intern(s))
            .collect();
        let q = v.lookup_query(&an.analyze("retrieval of ordered terms"));
        assert_eq!(doc, q);
    }
}
