//! Seeded synthetic collections with planted query-term pairs whose ordered
//! document frequencies are known in advance.
//!
//! Every planted document holds exactly one occurrence of each term of its
//! pair, `first` and `second` separated by `0..=max_gap` filler tokens, so
//! `Df(first, second)` and `Df(second, first)` equal the planted counts for
//! any window of at least `max_gap + 2`. Filler-only documents contain no
//! planted term.

use std::io::{self, Write};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::eval::Qrels;
use crate::index::PositionalIndex;
use crate::text::{Document, Query, Vocabulary};

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub filler_docs: usize,
    pub pairs: usize,
    /// Planted documents per pair, split between the two orders.
    pub planted_per_pair: usize,
    pub filler_vocab: usize,
    pub min_len: usize,
    pub max_len: usize,
    pub max_gap: usize,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            filler_docs: 200,
            pairs: 30,
            planted_per_pair: 8,
            filler_vocab: 400,
            min_len: 20,
            max_len: 60,
            max_gap: 2,
            seed: 1,
        }
    }
}

impl SynthConfig {
    /// About `docs` documents, 40% of them planted.
    pub fn with_docs(docs: usize, seed: u64) -> Self {
        let base = SynthConfig::default();
        let pairs = (docs * 2 / 5 / base.planted_per_pair).max(1);
        SynthConfig {
            filler_docs: docs.saturating_sub(pairs * base.planted_per_pair),
            pairs,
            seed,
            ..base
        }
    }

    fn validate(&self) -> Result<()> {
        if self.planted_per_pair < 2 || self.filler_vocab == 0 || self.min_len == 0 || self.min_len > self.max_len {
            return Err(Error::InvalidParam(format!("inconsistent synthetic corpus settings: {self:?}")));
        }
        if self.filler_docs + self.pairs == 0 {
            return Err(Error::EmptyCorpus);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlantedPair {
    pub first: String,
    pub second: String,
    /// Documents with `first` before `second`.
    pub df_ab: usize,
    pub df_ba: usize,
    /// Documents of each order, by index into [`SyntheticCollection::documents`].
    pub ordered_docs: Vec<usize>,
    pub reversed_docs: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthDoc {
    pub id: String,
    pub tokens: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct SyntheticCollection {
    pub config: SynthConfig,
    pub documents: Vec<SynthDoc>,
    pub pairs: Vec<PlantedPair>,
    /// Indices of documents without planted terms.
    pub filler_only: Vec<usize>,
}

fn filler(rng: &mut ChaCha8Rng, vocab: usize) -> String {
    format!("f{}", rng.random_range(0..vocab))
}

/// Ordered-pair count for stratum `pair % 3`: equal split, mild skew, strong skew.
fn planted_split(rng: &mut ChaCha8Rng, pair: usize, total: usize) -> usize {
    let half = total / 2;
    let three_quarters = total * 3 / 4;
    match pair % 3 {
        0 => half,
        1 => rng.random_range(half + 1..=three_quarters.max(half + 1)),
        _ => rng.random_range((three_quarters + 1).min(total)..=total),
    }
}

impl SyntheticCollection {
    pub fn generate(config: SynthConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut bodies: Vec<Vec<String>> = Vec::new();
        let mut pairs = Vec::new();
        let random_len = |rng: &mut ChaCha8Rng| rng.random_range(config.min_len..=config.max_len);

        for k in 0..config.pairs {
            let (first, second) = (format!("p{k}a"), format!("p{k}b"));
            let mut df_ab = planted_split(&mut rng, k, config.planted_per_pair);
            if rng.random_bool(0.5) {
                df_ab = config.planted_per_pair - df_ab;
            }
            let mut pair = PlantedPair {
                first,
                second,
                df_ab,
                df_ba: config.planted_per_pair - df_ab,
                ordered_docs: Vec::new(),
                reversed_docs: Vec::new(),
            };
            for n in 0..config.planted_per_pair {
                let ordered = n < df_ab;
                let (x, y) = if ordered {
                    (&pair.first, &pair.second)
                } else {
                    (&pair.second, &pair.first)
                };
                let gap = rng.random_range(0..=config.max_gap);
                let len = random_len(&mut rng).max(gap + 2);
                let at = rng.random_range(0..=len - gap - 2);
                let mut tokens: Vec<String> = (0..len).map(|_| filler(&mut rng, config.filler_vocab)).collect();
                tokens[at] = x.clone();
                tokens[at + gap + 1] = y.clone();
                if ordered {
                    pair.ordered_docs.push(bodies.len());
                } else {
                    pair.reversed_docs.push(bodies.len());
                }
                bodies.push(tokens);
            }
            pairs.push(pair);
        }
        for _ in 0..config.filler_docs {
            let len = random_len(&mut rng);
            bodies.push((0..len).map(|_| filler(&mut rng, config.filler_vocab)).collect());
        }

        // shuffle document order, then remap the recorded indices
        let mut order: Vec<usize> = (0..bodies.len()).collect();
        order.shuffle(&mut rng);
        let mut new_index = vec![0; order.len()];
        for (new, &old) in order.iter().enumerate() {
            new_index[old] = new;
        }
        let planted = config.pairs * config.planted_per_pair;
        let mut slots: Vec<Option<Vec<String>>> = bodies.into_iter().map(Some).collect();
        let documents: Vec<SynthDoc> = order
            .iter()
            .enumerate()
            .map(|(new, &old)| SynthDoc {
                id: format!("SYN-{new:06}"),
                tokens: slots[old].take().expect("each body used once"),
            })
            .collect();
        for p in &mut pairs {
            for d in p.ordered_docs.iter_mut().chain(p.reversed_docs.iter_mut()) {
                *d = new_index[*d];
            }
            p.ordered_docs.sort_unstable();
            p.reversed_docs.sort_unstable();
        }
        let mut filler_only: Vec<usize> = (planted..order.len()).map(|old| new_index[old]).collect();
        filler_only.sort_unstable();

        Ok(SyntheticCollection {
            config,
            documents,
            pairs,
            filler_only,
        })
    }

    /// Query `k + 1` is the planted pair `k`, in `first second` order.
    pub fn topics(&self) -> Vec<(String, String)> {
        self.pairs
            .iter()
            .enumerate()
            .map(|(k, p)| ((k + 1).to_string(), format!("{} {}", p.first, p.second)))
            .collect()
    }

    /// Documents with the pair in query order are relevant; reversed ones are
    /// judged non-relevant.
    pub fn qrels(&self) -> Qrels {
        let mut qrels = Qrels::new();
        for (k, p) in self.pairs.iter().enumerate() {
            let q = (k + 1).to_string();
            for &d in &p.ordered_docs {
                qrels.insert(q.clone(), self.documents[d].id.clone(), 1);
            }
            for &d in &p.reversed_docs {
                qrels.insert(q.clone(), self.documents[d].id.clone(), 0);
            }
        }
        qrels
    }

    pub fn build_index(&self) -> Result<PositionalIndex> {
        let mut vocab = Vocabulary::new();
        let docs: Vec<Document> = self
            .documents
            .iter()
            .map(|d| Document::new(d.id.clone(), d.tokens.iter().map(|t| vocab.intern(t)).collect()))
            .collect();
        PositionalIndex::build(vocab, docs)
    }

    pub fn queries(&self, index: &PositionalIndex) -> Vec<Query> {
        self.topics()
            .into_iter()
            .map(|(query_id, text)| {
                let surfaces: Vec<String> = text.split(' ').map(String::from).collect();
                Query {
                    query_id,
                    terms: index.vocab().lookup_query(&surfaces),
                }
            })
            .collect()
    }

    pub fn write_trec(&self, mut w: impl Write) -> io::Result<()> {
        for d in &self.documents {
            writeln!(w, "<DOC>\n<DOCNO> {} </DOCNO>\n<TEXT>\n{}\n</TEXT>\n</DOC>", d.id, d.tokens.join(" "))?;
        }
        Ok(())
    }

    pub fn write_topics(&self, mut w: impl Write) -> io::Result<()> {
        for (q, text) in self.topics() {
            writeln!(w, "{q}\t{text}")?;
        }
        Ok(())
    }

    pub fn write_qrels(&self, mut w: impl Write) -> io::Result<()> {
        for (k, p) in self.pairs.iter().enumerate() {
            for (docs, grade) in [(&p.ordered_docs, 1), (&p.reversed_docs, 0)] {
                for &d in docs {
                    writeln!(w, "{} 0 {} {grade}", k + 1, self.documents[d].id)?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::Collection;

    #[test]
    fn planted_counts_are_observed_in_the_index() {
        let c = SyntheticCollection::generate(SynthConfig::default()).unwrap();
        let idx = c.build_index().unwrap();
        assert_eq!(idx.num_docs(), 200 + 30 * 8);
        for p in &c.pairs {
            let (a, b) = (idx.vocab().get(&p.first).unwrap(), idx.vocab().get(&p.second).unwrap());
            assert_eq!(idx.pair_doc_freq(a, b, 4), p.df_ab as u64);
            assert_eq!(idx.pair_doc_freq(b, a, 4), p.df_ba as u64);
            assert_eq!(idx.cf(a), idx.cf(b));
        }
        for &d in &c.filler_only {
            assert!(c.documents[d].tokens.iter().all(|t| t.starts_with('f')));
        }
    }

    #[test]
    fn strata_cover_the_sem_buckets() {
        let c = SyntheticCollection::generate(SynthConfig::default()).unwrap();
        let sems: Vec<f64> = c
            .pairs
            .iter()
            .map(|p| crate::sito::sem_from_counts(p.df_ab as u64, p.df_ba as u64))
            .collect();
        assert!(sems.contains(&0.0));
        assert!(sems.iter().any(|&s| s > 0.0 && s <= 0.25));
        assert!(sems.iter().any(|&s| s > 0.25));
    }

    #[test]
    fn seeded_generation_is_deterministic() {
        let a = SyntheticCollection::generate(SynthConfig::with_docs(300, 9)).unwrap();
        let b = SyntheticCollection::generate(SynthConfig::with_docs(300, 9)).unwrap();
        assert_eq!(a.documents, b.documents);
        assert_eq!(a.documents.len(), 300);
        let c = SyntheticCollection::generate(SynthConfig::with_docs(300, 10)).unwrap();
        assert_ne!(a.documents, c.documents);
    }
}
