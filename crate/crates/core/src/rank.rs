//! Candidate generation, top-k selection and the model dispatch shared by the CLI.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::eval::Run;
use crate::index::Collection;
use crate::plm::{PlmParams, PlmScorer, PlmVariant};
use crate::sdm::{SdmParams, SdmScorer, SdmVariant};
use crate::text::{Query, TermId};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredDoc {
    pub doc: u32,
    /// Log-space; comparable only within one query evaluation.
    pub score: f64,
}

/// Ascending ordinals of documents containing at least one query term.
pub fn candidates(coll: &dyn Collection, query: &[TermId]) -> Vec<u32> {
    let mut docs: Vec<u32> = Vec::new();
    let mut seen_terms: Vec<TermId> = Vec::new();
    for &q in query {
        if seen_terms.contains(&q) {
            continue;
        }
        seen_terms.push(q);
        docs.extend(coll.docs_containing(q));
    }
    docs.sort_unstable();
    docs.dedup();
    docs
}

/// Descending score; ties by ascending external id.
pub fn top_k(coll: &dyn Collection, mut scored: Vec<ScoredDoc>, k: usize) -> Vec<ScoredDoc> {
    scored.sort_by(|x, y| {
        y.score
            .partial_cmp(&x.score)
            .unwrap_or(Ordering::Equal)
            .then_with(|| coll.external_id(x.doc).cmp(coll.external_id(y.doc)))
    });
    scored.truncate(k);
    scored
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Model {
    Sdm,
    SdmM,
    Plm,
    PlmM,
}

impl Model {
    pub const ALL: [Model; 4] = [Model::Sdm, Model::SdmM, Model::Plm, Model::PlmM];

    pub fn name(self) -> &'static str {
        match self {
            Model::Sdm => "sdm",
            Model::SdmM => "sdm-m",
            Model::Plm => "plm",
            Model::PlmM => "plm-m",
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Model::ALL
            .into_iter()
            .find(|m| m.name() == s.to_ascii_lowercase().replace('_', "-"))
            .ok_or_else(|| Error::InvalidParam(format!("unknown model `{s}` (sdm, sdm-m, plm, plm-m)")))
    }
}

/// All ranking parameters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RankParams {
    pub sdm: SdmParams,
    pub plm: PlmParams,
}

/// A scorer for one model over one collection.
pub enum Ranker<'c> {
    Sdm(SdmScorer<'c>, SdmVariant),
    Plm(PlmScorer<'c>, PlmVariant),
}

impl<'c> Ranker<'c> {
    pub fn new(coll: &'c dyn Collection, model: Model, params: &RankParams) -> Result<Self> {
        Ok(match model {
            Model::Sdm => Ranker::Sdm(SdmScorer::new(coll, params.sdm)?, SdmVariant::Sdm),
            Model::SdmM => Ranker::Sdm(SdmScorer::new(coll, params.sdm)?, SdmVariant::SdmM),
            Model::Plm => Ranker::Plm(PlmScorer::new(coll, params.plm)?, PlmVariant::Plm),
            Model::PlmM => Ranker::Plm(PlmScorer::new(coll, params.plm)?, PlmVariant::PlmM),
        })
    }

    pub fn score(&self, doc: u32, query: &[TermId]) -> f64 {
        match self {
            Ranker::Sdm(s, v) => s.score(doc, query, *v),
            Ranker::Plm(s, v) => s.score(doc, query, *v),
        }
    }

    pub fn rank(&self, query: &[TermId], k: usize) -> Vec<ScoredDoc> {
        match self {
            Ranker::Sdm(s, v) => s.rank(query, k, *v),
            Ranker::Plm(s, v) => s.rank(query, k, *v),
        }
    }
}

/// Ranks every query and collects the results as a TREC run. Queries with no
/// terms are skipped with a warning.
pub fn batch_search(coll: &dyn Collection, queries: &[Query], model: Model, params: &RankParams, k: usize, tag: &str) -> Result<Run> {
    let ranker = Ranker::new(coll, model, params)?;
    let mut run = Run::new();
    for q in queries {
        if q.terms.is_empty() {
            log::warn!("topic {} has no terms after analysis; skipped", q.query_id);
            continue;
        }
        let hits = ranker.rank(&q.terms, k);
        run.push_ranking(q.query_id.clone(), hits.iter().map(|h| (coll.external_id(h.doc).to_string(), h.score)), tag);
    }
    Ok(run)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model_names_round_trip() {
        for m in Model::ALL {
            assert_eq!(m.name().parse::<Model>().unwrap(), m);
        }
        assert_eq!("SDM_M".parse::<Model>().unwrap(), Model::SdmM);
        assert!("bm25".parse::<Model>().is_err());
    }
}
