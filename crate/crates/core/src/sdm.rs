//! Sequential dependence model (SDM) and its term-order-aware variant (SDM-M).
//!
//! Both combine Dirichlet-smoothed log evidence from unigrams (`f_T`), exact
//! adjacent phrases (`f_O`, `#1`) and unordered windows (`f_U`, `#uw8`) over
//! adjacent query-term pairs. SDM-M scales the phrase evidence by `g` and
//! the unordered evidence by `h`, and adds an ordered-window component
//! (`f_OW`, `#owW`) scaled by `g`.
//!
//! Evidence whose collection count is zero is skipped rather than scored at
//! `log(0)`.

use crate::error::{Error, Result};
use crate::index::{Collection, WindowSpec};
use crate::rank::{candidates, top_k, ScoredDoc};
use crate::sito::{g_from_sem, h_from_sem, Sito, DEFAULT_WINDOW};
use crate::text::TermId;

use rayon::prelude::*;

/// How `g` and `h` are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OrderWeights {
    /// From the collection's SITO value.
    #[default]
    Sito,
    /// Constant 1; reduces SDM-M to SDM when `lambda_ow == 0`.
    Neutral,
}

/// Which ordered query-term pairs `(q_i, q_j)` feed the ordered-window component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OrderedPairs {
    /// Every pair with `i < j`, adjacent ones included.
    #[default]
    All,
    /// Only pairs with `i + 1 < j`; empty for two-term queries.
    NonAdjacent,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdmParams {
    pub lambda_t: f64,
    pub lambda_o: f64,
    pub lambda_u: f64,
    pub lambda_ow: f64,
    /// Dirichlet prior, in tokens.
    pub mu: f64,
    /// Span of the ordered-window component, also the SITO window.
    pub window: u32,
    /// Span of the unordered-window component.
    pub unordered_span: u32,
    pub order_weights: OrderWeights,
    pub ordered_pairs: OrderedPairs,
}

impl Default for SdmParams {
    fn default() -> Self {
        SdmParams {
            lambda_t: 0.85,
            lambda_o: 0.10,
            lambda_u: 0.05,
            lambda_ow: 0.05,
            mu: 2500.0,
            window: DEFAULT_WINDOW,
            unordered_span: 8,
            order_weights: OrderWeights::Sito,
            ordered_pairs: OrderedPairs::All,
        }
    }
}

impl SdmParams {
    pub fn validate(&self) -> Result<()> {
        let lambdas = [self.lambda_t, self.lambda_o, self.lambda_u, self.lambda_ow];
        if lambdas.iter().any(|l| !l.is_finite() || *l < 0.0) {
            return Err(Error::InvalidParam("SDM weights must be finite and non-negative".into()));
        }
        if !(self.mu.is_finite() && self.mu > 0.0) {
            return Err(Error::InvalidParam(format!("mu must be positive, got {}", self.mu)));
        }
        if self.window < 2 {
            return Err(Error::InvalidParam(format!("window must be >= 2, got {}", self.window)));
        }
        if self.unordered_span < 2 {
            return Err(Error::InvalidParam("unordered span must be >= 2".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SdmVariant {
    Sdm,
    SdmM,
}

/// Dirichlet-smoothed log probability `log[(tf + mu * cf / |C|) / (|D| + mu)]`,
/// or `None` when the collection count is zero.
pub fn dirichlet_log(tf: u64, coll_count: u64, total_tokens: u64, doc_len: u32, mu: f64) -> Option<f64> {
    if coll_count == 0 || total_tokens == 0 {
        return None;
    }
    let background = coll_count as f64 / total_tokens as f64;
    Some(((tf as f64 + mu * background) / (doc_len as f64 + mu)).ln())
}

struct PairPlan {
    a: TermId,
    b: TermId,
    cf_phrase: u64,
    cf_unordered: u64,
    g: f64,
    h: f64,
}

struct OwPlan {
    a: TermId,
    b: TermId,
    cf: u64,
    g: f64,
}

/// Per-query collection statistics, computed once and reused across documents.
struct QueryPlan {
    unigrams: Vec<(TermId, u64)>,
    adjacent: Vec<PairPlan>,
    ordered: Vec<OwPlan>,
}

pub struct SdmScorer<'c> {
    coll: &'c dyn Collection,
    params: SdmParams,
    sito: Sito,
    phrase: WindowSpec,
    unordered: WindowSpec,
    ordered: WindowSpec,
}

impl<'c> SdmScorer<'c> {
    pub fn new(coll: &'c dyn Collection, params: SdmParams) -> Result<Self> {
        params.validate()?;
        Ok(SdmScorer {
            coll,
            sito: Sito::new(params.window)?,
            phrase: WindowSpec::exact_phrase(),
            unordered: WindowSpec::unordered(params.unordered_span),
            ordered: WindowSpec::ordered(params.window),
            params,
        })
    }

    pub fn params(&self) -> &SdmParams {
        &self.params
    }

    fn weight_pair(&self, a: TermId, b: TermId) -> (f64, f64) {
        match self.params.order_weights {
            OrderWeights::Neutral => (1.0, 1.0),
            OrderWeights::Sito => {
                let sem = self.sito.sem(self.coll, a, b);
                (g_from_sem(sem), h_from_sem(sem))
            }
        }
    }

    fn plan(&self, query: &[TermId], variant: SdmVariant) -> QueryPlan {
        let coll = self.coll;
        let unigrams = query.iter().map(|&q| (q, coll.cf(q))).collect();
        let adjacent = query
            .windows(2)
            .map(|w| {
                let (a, b) = (w[0], w[1]);
                let (g, h) = match variant {
                    SdmVariant::Sdm => (1.0, 1.0),
                    SdmVariant::SdmM => self.weight_pair(a, b),
                };
                PairPlan {
                    a,
                    b,
                    cf_phrase: coll.collection_window_count(a, b, self.phrase),
                    cf_unordered: coll.collection_window_count(a, b, self.unordered),
                    g,
                    h,
                }
            })
            .collect();
        let mut ordered = Vec::new();
        if variant == SdmVariant::SdmM {
            let gap = match self.params.ordered_pairs {
                OrderedPairs::All => 1,
                OrderedPairs::NonAdjacent => 2,
            };
            for i in 0..query.len() {
                for j in i + gap..query.len() {
                    let (a, b) = (query[i], query[j]);
                    ordered.push(OwPlan {
                        a,
                        b,
                        cf: coll.collection_window_count(a, b, self.ordered),
                        g: self.weight_pair(a, b).0,
                    });
                }
            }
        }
        QueryPlan {
            unigrams,
            adjacent,
            ordered,
        }
    }

    fn smoothed(&self, tf: u64, coll_count: u64, doc: u32) -> f64 {
        dirichlet_log(tf, coll_count, self.coll.total_tokens(), self.coll.doc_len(doc), self.params.mu)
            .unwrap_or(0.0)
    }

    /// Unigram evidence `f_T(q, D)`; 0 for terms absent from the collection.
    pub fn f_t(&self, q: TermId, doc: u32) -> f64 {
        self.smoothed(self.coll.positions(q, doc).len() as u64, self.coll.cf(q), doc)
    }

    fn window_evidence(&self, a: TermId, b: TermId, doc: u32, spec: WindowSpec) -> f64 {
        self.smoothed(
            self.coll.window_count(doc, a, b, spec),
            self.coll.collection_window_count(a, b, spec),
            doc,
        )
    }

    /// Exact-phrase evidence `f_O(a, b, D)`.
    pub fn f_o(&self, a: TermId, b: TermId, doc: u32) -> f64 {
        self.window_evidence(a, b, doc, self.phrase)
    }

    /// Unordered-window evidence `f_U(a, b, D)`.
    pub fn f_u(&self, a: TermId, b: TermId, doc: u32) -> f64 {
        self.window_evidence(a, b, doc, self.unordered)
    }

    /// Ordered-window evidence `f_OW(a, b, D)`.
    pub fn f_ow(&self, a: TermId, b: TermId, doc: u32) -> f64 {
        self.window_evidence(a, b, doc, self.ordered)
    }

    fn score_planned(&self, plan: &QueryPlan, doc: u32, variant: SdmVariant) -> f64 {
        let p = &self.params;
        let coll = self.coll;
        let unigram: f64 = plan
            .unigrams
            .iter()
            .map(|&(q, cf)| self.smoothed(coll.positions(q, doc).len() as u64, cf, doc))
            .sum();
        let mut phrase = 0.0;
        let mut unordered = 0.0;
        for pair in &plan.adjacent {
            let (pa, pb) = (coll.positions(pair.a, doc), coll.positions(pair.b, doc));
            let same = pair.a == pair.b;
            phrase += self.smoothed(self.phrase.count(pa, pb, same), pair.cf_phrase, doc) * pair.g;
            unordered += self.smoothed(self.unordered.count(pa, pb, same), pair.cf_unordered, doc) * pair.h;
        }
        let base = p.lambda_t * unigram + p.lambda_o * phrase + p.lambda_u * unordered;
        match variant {
            SdmVariant::Sdm => base,
            SdmVariant::SdmM => {
                let ordered: f64 = plan
                    .ordered
                    .iter()
                    .map(|ow| {
                        let tf = self.ordered.count(coll.positions(ow.a, doc), coll.positions(ow.b, doc), ow.a == ow.b);
                        self.smoothed(tf, ow.cf, doc) * ow.g
                    })
                    .sum();
                base + p.lambda_ow * ordered
            }
        }
    }

    pub fn score(&self, doc: u32, query: &[TermId], variant: SdmVariant) -> f64 {
        self.score_planned(&self.plan(query, variant), doc, variant)
    }

    /// `λ_T Σ f_T + λ_O Σ f_O + λ_U Σ f_U` over adjacent query pairs.
    pub fn score_sdm(&self, doc: u32, query: &[TermId]) -> f64 {
        self.score(doc, query, SdmVariant::Sdm)
    }

    /// `λ_T Σ f_T + λ_O Σ f_O·g + λ_U Σ f_U·h + λ_OW Σ f_OW·g`.
    pub fn score_sdm_m(&self, doc: u32, query: &[TermId]) -> f64 {
        self.score(doc, query, SdmVariant::SdmM)
    }

    /// Top-`k` documents among those containing at least one query term.
    pub fn rank(&self, query: &[TermId], k: usize, variant: SdmVariant) -> Vec<ScoredDoc> {
        if query.is_empty() {
            log::warn!("empty query; nothing to rank");
            return Vec::new();
        }
        let plan = self.plan(query, variant);
        let scored: Vec<ScoredDoc> = candidates(self.coll, query)
            .into_par_iter()
            .map(|doc| ScoredDoc {
                doc,
                score: self.score_planned(&plan, doc, variant),
            })
            .collect();
        top_k(self.coll, scored, k)
    }
}
