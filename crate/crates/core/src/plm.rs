//! Positional language model (PLM) and its term-order-aware variant (PLM-M).
//!
//! Every term occurrence at position `j` propagates a Gaussian count
//! `k(i, j) = exp(-(i - j)^2 / 2σ^2)` to each position `i`, giving a virtual
//! document `D'_i`. Position `i` is scored by Dirichlet-smoothed negative
//! cross-entropy of the query against `D'_i`, and the document takes the best
//! score over positions holding a query-term occurrence.
//!
//! PLM-M multiplies each query-term occurrence by
//! `weight(w_j) = 1 + Σ_{w'} λ · sem(w_j, w') · I(w_j, w')`, where `I` fires when
//! `w'` occurs within the window around `j` on the side its query order
//! dictates. The virtual-document length uses the same weights (non-query
//! terms weigh 1), so each `D'_i` stays a normalized distribution.

use std::sync::RwLock;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::index::Collection;
use crate::rank::{candidates, top_k, ScoredDoc};
use crate::sito::{Sito, DEFAULT_WINDOW};
use crate::text::TermId;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlmParams {
    /// Dirichlet prior, in tokens.
    pub mu: f64,
    /// Kernel bandwidth, in positions.
    pub sigma: f64,
    /// Strength of the order weight.
    pub lambda: f64,
    /// Indicator window, also the SITO window.
    pub window: u32,
}

impl Default for PlmParams {
    fn default() -> Self {
        PlmParams {
            mu: 2500.0,
            sigma: 175.0,
            lambda: 4.0,
            window: DEFAULT_WINDOW,
        }
    }
}

impl PlmParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.mu.is_finite() && self.mu > 0.0) {
            return Err(Error::InvalidParam(format!("mu must be positive, got {}", self.mu)));
        }
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(Error::InvalidParam(format!("sigma must be positive, got {}", self.sigma)));
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(Error::InvalidParam(format!("lambda must be >= 0, got {}", self.lambda)));
        }
        if self.window < 2 {
            return Err(Error::InvalidParam(format!("window must be >= 2, got {}", self.window)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlmVariant {
    Plm,
    PlmM,
}

/// Gaussian propagation kernel; 1 at zero distance.
pub fn kernel(i: u32, j: u32, sigma: f64) -> f64 {
    let d = i as f64 - j as f64;
    (-(d * d) / (2.0 * sigma * sigma)).exp()
}

/// Prefix sums of the kernel over non-negative distances, grown on demand.
///
/// `Σ_{j=0}^{N-1} k(i, j) = S(i) + S(N-1-i) - 1` with `S(m) = Σ_{d=0}^{m} k(d, 0)`.
struct KernelMass {
    sigma: f64,
    prefix: RwLock<Vec<f64>>,
    /// Beyond this distance every kernel value is exactly zero.
    saturation: usize,
}

impl KernelMass {
    fn new(sigma: f64) -> Self {
        // exp(-x) underflows to 0 for x > ~745.
        let saturation = (sigma * (2.0f64 * 746.0).sqrt()).ceil() as usize + 1;
        KernelMass {
            sigma,
            prefix: RwLock::new(vec![1.0]),
            saturation,
        }
    }

    fn prefix(&self, m: usize) -> f64 {
        let m = m.min(self.saturation);
        if let Some(&v) = self.prefix.read().expect("kernel lock").get(m) {
            return v;
        }
        let mut table = self.prefix.write().expect("kernel lock");
        while table.len() <= m {
            let d = table.len() as u32;
            let next = table[table.len() - 1] + kernel(d, 0, self.sigma);
            table.push(next);
        }
        table[m]
    }

    /// `Σ_{j=0}^{len-1} k(i, j)`.
    fn mass(&self, i: u32, len: u32) -> f64 {
        self.prefix(i as usize) + self.prefix((len - 1 - i) as usize) - 1.0
    }
}

struct TermPlan {
    term: TermId,
    /// Query-term frequency over query length.
    weight: f64,
    cf: u64,
    first_index: usize,
}

struct QueryPlan {
    terms: Vec<TermPlan>,
    /// `sem[x][y]` between distinct query terms `x` and `y` (PLM-M only).
    sem: Vec<Vec<f64>>,
}

/// Query-term occurrences of one document with their order weights.
struct DocContext<'a> {
    len: u32,
    /// Per query term (plan order): positions and matching weights.
    occurrences: Vec<(&'a [u32], Vec<f64>)>,
}

pub struct PlmScorer<'c> {
    coll: &'c dyn Collection,
    params: PlmParams,
    sito: Sito,
    mass: KernelMass,
}

impl<'c> PlmScorer<'c> {
    pub fn new(coll: &'c dyn Collection, params: PlmParams) -> Result<Self> {
        params.validate()?;
        Ok(PlmScorer {
            coll,
            sito: Sito::new(params.window)?,
            mass: KernelMass::new(params.sigma),
            params,
        })
    }

    pub fn params(&self) -> &PlmParams {
        &self.params
    }

    fn plan(&self, query: &[TermId], variant: PlmVariant) -> QueryPlan {
        let mut terms: Vec<TermPlan> = Vec::new();
        for (idx, &q) in query.iter().enumerate() {
            match terms.iter_mut().find(|t| t.term == q) {
                Some(t) => t.weight += 1.0,
                None => terms.push(TermPlan {
                    term: q,
                    weight: 1.0,
                    cf: self.coll.cf(q),
                    first_index: idx,
                }),
            }
        }
        for t in &mut terms {
            t.weight /= query.len() as f64;
        }
        let sem = match variant {
            PlmVariant::Plm => Vec::new(),
            PlmVariant::PlmM => terms
                .iter()
                .map(|x| {
                    terms
                        .iter()
                        .map(|y| if x.term == y.term { 0.0 } else { self.sito.sem(self.coll, x.term, y.term) })
                        .collect()
                })
                .collect(),
        };
        QueryPlan { terms, sem }
    }

    /// Whether term `other` occurs within the window around `j`, on the side
    /// given by its query order relative to the term at `j`.
    fn in_order_nearby(&self, j: u32, other_positions: &[u32], other_after: bool) -> bool {
        let reach = self.params.window - 1;
        let (lo, hi) = if other_after {
            (j + 1, j.saturating_add(reach))
        } else {
            (j.saturating_sub(reach), j.saturating_sub(1))
        };
        if !other_after && j == 0 {
            return false;
        }
        let start = other_positions.partition_point(|&p| p < lo);
        other_positions.get(start).is_some_and(|&p| p <= hi)
    }

    fn weight_at(&self, plan: &QueryPlan, x: usize, j: u32, positions: &[&[u32]]) -> f64 {
        let mut extra = 0.0;
        for (y, other) in plan.terms.iter().enumerate() {
            if y == x {
                continue;
            }
            let other_after = other.first_index > plan.terms[x].first_index;
            if self.in_order_nearby(j, positions[y], other_after) {
                extra += self.params.lambda * plan.sem[x][y];
            }
        }
        1.0 + extra
    }

    fn context<'a>(&'a self, plan: &QueryPlan, doc: u32, variant: PlmVariant) -> DocContext<'a> {
        let positions: Vec<&[u32]> = plan.terms.iter().map(|t| self.coll.positions(t.term, doc)).collect();
        let occurrences = positions
            .iter()
            .enumerate()
            .map(|(x, &ps)| {
                let weights = match variant {
                    PlmVariant::Plm => vec![1.0; ps.len()],
                    PlmVariant::PlmM => ps.iter().map(|&j| self.weight_at(plan, x, j, &positions)).collect(),
                };
                (ps, weights)
            })
            .collect();
        DocContext {
            len: self.coll.doc_len(doc),
            occurrences,
        }
    }

    fn score_ctx_at(&self, plan: &QueryPlan, ctx: &DocContext<'_>, i: u32) -> f64 {
        let sigma = self.params.sigma;
        let mut extra_mass = 0.0;
        for (ps, ws) in &ctx.occurrences {
            for (&j, &w) in ps.iter().zip(ws) {
                extra_mass += kernel(i, j, sigma) * (w - 1.0);
            }
        }
        let z = self.mass.mass(i, ctx.len) + extra_mass;
        let total = self.coll.total_tokens() as f64;
        let mut score = 0.0;
        for (t, (ps, ws)) in plan.terms.iter().zip(&ctx.occurrences) {
            if t.cf == 0 {
                continue;
            }
            let c: f64 = ps.iter().zip(ws).map(|(&j, &w)| kernel(i, j, sigma) * w).sum();
            let p = (c + self.params.mu * t.cf as f64 / total) / (z + self.params.mu);
            score += t.weight * p.ln();
        }
        score
    }

    /// Unweighted propagated count `c'(w, i)`.
    pub fn propagated_count(&self, w: TermId, i: u32, doc: u32) -> f64 {
        let sigma = self.params.sigma;
        self.coll.positions(w, doc).iter().map(|&j| kernel(i, j, sigma)).sum()
    }

    /// `weight(w_j, D, Q)`; 1 when the term at `j` is not a query term.
    pub fn order_weight(&self, j: u32, doc: u32, query: &[TermId]) -> f64 {
        let plan = self.plan(query, PlmVariant::PlmM);
        let positions: Vec<&[u32]> = plan.terms.iter().map(|t| self.coll.positions(t.term, doc)).collect();
        match positions.iter().position(|ps| ps.binary_search(&j).is_ok()) {
            Some(x) => self.weight_at(&plan, x, j, &positions),
            None => 1.0,
        }
    }

    /// Order-weighted propagated count `c'(w, i, D, Q)`.
    pub fn weighted_propagated_count(&self, w: TermId, i: u32, doc: u32, query: &[TermId]) -> f64 {
        let plan = self.plan(query, PlmVariant::PlmM);
        let ctx = self.context(&plan, doc, PlmVariant::PlmM);
        let sigma = self.params.sigma;
        match plan.terms.iter().position(|t| t.term == w) {
            Some(x) => {
                let (ps, ws) = &ctx.occurrences[x];
                ps.iter().zip(ws).map(|(&j, &wt)| kernel(i, j, sigma) * wt).sum()
            }
            None => self.propagated_count(w, i, doc),
        }
    }

    /// Score of the virtual document at position `i`.
    pub fn score_at(&self, doc: u32, query: &[TermId], i: u32, variant: PlmVariant) -> f64 {
        let plan = self.plan(query, variant);
        let ctx = self.context(&plan, doc, variant);
        self.score_ctx_at(&plan, &ctx, i)
    }

    fn score_planned(&self, plan: &QueryPlan, doc: u32, variant: PlmVariant) -> f64 {
        let ctx = self.context(plan, doc, variant);
        let mut best = f64::NEG_INFINITY;
        for (ps, _) in &ctx.occurrences {
            for &i in ps.iter() {
                best = best.max(self.score_ctx_at(plan, &ctx, i));
            }
        }
        best
    }

    /// Best position score; `-inf` for a document without query terms.
    pub fn score(&self, doc: u32, query: &[TermId], variant: PlmVariant) -> f64 {
        self.score_planned(&self.plan(query, variant), doc, variant)
    }

    pub fn score_plm(&self, doc: u32, query: &[TermId]) -> f64 {
        self.score(doc, query, PlmVariant::Plm)
    }

    pub fn score_plm_m(&self, doc: u32, query: &[TermId]) -> f64 {
        self.score(doc, query, PlmVariant::PlmM)
    }

    pub fn rank(&self, query: &[TermId], k: usize, variant: PlmVariant) -> Vec<ScoredDoc> {
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
