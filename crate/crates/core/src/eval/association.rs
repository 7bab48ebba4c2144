//! How often relevant documents contain query-term pairs in query order versus
//! reversed order.

use std::io::{self, Write};

use super::trec::Qrels;
use super::ttest::{paired_ttest, TTest};
use crate::index::{window, PositionalIndex};
use crate::text::{Query, TermId};

pub const DEFAULT_WINDOW: u32 = 5;

/// Pairing unit used for the t-test in [`OrderAssociationReport`].
pub const PAIRING_UNIT: &str = "term-pair";

#[derive(Debug, Clone, PartialEq)]
pub struct PairAssociation {
    pub query_id: String,
    /// Earlier term in the query.
    pub first: String,
    pub second: String,
    /// Relevant documents with `first` then `second` inside the window.
    pub rdf_ordered: u64,
    pub rdf_reversed: u64,
}

impl PairAssociation {
    /// `(p(Rel|ordered), p(Rel|reversed))`, or `None` when neither order occurs.
    pub fn probabilities(&self) -> Option<(f64, f64)> {
        let total = self.rdf_ordered + self.rdf_reversed;
        if total == 0 {
            return None;
        }
        let p = self.rdf_ordered as f64 / total as f64;
        Some((p, self.rdf_reversed as f64 / total as f64))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderAssociationReport {
    pub window: u32,
    /// Every pair, including those with no occurrences in relevant documents.
    pub pairs: Vec<PairAssociation>,
    /// Means over pairs with a nonzero denominator.
    pub p_ordered: f64,
    pub p_reversed: f64,
    pub included: usize,
    pub ttest: Option<TTest>,
}

/// Per query, every pair of distinct terms `(a, b)` with `a` before `b` in the
/// query, counted over the query's relevant documents present in `index`.
pub fn order_association(queries: &[Query], qrels: &Qrels, index: &PositionalIndex, window: u32) -> OrderAssociationReport {
    let mut pairs = Vec::new();
    for q in queries {
        let relevant: Vec<u32> = {
            let mut r: Vec<u32> = qrels.relevant_docs(&q.query_id).filter_map(|d| index.doc_ordinal(d)).collect();
            r.sort_unstable();
            r
        };
        let mut seen: Vec<(TermId, TermId)> = Vec::new();
        for (i, &a) in q.terms.iter().enumerate() {
            for &b in &q.terms[i + 1..] {
                if a == b || seen.contains(&(a, b)) {
                    continue;
                }
                seen.push((a, b));
                let (pa, pb) = (index.postings(a), index.postings(b));
                let mut ordered = 0;
                let mut reversed = 0;
                for &d in &relevant {
                    let (xa, xb) = (pa.positions_in(d), pb.positions_in(d));
                    ordered += window::has_ordered(xa, xb, window) as u64;
                    reversed += window::has_ordered(xb, xa, window) as u64;
                }
                let surface = |t: TermId| index.vocab().surface(t).unwrap_or("<oov>").to_string();
                pairs.push(PairAssociation {
                    query_id: q.query_id.clone(),
                    first: surface(a),
                    second: surface(b),
                    rdf_ordered: ordered,
                    rdf_reversed: reversed,
                });
            }
        }
    }

    let (ordered, reversed): (Vec<f64>, Vec<f64>) = pairs.iter().filter_map(PairAssociation::probabilities).unzip();
    if ordered.is_empty() {
        log::warn!("no query-term pair occurs in any relevant document; association report is empty");
    }
    let mean = |xs: &[f64]| if xs.is_empty() { 0.0 } else { xs.iter().sum::<f64>() / xs.len() as f64 };
    OrderAssociationReport {
        window,
        p_ordered: mean(&ordered),
        p_reversed: mean(&reversed),
        included: ordered.len(),
        ttest: paired_ttest(&ordered, &reversed).ok(),
        pairs,
    }
}

impl OrderAssociationReport {
    pub fn write_tsv(&self, mut w: impl Write) -> io::Result<()> {
        writeln!(w, "# window={} pairing_unit={PAIRING_UNIT}", self.window)?;
        writeln!(w, "query_id\tterm_a\tterm_b\trdf_ab\trdf_ba\tp_ordered\tp_reversed")?;
        for p in &self.pairs {
            let (po, pr) = match p.probabilities() {
                Some((o, r)) => (format!("{o:.6}"), format!("{r:.6}")),
                None => ("NA".into(), "NA".into()),
            };
            writeln!(
                w,
                "{}\t{}\t{}\t{}\t{}\t{po}\t{pr}",
                p.query_id, p.first, p.second, p.rdf_ordered, p.rdf_reversed
            )?;
        }
        Ok(())
    }

    pub fn write_summary(&self, mut w: impl Write) -> io::Result<()> {
        writeln!(w, "window {}; t-test paired per {PAIRING_UNIT} (declared choice)", self.window)?;
        writeln!(w, "pairs included: {} of {}", self.included, self.pairs.len())?;
        writeln!(w, "p(Rel|ordered)   {:.4}", self.p_ordered)?;
        writeln!(w, "p(Rel|reversed)  {:.4}", self.p_reversed)?;
        match &self.ttest {
            Some(t) => writeln!(
                w,
                "t = {:.4}, p = {:.4}{}",
                t.t,
                t.p_two_tailed,
                if t.significant_at_95() { " (significant at 95%)" } else { "" }
            ),
            None => writeln!(w, "t-test not available (fewer than 2 pairs)"),
        }
    }
}
