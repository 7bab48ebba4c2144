//! TREC-style evaluation: AP / MAP, P@10, paired significance tests and the
//! relevance/term-order association analysis.

mod association;
mod trec;
mod ttest;

pub use association::{
    order_association, OrderAssociationReport, PairAssociation, DEFAULT_WINDOW as ASSOCIATION_WINDOW, PAIRING_UNIT,
};
pub use trec::{format_score, Qrels, Run, RunEntry};
pub use ttest::{paired_ttest, student_t_two_tailed, TTest};

use std::collections::HashMap;
use std::io::{self, Write};

pub const MAP_CUTOFF: usize = 1000;
pub const PRECISION_DEPTH: usize = 10;

fn is_relevant(qrels: &HashMap<String, i32>, doc: &str) -> bool {
    qrels.get(doc).is_some_and(|&g| g > 0)
}

/// Average precision over the top `cutoff` documents, normalized by the total
/// number of relevant documents. `None` when the query has no relevant documents.
pub fn average_precision<S: AsRef<str>>(ranked: &[S], qrels: &HashMap<String, i32>, cutoff: usize) -> Option<f64> {
    let total = qrels.values().filter(|&&g| g > 0).count();
    if total == 0 {
        return None;
    }
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (k, doc) in ranked.iter().take(cutoff).enumerate() {
        if is_relevant(qrels, doc.as_ref()) {
            hits += 1;
            sum += hits as f64 / (k + 1) as f64;
        }
    }
    Some(sum / total as f64)
}

/// Relevant documents in the top `k`, divided by `k` even if fewer were retrieved.
pub fn precision_at<S: AsRef<str>>(ranked: &[S], qrels: &HashMap<String, i32>, k: usize) -> f64 {
    let hits = ranked.iter().take(k).filter(|d| is_relevant(qrels, d.as_ref())).count();
    hits as f64 / k as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryEval {
    pub query_id: String,
    pub ap: f64,
    pub p10: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub baseline: Vec<QueryEval>,
    pub baseline_map: f64,
    pub baseline_p10: f64,
    pub map_test: Option<TTest>,
    pub p10_test: Option<TTest>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub per_query: Vec<QueryEval>,
    pub map: f64,
    pub p10: f64,
    /// Run queries absent from the qrels (or without relevant documents).
    pub skipped: Vec<String>,
    pub comparison: Option<Comparison>,
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

fn per_query(run: &Run, qrels: &Qrels) -> Vec<QueryEval> {
    qrels
        .query_ids()
        .filter(|q| qrels.num_relevant(q) > 0)
        .map(|q| {
            let judged = qrels.for_query(q).expect("query listed by qrels");
            let ranked = run.ranked_docs(q);
            if ranked.is_empty() {
                log::warn!("query {q} has relevance judgments but no results; scored as 0");
            }
            QueryEval {
                query_id: q.to_string(),
                ap: average_precision(&ranked, judged, MAP_CUTOFF).unwrap_or(0.0),
                p10: precision_at(&ranked, judged, PRECISION_DEPTH),
            }
        })
        .collect()
}

/// Evaluates `run` over every qrels query with at least one relevant document.
/// Such queries missing from the run score 0.
pub fn evaluate(run: &Run, qrels: &Qrels) -> EvalReport {
    let skipped: Vec<String> = run
        .query_ids()
        .filter(|q| qrels.num_relevant(q) == 0)
        .map(String::from)
        .collect();
    for q in &skipped {
        log::warn!("query {q} has no relevant documents in the qrels; excluded");
    }
    let per_query = per_query(run, qrels);
    EvalReport {
        map: mean(per_query.iter().map(|e| e.ap)),
        p10: mean(per_query.iter().map(|e| e.p10)),
        per_query,
        skipped,
        comparison: None,
    }
}

/// As [`evaluate`], plus paired t-tests of AP and P@10 against `baseline`.
pub fn compare(run: &Run, baseline: &Run, qrels: &Qrels) -> EvalReport {
    let mut report = evaluate(run, qrels);
    let base = per_query(baseline, qrels);
    let test = |f: fn(&QueryEval) -> f64| -> Option<TTest> {
        let a: Vec<f64> = report.per_query.iter().map(f).collect();
        let b: Vec<f64> = base.iter().map(f).collect();
        paired_ttest(&a, &b).ok()
    };
    report.comparison = Some(Comparison {
        baseline_map: mean(base.iter().map(|e| e.ap)),
        baseline_p10: mean(base.iter().map(|e| e.p10)),
        map_test: test(|e| e.ap),
        p10_test: test(|e| e.p10),
        baseline: base,
    });
    report
}

fn star(test: Option<&TTest>) -> &'static str {
    if test.is_some_and(TTest::significant_at_95) {
        "*"
    } else {
        ""
    }
}

impl EvalReport {
    pub fn write_tsv(&self, mut w: impl Write) -> io::Result<()> {
        match &self.comparison {
            None => {
                writeln!(w, "query_id\tap\tp10")?;
                for e in &self.per_query {
                    writeln!(w, "{}\t{:.4}\t{:.4}", e.query_id, e.ap, e.p10)?;
                }
                writeln!(w, "all\t{:.4}\t{:.4}", self.map, self.p10)
            }
            Some(c) => {
                writeln!(w, "query_id\tap\tp10\tbaseline_ap\tbaseline_p10")?;
                for (e, b) in self.per_query.iter().zip(&c.baseline) {
                    writeln!(w, "{}\t{:.4}\t{:.4}\t{:.4}\t{:.4}", e.query_id, e.ap, e.p10, b.ap, b.p10)?;
                }
                writeln!(w, "all\t{:.4}\t{:.4}\t{:.4}\t{:.4}", self.map, self.p10, c.baseline_map, c.baseline_p10)?;
                for (name, t) in [("map", &c.map_test), ("p10", &c.p10_test)] {
                    if let Some(t) = t {
                        writeln!(
                            w,
                            "ttest_{name}\tt={:.6}\tp={:.6}\tsignificant_at_95={}{}",
                            t.t,
                            t.p_two_tailed,
                            t.significant_at_95(),
                            if t.degenerate_variance { "\tdegenerate_variance" } else { "" }
                        )?;
                    }
                }
                Ok(())
            }
        }
    }

    /// Human-readable summary; `*` marks p < 0.05 against the baseline.
    pub fn write_summary(&self, mut w: impl Write) -> io::Result<()> {
        writeln!(w, "queries evaluated: {}", self.per_query.len())?;
        match &self.comparison {
            None => {
                writeln!(w, "MAP   {:.4}", self.map)?;
                writeln!(w, "P@10  {:.4}", self.p10)
            }
            Some(c) => {
                writeln!(w, "        run      baseline")?;
                writeln!(w, "MAP   {:.4}{:<2} {:.4}", self.map, star(c.map_test.as_ref()), c.baseline_map)?;
                writeln!(w, "P@10  {:.4}{:<2} {:.4}", self.p10, star(c.p10_test.as_ref()), c.baseline_p10)
            }
        }
    }
}

pub fn mean_average_precision(run: &Run, qrels: &Qrels) -> f64 {
    evaluate(run, qrels).map
}
