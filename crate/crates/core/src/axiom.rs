//! Checks the term-order constraint: for a query `(q1, q2)`, a document ending
//! in `q1 .. q2` should score at least as high as the same document ending in
//! `q2 .. q1`.
//!
//! Both documents are scored in an [`IndexOverlay`] holding the pair, so the
//! collection statistics (including SITO) see them as ordinary documents.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{self, Write};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::index::{Collection, IndexOverlay, PositionalIndex};
use crate::rank::{Model, RankParams, Ranker};
use crate::sito::Sito;
use crate::synth::{PlantedPair, SyntheticCollection};
use crate::text::{Document, TermId};

/// Term ids below the out-of-vocabulary query range and above any real
/// vocabulary; never part of a query.
pub const PAD: TermId = TermId(TermId::OOV_BASE - 1);
pub const FILLER: TermId = TermId(TermId::OOV_BASE - 2);

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbedPair {
    pub base: Vec<TermId>,
    pub q1: TermId,
    pub q2: TermId,
    pub gap: usize,
    pub padded: bool,
    /// `base ‖ pad q1 fillers q2`
    pub d1: Vec<TermId>,
    /// `base ‖ pad q2 fillers q1`
    pub d2: Vec<TermId>,
}

pub fn make_pair(base: &[TermId], q1: TermId, q2: TermId, gap: usize, pad: Option<TermId>, filler: TermId) -> Result<PerturbedPair> {
    if q1 == q2 {
        return Err(Error::InvalidParam("q1 and q2 must differ".into()));
    }
    let append = |x: TermId, y: TermId| {
        let mut d = base.to_vec();
        d.extend(pad);
        d.push(x);
        d.extend(std::iter::repeat_n(filler, gap));
        d.push(y);
        d
    };
    Ok(PerturbedPair {
        base: base.to_vec(),
        q1,
        q2,
        gap,
        padded: pad.is_some(),
        d1: append(q1, q2),
        d2: append(q2, q1),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SemBucket {
    Zero,
    /// `(0, 0.25]`
    Low,
    /// `(0.25, 0.5]`
    High,
}

impl SemBucket {
    pub fn of(sem: f64) -> Self {
        if sem == 0.0 {
            SemBucket::Zero
        } else if sem <= 0.25 {
            SemBucket::Low
        } else {
            SemBucket::High
        }
    }
}

impl fmt::Display for SemBucket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SemBucket::Zero => "0",
            SemBucket::Low => "(0,0.25]",
            SemBucket::High => "(0.25,0.5]",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trial {
    pub trial: usize,
    pub model: Model,
    pub gap: usize,
    pub padded: bool,
    pub sem: f64,
    pub s1: f64,
    pub s2: f64,
}

impl Trial {
    pub fn satisfied(&self) -> bool {
        self.s2 <= self.s1
    }

    pub fn strict(&self) -> bool {
        self.s2 < self.s1
    }

    pub fn bucket(&self) -> SemBucket {
        SemBucket::of(self.sem)
    }
}

/// Scores both documents of `pair` for the query `(q1, q2)` under each model.
pub fn check_constraint(base: &PositionalIndex, pair: &PerturbedPair, models: &[Model], params: &RankParams) -> Result<Vec<Trial>> {
    let docs = [Document::new("axiom-d1", pair.d1.clone()), Document::new("axiom-d2", pair.d2.clone())];
    let overlay = IndexOverlay::new(base, &docs);
    let sem = Sito::new(params.sdm.window)?.sem(&overlay, pair.q1, pair.q2);
    let query = [pair.q1, pair.q2];
    models
        .iter()
        .map(|&model| {
            let ranker = Ranker::new(&overlay, model, params)?;
            Ok(Trial {
                trial: 0,
                model,
                gap: pair.gap,
                padded: pair.padded,
                sem,
                s1: ranker.score(overlay.ordinal(0), &query),
                s2: ranker.score(overlay.ordinal(1), &query),
            })
        })
        .collect()
}

/// Where base documents and query pairs come from.
pub enum Source<'a> {
    /// Planted pairs with controlled ordered document frequencies; base
    /// documents are filler-only.
    Synthetic(&'a SyntheticCollection, &'a PositionalIndex),
    /// Random co-occurring term pairs and random documents of an existing index.
    Index(&'a PositionalIndex),
}

impl Source<'_> {
    fn index(&self) -> &PositionalIndex {
        match self {
            Source::Synthetic(_, idx) | Source::Index(idx) => idx,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    pub trials: usize,
    pub gaps: Vec<usize>,
    pub seed: u64,
    pub pad: bool,
    pub filler: TermId,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            trials: 100,
            gaps: vec![0, 1, 2, 3],
            seed: 1,
            pad: true,
            filler: FILLER,
        }
    }
}

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64 + 1);
    rng
}

/// Two distinct terms occurring within `window` of each other in a random
/// document, preferring the stratum `trial % 3`.
fn index_pair(idx: &PositionalIndex, rng: &mut ChaCha8Rng, window: u32, want: SemBucket, sito: &Sito) -> Option<(TermId, TermId)> {
    let mut fallback = None;
    for _ in 0..64 {
        let doc = rng.random_range(0..idx.num_docs()) as u32;
        let terms = idx.reconstruct(doc);
        if terms.len() < 2 {
            continue;
        }
        let i = rng.random_range(0..terms.len() - 1);
        let j = (i + rng.random_range(1..window as usize)).min(terms.len() - 1);
        let (a, b) = (terms[i], terms[j]);
        if a == b {
            continue;
        }
        if SemBucket::of(sito.sem(idx, a, b)) == want {
            return Some((a, b));
        }
        fallback.get_or_insert((a, b));
    }
    fallback
}

fn build_pair(source: &Source<'_>, cfg: &SuiteConfig, params: &RankParams, trial: usize, gap: usize) -> Result<Option<PerturbedPair>> {
    let mut rng = trial_rng(cfg.seed, trial);
    let want = [SemBucket::Zero, SemBucket::Low, SemBucket::High][trial % 3];
    let pad = cfg.pad.then_some(PAD);
    match source {
        Source::Synthetic(coll, idx) => {
            // pairs are generated in strata k % 3, matching `want`
            let stratum: Vec<&PlantedPair> = coll.pairs.iter().skip(trial % 3).step_by(3).collect();
            let picked = match stratum.choose(&mut rng) {
                Some(&p) => Some(p),
                None => coll.pairs.choose(&mut rng),
            };
            let Some(pair) = picked else {
                return Err(Error::Invalid("synthetic collection has no planted pairs".into()));
            };
            let base = match coll.filler_only.choose(&mut rng) {
                Some(&d) => idx.reconstruct(idx.doc_ordinal(&coll.documents[d].id).expect("generated document")),
                None => Vec::new(),
            };
            let q1 = idx.vocab().get(&pair.first).expect("planted term");
            let q2 = idx.vocab().get(&pair.second).expect("planted term");
            make_pair(&base, q1, q2, gap, pad, cfg.filler).map(Some)
        }
        Source::Index(idx) => {
            let sito = Sito::new(params.sdm.window)?;
            let Some((q1, q2)) = index_pair(idx, &mut rng, params.sdm.window, want, &sito) else {
                return Ok(None);
            };
            let base = idx.reconstruct(rng.random_range(0..idx.num_docs()) as u32);
            make_pair(&base, q1, q2, gap, pad, cfg.filler).map(Some)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintReport {
    pub trials: Vec<Trial>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Rate {
    pub satisfied: usize,
    pub strict: usize,
    pub total: usize,
}

impl Rate {
    pub fn fraction(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.satisfied as f64 / self.total as f64
        }
    }
}

/// Runs `cfg.trials` randomized trials for every gap and model. Trials are
/// seeded individually, so the report does not depend on scheduling.
pub fn run_suite(models: &[Model], source: &Source<'_>, cfg: &SuiteConfig, params: &RankParams) -> Result<ConstraintReport> {
    if models.is_empty() {
        return Err(Error::InvalidParam("no scorer selected".into()));
    }
    let jobs: Vec<(usize, usize)> = (0..cfg.trials).flat_map(|t| cfg.gaps.iter().map(move |&g| (t, g))).collect();
    let results: Vec<Vec<Trial>> = jobs
        .par_iter()
        .map(|&(t, gap)| -> Result<Vec<Trial>> {
            let Some(pair) = build_pair(source, cfg, params, t, gap)? else {
                return Ok(Vec::new());
            };
            let mut trials = check_constraint(source.index(), &pair, models, params)?;
            for r in &mut trials {
                r.trial = t;
            }
            Ok(trials)
        })
        .collect::<Result<_>>()?;
    let mut trials: Vec<Trial> = results.into_iter().flatten().collect();
    trials.sort_by_key(|r| (r.model, r.gap, r.padded, r.trial));
    Ok(ConstraintReport { trials })
}

impl ConstraintReport {
    pub fn is_empty(&self) -> bool {
        self.trials.is_empty()
    }

    /// Rates per `(model, gap, bucket)`.
    pub fn rates(&self) -> BTreeMap<(Model, usize, SemBucket), Rate> {
        let mut out: BTreeMap<_, Rate> = BTreeMap::new();
        for r in &self.trials {
            let e = out.entry((r.model, r.gap, r.bucket())).or_default();
            e.total += 1;
            e.satisfied += r.satisfied() as usize;
            e.strict += r.strict() as usize;
        }
        out
    }

    /// Rates per `(model, gap)` over all buckets.
    pub fn rates_by_gap(&self) -> BTreeMap<(Model, usize), Rate> {
        let mut out: BTreeMap<_, Rate> = BTreeMap::new();
        for ((m, g, _), r) in self.rates() {
            let e = out.entry((m, g)).or_default();
            e.total += r.total;
            e.satisfied += r.satisfied;
            e.strict += r.strict;
        }
        out
    }

    pub fn write_tsv(&self, mut w: impl Write) -> io::Result<()> {
        writeln!(w, "model\tgap\tpad\ttrial\tsem\ts1\ts2\tsatisfied")?;
        for r in &self.trials {
            writeln!(
                w,
                "{}\t{}\t{}\t{}\t{:.6}\t{:.12}\t{:.12}\t{}",
                r.model,
                r.gap,
                r.padded,
                r.trial,
                r.sem,
                r.s1,
                r.s2,
                r.satisfied()
            )?;
        }
        Ok(())
    }

    pub fn write_summary(&self, mut w: impl Write) -> io::Result<()> {
        if self.trials.is_empty() {
            return writeln!(w, "no trials");
        }
        writeln!(w, "{:<6} {:>3}  {:<11} {:>6} {:>9} {:>9}", "model", "gap", "sem", "trials", "s2<=s1", "s2<s1")?;
        let rates = self.rates();
        let by_gap = self.rates_by_gap();
        for ((m, g), all) in &by_gap {
            for ((_, _, b), r) in rates.range((*m, *g, SemBucket::Zero)..=(*m, *g, SemBucket::High)) {
                writeln!(
                    w,
                    "{:<6} {:>3}  {:<11} {:>6} {:>8.1}% {:>8.1}%",
                    m.name(),
                    g,
                    b.to_string(),
                    r.total,
                    100.0 * r.fraction(),
                    100.0 * r.strict as f64 / r.total as f64
                )?;
            }
            writeln!(
                w,
                "{:<6} {:>3}  {:<11} {:>6} {:>8.1}% {:>8.1}%",
                m.name(),
                g,
                "all",
                all.total,
                100.0 * all.fraction(),
                100.0 * all.strict as f64 / all.total as f64
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::SynthConfig;

    fn t(n: u32) -> TermId {
        TermId(n)
    }

    #[test]
    fn pair_construction() {
        let base = [t(5), t(6), t(7)];
        let p = make_pair(&base, t(1), t(2), 2, Some(PAD), FILLER).unwrap();
        assert_eq!(p.d1, vec![t(5), t(6), t(7), PAD, t(1), FILLER, FILLER, t(2)]);
        assert_eq!(p.d2, vec![t(5), t(6), t(7), PAD, t(2), FILLER, FILLER, t(1)]);
        let bare = make_pair(&base, t(1), t(2), 0, None, FILLER).unwrap();
        assert_eq!(bare.d1, vec![t(5), t(6), t(7), t(1), t(2)]);
        assert!(make_pair(&base, t(1), t(1), 0, None, FILLER).is_err());
    }

    fn synthetic() -> (SyntheticCollection, PositionalIndex) {
        let c = SyntheticCollection::generate(SynthConfig::default()).unwrap();
        let idx = c.build_index().unwrap();
        (c, idx)
    }

    #[test]
    fn zero_trials_is_empty_and_models_are_required() {
        let (c, idx) = synthetic();
        let cfg = SuiteConfig {
            trials: 0,
            ..Default::default()
        };
        let params = RankParams::default();
        assert!(run_suite(&Model::ALL, &Source::Synthetic(&c, &idx), &cfg, &params).unwrap().is_empty());
        assert!(run_suite(&[], &Source::Synthetic(&c, &idx), &cfg, &params).is_err());
    }

    #[test]
    fn seeded_suite_is_reproducible() {
        let (c, idx) = synthetic();
        let cfg = SuiteConfig {
            trials: 9,
            ..Default::default()
        };
        let params = RankParams::default();
        let a = run_suite(&Model::ALL, &Source::Synthetic(&c, &idx), &cfg, &params).unwrap();
        let b = run_suite(&Model::ALL, &Source::Synthetic(&c, &idx), &cfg, &params).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.trials.len(), 9 * 4 * 4);
        let buckets: std::collections::BTreeSet<_> = a.trials.iter().map(Trial::bucket).collect();
        assert_eq!(buckets.len(), 3);
    }

    #[test]
    fn index_source_runs() {
        let (_, idx) = synthetic();
        let cfg = SuiteConfig {
            trials: 6,
            gaps: vec![1],
            ..Default::default()
        };
        let r = run_suite(&[Model::Sdm, Model::SdmM], &Source::Index(&idx), &cfg, &RankParams::default()).unwrap();
        assert_eq!(r.trials.len(), 12);
        let mut out = Vec::new();
        r.write_summary(&mut out).unwrap();
        assert!(String::from_utf8(out).unwrap().contains("sdm-m"));
    }
}
