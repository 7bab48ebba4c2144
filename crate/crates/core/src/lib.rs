//! Positional retrieval with query-term order statistics: a positional index,
//! SDM and PLM scorers with order-aware variants, TREC evaluation and an
//! axiom checker for the term-order constraint.

mod error;

pub mod axiom;
pub mod config;
pub mod eval;
pub mod index;
pub mod plm;
pub mod rank;
pub mod sdm;
pub mod sito;
pub mod synth;
pub mod text;

pub use config::Config;
pub use error::{Error, Result};
pub use index::{Collection, IndexOverlay, PositionalIndex, WindowKind, WindowSpec};
pub use plm::{PlmParams, PlmScorer, PlmVariant};
pub use rank::{batch_search, Model, RankParams, Ranker, ScoredDoc};
pub use sdm::{SdmParams, SdmScorer, SdmVariant};
pub use sito::Sito;
pub use text::{Analyzer, Document, Query, TermId, Vocabulary};
