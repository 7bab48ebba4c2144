//! Semantic importance of term order.
//!
//! `sem(a, b) = |1/2 - Df(a,b) / (Df(a,b) + Df(b,a))|`, where `Df(a, b)` counts
//! documents holding `a` followed by `b` inside the window. It is 0 when both
//! orders are equally common (or neither occurs) and 1/2 when only one order
//! is ever seen.

use crate::error::{Error, Result};
use crate::index::Collection;
use crate::text::TermId;

pub const DEFAULT_WINDOW: u32 = 4;

/// Window configuration for the ordered-pair document frequencies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sito {
    window: u32,
}

impl Default for Sito {
    fn default() -> Self {
        Sito {
            window: DEFAULT_WINDOW,
        }
    }
}

impl Sito {
    pub fn new(window: u32) -> Result<Self> {
        if window < 2 {
            return Err(Error::InvalidParam(format!("SITO window must be >= 2, got {window}")));
        }
        Ok(Sito { window })
    }

    pub fn window(&self) -> u32 {
        self.window
    }

    /// `(Df(a,b), Df(b,a))`.
    pub fn doc_freqs(&self, coll: &dyn Collection, a: TermId, b: TermId) -> (u64, u64) {
        (
            coll.pair_doc_freq(a, b, self.window),
            coll.pair_doc_freq(b, a, self.window),
        )
    }

    pub fn sem(&self, coll: &dyn Collection, a: TermId, b: TermId) -> f64 {
        let (ab, ba) = self.doc_freqs(coll, a, b);
        sem_from_counts(ab, ba)
    }

    pub fn g(&self, coll: &dyn Collection, a: TermId, b: TermId) -> f64 {
        g_from_sem(self.sem(coll, a, b))
    }

    pub fn h(&self, coll: &dyn Collection, a: TermId, b: TermId) -> f64 {
        h_from_sem(self.sem(coll, a, b))
    }
}

/// Evaluated as `|ab - ba| / (2 (ab + ba))`, which is algebraically the same
/// and bit-for-bit symmetric in its arguments.
pub fn sem_from_counts(df_ab: u64, df_ba: u64) -> f64 {
    let total = df_ab + df_ba;
    if total == 0 {
        return 0.0;
    }
    df_ab.abs_diff(df_ba) as f64 / (2.0 * total as f64)
}

/// `3/4 + sem`: boosts pairs whose order matters.
pub fn g_from_sem(sem: f64) -> f64 {
    0.75 + sem
}

/// `5/4 - sem`, computed as `2 - g` so that `g + h == 2` holds exactly.
pub fn h_from_sem(sem: f64) -> f64 {
    2.0 - g_from_sem(sem)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sem_examples() {
        assert_eq!(sem_from_counts(5, 5), 0.0);
        assert_eq!(sem_from_counts(10, 0), 0.5);
        assert!((sem_from_counts(7, 3) - 0.2).abs() < 1e-15);
        assert_eq!(sem_from_counts(0, 0), 0.0);
    }

    #[test]
    fn g_h_examples() {
        assert_eq!(g_from_sem(0.0), 0.75);
        assert_eq!(g_from_sem(0.5), 1.25);
        assert!((g_from_sem(0.2) - 0.95).abs() < 1e-15);
        assert_eq!(h_from_sem(0.0), 1.25);
        assert_eq!(h_from_sem(0.5), 0.75);
        assert!((h_from_sem(0.2) - 1.05).abs() < 1e-15);
    }

    #[test]
    fn window_must_be_at_least_two() {
        assert!(Sito::new(1).is_err());
        assert_eq!(Sito::new(5).unwrap().window(), 5);
    }

    proptest! {
        #[test]
        fn algebra(ab in 0u64..100_000, ba in 0u64..100_000) {
            let s = sem_from_counts(ab, ba);
            prop_assert_eq!(s, sem_from_counts(ba, ab));
            prop_assert!((0.0..=0.5).contains(&s));
            prop_assert_eq!(g_from_sem(s) + h_from_sem(s), 2.0);
            if ab == ba {
                prop_assert_eq!(s, 0.0);
            } else {
                // agrees with the textbook form
                let direct = (0.5 - ab as f64 / (ab + ba) as f64).abs();
                prop_assert!((s - direct).abs() < 1e-15);
            }
        }
    }
}
