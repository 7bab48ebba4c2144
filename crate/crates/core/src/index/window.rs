//! Window operators over sorted occurrence-position lists.
//!
//! All counts are over pairs of occurrence positions `(i, j)`, `i` drawn from
//! the first term and `j` from the second. A window of span `N` admits pairs
//! whose position distance is at most `N - 1`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum WindowKind {
    /// `#1`: the second term immediately follows the first.
    ExactPhrase,
    /// `#uwN`: both terms within span `N`, either order.
    Unordered,
    /// `#owN`: the second term follows the first within span `N`.
    Ordered,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WindowSpec {
    kind: WindowKind,
    span: u32,
}

impl WindowSpec {
    pub fn new(kind: WindowKind, span: u32) -> Result<Self> {
        match kind {
            WindowKind::ExactPhrase if span != 2 => Err(Error::InvalidParam(format!(
                "exact phrase window must have span 2, got {span}"
            ))),
            _ if span == 0 => Err(Error::InvalidParam("window span must be positive".into())),
            _ => Ok(WindowSpec { kind, span }),
        }
    }

    pub const fn exact_phrase() -> Self {
        WindowSpec {
            kind: WindowKind::ExactPhrase,
            span: 2,
        }
    }

    /// # Panics
    /// If `span` is zero.
    pub fn ordered(span: u32) -> Self {
        assert!(span > 0, "window span must be positive");
        WindowSpec {
            kind: WindowKind::Ordered,
            span,
        }
    }

    /// # Panics
    /// If `span` is zero.
    pub fn unordered(span: u32) -> Self {
        assert!(span > 0, "window span must be positive");
        WindowSpec {
            kind: WindowKind::Unordered,
            span,
        }
    }

    pub fn kind(&self) -> WindowKind {
        self.kind
    }

    pub fn span(&self) -> u32 {
        self.span
    }

    /// Counts matches between the occurrence lists of two terms in one document.
    ///
    /// `same_term` must be true when both lists belong to the same term; pairs
    /// are then taken over distinct positions and counted once.
    pub fn count(&self, first: &[u32], second: &[u32], same_term: bool) -> u64 {
        match self.kind {
            WindowKind::ExactPhrase | WindowKind::Ordered => count_ordered(first, second, self.span),
            WindowKind::Unordered if same_term => count_ordered(first, first, self.span),
            WindowKind::Unordered => {
                count_ordered(first, second, self.span) + count_ordered(second, first, self.span)
            }
        }
    }
}

impl fmt::Display for WindowSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            WindowKind::ExactPhrase => write!(f, "#1"),
            WindowKind::Unordered => write!(f, "#uw{}", self.span),
            WindowKind::Ordered => write!(f, "#ow{}", self.span),
        }
    }
}

impl FromStr for WindowSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parse_span = |rest: &str| {
            rest.parse::<u32>()
                .map_err(|_| Error::InvalidParam(format!("bad window operator `{s}`")))
        };
        if s == "#1" {
            Ok(Self::exact_phrase())
        } else if let Some(rest) = s.strip_prefix("#uw") {
            WindowSpec::new(WindowKind::Unordered, parse_span(rest)?)
        } else if let Some(rest) = s.strip_prefix("#ow") {
            WindowSpec::new(WindowKind::Ordered, parse_span(rest)?)
        } else {
            Err(Error::InvalidParam(format!("bad window operator `{s}`")))
        }
    }
}

/// Pairs `(i, j)` with `1 <= j - i <= span - 1`. Both lists must be ascending.
pub fn count_ordered(first: &[u32], second: &[u32], span: u32) -> u64 {
    if span < 2 || first.is_empty() || second.is_empty() {
        return 0;
    }
    let reach = span - 1;
    let mut lo = 0usize;
    let mut hi = 0usize;
    let mut total = 0u64;
    for &i in first {
        // second[lo..hi] holds the positions in (i, i + reach].
        while lo < second.len() && second[lo] <= i {
            lo += 1;
        }
        if hi < lo {
            hi = lo;
        }
        let limit = i as u64 + reach as u64;
        while hi < second.len() && (second[hi] as u64) <= limit {
            hi += 1;
        }
        total += (hi - lo) as u64;
    }
    total
}

/// Whether at least one ordered pair exists within `span`.
pub fn has_ordered(first: &[u32], second: &[u32], span: u32) -> bool {
    if span < 2 {
        return false;
    }
    let reach = span as u64 - 1;
    let mut lo = 0usize;
    for &i in first {
        while lo < second.len() && second[lo] <= i {
            lo += 1;
        }
        match second.get(lo) {
            Some(&j) if (j as u64) <= i as u64 + reach => return true,
            Some(_) => {}
            None => return false,
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(first: &[u32], second: &[u32], spec: WindowSpec, same: bool) -> u64 {
        let mut n = 0;
        for (x, &i) in first.iter().enumerate() {
            for (y, &j) in second.iter().enumerate() {
                let d = j as i64 - i as i64;
                let hit = match spec.kind() {
                    WindowKind::ExactPhrase => d == 1,
                    WindowKind::Ordered => d >= 1 && d < spec.span() as i64,
                    WindowKind::Unordered if same => y > x && d.abs() < spec.span() as i64,
                    WindowKind::Unordered => d != 0 && d.abs() < spec.span() as i64,
                };
                n += hit as u64;
            }
        }
        n
    }

    #[test]
    fn doc_abcab() {
        // doc [a b c a b]
        let a = [0, 3];
        let b = [1, 4];
        assert_eq!(WindowSpec::exact_phrase().count(&a, &b, false), 2);
        assert_eq!(WindowSpec::ordered(4).count(&a, &b, false), 2);
        assert_eq!(WindowSpec::unordered(8).count(&a, &b, false), 4);
    }

    #[test]
    fn same_term_pairs_are_distinct_positions() {
        let a = [2, 4, 20];
        assert_eq!(WindowSpec::ordered(3).count(&a, &a, true), 1);
        assert_eq!(WindowSpec::unordered(3).count(&a, &a, true), 1);
        assert!(has_ordered(&a, &a, 3));
        assert!(!has_ordered(&a, &a, 2));
    }

    #[test]
    fn spec_validation_and_display() {
        assert!(WindowSpec::new(WindowKind::ExactPhrase, 3).is_err());
        assert!(WindowSpec::new(WindowKind::Ordered, 0).is_err());
        for s in ["#1", "#uw8", "#ow4"] {
            assert_eq!(s.parse::<WindowSpec>().unwrap().to_string(), s);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn positions() -> impl Strategy<Value = Vec<u32>> {
            proptest::collection::btree_set(0u32..60, 0..12).prop_map(|s| s.into_iter().collect())
        }

        proptest! {
            #[test]
            fn matches_brute_force(a in positions(), b in positions(), span in 1u32..16) {
                // Distinct-term lists may not share positions.
                let b: Vec<u32> = b.into_iter().filter(|p| !a.contains(p)).collect();
                for spec in [WindowSpec::exact_phrase(), WindowSpec::ordered(span), WindowSpec::unordered(span)] {
                    prop_assert_eq!(spec.count(&a, &b, false), brute(&a, &b, spec, false));
                    prop_assert_eq!(spec.count(&a, &a, true), brute(&a, &a, spec, true));
                }
                prop_assert_eq!(has_ordered(&a, &b, span), brute(&a, &b, WindowSpec::ordered(span), false) > 0);
            }

            #[test]
            fn ordered_monotone_in_span(a in positions(), b in positions(), span in 1u32..15) {
                prop_assert!(count_ordered(&a, &b, span) <= count_ordered(&a, &b, span + 1));
            }
        }
    }
}
