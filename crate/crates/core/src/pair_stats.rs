//! Marginal and adjacent-pair counts for one sequence snapshot, with the
//! independence-null expectation and the z-statistic derived from them.
//!
//! For a sequence of length `T`, `c_x` counts occurrences of symbol `x`,
//! `c_xy` counts positions where `x` is immediately followed by `y`, and
//! `N = max(T - 1, 1)` is the number of adjacency positions. Under
//! independence the expected pair count is `c_x * c_y / N`.

use rustc_hash::FxHashMap;
use thiserror::Error;

use crate::symbols::{SymbolId, SymbolSequence};

/// Stability constant added under the square root of the z-statistic.
pub const DEFAULT_EPSILON: f64 = 1e-9;

pub type Pair = (SymbolId, SymbolId);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StatsError {
    #[error("symbol {0} does not occur in the counted sequence")]
    UnknownSymbol(SymbolId),
    #[error("PMI is undefined for zero counts (c_xy={c_xy}, c_x={c_x}, c_y={c_y})")]
    ZeroCount { c_xy: u64, c_x: u64, c_y: u64 },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PairStatistics {
    pub marginals: FxHashMap<SymbolId, u64>,
    pub pairs: FxHashMap<Pair, u64>,
    pub n_positions: u64,
}

/// `N = max(T - 1, 1)`.
#[inline]
pub fn adjacency_positions(len: u64) -> u64 {
    len.saturating_sub(1).max(1)
}

/// `c_x * c_y / N`, in the exact operation order shared by every scoring path.
#[inline]
pub fn expected_from_counts(c_x: u64, c_y: u64, n: u64) -> f64 {
    (c_x as f64) * (c_y as f64) / (n as f64)
}

/// `(c_xy - E) / sqrt(E + epsilon)`.
#[inline]
pub fn z_from_counts(c_xy: u64, c_x: u64, c_y: u64, n: u64, epsilon: f64) -> f64 {
    let expected = expected_from_counts(c_x, c_y, n);
    (c_xy as f64 - expected) / (expected + epsilon).sqrt()
}

impl PairStatistics {
    /// Full left-to-right scan of `seq`.
    pub fn count(seq: &SymbolSequence) -> Self {
        Self::count_ids(&seq.symbols)
    }

    pub fn count_ids(symbols: &[SymbolId]) -> Self {
        let mut marginals = FxHashMap::default();
        let mut pairs = FxHashMap::default();
        for &s in symbols {
            *marginals.entry(s).or_insert(0) += 1;
        }
        for w in symbols.windows(2) {
            *pairs.entry((w[0], w[1])).or_insert(0) += 1;
        }
        Self {
            marginals,
            pairs,
            n_positions: adjacency_positions(symbols.len() as u64),
        }
    }

    /// Assemble statistics from raw counts without checking sequence invariants.
    /// Every pair component must appear in `marginals`.
    pub fn from_counts(
        marginals: FxHashMap<SymbolId, u64>,
        pairs: FxHashMap<Pair, u64>,
        n_positions: u64,
    ) -> Result<Self, StatsError> {
        for &(x, y) in pairs.keys() {
            for s in [x, y] {
                if !marginals.contains_key(&s) {
                    return Err(StatsError::UnknownSymbol(s));
                }
            }
        }
        Ok(Self {
            marginals,
            pairs,
            n_positions: n_positions.max(1),
        })
    }

    pub fn marginal(&self, x: SymbolId) -> Result<u64, StatsError> {
        self.marginals
            .get(&x)
            .copied()
            .ok_or(StatsError::UnknownSymbol(x))
    }

    /// Absent pairs count as zero.
    pub fn pair_count(&self, x: SymbolId, y: SymbolId) -> u64 {
        self.pairs.get(&(x, y)).copied().unwrap_or(0)
    }

    pub fn sequence_len(&self) -> u64 {
        self.marginals.values().sum()
    }

    pub fn expected_count(&self, x: SymbolId, y: SymbolId) -> Result<f64, StatsError> {
        Ok(expected_from_counts(
            self.marginal(x)?,
            self.marginal(y)?,
            self.n_positions,
        ))
    }

    pub fn z_score(&self, x: SymbolId, y: SymbolId, epsilon: f64) -> Result<f64, StatsError> {
        Ok(z_from_counts(
            self.pair_count(x, y),
            self.marginal(x)?,
            self.marginal(y)?,
            self.n_positions,
            epsilon,
        ))
    }

    /// `sqrt(E) * (exp(PMI) - 1)` with `PMI = ln(c_xy * N / (c_x * c_y))`.
    ///
    /// Algebraically `(c_xy - E) / sqrt(E)`, i.e. the z-statistic without its
    /// stability constant; computed through the PMI so it can cross-check
    /// [`PairStatistics::z_score`].
    pub fn pmi_check(&self, x: SymbolId, y: SymbolId) -> Result<f64, StatsError> {
        let c_x = self.marginal(x)?;
        let c_y = self.marginal(y)?;
        let c_xy = self.pair_count(x, y);
        if c_xy == 0 || c_x == 0 || c_y == 0 {
            return Err(StatsError::ZeroCount { c_xy, c_x, c_y });
        }
        let n = self.n_positions as f64;
        let pmi = ((c_xy as f64) * n / ((c_x as f64) * (c_y as f64))).ln();
        let expected = expected_from_counts(c_x, c_y, self.n_positions);
        Ok(expected.sqrt() * pmi.exp_m1())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn seq(s: &str) -> SymbolSequence {
        let items: Vec<&str> = if s.is_empty() { vec![] } else { s.split(',').collect() };
        SymbolSequence::from_symbols(&items)
    }

    fn id(seq: &SymbolSequence, s: &str) -> SymbolId {
        seq.table.get(s).unwrap()
    }

    #[test]
    fn count_abab() {
        let s = seq("a,b,a,b");
        let st = PairStatistics::count(&s);
        let (a, b) = (id(&s, "a"), id(&s, "b"));
        assert_eq!(st.marginal(a).unwrap(), 2);
        assert_eq!(st.marginal(b).unwrap(), 2);
        assert_eq!(st.pair_count(a, b), 2);
        assert_eq!(st.pair_count(b, a), 1);
        assert_eq!(st.pairs.len(), 2);
        assert_eq!(st.n_positions, 3);
    }

    #[test]
    fn count_degenerate_lengths() {
        let s = seq("a");
        let st = PairStatistics::count(&s);
        assert_eq!(st.marginals.len(), 1);
        assert!(st.pairs.is_empty());
        assert_eq!(st.n_positions, 1);

        let st = PairStatistics::count(&seq(""));
        assert!(st.marginals.is_empty());
        assert!(st.pairs.is_empty());
        assert_eq!(st.n_positions, 1);
    }

    #[test]
    fn expected_counts() {
        let s = seq("a,b,a,b");
        let st = PairStatistics::count(&s);
        let (a, b) = (id(&s, "a"), id(&s, "b"));
        assert_abs_diff_eq!(st.expected_count(a, b).unwrap(), 4.0 / 3.0, epsilon = 1e-12);

        let s = seq("a,b");
        let st = PairStatistics::count(&s);
        assert_eq!(st.expected_count(id(&s, "a"), id(&s, "b")).unwrap(), 1.0);

        let s = seq("a,a");
        let st = PairStatistics::count(&s);
        let a = id(&s, "a");
        assert_eq!(st.expected_count(a, a).unwrap(), 4.0);

        assert_eq!(st.expected_count(a, 99), Err(StatsError::UnknownSymbol(99)));
    }

    #[test]
    fn z_scores() {
        let s = seq("a,b,a,b");
        let st = PairStatistics::count(&s);
        let (a, b) = (id(&s, "a"), id(&s, "b"));
        // (2 - 4/3) / sqrt(4/3) and (1 - 4/3) / sqrt(4/3)
        assert_abs_diff_eq!(st.z_score(a, b, 1e-9).unwrap(), 0.577_350_269, epsilon = 1e-6);
        assert_abs_diff_eq!(st.z_score(b, a, 1e-9).unwrap(), -0.288_675_134, epsilon = 1e-6);
        // (a,a) never occurs: c_xy = 0, E = 4/3.
        assert_abs_diff_eq!(
            st.z_score(a, a, 1e-9).unwrap(),
            -(4.0f64 / 3.0).sqrt(),
            epsilon = 1e-6
        );
    }

    #[test]
    fn z_vanishes_at_expectation() {
        // c_x = c_y = 1, N = 1, c_xy = 1, so E == c_xy.
        let s = seq("x,y");
        let st = PairStatistics::count(&s);
        let z = st.z_score(id(&s, "x"), id(&s, "y"), 1e-9).unwrap();
        assert!(z.abs() < 1e-9);
        assert!(st.pmi_check(id(&s, "x"), id(&s, "y")).unwrap().abs() < 1e-12);
    }

    #[test]
    fn pmi_examples() {
        let s = seq("a,b,a,b");
        let st = PairStatistics::count(&s);
        let (a, b) = (id(&s, "a"), id(&s, "b"));
        let pmi = st.pmi_check(a, b).unwrap();
        assert_abs_diff_eq!(pmi, 0.577_350_269, epsilon = 1e-6);
        assert_abs_diff_eq!(pmi, st.z_score(a, b, 1e-9).unwrap(), epsilon = 1e-6);
        assert!(matches!(st.pmi_check(a, a), Err(StatsError::ZeroCount { .. })));

        // One adjacency (a,a) against E = 2 * 2 / 1: sqrt(4) * (1/4 - 1).
        let s = seq("a,a");
        let st = PairStatistics::count(&s);
        let a = id(&s, "a");
        assert_abs_diff_eq!(st.pmi_check(a, a).unwrap(), -1.5, epsilon = 1e-12);
        assert_abs_diff_eq!(st.z_score(a, a, 1e-9).unwrap(), -1.5, epsilon = 1e-9);
    }

    #[test]
    fn from_counts_rejects_dangling_pairs() {
        let mut marginals = FxHashMap::default();
        marginals.insert(0, 3);
        let mut pairs = FxHashMap::default();
        pairs.insert((0, 1), 1);
        assert_eq!(
            PairStatistics::from_counts(marginals, pairs, 2),
            Err(StatsError::UnknownSymbol(1))
        );
    }

    #[test]
    fn reversal_changes_pairs_not_marginals() {
        let s = seq("a,b,c,a,b");
        let mut r = s.clone();
        r.symbols.reverse();
        let (fwd, rev) = (PairStatistics::count(&s), PairStatistics::count(&r));
        assert_eq!(fwd.marginals, rev.marginals);
        assert_ne!(fwd.pairs, rev.pairs);
    }

    proptest! {
        #[test]
        fn count_sums(symbols in prop::collection::vec(0u32..6, 0..200)) {
            let st = PairStatistics::count_ids(&symbols);
            let t = symbols.len() as u64;
            prop_assert_eq!(st.marginals.values().sum::<u64>(), t);
            prop_assert_eq!(st.pairs.values().sum::<u64>(), t.saturating_sub(1));
            prop_assert_eq!(st.n_positions, t.saturating_sub(1).max(1));
            for &(x, y) in st.pairs.keys() {
                prop_assert!(st.marginals[&x] >= 1 && st.marginals[&y] >= 1);
            }
        }

        #[test]
        fn z_matches_pmi_route(symbols in prop::collection::vec(0u32..8, 2..400)) {
            let st = PairStatistics::count_ids(&symbols);
            for &(x, y) in st.pairs.keys() {
                let z = st.z_score(x, y, 1e-9).unwrap();
                let p = st.pmi_check(x, y).unwrap();
                let e = st.expected_count(x, y).unwrap();
                // Without the stability constant the two routes are the same quantity.
                let z0 = z * ((e + 1e-9) / e).sqrt();
                prop_assert!((z0 - p).abs() <= 1e-9 * p.abs().max(1.0));
            }
        }
    }
}
