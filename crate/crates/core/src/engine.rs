//! Linked-list symbol sequence with incrementally maintained pair counts.
//!
//! Each adjacency is indexed by the position of its left element. A merge
//! visits only the recorded occurrence positions of the merged pair, and
//! updates the counts of the pairs bordering each replacement site. Position
//! lists are allowed to go stale; every entry is revalidated before use.

use rustc_hash::{FxHashMap, FxHashSet};

use crate::merge_policy::{keep_best, score_counts, MergePolicyConfig, ScoredPair};
use crate::pair_stats::{adjacency_positions, Pair};
use crate::symbols::{SymbolId, SymbolTable};

const NIL: u32 = u32::MAX;

#[derive(Debug, Default)]
struct PairSlot {
    count: u64,
    positions: Vec<u32>,
}

#[derive(Debug)]
pub(crate) struct MergeEngine {
    pub(crate) table: SymbolTable,
    /// Symbol at each original position; `NIL` once absorbed into its left neighbour.
    sym: Vec<SymbolId>,
    prev: Vec<u32>,
    next: Vec<u32>,
    len: u64,
    marginals: Vec<u64>,
    present: usize,
    pairs: FxHashMap<Pair, PairSlot>,
    /// Pairs with count >= c_min, when candidate tracking is on.
    candidates: Option<(u64, FxHashSet<Pair>)>,
    touched: Vec<Pair>,
}

impl MergeEngine {
    /// One symbol per character. `c_min` enables candidate tracking for selection.
    pub(crate) fn from_chars(text: &str, c_min: Option<u64>) -> Self {
        let mut table = SymbolTable::new();
        let mut buf = [0u8; 4];
        let sym: Vec<SymbolId> = text
            .chars()
            .map(|c| table.intern(c.encode_utf8(&mut buf)))
            .collect();
        let n = sym.len();
        assert!(n < NIL as usize, "sequence too long for 32-bit positions");

        let mut marginals = vec![0u64; table.len()];
        for &s in &sym {
            marginals[s as usize] += 1;
        }
        let mut pairs: FxHashMap<Pair, PairSlot> = FxHashMap::default();
        for i in 0..n.saturating_sub(1) {
            let slot = pairs.entry((sym[i], sym[i + 1])).or_default();
            slot.count += 1;
            slot.positions.push(i as u32);
        }
        let candidates = c_min.map(|c_min| {
            let set = pairs
                .iter()
                .filter(|(_, slot)| slot.count >= c_min)
                .map(|(&p, _)| p)
                .collect();
            (c_min, set)
        });

        Self {
            present: table.len(),
            table,
            prev: (0..n as u32).map(|i| i.checked_sub(1).unwrap_or(NIL)).collect(),
            next: (0..n as u32)
                .map(|i| if (i as usize) + 1 < n { i + 1 } else { NIL })
                .collect(),
            sym,
            len: n as u64,
            marginals,
            pairs,
            candidates,
            touched: Vec::new(),
        }
    }

    pub(crate) fn len(&self) -> u64 {
        self.len
    }

    /// Distinct symbols currently present in the sequence.
    pub(crate) fn present(&self) -> usize {
        self.present
    }

    pub(crate) fn n_positions(&self) -> u64 {
        adjacency_positions(self.len)
    }

    /// Current symbols in order.
    pub(crate) fn symbols(&self) -> Vec<SymbolId> {
        let mut out = Vec::with_capacity(self.len as usize);
        let mut i = if self.sym.is_empty() { NIL } else { 0 };
        while i != NIL {
            out.push(self.sym[i as usize]);
            i = self.next[i as usize];
        }
        out
    }

    #[cfg(test)]
    pub(crate) fn pair_count(&self, pair: Pair) -> u64 {
        self.pairs.get(&pair).map_or(0, |s| s.count)
    }

    #[cfg(test)]
    pub(crate) fn marginal(&self, s: SymbolId) -> u64 {
        self.marginals.get(s as usize).copied().unwrap_or(0)
    }

    #[cfg(test)]
    pub(crate) fn pair_map(&self) -> FxHashMap<Pair, u64> {
        self.pairs.iter().map(|(&p, s)| (p, s.count)).collect()
    }

    /// Best admissible pair under `cfg`. Requires candidate tracking with `cfg.c_min`.
    pub(crate) fn select(&self, cfg: &MergePolicyConfig) -> Option<ScoredPair> {
        let (c_min, set) = self
            .candidates
            .as_ref()
            .expect("candidate tracking disabled");
        debug_assert_eq!(*c_min, cfg.c_min);
        let n = self.n_positions();
        let mut best = None;
        for &(x, y) in set {
            let c_xy = self.pairs[&(x, y)].count;
            let score = score_counts(
                c_xy,
                self.marginals[x as usize],
                self.marginals[y as usize],
                n,
                cfg,
            );
            keep_best(
                &mut best,
                ScoredPair {
                    left: x,
                    right: y,
                    count: c_xy,
                    score,
                },
                &self.table,
            );
        }
        best
    }

    /// Merge by symbol strings; returns the number of replacements.
    pub(crate) fn apply_rule(&mut self, left: &str, right: &str, merged: &str) -> u64 {
        let (Some(a), Some(b)) = (self.table.get(left), self.table.get(right)) else {
            return 0;
        };
        if !self.pairs.contains_key(&(a, b)) {
            return 0;
        }
        let m = self.table.intern(merged);
        self.apply(a, b, m)
    }

    /// Replace every adjacent `(a, b)` with `m`, leftmost first and non-overlapping.
    pub(crate) fn apply(&mut self, a: SymbolId, b: SymbolId, m: SymbolId) -> u64 {
        let mut positions = match self.pairs.get_mut(&(a, b)) {
            Some(slot) => std::mem::take(&mut slot.positions),
            None => return 0,
        };
        if self.marginals.len() < self.table.len() {
            self.marginals.resize(self.table.len(), 0);
        }
        positions.sort_unstable();
        positions.dedup();

        let mut replaced = 0u64;
        for i in positions {
            let iu = i as usize;
            if self.sym[iu] != a {
                continue;
            }
            let j = self.next[iu];
            if j == NIL || self.sym[j as usize] != b {
                continue;
            }
            let p = self.prev[iu];
            let n = self.next[j as usize];

            self.dec((a, b));
            if p != NIL {
                self.dec((self.sym[p as usize], a));
            }
            if n != NIL {
                self.dec((b, self.sym[n as usize]));
            }

            self.sym[iu] = m;
            self.sym[j as usize] = NIL;
            self.next[iu] = n;
            if n != NIL {
                self.prev[n as usize] = i;
            }

            if p != NIL {
                self.inc((self.sym[p as usize], m), p);
            }
            if n != NIL {
                self.inc((m, self.sym[n as usize]), i);
            }
            self.sub_marginal(a);
            self.sub_marginal(b);
            self.add_marginal(m);
            replaced += 1;
        }
        debug_assert!(!self.pairs.contains_key(&(a, b)));
        self.len -= replaced;
        self.refresh_candidates((a, b));
        replaced
    }

    fn inc(&mut self, pair: Pair, pos: u32) {
        let slot = self.pairs.entry(pair).or_default();
        slot.count += 1;
        slot.positions.push(pos);
        self.touched.push(pair);
    }

    fn dec(&mut self, pair: Pair) {
        let slot = self
            .pairs
            .get_mut(&pair)
            .expect("decrement of an uncounted pair");
        slot.count -= 1;
        if slot.count == 0 {
            self.pairs.remove(&pair);
        }
        self.touched.push(pair);
    }

    fn add_marginal(&mut self, s: SymbolId) {
        let c = &mut self.marginals[s as usize];
        if *c == 0 {
            self.present += 1;
        }
        *c += 1;
    }

    fn sub_marginal(&mut self, s: SymbolId) {
        let c = &mut self.marginals[s as usize];
        *c -= 1;
        if *c == 0 {
            self.present -= 1;
        }
    }

    fn refresh_candidates(&mut self, merged: Pair) {
        let mut touched = std::mem::take(&mut self.touched);
        if let Some((c_min, set)) = self.candidates.as_mut() {
            set.remove(&merged);
            for pair in touched.drain(..) {
                match self.pairs.get(&pair) {
                    Some(slot) if slot.count >= *c_min => {
                        set.insert(pair);
                    }
                    _ => {
                        set.remove(&pair);
                    }
                }
            }
        }
        touched.clear();
        self.touched = touched;
    }
}
