//! Subset-sum bitsets and operations built on them.
//!
//! `S_A` (sums of nonempty subsets of `A`) is computed by the classic
//! shift-or dynamic program: one left shift and OR per element. Witness
//! reconstruction keeps one generation index per bit (the element that
//! first set it), so a generating subset for any reachable sum is
//! recovered by walking indices strictly downward.

use std::collections::BTreeSet;

use crate::error::Error;
use crate::set::IntegerSet;
use crate::Result;

const WORD_BITS: u64 = 64;

/// Bitset over `[0, s_max]` holding reachable subset sums. Bit 0 stands for
/// the empty subset and is masked out of every query.
#[derive(Debug, Clone)]
pub struct SumBitset {
    nbits: u64,
    words: Vec<u64>,
    elements: Vec<u64>,
    gen: Option<Vec<u16>>,
}

impl SumBitset {
    /// Bitset with only the empty-subset bit, capacity `[0, s_max]`.
    pub fn empty(s_max: u64, track_witness: bool, budget_bits: u64) -> Result<Self> {
        let nbits = s_max + 1;
        if nbits > budget_bits {
            return Err(Error::BudgetExceeded {
                what: "sum bitset",
                needed: nbits as u128,
                limit: budget_bits as u128,
            });
        }
        let nwords = (nbits as usize).div_ceil(WORD_BITS as usize);
        let mut words = vec![0u64; nwords];
        words[0] = 1;
        let gen = track_witness.then(|| vec![0u16; nbits as usize]);
        Ok(SumBitset {
            nbits,
            words,
            elements: Vec::new(),
            gen,
        })
    }

    /// All sums of nonempty subsets of `a`.
    pub fn subset_sums(a: &IntegerSet, budget_bits: u64) -> Result<Self> {
        Self::build(a, false, budget_bits)
    }

    /// Like [`SumBitset::subset_sums`], with witness reconstruction enabled.
    pub fn subset_sums_tracked(a: &IntegerSet, budget_bits: u64) -> Result<Self> {
        Self::build(a, true, budget_bits)
    }

    fn build(a: &IntegerSet, track: bool, budget_bits: u64) -> Result<Self> {
        let total = a.sum();
        if total >= u64::MAX as u128 {
            return Err(Error::Overflow("subset sum universe"));
        }
        if track && a.len() >= u16::MAX as usize {
            return Err(Error::InvalidInput(
                "witness tracking supports at most 65534 elements".into(),
            ));
        }
        let mut bs = Self::empty(total as u64, track, budget_bits)?;
        for &e in a.elements() {
            bs.insert_element(e);
        }
        Ok(bs)
    }

    /// `dp |= dp << e` for a new generating element.
    pub fn insert_element(&mut self, e: u64) {
        debug_assert!(e >= 1);
        self.elements.push(e);
        let idx = self.elements.len() as u16;
        let ws = (e / WORD_BITS) as usize;
        let bs = e % WORD_BITS;
        let n = self.words.len();
        for i in (ws..n).rev() {
            let mut v = self.words[i - ws] << bs;
            if bs > 0 && i > ws {
                v |= self.words[i - ws - 1] >> (WORD_BITS - bs);
            }
            let fresh = v & !self.words[i];
            if fresh != 0 {
                if let Some(gen) = &mut self.gen {
                    let base = i as u64 * WORD_BITS;
                    let mut rest = fresh;
                    while rest != 0 {
                        let b = rest.trailing_zeros() as u64;
                        gen[(base + b) as usize] = idx;
                        rest &= rest - 1;
                    }
                }
                self.words[i] |= fresh;
            }
        }
    }

    /// Largest representable sum.
    pub fn s_max(&self) -> u64 {
        self.nbits - 1
    }

    /// True iff `v` is a sum of some nonempty subset.
    pub fn contains(&self, v: u64) -> bool {
        if v == 0 || v >= self.nbits {
            return false;
        }
        self.words[(v / WORD_BITS) as usize] >> (v % WORD_BITS) & 1 == 1
    }

    /// Number of distinct nonempty-subset sums.
    pub fn count(&self) -> u64 {
        let ones: u64 = self.words.iter().map(|w| w.count_ones() as u64).sum();
        ones - 1 // bit 0
    }

    /// All sums in ascending order.
    pub fn values(&self) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.count() as usize);
        for (i, &w) in self.words.iter().enumerate() {
            let mut rest = if i == 0 { w & !1 } else { w };
            let base = i as u64 * WORD_BITS;
            while rest != 0 {
                out.push(base + rest.trailing_zeros() as u64);
                rest &= rest - 1;
            }
        }
        out
    }

    /// True iff some masked bit is a reachable sum.
    pub fn intersects(&self, mask: &BitMask) -> bool {
        let n = self.words.len().min(mask.words.len());
        (0..n).any(|i| {
            let w = if i == 0 {
                self.words[0] & !1
            } else {
                self.words[i]
            };
            w & mask.words[i] != 0
        })
    }

    /// A subset of the generating elements summing to `v`.
    ///
    /// Requires witness tracking; returns elements in insertion order.
    pub fn witness(&self, v: u64) -> Result<Vec<u64>> {
        let gen = self
            .gen
            .as_ref()
            .ok_or_else(|| Error::InvalidInput("bitset built without witness tracking".into()))?;
        if !self.contains(v) {
            return Err(Error::InvalidInput(format!("{v} is not a reachable sum")));
        }
        let mut subset = Vec::new();
        let mut rest = v;
        let mut last = u16::MAX;
        while rest > 0 {
            let g = gen[rest as usize];
            debug_assert!(g >= 1 && g < last, "generation indices must decrease");
            last = g;
            let e = self.elements[g as usize - 1];
            subset.push(e);
            rest -= e;
        }
        subset.reverse();
        debug_assert_eq!(subset.iter().copied().sum::<u64>(), v);
        Ok(subset)
    }
}

/// Plain bitset over `[0, s_max]` used as an intersection mask.
pub struct BitMask {
    words: Vec<u64>,
}

impl BitMask {
    /// Mask of all values `p*z^2 <= s_max` (z >= 1).
    pub fn scaled_squares(p: u64, s_max: u64) -> Self {
        let nwords = (s_max as usize + 1).div_ceil(WORD_BITS as usize);
        let mut words = vec![0u64; nwords];
        let mut z = 1u64;
        loop {
            let v = match z.checked_mul(z).and_then(|s| s.checked_mul(p)) {
                Some(v) if v <= s_max => v,
                _ => break,
            };
            words[(v / WORD_BITS) as usize] |= 1 << (v % WORD_BITS);
            z += 1;
        }
        BitMask { words }
    }

    /// Mask of all perfect squares in `[1, s_max]`.
    pub fn squares(s_max: u64) -> Self {
        Self::scaled_squares(1, s_max)
    }
}

/// What to look for inside a sumset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetKind {
    /// Perfect squares `z^2`.
    Square,
    /// Values `p * z^2` for a fixed positive multiplier.
    ScaledSquare { p: u64 },
}

impl TargetKind {
    pub fn multiplier(&self) -> u64 {
        match self {
            TargetKind::Square => 1,
            TargetKind::ScaledSquare { p } => *p,
        }
    }
}

/// A certified hit: `value = p * z^2` is the sum of `subset`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TargetWitness {
    pub value: u64,
    pub z: u64,
    pub subset: Vec<u64>,
}

/// Smallest value of the target shape among the subset sums of `a`,
/// together with a generating subset. `None` when the sumset avoids the
/// target entirely.
pub fn first_target_with_witness(
    a: &IntegerSet,
    target: TargetKind,
    budget_bits: u64,
) -> Result<Option<TargetWitness>> {
    let p = target.multiplier();
    if p == 0 {
        return Err(Error::InvalidInput("multiplier must be positive".into()));
    }
    let bs = SumBitset::subset_sums_tracked(a, budget_bits)?;
    let mut z = 1u64;
    loop {
        let v = match z.checked_mul(z).and_then(|s| s.checked_mul(p)) {
            Some(v) if v <= bs.s_max() => v,
            _ => return Ok(None),
        };
        if bs.contains(v) {
            let subset = bs.witness(v)?;
            let total: u64 = subset.iter().copied().sum();
            if total != v {
                return Err(Error::VerificationFailed(format!(
                    "witness for {v} sums to {total}"
                )));
            }
            return Ok(Some(TargetWitness { value: v, z, subset }));
        }
        z += 1;
    }
}

/// Smallest perfect square among the subset sums of `a`, with witness.
pub fn first_square_with_witness(
    a: &IntegerSet,
    budget_bits: u64,
) -> Result<Option<TargetWitness>> {
    first_target_with_witness(a, TargetKind::Square, budget_bits)
}

/// Result of the greedy covering of `X` by translates of `Y - Y`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverResult {
    /// Chosen translates `t`, a subset of `X`, ascending.
    pub translates: Vec<i64>,
    /// `|X + Y|`, for the cardinality guarantee.
    pub xy_size: usize,
}

/// Greedy maximal family `T ⊆ X` with pairwise disjoint `t + Y`; then
/// `X ⊆ ∪_{t∈T} (t + (Y - Y))` and `|T| <= |X+Y| / |Y|`. Both facts are
/// re-verified before returning.
pub fn ruzsa_cover(x: &[i64], y: &[i64]) -> Result<CoverResult> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::InvalidInput("cover requires nonempty sets".into()));
    }
    for s in [x, y] {
        if s.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput(
                "cover inputs must be sorted and distinct".into(),
            ));
        }
    }
    let mut used: BTreeSet<i64> = BTreeSet::new();
    let mut translates: Vec<i64> = Vec::new();
    for &xi in x {
        if y.iter().all(|&yi| !used.contains(&(xi + yi))) {
            for &yi in y {
                used.insert(xi + yi);
            }
            translates.push(xi);
        }
    }

    let mut xy: BTreeSet<i64> = BTreeSet::new();
    for &xi in x {
        for &yi in y {
            xy.insert(xi + yi);
        }
    }
    let bound = xy.len() / y.len();
    if translates.len() > bound {
        return Err(Error::VerificationFailed(format!(
            "cover size {} exceeds |X+Y|/|Y| = {}",
            translates.len(),
            bound
        )));
    }

    let mut diffs: BTreeSet<i64> = BTreeSet::new();
    for &a in y {
        for &b in y {
            diffs.insert(a - b);
        }
    }
    for &xi in x {
        let covered = translates.iter().any(|&t| diffs.contains(&(xi - t)));
        if !covered {
            return Err(Error::VerificationFailed(format!(
                "element {xi} not covered by any translate"
            )));
        }
    }
    Ok(CoverResult {
        translates,
        xy_size: xy.len(),
    })
}

/// Sums over subsets of exactly `l` elements of `a`, as a set.
pub fn fixed_count_sums(a: &IntegerSet, l: usize, budget_bits: u64) -> Result<IntegerSet> {
    if l == 0 || l > a.len() {
        return Err(Error::InvalidInput(format!(
            "summand count {l} out of range 1..={}",
            a.len()
        )));
    }
    let total = a.sum();
    if total >= u64::MAX as u128 {
        return Err(Error::Overflow("subset sum universe"));
    }
    let s_max = total as u64;
    let nbits = (s_max + 1) as u128;
    let needed = nbits * (l as u128 + 1);
    if needed > budget_bits as u128 {
        return Err(Error::BudgetExceeded {
            what: "layered sum bitset",
            needed,
            limit: budget_bits as u128,
        });
    }
    let nwords = (s_max as usize + 1).div_ceil(WORD_BITS as usize);
    let mut layers = vec![vec![0u64; nwords]; l + 1];
    layers[0][0] = 1;
    for &e in a.elements() {
        let ws = (e / WORD_BITS) as usize;
        let bs = e % WORD_BITS;
        for j in (1..=l).rev() {
            let (dst_part, src_part) = layers.split_at_mut(j);
            let src = &dst_part[j - 1];
            let dst = &mut src_part[0];
            for i in (ws..nwords).rev() {
                let mut v = src[i - ws] << bs;
                if bs > 0 && i > ws {
                    v |= src[i - ws - 1] >> (WORD_BITS - bs);
                }
                dst[i] |= v;
            }
        }
    }
    let mut vals = Vec::new();
    for (i, &w) in layers[l].iter().enumerate() {
        let mut rest = w;
        let base = i as u64 * WORD_BITS;
        while rest != 0 {
            vals.push(base + rest.trailing_zeros() as u64);
            rest &= rest - 1;
        }
    }
    IntegerSet::new(vals, s_max)
}
