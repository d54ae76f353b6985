//! Block decomposition, pairwise merging with shift elements, progression
//! fitting, and a certificate-carrying divisor-or-progression dichotomy.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::arith::{gcd_i128, gcd_u128, integer_kth_root};
use crate::config::SolverConfig;
use crate::congruence::{solve_quadratic_congruence, CongruenceInstance};
use crate::error::Error;
use crate::factor::factorize;
use crate::gap::Gap;
use crate::gap_squares::{smallest_residue_root, verify_gap_membership};
use crate::set::IntegerSet;
use crate::sumset::{fixed_count_sums, SumBitset};
use crate::Result;

/// Longest coordinate scan when fitting a two-step progression.
const REP_SCAN_CAP: u64 = 10_000;
/// How many high-frequency differences to try as candidate steps.
const DIFF_CANDIDATES: usize = 8;

fn gcd_u64(a: u64, b: u64) -> u64 {
    gcd_u128(a as u128, b as u128) as u64
}

/// A block of the prefix whose l1-fold sums are dense enough to merge.
#[derive(Debug, Clone)]
pub struct Block {
    /// Sorted distinct elements.
    pub elements: Vec<u64>,
    /// Smallest summand count whose sums cover half the prefix size.
    pub l1: usize,
}

/// Split the prefix into disjoint blocks of its smallest elements, keeping a
/// block only if some l-fold sum count reaches half the prefix cardinality.
///
/// The boolean is a deviation flag: true when the prefix was too small or a
/// chunk failed the density check, in which case the caller should fall back
/// to plain subset sums.
pub fn greedy_disjoint_blocks(
    a_prime: &IntegerSet,
    config: &SolverConfig,
) -> Result<(Vec<Block>, bool)> {
    let n = a_prime.len();
    if n < 16 {
        return Ok((Vec::new(), true));
    }
    let log2n = (n as f64).log2();
    let size_cap = ((20.0 * log2n) as usize).max(2);
    let l_cap = ((10.0 * log2n) as usize).max(1);
    let chunk = (n / 4).clamp(2, size_cap);
    let elems = a_prime.elements();
    let mut blocks = Vec::new();
    let mut idx = 0;
    while idx + chunk <= elems.len() {
        let part = elems[idx..idx + chunk].to_vec();
        idx += chunk;
        let set = IntegerSet::new(part.clone(), a_prime.universe())?;
        let mut found = None;
        for l in 1..=l_cap.min(chunk) {
            let sums = fixed_count_sums(&set, l, config.memory_budget_bits)?;
            if 2 * sums.len() >= n {
                found = Some(l);
                break;
            }
        }
        match found {
            Some(l1) => blocks.push(Block { elements: part, l1 }),
            None => return Ok((blocks, true)),
        }
    }
    Ok((blocks, false))
}

/// Per-round bookkeeping of a merge run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MergeTrace {
    /// Block cardinality after each round, starting with the input minimum.
    pub b: Vec<u64>,
    /// Summand-count budget after each round, l[t+1] = 2*l[t] + 1.
    pub l: Vec<u64>,
    /// Block count after each round, m[t+1] = m[t] / 4.
    pub m: Vec<u64>,
    /// Rounds executed before growth stalled or blocks ran out.
    pub k: usize,
    /// Shift elements removed from the reservoir, in pick order.
    pub consumed: Vec<u64>,
    /// Growth factor the run was asked to sustain.
    pub c: f64,
    /// Rounds that ran with fewer shifts than configured, as (round, used).
    pub h_deviations: Vec<(usize, usize)>,
}

impl MergeTrace {
    /// Re-check the recurrences the merge loop is supposed to maintain.
    pub fn check(&self) -> Result<()> {
        let len = self.k + 1;
        if self.b.len() != len || self.l.len() != len || self.m.len() != len {
            return Err(Error::VerificationFailed(
                "trace length disagrees with round count".into(),
            ));
        }
        if self.c <= 0.0 || !self.c.is_finite() {
            return Err(Error::VerificationFailed("bad growth factor".into()));
        }
        if self.b.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::VerificationFailed(
                "cardinalities must not shrink".into(),
            ));
        }
        if self.l.windows(2).any(|w| w[1] != 2 * w[0] + 1) {
            return Err(Error::VerificationFailed(
                "summand budget recurrence broken".into(),
            ));
        }
        if self.m.windows(2).any(|w| w[1] != w[0] / 4) {
            return Err(Error::VerificationFailed(
                "block count must quarter each round".into(),
            ));
        }
        Ok(())
    }

    /// Upper bound on the round count for growth factor c > 2; None otherwise.
    pub fn growth_rounds_bound(&self, n: u64, p: u64) -> Option<f64> {
        if self.c <= 2.0 {
            return None;
        }
        let num = (self.l[0] * n) as f64;
        let den = (self.b[0] * p.max(1)) as f64;
        Some((num / den).max(1.0).log(self.c / 2.0))
    }
}

/// Sums of exactly l distinct elements of the slice.
fn l_fold_sums(elems: &[u64], l: usize) -> Vec<u64> {
    let mut layers: Vec<HashSet<u64>> = vec![HashSet::new(); l + 1];
    layers[0].insert(0);
    for &e in elems {
        for j in (1..=l).rev() {
            let shifted: Vec<u64> = layers[j - 1].iter().map(|&s| s + e).collect();
            layers[j].extend(shifted);
        }
    }
    let mut out: Vec<u64> = layers[l].iter().copied().collect();
    out.sort_unstable();
    out
}

fn pair_sums(x: &[u64], y: &[u64]) -> Vec<u64> {
    let mut out = Vec::with_capacity(x.len() * y.len());
    for &a in x {
        for &b in y {
            out.push(a + b);
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// Greedily pick up to h_eff shifts maximizing the union of shifted copies.
fn greedy_shifts(pair: &[u64], avail: &[u64], h_eff: usize) -> (Vec<u64>, Vec<u64>) {
    if h_eff == 0 {
        return (Vec::new(), pair.to_vec());
    }
    let mut union: HashSet<u64> = HashSet::with_capacity(pair.len() * h_eff);
    let mut sel: Vec<u64> = Vec::with_capacity(h_eff);
    for _ in 0..h_eff {
        let mut best: Option<(u64, usize)> = None;
        for &a in avail {
            if sel.contains(&a) {
                continue;
            }
            let gain = pair.iter().filter(|&&p| !union.contains(&(p + a))).count();
            if best.is_none_or(|(_, g)| gain > g) {
                best = Some((a, gain));
            }
        }
        let Some((a, _)) = best else { break };
        sel.push(a);
        for &p in pair {
            union.insert(p + a);
        }
    }
    let mut u: Vec<u64> = union.into_iter().collect();
    u.sort_unstable();
    (sel, u)
}

struct Pick {
    i: usize,
    j: usize,
    shifts: Vec<u64>,
    union: Vec<u64>,
}

/// Merge blocks four-to-one per round, each pick joining the two blocks and
/// shift tuple whose shifted pairwise sums have the largest union.
///
/// Stops when a round grows the minimum cardinality by less than the factor
/// config.c, or when fewer than four blocks remain. Returns the trace and the
/// surviving blocks, truncated to a common cardinality.
pub fn merge_algorithm(
    blocks: &[Block],
    rest: &[u64],
    config: &SolverConfig,
) -> Result<(MergeTrace, Vec<Vec<u64>>)> {
    if blocks.len() < 4 {
        return Err(Error::BlocksExhausted {
            found: blocks.len(),
            need: 4,
        });
    }
    let mut m1 = 4usize;
    while m1 * 4 <= blocks.len() {
        m1 *= 4;
    }
    let min_len = blocks[..m1].iter().map(|b| b.elements.len()).min().unwrap();
    if min_len == 0 {
        return Err(Error::InvalidInput("empty block".into()));
    }
    let l1 = blocks[..m1]
        .iter()
        .map(|b| b.l1)
        .max()
        .unwrap()
        .clamp(1, min_len);
    let mut working: Vec<Vec<u64>> = blocks[..m1]
        .iter()
        .map(|b| l_fold_sums(&b.elements, l1))
        .collect();
    let b1 = working.iter().map(Vec::len).min().unwrap();
    for w in &mut working {
        w.truncate(b1);
    }
    let mut avail: Vec<u64> = rest.to_vec();
    avail.sort_unstable();
    avail.dedup();

    let mut trace = MergeTrace {
        b: vec![b1 as u64],
        l: vec![l1 as u64],
        m: vec![m1 as u64],
        k: 0,
        consumed: Vec::new(),
        c: config.c,
        h_deviations: Vec::new(),
    };

    let mut round = 0usize;
    loop {
        let cur_m = working.len();
        if cur_m < 4 {
            break;
        }
        round += 1;
        let picks = cur_m / 4;
        let mut merged: Vec<Vec<u64>> = Vec::with_capacity(picks);
        for _ in 0..picks {
            let h_eff = config.h.min(avail.len());
            if h_eff < config.h && trace.h_deviations.last().map(|&(r, _)| r) != Some(round) {
                trace.h_deviations.push((round, h_eff));
            }
            let mut best: Option<Pick> = None;
            for i in 0..working.len() {
                for j in (i + 1)..working.len() {
                    let pair = pair_sums(&working[i], &working[j]);
                    let (shifts, union) = greedy_shifts(&pair, &avail, h_eff);
                    if best.as_ref().is_none_or(|b| union.len() > b.union.len()) {
                        best = Some(Pick {
                            i,
                            j,
                            shifts,
                            union,
                        });
                    }
                }
            }
            let Pick {
                i,
                j,
                shifts,
                union,
            } = best.unwrap();
            working.remove(j);
            working.remove(i);
            for &a in &shifts {
                if let Ok(pos) = avail.binary_search(&a) {
                    avail.remove(pos);
                }
                trace.consumed.push(a);
            }
            merged.push(union);
        }
        working = merged;
        let b_next = working.iter().map(Vec::len).min().unwrap();
        for w in &mut working {
            w.truncate(b_next);
        }
        let prev_b = *trace.b.last().unwrap();
        trace.b.push(b_next as u64);
        trace.l.push(2 * trace.l.last().unwrap() + 1);
        trace.m.push(working.len() as u64);
        trace.k = round;
        if (b_next as f64) < config.c * prev_b as f64 {
            break;
        }
    }
    Ok((trace, working))
}

/// Fit the set with a progression of rank at most max_rank whose volume stays
/// within a kappa factor of the set size. Membership of every input element
/// is re-verified before a fit is returned.
pub fn fit_gap(x: &IntegerSet, max_rank: usize, config: &SolverConfig) -> Result<Option<Gap>> {
    if max_rank == 0 || max_rank > 2 {
        return Err(Error::InvalidInput(format!(
            "rank {max_rank} not supported, expected 1 or 2"
        )));
    }
    if x.len() < 2 {
        return Ok(None);
    }
    let elems = x.elements();
    let lo = elems[0];
    let hi = *elems.last().unwrap();
    let cap = config.kappa as u128 * x.len() as u128;

    let first_diff = elems[1] - elems[0];
    if elems.windows(2).all(|w| w[1] - w[0] == first_diff) {
        let gap = Gap::new(
            lo as i128,
            vec![first_diff as i128],
            vec![x.len() as u64 - 1],
        )?;
        return Ok(Some(gap));
    }

    if max_rank >= 2 && (x.len() as u128).pow(2) <= config.enumeration_budget as u128 {
        let mut freq: HashMap<u64, u32> = HashMap::new();
        for i in 0..elems.len() {
            for j in (i + 1)..elems.len() {
                *freq.entry(elems[j] - elems[i]).or_insert(0) += 1;
            }
        }
        let mut ranked: Vec<(u64, u32)> = freq.into_iter().collect();
        ranked.sort_unstable_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        ranked.truncate(DIFF_CANDIDATES);
        for i in 0..ranked.len() {
            for j in (i + 1)..ranked.len() {
                let s1 = ranked[i].0.min(ranked[j].0);
                let s2 = ranked[i].0.max(ranked[j].0);
                if let Some(gap) = try_two_step(elems, lo, s1, s2, cap, config)? {
                    return Ok(Some(gap));
                }
            }
        }
    }

    // Last resort: the coarsest single-step progression through all elements.
    let mut g = 0u64;
    for w in elems.windows(2) {
        g = gcd_u64(g, w[1] - w[0]);
    }
    let size = (hi - lo) / g;
    if (size as u128) < cap {
        let gap = Gap::new(lo as i128, vec![g as i128], vec![size])?;
        if elems
            .iter()
            .all(|&e| verify_gap_membership(&gap, e as i128).is_some())
        {
            return Ok(Some(gap));
        }
        return Err(Error::VerificationFailed(
            "step gcd fit lost an element".into(),
        ));
    }
    Ok(None)
}

/// Try steps (s1, s2), representing each element with the smallest
/// s1-coordinate. Fails on any unrepresentable element, oversized volume,
/// or an improper coordinate map.
fn try_two_step(
    elems: &[u64],
    lo: u64,
    s1: u64,
    s2: u64,
    cap: u128,
    config: &SolverConfig,
) -> Result<Option<Gap>> {
    let mut a_max = 0u64;
    let mut b_max = 0u64;
    for &x in elems {
        let v = x - lo;
        let mut rep = None;
        let mut a = 0u64;
        while a <= REP_SCAN_CAP {
            let used = a as u128 * s1 as u128;
            if used > v as u128 {
                break;
            }
            let rem = v - used as u64;
            if rem.is_multiple_of(s2) {
                rep = Some((a, rem / s2));
                break;
            }
            a += 1;
        }
        let Some((ra, rb)) = rep else {
            return Ok(None);
        };
        a_max = a_max.max(ra);
        b_max = b_max.max(rb);
    }
    let volume = (a_max as u128 + 1) * (b_max as u128 + 1);
    if volume > cap {
        return Ok(None);
    }
    let gap = Gap::new(lo as i128, vec![s1 as i128, s2 as i128], vec![a_max, b_max])?;
    if !gap.is_proper(config.enumeration_budget)? {
        return Ok(None);
    }
    for &x in elems {
        if verify_gap_membership(&gap, x as i128).is_none() {
            return Ok(None);
        }
    }
    Ok(Some(gap))
}

/// Certificate produced by the structure split.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DichotomyBranch {
    /// Every element outside the prefix is a multiple of d.
    Divisor { d: u64 },
    /// A progression of realizable subset sums whose offset carries a square
    /// multiple of p modulo the step gcd.
    Progression {
        gap: Gap,
        z: i128,
        modulus: i128,
        consumed: Vec<u64>,
        /// True when the fit ran on plain prefix sums instead of merged blocks.
        via_interval: bool,
    },
    /// Neither certificate was found.
    Inconclusive { reason: String },
}

/// The split together with whichever certificate was established.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DichotomyOutcome {
    pub prefix: IntegerSet,
    pub rest: IntegerSet,
    pub branch: DichotomyBranch,
}

/// Smallest t with t^3 >= n^2, the prefix length of the split.
fn prefix_split_len(n: usize) -> usize {
    let sq = (n as u128) * (n as u128);
    let mut t = integer_kth_root(sq, 3) as usize;
    if (t as u128).pow(3) < sq {
        t += 1;
    }
    t
}

/// Check that every element of the progression is a realizable subset sum of
/// the prefix joined with the consumed shift elements.
fn progression_sums_realizable(
    gap: &Gap,
    prefix: &IntegerSet,
    consumed: &[u64],
    config: &SolverConfig,
) -> Result<bool> {
    let mut base = prefix.elements().to_vec();
    base.extend_from_slice(consumed);
    base.sort_unstable();
    base.dedup();
    let universe = *base.last().unwrap();
    let set = IntegerSet::new(base, universe)?;
    let dp = SumBitset::subset_sums(&set, config.memory_budget_bits)?;
    for v in gap.elements(config.enumeration_budget)? {
        if v < 1 || v > dp.s_max() as i128 || !dp.contains(v as u64) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// When the offset has no residue root, consume elements from whole residue
/// classes so the shifted offset gains one. Returns the shifted progression,
/// its root, and the elements to consume, or None when no repair applies.
fn repair_offset(
    gap: &Gap,
    modulus: i128,
    p: u64,
    avail: &[u64],
    config: &SolverConfig,
) -> Result<Option<(Gap, i128, Vec<u64>)>> {
    if modulus <= 1 {
        return Ok(None);
    }
    let mut classes: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
    for &e in avail {
        let r = (e as i128).rem_euclid(modulus) as u64;
        if r != 0 {
            classes.entry(r).or_default().push(e);
        }
    }
    let mut sel: Vec<i128> = Vec::new();
    let mut g = modulus;
    for &r in classes.keys() {
        sel.push(r as i128);
        g = gcd_i128(g, r as i128);
        if g == 1 {
            break;
        }
    }
    if g != 1 {
        return Ok(None);
    }
    let inst = CongruenceInstance::new(sel.clone(), gap.offset, p as i128, modulus)?;
    let sol = match solve_quadratic_congruence(&inst, config.exp_d) {
        Ok(s) => s,
        Err(_) => return Ok(None),
    };
    let mut chosen: Vec<u64> = Vec::new();
    for (i, &r) in sel.iter().enumerate() {
        let need = sol.x[i].rem_euclid(modulus) as usize;
        let class = &classes[&(r as u64)];
        if class.len() < need {
            return Ok(None);
        }
        chosen.extend_from_slice(&class[..need]);
    }
    let delta: i128 = chosen.iter().map(|&e| e as i128).sum();
    let shifted = Gap::new(gap.offset + delta, gap.steps.clone(), gap.sizes.clone())?;
    let Some(z) = smallest_residue_root(p as i128, shifted.offset, modulus) else {
        return Err(Error::VerificationFailed(
            "repaired offset lost its residue root".into(),
        ));
    };
    Ok(Some((shifted, z, chosen)))
}

/// Split the set and certify either a common divisor of the tail or a
/// progression of realizable subset sums with a residue root at its offset.
pub fn dichotomy(a: &IntegerSet, p: u64, config: &SolverConfig) -> Result<DichotomyOutcome> {
    if a.len() < 32 {
        return Err(Error::InvalidInput(format!(
            "need at least 32 elements, got {}",
            a.len()
        )));
    }
    if p == 0 {
        return Err(Error::InvalidInput("multiplier must be positive".into()));
    }
    let split = prefix_split_len(a.len());
    let elems = a.elements();
    let prefix = IntegerSet::new(elems[..split].to_vec(), a.universe())?;
    let rest = IntegerSet::new(elems[split..].to_vec(), a.universe())?;

    let d = rest.elements().iter().fold(0u64, |g, &e| gcd_u64(g, e));
    if d > 1 {
        return Ok(DichotomyOutcome {
            prefix,
            rest,
            branch: DichotomyBranch::Divisor { d },
        });
    }

    let (blocks, flagged) = greedy_disjoint_blocks(&prefix, config)?;
    let merged = if !flagged && blocks.len() >= 4 {
        merge_algorithm(&blocks, rest.elements(), config).ok()
    } else {
        None
    };
    let (x_vals, consumed, via_interval) = match merged {
        Some((trace, finals)) => (finals[0].clone(), trace.consumed, false),
        None => {
            let dp = SumBitset::subset_sums(&prefix, config.memory_budget_bits)?;
            (dp.values(), Vec::new(), true)
        }
    };
    let universe = *x_vals.last().unwrap();
    let x_set = IntegerSet::new(x_vals, universe)?;

    let Some(gap) = fit_gap(&x_set, 2, config)? else {
        return Ok(DichotomyOutcome {
            prefix,
            rest,
            branch: DichotomyBranch::Inconclusive {
                reason: "no low-complexity progression fits the merged sums".into(),
            },
        });
    };
    let modulus = gap
        .steps
        .iter()
        .fold(0i128, |g, &s| gcd_i128(g, s.abs()))
        .max(1);

    let branch = match smallest_residue_root(p as i128, gap.offset, modulus) {
        Some(z) => {
            if progression_sums_realizable(&gap, &prefix, &consumed, config)? {
                DichotomyBranch::Progression {
                    gap,
                    z,
                    modulus,
                    consumed,
                    via_interval,
                }
            } else {
                DichotomyBranch::Inconclusive {
                    reason: "progression containment check failed".into(),
                }
            }
        }
        None => {
            let used: HashSet<u64> = consumed.iter().copied().collect();
            let avail: Vec<u64> = rest
                .elements()
                .iter()
                .copied()
                .filter(|e| !used.contains(e))
                .collect();
            match repair_offset(&gap, modulus, p, &avail, config)? {
                Some((shifted, z, extra)) => {
                    let mut consumed2 = consumed.clone();
                    consumed2.extend(extra);
                    if progression_sums_realizable(&shifted, &prefix, &consumed2, config)? {
                        DichotomyBranch::Progression {
                            gap: shifted,
                            z,
                            modulus,
                            consumed: consumed2,
                            via_interval,
                        }
                    } else {
                        DichotomyBranch::Inconclusive {
                            reason: "repaired progression containment check failed".into(),
                        }
                    }
                }
                None => DichotomyBranch::Inconclusive {
                    reason: "offset admits no square multiple and no residue repair".into(),
                },
            }
        }
    };
    Ok(DichotomyOutcome {
        prefix,
        rest,
        branch,
    })
}

/// Re-verify an outcome along an independent path: recompute the split, then
/// re-check the divisor or rebuild the subset sums and progression membership.
pub fn verify_dichotomy(
    a: &IntegerSet,
    p: u64,
    config: &SolverConfig,
    outcome: &DichotomyOutcome,
) -> Result<()> {
    let split = prefix_split_len(a.len());
    let elems = a.elements();
    if outcome.prefix.elements() != &elems[..split] || outcome.rest.elements() != &elems[split..] {
        return Err(Error::VerificationFailed(
            "split does not match the input".into(),
        ));
    }
    match &outcome.branch {
        DichotomyBranch::Divisor { d } => {
            if *d < 2 {
                return Err(Error::VerificationFailed("trivial divisor".into()));
            }
            if outcome.rest.elements().iter().any(|&e| e % d != 0) {
                return Err(Error::VerificationFailed(
                    "claimed divisor misses an element".into(),
                ));
            }
            Ok(())
        }
        DichotomyBranch::Progression {
            gap,
            z,
            modulus,
            consumed,
            ..
        } => {
            let g = gap
                .steps
                .iter()
                .fold(0i128, |g, &s| gcd_i128(g, s.abs()))
                .max(1);
            if g != *modulus {
                return Err(Error::VerificationFailed(
                    "modulus is not the step gcd".into(),
                ));
            }
            if (p as i128 * z * z - gap.offset).rem_euclid(*modulus) != 0 {
                return Err(Error::VerificationFailed(
                    "offset has no square multiple at the claimed root".into(),
                ));
            }
            let rest_set: HashSet<u64> = outcome.rest.elements().iter().copied().collect();
            let mut seen = HashSet::new();
            for &e in consumed {
                if !rest_set.contains(&e) || !seen.insert(e) {
                    return Err(Error::VerificationFailed(
                        "consumed element not available".into(),
                    ));
                }
            }
            if !progression_sums_realizable(gap, &outcome.prefix, consumed, config)? {
                return Err(Error::VerificationFailed(
                    "progression containment failed on re-check".into(),
                ));
            }
            Ok(())
        }
        DichotomyBranch::Inconclusive { .. } => Ok(()),
    }
}

/// One pass of the iterated split, with the multiplier in force at that step.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DichotomyStep {
    pub p: u64,
    pub outcome: DichotomyOutcome,
}

fn squarefree_part(x: u64) -> u64 {
    factorize(x)
        .iter()
        .filter(|&&(_, a)| a % 2 == 1)
        .map(|&(p, _)| p)
        .product()
}

/// Iterate the split while it keeps producing divisor branches, dividing the
/// tail out and folding square factors of the divisor into the multiplier.
/// Returns the steps, the final set, and the final multiplier.
pub fn iterate_dichotomy(
    a: &IntegerSet,
    p: u64,
    config: &SolverConfig,
) -> Result<(Vec<DichotomyStep>, IntegerSet, u64)> {
    let mut cur = a.clone();
    let mut cur_p = p.max(1);
    let mut steps = Vec::new();
    while cur.len() >= 32 {
        let outcome = dichotomy(&cur, cur_p, config)?;
        let divisor = match &outcome.branch {
            DichotomyBranch::Divisor { d } => Some(*d),
            _ => None,
        };
        let rest = outcome.rest.clone();
        steps.push(DichotomyStep {
            p: cur_p,
            outcome,
        });
        let Some(d) = divisor else { break };
        let prev_max = cur.max().unwrap();
        let scaled: Vec<u64> = rest.elements().iter().map(|&e| e / d).collect();
        cur = IntegerSet::new(scaled, rest.universe() / d)?;
        let g = gcd_u64(cur_p, d);
        cur_p = (cur_p / g) * squarefree_part(d / g);
        if cur.max().unwrap() >= prev_max {
            return Err(Error::VerificationFailed(
                "descent failed to shrink the set".into(),
            ));
        }
    }
    Ok((steps, cur, cur_p))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> SolverConfig {
        SolverConfig::default()
    }

    #[test]
    fn blocks_on_interval_prefix() {
        let a = IntegerSet::interval(64);
        let (blocks, flagged) = greedy_disjoint_blocks(&a, &cfg()).unwrap();
        assert!(!flagged);
        assert_eq!(blocks.len(), 4);
        for b in &blocks {
            assert_eq!(b.elements.len(), 16);
            assert_eq!(b.l1, 3); // 40 three-fold sums, 80 >= 64
        }
        let mut all: Vec<u64> = blocks.iter().flat_map(|b| b.elements.clone()).collect();
        all.sort_unstable();
        all.dedup();
        assert_eq!(all.len(), 64);
    }

    #[test]
    fn blocks_tiny_prefix_flagged() {
        let a = IntegerSet::interval(10);
        let (blocks, flagged) = greedy_disjoint_blocks(&a, &cfg()).unwrap();
        assert!(blocks.is_empty());
        assert!(flagged);
    }

    #[test]
    fn blocks_equal_spacing_fails_density() {
        // Four-element chunks of an arithmetic set top out at 10 < 16 sums.
        let a = IntegerSet::new((1..=16).map(|k| 5 * k).collect(), 80).unwrap();
        let (blocks, flagged) = greedy_disjoint_blocks(&a, &cfg()).unwrap();
        assert!(flagged);
        assert!(blocks.is_empty());
    }

    #[test]
    fn merge_single_round_stall() {
        let block = Block {
            elements: (0..10).collect(),
            l1: 1,
        };
        let blocks = vec![block.clone(), block.clone(), block.clone(), block];
        let mut config = cfg();
        config.h = 1;
        config.c = 2.0;
        let (trace, finals) = merge_algorithm(&blocks, &[0], &config).unwrap();
        assert_eq!(trace.k, 1);
        assert_eq!(trace.b, vec![10, 19]); // {0..9}+{0..9} = {0..18}
        assert_eq!(trace.l, vec![1, 3]);
        assert_eq!(trace.m, vec![4, 1]);
        assert_eq!(trace.consumed, vec![0]);
        assert_eq!(finals.len(), 1);
        assert_eq!(finals[0], (0..19).collect::<Vec<u64>>());
        trace.check().unwrap();
    }

    #[test]
    fn merge_two_rounds_with_growth() {
        let blocks: Vec<Block> = (0..16)
            .map(|i| Block {
                elements: (1..=6).map(|x| 1000 * i + x).collect(),
                l1: 2,
            })
            .collect();
        let rest: Vec<u64> = (1..=24).map(|x| 100_000 + 7 * x).collect();
        let mut config = cfg();
        config.h = 4;
        config.c = 2.0;
        let (trace, finals) = merge_algorithm(&blocks, &rest, &config).unwrap();
        trace.check().unwrap();
        assert_eq!(trace.m[0], 16);
        assert!(trace.k >= 1);
        assert_eq!(finals.len(), trace.m[trace.k] as usize);
        for f in &finals {
            assert_eq!(f.len() as u64, trace.b[trace.k]);
        }
        assert!(trace.b[1] >= 2 * trace.b[0] - 1); // pair sums never shrink
    }

    #[test]
    fn merge_keeps_largest_power_of_four() {
        let blocks: Vec<Block> = (0..7)
            .map(|i| Block {
                elements: (1..=4).map(|x| 50 * i + x).collect(),
                l1: 1,
            })
            .collect();
        let (trace, _) = merge_algorithm(&blocks, &[3, 9, 27], &cfg()).unwrap();
        assert_eq!(trace.m[0], 4);
    }

    #[test]
    fn merge_flags_short_shift_supply() {
        let block = Block {
            elements: vec![2, 3, 5, 7],
            l1: 1,
        };
        let blocks = vec![block.clone(), block.clone(), block.clone(), block];
        let config = cfg(); // h = 8, only 2 shifts available
        let (trace, _) = merge_algorithm(&blocks, &[11, 13], &config).unwrap();
        assert!(!trace.h_deviations.is_empty());
        assert_eq!(trace.h_deviations[0].0, 1);
        assert!(trace.h_deviations[0].1 < config.h);
    }

    #[test]
    fn merge_rejects_too_few_blocks() {
        let block = Block {
            elements: vec![1, 2],
            l1: 1,
        };
        let blocks = vec![block.clone(), block.clone(), block];
        let err = merge_algorithm(&blocks, &[], &cfg()).unwrap_err();
        assert!(matches!(
            err,
            Error::BlocksExhausted { found: 3, need: 4 }
        ));
    }

    #[test]
    fn fit_rank_one_arithmetic() {
        let x = IntegerSet::new(vec![3, 5, 7, 9], 9).unwrap();
        let gap = fit_gap(&x, 1, &cfg()).unwrap().unwrap();
        assert_eq!(gap.offset, 3);
        assert_eq!(gap.steps, vec![2]);
        assert_eq!(gap.sizes, vec![3]);
    }

    #[test]
    fn fit_rank_two_grid() {
        let x = IntegerSet::new(vec![20, 21, 30, 31], 31).unwrap();
        let gap = fit_gap(&x, 2, &cfg()).unwrap().unwrap();
        assert_eq!(gap.offset, 20);
        assert_eq!(gap.steps, vec![1, 10]); // diffs 1 and 10 occur twice each
        assert_eq!(gap.sizes, vec![1, 1]);
    }

    #[test]
    fn fit_respects_volume_cap() {
        // Scattered values force every candidate volume past kappa * |X|.
        let vals: Vec<u64> = (0..40u64).map(|i| (i * i * i * 997 + i * 31) % 900_007 + 1).collect();
        let mut vals = vals;
        vals.sort_unstable();
        vals.dedup();
        let universe = *vals.last().unwrap();
        let x = IntegerSet::new(vals, universe).unwrap();
        assert!(fit_gap(&x, 2, &cfg()).unwrap().is_none());
    }

    #[test]
    fn fit_small_sets_and_bad_rank() {
        let x = IntegerSet::new(vec![5], 5).unwrap();
        assert!(fit_gap(&x, 2, &cfg()).unwrap().is_none());
        assert!(fit_gap(&x, 3, &cfg()).is_err());
    }

    #[test]
    fn repair_consumes_one_residue_class() {
        let gap = Gap::new(2, vec![5], vec![10]).unwrap();
        // 2 is not a square mod 5, so x = 3 elements of class 1 are needed.
        let avail = vec![7, 11, 16, 21];
        let (shifted, z, chosen) = repair_offset(&gap, 5, 1, &avail, &cfg())
            .unwrap()
            .unwrap();
        assert_eq!(chosen, vec![11, 16, 21]);
        assert_eq!(shifted.offset, 50); // 2 + 11 + 16 + 21
        assert_eq!(z, 0);
    }

    #[test]
    fn repair_gives_up_without_enough_elements() {
        let gap = Gap::new(2, vec![5], vec![10]).unwrap();
        let avail = vec![7, 11]; // class 1 holds a single element
        assert!(repair_offset(&gap, 5, 1, &avail, &cfg()).unwrap().is_none());
    }

    #[test]
    fn dichotomy_divisor_branch() {
        let a = IntegerSet::new((1..=32).map(|k| 6 * k).collect(), 192).unwrap();
        let outcome = dichotomy(&a, 1, &cfg()).unwrap();
        assert!(matches!(outcome.branch, DichotomyBranch::Divisor { d: 6 }));
        assert_eq!(outcome.prefix.len(), 11); // ceil(32^(2/3))
        verify_dichotomy(&a, 1, &cfg(), &outcome).unwrap();
    }

    #[test]
    fn dichotomy_interval_progression() {
        let a = IntegerSet::interval(64);
        let outcome = dichotomy(&a, 1, &cfg()).unwrap();
        match &outcome.branch {
            DichotomyBranch::Progression {
                gap,
                z,
                modulus,
                consumed,
                via_interval,
            } => {
                assert_eq!(*modulus, 1);
                assert_eq!(*z, 0);
                assert!(consumed.is_empty());
                assert!(via_interval); // four-element chunks fail the density check
                assert_eq!(gap.offset, 1);
                assert_eq!(gap.steps, vec![1]);
                assert_eq!(gap.sizes, vec![135]); // sums of {1..16}
            }
            other => panic!("expected progression, got {other:?}"),
        }
        verify_dichotomy(&a, 1, &cfg(), &outcome).unwrap();
    }

    #[test]
    fn dichotomy_rejects_small_sets() {
        let a = IntegerSet::interval(31);
        assert!(dichotomy(&a, 1, &cfg()).is_err());
        assert!(dichotomy(&IntegerSet::interval(32), 0, &cfg()).is_err());
    }

    #[test]
    fn verify_rejects_tampered_outcomes() {
        let a = IntegerSet::new((1..=32).map(|k| 6 * k).collect(), 192).unwrap();
        let mut outcome = dichotomy(&a, 1, &cfg()).unwrap();
        outcome.branch = DichotomyBranch::Divisor { d: 5 };
        assert!(verify_dichotomy(&a, 1, &cfg(), &outcome).is_err());

        let b = IntegerSet::interval(64);
        let mut outcome = dichotomy(&b, 1, &cfg()).unwrap();
        if let DichotomyBranch::Progression { gap, .. } = &mut outcome.branch {
            gap.offset += 1; // 137 is not a reachable sum
        }
        assert!(verify_dichotomy(&b, 1, &cfg(), &outcome).is_err());
    }

    #[test]
    fn iterate_divides_out_and_tracks_multiplier() {
        let a = IntegerSet::new((1..=32).map(|k| 12 * k).collect(), 384).unwrap();
        let (steps, final_set, final_p) = iterate_dichotomy(&a, 1, &cfg()).unwrap();
        assert_eq!(steps.len(), 1);
        assert!(matches!(
            steps[0].outcome.branch,
            DichotomyBranch::Divisor { d: 12 }
        ));
        // 12 = 2^2 * 3 leaves squarefree part 3.
        assert_eq!(final_p, 3);
        assert_eq!(final_set.elements(), (12..=32).collect::<Vec<u64>>());
    }

    #[test]
    fn iterate_stops_on_progression() {
        let a = IntegerSet::interval(64);
        let (steps, final_set, final_p) = iterate_dichotomy(&a, 1, &cfg()).unwrap();
        assert_eq!(steps.len(), 1);
        assert!(matches!(
            steps[0].outcome.branch,
            DichotomyBranch::Progression { .. }
        ));
        assert_eq!(final_p, 1);
        assert_eq!(final_set.len(), 64);
    }

    #[test]
    fn outcome_serializes_with_branch_tag() {
        let a = IntegerSet::new((1..=32).map(|k| 6 * k).collect(), 192).unwrap();
        let outcome = dichotomy(&a, 1, &cfg()).unwrap();
        let json = serde_json::to_string(&outcome).unwrap();
        assert!(json.contains("\"kind\":\"divisor\""));
        assert!(json.contains("\"d\":6"));
    }
}
