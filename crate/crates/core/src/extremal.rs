//! Largest square-sum-free subsets of `[n]`: exact search, scalable
//! constructions, and growth reporting.
//!
//! A set is square-sum-free when no nonempty subset sums to a perfect
//! square. `sf_exact` computes the maximum size by branch and bound,
//! `sf_exhaustive` is the independent brute-force check, and the two
//! `construct_*` routines build large explicit examples.

use serde::{Deserialize, Serialize};

use crate::arith::{gcd_u128, integer_kth_root};
use crate::error::Error;
use crate::factor::{is_prime, is_squarefree, prev_prime};
use crate::gap::Gap;
use crate::gap_squares::verify_gap_membership;
use crate::set::IntegerSet;
use crate::sumset::{first_square_with_witness, BitMask, SumBitset};
use crate::SolverConfig;
use crate::Result;
use std::collections::HashSet;

/// Budget for the in-op verification bitsets; sums stay far below this.
const VERIFY_BUDGET_BITS: u64 = 1 << 32;

/// Outcome of one square-sum-free size computation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SfRecord {
    pub n: u64,
    /// Maximum size found; a lower bound when `exact` is false.
    pub sf_value: u64,
    /// True when the search closed; false when it hit its node budget
    /// or `n` exceeded the exact-search cutoff.
    pub exact: bool,
    /// A square-sum-free subset of `[n]` of size `sf_value`.
    pub witness: IntegerSet,
    /// Size delivered by `construct_example1` (0 when n < 8).
    pub lower_construction_size: u64,
    /// Search-tree nodes visited.
    pub nodes: u64,
    /// Wall time, filled in by callers that measure; never set here.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ms: Option<u64>,
}

/// True iff no nonempty subset of `a` sums to a perfect square.
pub fn is_square_sum_free(a: &IntegerSet, budget_bits: u64) -> Result<bool> {
    Ok(first_square_with_witness(a, budget_bits)?.is_none())
}

/// Brute-force maximum over all `2^n - 1` nonempty subsets of `[n]`.
/// Returns `(size, witness)`; the witness is the first optimum in
/// ascending include-first order. Rejects `n > 25`.
pub fn sf_exhaustive(n: u64) -> Result<(u64, Vec<u64>)> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be >= 1".into()));
    }
    if n > 25 {
        return Err(Error::BudgetExceeded {
            what: "exhaustive subset enumeration",
            needed: 1u128 << n,
            limit: 1 << 25,
        });
    }
    let s_max = n * (n + 1) / 2;
    let mask = BitMask::squares(s_max);
    let dp = SumBitset::empty(s_max, false, VERIFY_BUDGET_BITS)?;
    let mut best: (u64, Vec<u64>) = (0, Vec::new());
    let mut chosen = Vec::new();
    exhaust(1, n, &dp, false, &mask, &mut chosen, &mut best);
    Ok(best)
}

fn exhaust(
    e: u64,
    n: u64,
    dp: &SumBitset,
    dead: bool,
    mask: &BitMask,
    chosen: &mut Vec<u64>,
    best: &mut (u64, Vec<u64>),
) {
    if e > n {
        if !dead && chosen.len() as u64 > best.0 {
            *best = (chosen.len() as u64, chosen.clone());
        }
        return;
    }
    chosen.push(e);
    if dead {
        // sums already hit a square, every superset stays dead
        exhaust(e + 1, n, dp, true, mask, chosen, best);
    } else {
        let mut dp2 = dp.clone();
        dp2.insert_element(e);
        let dead2 = dp2.intersects(mask);
        exhaust(e + 1, n, &dp2, dead2, mask, chosen, best);
    }
    chosen.pop();
    exhaust(e + 1, n, dp, dead, mask, chosen, best);
}

struct SfSearch {
    candidates: Vec<u64>,
    mask: BitMask,
    best: u64,
    best_set: Vec<u64>,
    nodes: u64,
    budget: u64,
    exhausted: bool,
}

impl SfSearch {
    fn run(&mut self, i: usize, dp: &SumBitset, chosen: &mut Vec<u64>) {
        self.nodes += 1;
        if self.nodes > self.budget {
            self.exhausted = true;
            return;
        }
        let remaining = (self.candidates.len() - i) as u64;
        if chosen.len() as u64 + remaining <= self.best {
            return;
        }
        if i == self.candidates.len() {
            return;
        }
        self.run(i + 1, dp, chosen);
        if self.exhausted || chosen.len() as u64 + remaining <= self.best {
            return;
        }
        let mut dp2 = dp.clone();
        dp2.insert_element(self.candidates[i]);
        if !dp2.intersects(&self.mask) {
            chosen.push(self.candidates[i]);
            if chosen.len() as u64 > self.best {
                self.best = chosen.len() as u64;
                self.best_set = chosen.clone();
            }
            self.run(i + 1, &dp2, chosen);
            chosen.pop();
        }
    }
}

/// Maximum square-sum-free subset of `[n]` by branch and bound over
/// candidates in descending order, seeded with the multiplier
/// construction. Exceeding the node budget or `config.sf_exact_max_n`
/// degrades to a certified lower bound (`exact: false`), never an error.
pub fn sf_exact(n: u64, config: &SolverConfig) -> Result<SfRecord> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be >= 1".into()));
    }
    let lower = if n >= 8 {
        construct_example1(n)?
    } else {
        IntegerSet::new(Vec::new(), n)?
    };
    let lower_size = lower.len() as u64;
    if n > config.sf_exact_max_n {
        return Ok(SfRecord {
            n,
            sf_value: lower_size,
            exact: false,
            witness: lower.clone(),
            lower_construction_size: lower_size,
            nodes: 0,
            ms: None,
        });
    }
    let s_max = n * (n + 1) / 2;
    let dp = SumBitset::empty(s_max, false, config.memory_budget_bits)?;
    let mut search = SfSearch {
        candidates: (1..=n).rev().collect(),
        mask: BitMask::squares(s_max),
        best: lower_size,
        best_set: lower.elements().to_vec(),
        nodes: 0,
        budget: config.enumeration_budget,
        exhausted: false,
    };
    search.run(0, &dp, &mut Vec::new());
    let mut elems = search.best_set;
    elems.sort_unstable();
    let witness = IntegerSet::new(elems, n)?;
    if let Some(w) = first_square_with_witness(&witness, config.memory_budget_bits)? {
        return Err(Error::VerificationFailed(format!(
            "witness for n={n} contains square {} = {}^2",
            w.value, w.z
        )));
    }
    Ok(SfRecord {
        n,
        sf_value: search.best,
        exact: !search.exhausted,
        witness,
        lower_construction_size: lower_size,
        nodes: search.nodes,
        ms: None,
    })
}

/// Multiples `{p, 2p, .., kp}` of a square-free `p ~ n^(2/3)` with
/// `k = floor(n/p)` and `k(k+1)/2 < p`: subset sums are `mp` with
/// `m < p`, and `p | z^2` forces `p^2 | z^2`, so no sum is a square.
/// The output is re-verified before returning. Requires `n >= 8`.
pub fn construct_example1(n: u64) -> Result<IntegerSet> {
    if n < 8 {
        return Err(Error::InvalidInput(format!(
            "construction needs n >= 8, got {n}"
        )));
    }
    let mut p = {
        let r = integer_kth_root((n as u128) * (n as u128), 3) as u64;
        if r * r * r >= n * n {
            r
        } else {
            r + 1
        }
    };
    loop {
        if p > n {
            return Err(Error::InvalidInput(format!(
                "no admissible multiplier for n={n}"
            )));
        }
        let k = n / p;
        if k >= 1 && k * (k + 1) / 2 < p && is_squarefree(p) {
            break;
        }
        p += 1;
    }
    let k = n / p;
    let set = IntegerSet::new((1..=k).map(|m| m * p).collect(), n)?;
    if let Some(w) = first_square_with_witness(&set, VERIFY_BUDGET_BITS)? {
        return Err(Error::VerificationFailed(format!(
            "multiplier construction for n={n} sums to {} = {}^2",
            w.value, w.z
        )));
    }
    Ok(set)
}

/// The grid `{q1*x1 + q2*x2 : 1 <= x1, x2 <= count}` inside `[universe]`,
/// together with a rank-2 progression certified to contain every
/// nonempty-subset sum. Coordinates of a sum of `j` grid points are sums
/// of `j` values from `[1, count]`, so both stay in
/// `[1, count^2 * (count+1)/2]`; that extreme is attained by the total
/// sum, which is why the progression must be this wide.
pub fn two_generator_set(q1: u64, q2: u64, universe: u64, count: u64) -> Result<(IntegerSet, Gap)> {
    if q1 < 2 || q2 < 2 || q1 == q2 {
        return Err(Error::InvalidInput(format!(
            "generators must be distinct and >= 2, got {q1}, {q2}"
        )));
    }
    if gcd_u128(q1 as u128, q2 as u128) != 1 {
        return Err(Error::InvalidInput(format!(
            "generators {q1}, {q2} share a factor"
        )));
    }
    if count < 2 || count >= q1.min(q2) {
        return Err(Error::InvalidInput(format!(
            "coordinate count {count} out of range [2, min(q1,q2))"
        )));
    }
    let max_elem = (q1 + q2) * count;
    if max_elem > universe {
        return Err(Error::InvalidInput(format!(
            "largest grid point {max_elem} exceeds universe {universe}"
        )));
    }
    let mut elems = Vec::with_capacity((count * count) as usize);
    for x1 in 1..=count {
        for x2 in 1..=count {
            elems.push(q1 * x1 + q2 * x2);
        }
    }
    let a = IntegerSet::new(elems, universe)?;
    if a.len() as u64 != count * count {
        return Err(Error::VerificationFailed(format!(
            "grid on {q1}, {q2} collapsed to {} points",
            a.len()
        )));
    }
    let coord_max = count * count * (count + 1) / 2;
    let gap = Gap::new(
        (q1 + q2) as i128,
        vec![q1 as i128, q2 as i128],
        vec![coord_max - 1, coord_max - 1],
    )?;
    let sums = SumBitset::subset_sums(&a, VERIFY_BUDGET_BITS)?;
    for v in sums.values() {
        if verify_gap_membership(&gap, v as i128).is_none() {
            return Err(Error::VerificationFailed(format!(
                "subset sum {v} escapes the containing progression"
            )));
        }
    }
    Ok((a, gap))
}

/// Square-sum-avoiding-by-structure example: an `N x N` grid on the two
/// largest primes `<= n^(3/4)` with `N ~ n^(1/4)/2`. All subset sums
/// land in a proper rank-2 progression (returned and verified), so they
/// occupy a sparse structured set rather than an interval.
pub fn construct_example2(n: u64) -> Result<(IntegerSet, Gap)> {
    let m = integer_kth_root((n as u128).pow(3), 4) as u64;
    if m < 3 {
        return Err(Error::InvalidInput(format!("n={n} too small for a prime pair")));
    }
    let q2 = (2..=m)
        .rev()
        .find(|&v| is_prime(v))
        .ok_or(Error::PrimeSearch(m))?;
    let q1 = prev_prime(q2).ok_or(Error::PrimeSearch(q2))?;
    let mut count = (integer_kth_root(n as u128, 4) as u64 / 2).max(2);
    while (q1 + q2) * count > n && count > 2 {
        count -= 1;
    }
    two_generator_set(q1, q2, n, count)
}

/// Longest arithmetic progression inside `values`.
/// Returns `(length, start, step)`; step 0 only for a single value.
pub fn longest_ap(values: &[u64]) -> (u64, u64, u64) {
    let mut v = values.to_vec();
    v.sort_unstable();
    v.dedup();
    match v.len() {
        0 => return (0, 0, 0),
        1 => return (1, v[0], 0),
        _ => {}
    }
    let present: HashSet<u64> = v.iter().copied().collect();
    let vmax = *v.last().unwrap();
    let mut best = (2u64, v[0], v[1] - v[0]);
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            let step = v[j] - v[i];
            // too coarse to beat the incumbent before running off the end
            if v[i] as u128 + step as u128 * best.0 as u128 > vmax as u128 {
                break;
            }
            if v[i] >= step && present.contains(&(v[i] - step)) {
                continue;
            }
            let mut len = 2u64;
            let mut next = v[j] + step;
            while present.contains(&next) {
                len += 1;
                next += step;
            }
            if len > best.0 {
                best = (len, v[i], step);
            }
        }
    }
    best
}

/// `sf_exact` across a list of sizes, for growth tables.
pub fn scaling_report(ns: &[u64], config: &SolverConfig) -> Result<Vec<SfRecord>> {
    ns.iter().map(|&n| sf_exact(n, config)).collect()
}
