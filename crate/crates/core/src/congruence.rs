//! Bounded solutions of `a1*x1 + .. + ad*xd + r = p*z^2 (mod q)`.
//!
//! The solver decomposes `q` into pairwise coprime factors, each paired
//! with a coefficient coprime to it, then folds in one variable at a time:
//! each step reduces to a single linear congruence in `x` parametrized by
//! the new square root `z2 = z1 + z*k`, scanned over `z` ascending. Every
//! `xi` stays within the bound `(p*q)^(1/2) * max(ln q, 1)^D`.

use serde::{Deserialize, Serialize};

use crate::arith::{gcd_i128, mod_inverse};
use crate::error::Error;
use crate::factor::factorize;
use crate::Result;

/// One congruence problem: find `x >= 0` (componentwise bounded) and `z`
/// with `a1*x1 + .. + ad*xd + r = p*z^2 (mod q)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CongruenceInstance {
    pub a: Vec<i128>,
    pub r: i128,
    pub p: i128,
    pub q: i128,
}

impl CongruenceInstance {
    pub fn new(a: Vec<i128>, r: i128, p: i128, q: i128) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::InvalidInput("need at least one coefficient".into()));
        }
        if p < 1 || q < 1 {
            return Err(Error::InvalidInput("p and q must be positive".into()));
        }
        let mut g = q;
        for &ai in &a {
            g = gcd_i128(g, ai);
        }
        if g != 1 {
            return Err(Error::InvalidInput(format!(
                "gcd of coefficients and modulus is {g}, must be 1"
            )));
        }
        Ok(CongruenceInstance { a, r, p, q })
    }

    /// True iff `(x, z)` satisfies the congruence with all `xi` in `[0, bound]`.
    pub fn check(&self, x: &[i128], z: i128, bound: i128) -> bool {
        if x.len() != self.a.len() || x.iter().any(|&xi| xi < 0 || xi > bound) {
            return false;
        }
        let mut lhs = self.r;
        for (&ai, &xi) in self.a.iter().zip(x) {
            lhs += ai * xi;
        }
        (lhs - self.p * z * z).rem_euclid(self.q) == 0
    }
}

/// A solution together with the bound it was required to satisfy.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CongruenceSolution {
    pub x: Vec<i128>,
    pub z: i128,
    pub bound_used: i128,
    pub verified: bool,
}

/// Split `q` into pairwise coprime factors `q_j > 1` (product `q`), pairing
/// each with the first listed coefficient coprime to it.
///
/// Each prime power of `q` is assigned to the first `a` coprime to it;
/// factors assigned to the same `a` are multiplied together. Pairs are
/// ordered by the smallest prime inside each factor. `q = 1` yields the
/// single pair `(1, a[0])`.
pub fn decompose_coprime(a: &[i128], q: i128) -> Result<Vec<(i128, i128)>> {
    if q < 1 {
        return Err(Error::InvalidInput("modulus must be positive".into()));
    }
    if a.is_empty() {
        return Err(Error::InvalidInput("need at least one coefficient".into()));
    }
    if q == 1 {
        return Ok(vec![(1, a[0])]);
    }
    let mut groups: Vec<(i128, i128)> = Vec::new(); // (assigned a, factor product)
    let mut order: Vec<usize> = Vec::new(); // group index by first prime seen
    for (prime, exp) in factorize(q as u64) {
        let pe = (prime as i128).pow(exp);
        let chosen = a
            .iter()
            .copied()
            .find(|&ai| ai.rem_euclid(prime as i128) != 0)
            .ok_or_else(|| {
                Error::InvalidInput(format!("no coefficient coprime to prime {prime}"))
            })?;
        match groups.iter_mut().find(|(owner, _)| *owner == chosen) {
            Some((_, product)) => *product *= pe,
            None => {
                groups.push((chosen, pe));
                order.push(groups.len() - 1);
            }
        }
    }
    let pairs: Vec<(i128, i128)> = order
        .into_iter()
        .map(|i| (groups[i].1, groups[i].0))
        .collect();
    debug_assert_eq!(pairs.iter().map(|&(qj, _)| qj).product::<i128>(), q);
    for (i, &(qi, ai)) in pairs.iter().enumerate() {
        debug_assert_eq!(gcd_i128(qi, ai), 1);
        for &(qj, _) in &pairs[i + 1..] {
            debug_assert_eq!(gcd_i128(qi, qj), 1);
        }
    }
    Ok(pairs)
}

/// Solve `g*x + p*z1^2 + t*k = p*z2^2 (mod h)` for `x` in `[0, bound]`,
/// where `k = gcd(g, h)` and `z2 = z1 + z*k` for the smallest workable
/// `z >= 0`. Returns `(x, z2)`.
pub fn solve_one_var(
    g: i128,
    h: i128,
    p: i128,
    t: i128,
    z1: i128,
    bound: i128,
) -> Result<(i128, i128)> {
    if h < 1 {
        return Err(Error::InvalidInput("modulus must be positive".into()));
    }
    if bound < 0 {
        return Err(Error::InvalidInput("bound must be nonnegative".into()));
    }
    let k = if g == 0 { h } else { gcd_i128(g, h) };
    let a = g / k;
    let q = h / k;
    let a_inv = mod_inverse(a, q)
        .ok_or_else(|| Error::InvalidInput(format!("{a} not invertible mod {q}")))?;
    for z in 0..q.max(1) {
        // reduced congruence: a*x = p*k*z^2 + 2*p*z1*z - t (mod q)
        let rhs = p * k * z * z + 2 * p * z1 * z - t;
        let x = (a_inv * rhs.rem_euclid(q.max(1))).rem_euclid(q.max(1));
        if x <= bound {
            let z2 = z1 + z * k;
            debug_assert_eq!(
                (g * x + p * z1 * z1 + t * k - p * z2 * z2).rem_euclid(h),
                0,
                "one-variable step produced a non-solution"
            );
            return Ok((x, z2));
        }
    }
    Err(Error::NoSolutionInBound { bound, modulus: q })
}

/// The solution bound `(p*q)^(1/2) * max(ln q, 1)^D`, floored.
pub fn solution_bound(p: i128, q: i128, exp_d: u32) -> i128 {
    let log_factor = (q as f64).ln().max(1.0).powi(exp_d as i32);
    (((p * q) as f64).sqrt() * log_factor).floor() as i128
}

/// Solve the full instance with every `xi` in `[0, (p*q)^(1/2) * max(ln q, 1)^D]`.
///
/// First looks for a bare root (`x = 0`, smallest `z` in `[0, q)`); failing
/// that, folds variables in one at a time along the coprime decomposition.
pub fn solve_quadratic_congruence(
    inst: &CongruenceInstance,
    exp_d: u32,
) -> Result<CongruenceSolution> {
    let d = inst.a.len();
    let bound = solution_bound(inst.p, inst.q, exp_d);
    // zero case: r is already a residue p*z^2
    for z in 0..inst.q {
        if (inst.r - inst.p * z * z).rem_euclid(inst.q) == 0 {
            let x = vec![0; d];
            debug_assert!(inst.check(&x, z, bound));
            return Ok(CongruenceSolution {
                x,
                z,
                bound_used: bound,
                verified: true,
            });
        }
    }

    let pairs = decompose_coprime(&inst.a, inst.q)?;
    let mut x = vec![0i128; d];
    let mut value = inst.r; // running Σ a_i x_i + r, exact
    let mut z_cur = 0i128;
    let mut modulus = 1i128;
    for &(qj, aj) in &pairs {
        let idx = inst
            .a
            .iter()
            .position(|&ai| ai == aj)
            .expect("decomposition returns listed coefficients");
        let new_modulus = modulus * qj;
        let k = if aj == 0 {
            new_modulus
        } else {
            gcd_i128(aj, new_modulus)
        };
        // value = p*z_cur^2 + T*modulus exactly; k divides modulus because
        // gcd(k, qj) = 1, so the t-parameter below is an exact integer.
        let t_total = value - inst.p * z_cur * z_cur;
        debug_assert_eq!(t_total.rem_euclid(modulus), 0);
        let t_param = t_total / modulus * (modulus / k);
        let (xj, z_next) = solve_one_var(aj, new_modulus, inst.p, t_param, z_cur, bound)?;
        x[idx] = xj;
        value += aj * xj;
        z_cur = z_next;
        modulus = new_modulus;
        debug_assert_eq!((value - inst.p * z_cur * z_cur).rem_euclid(modulus), 0);
    }
    if !inst.check(&x, z_cur, bound) {
        return Err(Error::VerificationFailed(
            "fold-in produced a non-solution".into(),
        ));
    }
    Ok(CongruenceSolution {
        x,
        z: z_cur,
        bound_used: bound,
        verified: true,
    })
}

/// Exhaustive scan over `x` tuples in `[0, box_bound]^d` (lexicographic,
/// last coordinate fastest) with `z` in `[0, q)` ascending inside each.
/// The first solution is lexicographically smallest in `x`, then smallest
/// in `z`.
pub fn brute_force_congruence(
    inst: &CongruenceInstance,
    box_bound: i128,
) -> Result<Option<(Vec<i128>, i128)>> {
    let d = inst.a.len();
    let tuples = (box_bound as u128 + 1).checked_pow(d as u32);
    let work = tuples.and_then(|t| t.checked_mul(inst.q as u128));
    match work {
        Some(w) if w <= 100_000_000 => {}
        _ => {
            return Err(Error::BudgetExceeded {
                what: "congruence scan",
                needed: work.unwrap_or(u128::MAX),
                limit: 100_000_000,
            })
        }
    }
    // smallest z for each residue p*z^2 mod q
    let mut root_of = vec![None; inst.q as usize];
    for z in 0..inst.q {
        let res = (inst.p * z * z).rem_euclid(inst.q) as usize;
        if root_of[res].is_none() {
            root_of[res] = Some(z);
        }
    }
    let mut x = vec![0i128; d];
    loop {
        let lhs: i128 = inst.a.iter().zip(&x).map(|(&a, &xi)| a * xi).sum();
        if let Some(z) = root_of[(lhs + inst.r).rem_euclid(inst.q) as usize] {
            return Ok(Some((x, z)));
        }
        let mut advanced = false;
        let mut i = d;
        while i > 0 {
            i -= 1;
            if x[i] < box_bound {
                x[i] += 1;
                for xi in &mut x[i + 1..] {
                    *xi = 0;
                }
                advanced = true;
                break;
            }
        }
        if !advanced {
            return Ok(None);
        }
    }
}
