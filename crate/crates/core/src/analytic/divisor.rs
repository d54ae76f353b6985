//! Small divisors that certify a bound on the divisor count: from the
//! factorization of `n`, build `d | n` with `d <= n^(1/k)` whose own
//! divisor count controls `τ(n)` up to explicit factors.

use crate::error::Error;
use crate::factor::factorize;
use crate::Result;

/// Exponent `k·ln(k+1)` in the certified inequality.
pub fn beta(k: u32) -> f64 {
    k as f64 * ((k + 1) as f64).ln()
}

/// Witness divisor from a known factorization of `n`. Primes with
/// exponent `>= k` contribute `p^(a/k)` rounded down; of the `v` primes
/// with smaller exponent, the `v/k` smallest (rounded down) contribute
/// one power each. Verifies `d | n`, `d^k <= n`, and
/// `(k+1)^k · τ(d)^β(k) >= τ(n)` before returning.
pub fn divisor_witness_from_factors(n: u64, factors: &[(u64, u32)], k: u32) -> Result<u64> {
    if n == 0 || k < 3 {
        return Err(Error::InvalidInput(format!(
            "need n >= 1 and k >= 3, got n={n}, k={k}"
        )));
    }
    let mut sorted = factors.to_vec();
    sorted.sort_unstable();
    let mut d: u64 = 1;
    let mut tau_d: u64 = 1;
    let mut tau_n: u64 = 1;
    let mut low: Vec<u64> = Vec::new();
    for &(p, a) in &sorted {
        tau_n *= a as u64 + 1;
        if a >= k {
            let e = a / k;
            d *= p.pow(e);
            tau_d *= e as u64 + 1;
        } else {
            low.push(p);
        }
    }
    for &p in low.iter().take(low.len() / k as usize) {
        d *= p;
        tau_d *= 2;
    }

    if !n.is_multiple_of(d) {
        return Err(Error::VerificationFailed(format!("{d} does not divide {n}")));
    }
    if (d as u128).checked_pow(k).is_none_or(|dk| dk > n as u128) {
        return Err(Error::VerificationFailed(format!(
            "witness {d} exceeds {n}^(1/{k})"
        )));
    }
    let lhs = ((k + 1) as f64).powi(k as i32) * (tau_d as f64).powf(beta(k));
    if lhs < tau_n as f64 {
        return Err(Error::VerificationFailed(format!(
            "divisor-count bound fails for n={n}, k={k}: {lhs} < {tau_n}"
        )));
    }
    Ok(d)
}

/// Witness divisor of `n` for exponent `k`, factoring `n` first.
pub fn divisor_witness(n: u64, k: u32) -> Result<u64> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be positive".into()));
    }
    divisor_witness_from_factors(n, &factorize(n), k)
}
