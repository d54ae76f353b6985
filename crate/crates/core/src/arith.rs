//! Integer arithmetic primitives used throughout the crate.
//!
//! All sums, progression elements and congruences are computed in signed
//! 128-bit arithmetic with explicit overflow checks; nothing here wraps.

use crate::error::Error;
use crate::Result;

/// Floor of the square root: the unique `s` with `s*s <= m < (s+1)*(s+1)`.
pub fn integer_sqrt(m: u128) -> u128 {
    if m < 2 {
        return m;
    }
    // Newton iteration seeded from the float estimate; converges in a few
    // steps and the final clamp loop repairs any rounding drift.
    let mut x = (m as f64).sqrt() as u128;
    x += 2;
    loop {
        let next = (x + m / x) / 2;
        if next >= x {
            break;
        }
        x = next;
    }
    while x * x > m {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= m {
        x += 1;
    }
    x
}

/// True iff `m` is a perfect square.
pub fn is_perfect_square(m: u128) -> bool {
    let s = integer_sqrt(m);
    s * s == m
}

/// Floor of the k-th root of `m` (k >= 1).
pub fn integer_kth_root(m: u128, k: u32) -> u128 {
    if k == 1 || m < 2 {
        return m;
    }
    let mut x = (m as f64).powf(1.0 / k as f64) as u128;
    x += 2;
    while x > 0 && x.checked_pow(k).map(|p| p > m).unwrap_or(true) {
        x -= 1;
    }
    while (x + 1).checked_pow(k).map(|p| p <= m).unwrap_or(false) {
        x += 1;
    }
    x
}

/// Checked `a + b` on i128.
pub fn add_i128(a: i128, b: i128) -> Result<i128> {
    a.checked_add(b).ok_or(Error::Overflow("add"))
}

/// Checked `a * b` on i128.
pub fn mul_i128(a: i128, b: i128) -> Result<i128> {
    a.checked_mul(b).ok_or(Error::Overflow("mul"))
}

/// Greatest common divisor of two nonnegative integers.
pub fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Greatest common divisor on i128 absolute values.
pub fn gcd_i128(a: i128, b: i128) -> i128 {
    gcd_u128(a.unsigned_abs(), b.unsigned_abs()) as i128
}

/// Extended gcd: returns `(g, s, t)` with `s*a + t*b = g = gcd(a, b)`, `g >= 0`.
pub fn extended_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    let (mut r0, mut r1) = (a, b);
    let (mut s0, mut s1) = (1i128, 0i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 < 0 {
        (-r0, -s0, -t0)
    } else {
        (r0, s0, t0)
    }
}

/// Inverse of `a` modulo `m` (`m >= 1`), when `gcd(a, m) = 1`.
pub fn mod_inverse(a: i128, m: i128) -> Option<i128> {
    assert!(m >= 1);
    if m == 1 {
        return Some(0);
    }
    let (g, s, _) = extended_gcd(a.rem_euclid(m), m);
    if g != 1 {
        return None;
    }
    Some(s.rem_euclid(m))
}

/// `base^exp mod m` with `m >= 1`.
pub fn mod_pow(base: i128, mut exp: u64, m: i128) -> i128 {
    assert!(m >= 1);
    if m == 1 {
        return 0;
    }
    let m = m as u128;
    let mut b = (base.rem_euclid(m as i128)) as u128;
    let mut acc: u128 = 1;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        exp >>= 1;
    }
    acc as i128
}
