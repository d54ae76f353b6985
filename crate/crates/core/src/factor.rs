//! Factorization utilities: smallest-prime-factor sieve for bulk work,
//! Miller-Rabin plus Pollard rho for individual numbers.

use crate::arith::gcd_u128;

/// Smallest-prime-factor table for 0..=limit. `spf[0] = spf[1] = 0`.
pub struct SpfSieve {
    spf: Vec<u32>,
}

impl SpfSieve {
    pub fn new(limit: usize) -> Self {
        let mut spf = vec![0u32; limit + 1];
        for i in 2..=limit {
            if spf[i] == 0 {
                let mut j = i;
                while j <= limit {
                    if spf[j] == 0 {
                        spf[j] = i as u32;
                    }
                    j += i;
                }
            }
        }
        SpfSieve { spf }
    }

    /// Prime factorization as (prime, exponent) pairs, primes ascending.
    pub fn factorize(&self, mut n: u64) -> Vec<(u64, u32)> {
        assert!(n >= 1 && (n as usize) < self.spf.len());
        let mut out: Vec<(u64, u32)> = Vec::new();
        while n > 1 {
            let p = self.spf[n as usize] as u64;
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        out
    }

    /// Number of divisors of n.
    pub fn tau(&self, n: u64) -> u64 {
        self.factorize(n).iter().map(|&(_, e)| e as u64 + 1).product()
    }
}

/// Deterministic Miller-Rabin for u64.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    // These witnesses decide primality for all n < 2^64.
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod_u64(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 0..s - 1 {
            x = mul_mod_u64(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn mul_mod_u64(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod_u64(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1u64 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod_u64(acc, b, m);
        }
        b = mul_mod_u64(b, b, m);
        e >>= 1;
    }
    acc
}

fn pollard_rho(n: u64) -> u64 {
    if n.is_multiple_of(2) {
        return 2;
    }
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mul_mod_u64(x, x, n) + c) % n;
        let (mut x, mut y, mut d) = (2u64, 2u64, 1u64);
        while d == 1 {
            x = f(x);
            y = f(f(y));
            d = gcd_u128(x.abs_diff(y) as u128, n as u128) as u64;
        }
        if d != n {
            return d;
        }
        c += 1;
    }
}

/// Prime factorization of an individual u64, primes ascending.
pub fn factorize(n: u64) -> Vec<(u64, u32)> {
    assert!(n >= 1);
    let mut n = n;
    let mut primes: Vec<u64> = Vec::new();
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31] {
        while n.is_multiple_of(p) {
            primes.push(p);
            n /= p;
        }
    }
    let mut stack = vec![n];
    while let Some(m) = stack.pop() {
        if m == 1 {
            continue;
        }
        if is_prime(m) {
            primes.push(m);
            continue;
        }
        let d = pollard_rho(m);
        stack.push(d);
        stack.push(m / d);
    }
    primes.sort_unstable();
    let mut out: Vec<(u64, u32)> = Vec::new();
    for p in primes {
        match out.last_mut() {
            Some((q, e)) if *q == p => *e += 1,
            _ => out.push((p, 1)),
        }
    }
    out
}

/// Number of divisors of n.
pub fn tau(n: u64) -> u64 {
    factorize(n).iter().map(|&(_, e)| e as u64 + 1).product()
}

/// True iff no prime divides n twice.
pub fn is_squarefree(n: u64) -> bool {
    n >= 1 && factorize(n).iter().all(|&(_, e)| e == 1)
}

/// Largest prime strictly below `n`, if any.
pub fn prev_prime(n: u64) -> Option<u64> {
    let mut m = n.checked_sub(1)?;
    while m >= 2 {
        if is_prime(m) {
            return Some(m);
        }
        m -= 1;
    }
    None
}
