//! Seeded generators for the randomized stress corpora.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analytic::WeylInstance;
use crate::arith::{gcd_u128, integer_kth_root, integer_sqrt};
use crate::config::SolverConfig;
use crate::congruence::CongruenceInstance;
use crate::factor::is_prime;
use crate::gap_squares::{smallest_residue_root, ApSquareInstance, Gap2SquareInstance};
use crate::set::IntegerSet;
use crate::structure::Block;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Geometrically spaced values rounded to integers, duplicates removed.
pub fn log_spaced(lo: u64, hi: u64, count: usize) -> Vec<u64> {
    assert!(lo >= 1 && hi >= lo && count >= 2);
    let llo = (lo as f64).ln();
    let lhi = (hi as f64).ln();
    let mut out: Vec<u64> = (0..count)
        .map(|i| {
            let t = i as f64 / (count - 1) as f64;
            (llo + (lhi - llo) * t).exp().round() as u64
        })
        .collect();
    out.dedup();
    out
}

/// A set of `count` distinct integers in [1, max].
pub fn random_set(seed: u64, count: usize, max: u64) -> IntegerSet {
    assert!(count as u64 <= max);
    let mut rng = rng(seed);
    let mut picked = BTreeSet::new();
    while picked.len() < count {
        picked.insert(rng.random_range(1..=max));
    }
    IntegerSet::new(picked.into_iter().collect(), max).expect("valid by construction")
}

/// Progressions built so the window construction is guaranteed to land:
/// the offset carries a residue root and L clears the solvability threshold.
pub fn guaranteed_ap_instances(seed: u64, count: usize) -> Vec<ApSquareInstance> {
    let mut rng = rng(seed);
    (0..count)
        .map(|_| {
            let p = rng.random_range(1..=7u64) as i128;
            let q = rng.random_range(1..=40u64) as i128;
            let z_seed = rng.random_range(0..=q as u64) as i128;
            let t_seed = rng.random_range(0..=200u64) as i128;
            let r = p * z_seed * z_seed + t_seed * q;
            let z0 = smallest_residue_root(p, r, q).expect("seeded root");
            let t = (r - p * z0 * z0) / q;
            let need = (p * q * (10 * t + 20 * p * q)) as u128;
            let l = integer_sqrt(need) as u64 + 1 + rng.random_range(0..50u64);
            ApSquareInstance::new(r, q, l, p).expect("valid by construction")
        })
        .collect()
}

/// Unconstrained progressions, roots not guaranteed.
pub fn random_ap_instances(seed: u64, count: usize, max_l: u64) -> Vec<ApSquareInstance> {
    let mut rng = rng(seed);
    (0..count)
        .map(|_| {
            let p = rng.random_range(1..=6u64) as i128;
            let q = rng.random_range(1..=50u64) as i128;
            let r = rng.random_range(-1000..=5000i64) as i128;
            let l = rng.random_range(0..=max_l);
            ApSquareInstance::new(r, q, l, p).expect("valid by construction")
        })
        .collect()
}

/// Rank-2 instances with coordinate volume at most `max_volume`.
pub fn random_gap2_instances(seed: u64, count: usize, max_volume: u64) -> Vec<Gap2SquareInstance> {
    assert!(max_volume >= 1);
    let mut rng = rng(seed);
    (0..count)
        .map(|_| {
            let p = rng.random_range(1..=5u64) as i128;
            let q = rng.random_range(1..=30u64) as i128;
            let q1 = rng.random_range(1..=50u64) as i128;
            let q2 = loop {
                let c = rng.random_range(1..=50u64) as i128;
                if gcd_u128(c as u128, q1 as u128) == 1 {
                    break c;
                }
            };
            let l1 = rng.random_range(0..=300u64);
            let cap = (max_volume / (l1 + 1)).max(1) - 1;
            let l2 = rng.random_range(0..=cap.min(300));
            let r = rng.random_range(-1000..=100_000i64) as i128;
            Gap2SquareInstance::new(r, q, q1, q2, l1, l2, p).expect("valid by construction")
        })
        .collect()
}

/// Congruence instances with coefficients coprime to the modulus.
pub fn random_congruence_instances(
    seed: u64,
    count: usize,
    max_q: u64,
    max_dim: usize,
) -> Vec<CongruenceInstance> {
    assert!(max_q >= 2 && max_dim >= 1);
    let mut rng = rng(seed);
    (0..count)
        .map(|_| {
            let q = rng.random_range(2..=max_q) as i128;
            let dim = rng.random_range(1..=max_dim);
            let a: Vec<i128> = (0..dim)
                .map(|_| loop {
                    let c = rng.random_range(1..q as u64) as i128;
                    if gcd_u128(c as u128, q as u128) == 1 {
                        break c;
                    }
                })
                .collect();
            let r = rng.random_range(0..q as u64) as i128;
            let p = rng.random_range(1..=10u64) as i128;
            CongruenceInstance::new(a, r, p, q).expect("valid by construction")
        })
        .collect()
}

fn random_coprime(rng: &mut ChaCha8Rng, q: u64) -> i64 {
    if q == 1 {
        return 1;
    }
    loop {
        let a = rng.random_range(1..q);
        if gcd_u128(a as u128, q as u128) == 1 {
            return a as i64;
        }
    }
}

/// Dyadic fraction with 40 fractional bits, exactly representable in f64.
fn dyadic_theta(rng: &mut ChaCha8Rng) -> f64 {
    rng.random_range(0..(1u64 << 40)) as f64 / (1u64 << 40) as f64
}

/// Instances small enough for the extended-precision oracle.
pub fn random_weyl_instances(seed: u64, count: usize) -> Vec<WeylInstance> {
    let mut rng = rng(seed);
    (0..count)
        .map(|_| {
            let q = rng.random_range(1..=64u64);
            let sign = if rng.random_bool(0.5) { 1 } else { -1 };
            let a = sign * random_coprime(&mut rng, q);
            let theta = dyadic_theta(&mut rng);
            let i_start = rng.random_range(-50..=50i64);
            let n = rng.random_range(1..=400u64);
            let m = rng.random_range(1..=(50_000 / n).clamp(1, 120));
            WeylInstance::new(a, q, theta, i_start, n, m).expect("valid by construction")
        })
        .collect()
}

/// Grid of prime and composite moduli up to 997, square dimensions chosen
/// as the smallest M = N with (M*N)^3 >= q^4.
pub fn weyl_ratio_grid(seed: u64) -> Vec<WeylInstance> {
    let mut rng = rng(seed);
    let mut moduli: Vec<u64> = Vec::new();
    let mut q = 2;
    while q <= 997 {
        moduli.push(q);
        let bump = 1 + q / 3;
        let mut next = q + bump;
        if is_prime(next) == is_prime(q) {
            next += 1;
        }
        q = next;
    }
    moduli.extend([4, 9, 16, 36, 100, 256, 360, 720, 900, 961, 991, 997]);
    moduli.sort_unstable();
    moduli.dedup();
    let mut out = Vec::new();
    for &q in &moduli {
        let mut s = integer_kth_root((q as u128).pow(2), 3) as u64;
        while (s as u128).pow(3) < (q as u128).pow(2) {
            s += 1;
        }
        let s = s.max(2);
        for _ in 0..2 {
            let a = random_coprime(&mut rng, q);
            let theta = dyadic_theta(&mut rng);
            let i_start = rng.random_range(-20..=20i64);
            out.push(WeylInstance::new(a, q, theta, i_start, s, s).expect("valid by construction"));
        }
    }
    out
}

/// Pairs of small integer slices for covering runs.
pub fn random_pair_slices(seed: u64, count: usize) -> Vec<(Vec<i64>, Vec<i64>)> {
    let mut rng = rng(seed);
    let slice = |rng: &mut ChaCha8Rng| {
        let len = rng.random_range(1..=12usize);
        let mut s = BTreeSet::new();
        while s.len() < len {
            s.insert(rng.random_range(-60..=60i64));
        }
        s.into_iter().collect::<Vec<i64>>()
    };
    (0..count).map(|_| (slice(&mut rng), slice(&mut rng))).collect()
}

/// A merge workload: blocks, shift reservoir, and the config to run it with.
pub fn random_merge_run(seed: u64) -> (Vec<Block>, Vec<u64>, SolverConfig) {
    let mut rng = rng(seed);
    let m = if rng.random_bool(0.3) { 16 } else { 4 };
    let blocks = (0..m)
        .map(|i| {
            let base = (i as u64 + 1) * rng.random_range(100..=400u64);
            let len = rng.random_range(3..=5usize);
            let mut elems = BTreeSet::new();
            while elems.len() < len {
                elems.insert(base + rng.random_range(0..=80u64));
            }
            Block {
                elements: elems.into_iter().collect(),
                l1: 1,
            }
        })
        .collect();
    let rest_len = rng.random_range(12..=24usize);
    let mut rest = BTreeSet::new();
    while rest.len() < rest_len {
        rest.insert(rng.random_range(10_000..=20_000u64));
    }
    let config = SolverConfig {
        c: 3.0,
        h: rng.random_range(1..=3),
        seed,
        ..SolverConfig::default()
    };
    (blocks, rest.into_iter().collect(), config)
}

/// A dilated set d*B whose tail has gcd exactly d, with the divisor.
pub fn scaled_divisor_set(seed: u64) -> (IntegerSet, u64) {
    let mut rng = rng(seed);
    let d = rng.random_range(2..=30u64);
    let len = rng.random_range(32..=64usize);
    let mut b = BTreeSet::new();
    // Two consecutive values at the top keep the tail gcd at 1.
    let top = 4 * len as u64;
    b.insert(top);
    b.insert(top - 1);
    while b.len() < len {
        b.insert(rng.random_range(1..top - 1));
    }
    let elems: Vec<u64> = b.into_iter().map(|x| d * x).collect();
    let universe = *elems.last().unwrap();
    (
        IntegerSet::new(elems, universe).expect("valid by construction"),
        d,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gap_squares::find_pz2_in_ap;

    #[test]
    fn log_spacing_is_monotone_and_hits_ends() {
        let ns = log_spaced(100, 100_000, 30);
        assert_eq!(ns.len(), 30);
        assert_eq!(ns[0], 100);
        assert_eq!(*ns.last().unwrap(), 100_000);
        assert!(ns.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn generators_are_deterministic() {
        assert_eq!(
            guaranteed_ap_instances(7, 5),
            guaranteed_ap_instances(7, 5)
        );
        assert_eq!(
            random_set(3, 10, 1000).elements(),
            random_set(3, 10, 1000).elements()
        );
    }

    #[test]
    fn guaranteed_instances_have_roots_and_margin() {
        for inst in guaranteed_ap_instances(1, 50) {
            let z0 = smallest_residue_root(inst.p, inst.r, inst.q).unwrap();
            let t = (inst.r - inst.p * z0 * z0) / inst.q;
            assert!(t >= 0);
            let l = inst.l as i128;
            // (L/pq)^2 >= 10t/pq + 20, cleared by construction
            assert!(l * l >= inst.p * inst.q * (10 * t + 20 * inst.p * inst.q));
            let hit = find_pz2_in_ap(&inst).unwrap().unwrap();
            assert!(hit.constructive);
        }
    }

    #[test]
    fn gap2_volumes_stay_capped() {
        for inst in random_gap2_instances(2, 100, 100_000) {
            assert!((inst.l1 + 1) * (inst.l2 + 1) <= 100_000);
        }
    }

    #[test]
    fn congruence_coefficients_are_coprime() {
        for inst in random_congruence_instances(4, 60, 5000, 4) {
            assert!(inst.a.len() <= 4);
            assert!(inst.q <= 5000);
            for &c in &inst.a {
                assert_eq!(gcd_u128(c as u128, inst.q as u128), 1);
            }
        }
    }

    #[test]
    fn weyl_ratio_grid_meets_preconditions() {
        let grid = weyl_ratio_grid(0);
        assert!(grid.len() > 40);
        for inst in &grid {
            let mn = (inst.n * inst.m_max) as u128;
            assert!(mn.pow(3) >= (inst.q as u128).pow(4));
            assert!(mn >= 3);
        }
    }

    #[test]
    fn scaled_sets_have_the_claimed_divisor() {
        for seed in 0..10 {
            let (set, d) = scaled_divisor_set(seed);
            assert!(set.len() >= 32);
            assert!(set.elements().iter().all(|e| e % d == 0));
            let g = set
                .elements()
                .iter()
                .fold(0u128, |g, &e| gcd_u128(g, e as u128));
            assert_eq!(g, d as u128);
        }
    }

    #[test]
    fn merge_runs_are_well_formed() {
        for seed in 0..5 {
            let (blocks, rest, config) = random_merge_run(seed);
            assert!(blocks.len() == 4 || blocks.len() == 16);
            assert!(config.c > 2.0);
            assert!(rest.windows(2).all(|w| w[0] < w[1]));
        }
    }
}
