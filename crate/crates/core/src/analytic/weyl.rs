//! Quadratic exponential sums `Σ_{0<|m|<=M} |Σ_{z∈I} e(a m z²/q + θ m z)|`
//! with exact phase arithmetic.
//!
//! The quadratic part of each phase is an integer residue mod `q`; the
//! linear part snaps `θ` to 60 fractional bits, after which every phase
//! is a rational with denominator `q·2^60` computed in integers. The
//! only floating-point steps are one sin/cos per term and the summation,
//! done pairwise here and sequentially in double-double precision in the
//! oracle, so the two results share no accumulation path.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::arith::gcd_u128;
use crate::error::Error;
use crate::Result;

const TERM_BUDGET: u128 = 100_000_000;
const DYADIC_BITS: u32 = 60;

/// Parameters of one sum: frequencies `0 < |m| <= m_max`, interval
/// `z ∈ [i_start, i_start + n)`, phase `a m z²/q + θ m z`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct WeylInstance {
    pub a: i64,
    pub q: u64,
    pub theta: f64,
    #[serde(rename = "I")]
    pub i_start: i64,
    #[serde(rename = "N")]
    pub n: u64,
    #[serde(rename = "M")]
    pub m_max: u64,
}

impl WeylInstance {
    pub fn new(a: i64, q: u64, theta: f64, i_start: i64, n: u64, m_max: u64) -> Result<Self> {
        if q == 0 || n == 0 || m_max == 0 {
            return Err(Error::InvalidInput(
                "q, N and M must all be positive".into(),
            ));
        }
        if !theta.is_finite() {
            return Err(Error::InvalidInput("theta must be finite".into()));
        }
        let a_red = a.rem_euclid(q as i64) as u128;
        if gcd_u128(a_red, q as u128) != 1 {
            return Err(Error::InvalidInput(format!(
                "a={a} and q={q} must be coprime"
            )));
        }
        Ok(WeylInstance {
            a,
            q,
            theta,
            i_start,
            n,
            m_max,
        })
    }

    fn check_budget(&self) -> Result<()> {
        let terms = self.m_max as u128 * self.n as u128;
        if terms > TERM_BUDGET {
            return Err(Error::BudgetExceeded {
                what: "exponential sum terms",
                needed: terms,
                limit: TERM_BUDGET,
            });
        }
        Ok(())
    }
}

/// `θ` reduced to `[0,1)` and scaled to an integer numerator over 2^60.
fn dyadic_theta(theta: f64) -> i128 {
    let frac = theta - theta.floor();
    let num = (frac * (1u64 << DYADIC_BITS) as f64).round() as i128;
    num & ((1i128 << DYADIC_BITS) - 1)
}

/// One unit-modulus term, phases assembled from integer residues.
fn phase_term(a_red: i128, q: i128, theta_num: i128, m: i128, z: i128) -> Complex64 {
    let zq = z.rem_euclid(q);
    let quad = (a_red * m.rem_euclid(q) % q * (zq * zq % q)) % q;
    let mask = (1i128 << DYADIC_BITS) - 1;
    let lin = (theta_num * ((m * z) & mask)) & mask;
    let frac = quad as f64 / q as f64 + lin as f64 / (1u64 << DYADIC_BITS) as f64;
    Complex64::from_polar(1.0, TAU * (frac - frac.floor()))
}

/// Pairwise (tree) sum of the inner terms over `z` indices `[lo, hi)`.
fn inner_pairwise(
    inst: &WeylInstance,
    a_red: i128,
    theta_num: i128,
    m: i128,
    lo: u64,
    hi: u64,
) -> Complex64 {
    if hi - lo <= 32 {
        let mut acc = Complex64::new(0.0, 0.0);
        for idx in lo..hi {
            let z = inst.i_start as i128 + idx as i128;
            acc += phase_term(a_red, inst.q as i128, theta_num, m, z);
        }
        return acc;
    }
    let mid = lo + (hi - lo) / 2;
    inner_pairwise(inst, a_red, theta_num, m, lo, mid)
        + inner_pairwise(inst, a_red, theta_num, m, mid, hi)
}

/// Pairwise sum of `|inner(m)|` over `m ∈ [lo, hi]`.
fn outer_pairwise(inst: &WeylInstance, a_red: i128, theta_num: i128, lo: u64, hi: u64) -> f64 {
    if hi - lo <= 8 {
        let mut acc = 0.0;
        for m in lo..=hi {
            acc += inner_pairwise(inst, a_red, theta_num, m as i128, 0, inst.n).norm();
        }
        return acc;
    }
    let mid = lo + (hi - lo) / 2;
    outer_pairwise(inst, a_red, theta_num, lo, mid)
        + outer_pairwise(inst, a_red, theta_num, mid + 1, hi)
}

/// The full sum. Negative frequencies contribute conjugate inner sums,
/// so the result is `2 Σ_{m=1..M} |inner(m)|`; always in `[0, 2MN]`.
pub fn weyl_sum(inst: &WeylInstance) -> Result<f64> {
    inst.check_budget()?;
    let a_red = (inst.a.rem_euclid(inst.q as i64)) as i128;
    let theta_num = dyadic_theta(inst.theta);
    Ok(2.0 * outer_pairwise(inst, a_red, theta_num, 1, inst.m_max))
}

#[derive(Clone, Copy)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl Dd {
    const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

    fn add(self, x: f64) -> Dd {
        let s = self.hi + x;
        let bb = s - self.hi;
        let err = (self.hi - (s - bb)) + (x - bb);
        let lo = self.lo + err;
        let hi = s + lo;
        Dd {
            hi,
            lo: lo - (hi - s),
        }
    }

    fn value(self) -> f64 {
        self.hi + self.lo
    }
}

/// Independent re-summation: every `0 < |m| <= M` summed explicitly, in
/// sequential order, with double-double accumulators.
pub fn weyl_sum_oracle(inst: &WeylInstance) -> Result<f64> {
    inst.check_budget()?;
    let a_red = (inst.a.rem_euclid(inst.q as i64)) as i128;
    let theta_num = dyadic_theta(inst.theta);
    let mut total = Dd::ZERO;
    for m_abs in 1..=inst.m_max {
        for &m in &[-(m_abs as i128), m_abs as i128] {
            let mut re = Dd::ZERO;
            let mut im = Dd::ZERO;
            for idx in 0..inst.n {
                let z = inst.i_start as i128 + idx as i128;
                let term = phase_term(a_red, inst.q as i128, theta_num, m, z);
                re = re.add(term.re);
                im = im.add(term.im);
            }
            total = total.add(re.value().hypot(im.value()));
        }
    }
    Ok(total.value())
}

/// `weyl_sum / ((M√N + MN/√q) (ln MN)^alpha)`. Requires `MN >= 3` and
/// `(MN)^3 >= q^4`, the regime the bound is audited in.
pub fn weyl_bound_ratio(inst: &WeylInstance, alpha: f64) -> Result<f64> {
    let mn = inst.m_max as u128 * inst.n as u128;
    if mn < 3 {
        return Err(Error::InvalidInput(format!(
            "MN = {mn} leaves log MN too small"
        )));
    }
    if mn.checked_pow(3).is_none_or(|c| c < (inst.q as u128).pow(4)) {
        return Err(Error::InvalidInput(format!(
            "need MN >= q^(4/3), got MN = {mn}, q = {}",
            inst.q
        )));
    }
    let s = weyl_sum(inst)?;
    let m = inst.m_max as f64;
    let n = inst.n as f64;
    let q = inst.q as f64;
    let denom = (m * n.sqrt() + m * n / q.sqrt()) * (m * n).ln().powf(alpha);
    Ok(s / denom)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_term_instances() {
        // one z, any phase: both frequencies contribute modulus 1
        for theta in [0.0, 0.25, 0.7] {
            let inst = WeylInstance::new(1, 2, theta, 0, 1, 1).unwrap();
            assert_eq!(weyl_sum(&inst).unwrap(), 2.0);
        }
    }

    #[test]
    fn integral_phases_sum_to_2mn() {
        let inst = WeylInstance::new(1, 1, 0.0, -3, 5, 3).unwrap();
        let s = weyl_sum(&inst).unwrap();
        assert!((s - 30.0).abs() < 1e-9); // 2*3*5
        let o = weyl_sum_oracle(&inst).unwrap();
        assert!((o - 30.0).abs() < 1e-9);
    }

    #[test]
    fn oracle_agreement_small_instances() {
        let cases = [
            (3, 7, 0.381, -5i64, 40u64, 11u64),
            (2, 5, 0.9, 0, 17, 29),
            (-4, 9, 0.123456, 100, 60, 8),
            (1, 64, 0.618, -30, 64, 16),
        ];
        for (a, q, theta, i0, n, m) in cases {
            let inst = WeylInstance::new(a, q, theta, i0, n, m).unwrap();
            let s = weyl_sum(&inst).unwrap();
            let o = weyl_sum_oracle(&inst).unwrap();
            assert!(
                (s - o).abs() <= 1e-9 * o.max(1.0),
                "a={a} q={q}: {s} vs {o}"
            );
            assert!(s >= 0.0 && s <= 2.0 * m as f64 * n as f64);
        }
    }

    #[test]
    fn shift_invariances_are_exact() {
        // 40-bit theta survives +1 without rounding
        let theta = 771_234.0 / (1u64 << 40) as f64 + 0.5;
        let base = WeylInstance::new(5, 13, theta, -7, 30, 9).unwrap();
        let s0 = weyl_sum(&base).unwrap();
        let shifted_a = WeylInstance::new(5 + 13, 13, theta, -7, 30, 9).unwrap();
        assert_eq!(s0, weyl_sum(&shifted_a).unwrap());
        let shifted_theta = WeylInstance::new(5, 13, theta + 1.0, -7, 30, 9).unwrap();
        assert_eq!(s0, weyl_sum(&shifted_theta).unwrap());
    }

    #[test]
    fn rejects_bad_instances() {
        assert!(WeylInstance::new(2, 4, 0.0, 0, 1, 1).is_err()); // gcd 2
        assert!(WeylInstance::new(1, 0, 0.0, 0, 1, 1).is_err());
        assert!(WeylInstance::new(1, 2, f64::NAN, 0, 1, 1).is_err());
        let big = WeylInstance::new(1, 3, 0.1, 0, 200_000, 1_000).unwrap();
        assert!(matches!(
            weyl_sum(&big),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn ratio_trivial_and_preconditions() {
        let inst = WeylInstance::new(1, 1, 0.0, 0, 25, 4).unwrap();
        let ratio = weyl_bound_ratio(&inst, 6.0).unwrap();
        assert!(ratio > 0.0 && ratio < 2.0, "ratio {ratio}");
        let tiny = WeylInstance::new(1, 2, 0.0, 0, 1, 1).unwrap();
        assert!(weyl_bound_ratio(&tiny, 6.0).is_err()); // MN = 1
        let shallow = WeylInstance::new(1, 101, 0.3, 0, 10, 40).unwrap();
        assert!(weyl_bound_ratio(&shallow, 6.0).is_err()); // 400^3 < 101^4
    }

    #[test]
    fn instance_serialization_names() {
        let inst = WeylInstance::new(3, 7, 0.25, -2, 10, 4).unwrap();
        let json = serde_json::to_string(&inst).unwrap();
        assert_eq!(
            json,
            r#"{"a":3,"q":7,"theta":0.25,"I":-2,"N":10,"M":4}"#
        );
        let back: WeylInstance = serde_json::from_str(&json).unwrap();
        assert_eq!(back.q, 7);
    }
}
