//! Explicit control of stretched-exponential tails
//! `Σ_{|k| >= k0} exp(-√(x|k|))`.

use crate::error::Error;
use crate::Result;

const TERM_CUTOFF: f64 = 1e-18;
const ITERATION_BUDGET: u64 = 100_000_000;

/// Sums the two-sided tail numerically (terms below `1e-18` dropped)
/// and pairs it with the bound `(20/x)·exp(-√(x·k0)/2)`, verifying the
/// bound before returning `(sum, bound)`.
pub fn tail_bound_check(x: f64, k0: u64) -> Result<(f64, f64)> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::InvalidInput(format!("x must lie in (0,1), got {x}")));
    }
    if k0 == 0 {
        return Err(Error::InvalidInput("k0 must be positive".into()));
    }
    let mut sum = 0.0;
    let mut k = k0;
    loop {
        let term = (-(x * k as f64).sqrt()).exp();
        sum += 2.0 * term; // k and -k
        if term < TERM_CUTOFF {
            break;
        }
        k += 1;
        if k - k0 > ITERATION_BUDGET {
            return Err(Error::BudgetExceeded {
                what: "tail summation",
                needed: (k - k0) as u128,
                limit: ITERATION_BUDGET as u128,
            });
        }
    }
    let bound = 20.0 / x * (-(x * k0 as f64).sqrt() / 2.0).exp();
    if sum > bound {
        return Err(Error::VerificationFailed(format!(
            "tail {sum} exceeds bound {bound} at x={x}, k0={k0}"
        )));
    }
    Ok((sum, bound))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_with_first_tail() {
        let (sum, bound) = tail_bound_check(0.5, 1).unwrap();
        assert!(sum > 0.0);
        assert!(sum <= bound);
        assert!((bound - 40.0 * (-(0.5f64).sqrt() / 2.0).exp()).abs() < 1e-12);
    }

    #[test]
    fn far_tail_is_negligible() {
        let (sum, bound) = tail_bound_check(0.5, 1_000_000).unwrap();
        assert!(sum < 1e-200);
        assert!(sum <= bound);
    }

    #[test]
    fn dense_spot_checks() {
        for &(x, k0) in &[(0.9, 100), (0.05, 7), (0.31, 1), (0.99, 2500)] {
            let (sum, bound) = tail_bound_check(x, k0).unwrap();
            assert!(sum <= bound, "x={x}, k0={k0}");
        }
    }

    #[test]
    fn monotone_in_start() {
        let (s1, _) = tail_bound_check(0.4, 10).unwrap();
        let (s2, _) = tail_bound_check(0.4, 50).unwrap();
        assert!(s2 < s1);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(tail_bound_check(0.0, 1).is_err());
        assert!(tail_bound_check(1.0, 1).is_err());
        assert!(tail_bound_check(-0.3, 1).is_err());
        assert!(tail_bound_check(0.5, 0).is_err());
    }
}
