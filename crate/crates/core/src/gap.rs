//! Generalized arithmetic progressions of bounded rank.

use serde::{Deserialize, Serialize};

use crate::arith::{add_i128, mul_i128};
use crate::error::Error;
use crate::Result;

/// The progression `{offset + x1*steps[0] + .. + xd*steps[d-1] : 0 <= xi <= sizes[i]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gap {
    pub offset: i128,
    pub steps: Vec<i128>,
    pub sizes: Vec<u64>,
}

impl Gap {
    pub fn new(offset: i128, steps: Vec<i128>, sizes: Vec<u64>) -> Result<Self> {
        if steps.len() != sizes.len() {
            return Err(Error::InvalidInput("steps and sizes length mismatch".into()));
        }
        if steps.contains(&0) {
            return Err(Error::InvalidInput("steps must be nonzero".into()));
        }
        Ok(Gap { offset, steps, sizes })
    }

    pub fn rank(&self) -> usize {
        self.steps.len()
    }

    /// Number of coordinate tuples, Π (sizes[i] + 1).
    pub fn volume(&self) -> u128 {
        self.sizes.iter().map(|&l| l as u128 + 1).product()
    }

    pub fn min_element(&self) -> Result<i128> {
        let mut v = self.offset;
        for (&a, &l) in self.steps.iter().zip(&self.sizes) {
            if a < 0 {
                v = add_i128(v, mul_i128(a, l as i128)?)?;
            }
        }
        Ok(v)
    }

    pub fn max_element(&self) -> Result<i128> {
        let mut v = self.offset;
        for (&a, &l) in self.steps.iter().zip(&self.sizes) {
            if a > 0 {
                v = add_i128(v, mul_i128(a, l as i128)?)?;
            }
        }
        Ok(v)
    }

    /// Enumerate all element values (with multiplicity, one per coordinate
    /// tuple), bounded by `budget` tuples.
    pub fn elements(&self, budget: u64) -> Result<Vec<i128>> {
        let vol = self.volume();
        if vol > budget as u128 {
            return Err(Error::BudgetExceeded {
                what: "progression enumeration",
                needed: vol,
                limit: budget as u128,
            });
        }
        let mut out = Vec::with_capacity(vol as usize);
        let mut coords = vec![0u64; self.rank()];
        loop {
            let mut v = self.offset;
            for (i, &x) in coords.iter().enumerate() {
                v = add_i128(v, mul_i128(self.steps[i], x as i128)?)?;
            }
            out.push(v);
            // odometer increment
            let mut i = 0;
            loop {
                if i == self.rank() {
                    return Ok(out);
                }
                if coords[i] < self.sizes[i] {
                    coords[i] += 1;
                    break;
                }
                coords[i] = 0;
                i += 1;
            }
        }
    }

    /// True iff all coordinate sums `Σ xi*steps[i]` are pairwise distinct.
    pub fn is_proper(&self, budget: u64) -> Result<bool> {
        let centered = Gap {
            offset: 0,
            steps: self.steps.clone(),
            sizes: self.sizes.clone(),
        };
        let mut vals = centered.elements(budget)?;
        let n = vals.len();
        vals.sort_unstable();
        vals.dedup();
        Ok(vals.len() == n)
    }

    /// Rewrite with positive steps only, preserving the element set.
    ///
    /// Coordinates with a negative step are reflected (`xi -> Li - xi`),
    /// which folds `steps[i] * sizes[i]` into the offset. Requires every
    /// element of the progression to be positive.
    pub fn positive_form(&self) -> Result<Gap> {
        if self.min_element()? < 1 {
            return Err(Error::InvalidInput(
                "progression contains non-positive elements".into(),
            ));
        }
        let mut offset = self.offset;
        let mut steps = Vec::with_capacity(self.rank());
        for (&a, &l) in self.steps.iter().zip(&self.sizes) {
            if a < 0 {
                offset = add_i128(offset, mul_i128(a, l as i128)?)?;
                steps.push(-a);
            } else {
                steps.push(a);
            }
        }
        Ok(Gap {
            offset,
            steps,
            sizes: self.sizes.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted_elements(q: &Gap) -> Vec<i128> {
        let mut v = q.elements(1 << 20).unwrap();
        v.sort_unstable();
        v.dedup();
        v
    }

    #[test]
    fn enumeration_rank2() {
        let q = Gap::new(1, vec![2, 10], vec![2, 1]).unwrap();
        assert_eq!(sorted_elements(&q), vec![1, 3, 5, 11, 13, 15]);
        assert_eq!(q.volume(), 6);
        assert_eq!(q.min_element().unwrap(), 1);
        assert_eq!(q.max_element().unwrap(), 15);
    }

    #[test]
    fn properness() {
        // {x1 + 3*x2 : 0..=1, 0..=1} has sums 0,1,3,4: proper
        let q = Gap::new(0, vec![1, 3], vec![1, 1]).unwrap();
        assert!(q.is_proper(1000).unwrap());
        // {x1 + 2*x2 : 0..=2, 0..=1} collides: 2 = 2
        let q = Gap::new(0, vec![1, 2], vec![2, 1]).unwrap();
        assert!(!q.is_proper(1000).unwrap());
    }

    #[test]
    fn properness_budget() {
        let q = Gap::new(0, vec![1, 1000], vec![999, 999]).unwrap();
        assert!(matches!(
            q.is_proper(1000),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn positive_form_reflects_negative_steps() {
        // {5 - 2x : 0 <= x <= 2} = {1, 3, 5}
        let q = Gap::new(5, vec![-2], vec![2]).unwrap();
        let p = q.positive_form().unwrap();
        assert_eq!(p.offset, 1);
        assert_eq!(p.steps, vec![2]);
        assert_eq!(p.sizes, vec![2]);
        assert_eq!(sorted_elements(&p), sorted_elements(&q));
    }

    #[test]
    fn positive_form_demands_positive_elements() {
        let q = Gap::new(5, vec![-2], vec![3]).unwrap(); // contains -1
        assert!(q.positive_form().is_err());
    }

    #[test]
    fn positive_form_mixed_signs_preserves_elements() {
        let q = Gap::new(40, vec![-3, 7, -1], vec![4, 2, 5]).unwrap();
        let p = q.positive_form().unwrap();
        assert!(p.steps.iter().all(|&a| a > 0));
        assert_eq!(sorted_elements(&p), sorted_elements(&q));
    }

    #[test]
    fn degenerate_rank_zero() {
        let q = Gap::new(7, vec![], vec![]).unwrap();
        assert_eq!(q.elements(10).unwrap(), vec![7]);
        assert!(q.is_proper(10).unwrap());
        assert_eq!(q.volume(), 1);
    }
}
