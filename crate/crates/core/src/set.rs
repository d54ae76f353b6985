//! Finite sets of distinct positive integers inside a declared universe.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::Result;

/// A sorted set of distinct positive integers, all at most `universe`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntegerSet {
    elements: Vec<u64>,
    universe: u64,
}

impl IntegerSet {
    /// Build a set from arbitrary element order, validating the invariants.
    pub fn new(mut elements: Vec<u64>, universe: u64) -> Result<Self> {
        elements.sort_unstable();
        if elements.first().is_some_and(|&e| e == 0) {
            return Err(Error::InvalidInput("elements must be positive".into()));
        }
        if elements.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidInput("elements must be distinct".into()));
        }
        if elements.last().is_some_and(|&e| e > universe) {
            return Err(Error::InvalidInput(format!(
                "element {} exceeds universe {}",
                elements.last().unwrap(),
                universe
            )));
        }
        Ok(IntegerSet { elements, universe })
    }

    /// The set {1, 2, .., n}.
    pub fn interval(n: u64) -> Self {
        IntegerSet {
            elements: (1..=n).collect(),
            universe: n,
        }
    }

    pub fn elements(&self) -> &[u64] {
        &self.elements
    }

    pub fn universe(&self) -> u64 {
        self.universe
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn max(&self) -> Option<u64> {
        self.elements.last().copied()
    }

    pub fn contains(&self, v: u64) -> bool {
        self.elements.binary_search(&v).is_ok()
    }

    /// Total of all elements, exact in u128.
    pub fn sum(&self) -> u128 {
        self.elements.iter().map(|&e| e as u128).sum()
    }
}
