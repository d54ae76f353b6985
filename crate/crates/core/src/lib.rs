//! Tools for locating perfect squares (and more generally values p*z^2)
//! inside the set of subset sums of a finite set of positive integers.
//!
//! The crate is organized around a handful of cooperating subsystems:
//!
//! * [`sumset`]: word-parallel subset-sum bitsets, sums with a fixed number
//!   of summands, square detection with witness reconstruction, greedy
//!   covering by translates.
//! * [`extremal`]: exact maximum square-sum-free subsets of `[n]` by
//!   branch and bound, plus the two explicit lower-bound constructions.
//! * [`congruence`]: bounded solutions of `a1*x1 + .. + ad*xd + r = p*z^2
//!   (mod q)` via coprime decomposition and a one-variable reduction step.
//! * [`gap_squares`]: squares of the form `p*z^2` inside arithmetic
//!   progressions and rank-2 generalized progressions.
//! * [`analytic`]: quadratic exponential sums, smooth bump functions with
//!   product-form Fourier transforms, Poisson summation checks, divisor
//!   witnesses and exponential tail bounds.
//! * [`structure`]: block splitting, the doubling merge process and the
//!   divisor-or-progression dichotomy driver.

pub mod arith;
pub mod config;
pub mod error;
pub mod factor;
pub mod gap;
pub mod set;
pub mod sumset;

pub mod congruence;
pub mod extremal;
pub mod gap_squares;

pub mod analytic;
pub mod corpus;
pub mod structure;

pub use config::SolverConfig;
pub use error::Error;
pub use gap::Gap;
pub use set::IntegerSet;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
