//! Numerical kernels: exponential sums with exact phase arithmetic,
//! smooth bump functions with closed-form transforms, divisor witnesses,
//! and tail estimates.

pub mod bump;
pub mod divisor;
pub mod tail;
pub mod weyl;

pub use bump::{bump_build, poisson_check, BumpFunction, BumpSpec};
pub use divisor::{divisor_witness, divisor_witness_from_factors};
pub use tail::tail_bound_check;
pub use weyl::{weyl_bound_ratio, weyl_sum, weyl_sum_oracle, WeylInstance};
