use thiserror::Error;

/// Errors shared by all subsystems.
#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),

    #[error("{what} exceeds budget: needs {needed}, limit {limit}")]
    BudgetExceeded {
        what: &'static str,
        needed: u128,
        limit: u128,
    },

    #[error("no residue z with p*z^2 = r (mod q) exists")]
    NoResidueRoot,

    #[error("no solution with x <= {bound} in residue search over modulus {modulus}")]
    NoSolutionInBound { bound: i128, modulus: i128 },

    #[error("prime search failed near {0}")]
    PrimeSearch(u64),

    #[error("not enough blocks: found {found}, need {need}")]
    BlocksExhausted { found: usize, need: usize },

    #[error("verification failed: {0}")]
    VerificationFailed(String),
}
