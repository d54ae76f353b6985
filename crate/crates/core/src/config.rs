//! Run configuration shared by the solvers.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::Result;

/// Tunable constants for the search and solver routines.
///
/// The defaults are the desk-scale values used by the test suite; every
/// field can be overridden from a JSON config file or CLI flags.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Growth factor required between merge rounds (> 1).
    pub c: f64,
    /// Number of shift elements consumed per merge step.
    pub h: usize,
    /// Exponent on the logarithm in the congruence solution bound.
    #[serde(rename = "D")]
    pub exp_d: u32,
    /// Log-power used by budget heuristics on the analytic side.
    #[serde(rename = "C")]
    pub log_power: f64,
    /// Numerical tolerance for floating-point verifications.
    pub tol: f64,
    /// Seed for all randomized corpora; same seed, same run.
    pub seed: u64,
    /// Ceiling on bitset allocations, in bits.
    pub memory_budget_bits: u64,
    /// Ceiling on explicit enumerations (progression properness and the like).
    pub enumeration_budget: u64,
    /// Largest n accepted by the exact square-sum-free search.
    pub sf_exact_max_n: u64,
    /// Largest |Q|/|X| blowup a fitted progression may have.
    pub kappa: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            c: 2.0,
            h: 8,
            exp_d: 3,
            log_power: 12.0,
            tol: 1e-9,
            seed: 0,
            memory_budget_bits: 1 << 32,
            enumeration_budget: 10_000_000,
            sf_exact_max_n: 60,
            kappa: 100,
        }
    }
}

impl SolverConfig {
    /// Parse a config from JSON, rejecting invalid field values.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: SolverConfig =
            serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.c.is_nan() || self.c <= 1.0 {
            return Err(Error::InvalidInput(format!("c must be > 1, got {}", self.c)));
        }
        if self.h == 0 {
            return Err(Error::InvalidInput("h must be >= 1".into()));
        }
        if self.exp_d == 0 {
            return Err(Error::InvalidInput("D must be >= 1".into()));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::InvalidInput("tol must be positive".into()));
        }
        if self.kappa == 0 {
            return Err(Error::InvalidInput("kappa must be >= 1".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let cfg = SolverConfig::default();
        assert_eq!(cfg.c, 2.0);
        assert_eq!(cfg.h, 8);
        assert_eq!(cfg.exp_d, 3);
        assert_eq!(cfg.log_power, 12.0);
        assert_eq!(cfg.tol, 1e-9);
    }

    #[test]
    fn json_roundtrip_with_overrides() {
        let cfg = SolverConfig::from_json(r#"{"c": 3.0, "D": 2, "seed": 42}"#).unwrap();
        assert_eq!(cfg.c, 3.0);
        assert_eq!(cfg.exp_d, 2);
        assert_eq!(cfg.seed, 42);
        assert_eq!(cfg.h, 8); // untouched default
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(SolverConfig::from_json(&text).unwrap(), cfg);
    }

    #[test]
    fn rejects_bad_values() {
        assert!(SolverConfig::from_json(r#"{"c": 1.0}"#).is_err());
        assert!(SolverConfig::from_json(r#"{"h": 0}"#).is_err());
        assert!(SolverConfig::from_json(r#"{"unknown_field": 1}"#).is_err());
    }
}
