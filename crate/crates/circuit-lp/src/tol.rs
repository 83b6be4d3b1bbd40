//! Tolerance configuration for the floating-point pipeline.
//!
//! The main pipeline runs in double precision; exact rational arithmetic
//! lives only in the [`crate::verify`] module. Every comparison against a
//! theoretically derived bound goes through the slack policy defined here so
//! that repair arithmetic and accumulated roundoff never flip a comparison
//! the theory guarantees.

use crate::error::{Error, Result};

/// Smallest accuracy parameter any oracle is asked to honor.
///
/// The accuracy cascade squares ε on the way down (ε′ = ε²/(28M³n³)), which
/// leaves double precision long before the theory stops needing it. Every
/// computed ε is floored at this value; all downstream measured inequalities
/// are checked against the ε actually used, so the system stays internally
/// consistent.
pub const EPS_FLOOR: f64 = 1e-12;

/// Absolute/relative tolerance pair used by the floating-point pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    /// Threshold for treating a computed real as zero (sign tests, pivot
    /// tests, support detection). Two orders below typical terminal solver
    /// accuracy.
    pub zero_tol: f64,
    /// Feasibility-residual bound for final verification and membership
    /// tests.
    pub residual_tol: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            zero_tol: 1e-11,
            residual_tol: 1e-8,
        }
    }
}

impl Tolerance {
    /// Builds a tolerance pair, enforcing `0 < zero_tol ≤ residual_tol < 1`.
    pub fn new(zero_tol: f64, residual_tol: f64) -> Result<Self> {
        if !(zero_tol > 0.0 && zero_tol <= residual_tol && residual_tol < 1.0) {
            return Err(Error::DimensionMismatch(format!(
                "tolerances must satisfy 0 < zero_tol ≤ residual_tol < 1, got ({zero_tol}, {residual_tol})"
            )));
        }
        Ok(Tolerance {
            zero_tol,
            residual_tol,
        })
    }

    /// Relative slack applied to every measured theoretical bound: a
    /// quantity passes the check `q ≤ bound` when `q ≤ bound · slack()`.
    pub fn slack(&self) -> f64 {
        1.0 + 10.0 * self.residual_tol
    }

    /// Floors a computed accuracy parameter at [`EPS_FLOOR`].
    pub fn clamp_eps(&self, eps: f64) -> f64 {
        eps.max(EPS_FLOOR)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_satisfies_invariant() {
        let t = Tolerance::default();
        assert!(t.zero_tol > 0.0 && t.zero_tol <= t.residual_tol && t.residual_tol < 1.0);
    }

    #[test]
    fn rejects_inverted_pair() {
        assert!(Tolerance::new(1e-6, 1e-9).is_err());
        assert!(Tolerance::new(0.0, 1e-9).is_err());
        assert!(Tolerance::new(1e-9, 1.5).is_err());
    }

    #[test]
    fn eps_floor_applies() {
        let t = Tolerance::default();
        assert_eq!(t.clamp_eps(1e-20), EPS_FLOOR);
        assert_eq!(t.clamp_eps(1e-6), 1e-6);
    }
}
