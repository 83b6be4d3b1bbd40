//! Exact verification backend: rational arithmetic, a reference simplex
//! solver, brute-force condition numbers, and certificate checking.
//!
//! Nothing in this module is consulted by the solving pipeline itself; it
//! exists so that every answer the floating-point framework produces can be
//! judged against exact ground truth on small instances, and so that every
//! certificate it emits can be re-proved with no tolerances at all.

pub mod certcheck;
pub mod farkas;
pub mod kappa;
pub mod rational;
pub mod simplex;

pub use certcheck::{check_certificate, CertificateCheck};
pub use farkas::{check_farkas_dual, check_farkas_primal, FarkasCheck};
pub use kappa::{brute_chibar, brute_kappa, brute_kappa_dual, brute_kappa_rat, KappaReport};
pub use rational::{rat_from_f64, rat_to_f64, rat_vec, RatMatrix, Rational};
pub use simplex::{rational_simplex, SimplexOutcome};

use num_traits::Zero;

use crate::dense::Matrix;
use crate::error::Result;
use rational::{rat_dot, rat_norm_1};

/// Exact classification of the LP `min ⟨c,x⟩` over `x ∈ ker(a) + d`,
/// `x ≥ 0`, as decided by the rational simplex.
#[derive(Debug, Clone)]
pub enum GroundTruth {
    /// Optimum exists; carries an exact optimal point, the optimal value,
    /// and an exact dual slack `s = c − Aᵀy ∈ W⊥ + c`, `s ≥ 0`,
    /// complementary to `x`.
    Optimal {
        x: Vec<Rational>,
        objective: Rational,
        dual_slack: Vec<Rational>,
    },
    /// Primal infeasible; carries `s ∈ W⊥`, `s ≥ 0`, `⟨d,s⟩ < 0`.
    Infeasible { dual_cert: Vec<Rational> },
    /// Feasible but unbounded below; carries a feasible point and a ray
    /// `z ∈ W`, `z ≥ 0`, `⟨c,z⟩ < 0`.
    Unbounded { x: Vec<Rational>, ray: Vec<Rational> },
}

/// Solves the subspace-form LP exactly: `min ⟨c,x⟩`, `x ∈ ker(a) + d`,
/// `x ≥ 0`. Inputs are converted from floating point exactly.
pub fn subspace_ground_truth(a: &Matrix, d: &[f64], c: &[f64]) -> Result<GroundTruth> {
    let ra = RatMatrix::from_f64(a)?;
    let rd = rat_vec(d)?;
    let rc = rat_vec(c)?;
    let b = ra.matvec(&rd);
    match rational_simplex(&ra, &b, &rc)? {
        SimplexOutcome::Optimal { x, dual, objective } => {
            let aty = ra.tr_matvec(&dual);
            let dual_slack: Vec<Rational> =
                rc.iter().zip(&aty).map(|(cj, v)| cj - v).collect();
            debug_assert!(dual_slack.iter().all(|s| *s >= Rational::zero()));
            debug_assert!(rat_dot(&x, &dual_slack).is_zero());
            Ok(GroundTruth::Optimal {
                x,
                objective,
                dual_slack,
            })
        }
        SimplexOutcome::Infeasible { farkas } => {
            let dual_cert: Vec<Rational> =
                ra.tr_matvec(&farkas).into_iter().map(|v| -v).collect();
            debug_assert!(dual_cert.iter().all(|s| *s >= Rational::zero()));
            debug_assert!(rat_dot(&rd, &dual_cert) < Rational::zero());
            Ok(GroundTruth::Infeasible { dual_cert })
        }
        SimplexOutcome::Unbounded { x, ray } => Ok(GroundTruth::Unbounded { x, ray }),
    }
}

/// Exact feasibility ground truth (`c = 0`): `Some(x)` with `x ∈ ker(a)+d`,
/// `x ≥ 0` when feasible, otherwise `None` plus the dual certificate.
pub fn feasibility_ground_truth(
    a: &Matrix,
    d: &[f64],
) -> Result<std::result::Result<Vec<Rational>, Vec<Rational>>> {
    match subspace_ground_truth(a, d, &vec![0.0; d.len()])? {
        GroundTruth::Optimal { x, .. } => Ok(Ok(x)),
        GroundTruth::Infeasible { dual_cert } => Ok(Err(dual_cert)),
        GroundTruth::Unbounded { .. } => unreachable!("zero objective cannot be unbounded"),
    }
}

/// `‖v‖₁` of an exact vector, as `f64`, for tolerance comparisons.
pub fn norm_1_f64(v: &[Rational]) -> f64 {
    rat_to_f64(&rat_norm_1(v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::Matrix;

    #[test]
    fn ground_truth_optimal_on_diagonal_line() {
        // x ∈ ker([1,−1]) + (2,2) = the diagonal; min x₁ at x = (0,0)… the
        // diagonal shifted by (2,2) is still the diagonal, so min x₁ + 0·x₂
        // over x ≥ 0 on it is 0 at the origin.
        let a = Matrix::from_rows(&[vec![1.0, -1.0]]);
        match subspace_ground_truth(&a, &[2.0, 2.0], &[1.0, 0.0]).unwrap() {
            GroundTruth::Optimal { objective, .. } => {
                assert_eq!(rat_to_f64(&objective), 0.0);
            }
            other => panic!("expected optimal, got {other:?}"),
        }
    }

    #[test]
    fn ground_truth_infeasible_certificate_is_exact() {
        // W + d = {x : x₁ + x₂ = −1}: empty in the nonnegative orthant.
        let a = Matrix::from_rows(&[vec![1.0, 1.0]]);
        match subspace_ground_truth(&a, &[-1.0, 0.0], &[0.0, 0.0]).unwrap() {
            GroundTruth::Infeasible { dual_cert } => {
                assert!(dual_cert.iter().all(|v| *v >= Rational::zero()));
                let d = rat_vec(&[-1.0, 0.0]).unwrap();
                assert!(rational::rat_dot(&d, &dual_cert) < Rational::zero());
            }
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn ground_truth_unbounded_on_negative_cost_ray() {
        let a = Matrix::from_rows(&[vec![1.0, -1.0]]);
        match subspace_ground_truth(&a, &[1.0, 1.0], &[-1.0, 0.0]).unwrap() {
            GroundTruth::Unbounded { ray, .. } => {
                assert!(ray.iter().all(|v| *v >= Rational::zero()));
            }
            other => panic!("expected unbounded, got {other:?}"),
        }
    }
}
