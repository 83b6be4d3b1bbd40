//! Exact feasibility for `x ∈ W + d, x ≥ 0` from approximate solves.
//!
//! [`solve_feasibility`] wraps the proximity oracle in a recursion that
//! converts its near-feasible answers into an exactly nonnegative point.
//! Each level either finishes outright or identifies a set `K` of
//! coordinates so large that they can absorb any later correction; the
//! remaining coordinates form a strictly smaller instance that is solved
//! recursively, and the recursive answer is lifted back with a correction
//! whose size is controlled by the imbalance estimate `M`. A failed size
//! control is itself a verifiable proof that `M < κ_W`.
//!
//! The recursion depth never exceeds `codim W + 2`: the closure of `K`
//! strictly reduces the codimension at every level that sees a non-loop
//! coordinate, and loops are consumed the first time they appear.

use crate::dense::{self, dot, norm_1, norm_inf, Vector};
use crate::error::{Error, Result};
use crate::oracles::{
    prox_feas_oracle, FarkasCertificate, OracleStats, ProxFeasOutcome,
};
use crate::subspace::{certificate_from_lift, LiftingCertificate, SubspaceRep};
use crate::verify::check_farkas_primal;

/// Outcome of [`solve_feasibility`].
#[derive(Debug, Clone)]
pub enum FeasibilityOutcome {
    /// `x ∈ W + d`, `x ≥ 0` exactly, `‖x − d‖∞ ≤ 16M²n‖d⁻‖₁`.
    Feasible(Vector),
    /// The system is infeasible; the certificate re-proves in exact
    /// arithmetic before being returned.
    Infeasible(FarkasCertificate),
    /// Evidence that `M < κ_W`.
    Lifting(LiftingCertificate),
}

/// Re-measures the guarantees of a feasible answer.
///
/// Checks that `x` is exactly nonnegative, lies in `W + d` up to the
/// relative residual tolerance, and moved no further than `16M²n‖d⁻‖₁`
/// from `d` in the sup norm.
pub fn verify_feas_lp(space: &SubspaceRep, d: &[f64], x: &[f64], m_est: f64) -> Result<()> {
    let tol = space.tol();
    let n = space.ambient_dim() as f64;
    if x.iter().any(|&v| v < 0.0) {
        return Err(Error::InternalInconsistency(
            "feasible point has a negative coordinate".into(),
        ));
    }
    let resid = space.shifted_residual(x, d);
    if resid > tol.residual_tol * (1.0 + norm_inf(x)) {
        return Err(Error::InternalInconsistency(format!(
            "feasible point leaves residual {resid:.6e}"
        )));
    }
    let moved = norm_inf(&dense::sub(x, d));
    let allowed = 16.0 * m_est * m_est * n * norm_1(&dense::neg_part(d));
    if moved > allowed * tol.slack() + tol.zero_tol * (1.0 + norm_inf(d)) {
        return Err(Error::InternalInconsistency(format!(
            "feasible point moved {moved:.6e}, allowed {allowed:.6e}"
        )));
    }
    Ok(())
}

/// Decides `x ∈ W + d, x ≥ 0` exactly, up to lifting certificates.
///
/// Returns a nonnegative point of `W + d` within `16M²n‖d⁻‖₁` of `d`, an
/// exactly verified Farkas certificate of infeasibility, or a lifting
/// certificate showing `m_est < κ_W` (in which case the caller should
/// retry with the certificate's escalated estimate).
pub fn solve_feasibility(
    space: &SubspaceRep,
    d: &[f64],
    m_est: f64,
    stats: &mut OracleStats,
) -> Result<FeasibilityOutcome> {
    if d.len() != space.ambient_dim() {
        return Err(Error::DimensionMismatch(format!(
            "shift has {} entries in ambient dimension {}",
            d.len(),
            space.ambient_dim()
        )));
    }
    if !dense::all_finite(d) {
        return Err(Error::NonFinite("feasibility shift"));
    }
    let depth_cap = space.codim() + 2;
    let outcome = feas_level(space, d.to_vec(), m_est, 1, depth_cap, stats)?;
    match &outcome {
        FeasibilityOutcome::Feasible(x) => verify_feas_lp(space, d, x, m_est)?,
        FeasibilityOutcome::Infeasible(cert) => {
            let check = check_farkas_primal(&cert.constraints, d, &cert.vector)?;
            if !check.valid {
                return Err(Error::InternalInconsistency(
                    "infeasibility certificate failed its exact re-proof".into(),
                ));
            }
        }
        FeasibilityOutcome::Lifting(_) => {}
    }
    Ok(outcome)
}

/// Coordinates forced to their shift value: where every vector of `W`
/// vanishes. A negative shift there is immediately infeasible, with the
/// unit vector as certificate.
fn fixed_coordinate_farkas(
    space: &SubspaceRep,
    d: &[f64],
) -> Option<FarkasCertificate> {
    let rows = space.kernel_rows();
    let tol = space.tol();
    let scale = 1.0 + norm_inf(d);
    for j in 0..space.ambient_dim() {
        if d[j] < -tol.zero_tol * scale
            && (0..rows.nrows()).all(|r| rows[(r, j)] == 0.0)
        {
            let mut vector = vec![0.0; space.ambient_dim()];
            vector[j] = 1.0;
            return Some(FarkasCertificate {
                constraints: space.constraints().clone(),
                vector,
                inner: d[j],
            });
        }
    }
    None
}

fn feas_level(
    space: &SubspaceRep,
    d: Vec<f64>,
    m_est: f64,
    depth: usize,
    depth_cap: usize,
    stats: &mut OracleStats,
) -> Result<FeasibilityOutcome> {
    let tol = *space.tol();
    let n = space.ambient_dim();
    stats.feasibility_depth = stats.feasibility_depth.max(depth);
    if depth > depth_cap {
        return Err(Error::InternalInconsistency(format!(
            "feasibility recursion exceeded its depth bound {depth_cap}"
        )));
    }
    if n == 0 {
        return Ok(FeasibilityOutcome::Feasible(Vec::new()));
    }
    if let Some(cert) = fixed_coordinate_farkas(space, &d) {
        return Ok(FeasibilityOutcome::Infeasible(cert));
    }

    // Rebalance the shift when its negative mass dominates both the coset
    // norm and the overall scale; the minimum-norm representative of the
    // same coset is better conditioned for the oracle.
    let dw = space.min_norm_point(&d);
    let d_neg = norm_1(&dense::neg_part(&d));
    let nf = n as f64;
    let d = if d_neg >= (m_est * norm_1(&dw)).max(norm_inf(&d) / (4.0 * m_est * m_est * nf)) {
        dw
    } else {
        d
    };
    if d.iter().all(|&v| v >= 0.0) {
        return Ok(FeasibilityOutcome::Feasible(d));
    }

    let eps = tol.clamp_eps((2.0 * m_est * nf).powi(-4));
    let x = match prox_feas_oracle(space, &d, m_est, eps, stats)? {
        ProxFeasOutcome::Point(p) => p.x,
        ProxFeasOutcome::FarkasPrimal(cert) => {
            return Ok(FeasibilityOutcome::Infeasible(cert))
        }
        ProxFeasOutcome::Lifting(cert) => return Ok(FeasibilityOutcome::Lifting(cert)),
    };
    let x_neg = norm_1(&dense::neg_part(&x));
    if x_neg == 0.0 {
        return Ok(FeasibilityOutcome::Feasible(x));
    }

    // Coordinates so large that no later correction can push them below
    // zero; their closure is frozen and the rest recurses.
    let threshold = 16.0 * nf * nf * m_est.powi(3) * x_neg;
    let k_set: Vec<usize> = (0..n).filter(|&i| x[i] >= threshold).collect();
    if k_set.is_empty() {
        return Err(Error::InternalInconsistency(
            "no coordinate clears the freezing threshold".into(),
        ));
    }
    let cl = space.closure(&k_set);
    let j_set: Vec<usize> = cl
        .iter()
        .copied()
        .filter(|i| !k_set.contains(i))
        .collect();
    let i_set: Vec<usize> = (0..n).filter(|i| !cl.contains(i)).collect();

    let sub_outcome = if i_set.is_empty() {
        FeasibilityOutcome::Feasible(Vec::new())
    } else {
        let sub_space = space.project_coords(&i_set)?;
        let x_i = dense::gather(&x, &i_set);
        feas_level(&sub_space, x_i, m_est, depth + 1, depth_cap, stats)?
    };

    match sub_outcome {
        FeasibilityOutcome::Feasible(x_prime) => {
            // Stitch: move the recursed coordinates onto their solution and
            // clear the negative parts on J, leaving K to absorb the lift.
            let mut ij: Vec<usize> = i_set.iter().chain(j_set.iter()).copied().collect();
            ij.sort_unstable();
            let mut target = vec![0.0; ij.len()];
            for (pos, &i) in i_set.iter().enumerate() {
                let slot = ij.binary_search(&i).expect("i_set is a subset of ij");
                target[slot] = x_prime[pos] - x[i];
            }
            for &j in &j_set {
                let slot = ij.binary_search(&j).expect("j_set is a subset of ij");
                target[slot] = (-x[j]).max(0.0);
            }
            let mass = norm_1(&target);
            let w = space.lift(&ij, &target)?;
            if norm_inf(&w) > m_est * tol.slack() * mass {
                return Ok(match certificate_from_lift(space, &ij, &target, &w, m_est) {
                    Some(cert) => FeasibilityOutcome::Lifting(cert),
                    None => {
                        return Err(Error::InternalInconsistency(
                            "correction exceeded the lifting bound but certifies nothing".into(),
                        ))
                    }
                });
            }
            let mut out = dense::add(&x, &w);
            let scale = 1.0 + norm_inf(&out);
            for v in out.iter_mut() {
                if *v < 0.0 {
                    if *v >= -tol.zero_tol * scale {
                        *v = 0.0;
                    } else {
                        return Err(Error::InternalInconsistency(format!(
                            "stitched point keeps a negative coordinate {v:.6e}"
                        )));
                    }
                }
            }
            Ok(FeasibilityOutcome::Feasible(out))
        }
        FeasibilityOutcome::Infeasible(sub_cert) => {
            // Zero-padding stays in W⊥ because the padded coordinates are
            // exactly those where vectors of (π_I(W))⊥ extend by zero.
            let vector = dense::scatter(n, &i_set, &sub_cert.vector);
            let inner = dot(&d, &vector);
            if inner >= 0.0 {
                return Err(Error::InternalInconsistency(
                    "pulled-back Farkas witness lost its negativity".into(),
                ));
            }
            Ok(FeasibilityOutcome::Infeasible(FarkasCertificate {
                constraints: space.constraints().clone(),
                vector,
                inner,
            }))
        }
        FeasibilityOutcome::Lifting(cert) => Ok(FeasibilityOutcome::Lifting(cert)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::Matrix;
    use crate::tol::Tolerance;
    use crate::verify::{check_certificate, feasibility_ground_truth};

    fn space_of(rows: &[Vec<f64>]) -> SubspaceRep {
        SubspaceRep::from_matrix(&Matrix::from_rows(rows), &Tolerance::default()).unwrap()
    }

    #[test]
    fn already_nonnegative_shift_is_returned() {
        let space = space_of(&[vec![1.0, 1.0, -1.0]]);
        let mut stats = OracleStats::default();
        let d = [1.0, 0.0, 2.0];
        match solve_feasibility(&space, &d, 2.0, &mut stats).unwrap() {
            FeasibilityOutcome::Feasible(x) => assert_eq!(x, d.to_vec()),
            other => panic!("expected feasible, got {other:?}"),
        }
        assert_eq!(stats.prox_feas_calls, 0);
    }

    #[test]
    fn feasible_system_produces_exact_nonnegative_point() {
        let space = space_of(&[vec![1.0, 1.0, -1.0]]);
        let d = [1.0, -2.0, 2.0];
        let mut stats = OracleStats::default();
        match solve_feasibility(&space, &d, 4.0, &mut stats).unwrap() {
            FeasibilityOutcome::Feasible(x) => {
                assert!(x.iter().all(|&v| v >= 0.0));
                verify_feas_lp(&space, &d, &x, 4.0).unwrap();
            }
            other => panic!("expected feasible, got {other:?}"),
        }
        assert!(stats.feasibility_depth >= 1);
    }

    #[test]
    fn infeasible_system_produces_exact_farkas() {
        let space = space_of(&[vec![1.0, 1.0]]);
        let d = [-1.0, -1.0];
        let mut stats = OracleStats::default();
        match solve_feasibility(&space, &d, 2.0, &mut stats).unwrap() {
            FeasibilityOutcome::Infeasible(cert) => {
                assert!(cert.inner < 0.0);
                let check = check_farkas_primal(&cert.constraints, &d, &cert.vector).unwrap();
                assert!(check.valid);
            }
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn fixed_negative_coordinate_is_immediately_infeasible() {
        // ker([0, 1]) = span{e₀}: the second coordinate is pinned to d₁.
        let space = space_of(&[vec![0.0, 1.0]]);
        let d = [3.0, -2.0];
        let mut stats = OracleStats::default();
        match solve_feasibility(&space, &d, 2.0, &mut stats).unwrap() {
            FeasibilityOutcome::Infeasible(cert) => {
                assert_eq!(cert.vector, vec![0.0, 1.0]);
                let check = check_farkas_primal(&cert.constraints, &d, &cert.vector).unwrap();
                assert!(check.valid);
            }
            other => panic!("expected infeasible, got {other:?}"),
        }
        assert_eq!(stats.prox_feas_calls, 0);
    }

    #[test]
    fn underestimated_imbalance_surfaces_a_lifting_certificate() {
        let space = space_of(&[vec![1.0, 100.0]]);
        let d = [1.0, -1.0];
        let mut stats = OracleStats::default();
        match solve_feasibility(&space, &d, 2.0, &mut stats).unwrap() {
            FeasibilityOutcome::Lifting(cert) => {
                assert!(cert.ratio > 2.0);
                assert!(check_certificate(&cert, 2.0).unwrap().valid);
            }
            other => panic!("expected a lifting certificate, got {other:?}"),
        }
    }

    #[test]
    fn matches_the_rational_oracle_on_mixed_instances() {
        // A few fixed small systems, both feasible and infeasible, checked
        // against the exact rational decision.
        let cases: Vec<(Vec<Vec<f64>>, Vec<f64>)> = vec![
            (vec![vec![1.0, 2.0, -1.0]], vec![-1.0, 1.0, 3.0]),
            (vec![vec![1.0, 2.0, -1.0]], vec![0.0, -1.0, -1.0]),
            (
                vec![vec![1.0, 1.0, 0.0, -1.0], vec![0.0, 1.0, 1.0, 1.0]],
                vec![1.0, -1.0, 2.0, 0.5],
            ),
            (
                vec![vec![1.0, 0.0, 1.0], vec![0.0, 1.0, 1.0]],
                vec![-2.0, -2.0, 1.0],
            ),
        ];
        for (rows, d) in cases {
            let a = Matrix::from_rows(&rows);
            let space = SubspaceRep::from_matrix(&a, &Tolerance::default()).unwrap();
            let truth = feasibility_ground_truth(&a, &d).unwrap();
            let mut stats = OracleStats::default();
            match solve_feasibility(&space, &d, 8.0, &mut stats).unwrap() {
                FeasibilityOutcome::Feasible(x) => {
                    assert!(truth.is_ok(), "solver found a point in an infeasible system");
                    verify_feas_lp(&space, &d, &x, 8.0).unwrap();
                }
                FeasibilityOutcome::Infeasible(cert) => {
                    assert!(truth.is_err(), "solver rejected a feasible system");
                    assert!(
                        check_farkas_primal(&cert.constraints, &d, &cert.vector)
                            .unwrap()
                            .valid
                    );
                }
                FeasibilityOutcome::Lifting(cert) => {
                    panic!("unexpected lifting certificate at ratio {}", cert.ratio)
                }
            }
        }
    }
}
