//! Exact validation of lifting certificates.
//!
//! A certificate claims that lifting a point `p` from coordinates `I` into
//! `W = ker(N)` has `‖L_I(p)‖∞ > M·‖p‖₁`, which lower-bounds the circuit
//! imbalance of `W` by the ratio. The floating-point pipeline produced `p`
//! numerically, so `p` need not lie in `π_I(W)` *exactly*; the checker
//! therefore first replaces `p` by its exact orthogonal projection `p̂` onto
//! `π_I(W)` (a legitimate certificate point whenever the claim is honest,
//! since the projection shift is at roundoff scale), then computes the
//! minimum-norm lift of `p̂` with exact rational arithmetic and compares the
//! ratio against `M` with no tolerance at all.

use num_traits::Zero;

use super::rational::{
    kernel_basis, rat_from_f64, rat_norm_1, rat_norm_inf, rat_to_f64, rat_vec, rref, solve_exact,
    solve_square_exact, RatMatrix, Rational,
};
use crate::error::{Error, Result};
use crate::subspace::LiftingCertificate;

/// Outcome of the exact re-verification of a [`LiftingCertificate`].
#[derive(Debug, Clone)]
pub struct CertificateCheck {
    /// Whether `‖L_I(p̂)‖∞ > M·‖p̂‖₁` holds exactly.
    pub valid: bool,
    /// The exactly computed ratio, rounded for display.
    pub exact_ratio: f64,
    /// `‖p − p̂‖∞`: how far the claimed point was from exact liftability.
    pub projection_shift: f64,
}

/// Exact orthogonal projection of `p` onto the row space of `rows`.
fn project_onto_rows(rows: &RatMatrix, p: &[Rational]) -> Result<Vec<Rational>> {
    if rows.nrows() == 0 {
        return Ok(vec![Rational::zero(); p.len()]);
    }
    // Reduce to an independent spanning set first so the Gram matrix is
    // invertible.
    let mut work = rows.clone();
    let pivots = rref(&mut work, None);
    let indep = RatMatrix::from_rows_dims(
        &(0..pivots.len())
            .map(|i| work.row(i).to_vec())
            .collect::<Vec<_>>(),
        rows.ncols(),
    );
    if indep.nrows() == 0 {
        return Ok(vec![Rational::zero(); p.len()]);
    }
    let gram = indep.matmul(&indep.transpose());
    let rhs = indep.matvec(p);
    let w = solve_square_exact(&gram, &rhs).ok_or_else(|| {
        Error::InternalInconsistency("exact Gram matrix of independent rows was singular".into())
    })?;
    Ok(indep.tr_matvec(&w))
}

/// Exact minimum-norm lift of `p̂ ∈ π_I(ker N)`: the `z ∈ ker(N)` with
/// `z_I = p̂` minimizing `‖z_{comp}‖₂`.
fn exact_min_norm_lift(
    n_mat: &RatMatrix,
    index_set: &[usize],
    p_hat: &[Rational],
) -> Result<Vec<Rational>> {
    let n = n_mat.ncols();
    let comp: Vec<usize> = (0..n).filter(|i| !index_set.contains(i)).collect();
    let n_i = n_mat.select_cols(index_set);
    let n_j = n_mat.select_cols(&comp);
    let rhs: Vec<Rational> = n_i.matvec(p_hat).into_iter().map(|v| -v).collect();
    let u0 = solve_exact(&n_j, &rhs).ok_or_else(|| {
        Error::InternalInconsistency(
            "projected certificate point is not liftable; projection was wrong".into(),
        )
    })?;
    // Minimum-norm representative: subtract the ker(N_J) component of u0.
    let ker = kernel_basis(&n_j);
    let u = if ker.is_empty() {
        u0
    } else {
        let k = RatMatrix::from_rows_dims(&ker, comp.len());
        let correction = project_onto_rows(&k, &u0)?;
        u0.iter()
            .zip(&correction)
            .map(|(a, b)| a - b)
            .collect()
    };
    let mut z = vec![Rational::zero(); n];
    for (&i, v) in index_set.iter().zip(p_hat) {
        z[i] = v.clone();
    }
    for (&j, v) in comp.iter().zip(&u) {
        z[j] = v.clone();
    }
    Ok(z)
}

/// Re-verifies a lifting certificate with exact arithmetic.
///
/// The bound `m` is converted exactly; the verdict involves no floating
/// point. A valid result proves the circuit imbalance of the certificate's
/// subspace — and hence of every space it was derived from — exceeds `m`.
pub fn check_certificate(cert: &LiftingCertificate, m: f64) -> Result<CertificateCheck> {
    let n_mat = RatMatrix::from_f64(&cert.constraints)?;
    let p = rat_vec(&cert.point)?;
    let m_rat = rat_from_f64(m)?;

    // Exact basis of π_I(W): rows of a kernel basis of N restricted to I.
    let ker = kernel_basis(&n_mat);
    let restricted: Vec<Vec<Rational>> = ker
        .iter()
        .map(|row| cert.index_set.iter().map(|&i| row[i].clone()).collect())
        .collect();
    let span = RatMatrix::from_rows_dims(&restricted, cert.index_set.len());
    let p_hat = project_onto_rows(&span, &p)?;

    let shift: Vec<Rational> = p.iter().zip(&p_hat).map(|(a, b)| a - b).collect();
    let projection_shift = rat_to_f64(&rat_norm_inf(&shift));

    let p1 = rat_norm_1(&p_hat);
    if p1.is_zero() {
        return Ok(CertificateCheck {
            valid: false,
            exact_ratio: 0.0,
            projection_shift,
        });
    }
    let z = exact_min_norm_lift(&n_mat, &cert.index_set, &p_hat)?;
    debug_assert!(n_mat.matvec(&z).iter().all(|v| v.is_zero()));
    let ratio = rat_norm_inf(&z) / &p1;
    Ok(CertificateCheck {
        valid: ratio > m_rat,
        exact_ratio: rat_to_f64(&ratio),
        projection_shift,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::Matrix;
    use crate::subspace::{check_lift_certificate, SubspaceRep};
    use crate::tol::Tolerance;

    #[test]
    fn honest_certificate_verifies_exactly() {
        let tol = Tolerance::default();
        let w =
            SubspaceRep::from_matrix(&Matrix::from_rows(&[vec![1.0, 10.0]]), &tol).unwrap();
        let cert = check_lift_certificate(&w, &[1], &[1.0], 2.0)
            .unwrap()
            .unwrap();
        let check = check_certificate(&cert, 2.0).unwrap();
        assert!(check.valid);
        assert!((check.exact_ratio - 10.0).abs() < 1e-12);
        assert!(check.projection_shift < 1e-9);
    }

    #[test]
    fn bound_at_true_value_fails_exactly() {
        let tol = Tolerance::default();
        let w =
            SubspaceRep::from_matrix(&Matrix::from_rows(&[vec![1.0, 10.0]]), &tol).unwrap();
        let z = w.lift(&[1], &[1.0]).unwrap();
        let cert = LiftingCertificate {
            constraints: w.constraints().clone(),
            index_set: vec![1],
            point: vec![1.0],
            lifted: z,
            ratio: 10.0,
        };
        // κ = 10 exactly; the strict inequality against M = 10 must fail.
        let check = check_certificate(&cert, 10.0).unwrap();
        assert!(!check.valid);
        assert!((check.exact_ratio - 10.0).abs() < 1e-12);
    }

    #[test]
    fn min_norm_lift_is_used() {
        // W = ker([1 1 1]); lifting p = 1 from {0} evenly spreads −1/2.
        let n_mat = RatMatrix::from_ints(&[vec![1, 1, 1]]);
        let p = rat_vec(&[1.0]).unwrap();
        let z = exact_min_norm_lift(&n_mat, &[0], &p).unwrap();
        assert_eq!(rat_to_f64(&z[1]), -0.5);
        assert_eq!(rat_to_f64(&z[2]), -0.5);
    }

    #[test]
    fn drifted_point_is_projected_before_checking() {
        let tol = Tolerance::default();
        // W = span{(1,1,10)}: lifting from the first two coordinates picks
        // up a factor-10 third coordinate.
        let w = SubspaceRep::from_matrix(
            &Matrix::from_rows(&[vec![10.0, 0.0, -1.0], vec![0.0, 10.0, -1.0]]),
            &tol,
        )
        .unwrap();
        // π_{0,1}(W) is the diagonal; perturb the point slightly off it.
        let cert = LiftingCertificate {
            constraints: w.constraints().clone(),
            index_set: vec![0, 1],
            point: vec![1.0 + 1e-13, 1.0 - 1e-13],
            lifted: w.lift(&[0, 1], &[1.0, 1.0]).unwrap(),
            ratio: 5.0,
        };
        let check = check_certificate(&cert, 2.0).unwrap();
        assert!(check.projection_shift > 0.0 && check.projection_shift < 1e-12);
        assert!(check.valid, "exact ratio 10/(1+1) = 5 must exceed 2");
    }
}
