//! Exact verification of Farkas infeasibility certificates.
//!
//! A floating-point Farkas witness is almost never an exact member of the
//! subspace it claims to live in. Verification therefore reconstructs the
//! nearest exact witness with the same zero pattern: the claimed vector is
//! projected, in rational arithmetic, onto the exact subspace intersected
//! with the coordinate hyperplanes where the claim is exactly zero. The
//! projection preserves those zeros exactly, so the sign and inner-product
//! checks below are meaningful with no tolerances at all. A claim is valid
//! iff its reconstruction is a genuine certificate.

use num_traits::{Signed, Zero};

use crate::dense::Matrix;
use crate::error::{Error, Result};

use super::rational::{
    kernel_basis, rat_dot, rat_to_f64, rat_vec, solve_exact, RatMatrix, Rational,
};

/// Result of exactly re-proving a Farkas certificate.
#[derive(Debug, Clone)]
pub struct FarkasCheck {
    /// Whether the reconstructed witness is a genuine certificate.
    pub valid: bool,
    /// Exact inner product of the reconstruction with the shift vector,
    /// rounded for reporting; validity requires it be strictly negative.
    pub exact_inner: f64,
    /// Smallest coordinate of the reconstruction, rounded for reporting;
    /// validity requires it be nonnegative.
    pub min_coordinate: f64,
    /// `‖reconstruction − claim‖∞`, rounded: how far verification had to
    /// move the claimed witness.
    pub projection_shift: f64,
}

/// Exact orthogonal projection of `target` onto the span of `generators`.
fn project_onto_span(generators: &[Vec<Rational>], target: &[Rational]) -> Vec<Rational> {
    let n = target.len();
    let k = generators.len();
    if k == 0 {
        return vec![Rational::zero(); n];
    }
    let mut gram = RatMatrix::zeros(k, k);
    let mut rhs = vec![Rational::zero(); k];
    for i in 0..k {
        for j in i..k {
            let v = rat_dot(&generators[i], &generators[j]);
            gram[(i, j)] = v.clone();
            gram[(j, i)] = v;
        }
        rhs[i] = rat_dot(&generators[i], target);
    }
    // The Gram system is always consistent: the right-hand side lies in the
    // range of the Gram matrix by construction.
    let mu = solve_exact(&gram, &rhs).expect("Gram system is consistent");
    let mut out = vec![Rational::zero(); n];
    for (cand, weight) in generators.iter().zip(mu.iter()) {
        for (o, g) in out.iter_mut().zip(cand.iter()) {
            *o += weight * g;
        }
    }
    out
}

fn summarize(claim: &[Rational], witness: &[Rational], inner: &Rational) -> FarkasCheck {
    let min_coordinate = witness
        .iter()
        .map(rat_to_f64)
        .fold(f64::INFINITY, f64::min);
    let projection_shift = claim
        .iter()
        .zip(witness.iter())
        .map(|(a, b)| rat_to_f64(&(a - b)).abs())
        .fold(0.0, f64::max);
    let nonneg = witness.iter().all(|v| !v.is_negative());
    let negative_inner = inner.is_negative();
    FarkasCheck {
        valid: nonneg && negative_inner,
        exact_inner: rat_to_f64(inner),
        min_coordinate,
        projection_shift,
    }
}

/// Exactly verifies a certificate of primal infeasibility: the claim is
/// that `x ∈ ker(a) + d, x ≥ 0` has no solution, witnessed by `s` with
/// `s ∈ rowspace(a)`, `s ≥ 0`, `⟨d,s⟩ < 0`.
pub fn check_farkas_primal(a: &Matrix, d: &[f64], s: &[f64]) -> Result<FarkasCheck> {
    if a.ncols() != d.len() || a.ncols() != s.len() {
        return Err(Error::DimensionMismatch(
            "farkas check: vector lengths must match the matrix width".into(),
        ));
    }
    let ra = RatMatrix::from_f64(a)?;
    let rd = rat_vec(d)?;
    let rs = rat_vec(s)?;
    let m = a.nrows();
    // Multipliers λ with (Aᵀλ) vanishing on the claim's exact zero set.
    let zero_cols: Vec<usize> = (0..s.len()).filter(|&i| s[i] == 0.0).collect();
    let lambda_basis: Vec<Vec<Rational>> = if zero_cols.is_empty() {
        (0..m)
            .map(|i| {
                let mut e = vec![Rational::zero(); m];
                e[i] = Rational::from_integer(1.into());
                e
            })
            .collect()
    } else {
        kernel_basis(&ra.select_cols(&zero_cols).transpose())
    };
    let generators: Vec<Vec<Rational>> = lambda_basis
        .iter()
        .map(|lam| ra.tr_matvec(lam))
        .collect();
    let witness = project_onto_span(&generators, &rs);
    let inner = rat_dot(&rd, &witness);
    Ok(summarize(&rs, &witness, &inner))
}

/// Exactly verifies a certificate of dual infeasibility: the claim is that
/// `s ∈ rowspace(a) + c, s ≥ 0` has no solution, witnessed by `x` with
/// `x ∈ ker(a)`, `x ≥ 0`, `⟨c,x⟩ < 0`.
pub fn check_farkas_dual(a: &Matrix, c: &[f64], x: &[f64]) -> Result<FarkasCheck> {
    if a.ncols() != c.len() || a.ncols() != x.len() {
        return Err(Error::DimensionMismatch(
            "farkas check: vector lengths must match the matrix width".into(),
        ));
    }
    let ra = RatMatrix::from_f64(a)?;
    let rc = rat_vec(c)?;
    let rx = rat_vec(x)?;
    // Kernel vectors vanishing on the claim's exact zero set: append a unit
    // row per zero coordinate before taking the kernel.
    let zero_cols: Vec<usize> = (0..x.len()).filter(|&i| x[i] == 0.0).collect();
    let mut rows: Vec<Vec<Rational>> = (0..ra.nrows()).map(|i| ra.row(i).to_vec()).collect();
    for &j in &zero_cols {
        let mut e = vec![Rational::zero(); ra.ncols()];
        e[j] = Rational::from_integer(1.into());
        rows.push(e);
    }
    let stacked = RatMatrix::from_rows_dims(&rows, ra.ncols());
    let generators = kernel_basis(&stacked);
    let witness = project_onto_span(&generators, &rx);
    let inner = rat_dot(&rc, &witness);
    Ok(summarize(&rx, &witness, &inner))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_exact_primal_certificate() {
        // x₁ + x₂ = −2 with x ≥ 0 is infeasible; s = (1,1) proves it.
        let a = Matrix::from_rows(&[vec![1.0, 1.0]]);
        let check = check_farkas_primal(&a, &[-1.0, -1.0], &[1.0, 1.0]).unwrap();
        assert!(check.valid);
        assert!(check.exact_inner < 0.0);
        assert_eq!(check.projection_shift, 0.0);
    }

    #[test]
    fn repairs_float_noise_in_witness() {
        let a = Matrix::from_rows(&[vec![1.0, 1.0]]);
        let noisy = [1.0 + 3.0e-13, 1.0 - 5.0e-13];
        let check = check_farkas_primal(&a, &[-1.0, -1.0], &noisy).unwrap();
        assert!(check.valid);
        assert!(check.projection_shift > 0.0 && check.projection_shift < 1e-11);
    }

    #[test]
    fn rejects_witness_for_feasible_system() {
        let a = Matrix::from_rows(&[vec![1.0, 1.0]]);
        // d = (1,1) gives the feasible system x₁+x₂ = 2, x ≥ 0.
        let check = check_farkas_primal(&a, &[1.0, 1.0], &[1.0, 1.0]).unwrap();
        assert!(!check.valid);
        assert!(check.exact_inner > 0.0);
    }

    #[test]
    fn zero_pattern_is_preserved_exactly() {
        // W⊥ = rowspace of a; the witness is zero on coordinate 2, and the
        // reconstruction must stay exactly zero there.
        let a = Matrix::from_rows(&[vec![1.0, 0.0, -1.0], vec![0.0, 1.0, 1.0]]);
        let claim = [1.0 + 1e-14, 1.0 - 2e-14, 0.0];
        let check = check_farkas_primal(&a, &[-1.0, 0.0, 0.0], &claim).unwrap();
        assert!(check.valid, "{check:?}");
        assert!(check.min_coordinate >= 0.0);
    }

    #[test]
    fn accepts_dual_certificate() {
        // ker([1,−1]) = span{(1,1)}; x = (1,1) ≥ 0 with ⟨c,x⟩ < 0 proves
        // the dual side infeasible.
        let a = Matrix::from_rows(&[vec![1.0, -1.0]]);
        let check = check_farkas_dual(&a, &[-2.0, 1.0], &[1.0, 1.0]).unwrap();
        assert!(check.valid);

        let bad = check_farkas_dual(&a, &[2.0, 1.0], &[1.0, 1.0]).unwrap();
        assert!(!bad.valid);
    }
}
