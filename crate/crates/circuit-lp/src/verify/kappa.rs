//! Brute-force condition numbers of a subspace, for cross-checking.
//!
//! The circuit imbalance `κ_W` of `W = ker(A)` is the largest ratio
//! `|g_j/g_i|` over all elementary vectors `g` of `W` (support-minimal
//! nonzero elements) and all `i, j` in their support. Two independent exact
//! computations are performed and compared:
//!
//! 1. enumeration of all circuits (minimal dependent column sets of `A`),
//!    each carrying a unique elementary vector up to scaling;
//! 2. the basis characterization `κ = max_B ‖A_B⁻¹ A‖_max` over all column
//!    bases `B` of `A`.
//!
//! The related condition measure `χ̄_W = max_B ‖A_B⁻¹A‖₂` is computed in
//! floating point (it is an operator norm, hence irrational in general).
//! Both are exponential-time by design: they exist to validate the
//! estimates the fast path produces, on small instances.

use num_traits::{One, Signed, Zero};

use super::rational::{kernel_basis, rat_to_f64, rref, RatMatrix, Rational};
use crate::dense::{norm_2, Matrix};
use crate::error::{Error, Result};

/// Exact brute-force circuit imbalance, with the cross-check results.
#[derive(Debug, Clone)]
pub struct KappaReport {
    /// `κ_W` as an exact rational; `None` when `W = {0}` has no circuits.
    pub kappa: Option<Rational>,
    /// `κ_W` from circuit enumeration, rounded to `f64`.
    pub kappa_f64: Option<f64>,
    /// `max_B ‖A_B⁻¹A‖_max` over all bases, as an exact rational.
    pub basis_max: Option<Rational>,
    /// Number of circuits found.
    pub circuits: usize,
    /// Number of column bases inspected.
    pub bases: usize,
}

impl KappaReport {
    /// Whether the two exact computations agree (they must).
    pub fn consistent(&self) -> bool {
        match (&self.kappa, &self.basis_max) {
            (Some(a), Some(b)) => a == b,
            (None, None) => true,
            // A space of full dimension has circuits (loops or the trivial
            // identity ratios) but the basis form may be empty or vice
            // versa; treat κ = 1 and an absent basis bound as compatible.
            (Some(k), None) | (None, Some(k)) => k.is_one(),
        }
    }
}

/// All `k`-subsets of `0..n`, in lexicographic order.
fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(cur.clone());
        // Advance to the next combination.
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] != i + n - k {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        cur[i] += 1;
        for j in i + 1..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// Exact brute-force `κ_W` for `W = ker(a)`, with cross-check.
pub fn brute_kappa(a: &Matrix) -> Result<KappaReport> {
    brute_kappa_rat(&RatMatrix::from_f64(a)?)
}

/// Exact brute-force `κ_{W⊥}` for `W = ker(a)`: the imbalance of the
/// orthogonal complement, computed from an exact row basis of `W`.
pub fn brute_kappa_dual(a: &Matrix) -> Result<KappaReport> {
    let ra = RatMatrix::from_f64(a)?;
    let rows = kernel_basis(&ra);
    let b = RatMatrix::from_rows_dims(&rows, ra.ncols());
    brute_kappa_rat(&b)
}

/// Core of [`brute_kappa`], over an exact matrix.
pub fn brute_kappa_rat(a: &RatMatrix) -> Result<KappaReport> {
    let n = a.ncols();
    if n > 24 {
        return Err(Error::Guard(format!(
            "brute-force imbalance is exponential; refusing n = {n} > 24"
        )));
    }
    // Reduce to an independent row set (kernel unchanged).
    let mut work = a.clone();
    let pivots = rref(&mut work, None);
    let r = pivots.len();
    let reduced = RatMatrix::from_rows_dims(
        &(0..r).map(|i| work.row(i).to_vec()).collect::<Vec<_>>(),
        n,
    );

    // Circuit enumeration: subsets whose column submatrix has a
    // one-dimensional kernel supported everywhere.
    let mut kappa: Option<Rational> = None;
    let mut circuits = 0usize;
    for size in 1..=(r + 1).min(n) {
        for c_set in subsets(n, size) {
            let sub = reduced.select_cols(&c_set);
            let ker = kernel_basis(&sub);
            if ker.len() != 1 {
                continue;
            }
            let g = &ker[0];
            if g.iter().any(|v| v.is_zero()) {
                continue; // dependent but not minimal
            }
            circuits += 1;
            for gi in g {
                for gj in g {
                    let ratio = (gj / gi).abs();
                    if kappa.as_ref().map_or(true, |k| ratio > *k) {
                        kappa = Some(ratio.clone());
                    }
                }
            }
        }
    }

    // Basis characterization: κ = max over column bases B of the largest
    // absolute entry of A_B⁻¹A, each basis handled by one reduction of the
    // augmented matrix [A_B | A].
    let mut basis_max: Option<Rational> = None;
    let mut bases = 0usize;
    if r > 0 {
        for b_set in subsets(n, r) {
            match inverse_times(&reduced, &b_set) {
                Some(prod) => {
                    bases += 1;
                    let mut entry_max = Rational::zero();
                    for i in 0..prod.nrows() {
                        for v in prod.row(i) {
                            let av = v.abs();
                            if av > entry_max {
                                entry_max = av;
                            }
                        }
                    }
                    if basis_max.as_ref().map_or(true, |b| entry_max > *b) {
                        basis_max = Some(entry_max);
                    }
                }
                None => continue,
            }
        }
    }

    Ok(KappaReport {
        kappa_f64: kappa.as_ref().map(rat_to_f64),
        kappa,
        basis_max,
        circuits,
        bases,
    })
}

/// `A_B⁻¹ A` when the columns `b_set` form a basis, else `None`; one exact
/// reduction of the augmented matrix `[A_B | A]`.
fn inverse_times(a: &RatMatrix, b_set: &[usize]) -> Option<RatMatrix> {
    let r = a.nrows();
    let n = a.ncols();
    let mut aug = RatMatrix::zeros(r, r + n);
    for i in 0..r {
        for (k, &j) in b_set.iter().enumerate() {
            aug[(i, k)] = a[(i, j)].clone();
        }
        for j in 0..n {
            aug[(i, r + j)] = a[(i, j)].clone();
        }
    }
    let pivots = rref(&mut aug, None);
    if pivots.len() != r || pivots.iter().any(|&(_, c)| c >= r) {
        return None; // A_B singular
    }
    let mut out = RatMatrix::zeros(r, n);
    for i in 0..r {
        for j in 0..n {
            out[(i, j)] = aug[(i, r + j)].clone();
        }
    }
    Some(out)
}

/// Brute-force `χ̄_W = max_B ‖A_B⁻¹A‖₂` over all column bases of `a`
/// (floating point; spectral norms are irrational in general).
///
/// Returns `None` when `a` has rank zero.
pub fn brute_chibar(a: &Matrix, tol: &crate::tol::Tolerance) -> Result<Option<f64>> {
    let ra = RatMatrix::from_f64(a)?;
    let n = ra.ncols();
    if n > 24 {
        return Err(Error::Guard(format!(
            "brute-force χ̄ is exponential; refusing n = {n} > 24"
        )));
    }
    let mut work = ra.clone();
    let pivots = rref(&mut work, None);
    let r = pivots.len();
    if r == 0 {
        return Ok(None);
    }
    let reduced = RatMatrix::from_rows_dims(
        &(0..r).map(|i| work.row(i).to_vec()).collect::<Vec<_>>(),
        n,
    );
    let mut best = 0.0f64;
    for b_set in subsets(n, r) {
        // Exact inversion keeps the candidate matrix clean before the
        // float spectral norm.
        let Some(prod) = inverse_times(&reduced, &b_set) else {
            continue;
        };
        let m = prod.to_f64();
        best = best.max(spectral_norm(&m, tol));
    }
    Ok(Some(best))
}

/// Largest singular value by power iteration on `MMᵀ`.
fn spectral_norm(m: &Matrix, _tol: &crate::tol::Tolerance) -> f64 {
    let r = m.nrows();
    if r == 0 || m.ncols() == 0 {
        return 0.0;
    }
    let mut v: Vec<f64> = (0..r).map(|i| 1.0 + (i as f64) * 0.01).collect();
    let nv = norm_2(&v);
    for x in v.iter_mut() {
        *x /= nv;
    }
    let mut lambda = 0.0f64;
    for _ in 0..500 {
        let w = m.matvec(&m.tr_matvec(&v));
        // w = M Mᵀ v; its norm converges to σ_max².
        let nw = norm_2(&w);
        if nw == 0.0 {
            return 0.0;
        }
        let new_lambda = nw;
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / nw;
        }
        if (new_lambda - lambda).abs() <= 1e-13 * new_lambda.max(1.0) {
            lambda = new_lambda;
            break;
        }
        lambda = new_lambda;
    }
    lambda.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tol::Tolerance;

    #[test]
    fn kappa_of_one_two() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0]]);
        let rep = brute_kappa(&a).unwrap();
        assert_eq!(rep.kappa_f64, Some(2.0));
        assert!(rep.consistent());
        assert_eq!(rep.circuits, 1);
    }

    #[test]
    fn kappa_of_balanced_space_is_one() {
        let a = Matrix::from_rows(&[vec![1.0, 0.0, 1.0], vec![0.0, 1.0, 1.0]]);
        let rep = brute_kappa(&a).unwrap();
        assert_eq!(rep.kappa_f64, Some(1.0));
        assert!(rep.consistent());
    }

    #[test]
    fn kappa_is_self_dual() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0, -3.0], vec![0.0, 5.0, 1.0]]);
        let primal = brute_kappa(&a).unwrap();
        let dual = brute_kappa_dual(&a).unwrap();
        assert_eq!(primal.kappa, dual.kappa);
        assert!(primal.consistent() && dual.consistent());
    }

    #[test]
    fn chibar_bounds_kappa() {
        let a = Matrix::from_rows(&[vec![1.0, 1.0, 0.0], vec![0.0, 2.0, 7.0]]);
        let rep = brute_kappa(&a).unwrap();
        let chi = brute_chibar(&a, &Tolerance::default()).unwrap().unwrap();
        let k = rep.kappa_f64.unwrap();
        let n = 3.0;
        assert!(k >= chi / n - 1e-9);
        assert!(k <= (chi * chi - 1.0).sqrt() + 1e-9);
    }

    #[test]
    fn zero_column_is_a_loop_circuit() {
        let a = Matrix::from_rows(&[vec![1.0, 0.0]]);
        let rep = brute_kappa(&a).unwrap();
        // ker contains e₂; the loop {2} is a circuit with ratio 1.
        assert_eq!(rep.kappa_f64, Some(1.0));
    }
}
