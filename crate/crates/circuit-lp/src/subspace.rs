//! Linear subspaces `W ⊆ ℝⁿ`, their lifting maps, and condition estimates.
//!
//! A subspace is stored as the kernel of a normalized constraint matrix `N`
//! in `(I | T)` form (up to column permutation), alongside a row basis of
//! `W` itself and cached orthonormal bases of both `W` and `W⊥`. This makes
//! the two central primitives cheap and symmetric:
//!
//! * [`SubspaceRep::min_norm_point`] — the projection `d/W` of `d` onto
//!   `W⊥`, i.e. the minimum-norm point of the affine space `W + d`;
//! * [`SubspaceRep::lift`] — the minimum-norm lifting `L_I(p)`: the vector
//!   `z ∈ W` with `z_I = p` whose complement coordinates have the least
//!   Euclidean norm.
//!
//! The lifting map is how condition estimates are falsified: whenever a lift
//! comes out with `‖L_I(p)‖∞ > M·‖p‖₁`, the pair `(I, p)` is a
//! [`LiftingCertificate`] that the current estimate `M` undershoots the
//! circuit imbalance of the subspace, and the estimate is raised to
//! `max{2·‖L_I(p)‖∞/‖p‖₁, M²}`. Because the imbalance is invariant under
//! duality and never increases when coordinates are projected away or fixed
//! to zero, a certificate found in any derived subspace is a certificate for
//! the original one.

use crate::dense::{
    self, dot, norm_1, norm_inf, orthonormal_rows, project_onto_orthonormal, scatter,
    solve_consistent, Matrix, Vector,
};
use crate::error::{Error, Result};
use crate::tol::Tolerance;

/// A linear subspace `W ⊆ ℝⁿ` with cached bases of `W` and `W⊥`.
///
/// Immutable after construction; all derived spaces ([`Self::dual`],
/// [`Self::project_coords`], [`Self::fix_coords`]) are fresh values.
#[derive(Debug, Clone)]
pub struct SubspaceRep {
    n: usize,
    /// Normalized constraint matrix with `ker(constraints) = W`.
    constraints: Matrix,
    /// Columns of `constraints` carrying the identity block (increasing).
    basis: Vec<usize>,
    /// Rows form a basis of `W`; equivalently `ker(kernel_rows) = W⊥`.
    kernel_rows: Matrix,
    /// Orthonormal rows spanning `W`.
    q_space: Matrix,
    /// Orthonormal rows spanning `W⊥`.
    q_perp: Matrix,
    tol: Tolerance,
}

impl SubspaceRep {
    /// Represents `W = ker(a)`.
    ///
    /// The matrix is normalized by Gauss–Jordan elimination; redundant rows
    /// are dropped. Rows that are neither independent nor negligibly
    /// dependent are reported as [`Error::RankDeficient`].
    pub fn from_matrix(a: &Matrix, tol: &Tolerance) -> Result<Self> {
        let ns = dense::gaussian_normalize(a, tol)?;
        Ok(Self::from_normalized(ns.n_matrix, ns.basis, a.ncols(), *tol))
    }

    /// Represents the full space `W = ℝⁿ` (no constraints).
    pub fn full(n: usize, tol: &Tolerance) -> Self {
        Self::from_normalized(Matrix::zeros(0, n), Vec::new(), n, *tol)
    }

    fn from_normalized(constraints: Matrix, basis: Vec<usize>, n: usize, tol: Tolerance) -> Self {
        debug_assert_eq!(constraints.ncols(), n);
        let nonbasis: Vec<usize> = (0..n).filter(|j| !basis.contains(j)).collect();
        // A row basis of ker(constraints): one row per nonbasis column j,
        // with a 1 in position j and −T entries in the basis positions.
        let mut rows = Vec::with_capacity(nonbasis.len());
        for &j in &nonbasis {
            let mut v = vec![0.0; n];
            v[j] = 1.0;
            for (i, &bj) in basis.iter().enumerate() {
                v[bj] = -constraints[(i, j)];
            }
            rows.push(v);
        }
        let kernel_rows = Matrix::from_rows_dims(&rows, n);
        let q_space = orthonormal_rows(&kernel_rows, &tol);
        let q_perp = orthonormal_rows(&constraints, &tol);
        SubspaceRep {
            n,
            constraints,
            basis,
            kernel_rows,
            q_space,
            q_perp,
            tol,
        }
    }

    /// Ambient dimension `n`.
    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    /// `dim W`.
    pub fn dim(&self) -> usize {
        self.n - self.constraints.nrows()
    }

    /// `dim W⊥` (the number of independent constraints).
    pub fn codim(&self) -> usize {
        self.constraints.nrows()
    }

    /// The normalized constraint matrix `N` with `ker(N) = W`.
    pub fn constraints(&self) -> &Matrix {
        &self.constraints
    }

    /// Basis columns of the normalized constraint matrix.
    pub fn basis(&self) -> &[usize] {
        &self.basis
    }

    /// A matrix whose rows form a basis of `W`.
    pub fn kernel_rows(&self) -> &Matrix {
        &self.kernel_rows
    }

    /// The tolerance policy this representation was built with.
    pub fn tol(&self) -> &Tolerance {
        &self.tol
    }

    /// The orthogonal complement `W⊥`, as a first-class subspace.
    pub fn dual(&self) -> Result<SubspaceRep> {
        SubspaceRep::from_matrix(&self.kernel_rows, &self.tol)
    }

    /// Orthogonal projection of `v` onto `W`.
    pub fn project(&self, v: &[f64]) -> Vector {
        project_onto_orthonormal(&self.q_space, v)
    }

    /// Orthogonal projection of `d` onto `W⊥`: the minimum-norm point
    /// `d/W` of the affine subspace `W + d`.
    pub fn min_norm_point(&self, d: &[f64]) -> Vector {
        project_onto_orthonormal(&self.q_perp, d)
    }

    /// Residual `‖N(x − d)‖∞` measuring membership of `x` in `W + d`.
    pub fn shifted_residual(&self, x: &[f64], d: &[f64]) -> f64 {
        let diff = dense::sub(x, d);
        norm_inf(&self.constraints.matvec(&diff))
    }

    /// Whether `v ∈ W` up to the residual tolerance (relative to `‖v‖∞`).
    pub fn contains(&self, v: &[f64]) -> bool {
        norm_inf(&self.constraints.matvec(v)) <= self.tol.residual_tol * (1.0 + norm_inf(v))
    }

    /// Minimum-norm lifting `L_I(p)`: the `z ∈ W` with `z_I = p` minimizing
    /// `‖z_{[n]∖I}‖₂`.
    ///
    /// `index_set` must be strictly increasing. Fails with
    /// [`Error::InconsistentProjection`] when no element of `W` restricts to
    /// `p` on `I` (i.e. `p ∉ π_I(W)` at the working tolerance).
    pub fn lift(&self, index_set: &[usize], p: &[f64]) -> Result<Vector> {
        debug_assert!(index_set.windows(2).all(|w| w[0] < w[1]));
        if index_set.len() != p.len() {
            return Err(Error::DimensionMismatch(format!(
                "lift: index set has {} entries, point has {}",
                index_set.len(),
                p.len()
            )));
        }
        if !dense::all_finite(p) {
            return Err(Error::NonFinite("lift input"));
        }
        let comp: Vec<usize> = (0..self.n).filter(|i| !index_set.contains(i)).collect();
        let n_i = self.constraints.select_cols(index_set);
        let n_j = self.constraints.select_cols(&comp);
        let rhs = dense::scale(&n_i.matvec(p), -1.0);
        let (u0, resid) = solve_consistent(&n_j, &rhs, &self.tol)?;
        if resid > self.tol.residual_tol * (1.0 + norm_1(p)) {
            return Err(Error::InconsistentProjection {
                residual: resid,
                tol: self.tol.residual_tol * (1.0 + norm_1(p)),
            });
        }
        // The solution set is u0 + ker(N_J); its minimum-norm element is the
        // projection of u0 onto the row space of N_J.
        let q = orthonormal_rows(&n_j, &self.tol);
        let u = project_onto_orthonormal(&q, &u0);
        let mut z = scatter(self.n, index_set, p);
        for (&j, &uj) in comp.iter().zip(&u) {
            z[j] = uj;
        }
        Ok(z)
    }

    /// Minimum-norm lifting in the orthogonal complement: `L_I^{W⊥}(q)`.
    pub fn lift_dual(&self, index_set: &[usize], q: &[f64]) -> Result<Vector> {
        self.dual()?.lift(index_set, q)
    }

    /// Closure of `k_set` in the support matroid of `W` (whose circuits
    /// are the minimal supports of vectors of `W`): all coordinates `i`
    /// whose constraint column lies in the span of the columns indexed by
    /// `k_set`, i.e. `rk(A_{K∪{i}}) = rk(A_K)`.
    ///
    /// Returns a sorted set containing `k_set`.
    pub fn closure(&self, k_set: &[usize]) -> Vec<usize> {
        let cols: Vec<Vec<f64>> = k_set.iter().map(|&j| self.constraints.col(j)).collect();
        let span = orthonormal_rows(
            &Matrix::from_rows_dims(&cols, self.constraints.nrows()),
            &self.tol,
        );
        let mut out: Vec<usize> = k_set.to_vec();
        for i in 0..self.n {
            if k_set.contains(&i) {
                continue;
            }
            let col = self.constraints.col(i);
            let proj = project_onto_orthonormal(&span, &col);
            let resid = norm_inf(&dense::sub(&col, &proj));
            if resid <= self.tol.zero_tol * (1.0 + norm_inf(&col)) {
                out.push(i);
            }
        }
        out.sort_unstable();
        out
    }

    /// Coordinate projection `π_I(W) = {x_I : x ∈ W} ⊆ ℝ^I`.
    pub fn project_coords(&self, i_set: &[usize]) -> Result<SubspaceRep> {
        debug_assert!(i_set.windows(2).all(|w| w[0] < w[1]));
        let k = i_set.len();
        // Rows of kernel_rows restricted to I span π_I(W); the constraint
        // matrix of the projection is an orthonormal basis of the
        // complement of that span inside ℝ^I.
        let restricted: Vec<Vec<f64>> = (0..self.kernel_rows.nrows())
            .map(|r| dense::gather(self.kernel_rows.row(r), i_set))
            .collect();
        let span = orthonormal_rows(&Matrix::from_rows_dims(&restricted, k), &self.tol);
        let mut comp_rows: Vec<Vec<f64>> = Vec::new();
        for j in 0..k {
            let mut e = vec![0.0; k];
            e[j] = 1.0;
            let proj = project_onto_orthonormal(&span, &e);
            let mut r = dense::sub(&e, &proj);
            // Re-orthogonalize against rows already collected.
            for c in &comp_rows {
                let cc = dot(c, &r);
                for (rk, ck) in r.iter_mut().zip(c.iter()) {
                    *rk -= cc * ck;
                }
            }
            let nr = dense::norm_2(&r);
            if nr > self.tol.zero_tol {
                for rk in r.iter_mut() {
                    *rk /= nr;
                }
                comp_rows.push(r);
            }
        }
        SubspaceRep::from_matrix(&Matrix::from_rows_dims(&comp_rows, k), &self.tol)
    }

    /// Coordinate fixing `W ∩ ℝ^I = {x_I : x ∈ W, x_{[n]∖I} = 0} ⊆ ℝ^I`.
    pub fn fix_coords(&self, i_set: &[usize]) -> Result<SubspaceRep> {
        debug_assert!(i_set.windows(2).all(|w| w[0] < w[1]));
        SubspaceRep::from_matrix(&self.constraints.select_cols(i_set), &self.tol)
    }
}

/// Running estimate `M ≥ 2` of the circuit imbalance of the ambient space.
///
/// The framework never needs the true imbalance: it runs with the current
/// estimate and doubles down ([`Self::bump`]) whenever a lifting certificate
/// proves the estimate too small. An estimate can only be raised.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionEstimate {
    value: f64,
}

impl ConditionEstimate {
    /// Creates an estimate; values below 2 are raised to 2.
    pub fn new(m: f64) -> Result<Self> {
        if !m.is_finite() {
            return Err(Error::NonFinite("condition estimate"));
        }
        Ok(ConditionEstimate { value: m.max(2.0) })
    }

    /// The current value `M`.
    pub fn value(&self) -> f64 {
        self.value
    }

    /// Raises the estimate after a certificate with the given lifting
    /// ratio: `M ← max{2·ratio, M²}`. Returns the new value.
    pub fn bump(&mut self, ratio: f64) -> f64 {
        self.value = (2.0 * ratio).max(self.value * self.value);
        self.value
    }
}

/// Proof that a condition estimate `M` was too small: a point `p` on
/// coordinates `index_set` of some subspace whose minimum-norm lift `z` into
/// that subspace satisfies `‖z‖∞ > M·‖p‖₁`.
///
/// The subspace the certificate lives in is recorded explicitly (as its
/// normalized constraint matrix), because certificates are discovered in
/// spaces derived from the input — complements, coordinate projections,
/// fixings — and all of those have circuit imbalance at most that of the
/// original space, so the certificate transfers.
#[derive(Debug, Clone)]
pub struct LiftingCertificate {
    /// Constraint matrix of the subspace the certificate was found in.
    pub constraints: Matrix,
    /// Coordinates of the partial point (strictly increasing).
    pub index_set: Vec<usize>,
    /// The partial point `p` (nonzero).
    pub point: Vector,
    /// The computed minimum-norm lift of `p`.
    pub lifted: Vector,
    /// `‖lifted‖∞ / ‖p‖₁`, a lower bound on the circuit imbalance.
    pub ratio: f64,
}

/// Tests whether lifting `p` from `index_set` in `space` violates the bound
/// `‖L_I(p)‖∞ ≤ M·‖p‖₁` and, if so, returns the certificate.
///
/// Issuance is deliberately one-sided: a certificate is produced only when
/// the ratio clears `M` by the tolerance slack, so that an `M` equal to the
/// true imbalance is never spuriously contradicted by roundoff.
pub fn check_lift_certificate(
    space: &SubspaceRep,
    index_set: &[usize],
    p: &[f64],
    m: f64,
) -> Result<Option<LiftingCertificate>> {
    let p1 = norm_1(p);
    if p1 == 0.0 {
        return Ok(None);
    }
    let z = space.lift(index_set, p)?;
    let ratio = norm_inf(&z) / p1;
    if ratio > m * space.tol().slack() {
        Ok(Some(LiftingCertificate {
            constraints: space.constraints().clone(),
            index_set: index_set.to_vec(),
            point: p.to_vec(),
            lifted: z,
            ratio,
        }))
    } else {
        Ok(None)
    }
}

/// Wraps an already-computed lift into a certificate when it violates the
/// `M` bound; used by callers that need the lift regardless.
pub fn certificate_from_lift(
    space: &SubspaceRep,
    index_set: &[usize],
    p: &[f64],
    lifted: &[f64],
    m: f64,
) -> Option<LiftingCertificate> {
    let p1 = norm_1(p);
    if p1 == 0.0 {
        return None;
    }
    let ratio = norm_inf(lifted) / p1;
    if ratio > m * space.tol().slack() {
        Some(LiftingCertificate {
            constraints: space.constraints().clone(),
            index_set: index_set.to_vec(),
            point: p.to_vec(),
            lifted: lifted.to_vec(),
            ratio,
        })
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::sub;

    fn t() -> Tolerance {
        Tolerance::default()
    }

    fn space(rows: &[Vec<f64>]) -> SubspaceRep {
        SubspaceRep::from_matrix(&Matrix::from_rows(rows), &t()).unwrap()
    }

    #[test]
    fn lift_splits_evenly() {
        let w = space(&[vec![1.0, 1.0, 1.0]]);
        let z = w.lift(&[0], &[1.0]).unwrap();
        assert!((z[0] - 1.0).abs() < 1e-12);
        assert!((z[1] + 0.5).abs() < 1e-12);
        assert!((z[2] + 0.5).abs() < 1e-12);
    }

    #[test]
    fn lift_forced_coordinate() {
        let w = space(&[vec![1.0, 2.0]]);
        let z = w.lift(&[1], &[1.0]).unwrap();
        assert!((z[0] + 2.0).abs() < 1e-12);
        assert!((z[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lift_dual_of_sum_space() {
        let w = space(&[vec![1.0, 1.0]]);
        let z = w.lift_dual(&[0], &[1.0]).unwrap();
        assert!((z[0] - 1.0).abs() < 1e-12);
        assert!((z[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lift_rejects_unreachable_point() {
        // W = span{(1,−1,0)}: nothing in W has x₃ ≠ 0.
        let w = space(&[vec![1.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]);
        let err = w.lift(&[2], &[1.0]).unwrap_err();
        assert!(matches!(err, Error::InconsistentProjection { .. }));
    }

    #[test]
    fn min_norm_point_on_diagonal() {
        let w = space(&[vec![1.0, 1.0, 1.0]]);
        let p = w.min_norm_point(&[1.0, 1.0, -1.0]);
        for v in &p {
            assert!((v - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn projection_identities() {
        let w = space(&[vec![2.0, -1.0, 0.0, 3.0], vec![0.0, 1.0, 1.0, -1.0]]);
        let v = vec![1.0, -2.0, 0.5, 4.0];
        let pw = w.project(&v);
        let pperp = w.min_norm_point(&v);
        let total = dense::add(&pw, &pperp);
        assert!(norm_inf(&sub(&total, &v)) < 1e-10);
        assert!(w.contains(&pw));
        assert!(norm_inf(&w.kernel_rows().matvec(&pperp)) < 1e-10);
    }

    #[test]
    fn closure_adds_dependent_column() {
        let w = space(&[vec![1.0, 0.0, 1.0], vec![0.0, 1.0, 1.0]]);
        assert_eq!(w.closure(&[0, 1]), vec![0, 1, 2]);
        assert_eq!(w.closure(&[0]), vec![0]);
        assert_eq!(w.closure(&[]), Vec::<usize>::new());
    }

    #[test]
    fn project_coords_of_line() {
        let w = space(&[vec![1.0, 0.0, 1.0], vec![0.0, 1.0, 1.0]]);
        // W = span{(−1,−1,1)}; its projection to the first two coordinates
        // is the diagonal line span{(1,1)}.
        let p = w.project_coords(&[0, 1]).unwrap();
        assert_eq!(p.dim(), 1);
        assert!(p.contains(&[1.0, 1.0]));
        assert!(!p.contains(&[1.0, -1.0]));
    }

    #[test]
    fn fix_coords_of_sum_space() {
        let w = space(&[vec![1.0, 1.0, 1.0]]);
        let f = w.fix_coords(&[0, 1]).unwrap();
        assert_eq!(f.dim(), 1);
        assert!(f.contains(&[1.0, -1.0]));
        assert!(!f.contains(&[1.0, 1.0]));
    }

    #[test]
    fn dual_is_involutive() {
        let w = space(&[vec![1.0, 2.0, -1.0]]);
        let wdd = w.dual().unwrap().dual().unwrap();
        assert_eq!(wdd.dim(), w.dim());
        for r in 0..w.kernel_rows().nrows() {
            assert!(wdd.contains(w.kernel_rows().row(r)));
        }
    }

    #[test]
    fn certificate_fires_above_estimate() {
        let w = space(&[vec![1.0, 10.0]]);
        let cert = check_lift_certificate(&w, &[1], &[1.0], 2.0)
            .unwrap()
            .expect("ratio 10 must contradict M = 2");
        assert!((cert.ratio - 10.0).abs() < 1e-9);
        let mut m = ConditionEstimate::new(2.0).unwrap();
        assert_eq!(m.bump(cert.ratio), 20.0);
    }

    #[test]
    fn certificate_respects_true_bound() {
        let w = space(&[vec![1.0, 10.0]]);
        // M = 10 equals the worst ratio; no certificate may be issued.
        let cert = check_lift_certificate(&w, &[1], &[1.0], 10.0).unwrap();
        assert!(cert.is_none());
    }

    #[test]
    fn full_space_lift_pads_zeros() {
        let w = SubspaceRep::full(3, &t());
        let z = w.lift(&[1], &[5.0]).unwrap();
        assert_eq!(z, vec![0.0, 5.0, 0.0]);
        assert_eq!(w.dim(), 3);
        assert_eq!(w.min_norm_point(&[1.0, 2.0, 3.0]), vec![0.0, 0.0, 0.0]);
    }
}
