//! Dense real vectors and matrices with the factorizations the framework
//! needs: Gauss–Jordan normalization with pivot tracking, least-squares
//! solves, and orthogonal projections.
//!
//! Everything here is deliberately small and deterministic: partial pivoting
//! by maximum absolute value, ties broken by lowest index, explicit
//! column-permutation tracking so basis sets remain index sets of the
//! original columns. Double precision throughout; the exact rational backend
//! lives in [`crate::verify`].

use crate::error::{Error, Result};
use crate::tol::Tolerance;

/// Dense real vector. Public operations neither accept nor produce NaN/Inf.
pub type Vector = Vec<f64>;

// ---------------------------------------------------------------------------
// Vector helpers
// ---------------------------------------------------------------------------

/// ℓ₁ norm.
pub fn norm_1(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

/// ℓ₂ norm.
pub fn norm_2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// ℓ∞ norm.
pub fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

/// Standard inner product.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Coordinatewise positive part `v⁺`.
pub fn pos_part(v: &[f64]) -> Vector {
    v.iter().map(|&x| x.max(0.0)).collect()
}

/// Coordinatewise negative part `v⁻` (so `v = v⁺ − v⁻`, both nonnegative).
pub fn neg_part(v: &[f64]) -> Vector {
    v.iter().map(|&x| (-x).max(0.0)).collect()
}

/// `a − b` coordinatewise.
pub fn sub(a: &[f64], b: &[f64]) -> Vector {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// `a + b` coordinatewise.
pub fn add(a: &[f64], b: &[f64]) -> Vector {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// `c · v`.
pub fn scale(v: &[f64], c: f64) -> Vector {
    v.iter().map(|x| c * x).collect()
}

/// Gathers the coordinates of `v` indexed by `idx`, in the order given.
pub fn gather(v: &[f64], idx: &[usize]) -> Vector {
    idx.iter().map(|&i| v[i]).collect()
}

/// Scatters `vals` into a zero vector of length `n` at positions `idx`.
pub fn scatter(n: usize, idx: &[usize], vals: &[f64]) -> Vector {
    debug_assert_eq!(idx.len(), vals.len());
    let mut out = vec![0.0; n];
    for (&i, &v) in idx.iter().zip(vals) {
        out[i] = v;
    }
    out
}

/// True when every entry is finite.
pub fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// Support of `v` above an absolute threshold.
pub fn support(v: &[f64], thresh: f64) -> Vec<usize> {
    (0..v.len()).filter(|&i| v[i].abs() > thresh).collect()
}

// ---------------------------------------------------------------------------
// Matrix
// ---------------------------------------------------------------------------

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// Zero matrix of the given shape.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Identity matrix.
    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Builds a matrix from row slices with an explicit column count, so an
    /// empty row list still produces a `0×cols` matrix.
    pub fn from_rows_dims(rows: &[Vec<f64>], cols: usize) -> Self {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            assert_eq!(row.len(), cols, "ragged rows");
            data.extend_from_slice(row);
        }
        Matrix {
            rows: rows.len(),
            cols,
            data,
        }
    }

    /// Builds a matrix from row slices; all rows must share a length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Matrix {
            rows: r,
            cols: c,
            data,
        }
    }

    /// Number of rows.
    pub fn nrows(&self) -> usize {
        self.rows
    }

    /// Number of columns.
    pub fn ncols(&self) -> usize {
        self.cols
    }

    /// Row `i` as a slice.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Mutable row `i`.
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Column `j` as a fresh vector.
    pub fn col(&self, j: usize) -> Vector {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    /// Matrix with the listed columns, in the order given.
    pub fn select_cols(&self, idx: &[usize]) -> Matrix {
        let mut out = Matrix::zeros(self.rows, idx.len());
        for i in 0..self.rows {
            for (k, &j) in idx.iter().enumerate() {
                out[(i, k)] = self[(i, j)];
            }
        }
        out
    }

    /// Matrix with the listed rows, in the order given.
    pub fn select_rows(&self, idx: &[usize]) -> Matrix {
        let mut out = Matrix::zeros(idx.len(), self.cols);
        for (k, &i) in idx.iter().enumerate() {
            out.row_mut(k).copy_from_slice(self.row(i));
        }
        out
    }

    /// Transpose.
    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    /// `A·v`.
    pub fn matvec(&self, v: &[f64]) -> Vector {
        debug_assert_eq!(v.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    /// `Aᵀ·v`.
    pub fn tr_matvec(&self, v: &[f64]) -> Vector {
        debug_assert_eq!(v.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            let vi = v[i];
            if vi != 0.0 {
                for (j, o) in out.iter_mut().enumerate() {
                    *o += vi * self[(i, j)];
                }
            }
        }
        out
    }

    /// `A·B`.
    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "shape mismatch in matmul");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self[(i, k)];
                if aik != 0.0 {
                    for j in 0..other.cols {
                        out[(i, j)] += aik * other[(k, j)];
                    }
                }
            }
        }
        out
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc: f64, x| acc.max(x.abs()))
    }

    /// Frobenius norm.
    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// True when every entry is finite.
    pub fn all_finite(&self) -> bool {
        all_finite(&self.data)
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

// ---------------------------------------------------------------------------
// Gauss–Jordan normalization
// ---------------------------------------------------------------------------

/// One recorded row operation of [`gaussian_normalize`].
#[derive(Debug, Clone, PartialEq)]
pub enum RowOp {
    /// Rows `a` and `b` exchanged.
    Swap(usize, usize),
    /// Row `row` multiplied by `factor`.
    Scale { row: usize, factor: f64 },
    /// `factor` times row `src` subtracted from row `dst`.
    Eliminate { dst: usize, src: f64, row: usize },
    /// Row `row` dropped as all-zero (redundant).
    Drop(usize),
}

/// Result of [`gaussian_normalize`]: a kernel-preserving matrix in the form
/// `(I | T)` up to column permutation, plus the pivot bookkeeping.
#[derive(Debug, Clone)]
pub struct NormalizedSystem {
    /// The normalized matrix; `ker(n_matrix) = ker(A)`.
    pub n_matrix: Matrix,
    /// Basis columns (original indices, increasing); they carry the identity
    /// block.
    pub basis: Vec<usize>,
    /// Row operations applied, in order.
    pub ops: Vec<RowOp>,
    /// Number of all-zero/redundant rows dropped.
    pub dropped: usize,
}

/// Gauss–Jordan elimination with partial pivoting and column-permutation
/// tracking.
///
/// Returns a matrix `N` with `ker(N) = ker(A)` whose columns indexed by the
/// returned basis form the identity. All-zero rows (within `zero_tol`
/// relative to the matrix scale) are dropped up front, and rows that become
/// all-zero during elimination are dropped as redundant. A row that is
/// neither pivotable nor negligible means the input sat between "dependent"
/// and "independent" at the working precision and is reported as
/// [`Error::RankDeficient`].
pub fn gaussian_normalize(a: &Matrix, tol: &Tolerance) -> Result<NormalizedSystem> {
    if !a.all_finite() {
        return Err(Error::NonFinite("gaussian_normalize input"));
    }
    let scale_ref = a.max_abs().max(1.0);
    let drop_tol = tol.zero_tol * scale_ref;

    let mut ops = Vec::new();
    let mut dropped = 0usize;

    // Drop rows that are all-zero in the input.
    let mut work: Vec<Vec<f64>> = Vec::with_capacity(a.nrows());
    for i in 0..a.nrows() {
        if a.row(i).iter().all(|x| x.abs() <= drop_tol) {
            ops.push(RowOp::Drop(i));
            dropped += 1;
        } else {
            work.push(a.row(i).to_vec());
        }
    }

    let n = a.ncols();
    let m = work.len();
    let mut basis = Vec::new();
    let mut r = 0usize;

    for j in 0..n {
        if r == m {
            break;
        }
        // Partial pivoting: the largest |entry| in column j among rows r..m,
        // ties broken by the lowest row index.
        let mut best = r;
        let mut best_val = work[r][j].abs();
        for (i, row) in work.iter().enumerate().skip(r + 1) {
            if row[j].abs() > best_val {
                best = i;
                best_val = row[j].abs();
            }
        }
        if best_val <= drop_tol {
            continue; // column j carries no pivot at this tolerance
        }
        if best != r {
            work.swap(best, r);
            ops.push(RowOp::Swap(best, r));
        }
        let piv = work[r][j];
        let inv = 1.0 / piv;
        for x in work[r].iter_mut() {
            *x *= inv;
        }
        work[r][j] = 1.0;
        ops.push(RowOp::Scale { row: r, factor: inv });
        for i in 0..m {
            if i == r {
                continue;
            }
            let f = work[i][j];
            if f != 0.0 {
                let (src_row, dst_row) = if i < r {
                    let (lo, hi) = work.split_at_mut(r);
                    (&hi[0], &mut lo[i])
                } else {
                    let (lo, hi) = work.split_at_mut(i);
                    (&lo[r], &mut hi[0])
                };
                for (d, s) in dst_row.iter_mut().zip(src_row.iter()) {
                    *d -= f * s;
                }
                dst_row[j] = 0.0;
                ops.push(RowOp::Eliminate {
                    dst: i,
                    src: f,
                    row: r,
                });
            }
        }
        basis.push(j);
        r += 1;
    }

    // Unpivoted rows must be negligible (exact redundancy plus roundoff).
    let mut keep: Vec<Vec<f64>> = work.drain(..r).collect();
    for (k, row) in work.iter().enumerate() {
        let mx = row.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
        if mx <= tol.residual_tol * scale_ref {
            ops.push(RowOp::Drop(r + k));
            dropped += 1;
        } else {
            return Err(Error::RankDeficient(format!(
                "row stuck between dependent and independent (residual {mx:.3e})"
            )));
        }
    }
    // Exact zeros on basis columns and exact unit pivots hold by
    // construction; nothing further to clean.
    let n_matrix = Matrix::from_rows_dims(&keep.drain(..).collect::<Vec<_>>(), n);
    Ok(NormalizedSystem {
        n_matrix,
        basis,
        ops,
        dropped,
    })
}

// ---------------------------------------------------------------------------
// Linear solves
// ---------------------------------------------------------------------------

/// Solves the square system `A x = b` by Gaussian elimination with partial
/// pivoting.
pub fn solve_square(a: &Matrix, b: &[f64], tol: &Tolerance) -> Result<Vector> {
    let n = a.nrows();
    if a.ncols() != n || b.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "solve_square got {}×{} with rhs {}",
            a.nrows(),
            a.ncols(),
            b.len()
        )));
    }
    let mut m = a.clone();
    let mut rhs = b.to_vec();
    let scale_ref = m.max_abs().max(1.0);
    for k in 0..n {
        let mut best = k;
        let mut best_val = m[(k, k)].abs();
        for i in k + 1..n {
            if m[(i, k)].abs() > best_val {
                best = i;
                best_val = m[(i, k)].abs();
            }
        }
        if best_val <= tol.zero_tol * scale_ref {
            return Err(Error::RankDeficient(format!(
                "pivot {best_val:.3e} below tolerance in column {k}"
            )));
        }
        if best != k {
            for j in 0..n {
                let t = m[(k, j)];
                m[(k, j)] = m[(best, j)];
                m[(best, j)] = t;
            }
            rhs.swap(k, best);
        }
        for i in k + 1..n {
            let f = m[(i, k)] / m[(k, k)];
            if f != 0.0 {
                for j in k..n {
                    let v = m[(k, j)];
                    m[(i, j)] -= f * v;
                }
                rhs[i] -= f * rhs[k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let mut s = rhs[k];
        for j in k + 1..n {
            s -= m[(k, j)] * x[j];
        }
        x[k] = s / m[(k, k)];
    }
    Ok(x)
}

/// Least-squares solve.
///
/// For a matrix with full column rank this returns `argmin ‖Ax − b‖₂` via
/// the normal equations; for full row rank (underdetermined) it returns the
/// minimum-norm solution `Aᵀ(AAᵀ)⁻¹b`. Square nonsingular systems solve
/// directly.
pub fn least_squares(a: &Matrix, b: &[f64], tol: &Tolerance) -> Result<Vector> {
    if b.len() != a.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "least_squares got {}×{} with rhs {}",
            a.nrows(),
            a.ncols(),
            b.len()
        )));
    }
    if a.nrows() == a.ncols() {
        if let Ok(x) = solve_square(a, b, tol) {
            return Ok(x);
        }
    }
    if a.nrows() >= a.ncols() {
        // Overdetermined: AᵀA x = Aᵀ b.
        let at = a.transpose();
        let gram = at.matmul(a);
        let rhs = a.tr_matvec(b);
        solve_square(&gram, &rhs, tol)
    } else {
        // Underdetermined: x = Aᵀ y with A Aᵀ y = b (minimum-norm solution).
        let at = a.transpose();
        let gram = a.matmul(&at);
        let y = solve_square(&gram, b, tol)?;
        Ok(a.tr_matvec(&y))
    }
}

/// Solves `A x = b` for a possibly rank-deficient but consistent system.
///
/// Returns the particular solution with free variables set to zero together
/// with the residual norm `‖Ax − b‖∞`; the caller decides whether the
/// residual certifies inconsistency.
pub fn solve_consistent(a: &Matrix, b: &[f64], tol: &Tolerance) -> Result<(Vector, f64)> {
    if b.len() != a.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "solve_consistent got {}×{} with rhs {}",
            a.nrows(),
            a.ncols(),
            b.len()
        )));
    }
    let m = a.nrows();
    let n = a.ncols();
    let mut work = a.clone();
    let mut rhs = b.to_vec();
    let scale_ref = work.max_abs().max(1.0);
    let piv_tol = tol.zero_tol * scale_ref;

    let mut pivots: Vec<(usize, usize)> = Vec::new(); // (row, col)
    let mut r = 0usize;
    for j in 0..n {
        if r == m {
            break;
        }
        let mut best = r;
        let mut best_val = work[(r, j)].abs();
        for i in r + 1..m {
            if work[(i, j)].abs() > best_val {
                best = i;
                best_val = work[(i, j)].abs();
            }
        }
        if best_val <= piv_tol {
            continue;
        }
        if best != r {
            for jj in 0..n {
                let t = work[(r, jj)];
                work[(r, jj)] = work[(best, jj)];
                work[(best, jj)] = t;
            }
            rhs.swap(r, best);
        }
        for i in r + 1..m {
            let f = work[(i, j)] / work[(r, j)];
            if f != 0.0 {
                for jj in j..n {
                    let v = work[(r, jj)];
                    work[(i, jj)] -= f * v;
                }
                rhs[i] -= f * rhs[r];
            }
        }
        pivots.push((r, j));
        r += 1;
    }

    // Back-substitution with free variables at zero.
    let mut x = vec![0.0; n];
    for &(row, col) in pivots.iter().rev() {
        let mut s = rhs[row];
        for j in col + 1..n {
            s -= work[(row, j)] * x[j];
        }
        x[col] = s / work[(row, col)];
    }
    let resid = sub(&a.matvec(&x), b);
    Ok((x, norm_inf(&resid)))
}

// ---------------------------------------------------------------------------
// Orthogonal projection
// ---------------------------------------------------------------------------

/// Orthonormal basis of the row space of `m`, by modified Gram–Schmidt with
/// near-zero rows dropped.
pub fn orthonormal_rows(m: &Matrix, tol: &Tolerance) -> Matrix {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for i in 0..m.nrows() {
        let mut v = m.row(i).to_vec();
        let original = norm_2(&v).max(1.0);
        for q in &basis {
            let c = dot(q, &v);
            for (vk, qk) in v.iter_mut().zip(q.iter()) {
                *vk -= c * qk;
            }
        }
        // Second pass for numerical orthogonality.
        for q in &basis {
            let c = dot(q, &v);
            for (vk, qk) in v.iter_mut().zip(q.iter()) {
                *vk -= c * qk;
            }
        }
        let nv = norm_2(&v);
        if nv > tol.zero_tol * original {
            let inv = 1.0 / nv;
            for vk in v.iter_mut() {
                *vk *= inv;
            }
            basis.push(v);
        }
    }
    Matrix::from_rows_dims(&basis, m.ncols())
}

/// Orthogonal projection of `v` onto the row space of `m`.
///
/// Idempotent within tolerance; the residual `v − proj` is orthogonal to
/// every row of `m`.
pub fn project_orthogonal(m: &Matrix, v: &[f64], tol: &Tolerance) -> Vector {
    let q = orthonormal_rows(m, tol);
    project_onto_orthonormal(&q, v)
}

/// Projection onto the span of the (already orthonormal) rows of `q`.
pub fn project_onto_orthonormal(q: &Matrix, v: &[f64]) -> Vector {
    let mut out = vec![0.0; v.len()];
    for i in 0..q.nrows() {
        let c = dot(q.row(i), v);
        for (o, qk) in out.iter_mut().zip(q.row(i)) {
            *o += c * qk;
        }
    }
    out
}

/// Solves the symmetric positive-definite system `M x = b` by Cholesky
/// factorization, with a small diagonal shift retried a few times if the
/// factorization breaks down.
pub fn solve_spd(m: &Matrix, b: &[f64]) -> Result<Vector> {
    let n = m.nrows();
    if m.ncols() != n || b.len() != n {
        return Err(Error::DimensionMismatch(
            "solve_spd expects a square system".into(),
        ));
    }
    let base = (0..n).map(|i| m[(i, i)].abs()).fold(0.0f64, f64::max);
    let mut shift = 0.0;
    for attempt in 0..6 {
        match cholesky(m, shift) {
            Some(l) => {
                // Forward/backward substitution.
                let mut y = b.to_vec();
                for i in 0..n {
                    let mut s = y[i];
                    for j in 0..i {
                        s -= l[(i, j)] * y[j];
                    }
                    y[i] = s / l[(i, i)];
                }
                for i in (0..n).rev() {
                    let mut s = y[i];
                    for j in i + 1..n {
                        s -= l[(j, i)] * y[j];
                    }
                    y[i] = s / l[(i, i)];
                }
                return Ok(y);
            }
            None => {
                shift = if attempt == 0 {
                    base * 1e-14 + f64::MIN_POSITIVE
                } else {
                    shift * 100.0
                };
            }
        }
    }
    Err(Error::NumericalBreakdown(
        "Cholesky failed after diagonal shifts".into(),
    ))
}

fn cholesky(m: &Matrix, shift: f64) -> Option<Matrix> {
    let n = m.nrows();
    let mut l = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut s = m[(i, j)] + if i == j { shift } else { 0.0 };
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            if i == j {
                if s <= 0.0 || !s.is_finite() {
                    return None;
                }
                l[(i, j)] = s.sqrt();
            } else {
                l[(i, j)] = s / l[(j, j)];
            }
        }
    }
    Some(l)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn normalize_already_normalized() {
        let a = Matrix::from_rows(&[vec![1.0, 1.0, 1.0]]);
        let ns = gaussian_normalize(&a, &t()).unwrap();
        assert_eq!(ns.basis, vec![0]);
        assert_eq!(ns.n_matrix.row(0), &[1.0, 1.0, 1.0]);
    }

    #[test]
    fn normalize_scales_row() {
        let a = Matrix::from_rows(&[vec![2.0, 4.0]]);
        let ns = gaussian_normalize(&a, &t()).unwrap();
        assert_eq!(ns.basis, vec![0]);
        assert_eq!(ns.n_matrix.row(0), &[1.0, 2.0]);
    }

    #[test]
    fn normalize_keeps_identity_block() {
        let a = Matrix::from_rows(&[vec![1.0, 0.0, 1.0], vec![0.0, 1.0, 1.0]]);
        let ns = gaussian_normalize(&a, &t()).unwrap();
        assert_eq!(ns.basis, vec![0, 1]);
        assert_eq!(ns.n_matrix.row(0), &[1.0, 0.0, 1.0]);
        assert_eq!(ns.n_matrix.row(1), &[0.0, 1.0, 1.0]);
    }

    #[test]
    fn normalize_drops_redundant_row() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]);
        let ns = gaussian_normalize(&a, &t()).unwrap();
        assert_eq!(ns.n_matrix.nrows(), 1);
        assert_eq!(ns.dropped, 1);
    }

    #[test]
    fn normalize_preserves_kernel() {
        let a = Matrix::from_rows(&[vec![2.0, 1.0, -1.0], vec![1.0, -1.0, 3.0]]);
        let ns = gaussian_normalize(&a, &t()).unwrap();
        // x in ker(A) iff x in ker(N): check on a kernel vector of A.
        // ker is spanned by cross product of the two rows.
        let k = vec![
            1.0 * 3.0 - (-1.0) * (-1.0),
            -(2.0 * 3.0 - (-1.0) * 1.0),
            2.0 * (-1.0) - 1.0 * 1.0,
        ];
        let r = ns.n_matrix.matvec(&k);
        assert!(norm_inf(&r) < 1e-12 * norm_inf(&k));
    }

    #[test]
    fn least_squares_mean() {
        let a = Matrix::from_rows(&[vec![1.0], vec![1.0]]);
        let x = least_squares(&a, &[1.0, 3.0], &t()).unwrap();
        assert!((x[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn least_squares_identity() {
        let a = Matrix::identity(2);
        let x = least_squares(&a, &[5.0, 7.0], &t()).unwrap();
        assert_eq!(x, vec![5.0, 7.0]);
    }

    #[test]
    fn least_squares_min_norm() {
        let a = Matrix::from_rows(&[vec![1.0, 1.0]]);
        let x = least_squares(&a, &[4.0], &t()).unwrap();
        assert!((x[0] - 2.0).abs() < 1e-12 && (x[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn least_squares_residual_orthogonal() {
        let a = Matrix::from_rows(&[vec![1.0, 0.0], vec![1.0, 1.0], vec![1.0, 2.0]]);
        let b = vec![1.0, 0.0, 2.0];
        let x = least_squares(&a, &b, &t()).unwrap();
        let r = sub(&a.matvec(&x), &b);
        let g = a.tr_matvec(&r);
        assert!(norm_inf(&g) < 1e-10);
    }

    #[test]
    fn projection_onto_all_ones() {
        let m = Matrix::from_rows(&[vec![1.0, 1.0, 1.0]]);
        let p = project_orthogonal(&m, &[1.0, 1.0, -1.0], &t());
        for v in &p {
            assert!((v - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn projection_idempotent() {
        let m = Matrix::from_rows(&[vec![1.0, 2.0, 0.0], vec![0.0, 1.0, -1.0]]);
        let v = vec![0.3, -1.2, 2.0];
        let p1 = project_orthogonal(&m, &v, &t());
        let p2 = project_orthogonal(&m, &p1, &t());
        assert!(norm_inf(&sub(&p1, &p2)) < 1e-10);
        // Residual orthogonal to each row.
        let r = sub(&v, &p1);
        for i in 0..m.nrows() {
            assert!(dot(m.row(i), &r).abs() < 1e-10);
        }
    }

    #[test]
    fn projection_symmetry() {
        let m = Matrix::from_rows(&[vec![1.0, 1.0]]);
        let p = project_orthogonal(&m, &[-1.0, 0.0], &t());
        assert!((p[0] + 0.5).abs() < 1e-12 && (p[1] + 0.5).abs() < 1e-12);
    }

    #[test]
    fn solve_consistent_underdetermined() {
        let a = Matrix::from_rows(&[vec![1.0, 1.0, 0.0], vec![1.0, 1.0, 0.0]]);
        let (x, res) = solve_consistent(&a, &[2.0, 2.0], &t()).unwrap();
        assert!(res < 1e-12);
        assert!((x[0] + x[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn solve_consistent_reports_residual() {
        let a = Matrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]);
        let (_, res) = solve_consistent(&a, &[1.0, 3.0], &t()).unwrap();
        assert!(res > 0.5);
    }

    #[test]
    fn spd_solve_roundtrip() {
        let a = Matrix::from_rows(&[vec![4.0, 1.0], vec![1.0, 3.0]]);
        let x = solve_spd(&a, &[1.0, 2.0]).unwrap();
        let r = sub(&a.matvec(&x), &[1.0, 2.0]);
        assert!(norm_inf(&r) < 1e-12);
    }
}
