//! Exact rational linear algebra used by the verification backend.
//!
//! Floating-point inputs are converted to rationals *exactly* (every finite
//! `f64` is a dyadic rational), so the verified statements are about the
//! numbers the solver actually worked with, not about a rounded
//! reinterpretation of them.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::dense::Matrix;
use crate::error::{Error, Result};

/// Exact rational scalar.
pub type Rational = BigRational;

/// The exact rational equal to the given finite `f64`.
pub fn rat_from_f64(x: f64) -> Result<Rational> {
    BigRational::from_float(x).ok_or(Error::NonFinite("rational conversion"))
}

/// Rounds a rational to the nearest `f64` (for display and tolerance-level
/// comparisons only).
pub fn rat_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Converts a float vector exactly.
pub fn rat_vec(v: &[f64]) -> Result<Vec<Rational>> {
    v.iter().map(|&x| rat_from_f64(x)).collect()
}

/// `Σ|vᵢ|` exactly.
pub fn rat_norm_1(v: &[Rational]) -> Rational {
    v.iter().fold(Rational::zero(), |acc, x| acc + x.abs())
}

/// `max|vᵢ|` exactly.
pub fn rat_norm_inf(v: &[Rational]) -> Rational {
    v.iter()
        .fold(Rational::zero(), |acc, x| acc.max(x.abs()))
}

/// `⟨a, b⟩` exactly.
pub fn rat_dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter()
        .zip(b)
        .fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}

/// Dense row-major matrix over the rationals.
#[derive(Debug, Clone, PartialEq)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl RatMatrix {
    /// Zero matrix.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMatrix {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    /// Identity matrix.
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rational::one();
        }
        m
    }

    /// Exact conversion of a float matrix.
    pub fn from_f64(m: &Matrix) -> Result<Self> {
        let mut out = Self::zeros(m.nrows(), m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                out[(i, j)] = rat_from_f64(m[(i, j)])?;
            }
        }
        Ok(out)
    }

    /// Builds from integer entries (handy in tests and generators).
    pub fn from_ints(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut out = Self::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows");
            for (j, &v) in row.iter().enumerate() {
                out[(i, j)] = Rational::from_integer(BigInt::from(v));
            }
        }
        out
    }

    /// Builds from rational rows with an explicit column count.
    pub fn from_rows_dims(rows: &[Vec<Rational>], cols: usize) -> Self {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            assert_eq!(row.len(), cols, "ragged rows");
            data.extend_from_slice(row);
        }
        RatMatrix {
            rows: rows.len(),
            cols,
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
    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Column `j` as a fresh vector.
    pub fn col(&self, j: usize) -> Vec<Rational> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    /// Matrix with the listed columns, in order.
    pub fn select_cols(&self, idx: &[usize]) -> RatMatrix {
        let mut out = Self::zeros(self.rows, idx.len());
        for i in 0..self.rows {
            for (k, &j) in idx.iter().enumerate() {
                out[(i, k)] = self[(i, j)].clone();
            }
        }
        out
    }

    /// Transpose.
    pub fn transpose(&self) -> RatMatrix {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].clone();
            }
        }
        out
    }

    /// `A·v`.
    pub fn matvec(&self, v: &[Rational]) -> Vec<Rational> {
        debug_assert_eq!(v.len(), self.cols);
        (0..self.rows).map(|i| rat_dot(self.row(i), v)).collect()
    }

    /// `Aᵀ·v`.
    pub fn tr_matvec(&self, v: &[Rational]) -> Vec<Rational> {
        debug_assert_eq!(v.len(), self.rows);
        let mut out = vec![Rational::zero(); self.cols];
        for i in 0..self.rows {
            if !v[i].is_zero() {
                for (j, o) in out.iter_mut().enumerate() {
                    *o += &v[i] * &self[(i, j)];
                }
            }
        }
        out
    }

    /// `A·B`.
    pub fn matmul(&self, other: &RatMatrix) -> RatMatrix {
        assert_eq!(self.cols, other.rows, "shape mismatch in matmul");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                if !self[(i, k)].is_zero() {
                    for j in 0..other.cols {
                        let t = &self[(i, k)] * &other[(k, j)];
                        out[(i, j)] += t;
                    }
                }
            }
        }
        out
    }

    /// Approximate float image (display/diagnostics only).
    pub fn to_f64(&self) -> Matrix {
        let mut out = Matrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(i, j)] = rat_to_f64(&self[(i, j)]);
            }
        }
        out
    }
}

impl std::ops::Index<(usize, usize)> for RatMatrix {
    type Output = Rational;
    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for RatMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        &mut self.data[i * self.cols + j]
    }
}

/// Exact Gauss–Jordan reduction in place, optionally carrying a right-hand
/// side. Returns the pivot positions `(row, col)` in order.
pub fn rref(m: &mut RatMatrix, mut rhs: Option<&mut Vec<Rational>>) -> Vec<(usize, usize)> {
    let rows = m.nrows();
    let cols = m.ncols();
    let mut pivots = Vec::new();
    let mut r = 0usize;
    for j in 0..cols {
        if r == rows {
            break;
        }
        // First nonzero entry in column j at or below row r.
        let Some(p) = (r..rows).find(|&i| !m[(i, j)].is_zero()) else {
            continue;
        };
        if p != r {
            for jj in 0..cols {
                let t = m[(p, jj)].clone();
                m[(p, jj)] = m[(r, jj)].clone();
                m[(r, jj)] = t;
            }
            if let Some(b) = rhs.as_deref_mut() {
                b.swap(p, r);
            }
        }
        let piv = m[(r, j)].clone();
        for jj in 0..cols {
            m[(r, jj)] = &m[(r, jj)] / &piv;
        }
        if let Some(b) = rhs.as_deref_mut() {
            b[r] = &b[r] / &piv;
        }
        for i in 0..rows {
            if i != r && !m[(i, j)].is_zero() {
                let f = m[(i, j)].clone();
                for jj in 0..cols {
                    let t = &f * &m[(r, jj)];
                    m[(i, jj)] -= t;
                }
                if let Some(b) = rhs.as_deref_mut() {
                    let t = &f * &b[r];
                    b[i] -= t;
                }
            }
        }
        pivots.push((r, j));
        r += 1;
    }
    pivots
}

/// Exact rank.
pub fn rank_exact(m: &RatMatrix) -> usize {
    let mut work = m.clone();
    rref(&mut work, None).len()
}

/// Exact basis of `ker(m)`, one row per free column.
pub fn kernel_basis(m: &RatMatrix) -> Vec<Vec<Rational>> {
    let mut work = m.clone();
    let pivots = rref(&mut work, None);
    let n = m.ncols();
    let pivot_cols: Vec<usize> = pivots.iter().map(|&(_, c)| c).collect();
    let mut basis = Vec::new();
    for j in 0..n {
        if pivot_cols.contains(&j) {
            continue;
        }
        let mut v = vec![Rational::zero(); n];
        v[j] = Rational::one();
        for &(pr, pc) in &pivots {
            v[pc] = -work[(pr, j)].clone();
        }
        basis.push(v);
    }
    basis
}

/// Exact solve of a consistent (possibly rank-deficient) system `A x = b`,
/// free variables at zero. Returns `None` when the system is inconsistent.
pub fn solve_exact(a: &RatMatrix, b: &[Rational]) -> Option<Vec<Rational>> {
    let mut work = a.clone();
    let mut rhs = b.to_vec();
    let pivots = rref(&mut work, Some(&mut rhs));
    let pivot_rows: Vec<usize> = pivots.iter().map(|&(r, _)| r).collect();
    for i in 0..a.nrows() {
        if !pivot_rows.contains(&i) && !rhs[i].is_zero() {
            return None;
        }
    }
    let mut x = vec![Rational::zero(); a.ncols()];
    for &(r, c) in &pivots {
        x[c] = rhs[r].clone();
    }
    Some(x)
}

/// Exact solve of a square nonsingular system; `None` when singular.
pub fn solve_square_exact(a: &RatMatrix, b: &[Rational]) -> Option<Vec<Rational>> {
    if a.nrows() != a.ncols() {
        return None;
    }
    let mut work = a.clone();
    let mut rhs = b.to_vec();
    let pivots = rref(&mut work, Some(&mut rhs));
    if pivots.len() != a.nrows() {
        return None;
    }
    let mut x = vec![Rational::zero(); a.ncols()];
    for &(r, c) in &pivots {
        x[c] = rhs[r].clone();
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_conversion_is_exact() {
        let x = 0.1f64;
        let r = rat_from_f64(x).unwrap();
        // 0.1 is not 1/10 in binary; the conversion must preserve the
        // actual dyadic value, so converting back is lossless.
        assert_eq!(rat_to_f64(&r), x);
        assert_ne!(
            r,
            Rational::new(BigInt::from(1), BigInt::from(10)),
            "0.1f64 is not one tenth"
        );
    }

    #[test]
    fn kernel_of_sum_constraint() {
        let m = RatMatrix::from_ints(&[vec![1, 1, 1]]);
        let k = kernel_basis(&m);
        assert_eq!(k.len(), 2);
        for v in &k {
            assert!(rat_dot(&rat_vec(&[1.0, 1.0, 1.0]).unwrap(), v).is_zero());
        }
    }

    #[test]
    fn solve_detects_inconsistency() {
        let a = RatMatrix::from_ints(&[vec![1, 1], vec![1, 1]]);
        let b = rat_vec(&[1.0, 2.0]).unwrap();
        assert!(solve_exact(&a, &b).is_none());
        let b2 = rat_vec(&[1.0, 1.0]).unwrap();
        let x = solve_exact(&a, &b2).unwrap();
        assert_eq!(rat_dot(&rat_vec(&[1.0, 1.0]).unwrap(), &x), b2[0]);
    }

    #[test]
    fn square_solve_roundtrip() {
        let a = RatMatrix::from_ints(&[vec![2, 1], vec![1, 3]]);
        let b = rat_vec(&[5.0, 10.0]).unwrap();
        let x = solve_square_exact(&a, &b).unwrap();
        assert_eq!(a.matvec(&x), b);
    }

    #[test]
    fn rank_counts_independent_rows() {
        let a = RatMatrix::from_ints(&[vec![1, 2, 3], vec![2, 4, 6], vec![0, 1, 1]]);
        assert_eq!(rank_exact(&a), 2);
    }
}
