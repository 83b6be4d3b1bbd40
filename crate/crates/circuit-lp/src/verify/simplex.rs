//! Exact two-phase simplex over the rationals, with Bland's rule.
//!
//! This is the reference solver the floating-point pipeline is tested
//! against. It is written for correctness, not speed: a full tableau of
//! `BigRational`s, reduced costs recomputed from scratch each pivot, and
//! Bland's anti-cycling rule throughout, so termination is unconditional.

use num_traits::{One, Zero};

use super::rational::{rat_dot, RatMatrix, Rational};
use crate::error::{Error, Result};

/// Exact outcome of `min ⟨c,x⟩ s.t. Ax = b, x ≥ 0`.
#[derive(Debug, Clone)]
pub enum SimplexOutcome {
    /// Optimal solution with a complementary dual vector (`Aᵀy ≤ c`,
    /// `⟨b,y⟩ = objective`).
    Optimal {
        x: Vec<Rational>,
        dual: Vec<Rational>,
        objective: Rational,
    },
    /// Farkas certificate: `Aᵀy ≤ 0` componentwise and `⟨b,y⟩ > 0`.
    Infeasible { farkas: Vec<Rational> },
    /// Feasible point plus an improving ray: `A·ray = 0`, `ray ≥ 0`,
    /// `⟨c,ray⟩ < 0`.
    Unbounded { x: Vec<Rational>, ray: Vec<Rational> },
}

const PIVOT_LIMIT: usize = 200_000;

struct Tableau {
    /// `m × (n + m)` working matrix `[A | I]` in the current basis.
    t: RatMatrix,
    rhs: Vec<Rational>,
    basis: Vec<usize>,
    /// Original row index of each active tableau row.
    orig_row: Vec<usize>,
    n: usize,
}

impl Tableau {
    fn pivot(&mut self, l: usize, e: usize) {
        let cols = self.t.ncols();
        let piv = self.t[(l, e)].clone();
        for j in 0..cols {
            self.t[(l, j)] = &self.t[(l, j)] / &piv;
        }
        self.rhs[l] = &self.rhs[l] / &piv;
        for i in 0..self.t.nrows() {
            if i != l && !self.t[(i, e)].is_zero() {
                let f = self.t[(i, e)].clone();
                for j in 0..cols {
                    let u = &f * &self.t[(l, j)];
                    self.t[(i, j)] -= u;
                }
                let u = &f * &self.rhs[l];
                self.rhs[i] -= u;
            }
        }
        self.basis[l] = e;
    }

    /// Reduced cost of column `j` under cost vector `cost`.
    fn reduced_cost(&self, cost: &[Rational], j: usize) -> Rational {
        let mut r = cost[j].clone();
        for i in 0..self.t.nrows() {
            if !cost[self.basis[i]].is_zero() {
                r -= &cost[self.basis[i]] * &self.t[(i, j)];
            }
        }
        r
    }

    /// Runs Bland-rule simplex over the columns `0..limit`. Returns the
    /// entering column when the problem is unbounded in this phase.
    fn optimize(&mut self, cost: &[Rational], limit: usize) -> Result<Option<usize>> {
        for _ in 0..PIVOT_LIMIT {
            let entering = (0..limit).find(|&j| {
                !self.basis.contains(&j) && self.reduced_cost(cost, j) < Rational::zero()
            });
            let Some(e) = entering else {
                return Ok(None);
            };
            // Ratio test: smallest rhs/T over positive column entries;
            // Bland tie-break on the basic variable index.
            let mut best: Option<(Rational, usize, usize)> = None; // (ratio, basis var, row)
            for i in 0..self.t.nrows() {
                if self.t[(i, e)] > Rational::zero() {
                    let ratio = &self.rhs[i] / &self.t[(i, e)];
                    let cand = (ratio, self.basis[i], i);
                    best = match best {
                        None => Some(cand),
                        Some(b) => {
                            if cand.0 < b.0 || (cand.0 == b.0 && cand.1 < b.1) {
                                Some(cand)
                            } else {
                                Some(b)
                            }
                        }
                    };
                }
            }
            match best {
                Some((_, _, l)) => self.pivot(l, e),
                None => return Ok(Some(e)),
            }
        }
        Err(Error::IterationLimit(PIVOT_LIMIT))
    }

    fn primal(&self) -> Vec<Rational> {
        let mut x = vec![Rational::zero(); self.n];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.n {
                x[b] = self.rhs[i].clone();
            }
        }
        x
    }

    /// `y = c_Bᵀ B⁻¹`, read from the identity block, indexed by the
    /// *original* row numbers (deleted redundant rows get zero).
    fn dual(&self, cost: &[Rational], m_orig: usize) -> Vec<Rational> {
        let mut y = vec![Rational::zero(); m_orig];
        for k in 0..self.orig_row.len() {
            let mut v = Rational::zero();
            for i in 0..self.t.nrows() {
                if !cost[self.basis[i]].is_zero() {
                    v += &cost[self.basis[i]] * &self.t[(i, self.n + k)];
                }
            }
            y[self.orig_row[k]] = v;
        }
        y
    }

    fn delete_row(&mut self, l: usize) {
        let cols = self.t.ncols();
        let mut rows: Vec<Vec<Rational>> = Vec::with_capacity(self.t.nrows() - 1);
        for i in 0..self.t.nrows() {
            if i != l {
                rows.push(self.t.row(i).to_vec());
            }
        }
        self.t = RatMatrix::from_rows_dims(&rows, cols);
        self.rhs.remove(l);
        self.basis.remove(l);
        // Note: orig_row tracks identity *columns*, which stay in place;
        // only the tableau row disappears.
    }
}

/// Solves `min ⟨c,x⟩ s.t. Ax = b, x ≥ 0` exactly.
pub fn rational_simplex(
    a: &RatMatrix,
    b: &[Rational],
    c: &[Rational],
) -> Result<SimplexOutcome> {
    let m = a.nrows();
    let n = a.ncols();
    if b.len() != m || c.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "simplex got {}×{} with |b| = {}, |c| = {}",
            m,
            n,
            b.len(),
            c.len()
        )));
    }

    // Orient rows so the right-hand side is nonnegative.
    let flip: Vec<bool> = b.iter().map(|v| *v < Rational::zero()).collect();
    let mut t = RatMatrix::zeros(m, n + m);
    let mut rhs = Vec::with_capacity(m);
    for i in 0..m {
        for j in 0..n {
            t[(i, j)] = if flip[i] {
                -a[(i, j)].clone()
            } else {
                a[(i, j)].clone()
            };
        }
        t[(i, n + i)] = Rational::one();
        rhs.push(if flip[i] { -b[i].clone() } else { b[i].clone() });
    }
    let mut tab = Tableau {
        t,
        rhs,
        basis: (n..n + m).collect(),
        orig_row: (0..m).collect(),
        n,
    };

    // Phase 1: minimize the sum of artificials.
    let mut cost1 = vec![Rational::zero(); n + m];
    for j in n..n + m {
        cost1[j] = Rational::from_integer(1.into());
    }
    let unbounded = tab.optimize(&cost1, n + m)?;
    debug_assert!(unbounded.is_none(), "phase 1 is bounded below by zero");
    let v1: Rational = tab
        .basis
        .iter()
        .zip(&tab.rhs)
        .filter(|(&bv, _)| bv >= n)
        .map(|(_, r)| r.clone())
        .fold(Rational::zero(), |acc, r| acc + r);
    if v1 > Rational::zero() {
        // Dual of phase 1 certifies infeasibility; undo row orientation.
        let y = tab.dual(&cost1, m);
        let farkas: Vec<Rational> = y
            .into_iter()
            .zip(&flip)
            .map(|(v, &f)| if f { -v } else { v })
            .collect();
        return Ok(SimplexOutcome::Infeasible { farkas });
    }

    // Drive remaining artificials (all at value zero) out of the basis.
    let mut l = 0;
    while l < tab.basis.len() {
        if tab.basis[l] >= n {
            match (0..n).find(|&j| !tab.t[(l, j)].is_zero()) {
                Some(j) => tab.pivot(l, j),
                None => {
                    tab.delete_row(l);
                    continue; // row was redundant; same index now holds the next row
                }
            }
        }
        l += 1;
    }

    // Phase 2 over the original columns only.
    let mut cost2 = vec![Rational::zero(); n + m];
    cost2[..n].clone_from_slice(c);
    match tab.optimize(&cost2, n)? {
        Some(e) => {
            let x = tab.primal();
            let mut ray = vec![Rational::zero(); n];
            ray[e] = Rational::from_integer(1.into());
            for i in 0..tab.t.nrows() {
                if tab.basis[i] < n {
                    ray[tab.basis[i]] = -tab.t[(i, e)].clone();
                }
            }
            Ok(SimplexOutcome::Unbounded { x, ray })
        }
        None => {
            let x = tab.primal();
            let objective = rat_dot(c, &x);
            let y = tab.dual(&cost2, m);
            let dual: Vec<Rational> = y
                .into_iter()
                .zip(&flip)
                .map(|(v, &f)| if f { -v } else { v })
                .collect();
            Ok(SimplexOutcome::Optimal {
                x,
                dual,
                objective,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::rational::{rat_to_f64, rat_vec};

    fn r(v: &[f64]) -> Vec<Rational> {
        rat_vec(v).unwrap()
    }

    #[test]
    fn solves_a_textbook_lp() {
        // min −x₁ − 2x₂ s.t. x₁ + x₂ + x₃ = 4, x₁ + 3x₂ + x₄ = 6, x ≥ 0.
        let a = RatMatrix::from_ints(&[vec![1, 1, 1, 0], vec![1, 3, 0, 1]]);
        let out = rational_simplex(&a, &r(&[4.0, 6.0]), &r(&[-1.0, -2.0, 0.0, 0.0])).unwrap();
        match out {
            SimplexOutcome::Optimal { objective, x, dual } => {
                assert_eq!(rat_to_f64(&objective), -5.0);
                assert_eq!(rat_to_f64(&x[0]), 3.0);
                assert_eq!(rat_to_f64(&x[1]), 1.0);
                // Dual feasibility and strong duality, exactly.
                let c = r(&[-1.0, -2.0, 0.0, 0.0]);
                for j in 0..4 {
                    let aj: Vec<Rational> = (0..2).map(|i| a[(i, j)].clone()).collect();
                    assert!(rat_dot(&aj, &dual) <= c[j]);
                }
                assert_eq!(rat_dot(&dual, &r(&[4.0, 6.0])), objective);
            }
            other => panic!("expected optimal, got {other:?}"),
        }
    }

    #[test]
    fn detects_infeasibility_with_farkas() {
        // x₁ + x₂ = −1, x ≥ 0 is infeasible.
        let a = RatMatrix::from_ints(&[vec![1, 1]]);
        let out = rational_simplex(&a, &r(&[-1.0]), &r(&[0.0, 0.0])).unwrap();
        match out {
            SimplexOutcome::Infeasible { farkas } => {
                // Aᵀy ≤ 0 and ⟨b,y⟩ > 0, exactly.
                assert!(farkas[0] < Rational::zero());
                assert!(rat_dot(&farkas, &r(&[-1.0])) > Rational::zero());
            }
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn detects_unboundedness_with_ray() {
        // min −x₁ s.t. x₁ − x₂ = 0, x ≥ 0: slide to +∞ along (1,1).
        let a = RatMatrix::from_ints(&[vec![1, -1]]);
        let out = rational_simplex(&a, &r(&[0.0]), &r(&[-1.0, 0.0])).unwrap();
        match out {
            SimplexOutcome::Unbounded { x, ray } => {
                assert!(a.matvec(&ray).iter().all(|v| v.is_zero()));
                assert!(ray.iter().all(|v| *v >= Rational::zero()));
                assert!(rat_dot(&ray, &r(&[-1.0, 0.0])) < Rational::zero());
                assert!(a.matvec(&x).iter().all(|v| v.is_zero()));
            }
            other => panic!("expected unbounded, got {other:?}"),
        }
    }

    #[test]
    fn handles_redundant_rows() {
        let a = RatMatrix::from_ints(&[vec![1, 1], vec![2, 2]]);
        let out = rational_simplex(&a, &r(&[2.0, 4.0]), &r(&[1.0, 0.0])).unwrap();
        match out {
            SimplexOutcome::Optimal { objective, .. } => {
                assert_eq!(rat_to_f64(&objective), 0.0);
            }
            other => panic!("expected optimal, got {other:?}"),
        }
    }

    #[test]
    fn degenerate_cycling_guarded_by_bland() {
        // A classic degenerate example; Bland's rule must terminate.
        let a = RatMatrix::from_ints(&[vec![4, -8, -1, 9, 1, 0], vec![2, -4, -1, 3, 0, 1]]);
        let c = r(&[-3.0, 4.0, -1.0, 2.0, 0.0, 0.0]);
        let out = rational_simplex(&a, &r(&[0.0, 0.0]), &c).unwrap();
        match out {
            SimplexOutcome::Unbounded { .. } | SimplexOutcome::Optimal { .. } => {}
            other => panic!("unexpected outcome {other:?}"),
        }
    }
}
