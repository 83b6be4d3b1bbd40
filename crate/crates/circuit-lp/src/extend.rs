//! The extended initialization system: a reformulation of the subspace LP
//! with a known strictly interior primal–dual pair, a bounded feasible
//! region, and circuit imbalance at most four times that of the original
//! space.
//!
//! For an instance `(W = ker(A), d, c)` with `A` normalized so its basis
//! columns carry an identity block, the extended primal works over
//! `(x, x̲, x̄) ∈ ℝ^{3n}`:
//!
//! ```text
//!   A(x − x̲)      = A d          (x − x̲ lives in W + d)
//!   x − ½x̲ + x̄   = M̂_D·1       (a slack identity keeping x̄ explicit)
//!   0 ≤ each coordinate ≤ 2nM_D  (box, imposed via slack variables)
//! ```
//!
//! with objective `⟨c,x⟩ + ⟨M̂_P·1 − c, x̲⟩`. The point
//! `(x,x̲,x̄) = ⅔M̂_D(1,1,1) + (d,0,−d)` is strictly feasible and its dual
//! twin `(s,s̲,s̄) = ⅔M̂_P(1,1,1) + (0,−½c,−c)` is strictly dual feasible;
//! both are handed to the approximate solver as warm starts. The levels are
//! slifted (`M̂ = M − ε‖·‖₁`) so that the post-solve repair, which retargets
//! the unshifted levels, has slack to restore the subspace identities
//! exactly while keeping every coordinate positive.

use crate::dense::{self, norm_1, norm_2, norm_inf, Matrix, Vector};
use crate::error::{Error, Result};
use crate::subspace::SubspaceRep;

/// Repair margin constant; the shift applied during repair is
/// `2γε‖·‖₁/n` per coordinate and the residual tolerance handed to the
/// solver is `γεn^{−4.5}M^{−2}`, so repairs always have room.
pub const GAMMA: f64 = 1.0 / 13.0;

/// Sizing parameters of an extended system.
#[derive(Debug, Clone, Copy)]
pub struct ExtendedParams {
    /// Dual scale `M_P` (caps the dual variables the instance needs).
    pub m_p: f64,
    /// Primal scale `M_D` (caps the primal variables the instance needs).
    pub m_d: f64,
    /// Accuracy parameter the caller is solving to.
    pub eps: f64,
    /// Current circuit imbalance estimate `M`.
    pub m_est: f64,
}

/// The extended system with its assembled data and recovery bookkeeping.
#[derive(Debug, Clone)]
pub struct ExtendedSystem {
    space: SubspaceRep,
    /// `(m+n)×3n` constraint matrix of the extended equalities.
    pub a_hat: Matrix,
    /// Right-hand side `(Ad; M̂_D·1)`.
    pub b_hat: Vector,
    /// Objective `(c, M̂_P·1 − c, 0)`.
    pub c_hat: Vector,
    /// Upper bound `2nM_D` imposed on every extended primal coordinate.
    pub box_level: f64,
    /// Shifted levels used in the build and the warm start.
    pub m_p_shifted: f64,
    /// See `m_p_shifted`.
    pub m_d_shifted: f64,
    /// Residual tolerance the approximate solver must meet for the repair
    /// step to succeed: `γεn^{−4.5}M^{−2}`.
    pub delta: f64,
    /// Sizing parameters the system was built with.
    pub params: ExtendedParams,
    /// Original shift vector.
    pub d: Vector,
    /// Original cost vector.
    pub c: Vector,
}

/// Strictly interior warm start for the assembled standard form.
#[derive(Debug, Clone)]
pub struct InteriorPoint {
    /// `(x, x̲, x̄, t) ∈ ℝ^{6n}`, strictly positive.
    pub primal: Vector,
    /// Multipliers `(y_A, q, w) ∈ ℝ^{m+n+3n}`.
    pub dual_y: Vector,
    /// Dual slacks for all `6n` columns, strictly positive.
    pub dual_slack: Vector,
}

/// What an approximate solver returns for an extended system, restricted
/// to the `3n` structural coordinates (box slacks dropped).
#[derive(Debug, Clone)]
pub struct ApproxSolution {
    /// `(x, x̲, x̄) ≥ 0`.
    pub primal: Vector,
    /// `(s, s̲, s̄) ≥ 0`.
    pub dual_slack: Vector,
    /// Complementarity gap the solver achieved on the assembled form.
    pub gap: f64,
}

/// An approximate solution whose subspace identities have been restored to
/// working precision.
#[derive(Debug, Clone)]
pub struct RepairedSolution {
    /// `x̂ = x − x̲ ∈ W + d`.
    pub x_hat: Vector,
    /// `ŝ = s − s̄ ∈ W⊥ + c`.
    pub s_hat: Vector,
    /// Repaired `(x, x̲, x̄) ≥ 0`.
    pub primal: Vector,
    /// Repaired `(s, s̲, s̄) ≥ 0`.
    pub dual_slack: Vector,
}

/// Builds the extended system for `(W, d, c)` at the given scales.
pub fn build_extended(
    space: &SubspaceRep,
    d: &[f64],
    c: &[f64],
    params: ExtendedParams,
) -> Result<ExtendedSystem> {
    let n = space.ambient_dim();
    let m = space.codim();
    if d.len() != n || c.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "extended system build: dimension {n}, |d| = {}, |c| = {}",
            d.len(),
            c.len()
        )));
    }
    if !(params.m_p > 0.0 && params.m_d > 0.0 && params.eps > 0.0 && params.m_est >= 2.0) {
        return Err(Error::Guard("extended system scales must be positive".into()));
    }
    let m_p_shifted = params.m_p - params.eps * norm_1(c);
    let m_d_shifted = params.m_d - params.eps * norm_1(d);
    if m_p_shifted <= 0.0 || m_d_shifted <= 0.0 {
        return Err(Error::Guard(
            "shifted levels collapsed; scales too small for the accuracy requested".into(),
        ));
    }
    let a = space.constraints();
    let mut a_hat = Matrix::zeros(m + n, 3 * n);
    for i in 0..m {
        for j in 0..n {
            a_hat[(i, j)] = a[(i, j)];
            a_hat[(i, n + j)] = -a[(i, j)];
        }
    }
    for i in 0..n {
        a_hat[(m + i, i)] = 1.0;
        a_hat[(m + i, n + i)] = -0.5;
        a_hat[(m + i, 2 * n + i)] = 1.0;
    }
    let mut b_hat = a.matvec(d);
    b_hat.extend(std::iter::repeat(m_d_shifted).take(n));
    let mut c_hat = c.to_vec();
    c_hat.extend(c.iter().map(|&cj| m_p_shifted - cj));
    c_hat.extend(std::iter::repeat(0.0).take(n));

    let nf = n as f64;
    let delta = GAMMA * params.eps * nf.powf(-4.5) * params.m_est.powi(-2);
    Ok(ExtendedSystem {
        space: space.clone(),
        a_hat,
        b_hat,
        c_hat,
        box_level: 2.0 * nf * params.m_d,
        m_p_shifted,
        m_d_shifted,
        delta,
        params,
        d: d.to_vec(),
        c: c.to_vec(),
    })
}

impl ExtendedSystem {
    /// Original dimension `n`.
    pub fn dim(&self) -> usize {
        self.d.len()
    }

    /// The subspace the system was built over.
    pub fn space(&self) -> &SubspaceRep {
        &self.space
    }

    /// Assembles the boxed standard form
    /// `Ā = [Â 0; I I]`, `b̄ = (b̂; box·1)`, `c̄ = (ĉ, 0)` over `6n`
    /// variables.
    pub fn assemble(&self) -> (Matrix, Vector, Vector) {
        let n3 = 3 * self.dim();
        let rows_top = self.a_hat.nrows();
        let mut a_bar = Matrix::zeros(rows_top + n3, 2 * n3);
        for i in 0..rows_top {
            for j in 0..n3 {
                a_bar[(i, j)] = self.a_hat[(i, j)];
            }
        }
        for j in 0..n3 {
            a_bar[(rows_top + j, j)] = 1.0;
            a_bar[(rows_top + j, n3 + j)] = 1.0;
        }
        let mut b_bar = self.b_hat.clone();
        b_bar.extend(std::iter::repeat(self.box_level).take(n3));
        let mut c_bar = self.c_hat.clone();
        c_bar.extend(std::iter::repeat(0.0).take(n3));
        (a_bar, b_bar, c_bar)
    }

    /// The strictly interior primal–dual warm start.
    pub fn initial_point(&self) -> InteriorPoint {
        let n = self.dim();
        let n3 = 3 * n;
        let m = self.space.codim();
        let pd = 2.0 / 3.0 * self.m_d_shifted;
        let pp = 2.0 / 3.0 * self.m_p_shifted;
        // v = ⅔M̂_D(1,1,1) + (d, 0, −d).
        let mut v = vec![pd; n3];
        for i in 0..n {
            v[i] += self.d[i];
            v[2 * n + i] -= self.d[i];
        }
        // s_pre = ⅔M̂_P(1,1,1) + (0, −½c, −c).
        let mut s_pre = vec![pp; n3];
        for i in 0..n {
            s_pre[n + i] -= 0.5 * self.c[i];
            s_pre[2 * n + i] -= self.c[i];
        }
        // Box slacks and their duals: s_t = ρ·1 chosen so the box block is
        // roughly centered at the warm start's average product.
        let mu_pre = dense::dot(&v, &s_pre) / n3 as f64;
        let rho = mu_pre / (2.0 * n as f64 * self.m_d_shifted);
        let mut primal = v.clone();
        primal.extend(v.iter().map(|&vi| self.box_level - vi));
        let mut dual_slack: Vector = s_pre.iter().map(|&si| si + rho).collect();
        dual_slack.extend(std::iter::repeat(rho).take(n3));
        // Multipliers reproducing those slacks: y_A = 0, q = −s̄₀, w = −ρ·1.
        let mut dual_y = vec![0.0; m];
        for i in 0..n {
            dual_y.push(self.c[i] - pp);
        }
        dual_y.extend(std::iter::repeat(-rho).take(n3));
        InteriorPoint {
            primal,
            dual_y,
            dual_slack,
        }
    }

    /// Euclidean radius every feasible assembled primal respects (box).
    pub fn radius_primal(&self) -> f64 {
        let n3 = (3 * self.dim()) as f64;
        self.box_level * (2.0 * n3).sqrt()
    }

    /// Validated dual radius for the path the solver is asked to follow.
    pub fn radius_dual(&self) -> f64 {
        let n3 = (3 * self.dim()) as f64;
        4.0 * (2.0 * n3).sqrt() * (self.params.m_p + norm_1(&self.c) + 1.0)
    }

    /// Recovers `x̂ = x − x̲` from an extended primal vector.
    pub fn primal_part(&self, extended: &[f64]) -> Vector {
        let n = self.dim();
        (0..n).map(|i| extended[i] - extended[n + i]).collect()
    }

    /// Recovers `ŝ = s − s̄` from extended dual slacks.
    pub fn dual_part(&self, slack: &[f64]) -> Vector {
        let n = self.dim();
        (0..n).map(|i| slack[i] - slack[2 * n + i]).collect()
    }
}

/// Restores the subspace identities of an approximate solution exactly (to
/// working precision), using the identity-block structure of the
/// normalized constraints, then re-establishes the slack identities at the
/// *unshifted* levels so all coordinates stay nonnegative.
///
/// The primal residual is cancelled row by row against the basis column of
/// that row (those columns are unit vectors, so rows repair independently);
/// the dual side is repaired symmetrically against the unit columns of the
/// kernel row basis, with the roles `(x,x̲,x̄) ↔ (s,s̄,s̲)`.
pub fn repair_to_subspace(
    sys: &ExtendedSystem,
    approx: &ApproxSolution,
) -> Result<RepairedSolution> {
    let n = sys.dim();
    let n3 = 3 * n;
    if approx.primal.len() != n3 || approx.dual_slack.len() != n3 {
        return Err(Error::DimensionMismatch(
            "repair expects the 3n structural coordinates".into(),
        ));
    }
    let eps = sys.params.eps;
    let mut x = approx.primal[..n].to_vec();
    let mut x_low = approx.primal[n..2 * n].to_vec();
    let mut s = approx.dual_slack[..n].to_vec();
    let mut s_high = approx.dual_slack[2 * n..].to_vec();

    // Primal: zero A(x − x̲) − Ad row by row.
    let a = sys.space.constraints();
    let diff = dense::sub(&x, &x_low);
    let r = dense::sub(&a.matvec(&diff), &sys.b_hat[..a.nrows()]);
    for (i, &bi) in sys.space.basis().iter().enumerate() {
        if r[i] >= 0.0 {
            x[bi] -= r[i];
        } else {
            x_low[bi] += r[i];
        }
    }
    let sigma_p = 2.0 * GAMMA * eps * norm_1(&sys.d) / n as f64;
    for i in 0..n {
        x[i] += sigma_p;
        x_low[i] += sigma_p;
    }
    // Retarget the slack identity at the unshifted level.
    let x_high: Vector = (0..n)
        .map(|i| sys.params.m_d - x[i] + 0.5 * x_low[i])
        .collect();

    // Dual: zero B(s − s̄) − Bc against the unit columns of the kernel
    // row basis (one per nonbasis coordinate).
    let bker = sys.space.kernel_rows();
    let nonbasis: Vec<usize> = (0..n)
        .filter(|j| !sys.space.basis().contains(j))
        .collect();
    debug_assert_eq!(nonbasis.len(), bker.nrows());
    let sdiff = dense::sub(&s, &s_high);
    let rd = dense::sub(&bker.matvec(&sdiff), &bker.matvec(&sys.c));
    for (k, &jb) in nonbasis.iter().enumerate() {
        if rd[k] >= 0.0 {
            s[jb] -= rd[k];
        } else {
            s_high[jb] += rd[k];
        }
    }
    let sigma_d = 2.0 * GAMMA * eps * norm_1(&sys.c) / n as f64;
    for i in 0..n {
        s[i] += sigma_d;
        s_high[i] += sigma_d;
    }
    let s_low: Vector = (0..n)
        .map(|i| sys.params.m_p - s[i] + 0.5 * s_high[i])
        .collect();

    for (name, v) in [
        ("x", &x),
        ("x_low", &x_low),
        ("x_high", &x_high),
        ("s", &s),
        ("s_low", &s_low),
        ("s_high", &s_high),
    ] {
        if v.iter().any(|&t| t < 0.0) {
            return Err(Error::NumericalBreakdown(format!(
                "repair drove a {name} coordinate negative; solver residuals exceeded contract"
            )));
        }
    }

    let x_hat = dense::sub(&x, &x_low);
    let s_hat = dense::sub(&s, &s_high);
    debug_assert!(
        sys.space.shifted_residual(&x_hat, &sys.d)
            <= sys.space.tol().residual_tol * (1.0 + norm_inf(&x_hat))
    );
    let mut primal = x.clone();
    primal.extend_from_slice(&x_low);
    primal.extend_from_slice(&x_high);
    let mut dual_slack = s.clone();
    dual_slack.extend_from_slice(&s_low);
    dual_slack.extend_from_slice(&s_high);
    Ok(RepairedSolution {
        x_hat,
        s_hat,
        primal,
        dual_slack,
    })
}

/// Convenience: `‖v‖₂` of the structural part of an assembled vector.
pub fn structural_norm(sys: &ExtendedSystem, assembled: &[f64]) -> f64 {
    norm_2(&assembled[..3 * sys.dim()])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tol::Tolerance;

    fn sys_for(rows: &[Vec<f64>], d: &[f64], c: &[f64]) -> ExtendedSystem {
        let tol = Tolerance::default();
        let space = SubspaceRep::from_matrix(&Matrix::from_rows(rows), &tol).unwrap();
        let params = ExtendedParams {
            m_p: 2.0 * 2.0 * norm_1(c).max(0.5),
            m_d: 2.0 * 2.0 * norm_1(d).max(0.5),
            eps: 1e-4,
            m_est: 2.0,
        };
        build_extended(&space, d, c, params).unwrap()
    }

    #[test]
    fn warm_start_is_strictly_feasible() {
        let sys = sys_for(&[vec![1.0, 1.0, 1.0]], &[1.0, -0.5, 2.0], &[1.0, 0.0, -1.0]);
        let (a_bar, b_bar, _) = sys.assemble();
        let p = sys.initial_point();
        assert!(p.primal.iter().all(|&v| v > 0.0));
        assert!(p.dual_slack.iter().all(|&v| v > 0.0));
        let resid = dense::sub(&a_bar.matvec(&p.primal), &b_bar);
        assert!(norm_inf(&resid) < 1e-10 * (1.0 + norm_inf(&b_bar)));
        // Dual feasibility: s = c̄ − Āᵀy exactly reproduces the slacks.
        let aty = a_bar.tr_matvec(&p.dual_y);
        let (_, _, c_bar) = sys.assemble();
        for j in 0..c_bar.len() {
            assert!(
                (c_bar[j] - aty[j] - p.dual_slack[j]).abs() < 1e-9,
                "dual slack mismatch at {j}"
            );
        }
    }

    #[test]
    fn recovered_parts_live_in_shifted_subspaces() {
        let sys = sys_for(&[vec![1.0, 2.0, -1.0]], &[1.0, 0.0, 0.0], &[0.5, 1.0, 0.0]);
        let p = sys.initial_point();
        let x_hat = sys.primal_part(&p.primal);
        // x − x̲ = d at the warm start.
        for i in 0..3 {
            assert!((x_hat[i] - sys.d[i]).abs() < 1e-12);
        }
        let s_hat = sys.dual_part(&p.dual_slack);
        // s − s̄ = c at the warm start.
        for i in 0..3 {
            assert!((s_hat[i] - sys.c[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn repair_cancels_injected_residuals() {
        let sys = sys_for(&[vec![1.0, 1.0, 1.0]], &[2.0, -1.0, 0.5], &[1.0, -1.0, 0.0]);
        let p = sys.initial_point();
        let n3 = 9;
        // Perturb the structural coordinates within the repair budget.
        let mut primal = p.primal[..n3].to_vec();
        let mut dual = p.dual_slack[..n3].to_vec();
        let bump = 0.25 * sys.delta;
        for (k, v) in primal.iter_mut().enumerate() {
            *v += bump * ((k % 3) as f64 - 1.0);
        }
        for (k, v) in dual.iter_mut().enumerate() {
            *v -= bump * ((k % 2) as f64 - 0.5);
        }
        let rep = repair_to_subspace(
            &sys,
            &ApproxSolution {
                primal,
                dual_slack: dual,
                gap: 1.0,
            },
        )
        .unwrap();
        // Exact membership after repair, far below the injected noise.
        let resid = sys.space().shifted_residual(&rep.x_hat, &sys.d);
        assert!(resid < 1e-12, "primal residual {resid:.3e}");
        let dual_resid = norm_inf(&dense::sub(
            &sys.space().kernel_rows().matvec(&rep.s_hat),
            &sys.space().kernel_rows().matvec(&sys.c),
        ));
        assert!(dual_resid < 1e-12, "dual residual {dual_resid:.3e}");
        assert!(rep.primal.iter().all(|&v| v >= 0.0));
        assert!(rep.dual_slack.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn extended_space_inherits_bounded_imbalance() {
        // κ of ker([1,2]) is 2; the extended space must stay ≤ 4κ = 8.
        let tol = Tolerance::default();
        let space =
            SubspaceRep::from_matrix(&Matrix::from_rows(&[vec![1.0, 2.0]]), &tol).unwrap();
        let sys = build_extended(
            &space,
            &[1.0, 1.0],
            &[1.0, 0.0],
            ExtendedParams {
                m_p: 8.0,
                m_d: 16.0,
                eps: 1e-3,
                m_est: 2.0,
            },
        )
        .unwrap();
        let base = crate::verify::brute_kappa(space.constraints())
            .unwrap()
            .kappa_f64
            .unwrap();
        let ext = crate::verify::brute_kappa(&sys.a_hat)
            .unwrap()
            .kappa_f64
            .unwrap();
        assert!(ext <= 4.0 * base + 1e-9, "κ̂ = {ext}, κ = {base}");
    }
}
