//! Approximate solvers and proximity oracles over a subspace instance.
//!
//! This module turns the raw approximate-LP layer ([`crate::solver`]) into
//! the four building blocks the feasibility and optimization algorithms
//! consume. All of them work relative to a running estimate `M ≥ 2` of the
//! circuit imbalance of the ambient space, and every theoretical guarantee
//! is re-measured on the computed vectors before an outcome is returned:
//!
//! * [`near_feasible`]: for `x ∈ W + d, x ≥ 0`, returns a point with
//!   `‖x⁻‖₁ ≤ ε‖d/W‖₁` and `‖x‖∞ ≤ 2M‖d‖₁`, a Farkas certificate of
//!   infeasibility, or a lifting certificate that `M < κ_W`.
//! * [`near_optimal`]: for the primal–dual pair over `(W, d, c)`, returns
//!   near-feasible near-optimal `(x, s)` with the five standard bounds, a
//!   Farkas certificate for either side, or a lifting certificate.
//! * [`prox_opt_oracle`]: for `c ≥ 0`, a solution that in addition stays
//!   within `3M²n·‖d_Λ‖₁` of `d` in the sup norm, at the price of a small
//!   one-sided perturbation `c̃ ≤ c` of the objective.
//! * [`prox_feas_oracle`]: the `c = 0` specialization of the above.
//!
//! Both `near_*` functions solve one extended initialization system per
//! call (`near_optimal` adds up to two more, lazily, when it has to
//! classify an infeasible side). A measured bound failing by more than the
//! tolerance slack means the float pipeline left the regime the theory
//! covers; the functions retry once at `ε/2` and then surface
//! [`Error::InternalInconsistency`].

use crate::circuits::{eliminate_with_proximity, hoffman_point, HoffmanOutcome, ProximityOutcome};
use crate::dense::{self, dot, norm_1, norm_inf, Matrix, Vector};
use crate::error::{Error, Result};
use crate::extend::{build_extended, repair_to_subspace, ApproxSolution, ExtendedParams, RepairedSolution};
use crate::solver::{solve_approx, SolverRequest};
use crate::subspace::{certificate_from_lift, LiftingCertificate, SubspaceRep};
use crate::tol::Tolerance;

/// Work counters for one pipeline run, threaded through every oracle call.
#[derive(Debug, Default, Clone)]
pub struct OracleStats {
    /// Calls to [`near_feasible`] (including internal ones).
    pub near_feasible_calls: usize,
    /// Calls to [`near_optimal`] (including internal ones).
    pub near_optimal_calls: usize,
    /// Calls to [`prox_feas_oracle`].
    pub prox_feas_calls: usize,
    /// Calls to [`prox_opt_oracle`].
    pub prox_opt_calls: usize,
    /// Extended systems actually handed to the approximate solver.
    pub extended_solves: usize,
    /// Total interior-point iterations across those solves.
    pub solver_iterations: usize,
    /// Accuracy parameter of each proximity-oracle call, in call order.
    pub eps_used: Vec<f64>,
    /// Deepest feasibility recursion level reached (top call is level 1).
    pub feasibility_depth: usize,
    /// Iterations taken by the optimization outer loop.
    pub outer_iterations: usize,
}

/// A Farkas certificate of infeasibility for one side of a subspace LP.
///
/// For a primal certificate the vector lies in `rowspace(constraints)`
/// (that is, `W⊥`), is nonnegative, and has negative inner product with the
/// primal shift `d`; for a dual certificate it lies in `ker(constraints)`
/// (that is, `W`), is nonnegative, and has negative inner product with the
/// objective `c`. The constraint matrix is carried so the certificate can
/// be re-proved in exact arithmetic with no context.
#[derive(Debug, Clone)]
pub struct FarkasCertificate {
    /// Constraint matrix of the primal space the certificate refers to.
    pub constraints: Matrix,
    /// The nonnegative witness vector.
    pub vector: Vector,
    /// Measured inner product with the relevant shift (strictly negative).
    pub inner: f64,
}

/// Outcome of [`near_feasible`].
#[derive(Debug, Clone)]
pub enum FeasOutcome {
    /// `x ∈ W + d` with `‖x⁻‖₁ ≤ ε‖d/W‖₁` and `‖x‖∞ ≤ 2M‖d/W‖₁`.
    NearFeasible(Vector),
    /// The system `x ∈ W + d, x ≥ 0` is infeasible.
    FarkasPrimal(FarkasCertificate),
    /// Evidence that `M < κ_W`.
    Lifting(LiftingCertificate),
}

/// Outcome of [`near_optimal`].
#[derive(Debug, Clone)]
pub enum OptOutcome {
    /// A primal–dual pair `x ∈ W + d`, `s ∈ W⊥ + c` with
    /// `‖x⁻‖₁ ≤ ε‖d/W‖₁`, `‖s⁻‖₁ ≤ ε‖c/W⊥‖₁`,
    /// `‖x∘s‖₁ ≤ 5εM‖d/W‖₁‖c/W⊥‖₁`, `‖x‖∞ ≤ 2M‖d/W‖₁`, and
    /// `‖s‖∞ ≤ 2M‖c/W⊥‖₁`.
    NearOptimal { x: Vector, s: Vector },
    /// The primal side is infeasible.
    FarkasPrimal(FarkasCertificate),
    /// The dual side is infeasible.
    FarkasDual(FarkasCertificate),
    /// Evidence that `M < κ_W`.
    Lifting(LiftingCertificate),
}

/// A proximal near-feasible point: see [`prox_feas_oracle`].
#[derive(Debug, Clone)]
pub struct ProxFeasPoint {
    /// `x ∈ W + d` with `‖x⁻‖∞ ≤ ε‖d⁻‖₁` and `‖x − d‖∞ ≤ 3M²n‖d⁻‖₁`.
    pub x: Vector,
}

/// A proximal near-optimal triple: see [`prox_opt_oracle`].
#[derive(Debug, Clone)]
pub struct ProxOptPoint {
    /// `x ∈ W + d` with `‖x − d‖∞ ≤ 3M²n‖d_Λ‖₁` and
    /// `‖x_Λ(x,s)‖∞ ≤ ε‖d_Λ‖₁`.
    pub x: Vector,
    /// `s ∈ W⊥ + c̃`, `s ≥ 0`.
    pub s: Vector,
    /// One-sided perturbation of the objective: `0 ≤ c − c̃` with
    /// `‖c − c̃‖∞ ≤ (ε/n)‖c/W⊥‖₁`.
    pub c_tilde: Vector,
}

/// Outcome of [`prox_feas_oracle`].
#[derive(Debug, Clone)]
pub enum ProxFeasOutcome {
    /// A proximal near-feasible point.
    Point(ProxFeasPoint),
    /// The system `x ∈ W + d, x ≥ 0` is infeasible.
    FarkasPrimal(FarkasCertificate),
    /// Evidence that `M < κ_W`.
    Lifting(LiftingCertificate),
}

/// Outcome of [`prox_opt_oracle`].
#[derive(Debug, Clone)]
pub enum ProxOptOutcome {
    /// A proximal near-optimal triple.
    Point(ProxOptPoint),
    /// The system `x ∈ W + d, x ≥ 0` is infeasible.
    FarkasPrimal(FarkasCertificate),
    /// Evidence that `M < κ_W`.
    Lifting(LiftingCertificate),
}

/// The index set `Λ(a, b) = supp(a⁻) ∪ supp(b⁺)`, by strict float sign
/// tests. Coordinates that are exactly zero never enter.
pub fn lambda_set(a: &[f64], b: &[f64]) -> Vec<usize> {
    debug_assert_eq!(a.len(), b.len());
    (0..a.len()).filter(|&i| a[i] < 0.0 || b[i] > 0.0).collect()
}

/// Measured-bound check with the standard multiplicative slack plus an
/// additive roundoff escape proportional to the instance scale.
pub(crate) fn bound_check(
    label: &str,
    value: f64,
    bound: f64,
    scale: f64,
    tol: &Tolerance,
) -> Result<()> {
    if value <= bound * tol.slack() + tol.zero_tol * (1.0 + scale) {
        Ok(())
    } else {
        Err(Error::InternalInconsistency(format!(
            "{label}: measured {value:.6e} exceeds bound {bound:.6e}"
        )))
    }
}

/// Clamps negligible negative entries to exact zero; a substantive
/// negative entry is an internal inconsistency.
pub(crate) fn clamp_nonneg(v: &mut [f64], what: &str, tol: &Tolerance) -> Result<()> {
    let scale = 1.0 + norm_inf(v);
    for vi in v.iter_mut() {
        if *vi < 0.0 {
            if *vi >= -tol.zero_tol * scale {
                *vi = 0.0;
            } else {
                return Err(Error::InternalInconsistency(format!(
                    "{what} has a negative entry {vi:.6e}"
                )));
            }
        }
    }
    Ok(())
}

/// Detects constraint-matrix entries already incompatible with the current
/// estimate: the kernel row pinned to the full nonbasis is itself a
/// minimum-norm lift, so an entry larger than `M` is a ready-made
/// certificate.
fn entry_guard(space: &SubspaceRep, m_est: f64) -> Option<LiftingCertificate> {
    let rows = space.kernel_rows();
    let nonbasis: Vec<usize> = {
        let basis = space.basis();
        (0..space.ambient_dim())
            .filter(|j| !basis.contains(j))
            .collect()
    };
    let mut best: Option<LiftingCertificate> = None;
    for k in 0..rows.nrows() {
        let ratio = norm_inf(rows.row(k));
        if ratio > m_est * space.tol().slack() {
            let mut p = vec![0.0; nonbasis.len()];
            p[k] = 1.0;
            if let Some(cert) =
                certificate_from_lift(space, &nonbasis, &p, rows.row(k), m_est)
            {
                if best.as_ref().map_or(true, |b| cert.ratio > b.ratio) {
                    best = Some(cert);
                }
            }
        }
    }
    best
}

/// Builds the extended system's solver request, solves it, and repairs the
/// answer back onto the shifted subspaces.
fn solve_extended(
    sys: &crate::extend::ExtendedSystem,
    gap_needed: f64,
    tol: &Tolerance,
    stats: &mut OracleStats,
) -> Result<RepairedSolution> {
    let (a, b, c) = sys.assemble();
    let start = sys.initial_point();
    let coef = dense::norm_2(&c) * sys.radius_primal() + dense::norm_2(&b) * sys.radius_dual();
    let delta = sys
        .delta
        .min(gap_needed / coef)
        .clamp(f64::MIN_POSITIVE, 1.0);
    let mut req = SolverRequest::new(
        a,
        b,
        c,
        start.primal,
        start.dual_y,
        start.dual_slack,
        delta,
        sys.radius_primal(),
        sys.radius_dual(),
    );
    req.box_rows = 3 * sys.dim();
    let resp = solve_approx(&req, tol)?;
    stats.extended_solves += 1;
    stats.solver_iterations += resp.iterations;
    let dim = 3 * sys.dim();
    let approx = ApproxSolution {
        primal: resp.primal[..dim].to_vec(),
        dual_slack: resp.dual_slack[..dim].to_vec(),
        gap: resp.complementarity(),
    };
    repair_to_subspace(sys, &approx)
}

fn validate_instance(
    space: &SubspaceRep,
    shift: &[f64],
    m_est: f64,
    eps: f64,
) -> Result<()> {
    if shift.len() != space.ambient_dim() {
        return Err(Error::DimensionMismatch(format!(
            "instance vector has {} entries in ambient dimension {}",
            shift.len(),
            space.ambient_dim()
        )));
    }
    if !dense::all_finite(shift) {
        return Err(Error::NonFinite("oracle instance"));
    }
    if !(eps > 0.0 && eps <= 0.5) {
        return Err(Error::DimensionMismatch(format!(
            "accuracy parameter must lie in (0, 1/2], got {eps}"
        )));
    }
    if !(m_est >= 2.0 && m_est.is_finite()) {
        return Err(Error::DimensionMismatch(format!(
            "imbalance estimate must be finite and at least 2, got {m_est}"
        )));
    }
    Ok(())
}

// --- Near-feasible solutions ----------------------------------------------

/// Solves the feasibility side `x ∈ W + d, x ≥ 0` to accuracy `ε`.
///
/// Returns one of: a near-feasible point, a Farkas certificate of
/// infeasibility, or a lifting certificate against `m_est`. Retries once
/// at `ε/2` if a measured guarantee fails.
pub fn near_feasible(
    space: &SubspaceRep,
    d: &[f64],
    m_est: f64,
    eps: f64,
    stats: &mut OracleStats,
) -> Result<FeasOutcome> {
    validate_instance(space, d, m_est, eps)?;
    stats.near_feasible_calls += 1;
    match near_feasible_attempt(space, d, m_est, eps, stats) {
        Err(Error::InternalInconsistency(_)) => {
            near_feasible_attempt(space, d, m_est, eps / 2.0, stats)
        }
        other => other,
    }
}

fn near_feasible_attempt(
    space: &SubspaceRep,
    d: &[f64],
    m_est: f64,
    eps: f64,
    stats: &mut OracleStats,
) -> Result<FeasOutcome> {
    let tol = *space.tol();
    let n = space.ambient_dim();
    // A nonnegative shift is already an answer.
    if d.iter().all(|&v| v >= 0.0) {
        return Ok(FeasOutcome::NearFeasible(d.to_vec()));
    }
    // Work with the minimum-norm representative of W + d.
    let dp = space.min_norm_point(d);
    let d_scale = norm_1(&dp);
    if d_scale <= tol.zero_tol * (1.0 + norm_1(d)) {
        // d ∈ W, so the origin belongs to W + d.
        return Ok(FeasOutcome::NearFeasible(vec![0.0; n]));
    }
    if let Some(cert) = entry_guard(space, m_est) {
        return Ok(FeasOutcome::Lifting(cert));
    }

    let params = ExtendedParams {
        m_p: 1.0,
        m_d: 2.0 * m_est * d_scale,
        eps,
        m_est,
    };
    let sys = build_extended(space, &dp, &vec![0.0; n], params)?;
    let gap_needed = 0.5 * eps * d_scale;
    let rep = solve_extended(&sys, gap_needed, &tol, stats)?;

    // Branch on the sign of the dual objective of the extended program.
    let s_bar = &rep.dual_slack[2 * n..3 * n];
    let dual_obj = -dot(&dp, &rep.s_hat) - params.m_d * norm_1(s_bar);
    if dual_obj <= 0.0 {
        let x = rep.x_hat;
        bound_check(
            "near-feasible negative mass",
            norm_1(&dense::neg_part(&x)),
            eps * d_scale,
            d_scale,
            &tol,
        )?;
        bound_check(
            "near-feasible magnitude",
            norm_inf(&x),
            2.0 * m_est * d_scale,
            d_scale,
            &tol,
        )?;
        return Ok(FeasOutcome::NearFeasible(x));
    }

    // Positive dual objective: clean the dual iterate into a Farkas
    // certificate by zeroing its negative coordinates inside W⊥.
    let s_hat = rep.s_hat;
    let dual_rep = space.dual()?;
    let j_set: Vec<usize> = (0..n).filter(|&i| s_hat[i] < 0.0).collect();
    match eliminate_with_proximity(&dual_rep, &s_hat, &j_set, m_est)? {
        ProximityOutcome::Eliminated { cleaned, .. } => {
            let mut z = cleaned;
            clamp_nonneg(&mut z, "Farkas witness", &tol)?;
            if !dual_rep.contains(&z) {
                return Err(Error::InternalInconsistency(
                    "Farkas witness drifted out of the dual space".into(),
                ));
            }
            let inner = dot(d, &z);
            let margin = tol.zero_tol * (1.0 + norm_inf(d)) * (1.0 + norm_inf(&z));
            if inner >= -margin {
                return Err(Error::InternalInconsistency(format!(
                    "Farkas witness has non-negative inner product {inner:.6e}"
                )));
            }
            Ok(FeasOutcome::FarkasPrimal(FarkasCertificate {
                constraints: space.constraints().clone(),
                vector: z,
                inner,
            }))
        }
        ProximityOutcome::Certificate(cert) => Ok(FeasOutcome::Lifting(cert)),
    }
}

// --- Near-optimal solutions ------------------------------------------------

/// Solves the primal–dual pair over `(W, d, c)` to accuracy `ε`.
///
/// Returns near-feasible near-optimal `(x, s)`, a Farkas certificate for
/// one side, or a lifting certificate against `m_est`. Retries once at
/// `ε/2` if a measured guarantee fails.
pub fn near_optimal(
    space: &SubspaceRep,
    d: &[f64],
    c: &[f64],
    m_est: f64,
    eps: f64,
    stats: &mut OracleStats,
) -> Result<OptOutcome> {
    validate_instance(space, d, m_est, eps)?;
    if c.len() != space.ambient_dim() || !dense::all_finite(c) {
        return Err(Error::DimensionMismatch(
            "objective length must match the ambient dimension".into(),
        ));
    }
    stats.near_optimal_calls += 1;
    match near_optimal_attempt(space, d, c, m_est, eps, stats) {
        Err(Error::InternalInconsistency(_)) => {
            near_optimal_attempt(space, d, c, m_est, eps / 2.0, stats)
        }
        other => other,
    }
}

/// Rewraps a Farkas certificate produced by a dual-side [`near_feasible`]
/// call (whose "primal" space is `W⊥`) as a dual certificate of the
/// original instance: the witness lives in `(W⊥)⊥ = W = ker(constraints)`.
pub(crate) fn rewrap_dual_farkas(
    space: &SubspaceRep,
    cert: FarkasCertificate,
    c: &[f64],
) -> FarkasCertificate {
    let inner = dot(c, &cert.vector);
    FarkasCertificate {
        constraints: space.constraints().clone(),
        vector: cert.vector,
        inner,
    }
}

fn near_optimal_attempt(
    space: &SubspaceRep,
    d: &[f64],
    c: &[f64],
    m_est: f64,
    eps: f64,
    stats: &mut OracleStats,
) -> Result<OptOutcome> {
    let tol = *space.tol();
    let n = space.ambient_dim();
    let dp = space.min_norm_point(d);
    let cp = space.project(c);
    let d_scale = norm_1(&dp);
    let c_scale = norm_1(&cp);

    if let Some(cert) = entry_guard(space, m_est) {
        return Ok(OptOutcome::Lifting(cert));
    }

    // Degenerate primal side: d ∈ W means x = 0 is exactly feasible and
    // optimal (⟨x,s⟩ = 0 for any s); only the dual side needs solving.
    if d_scale <= tol.zero_tol * (1.0 + norm_1(d)) {
        let dual_rep = space.dual()?;
        return Ok(match near_feasible(&dual_rep, c, m_est, eps / 4.0, stats)? {
            FeasOutcome::NearFeasible(s) => OptOutcome::NearOptimal {
                x: vec![0.0; n],
                s,
            },
            FeasOutcome::FarkasPrimal(cert) => {
                OptOutcome::FarkasDual(rewrap_dual_farkas(space, cert, c))
            }
            FeasOutcome::Lifting(cert) => OptOutcome::Lifting(cert),
        });
    }
    // Degenerate dual side: c ∈ W⊥ means s = 0 is exactly dual feasible.
    if c_scale <= tol.zero_tol * (1.0 + norm_1(c)) {
        return Ok(match near_feasible(space, d, m_est, eps / 4.0, stats)? {
            FeasOutcome::NearFeasible(x) => OptOutcome::NearOptimal {
                x,
                s: vec![0.0; n],
            },
            FeasOutcome::FarkasPrimal(cert) => OptOutcome::FarkasPrimal(cert),
            FeasOutcome::Lifting(cert) => OptOutcome::Lifting(cert),
        });
    }

    // Main solve on the extended initialization system.
    let params = ExtendedParams {
        m_p: 2.0 * m_est * c_scale,
        m_d: 2.0 * m_est * d_scale,
        eps,
        m_est,
    };
    let sys = build_extended(space, &dp, &cp, params)?;
    let gap_needed = 0.5 * eps * m_est * c_scale * d_scale;
    let rep = solve_extended(&sys, gap_needed, &tol, stats)?;
    let x_tilde = rep.x_hat;
    let s_tilde = rep.s_hat;

    let x_neg = norm_1(&dense::neg_part(&x_tilde));
    let s_neg = norm_1(&dense::neg_part(&s_tilde));
    let slack = tol.slack();
    let primal_ok = x_neg <= eps * d_scale * slack + tol.zero_tol * (1.0 + d_scale);
    let dual_ok = s_neg <= eps * c_scale * slack + tol.zero_tol * (1.0 + c_scale);

    if primal_ok && dual_ok {
        bound_check(
            "near-optimal primal magnitude",
            norm_inf(&x_tilde),
            2.0 * m_est * d_scale,
            d_scale,
            &tol,
        )?;
        bound_check(
            "near-optimal dual magnitude",
            norm_inf(&s_tilde),
            2.0 * m_est * c_scale,
            c_scale,
            &tol,
        )?;
        let comp: f64 = x_tilde
            .iter()
            .zip(s_tilde.iter())
            .map(|(a, b)| (a * b).abs())
            .sum();
        bound_check(
            "near-optimal complementarity",
            comp,
            5.0 * eps * m_est * d_scale * c_scale,
            d_scale * c_scale,
            &tol,
        )?;
        return Ok(OptOutcome::NearOptimal {
            x: x_tilde,
            s: s_tilde,
        });
    }

    if !primal_ok {
        // Too much negative mass on the primal side: either the primal is
        // infeasible, or boxing the iterate against a truly near-feasible
        // point must blow up a lift (the duality gap excludes everything in
        // between).
        match near_feasible(space, &dp, m_est, eps / 4.0, stats)? {
            FeasOutcome::NearFeasible(x_wit) => {
                let wide = 2.0 * m_est * d_scale * slack * slack;
                let lower: Vector = x_tilde.iter().map(|&v| v - wide).collect();
                let upper: Vector = x_tilde
                    .iter()
                    .zip(x_wit.iter())
                    .map(|(&v, &w)| v + (-w).max(0.0))
                    .collect();
                let start = dense::sub(&x_tilde, &x_wit);
                match hoffman_point(space, &start, &lower, &upper, m_est)? {
                    HoffmanOutcome::Certificate(cert) => Ok(OptOutcome::Lifting(cert)),
                    HoffmanOutcome::Point(_) => Err(Error::InternalInconsistency(
                        "primal repair found a point the duality gap excludes".into(),
                    )),
                }
            }
            FeasOutcome::FarkasPrimal(cert) => Ok(OptOutcome::FarkasPrimal(cert)),
            FeasOutcome::Lifting(cert) => Ok(OptOutcome::Lifting(cert)),
        }
    } else {
        // Symmetric dual-side case over W⊥ with shift c.
        let dual_rep = space.dual()?;
        match near_feasible(&dual_rep, &cp, m_est, eps / 4.0, stats)? {
            FeasOutcome::NearFeasible(s_wit) => {
                let wide = 2.0 * m_est * c_scale * slack * slack;
                let lower: Vector = s_tilde.iter().map(|&v| v - wide).collect();
                let upper: Vector = s_tilde
                    .iter()
                    .zip(s_wit.iter())
                    .map(|(&v, &w)| v + (-w).max(0.0))
                    .collect();
                let start = dense::sub(&s_tilde, &s_wit);
                match hoffman_point(&dual_rep, &start, &lower, &upper, m_est)? {
                    HoffmanOutcome::Certificate(cert) => Ok(OptOutcome::Lifting(cert)),
                    HoffmanOutcome::Point(_) => Err(Error::InternalInconsistency(
                        "dual repair found a point the duality gap excludes".into(),
                    )),
                }
            }
            FeasOutcome::FarkasPrimal(cert) => {
                Ok(OptOutcome::FarkasDual(rewrap_dual_farkas(space, cert, c)))
            }
            FeasOutcome::Lifting(cert) => Ok(OptOutcome::Lifting(cert)),
        }
    }
}

// --- Proximity oracles ------------------------------------------------------

/// Proximal feasibility oracle: like [`near_feasible`], but the point also
/// stays within `3M²n‖d⁻‖₁` of `d` in the sup norm, and the negative part
/// is controlled coordinate-wise (`‖x⁻‖∞ ≤ ε‖d⁻‖₁`).
pub fn prox_feas_oracle(
    space: &SubspaceRep,
    d: &[f64],
    m_est: f64,
    eps: f64,
    stats: &mut OracleStats,
) -> Result<ProxFeasOutcome> {
    stats.prox_feas_calls += 1;
    stats.eps_used.push(eps);
    let zero = vec![0.0; space.ambient_dim()];
    match prox_opt_inner(space, d, &zero, m_est, eps, stats)? {
        ProxOptOutcome::Point(p) => {
            let tol = *space.tol();
            let d_neg = norm_1(&dense::neg_part(d));
            bound_check(
                "proximal feasibility negative part",
                norm_inf(&dense::neg_part(&p.x)),
                eps * d_neg,
                norm_inf(d),
                &tol,
            )?;
            Ok(ProxFeasOutcome::Point(ProxFeasPoint { x: p.x }))
        }
        ProxOptOutcome::FarkasPrimal(cert) => Ok(ProxFeasOutcome::FarkasPrimal(cert)),
        ProxOptOutcome::Lifting(cert) => Ok(ProxFeasOutcome::Lifting(cert)),
    }
}

/// Proximal optimization oracle for `c ≥ 0`.
///
/// On success the triple `(x, s, c̃)` satisfies, with `τ = ‖d_Λ(d,c)‖₁`:
/// `x ∈ W + d`, `s ∈ W⊥ + c̃`, `s ≥ 0`, `‖x_Λ(x,s)‖∞ ≤ ετ`,
/// `‖x − d‖∞ ≤ 3M²nτ`, `0 ≤ c − c̃`, and `‖c − c̃‖∞ ≤ (ε/n)‖c/W⊥‖₁`.
pub fn prox_opt_oracle(
    space: &SubspaceRep,
    d: &[f64],
    c: &[f64],
    m_est: f64,
    eps: f64,
    stats: &mut OracleStats,
) -> Result<ProxOptOutcome> {
    stats.prox_opt_calls += 1;
    stats.eps_used.push(eps);
    prox_opt_inner(space, d, c, m_est, eps, stats)
}

fn prox_opt_inner(
    space: &SubspaceRep,
    d: &[f64],
    c: &[f64],
    m_est: f64,
    eps: f64,
    stats: &mut OracleStats,
) -> Result<ProxOptOutcome> {
    validate_instance(space, d, m_est, eps)?;
    let tol = *space.tol();
    let n = space.ambient_dim();
    let mut c = c.to_vec();
    clamp_nonneg(&mut c, "proximal oracle objective", &tol)?;

    let lambda = lambda_set(d, &c);
    let tau: f64 = lambda.iter().map(|&i| d[i].abs()).sum();
    if tau == 0.0 {
        // d is nonnegative and vanishes on the support of c: d itself is
        // feasible and (d, c) is perfectly complementary on Λ.
        return Ok(ProxOptOutcome::Point(ProxOptPoint {
            x: d.to_vec(),
            s: c.clone(),
            c_tilde: c,
        }));
    }

    // Restrict to coordinates where d is not already huge relative to the
    // imbalance scale; the solver only needs to see those.
    let i_set: Vec<usize> = (0..n).filter(|&i| d[i] <= 2.0 * m_est * tau).collect();
    if i_set.is_empty() {
        return Err(Error::InternalInconsistency(
            "proximal oracle: restriction set is empty with positive mass".into(),
        ));
    }
    let eps_inner = tol.clamp_eps(eps * eps / (28.0 * m_est.powi(3) * (n as f64).powi(3)));
    let sub_space = space.project_coords(&i_set)?;
    let d_i = dense::gather(d, &i_set);
    let c_i = dense::gather(&c, &i_set);

    let (x_hat, s_hat) = match near_optimal(&sub_space, &d_i, &c_i, m_est, eps_inner, stats)? {
        OptOutcome::NearOptimal { x, s } => (x, s),
        OptOutcome::FarkasPrimal(cert) => {
            // A restricted certificate pads with zeros: off the restriction
            // set d is strictly positive, so the inner product is unchanged.
            let vector = dense::scatter(n, &i_set, &cert.vector);
            let inner = dot(d, &vector);
            if inner >= 0.0 {
                return Err(Error::InternalInconsistency(
                    "padded Farkas witness lost its negativity".into(),
                ));
            }
            return Ok(ProxOptOutcome::FarkasPrimal(FarkasCertificate {
                constraints: space.constraints().clone(),
                vector,
                inner,
            }));
        }
        OptOutcome::FarkasDual(_) => {
            return Err(Error::InternalInconsistency(
                "restricted dual side cannot be infeasible: its objective is a feasible slack"
                    .into(),
            ));
        }
        OptOutcome::Lifting(cert) => return Ok(ProxOptOutcome::Lifting(cert)),
    };

    // Extend the restricted primal back to the full space and repair it
    // toward d through a box over W.
    let lift = space.lift(&i_set, &dense::sub(&x_hat, &d_i)).map_err(|e| {
        Error::InternalInconsistency(format!("extension of restricted solution failed: {e}"))
    })?;
    let x_prime = dense::add(d, &lift);
    let s_prime = dense::scatter(n, &i_set, &s_hat);

    let support_c: Vec<usize> = (0..n).filter(|&i| c[i] > 0.0).collect();
    let lower: Vector = (0..n).map(|i| -d[i] - (-x_prime[i]).max(0.0)).collect();
    let upper: Vector = (0..n)
        .map(|i| {
            if support_c.binary_search(&i).is_ok() {
                x_prime[i] - d[i]
            } else {
                f64::INFINITY
            }
        })
        .collect();
    let x_tilde = match hoffman_point(space, &lift, &lower, &upper, m_est)? {
        HoffmanOutcome::Point(z) => dense::add(d, &z),
        HoffmanOutcome::Certificate(cert) => return Ok(ProxOptOutcome::Lifting(cert)),
    };

    // Repair the dual inside W⊥ ∩ ℝⁿ_I, where c − s′ is a feasible move.
    let dual_rep = space.dual()?;
    let sub_dual = dual_rep.fix_coords(&i_set)?;
    let start_dual: Vector = i_set.iter().map(|&i| c[i] - s_prime[i]).collect();
    let lower_dual: Vector = i_set.iter().map(|&i| -s_prime[i]).collect();
    let upper_dual = vec![f64::INFINITY; i_set.len()];
    let w = match hoffman_point(&sub_dual, &start_dual, &lower_dual, &upper_dual, m_est)? {
        HoffmanOutcome::Point(w_i) => dense::scatter(n, &i_set, &w_i),
        HoffmanOutcome::Certificate(cert) => return Ok(ProxOptOutcome::Lifting(cert)),
    };
    let mut s_bar = dense::add(&s_prime, &w);
    clamp_nonneg(&mut s_bar, "repaired dual slack", &tol)?;

    // Trim negligible dual coordinates to exact zero, absorbing the trim
    // into a one-sided perturbation of the objective. The trim threshold
    // is the ε-budget share, widened by a roundoff-dust allowance at the
    // magnitude the repairs actually worked at — with escalated estimates
    // the ε-budget drops below the dust left on the slack by the walks,
    // and an untrimmed dust coordinate would put a full-size partner into
    // the complementarity set below.
    let c_perp_scale = norm_1(&space.project(&c));
    let dust_scale = norm_inf(&s_bar) + c_perp_scale;
    let cutoff = (eps / (n as f64) * c_perp_scale).max(tol.zero_tol * (1.0 + dust_scale));
    let s_tilde: Vector = s_bar
        .iter()
        .map(|&v| if v <= cutoff { 0.0 } else { v })
        .collect();
    let c_tilde: Vector = (0..n).map(|i| c[i] - s_bar[i] + s_tilde[i]).collect();

    // Re-measure the oracle's guarantees on the vectors being returned.
    let x_res = space.shifted_residual(&x_tilde, d);
    if x_res > tol.residual_tol * (1.0 + norm_inf(&x_tilde)) {
        return Err(Error::InternalInconsistency(format!(
            "proximal primal residual {x_res:.6e}"
        )));
    }
    let s_res = dual_rep.shifted_residual(&s_tilde, &c_tilde);
    if s_res > tol.residual_tol * (1.0 + norm_inf(&s_tilde)) {
        return Err(Error::InternalInconsistency(format!(
            "proximal dual residual {s_res:.6e}"
        )));
    }
    bound_check(
        "proximal distance",
        norm_inf(&dense::sub(&x_tilde, d)),
        3.0 * m_est * m_est * (n as f64) * tau,
        norm_inf(d),
        &tol,
    )?;
    let live = lambda_set(&x_tilde, &s_tilde);
    let live_mass = live
        .iter()
        .map(|&i| x_tilde[i].abs())
        .fold(0.0, f64::max);
    bound_check(
        "proximal complementarity",
        live_mass,
        eps * tau,
        tau + norm_inf(&x_tilde),
        &tol,
    )?;
    bound_check(
        "objective perturbation",
        norm_inf(&dense::sub(&c, &c_tilde)),
        eps / (n as f64) * c_perp_scale,
        dust_scale,
        &tol,
    )?;
    for i in 0..n {
        if c[i] - c_tilde[i] < -tol.zero_tol * (1.0 + c_perp_scale) {
            return Err(Error::InternalInconsistency(
                "objective perturbation must be one-sided".into(),
            ));
        }
    }

    Ok(ProxOptOutcome::Point(ProxOptPoint {
        x: x_tilde,
        s: s_tilde,
        c_tilde,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::{
        check_certificate, check_farkas_dual, check_farkas_primal, rat_to_f64,
        subspace_ground_truth, GroundTruth,
    };

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn space_of(rows: &[Vec<f64>]) -> SubspaceRep {
        SubspaceRep::from_matrix(&Matrix::from_rows(rows), &tol()).unwrap()
    }

    #[test]
    fn nonnegative_shift_short_circuits() {
        let space = space_of(&[vec![1.0, 1.0, -1.0]]);
        let mut stats = OracleStats::default();
        let d = [0.5, 0.0, 2.0];
        match near_feasible(&space, &d, 2.0, 1e-3, &mut stats).unwrap() {
            FeasOutcome::NearFeasible(x) => assert_eq!(x, d.to_vec()),
            other => panic!("expected a near-feasible point, got {other:?}"),
        }
        assert_eq!(stats.extended_solves, 0);
    }

    #[test]
    fn feasible_system_yields_near_feasible_point() {
        let space = space_of(&[vec![1.0, 1.0, -1.0]]);
        let d = [1.0, -2.0, 2.0];
        let mut stats = OracleStats::default();
        let eps = 1e-3;
        match near_feasible(&space, &d, 4.0, eps, &mut stats).unwrap() {
            FeasOutcome::NearFeasible(x) => {
                let dp = space.min_norm_point(&d);
                assert!(space.shifted_residual(&x, &d) <= 1e-8 * (1.0 + norm_inf(&x)));
                assert!(norm_1(&dense::neg_part(&x)) <= eps * norm_1(&dp) * 1.001 + 1e-10);
                assert!(norm_inf(&x) <= 2.0 * 4.0 * norm_1(&dp) * 1.001);
            }
            other => panic!("expected a near-feasible point, got {other:?}"),
        }
        assert!(stats.extended_solves >= 1);
        assert!(stats.solver_iterations > 0);
    }

    #[test]
    fn infeasible_system_yields_exactly_verifiable_farkas() {
        let space = space_of(&[vec![1.0, 1.0]]);
        let d = [-1.0, -1.0];
        let mut stats = OracleStats::default();
        match near_feasible(&space, &d, 2.0, 1e-4, &mut stats).unwrap() {
            FeasOutcome::FarkasPrimal(cert) => {
                assert!(cert.inner < 0.0);
                let check = check_farkas_primal(&cert.constraints, &d, &cert.vector).unwrap();
                assert!(check.valid, "{check:?}");
            }
            other => panic!("expected a Farkas certificate, got {other:?}"),
        }
    }

    #[test]
    fn oversized_kernel_entries_trip_the_entry_guard() {
        let space = space_of(&[vec![1.0, 100.0]]);
        let d = [1.0, -1.0];
        let mut stats = OracleStats::default();
        match near_feasible(&space, &d, 2.0, 1e-4, &mut stats).unwrap() {
            FeasOutcome::Lifting(cert) => {
                assert!(cert.ratio > 50.0);
                let check = check_certificate(&cert, 2.0).unwrap();
                assert!(check.valid, "{check:?}");
            }
            other => panic!("expected a lifting certificate, got {other:?}"),
        }
        assert_eq!(stats.extended_solves, 0);
    }

    #[test]
    fn near_optimal_sandwiches_the_exact_optimum() {
        let rows = vec![vec![1.0, 1.0, -1.0]];
        let space = space_of(&rows);
        let d = [2.0, 1.0, 3.0];
        let c = [1.0, 2.0, 0.5];
        let eps = 1e-4;
        let m = 4.0;
        let mut stats = OracleStats::default();
        let (x, s) = match near_optimal(&space, &d, &c, m, eps, &mut stats).unwrap() {
            OptOutcome::NearOptimal { x, s } => (x, s),
            other => panic!("expected a near-optimal pair, got {other:?}"),
        };
        let dp = space.min_norm_point(&d);
        let cp = space.project(&c);
        let budget = 5.0 * eps * m * norm_1(&dp) * norm_1(&cp);
        let opt = match subspace_ground_truth(&Matrix::from_rows(&rows), &d, &c).unwrap() {
            GroundTruth::Optimal { objective, .. } => rat_to_f64(&objective),
            other => panic!("reference solver disagrees about solvability: {other:?}"),
        };
        assert!(dot(&c, &x) - budget <= opt + 1e-9);
        assert!(opt <= dot(&d, &dense::sub(&c, &s)) + budget + 1e-9);
        // Five near-optimality bounds.
        assert!(norm_1(&dense::neg_part(&x)) <= eps * norm_1(&dp) * 1.001 + 1e-10);
        assert!(norm_1(&dense::neg_part(&s)) <= eps * norm_1(&cp) * 1.001 + 1e-10);
        assert!(norm_inf(&x) <= 2.0 * m * norm_1(&dp) * 1.001);
        assert!(norm_inf(&s) <= 2.0 * m * norm_1(&cp) * 1.001);
        let comp: f64 = x.iter().zip(s.iter()).map(|(a, b)| (a * b).abs()).sum();
        assert!(comp <= budget * 1.001 + 1e-10);
    }

    #[test]
    fn primal_infeasibility_reaches_the_farkas_arm() {
        let space = space_of(&[vec![1.0, 1.0]]);
        let mut stats = OracleStats::default();
        match near_optimal(&space, &[-1.0, -1.0], &[1.0, 0.0], 2.0, 1e-4, &mut stats).unwrap() {
            OptOutcome::FarkasPrimal(cert) => {
                let check =
                    check_farkas_primal(&cert.constraints, &[-1.0, -1.0], &cert.vector).unwrap();
                assert!(check.valid, "{check:?}");
            }
            other => panic!("expected primal Farkas, got {other:?}"),
        }
    }

    #[test]
    fn dual_infeasibility_reaches_the_farkas_arm() {
        // ker([1,−1]) = span{(1,1)}: the primal is feasible and unbounded
        // below for c = (−1, 0), so the dual side is infeasible.
        let space = space_of(&[vec![1.0, -1.0]]);
        let c = [-1.0, 0.0];
        let mut stats = OracleStats::default();
        match near_optimal(&space, &[1.0, 0.0], &c, 2.0, 1e-4, &mut stats).unwrap() {
            OptOutcome::FarkasDual(cert) => {
                assert!(cert.inner < 0.0);
                let check = check_farkas_dual(&cert.constraints, &c, &cert.vector).unwrap();
                assert!(check.valid, "{check:?}");
            }
            other => panic!("expected dual Farkas, got {other:?}"),
        }
    }

    #[test]
    fn proximal_optimization_meets_its_contract() {
        let space = space_of(&[vec![1.0, 1.0, -1.0]]);
        let d = [1.0, -2.0, 2.0];
        let c = [1.0, 0.0, 1.0];
        let eps = 1e-2;
        let m = 4.0;
        let n = 3.0;
        let mut stats = OracleStats::default();
        let p = match prox_opt_oracle(&space, &d, &c, m, eps, &mut stats).unwrap() {
            ProxOptOutcome::Point(p) => p,
            other => panic!("expected a proximal point, got {other:?}"),
        };
        let lambda = lambda_set(&d, &c);
        let tau: f64 = lambda.iter().map(|&i| d[i].abs()).sum();
        assert!(space.shifted_residual(&p.x, &d) <= 1e-8 * (1.0 + norm_inf(&p.x)));
        assert!(norm_inf(&dense::sub(&p.x, &d)) <= 3.0 * m * m * n * tau * 1.001);
        assert!(p.s.iter().all(|&v| v >= 0.0));
        let c_perp = norm_1(&space.project(&c));
        for i in 0..3 {
            assert!(c[i] - p.c_tilde[i] >= -1e-12);
            assert!(c[i] - p.c_tilde[i] <= eps / n * c_perp * 1.001 + 1e-12);
        }
        let live = lambda_set(&p.x, &p.s);
        for &i in &live {
            assert!(p.x[i].abs() <= eps * tau * 1.001 + 1e-10);
        }
        assert_eq!(stats.prox_opt_calls, 1);
        assert_eq!(stats.eps_used, vec![eps]);
    }

    #[test]
    fn proximal_feasibility_specializes_the_optimizer() {
        let space = space_of(&[vec![1.0, 1.0, -1.0]]);
        let d = [1.0, -2.0, 2.0];
        let eps = 1e-2;
        let m = 4.0;
        let mut stats = OracleStats::default();
        let p = match prox_feas_oracle(&space, &d, m, eps, &mut stats).unwrap() {
            ProxFeasOutcome::Point(p) => p,
            other => panic!("expected a proximal point, got {other:?}"),
        };
        let d_neg = norm_1(&dense::neg_part(&d));
        assert!(norm_inf(&dense::neg_part(&p.x)) <= eps * d_neg * 1.001 + 1e-10);
        assert!(norm_inf(&dense::sub(&p.x, &d)) <= 3.0 * m * m * 3.0 * d_neg * 1.001);
    }

    #[test]
    fn zero_mass_shortcut_returns_the_instance() {
        let space = space_of(&[vec![1.0, 1.0, -1.0]]);
        // d ≥ 0 vanishing on supp(c): Λ(d, c) carries no d-mass.
        let d = [0.0, 1.0, 1.0];
        let c = [1.0, 0.0, 0.0];
        let mut stats = OracleStats::default();
        match prox_opt_oracle(&space, &d, &c, 2.0, 1e-3, &mut stats).unwrap() {
            ProxOptOutcome::Point(p) => {
                assert_eq!(p.x, d.to_vec());
                assert_eq!(p.s, c.to_vec());
                assert_eq!(p.c_tilde, c.to_vec());
            }
            other => panic!("expected the shortcut point, got {other:?}"),
        }
        assert_eq!(stats.extended_solves, 0);
    }
}
