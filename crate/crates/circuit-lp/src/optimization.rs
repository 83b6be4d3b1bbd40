//! Exact optimization driven by approximate solves.
//!
//! The entry point is [`solve_optimization`], which minimizes `⟨c, x⟩` over
//! `x ∈ W + d, x ≥ 0` and returns an *exactly* complementary primal–dual
//! pair: the supports of `x` and `s` are disjoint index sets, so every
//! product `x_i s_i` is a float-exact zero and optimality follows from
//! feasibility alone.
//!
//! The work happens in two nested loops. The [`inner_loop`] refines one
//! proximal solve into a complementary pair for a slightly perturbed shift
//! `d̃` ([`PerturbedOptimum`]): coordinates whose dual slack is conclusively
//! positive are frozen at zero and the remainder is solved recursively in
//! the coordinate-fixed subspace. The outer loop reads off the eventual
//! supports from the magnitudes of that pair, contracts the space, and
//! repeats; each round removes at least one dimension from `W⊥`, so it ends
//! within `codim W` rounds. What remains are two ordinary feasibility
//! problems — one per support — stitched together by minimum-norm lifts.
//!
//! Every magnitude argument along the way is an `M`-bounded lift or
//! elimination, so whenever the estimate is below the true circuit
//! imbalance the failure surfaces as a [`LiftingCertificate`] rather than a
//! wrong answer; if the final stitching is refused even though no lift
//! overflowed, the contraction history is replayed backwards
//! (certificate backtracking) to find the oversized circuit responsible.

use crate::circuits::{hoffman_point, HoffmanOutcome};
use crate::dense::{self, dot, gather, norm_1, norm_inf, scatter, Matrix, Vector};
use crate::error::{Error, Result};
use crate::feasibility::{solve_feasibility, FeasibilityOutcome};
use crate::oracles::{
    bound_check, clamp_nonneg, lambda_set, prox_opt_oracle, rewrap_dual_farkas,
    FarkasCertificate, OracleStats, ProxOptOutcome,
};
use crate::subspace::{certificate_from_lift, LiftingCertificate, SubspaceRep};
use crate::verify::check_farkas_dual;

// --- Perturbed complementary pairs ------------------------------------------

/// An exactly complementary pair for a slightly perturbed shift.
///
/// The perturbation budget is what makes the outer contraction sound: the
/// shift moves by at most `‖x‖∞ / (4n²M²)` in `‖·‖₁`, far below the
/// magnitude thresholds used to classify coordinates.
#[derive(Debug, Clone)]
pub struct PerturbedOptimum {
    /// Primal point `x ∈ W + d̃` with `x ≥ 0` exactly.
    pub x: Vector,
    /// Dual slack `s ∈ W⊥ + c` with `s ≥ 0` exactly and `x_i s_i = 0`
    /// coordinatewise.
    pub s: Vector,
    /// The perturbed shift, with `‖d̃ − d‖₁ ≤ ‖x‖∞ / (4n²M²)` and
    /// `d − d̃` supported where `x` was truncated.
    pub d_tilde: Vector,
}

/// Outcome of the [`inner_loop`].
#[derive(Debug, Clone)]
pub enum InnerOutcome {
    /// A perturbed complementary pair; the normal case.
    Refined(PerturbedOptimum),
    /// The dual side `s ∈ W⊥ + c, s ≥ 0` is empty. Only possible before
    /// any contraction, and re-proved exactly by the caller.
    DualInfeasible(FarkasCertificate),
    /// Evidence that `M < κ_W`.
    Lifting(LiftingCertificate),
}

/// Refines one proximal solve into an exactly complementary pair.
///
/// Requires a coordinatewise-nonnegative shift (the optimization driver
/// reshifts through a feasibility solve first). The accuracy target is
/// fixed from `M` and the dimension at entry and passed unchanged through
/// the recursion, which the telescoping of the activity bounds relies on.
pub fn inner_loop(
    space: &SubspaceRep,
    d: &[f64],
    c: &[f64],
    m_est: f64,
    stats: &mut OracleStats,
) -> Result<InnerOutcome> {
    let n = space.ambient_dim();
    if d.len() != n || c.len() != n {
        return Err(Error::DimensionMismatch(
            "inner loop: shift and objective must match the ambient dimension".into(),
        ));
    }
    if !dense::all_finite(d) || !dense::all_finite(c) {
        return Err(Error::NonFinite("inner loop input"));
    }
    if d.iter().any(|&v| v < 0.0) {
        return Err(Error::Guard(
            "inner loop requires a nonnegative shift".into(),
        ));
    }
    if m_est < 2.0 {
        return Err(Error::Guard("imbalance estimate must be at least 2".into()));
    }
    let eps = space
        .tol()
        .clamp_eps(1.0 / (32.0 * m_est.powi(4) * (n as f64).powi(4)));
    match inner_attempt(space, d, c, m_est, eps, stats) {
        Err(Error::InternalInconsistency(_)) => inner_attempt(space, d, c, m_est, eps / 2.0, stats),
        other => other,
    }
}

fn inner_attempt(
    space: &SubspaceRep,
    d: &[f64],
    c: &[f64],
    m_est: f64,
    eps: f64,
    stats: &mut OracleStats,
) -> Result<InnerOutcome> {
    match inner_rec(space, d, c, m_est, eps, 0, stats)? {
        InnerRec::Pair { x, s } => {
            let refined = def_tilde(space, d, c, &x, &s, m_est)?;
            Ok(InnerOutcome::Refined(refined))
        }
        InnerRec::DualFarkas(cert) => Ok(InnerOutcome::DualInfeasible(cert)),
        InnerRec::Lifting(cert) => Ok(InnerOutcome::Lifting(cert)),
    }
}

/// Truncates the pair onto complementary supports and charges the removed
/// mass to the shift: `x̃` zeroes every coordinate where the slack is
/// positive (or the primal negative), and `d̃ = d − x + x̃` keeps
/// `x̃ ∈ W + d̃` an exact identity of cosets.
fn def_tilde(
    space: &SubspaceRep,
    d: &[f64],
    c: &[f64],
    x: &[f64],
    s: &[f64],
    m_est: f64,
) -> Result<PerturbedOptimum> {
    let mut xt = x.to_vec();
    for &i in &lambda_set(x, s) {
        xt[i] = 0.0;
    }
    let d_tilde: Vector = (0..d.len()).map(|i| d[i] - x[i] + xt[i]).collect();
    let refined = PerturbedOptimum {
        x: xt,
        s: s.to_vec(),
        d_tilde,
    };
    measure_perturbed(space, d, c, &refined, m_est)?;
    Ok(refined)
}

/// Re-measures everything [`PerturbedOptimum`] promises; the acceptance
/// suite calls this on every pair the pipeline produces.
pub fn measure_perturbed(
    space: &SubspaceRep,
    d: &[f64],
    c: &[f64],
    refined: &PerturbedOptimum,
    m_est: f64,
) -> Result<()> {
    let tol = *space.tol();
    let n = space.ambient_dim() as f64;
    let x_scale = norm_inf(&refined.x);
    bound_check(
        "shift perturbation",
        norm_1(&dense::sub(&refined.d_tilde, d)),
        x_scale / (4.0 * n * n * m_est * m_est),
        x_scale,
        &tol,
    )?;
    if refined.x.iter().any(|&v| v < 0.0) || refined.s.iter().any(|&v| v < 0.0) {
        return Err(Error::InternalInconsistency(
            "perturbed pair has a negative coordinate".into(),
        ));
    }
    if refined.x.iter().zip(&refined.s).any(|(&a, &b)| a * b != 0.0) {
        return Err(Error::InternalInconsistency(
            "perturbed pair is not exactly complementary".into(),
        ));
    }
    let rp = space.shifted_residual(&refined.x, &refined.d_tilde);
    if rp > tol.residual_tol * (1.0 + x_scale + norm_inf(d)) {
        return Err(Error::ResidualTooLarge(format!(
            "perturbed primal leaves its coset by {rp:.3e}"
        )));
    }
    let rd = space.dual()?.shifted_residual(&refined.s, c);
    if rd > tol.residual_tol * (1.0 + norm_inf(&refined.s) + norm_inf(c)) {
        return Err(Error::ResidualTooLarge(format!(
            "perturbed dual slack leaves its coset by {rd:.3e}"
        )));
    }
    Ok(())
}

// --- The recursive refinement ------------------------------------------------

enum InnerRec {
    Pair { x: Vector, s: Vector },
    DualFarkas(FarkasCertificate),
    Lifting(LiftingCertificate),
}

/// One level of the refinement: a flipped proximal solve splits the
/// coordinates by slack magnitude, the undecided part recurses in the
/// coordinate-fixed subspace, and the recursive answer is lifted back
/// through `W⊥` under the `M`-guard.
fn inner_rec(
    space: &SubspaceRep,
    d: &[f64],
    c: &[f64],
    m_est: f64,
    eps: f64,
    depth: usize,
    stats: &mut OracleStats,
) -> Result<InnerRec> {
    let tol = *space.tol();
    let n = space.ambient_dim();
    if depth > n + 1 {
        return Err(Error::InternalInconsistency(
            "refinement recursed past the coordinate count".into(),
        ));
    }
    let dual_rep = space.dual()?;

    // Rebalance when the active part of the objective dwarfs what its
    // projection can support; the coset — all that matters — is unchanged.
    let c_proj = space.project(c);
    let c_mass = norm_1(&gather(c, &lambda_set(c, d)));
    let nf = n as f64;
    let c_work: Vector = if c_mass
        >= (m_est * norm_1(&c_proj)).max(norm_inf(c) / (4.0 * m_est * m_est * nf))
    {
        c_proj
    } else {
        c.to_vec()
    };

    // Proximal solve with the roles of the two sides exchanged: the
    // oracle's primal lives in W⊥ + c, its dual slack in W + d.
    let point = match prox_opt_oracle(&dual_rep, &c_work, d, m_est, eps, stats)? {
        ProxOptOutcome::Point(p) => p,
        ProxOptOutcome::FarkasPrimal(cert) => {
            // Infeasibility of the flipped primal is dual infeasibility of
            // this level. With a nonnegative objective (every level below
            // the first) the inner product cannot be negative, so a
            // negative rewrapped certificate can only appear at the top.
            let rewrapped = rewrap_dual_farkas(space, cert, c);
            if rewrapped.inner < 0.0 {
                return Ok(InnerRec::DualFarkas(rewrapped));
            }
            return Err(Error::InternalInconsistency(
                "flipped Farkas certificate lost its negativity".into(),
            ));
        }
        ProxOptOutcome::Lifting(cert) => return Ok(InnerRec::Lifting(cert)),
    };
    let s = point.x; // s ∈ W⊥ + c
    let x = point.s; // x ∈ W + d̃, x ≥ 0 exactly
    let d_tilde = point.c_tilde; // 0 ≤ d − d̃, one-sided

    // Slacks conclusively above the noise scale of the solve stay positive
    // in every refinement below, so their coordinates are settled; the
    // rest recurse.
    let s_active = norm_1(&gather(&s, &lambda_set(&s, &x)));
    let threshold = 16.0 * m_est.powi(3) * nf.powi(3) * s_active;
    let i_set: Vec<usize> = (0..n).filter(|&i| s[i] < threshold).collect();
    if i_set.is_empty() {
        return Ok(InnerRec::Pair { x, s });
    }
    if i_set.len() == n {
        return Err(Error::InternalInconsistency(
            "refinement failed to settle any coordinate".into(),
        ));
    }

    let sub_space = space.fix_coords(&i_set)?;
    let x_i = gather(&x, &i_set);
    let s_i = gather(&s, &i_set);
    let (w, z) = match inner_rec(&sub_space, &x_i, &s_i, m_est, eps, depth + 1, stats)? {
        InnerRec::Pair { x: w, s: z } => (w, z),
        // The recursive objective is a nonnegative slack, so its dual side
        // cannot be infeasible; reaching this arm means the floats lied.
        InnerRec::DualFarkas(_) => {
            return Err(Error::InternalInconsistency(
                "recursive refinement claimed an impossible dual Farkas certificate".into(),
            ))
        }
        InnerRec::Lifting(cert) => return Ok(InnerRec::Lifting(cert)),
    };

    // Carry the refined slack back into the full space; an oversized lift
    // is exactly the certificate the caller wants (κ is self-dual, so a
    // circuit of W⊥ indicts M just as well).
    let z_shift = dense::sub(&z, &s_i);
    let lifted = space.lift_dual(&i_set, &z_shift)?;
    if let Some(cert) = certificate_from_lift(&dual_rep, &i_set, &z_shift, &lifted, m_est) {
        return Ok(InnerRec::Lifting(cert));
    }
    let mut s_new = dense::add(&s, &lifted);
    for (k, &i) in i_set.iter().enumerate() {
        s_new[i] = z[k]; // exact on the settled coordinates
    }
    clamp_nonneg(&mut s_new, "refined slack", &tol)?;

    // The refined primal keeps the settled coordinates exactly at zero
    // (their slack is conclusive) and restores the unperturbed shift.
    let mut x_new = x.clone();
    for (k, &i) in i_set.iter().enumerate() {
        x_new[i] = w[k];
    }
    for i in 0..n {
        x_new[i] += d[i] - d_tilde[i];
    }
    clamp_nonneg(&mut x_new, "refined primal", &tol)?;

    measure_refinement(space, &dual_rep, d, c, &x_new, &s_new, m_est, eps)?;
    Ok(InnerRec::Pair { x: x_new, s: s_new })
}

/// The level contract of the refinement: memberships, proximity of the
/// slack to the objective, and near-complementary activity.
#[allow(clippy::too_many_arguments)]
fn measure_refinement(
    space: &SubspaceRep,
    dual_rep: &SubspaceRep,
    d: &[f64],
    c: &[f64],
    x: &[f64],
    s: &[f64],
    m_est: f64,
    eps: f64,
) -> Result<()> {
    let tol = *space.tol();
    let nf = space.ambient_dim() as f64;
    let rp = space.shifted_residual(x, d);
    if rp > tol.residual_tol * (1.0 + norm_inf(x) + norm_inf(d)) {
        return Err(Error::InternalInconsistency(format!(
            "refined primal leaves its coset by {rp:.3e}"
        )));
    }
    let rd = dual_rep.shifted_residual(s, c);
    if rd > tol.residual_tol * (1.0 + norm_inf(s) + norm_inf(c)) {
        return Err(Error::InternalInconsistency(format!(
            "refined slack leaves its coset by {rd:.3e}"
        )));
    }
    let c_mass = norm_1(&gather(c, &lambda_set(c, d)));
    bound_check(
        "slack proximity",
        norm_inf(&dense::sub(s, c)),
        16.0 * m_est * m_est * nf * c_mass,
        norm_inf(c),
        &tol,
    )?;
    let activity = norm_inf(&gather(x, &lambda_set(x, s)));
    bound_check(
        "residual activity",
        activity,
        2.0 * eps * nf * norm_inf(x),
        norm_inf(x),
        &tol,
    )?;
    Ok(())
}

// --- The outer contraction ---------------------------------------------------

/// Outcome of [`solve_optimization`].
#[derive(Debug, Clone)]
pub enum OptimizationOutcome {
    /// An optimal pair: `x ∈ W + d, x ≥ 0`, `s ∈ W⊥ + c, s ≥ 0`, and the
    /// supports are disjoint, so complementary slackness holds with exact
    /// zero products.
    Optimal { x: Vector, s: Vector },
    /// `x ∈ W + d, x ≥ 0` is empty; the certificate re-proves in exact
    /// arithmetic before being returned.
    PrimalInfeasible(FarkasCertificate),
    /// `s ∈ W⊥ + c, s ≥ 0` is empty — with a feasible primal the objective
    /// is unbounded below. Re-proved exactly before being returned.
    DualInfeasible(FarkasCertificate),
    /// Evidence that `M < κ_W`.
    Lifting(LiftingCertificate),
}

/// One round of the contraction, kept for certificate backtracking.
struct OuterRecord {
    /// The space the round solved over.
    level_space: SubspaceRep,
    /// The contracted space handed to the next round.
    end_space: SubspaceRep,
    /// The refined primal of the round (nonnegative, level coordinates).
    x_tilde: Vector,
    /// Medium coordinates: frozen into the primal support.
    i_m: Vec<usize>,
    /// Small coordinates inside the closure of the large ones: frozen into
    /// the dual support and pinned to zero in the contraction.
    i_s0: Vec<usize>,
    /// Small coordinates outside that closure: they survive to the next
    /// round.
    i_sp: Vec<usize>,
}

/// Minimizes `⟨c, x⟩` over `x ∈ W + d, x ≥ 0` exactly, using only
/// `M`-quality approximate solves.
///
/// Feasibility of both sides is established first (which also furnishes
/// the nonnegative reshift the contraction wants), so the result is one of
/// [`OptimizationOutcome::Optimal`], an exactly verified Farkas
/// certificate, or a lifting certificate showing `M < κ_W`.
pub fn solve_optimization(
    space: &SubspaceRep,
    d: &[f64],
    c: &[f64],
    m_est: f64,
    stats: &mut OracleStats,
) -> Result<OptimizationOutcome> {
    let n0 = space.ambient_dim();
    if d.len() != n0 || c.len() != n0 {
        return Err(Error::DimensionMismatch(
            "optimization: shift and objective must match the ambient dimension".into(),
        ));
    }
    if !dense::all_finite(d) || !dense::all_finite(c) {
        return Err(Error::NonFinite("optimization input"));
    }
    if m_est < 2.0 {
        return Err(Error::Guard("imbalance estimate must be at least 2".into()));
    }
    let tol = *space.tol();

    // Feasibility pre-passes. The primal one doubles as the nonnegative
    // reshift of d; the dual one settles unboundedness up front.
    let d_work = match solve_feasibility(space, d, m_est, stats)? {
        FeasibilityOutcome::Feasible(x) => x,
        FeasibilityOutcome::Infeasible(cert) => {
            return Ok(OptimizationOutcome::PrimalInfeasible(cert))
        }
        FeasibilityOutcome::Lifting(cert) => return Ok(OptimizationOutcome::Lifting(cert)),
    };
    let dual_top = space.dual()?;
    let s_feas = match solve_feasibility(&dual_top, c, m_est, stats)? {
        FeasibilityOutcome::Feasible(s) => s,
        FeasibilityOutcome::Infeasible(cert) => {
            let rewrapped = rewrap_dual_farkas(space, cert, c);
            let check = check_farkas_dual(space.constraints(), c, &rewrapped.vector)?;
            if !check.valid {
                return Err(Error::InternalInconsistency(
                    "dual Farkas certificate failed exact re-verification".into(),
                ));
            }
            return Ok(OptimizationOutcome::DualInfeasible(rewrapped));
        }
        FeasibilityOutcome::Lifting(cert) => return Ok(OptimizationOutcome::Lifting(cert)),
    };

    // Contraction state: `live` maps level coordinates back to original
    // ones, `b_set`/`n_set` collect the eventual primal/dual supports.
    let mut cur = space.clone();
    let mut d_cur = d_work.clone();
    let mut c_cur = cur.project(c);
    let mut live: Vec<usize> = (0..n0).collect();
    let mut b_set: Vec<usize> = Vec::new();
    let mut n_set: Vec<usize> = Vec::new();
    let mut records: Vec<OuterRecord> = Vec::new();
    let round_cap = space.codim() + 1;

    while !live.is_empty() {
        // d ∈ W ends the contraction: zero is optimal on what is left.
        let d_dist = norm_1(&cur.min_norm_point(&d_cur));
        if d_dist <= tol.residual_tol * (1.0 + norm_1(&d_cur)) {
            break;
        }
        if records.len() >= round_cap {
            return Err(Error::InternalInconsistency(
                "contraction exceeded the constraint rank".into(),
            ));
        }

        let refined = match inner_loop(&cur, &d_cur, &c_cur, m_est, stats)? {
            InnerOutcome::Refined(r) => r,
            InnerOutcome::DualInfeasible(cert) => {
                // The dual pre-pass succeeded, so this is only credible at
                // the top level and only if it re-proves exactly.
                if records.is_empty() {
                    let rewrapped = FarkasCertificate {
                        constraints: space.constraints().clone(),
                        inner: dot(c, &cert.vector),
                        vector: cert.vector,
                    };
                    let check = check_farkas_dual(space.constraints(), c, &rewrapped.vector)?;
                    if check.valid && rewrapped.inner < 0.0 {
                        return Ok(OptimizationOutcome::DualInfeasible(rewrapped));
                    }
                }
                return Err(Error::InternalInconsistency(
                    "contraction met a dual Farkas certificate on a feasible level".into(),
                ));
            }
            InnerOutcome::Lifting(cert) => return Ok(OptimizationOutcome::Lifting(cert)),
        };

        // Classify by primal magnitude: large and medium coordinates are
        // committed to the primal support, small ones inside the closure
        // of the large block to the dual support; small ones outside it
        // stay undecided and form the next level.
        let xt = &refined.x;
        let x_max = norm_inf(xt);
        if x_max == 0.0 {
            return Err(Error::InternalInconsistency(
                "refinement returned a zero primal while d ∉ W".into(),
            ));
        }
        let k = cur.ambient_dim();
        let kf = k as f64;
        let big = x_max / kf;
        let small = x_max / (3.0 * kf * kf * m_est);
        let mut i_l: Vec<usize> = Vec::new();
        let mut i_m: Vec<usize> = Vec::new();
        let mut i_s: Vec<usize> = Vec::new();
        for i in 0..k {
            if xt[i] > big {
                i_l.push(i);
            } else if xt[i] > small {
                i_m.push(i);
            } else {
                i_s.push(i);
            }
        }
        let closure = cur.closure(&i_l);
        let (i_s0, i_sp): (Vec<usize>, Vec<usize>) = i_s
            .iter()
            .partition(|&&i| closure.binary_search(&i).is_ok());

        b_set.extend(i_l.iter().chain(i_m.iter()).map(|&i| live[i]));
        n_set.extend(i_s0.iter().map(|&i| live[i]));

        // Contract: pin the dual-bound coordinates to zero, then project
        // onto the undecided ones. The closure property makes the pinning
        // invisible to that projection, so the two spaces agree there.
        let next = {
            let a = cur.constraints();
            let mut rows: Vec<Vec<f64>> = (0..a.nrows()).map(|r| a.row(r).to_vec()).collect();
            for &j in &i_s0 {
                let mut unit = vec![0.0; k];
                unit[j] = 1.0;
                rows.push(unit);
            }
            let pinned = SubspaceRep::from_matrix(&Matrix::from_rows_dims(&rows, k), &tol)?;
            pinned.project_coords(&i_sp)?
        };

        records.push(OuterRecord {
            level_space: cur.clone(),
            end_space: next.clone(),
            x_tilde: refined.x.clone(),
            i_m,
            i_s0,
            i_sp: i_sp.clone(),
        });

        d_cur = gather(&d_cur, &i_sp);
        c_cur = gather(&refined.s, &i_sp);
        live = i_sp.iter().map(|&i| live[i]).collect();
        cur = next;
    }
    stats.outer_iterations = stats.outer_iterations.max(records.len());

    // Whatever is still live follows the last refined slack: positive
    // slack pins the primal to zero, zero slack frees it.
    if records.is_empty() {
        // No contraction happened, so d ∈ W: the origin is optimal and the
        // dual pre-pass point is already complementary to it.
        return Ok(OptimizationOutcome::Optimal {
            x: vec![0.0; n0],
            s: s_feas,
        });
    }
    for (i, &orig) in live.iter().enumerate() {
        if c_cur[i] > 0.0 {
            n_set.push(orig);
        } else {
            b_set.push(orig);
        }
    }
    b_set.sort_unstable();
    n_set.sort_unstable();

    // Primal stitching. A refusal here means the partition disagrees with
    // exact feasibility, which (barring an inconsistency) can only happen
    // when M < κ — replay the contraction to locate the witness.
    let x_star = match stitch_support(space, &d_work, &b_set, &n_set, m_est, stats)? {
        Stitch::Point(x) => x,
        Stitch::Lifting(cert) => return Ok(OptimizationOutcome::Lifting(cert)),
        Stitch::Mismatch(why) => {
            return match certificate_backtrack(&records, space, &d_work, m_est) {
                Some(cert) => Ok(OptimizationOutcome::Lifting(cert)),
                None => Err(Error::InternalInconsistency(format!(
                    "primal stitching refused without a certificate: {why}"
                ))),
            }
        }
    };
    // Dual stitching is symmetric with the roles of the supports swapped.
    // The refined slacks extend across every contraction by construction,
    // so a refusal on this side is an inconsistency, not a certificate.
    let s_star = match stitch_support(&dual_top, c, &n_set, &b_set, m_est, stats)? {
        Stitch::Point(s) => s,
        Stitch::Lifting(cert) => return Ok(OptimizationOutcome::Lifting(cert)),
        Stitch::Mismatch(why) => {
            return Err(Error::InternalInconsistency(format!(
                "dual stitching refused: {why}"
            )))
        }
    };

    verify_optimal_pair(space, d, c, &x_star, &s_star)?;
    Ok(OptimizationOutcome::Optimal {
        x: x_star,
        s: s_star,
    })
}

// --- Final stitching ---------------------------------------------------------

enum Stitch {
    Point(Vector),
    Lifting(LiftingCertificate),
    Mismatch(String),
}

/// Solves `x ∈ W + shift, x ≥ 0, x_off = 0` by pinning the `off`
/// coordinates with a minimum-norm lift and running plain feasibility on
/// the `on` coordinates of the coordinate-fixed subspace.
fn stitch_support(
    space: &SubspaceRep,
    shift: &[f64],
    on: &[usize],
    off: &[usize],
    m_est: f64,
    stats: &mut OracleStats,
) -> Result<Stitch> {
    let n = space.ambient_dim();
    let pinned: Vector = if off.is_empty() {
        shift.to_vec()
    } else {
        let target: Vector = gather(shift, off).iter().map(|&v| -v).collect();
        let w = match space.lift(off, &target) {
            Ok(w) => w,
            Err(Error::InconsistentProjection { .. }) => {
                return Ok(Stitch::Mismatch(
                    "the frozen coordinates cannot be zeroed inside the coset".into(),
                ))
            }
            Err(e) => return Err(e),
        };
        if let Some(cert) = certificate_from_lift(space, off, &target, &w, m_est) {
            return Ok(Stitch::Lifting(cert));
        }
        let mut p = dense::add(shift, &w);
        for &j in off {
            p[j] = 0.0;
        }
        p
    };
    if on.is_empty() {
        if norm_inf(&pinned) > space.tol().residual_tol * (1.0 + norm_inf(shift)) {
            return Ok(Stitch::Mismatch(
                "an empty support left a nonzero pinned point".into(),
            ));
        }
        return Ok(Stitch::Point(vec![0.0; n]));
    }
    let sub_space = space.fix_coords(on)?;
    match solve_feasibility(&sub_space, &gather(&pinned, on), m_est, stats)? {
        FeasibilityOutcome::Feasible(x_on) => Ok(Stitch::Point(scatter(n, on, &x_on))),
        FeasibilityOutcome::Infeasible(_) => Ok(Stitch::Mismatch(
            "the support admits no nonnegative point".into(),
        )),
        FeasibilityOutcome::Lifting(cert) => Ok(Stitch::Lifting(cert)),
    }
}

/// Final gate on the assembled pair: exact signs, exact complementary
/// products, and membership of both sides in their cosets.
fn verify_optimal_pair(
    space: &SubspaceRep,
    d: &[f64],
    c: &[f64],
    x: &[f64],
    s: &[f64],
) -> Result<()> {
    let tol = *space.tol();
    if x.iter().any(|&v| v < 0.0) || s.iter().any(|&v| v < 0.0) {
        return Err(Error::InternalInconsistency(
            "assembled pair has a negative coordinate".into(),
        ));
    }
    if x.iter().zip(s).any(|(&a, &b)| a * b != 0.0) {
        return Err(Error::InternalInconsistency(
            "assembled pair is not exactly complementary".into(),
        ));
    }
    let rp = space.shifted_residual(x, d);
    if rp > 10.0 * tol.residual_tol * (1.0 + norm_inf(x) + norm_inf(d)) {
        return Err(Error::ResidualTooLarge(format!(
            "assembled primal leaves its coset by {rp:.3e}"
        )));
    }
    let rd = space.dual()?.shifted_residual(s, c);
    if rd > 10.0 * tol.residual_tol * (1.0 + norm_inf(s) + norm_inf(c)) {
        return Err(Error::ResidualTooLarge(format!(
            "assembled dual slack leaves its coset by {rd:.3e}"
        )));
    }
    Ok(())
}

// --- Certificate backtracking --------------------------------------------------

/// Replays the contraction backwards looking for the oversized circuit
/// that broke the partition: starting from the zero vector on the last
/// level, each round is undone by a bounded in-box correction on the
/// contracted space followed by a minimum-norm lift into the level space.
/// Every correction and every lift is `M`-guarded, and any overflow is the
/// certificate. Returns `None` when the replay finishes without one (the
/// caller then reports an inconsistency, since a clean replay contradicts
/// the stitching refusal that triggered it).
fn certificate_backtrack(
    records: &[OuterRecord],
    top: &SubspaceRep,
    d_work: &[f64],
    m_est: f64,
) -> Option<LiftingCertificate> {
    let last = records.last()?;
    let mut z: Vector = vec![0.0; last.end_space.ambient_dim()];
    for rec in records.iter().rev() {
        match pull_back(rec, &z, m_est) {
            Ok(PullBack::Lifted(next)) => z = next,
            Ok(PullBack::Certificate(cert)) => return Some(cert),
            Err(_) => return None,
        }
    }
    // One more bounded walk against the original box; the walk's own
    // eliminations are the last chance to surface a certificate.
    let start = top.project(&dense::sub(&z, d_work));
    let mut lower: Vec<f64> = d_work.iter().map(|&v| -v).collect();
    for (l, &s) in lower.iter_mut().zip(&start) {
        *l = l.min(s);
    }
    let upper = vec![f64::INFINITY; top.ambient_dim()];
    match hoffman_point(top, &start, &lower, &upper, m_est) {
        Ok(HoffmanOutcome::Certificate(cert)) => Some(cert),
        _ => None,
    }
}

enum PullBack {
    Lifted(Vector),
    Certificate(LiftingCertificate),
}

/// Undoes one contraction round around the candidate `z` on its end space.
fn pull_back(rec: &OuterRecord, z: &[f64], m_est: f64) -> Result<PullBack> {
    let end = &rec.end_space;
    let x_end = gather(&rec.x_tilde, &rec.i_sp);
    // A bounded correction of z − x̃ inside the box y ≥ −x̃; projection
    // absorbs the coset drift the perturbed shifts accumulated.
    let start = end.project(&dense::sub(z, &x_end));
    let mut lower: Vec<f64> = x_end.iter().map(|&v| -v).collect();
    for (l, &s) in lower.iter_mut().zip(&start) {
        *l = l.min(s);
    }
    let upper = vec![f64::INFINITY; end.ambient_dim()];
    let y = match hoffman_point(end, &start, &lower, &upper, m_est)? {
        HoffmanOutcome::Point(y) => y,
        HoffmanOutcome::Certificate(cert) => return Ok(PullBack::Certificate(cert)),
    };
    // Lift the correction, the pinned zeroes, and the untouched medium
    // block back into the level space under the M-guard.
    let mut pins: Vec<(usize, f64)> = Vec::new();
    for (k, &j) in rec.i_sp.iter().enumerate() {
        pins.push((j, y[k]));
    }
    for &j in &rec.i_s0 {
        pins.push((j, -rec.x_tilde[j]));
    }
    for &j in &rec.i_m {
        pins.push((j, 0.0));
    }
    pins.sort_unstable_by_key(|&(j, _)| j);
    let idx: Vec<usize> = pins.iter().map(|&(j, _)| j).collect();
    let vals: Vec<f64> = pins.iter().map(|&(_, v)| v).collect();
    let v = rec.level_space.lift(&idx, &vals)?;
    if let Some(cert) = certificate_from_lift(&rec.level_space, &idx, &vals, &v, m_est) {
        return Ok(PullBack::Certificate(cert));
    }
    let mut next = dense::add(&rec.x_tilde, &v);
    for t in next.iter_mut() {
        if *t < 0.0 {
            *t = 0.0;
        }
    }
    Ok(PullBack::Lifted(next))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subspace::check_lift_certificate;
    use crate::tol::Tolerance;
    use crate::verify::{check_farkas_primal, rat_to_f64, subspace_ground_truth, GroundTruth};

    fn space(rows: &[Vec<f64>]) -> SubspaceRep {
        SubspaceRep::from_matrix(&Matrix::from_rows(rows), &Tolerance::default()).unwrap()
    }

    fn assert_optimal(
        a: &Matrix,
        sp: &SubspaceRep,
        d: &[f64],
        c: &[f64],
        x: &[f64],
        s: &[f64],
    ) {
        assert!(x.iter().all(|&v| v >= 0.0));
        assert!(s.iter().all(|&v| v >= 0.0));
        assert!(
            x.iter().zip(s).all(|(&p, &q)| p * q == 0.0),
            "complementary products must be exact zeros"
        );
        let scale = 1.0 + norm_inf(x) + norm_inf(d);
        assert!(sp.shifted_residual(x, d) <= 1e-8 * scale);
        let dual = sp.dual().unwrap();
        let dscale = 1.0 + norm_inf(s) + norm_inf(c);
        assert!(dual.shifted_residual(s, c) <= 1e-8 * dscale);
        match subspace_ground_truth(a, d, c).unwrap() {
            GroundTruth::Optimal { objective, .. } => {
                let exact = rat_to_f64(&objective);
                let got = dot(c, x);
                assert!(
                    (got - exact).abs() <= 1e-7 * (1.0 + exact.abs()),
                    "objective {got} vs exact {exact}"
                );
            }
            other => panic!("instance should have a bounded optimum, got {other:?}"),
        }
    }

    #[test]
    fn inner_loop_returns_an_exactly_complementary_pair() {
        let sp = space(&[vec![1.0, 1.0, -1.0]]);
        let d = [2.0, 1.0, 0.0];
        let c = [1.0, 2.0, 0.5];
        let mut stats = OracleStats::default();
        let refined = match inner_loop(&sp, &d, &c, 4.0, &mut stats).unwrap() {
            InnerOutcome::Refined(r) => r,
            other => panic!("expected a refined pair, got {other:?}"),
        };
        measure_perturbed(&sp, &d, &c, &refined, 4.0).unwrap();
        assert!(refined.x.iter().zip(&refined.s).all(|(&a, &b)| a * b == 0.0));
        // The pair certifies optimality of the perturbed instance, whose
        // optimum differs from the exact one by at most the perturbation.
        let obj = dot(&c, &refined.x);
        match subspace_ground_truth(&Matrix::from_rows(&[vec![1.0, 1.0, -1.0]]), &d, &c).unwrap() {
            GroundTruth::Optimal { objective, .. } => {
                let exact = rat_to_f64(&objective);
                assert!((obj - exact).abs() <= 1e-3 * (1.0 + exact.abs()));
            }
            other => panic!("unexpected ground truth {other:?}"),
        }
    }

    #[test]
    fn contracting_instance_reaches_the_exact_optimum() {
        let rows = vec![vec![1.0, 1.0, -1.0]];
        let a = Matrix::from_rows(&rows);
        let sp = space(&rows);
        let d = [2.0, 1.0, 0.0];
        let c = [1.0, 2.0, 0.5];
        let mut stats = OracleStats::default();
        match solve_optimization(&sp, &d, &c, 4.0, &mut stats).unwrap() {
            OptimizationOutcome::Optimal { x, s } => {
                assert_optimal(&a, &sp, &d, &c, &x, &s);
            }
            other => panic!("expected an optimum, got {other:?}"),
        }
        assert!(stats.outer_iterations <= sp.codim());
    }

    #[test]
    fn in_space_shift_exits_without_contracting() {
        // d ∈ W, so the origin is optimal for every objective.
        let sp = space(&[vec![1.0, 1.0, -1.0]]);
        let d = [2.0, 1.0, 3.0];
        let c = [1.0, 2.0, 0.5];
        let mut stats = OracleStats::default();
        match solve_optimization(&sp, &d, &c, 4.0, &mut stats).unwrap() {
            OptimizationOutcome::Optimal { x, s } => {
                assert_eq!(norm_inf(&x), 0.0);
                assert!(s.iter().all(|&v| v >= 0.0));
            }
            other => panic!("expected the origin, got {other:?}"),
        }
        assert_eq!(stats.outer_iterations, 0);
    }

    #[test]
    fn matches_the_rational_simplex_on_fixed_instances() {
        let cases: Vec<(Vec<Vec<f64>>, Vec<f64>, Vec<f64>)> = vec![
            (
                vec![vec![1.0, 0.0, 1.0], vec![0.0, 1.0, 1.0]],
                vec![1.0, 1.0, 0.0],
                vec![1.0, 1.0, 1.0],
            ),
            (
                vec![vec![2.0, -1.0, 0.0, 3.0]],
                vec![1.0, 0.0, 2.0, 0.0],
                vec![0.0, 1.0, 1.0, 0.5],
            ),
            (
                vec![vec![1.0, 2.0, 0.0, -1.0], vec![0.0, 1.0, 1.0, 1.0]],
                vec![1.0, 0.0, 2.0, 1.0],
                vec![1.0, -1.0, 2.0, 0.0],
            ),
        ];
        for (rows, d, c) in cases {
            let a = Matrix::from_rows(&rows);
            let sp = space(&rows);
            let mut stats = OracleStats::default();
            match solve_optimization(&sp, &d, &c, 8.0, &mut stats).unwrap() {
                OptimizationOutcome::Optimal { x, s } => {
                    assert_optimal(&a, &sp, &d, &c, &x, &s);
                }
                other => panic!("expected an optimum for {rows:?}, got {other:?}"),
            }
        }
    }

    #[test]
    fn primal_infeasibility_is_certified_exactly() {
        let sp = space(&[vec![1.0, 1.0]]);
        let d = [-1.0, -1.0];
        let c = [1.0, 1.0];
        let mut stats = OracleStats::default();
        match solve_optimization(&sp, &d, &c, 4.0, &mut stats).unwrap() {
            OptimizationOutcome::PrimalInfeasible(cert) => {
                let check = check_farkas_primal(&cert.constraints, &d, &cert.vector).unwrap();
                assert!(check.valid);
            }
            other => panic!("expected primal infeasibility, got {other:?}"),
        }
    }

    #[test]
    fn dual_infeasibility_is_certified_exactly() {
        // ker([1,−1]) ∋ (1,1) and c = (−1,0): the objective is unbounded.
        let sp = space(&[vec![1.0, -1.0]]);
        let d = [1.0, 1.0];
        let c = [-1.0, 0.0];
        let mut stats = OracleStats::default();
        match solve_optimization(&sp, &d, &c, 4.0, &mut stats).unwrap() {
            OptimizationOutcome::DualInfeasible(cert) => {
                assert!(cert.inner < 0.0);
                let check = check_farkas_dual(&cert.constraints, &c, &cert.vector).unwrap();
                assert!(check.valid);
            }
            other => panic!("expected dual infeasibility, got {other:?}"),
        }
    }

    #[test]
    fn escalation_recovers_from_an_optimistic_estimate() {
        // The kernel generator (1, 100) has imbalance 100; starting from
        // M = 2 the driver loop below must converge after finitely many
        // escalations, each one backed by a verifiable certificate or by
        // an internal inconsistency of the overstretched solve.
        let rows = vec![vec![100.0, -1.0]];
        let a = Matrix::from_rows(&rows);
        let sp = space(&rows);
        let d = [1.0, -1.0];
        let c = [0.0, 1.0];
        let mut m_est = 2.0f64;
        let mut attempts = 0;
        loop {
            attempts += 1;
            assert!(attempts <= 5, "escalation failed to converge");
            let mut stats = OracleStats::default();
            match solve_optimization(&sp, &d, &c, m_est, &mut stats) {
                Ok(OptimizationOutcome::Optimal { x, s }) => {
                    assert_optimal(&a, &sp, &d, &c, &x, &s);
                    break;
                }
                Ok(OptimizationOutcome::Lifting(cert)) => {
                    let again = check_lift_certificate(
                        &SubspaceRep::from_matrix(&cert.constraints, &Tolerance::default())
                            .unwrap(),
                        &cert.index_set,
                        &cert.point,
                        m_est,
                    )
                    .unwrap();
                    assert!(again.is_some(), "lifting certificate must re-verify");
                    m_est = (2.0 * cert.ratio).max(m_est * m_est);
                }
                Ok(other) => panic!("unexpected outcome {other:?}"),
                Err(Error::InternalInconsistency(_)) => m_est *= m_est,
                Err(e) => panic!("unexpected error {e}"),
            }
        }
        assert!(m_est >= 2.0);
    }
}
