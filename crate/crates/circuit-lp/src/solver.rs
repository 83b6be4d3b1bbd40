//! The approximate LP solver layer.
//!
//! Everything above this module consumes approximate solutions through a
//! single narrow interface: a [`SolverRequest`] describing a standard-form
//! LP `min ⟨c,x⟩ s.t. Ax = b, x ≥ 0` together with a strictly interior
//! warm start, an accuracy parameter `δ`, and diameter bounds `R_P`, `R_D`
//! covering the primal and dual solutions the caller cares about. A
//! response is accepted only if it satisfies, re-measured from scratch:
//!
//! ```text
//!   (i)   ⟨c,x⟩ − ⟨b,y⟩ ≤ δ·(‖c‖₂·R_P + ‖b‖₂·R_D)
//!   (ii)  ‖Ax − b‖₂     ≤ δ·(‖A‖_F·R_P + ‖b‖₂)
//!   (iii) ‖Aᵀy + s − c‖₂ ≤ δ·(‖A‖_F·R_D + ‖c‖₂)
//! ```
//!
//! with `x, s ≥ 0` and `‖x‖₂ ≤ R_P`, `‖s‖₂ ≤ R_D`. The built-in solver is
//! a feasible-start, short-step primal–dual interior-point method: it
//! first damps Newton steps at the warm-start duality measure until the
//! centrality proximity `‖x∘s/μ − 1‖₂` drops below 0.225, then shrinks
//! `μ ← (1 − 1/(8√N))·μ` with one Newton step per shrink until the
//! duality gap reaches its target. External solvers can be registered via
//! [`register_external_solver`]; their responses pass through exactly the
//! same contract validation, so a misbehaving plug-in is rejected rather
//! than silently corrupting the pipeline.

use std::io::Write as _;
use std::process::{Command, Stdio};
use std::sync::{Arc, RwLock};

use crate::dense::{self, dot, norm_2, Matrix, Vector};
use crate::error::{Error, Result};
use crate::tol::Tolerance;

/// Relative floor on the duality-gap target: no request is allowed to ask
/// for a gap below `GAP_FLOOR_REL` times the warm start's gap, since double
/// precision cannot track central-path progress past that point.
pub const GAP_FLOOR_REL: f64 = 1e-14;

/// Floor on the accuracy parameter used in the residual bounds: forming
/// `b − Ax` cancels like-sized terms, leaving roundoff of this relative
/// size no matter how far the iteration runs.
pub const RESIDUAL_DELTA_FLOOR: f64 = 1e-14;

/// Centrality proximity at which damped centering hands over to the
/// short-step phase.
const CENTER_PROX: f64 = 0.225;

/// Proximity beyond which the short-step phase stops and re-centers.
const RECENTER_PROX: f64 = 0.45;

/// Fraction-to-boundary factor keeping iterates strictly interior.
const BOUNDARY_FRACTION: f64 = 0.999_95;

/// Default total iteration cap (centering + short steps).
pub const DEFAULT_ITERATION_CAP: usize = 100_000;

/// A standard-form LP together with the accuracy contract the caller
/// expects the solution to honour.
#[derive(Debug, Clone)]
pub struct SolverRequest {
    /// Constraint matrix of `Ax = b`.
    pub a: Matrix,
    /// Right-hand side.
    pub b: Vector,
    /// Objective.
    pub c: Vector,
    /// Strictly positive primal warm start with `A·x ≈ b`.
    pub primal_start: Vector,
    /// Dual multiplier warm start.
    pub dual_y_start: Vector,
    /// Strictly positive dual slack warm start with `Aᵀy + s ≈ c`.
    pub dual_slack_start: Vector,
    /// Accuracy parameter `δ ∈ (0, 1]` scaling all three contract bounds.
    pub delta: f64,
    /// Euclidean diameter bound on the primal solutions of interest.
    pub radius_primal: f64,
    /// Euclidean diameter bound on the dual slacks of interest.
    pub radius_dual: f64,
    /// Structure hint: the trailing `box_rows` constraint rows are
    /// `[I | I]` box rows over a `2·box_rows`-column system, as produced by
    /// the extended-system assembly. Lets the built-in solver reduce each
    /// Newton solve to a Schur complement on the leading block. Zero means
    /// no assumed structure. Accuracy semantics are unaffected.
    pub box_rows: usize,
    /// Iteration cap for the built-in solver; `0` selects
    /// [`DEFAULT_ITERATION_CAP`].
    pub iteration_cap: usize,
}

impl SolverRequest {
    /// Builds a request with no structure hint and the default iteration
    /// cap.
    pub fn new(
        a: Matrix,
        b: Vector,
        c: Vector,
        primal_start: Vector,
        dual_y_start: Vector,
        dual_slack_start: Vector,
        delta: f64,
        radius_primal: f64,
        radius_dual: f64,
    ) -> Self {
        SolverRequest {
            a,
            b,
            c,
            primal_start,
            dual_y_start,
            dual_slack_start,
            delta,
            radius_primal,
            radius_dual,
            box_rows: 0,
            iteration_cap: 0,
        }
    }

    /// Duality-gap bound `(i)` the response must satisfy, floored at
    /// [`GAP_FLOOR_REL`] times the warm start's gap.
    pub fn gap_target(&self) -> f64 {
        let contract =
            self.delta * (norm_2(&self.c) * self.radius_primal + norm_2(&self.b) * self.radius_dual);
        let floor = GAP_FLOOR_REL * dot(&self.primal_start, &self.dual_slack_start).abs();
        contract.max(floor)
    }

    /// Primal-residual bound `(ii)`.
    ///
    /// Residuals are differences of like-sized quantities, so no amount of
    /// iterating pushes them below the cancellation floor of the Newton
    /// solves; the accuracy parameter is floored at
    /// [`RESIDUAL_DELTA_FLOOR`] for the residual bounds only (the gap
    /// bound keeps the caller's `δ` — positive sums lose no precision).
    pub fn primal_residual_target(&self) -> f64 {
        self.delta.max(RESIDUAL_DELTA_FLOOR)
            * (self.a.frobenius() * self.radius_primal + norm_2(&self.b))
    }

    /// Dual-residual bound `(iii)`, floored like the primal one.
    pub fn dual_residual_target(&self) -> f64 {
        self.delta.max(RESIDUAL_DELTA_FLOOR)
            * (self.a.frobenius() * self.radius_dual + norm_2(&self.c))
    }

    fn validate(&self) -> Result<()> {
        let (rows, cols) = (self.a.nrows(), self.a.ncols());
        if self.b.len() != rows
            || self.c.len() != cols
            || self.primal_start.len() != cols
            || self.dual_y_start.len() != rows
            || self.dual_slack_start.len() != cols
        {
            return Err(Error::DimensionMismatch(format!(
                "solver request shapes disagree with a {rows}×{cols} matrix"
            )));
        }
        if !(self.a.all_finite()
            && dense::all_finite(&self.b)
            && dense::all_finite(&self.c)
            && dense::all_finite(&self.primal_start)
            && dense::all_finite(&self.dual_y_start)
            && dense::all_finite(&self.dual_slack_start))
        {
            return Err(Error::NonFinite("solver request"));
        }
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return Err(Error::DimensionMismatch(format!(
                "delta must lie in (0, 1], got {}",
                self.delta
            )));
        }
        if !(self.radius_primal > 0.0 && self.radius_primal.is_finite())
            || !(self.radius_dual > 0.0 && self.radius_dual.is_finite())
        {
            return Err(Error::DimensionMismatch(
                "diameter bounds must be positive and finite".into(),
            ));
        }
        if self.primal_start.iter().any(|&v| v <= 0.0)
            || self.dual_slack_start.iter().any(|&v| v <= 0.0)
        {
            return Err(Error::DimensionMismatch(
                "warm start must be strictly interior".into(),
            ));
        }
        if self.box_rows > 0 {
            if self.a.ncols() != 2 * self.box_rows || self.a.nrows() <= self.box_rows {
                return Err(Error::DimensionMismatch(format!(
                    "box structure hint {} does not fit a {rows}×{cols} system",
                    self.box_rows
                )));
            }
        }
        Ok(())
    }

    fn cap(&self) -> usize {
        if self.iteration_cap == 0 {
            DEFAULT_ITERATION_CAP
        } else {
            self.iteration_cap
        }
    }
}

/// An approximate primal–dual solution as returned by a solver backend.
#[derive(Debug, Clone)]
pub struct SolverResponse {
    /// Approximate primal solution (nonnegative).
    pub primal: Vector,
    /// Approximate dual multipliers.
    pub dual_y: Vector,
    /// Approximate dual slack (nonnegative).
    pub dual_slack: Vector,
    /// Total Newton iterations spent (0 for backends that do not report).
    pub iterations: usize,
    /// Duality gap `⟨x,s⟩` recorded after each short-step iteration.
    pub gap_history: Vec<f64>,
    /// Whether the backend reached its internal targets (as opposed to
    /// stopping at an iteration cap with its best iterate).
    pub converged: bool,
}

impl SolverResponse {
    /// Re-measured duality gap `⟨c,x⟩ − ⟨b,y⟩`.
    pub fn objective_gap(&self, req: &SolverRequest) -> f64 {
        dot(&req.c, &self.primal) - dot(&req.b, &self.dual_y)
    }

    /// Re-measured complementarity `⟨x,s⟩`.
    pub fn complementarity(&self) -> f64 {
        dot(&self.primal, &self.dual_slack)
    }

    /// Re-measured primal residual `‖Ax − b‖₂`.
    pub fn primal_residual(&self, req: &SolverRequest) -> f64 {
        norm_2(&dense::sub(&req.a.matvec(&self.primal), &req.b))
    }

    /// Re-measured dual residual `‖Aᵀy + s − c‖₂`.
    pub fn dual_residual(&self, req: &SolverRequest) -> f64 {
        let mut r = req.a.tr_matvec(&self.dual_y);
        for (ri, (&si, &ci)) in r.iter_mut().zip(self.dual_slack.iter().zip(req.c.iter())) {
            *ri += si - ci;
        }
        norm_2(&r)
    }
}

/// Backend interface. Implementations must be safe to call from multiple
/// threads; the pipeline solves independent subproblems in parallel.
pub trait SolverAdapter: Send + Sync {
    /// Produces an approximate solution for `req`. The returned vectors
    /// are re-validated against the accuracy contract by the caller.
    fn solve(&self, req: &SolverRequest) -> Result<SolverResponse>;
}

impl<F> SolverAdapter for F
where
    F: Fn(&SolverRequest) -> Result<SolverResponse> + Send + Sync,
{
    fn solve(&self, req: &SolverRequest) -> Result<SolverResponse> {
        self(req)
    }
}

struct Registration {
    name: String,
    adapter: Arc<dyn SolverAdapter>,
}

static EXTERNAL_SOLVER: RwLock<Option<Registration>> = RwLock::new(None);

/// Registers an external solver backend under `name`. All subsequent
/// [`solve_approx`] calls route to it (their responses are still
/// contract-validated). Intended to be called once at startup.
pub fn register_external_solver(name: &str, adapter: Arc<dyn SolverAdapter>) {
    let mut slot = EXTERNAL_SOLVER.write().unwrap();
    *slot = Some(Registration {
        name: name.to_string(),
        adapter,
    });
}

/// Removes any registered external solver, restoring the built-in one.
pub fn clear_external_solver() {
    let mut slot = EXTERNAL_SOLVER.write().unwrap();
    *slot = None;
}

/// Name of the currently registered external solver, if any.
pub fn external_solver_name() -> Option<String> {
    EXTERNAL_SOLVER
        .read()
        .unwrap()
        .as_ref()
        .map(|r| r.name.clone())
}

/// Solves `req` with the registered backend (or the built-in one) and
/// re-validates the response against the accuracy contract. A response
/// failing validation is rejected with [`Error::ContractViolation`], or
/// with [`Error::IterationLimit`] when the backend itself reported running
/// out of iterations.
pub fn solve_approx(req: &SolverRequest, tol: &Tolerance) -> Result<SolverResponse> {
    req.validate()?;
    let external = {
        let slot = EXTERNAL_SOLVER.read().unwrap();
        slot.as_ref().map(|r| (r.name.clone(), Arc::clone(&r.adapter)))
    };
    let resp = match external {
        Some((name, adapter)) => adapter.solve(req).map_err(|e| match e {
            Error::ContractViolation(msg) => {
                Error::ContractViolation(format!("external solver '{name}': {msg}"))
            }
            other => other,
        })?,
        None => builtin_interior_point(req)?,
    };
    validate_contract(req, &resp, tol)?;
    Ok(resp)
}

/// Re-measures a response against the contract of `req`. Nothing is
/// trusted: gap, residuals, nonnegativity, diameters and gap-history
/// monotonicity are all recomputed from the returned vectors.
pub fn validate_contract(
    req: &SolverRequest,
    resp: &SolverResponse,
    tol: &Tolerance,
) -> Result<()> {
    let fail = |msg: String| -> Result<()> {
        if resp.converged {
            Err(Error::ContractViolation(msg))
        } else {
            Err(Error::IterationLimit(resp.iterations))
        }
    };
    let (rows, cols) = (req.a.nrows(), req.a.ncols());
    if resp.primal.len() != cols || resp.dual_y.len() != rows || resp.dual_slack.len() != cols {
        return Err(Error::ContractViolation(format!(
            "response shapes disagree with a {rows}×{cols} system"
        )));
    }
    if !(dense::all_finite(&resp.primal)
        && dense::all_finite(&resp.dual_y)
        && dense::all_finite(&resp.dual_slack))
    {
        return Err(Error::ContractViolation("non-finite response".into()));
    }
    if resp.primal.iter().any(|&v| v < 0.0) {
        return fail("negative primal coordinate".into());
    }
    if resp.dual_slack.iter().any(|&v| v < 0.0) {
        return fail("negative dual slack coordinate".into());
    }
    let slack = tol.slack();
    let gap = resp.objective_gap(req);
    if gap > req.gap_target() * slack {
        return fail(format!(
            "duality gap {gap:.3e} exceeds target {:.3e}",
            req.gap_target()
        ));
    }
    let rp = resp.primal_residual(req);
    if rp > req.primal_residual_target() * slack {
        return fail(format!(
            "primal residual {rp:.3e} exceeds target {:.3e}",
            req.primal_residual_target()
        ));
    }
    let rd = resp.dual_residual(req);
    if rd > req.dual_residual_target() * slack {
        return fail(format!(
            "dual residual {rd:.3e} exceeds target {:.3e}",
            req.dual_residual_target()
        ));
    }
    let xp = norm_2(&resp.primal);
    if xp > req.radius_primal * slack {
        return fail(format!(
            "primal norm {xp:.3e} exceeds diameter bound {:.3e}",
            req.radius_primal
        ));
    }
    let sp = norm_2(&resp.dual_slack);
    if sp > req.radius_dual * slack {
        return fail(format!(
            "dual slack norm {sp:.3e} exceeds diameter bound {:.3e}",
            req.radius_dual
        ));
    }
    for w in resp.gap_history.windows(2) {
        if w[1] > w[0] * (1.0 + 1e-9) + f64::EPSILON {
            return fail(format!(
                "gap history not non-increasing: {:.6e} -> {:.6e}",
                w[0], w[1]
            ));
        }
    }
    Ok(())
}

// --- Built-in short-step interior-point method ---------------------------

struct IterateState {
    x: Vector,
    y: Vector,
    s: Vector,
    iterations: usize,
}

/// Solves the Newton normal equations `(A·diag(x/s)·Aᵀ)·u = rhs`,
/// exploiting the trailing-box structure when the request carries the
/// hint.
fn solve_normal_equations(
    a: &Matrix,
    box_rows: usize,
    d: &[f64],
    rhs: &[f64],
) -> Result<Vector> {
    let rows = a.nrows();
    if box_rows == 0 {
        let mut m = Matrix::zeros(rows, rows);
        for i in 0..rows {
            for j in i..rows {
                let mut acc = 0.0;
                let (ri, rj) = (a.row(i), a.row(j));
                for k in 0..a.ncols() {
                    acc += ri[k] * d[k] * rj[k];
                }
                m[(i, j)] = acc;
                m[(j, i)] = acc;
            }
        }
        return dense::solve_spd(&m, rhs);
    }
    // A = [[T, 0], [I, I]] with T over the first `k` columns: eliminate the
    // box-row block of the normal matrix through its Schur complement.
    let k = box_rows;
    let top = rows - k;
    let d_v = &d[..k];
    let d_t = &d[k..];
    let mut weights = vec![0.0; k];
    let mut mix = vec![0.0; k];
    for j in 0..k {
        let sum = d_v[j] + d_t[j];
        weights[j] = d_v[j] * d_t[j] / sum;
        mix[j] = d_v[j] / sum;
    }
    let mut schur = Matrix::zeros(top, top);
    for i in 0..top {
        for j in i..top {
            let mut acc = 0.0;
            let (ri, rj) = (a.row(i), a.row(j));
            for l in 0..k {
                acc += ri[l] * weights[l] * rj[l];
            }
            schur[(i, j)] = acc;
            schur[(j, i)] = acc;
        }
    }
    let mut rhs_top = vec![0.0; top];
    for i in 0..top {
        let ri = a.row(i);
        let mut acc = rhs[i];
        for l in 0..k {
            acc -= ri[l] * mix[l] * rhs[top + l];
        }
        rhs_top[i] = acc;
    }
    let u_top = dense::solve_spd(&schur, &rhs_top)?;
    let mut u = vec![0.0; rows];
    u[..top].copy_from_slice(&u_top);
    for j in 0..k {
        let mut tj = 0.0;
        for i in 0..top {
            tj += a[(i, j)] * u_top[i];
        }
        u[top + j] = (rhs[top + j] - d_v[j] * tj) / (d_v[j] + d_t[j]);
    }
    Ok(u)
}

/// One primal–dual Newton direction for target complementarity `targets`.
fn newton_direction(
    req: &SolverRequest,
    st: &IterateState,
    targets: &[f64],
) -> Result<(Vector, Vector, Vector)> {
    let a = &req.a;
    let n = a.ncols();
    let mut d = vec![0.0; n];
    for i in 0..n {
        if st.s[i] <= 0.0 || st.x[i] <= 0.0 {
            return Err(Error::NumericalBreakdown(
                "interior-point iterate left the positive orthant".into(),
            ));
        }
        d[i] = st.x[i] / st.s[i];
    }
    // Residuals of the KKT system at the current iterate.
    let r_p = dense::sub(&req.b, &a.matvec(&st.x));
    let mut r_d = dense::sub(&req.c, &a.tr_matvec(&st.y));
    for i in 0..n {
        r_d[i] -= st.s[i];
    }
    // r_c = targets − x∘s, eliminated into the normal equations:
    //   (A·D·Aᵀ)Δy = r_p − A(r_c/s) + A(D·r_d).
    let mut rhs_extra = vec![0.0; n];
    for i in 0..n {
        let r_c = targets[i] - st.x[i] * st.s[i];
        rhs_extra[i] = d[i] * r_d[i] - r_c / st.s[i];
    }
    let rhs = dense::add(&r_p, &a.matvec(&rhs_extra));
    let dy = solve_normal_equations(a, req.box_rows, &d, &rhs)?;
    let at_dy = a.tr_matvec(&dy);
    let mut ds = vec![0.0; n];
    let mut dx = vec![0.0; n];
    for i in 0..n {
        ds[i] = r_d[i] - at_dy[i];
        let r_c = targets[i] - st.x[i] * st.s[i];
        dx[i] = r_c / st.s[i] - d[i] * ds[i];
    }
    Ok((dx, dy, ds))
}

/// Largest step in `(dx, ds)` keeping `(x, s)` strictly positive, scaled
/// by the fraction-to-boundary factor and capped at 1.
fn boundary_step(x: &[f64], s: &[f64], dx: &[f64], ds: &[f64]) -> f64 {
    let mut alpha: f64 = 1.0 / BOUNDARY_FRACTION;
    for i in 0..x.len() {
        if dx[i] < 0.0 {
            alpha = alpha.min(-x[i] / dx[i]);
        }
        if ds[i] < 0.0 {
            alpha = alpha.min(-s[i] / ds[i]);
        }
    }
    (alpha * BOUNDARY_FRACTION).min(1.0)
}

fn apply_step(st: &mut IterateState, dx: &[f64], dy: &[f64], ds: &[f64], alpha: f64) {
    for i in 0..st.x.len() {
        st.x[i] += alpha * dx[i];
        st.s[i] += alpha * ds[i];
    }
    for i in 0..st.y.len() {
        st.y[i] += alpha * dy[i];
    }
}

/// Centrality proximity `‖x∘s/μ − 1‖₂`.
fn proximity(x: &[f64], s: &[f64], mu: f64) -> f64 {
    let mut acc = 0.0;
    for i in 0..x.len() {
        let dev = x[i] * s[i] / mu - 1.0;
        acc += dev * dev;
    }
    acc.sqrt()
}

/// Damped Newton steps at fixed duality measure `mu` until the proximity
/// drops below [`CENTER_PROX`].
fn center_at(req: &SolverRequest, st: &mut IterateState, mu: f64, cap: usize) -> Result<()> {
    let n = req.a.ncols();
    let targets = vec![mu; n];
    let mut prox = proximity(&st.x, &st.s, mu);
    while prox > CENTER_PROX {
        if st.iterations >= cap {
            return Err(Error::NumericalBreakdown(format!(
                "centering exceeded the iteration cap at proximity {prox:.3e}"
            )));
        }
        let (dx, dy, ds) = newton_direction(req, st, &targets)?;
        let mut alpha = boundary_step(&st.x, &st.s, &dx, &ds);
        let mut accepted = false;
        for _ in 0..40 {
            let mut trial_x = st.x.clone();
            let mut trial_s = st.s.clone();
            for i in 0..n {
                trial_x[i] += alpha * dx[i];
                trial_s[i] += alpha * ds[i];
            }
            if trial_x.iter().all(|&v| v > 0.0) && trial_s.iter().all(|&v| v > 0.0) {
                let trial_prox = proximity(&trial_x, &trial_s, mu);
                if trial_prox < prox - 1e-12 * prox.max(1.0) || trial_prox <= CENTER_PROX {
                    apply_step(st, &dx, &dy, &ds, alpha);
                    prox = trial_prox;
                    accepted = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        st.iterations += 1;
        if !accepted {
            return Err(Error::NumericalBreakdown(format!(
                "centering stalled at proximity {prox:.3e}"
            )));
        }
    }
    Ok(())
}

/// The built-in solver. Public so callers can benchmark it directly even
/// when an external backend is registered; [`solve_approx`] is the normal
/// entry point.
pub fn builtin_interior_point(req: &SolverRequest) -> Result<SolverResponse> {
    req.validate()?;
    let n = req.a.ncols();
    let cap = req.cap();
    let mut st = IterateState {
        x: req.primal_start.clone(),
        y: req.dual_y_start.clone(),
        s: req.dual_slack_start.clone(),
        iterations: 0,
    };
    let gap_target = req.gap_target();
    let mut gap = dot(&st.x, &st.s);
    let mut mu = gap / n as f64;
    let mut gap_history = vec![gap];
    let shrink = 1.0 - 1.0 / (8.0 * (n as f64).sqrt());
    let mut converged = gap <= gap_target;

    if !converged {
        center_at(req, &mut st, mu, cap)?;
        gap = dot(&st.x, &st.s);
        mu = gap / n as f64;
        gap_history.push(gap.min(gap_history[0]));
        loop {
            if gap <= gap_target {
                converged = true;
                break;
            }
            if st.iterations >= cap {
                break;
            }
            mu *= shrink;
            let targets = vec![mu; n];
            let (dx, dy, ds) = newton_direction(req, &st, &targets)?;
            let alpha = boundary_step(&st.x, &st.s, &dx, &ds);
            apply_step(&mut st, &dx, &dy, &ds, alpha);
            st.iterations += 1;
            let new_gap = dot(&st.x, &st.s);
            if !new_gap.is_finite() || new_gap > gap * (1.0 + 1e-9) {
                return Err(Error::NumericalBreakdown(format!(
                    "duality gap failed to decrease: {gap:.6e} -> {new_gap:.6e}"
                )));
            }
            gap = new_gap;
            gap_history.push(gap);
            mu = gap / n as f64;
            if proximity(&st.x, &st.s, mu) > RECENTER_PROX {
                center_at(req, &mut st, mu, cap)?;
                let recentered = dot(&st.x, &st.s);
                gap = recentered.min(gap);
                mu = gap / n as f64;
            }
        }
    }

    Ok(SolverResponse {
        primal: st.x,
        dual_y: st.y,
        dual_slack: st.s,
        iterations: st.iterations,
        gap_history,
        converged,
    })
}

// --- Subprocess adapter ---------------------------------------------------

/// Adapter running an external solver as a subprocess with a line-based
/// text protocol.
///
/// The request is written to the child's stdin as:
///
/// ```text
/// <rows> <cols>
/// <rows lines of A, cols entries each>
/// b <rows entries>
/// c <cols entries>
/// x0 <cols entries>
/// y0 <rows entries>
/// s0 <cols entries>
/// delta <value>
/// radius_primal <value>
/// radius_dual <value>
/// ```
///
/// The child must exit with status 0 and print to stdout lines
/// `x <cols entries>`, `y <rows entries>`, `s <cols entries>`, and
/// optionally `iterations <count>`. Anything else is reported as a
/// numerical breakdown of the external backend.
#[derive(Debug, Clone)]
pub struct SubprocessSolver {
    /// Program followed by its arguments.
    pub command: Vec<String>,
}

impl SubprocessSolver {
    /// Creates an adapter for `command` (program plus arguments).
    pub fn new(command: Vec<String>) -> Self {
        SubprocessSolver { command }
    }

    fn render_request(req: &SolverRequest) -> String {
        let join = |v: &[f64]| {
            v.iter()
                .map(|x| format!("{x:.17e}"))
                .collect::<Vec<_>>()
                .join(" ")
        };
        let mut out = format!("{} {}\n", req.a.nrows(), req.a.ncols());
        for i in 0..req.a.nrows() {
            out.push_str(&join(req.a.row(i)));
            out.push('\n');
        }
        out.push_str(&format!("b {}\n", join(&req.b)));
        out.push_str(&format!("c {}\n", join(&req.c)));
        out.push_str(&format!("x0 {}\n", join(&req.primal_start)));
        out.push_str(&format!("y0 {}\n", join(&req.dual_y_start)));
        out.push_str(&format!("s0 {}\n", join(&req.dual_slack_start)));
        out.push_str(&format!("delta {:.17e}\n", req.delta));
        out.push_str(&format!("radius_primal {:.17e}\n", req.radius_primal));
        out.push_str(&format!("radius_dual {:.17e}\n", req.radius_dual));
        out
    }

    fn parse_response(req: &SolverRequest, text: &str) -> Result<SolverResponse> {
        let mut x = None;
        let mut y = None;
        let mut s = None;
        let mut iterations = 0usize;
        let parse_vec = |rest: std::str::SplitWhitespace<'_>, want: usize| -> Result<Vector> {
            let vals: Vec<f64> = rest
                .map(|t| {
                    t.parse::<f64>().map_err(|e| {
                        Error::NumericalBreakdown(format!("external solver output: {e}"))
                    })
                })
                .collect::<Result<_>>()?;
            if vals.len() != want {
                return Err(Error::NumericalBreakdown(format!(
                    "external solver returned {} entries where {want} were expected",
                    vals.len()
                )));
            }
            Ok(vals)
        };
        for line in text.lines() {
            let mut toks = line.split_whitespace();
            match toks.next() {
                Some("x") => x = Some(parse_vec(toks, req.a.ncols())?),
                Some("y") => y = Some(parse_vec(toks, req.a.nrows())?),
                Some("s") => s = Some(parse_vec(toks, req.a.ncols())?),
                Some("iterations") => {
                    iterations = toks
                        .next()
                        .and_then(|t| t.parse().ok())
                        .unwrap_or(0);
                }
                _ => {}
            }
        }
        let (primal, dual_y, dual_slack) = match (x, y, s) {
            (Some(x), Some(y), Some(s)) => (x, y, s),
            _ => {
                return Err(Error::NumericalBreakdown(
                    "external solver output missing x/y/s lines".into(),
                ))
            }
        };
        let gap = dot(&primal, &dual_slack);
        Ok(SolverResponse {
            primal,
            dual_y,
            dual_slack,
            iterations,
            gap_history: vec![gap],
            converged: true,
        })
    }
}

impl SolverAdapter for SubprocessSolver {
    fn solve(&self, req: &SolverRequest) -> Result<SolverResponse> {
        let (program, args) = self
            .command
            .split_first()
            .ok_or_else(|| Error::DimensionMismatch("empty solver command".into()))?;
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| Error::NumericalBreakdown(format!("spawning external solver: {e}")))?;
        child
            .stdin
            .take()
            .expect("stdin was piped")
            .write_all(Self::render_request(req).as_bytes())
            .map_err(|e| Error::NumericalBreakdown(format!("writing to external solver: {e}")))?;
        let output = child
            .wait_with_output()
            .map_err(|e| Error::NumericalBreakdown(format!("waiting for external solver: {e}")))?;
        if !output.status.success() {
            return Err(Error::NumericalBreakdown(format!(
                "external solver exited with {}",
                output.status
            )));
        }
        let text = String::from_utf8_lossy(&output.stdout);
        Self::parse_response(req, &text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extend::{build_extended, repair_to_subspace, ApproxSolution, ExtendedParams};
    use crate::subspace::SubspaceRep;
    use std::sync::Mutex;

    // The registry is process-global; tests touching it (and tests relying
    // on it being empty) serialize through this lock.
    static REGISTRY_LOCK: Mutex<()> = Mutex::new(());

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn unit_request(delta: f64) -> SolverRequest {
        SolverRequest::new(
            Matrix::from_rows(&[vec![1.0]]),
            vec![1.0],
            vec![1.0],
            vec![1.0],
            vec![0.0],
            vec![1.0],
            delta,
            2.0,
            2.0,
        )
    }

    #[test]
    fn builtin_solves_pinned_unit_lp() {
        let _guard = REGISTRY_LOCK.lock().unwrap();
        let req = unit_request(1e-8);
        let resp = solve_approx(&req, &tol()).unwrap();
        assert!(resp.converged);
        assert!((resp.primal[0] - 1.0).abs() < 1e-6);
        assert!(resp.complementarity() <= req.gap_target() * tol().slack());
    }

    #[test]
    fn builtin_drives_box_lp_to_optimum() {
        let _guard = REGISTRY_LOCK.lock().unwrap();
        // min x₁ over x₁ + x₂ = 1, x ≥ 0: optimum x = (0, 1).
        let req = SolverRequest::new(
            Matrix::from_rows(&[vec![1.0, 1.0]]),
            vec![1.0],
            vec![1.0, 0.0],
            vec![0.5, 0.5],
            vec![-0.5],
            vec![1.5, 0.5],
            1e-9,
            2.0,
            2.0,
        );
        let resp = solve_approx(&req, &tol()).unwrap();
        assert!(resp.primal[0] < 1e-6, "x1 = {}", resp.primal[0]);
        assert!((resp.primal[1] - 1.0).abs() < 1e-6);
        // Short-step estimate: iterations ≤ 8√N·ln(gap₀/target) plus the
        // centering prologue.
        let gap0 = dot(&req.primal_start, &req.dual_slack_start);
        let bound = 8.0 * (2.0f64).sqrt() * (gap0 / req.gap_target()).ln();
        assert!(
            resp.iterations <= bound.ceil() as usize + 600,
            "iterations {} versus short-step estimate {bound:.0}",
            resp.iterations
        );
        for w in resp.gap_history.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-9));
        }
    }

    #[test]
    fn box_structure_hint_matches_dense_solve() {
        let _guard = REGISTRY_LOCK.lock().unwrap();
        let space = SubspaceRep::from_matrix(
            &Matrix::from_rows(&[vec![1.0, 2.0, -1.0]]),
            &tol(),
        )
        .unwrap();
        let d = vec![1.0, -0.5, 2.0];
        let c = vec![0.5, 1.0, -0.25];
        let params = ExtendedParams {
            m_p: 2.0 * 2.0 * dense::norm_1(&c),
            m_d: 2.0 * 2.0 * dense::norm_1(&d),
            eps: 1e-3,
            m_est: 2.0,
        };
        let sys = build_extended(&space, &d, &c, params).unwrap();
        let (a, b, obj) = sys.assemble();
        let start = sys.initial_point();
        let mut req = SolverRequest::new(
            a,
            b,
            obj,
            start.primal.clone(),
            start.dual_y.clone(),
            start.dual_slack.clone(),
            sys.delta,
            sys.radius_primal(),
            sys.radius_dual(),
        );
        req.box_rows = 3 * space.ambient_dim();
        let fast = solve_approx(&req, &tol()).unwrap();
        req.box_rows = 0;
        let dense_resp = solve_approx(&req, &tol()).unwrap();
        // Both must satisfy the same contract; the iterates themselves may
        // differ slightly through roundoff.
        assert!(fast.converged && dense_resp.converged);
        let gap_ratio = fast.complementarity() / dense_resp.complementarity().max(1e-300);
        assert!(gap_ratio < 1e3 && gap_ratio > 1e-3);

        // The repaired solution lands exactly (to tolerance) in the shifted
        // subspaces.
        let dim = 3 * space.ambient_dim();
        let approx = ApproxSolution {
            primal: fast.primal[..dim].to_vec(),
            dual_slack: fast.dual_slack[..dim].to_vec(),
            gap: fast.complementarity(),
        };
        let repaired = repair_to_subspace(&sys, &approx).unwrap();
        let x_res = space.shifted_residual(&repaired.x_hat, &d);
        let s_res = space.dual().unwrap().shifted_residual(&repaired.s_hat, &c);
        assert!(x_res <= tol().residual_tol, "primal residual {x_res:.3e}");
        assert!(s_res <= tol().residual_tol, "dual residual {s_res:.3e}");
    }

    #[test]
    fn contract_validation_rejects_cheating_adapter() {
        let _guard = REGISTRY_LOCK.lock().unwrap();
        register_external_solver(
            "cheater",
            Arc::new(|req: &SolverRequest| {
                Ok(SolverResponse {
                    primal: vec![-1.0; req.a.ncols()],
                    dual_y: vec![0.0; req.a.nrows()],
                    dual_slack: vec![0.0; req.a.ncols()],
                    iterations: 1,
                    gap_history: vec![0.0],
                    converged: true,
                })
            }),
        );
        let err = solve_approx(&unit_request(1e-6), &tol()).unwrap_err();
        clear_external_solver();
        assert!(matches!(err, Error::ContractViolation(_)), "{err}");
    }

    #[test]
    fn external_adapter_passing_contract_is_accepted() {
        let _guard = REGISTRY_LOCK.lock().unwrap();
        register_external_solver(
            "oracle",
            Arc::new(|req: &SolverRequest| {
                let mut resp = builtin_interior_point(req)?;
                resp.iterations += 1;
                Ok(resp)
            }),
        );
        let got = solve_approx(&unit_request(1e-6), &tol());
        clear_external_solver();
        let resp = got.unwrap();
        assert!(resp.converged);
        assert_eq!(external_solver_name(), None);
    }

    #[test]
    fn subprocess_solver_round_trips_text_protocol() {
        let _guard = REGISTRY_LOCK.lock().unwrap();
        // An "external solver" that ignores its input and prints the known
        // optimum of the pinned unit LP.
        let adapter = SubprocessSolver::new(vec![
            "sh".into(),
            "-c".into(),
            "cat > /dev/null; printf 'x 1\\ny 1\\ns 0\\niterations 3\\n'".into(),
        ]);
        let req = unit_request(1e-6);
        let resp = adapter.solve(&req).unwrap();
        assert_eq!(resp.iterations, 3);
        validate_contract(&req, &resp, &tol()).unwrap();

        register_external_solver("script", Arc::new(adapter));
        let via_registry = solve_approx(&req, &tol());
        clear_external_solver();
        assert!((via_registry.unwrap().primal[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn subprocess_failure_is_reported() {
        let adapter = SubprocessSolver::new(vec!["sh".into(), "-c".into(), "exit 7".into()]);
        let err = adapter.solve(&unit_request(1e-6)).unwrap_err();
        assert!(matches!(err, Error::NumericalBreakdown(_)), "{err}");
    }
}
