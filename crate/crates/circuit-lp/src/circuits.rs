//! Circuit-level operations on subspace vectors: conformal decomposition,
//! elimination of coordinates with proximity guarantees, and Hoffman-type
//! point finding inside a box.
//!
//! These are the combinatorial workhorses of the framework. They never
//! solve an LP; they move a vector around inside its subspace by peeling
//! off support-minimal pieces, and every quantitative claim they make is
//! guarded by the running condition estimate `M`: when a peeled generator
//! is larger than `M` allows, the operation aborts with a
//! [`LiftingCertificate`] instead of a wrong answer.

use crate::dense::{self, gather, norm_1, norm_inf, scatter, solve_consistent, Vector};
use crate::error::{Error, Result};
use crate::subspace::{certificate_from_lift, LiftingCertificate, SubspaceRep};

/// An elementary vector of a subspace: nonzero, with support-minimal
/// (circuit) support.
#[derive(Debug, Clone)]
pub struct Circuit {
    /// The elementary vector itself.
    pub vector: Vector,
    /// Its support (strictly increasing).
    pub support: Vec<usize>,
}

/// One generator of a [`ConicDecomposition`].
#[derive(Debug, Clone)]
pub struct DecompositionTerm {
    /// Convex weight `α > 0`.
    pub weight: f64,
    /// The generator: an element of the subspace agreeing with the input
    /// on the eliminated set.
    pub vector: Vector,
    /// Independent set confining the generator's support outside the
    /// eliminated set; this is what makes the generator a *unique* lift of
    /// its fixed coordinates, hence certifiable.
    pub support_basis: Vec<usize>,
}

/// Result of [`eliminate_on`]: `y = Σ αⱼ·termⱼ + remainder` with
/// `Σ αⱼ = 1`, every term agreeing with `y` on the eliminated set `J`, and
/// the remainder vanishing on `J` while never flipping a sign of `y`.
#[derive(Debug, Clone)]
pub struct ConicDecomposition {
    /// The convex generators, in peel order.
    pub terms: Vec<DecompositionTerm>,
    /// `z ∈ W` with `z_J = 0` and `sign(zᵢ) ∈ {0, sign(yᵢ)}` everywhere.
    pub remainder: Vector,
}

impl ConicDecomposition {
    /// Largest generator norm, the quantity the `M`-bound applies to.
    pub fn max_generator_norm(&self) -> f64 {
        self.terms
            .iter()
            .fold(0.0, |acc, t| acc.max(norm_inf(&t.vector)))
    }
}

/// Snap near-zero coordinates (relative to `scale`) to exact zeros.
fn snap_zeros(v: &mut [f64], zero_tol: f64, scale: f64) {
    for x in v.iter_mut() {
        if x.abs() <= zero_tol * scale {
            *x = 0.0;
        }
    }
}

/// Decomposes `y ∈ W` as `Σ αⱼ yʲ + z` where each `yʲ ∈ W` agrees with `y`
/// on `j_set`, has its remaining support inside a recorded independent set,
/// the weights are convex, and `z ∈ W` vanishes on `j_set` without flipping
/// any sign of `y`.
///
/// This is the elimination step used everywhere a coordinate set must be
/// zeroed out while tracking how far the vector had to move.
pub fn eliminate_on(
    space: &SubspaceRep,
    y: &[f64],
    j_set: &[usize],
) -> Result<ConicDecomposition> {
    let n = space.ambient_dim();
    let tol = *space.tol();
    if y.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "eliminate_on got a vector of length {} in dimension {n}",
            y.len()
        )));
    }
    if !dense::all_finite(y) {
        return Err(Error::NonFinite("eliminate_on input"));
    }
    if !space.contains(y) {
        return Err(Error::Guard(
            "eliminate_on requires a vector inside the subspace".into(),
        ));
    }
    let mut j_sorted = j_set.to_vec();
    j_sorted.sort_unstable();
    j_sorted.dedup();

    let scale = 1.0 + norm_inf(y);
    let mut hat = y.to_vec();
    snap_zeros(&mut hat, tol.zero_tol, scale);
    let y_j = gather(&hat, &j_sorted);
    if norm_1(&y_j) == 0.0 {
        // Nothing to eliminate: the trivial decomposition.
        return Ok(ConicDecomposition {
            terms: Vec::new(),
            remainder: hat,
        });
    }

    let a = space.constraints();
    let rhs_base = dense::scale(&a.select_cols(&j_sorted).matvec(&y_j), -1.0);
    let mut budget = 1.0f64;
    let mut terms = Vec::new();

    for _ in 0..=n + 1 {
        // Free coordinates: outside J and currently nonzero.
        let free: Vec<usize> = (0..n)
            .filter(|i| !j_sorted.contains(i) && hat[*i] != 0.0)
            .collect();
        // Support-minimal companion: fix y_J, place the correction on a
        // column basis of the free region.
        let ns = dense::gaussian_normalize(&a.select_cols(&free), &tol)?;
        let b_set: Vec<usize> = ns.basis.iter().map(|&k| free[k]).collect();
        let a_b = a.select_cols(&b_set);
        let (u, resid) = solve_consistent(&a_b, &rhs_base, &tol)?;
        if resid > tol.residual_tol * (1.0 + norm_inf(&rhs_base)) {
            return Err(Error::NumericalBreakdown(format!(
                "elimination companion system left residual {resid:.3e}"
            )));
        }
        let mut generator = scatter(n, &j_sorted, &y_j);
        for (&i, &ui) in b_set.iter().zip(&u) {
            generator[i] = ui;
        }

        // Largest sign-safe step: stop where a free basis coordinate of the
        // running vector would cross zero, or when the budget is spent.
        let mut alpha = budget;
        for &i in &b_set {
            if generator[i] != 0.0 {
                let r = hat[i] / generator[i];
                if r > 0.0 && r < alpha {
                    alpha = r;
                }
            }
        }
        for i in 0..n {
            hat[i] -= alpha * generator[i];
        }
        budget -= alpha;
        snap_zeros(&mut hat, tol.zero_tol, scale);
        terms.push(DecompositionTerm {
            weight: alpha,
            vector: generator,
            support_basis: b_set,
        });
        // The remainder keeps hat_J = budget · y_J; once the budget is spent
        // (or the last step landed within a snap of it), J is clear.
        if budget <= f64::EPSILON * terms.len() as f64
            || norm_1(&gather(&hat, &j_sorted)) == 0.0
        {
            for &i in &j_sorted {
                hat[i] = 0.0;
            }
            return Ok(ConicDecomposition {
                terms,
                remainder: hat,
            });
        }
    }
    Err(Error::IterationLimit(n + 2))
}

/// Builds the lifting certificate carried by a decomposition generator: the
/// generator is the unique extension of its values on `J` once everything
/// outside `J` and its support basis is pinned to zero, so a generator that
/// exceeds `M·‖y_J‖₁` is a proof that `M` undershoots the imbalance.
fn certify_term(
    space: &SubspaceRep,
    j_sorted: &[usize],
    term: &DecompositionTerm,
    m: f64,
) -> Option<LiftingCertificate> {
    let n = space.ambient_dim();
    let free: Vec<usize> = term
        .support_basis
        .iter()
        .copied()
        .filter(|i| !j_sorted.contains(i))
        .collect();
    let index_set: Vec<usize> = (0..n).filter(|i| !free.contains(i)).collect();
    let p = gather(&term.vector, &index_set);
    certificate_from_lift(space, &index_set, &p, &term.vector, m)
}

/// Outcome of [`eliminate_with_proximity`].
#[derive(Debug, Clone)]
pub enum ProximityOutcome {
    /// Elimination succeeded within the `M`-bound: the cleaned vector
    /// satisfies `‖y − cleaned‖∞ ≤ M(1+O(tol))·‖y_J‖₁`.
    Eliminated {
        cleaned: Vector,
        decomposition: ConicDecomposition,
    },
    /// Some generator violated the `M`-bound.
    Certificate(LiftingCertificate),
}

/// Zeroes the coordinates `j_set` of `y ∈ W` while moving no coordinate by
/// more than `M·‖y_J‖₁` — or produces a certificate that `M` is too small.
pub fn eliminate_with_proximity(
    space: &SubspaceRep,
    y: &[f64],
    j_set: &[usize],
    m: f64,
) -> Result<ProximityOutcome> {
    let decomposition = eliminate_on(space, y, j_set)?;
    let mut j_sorted = j_set.to_vec();
    j_sorted.sort_unstable();
    j_sorted.dedup();
    let bound = m * space.tol().slack() * norm_1(&gather(y, &j_sorted));
    let mut worst: Option<LiftingCertificate> = None;
    for term in &decomposition.terms {
        if norm_inf(&term.vector) > bound {
            if let Some(cert) = certify_term(space, &j_sorted, term, m) {
                let better = worst
                    .as_ref()
                    .map_or(true, |w| cert.ratio > w.ratio);
                if better {
                    worst = Some(cert);
                }
            }
        }
    }
    if let Some(cert) = worst {
        return Ok(ProximityOutcome::Certificate(cert));
    }
    let cleaned = decomposition.remainder.clone();
    Ok(ProximityOutcome::Eliminated {
        cleaned,
        decomposition,
    })
}

/// Outcome of [`hoffman_point`].
#[derive(Debug, Clone)]
pub enum HoffmanOutcome {
    /// A point of `W` inside the box with `‖y‖∞ ≤ M(1+O(tol))·‖ℓ⁺+u⁻‖₁`.
    Point(Vector),
    /// The box forces every point of `W` inside it beyond what `M` allows.
    Certificate(LiftingCertificate),
}

/// Inner target of a coordinate: the bound nearest zero on its own side.
fn inner_bound(lower: f64, upper: f64, yi: f64) -> f64 {
    if yi > 0.0 {
        lower.max(0.0)
    } else if yi < 0.0 {
        upper.min(0.0)
    } else {
        0.0
    }
}

/// Shrinks a feasible point of `W ∩ [ℓ, u]` into a Hoffman-small one.
///
/// Given `start ∈ W` with `ℓ ≤ start ≤ u` (entries of `ℓ` may be `−∞`, of
/// `u` may be `+∞`), returns `y ∈ W` in the box with
/// `‖y‖∞ ≤ M(1+O(tol))·‖ℓ⁺ + u⁻‖₁` — the right-hand side is the total mass
/// by which the box forbids zero — or a lifting certificate against `M`.
pub fn hoffman_point(
    space: &SubspaceRep,
    start: &[f64],
    lower: &[f64],
    upper: &[f64],
    m: f64,
) -> Result<HoffmanOutcome> {
    let n = space.ambient_dim();
    let tol = *space.tol();
    if start.len() != n || lower.len() != n || upper.len() != n {
        return Err(Error::DimensionMismatch(
            "hoffman_point arguments must all match the ambient dimension".into(),
        ));
    }
    if !dense::all_finite(start) {
        return Err(Error::NonFinite("hoffman_point start"));
    }
    for i in 0..n {
        if lower[i].is_nan() || upper[i].is_nan() || lower[i] == f64::INFINITY
            || upper[i] == f64::NEG_INFINITY || lower[i] > upper[i]
        {
            return Err(Error::Guard(format!("empty or malformed box at coordinate {i}")));
        }
    }
    if !space.contains(start) {
        return Err(Error::Guard(
            "hoffman_point requires a starting point inside the subspace".into(),
        ));
    }
    let scale = 1.0 + norm_inf(start);
    let slackf = tol.residual_tol * scale;
    let mut y = start.to_vec();
    for i in 0..n {
        if y[i] < lower[i] - slackf || y[i] > upper[i] + slackf {
            return Err(Error::Guard(format!(
                "starting point violates the box at coordinate {i}"
            )));
        }
        y[i] = y[i].clamp(
            if lower[i].is_finite() { lower[i] } else { y[i] },
            if upper[i].is_finite() { upper[i] } else { y[i] },
        );
    }
    // Forcing mass of the box: how much it keeps points away from zero.
    let forcing: f64 = (0..n)
        .map(|i| lower[i].max(0.0) + (-upper[i]).max(0.0))
        .sum();

    for _ in 0..=n + 1 {
        // Snap onto inner bounds, then read off the anchored set J.
        for i in 0..n {
            let t = inner_bound(lower[i], upper[i], y[i]);
            if (y[i] - t).abs() <= tol.zero_tol * scale {
                y[i] = t;
            }
        }
        let j_sorted: Vec<usize> = (0..n)
            .filter(|&i| y[i] == inner_bound(lower[i], upper[i], y[i]))
            .collect();

        let decomposition = eliminate_on(space, &y, &j_sorted)?;
        let z = &decomposition.remainder;
        if norm_inf(z) <= tol.zero_tol * scale {
            // y is a convex combination of its generators; each must obey
            // the M-bound or contradict it verifiably.
            let bound = m * tol.slack() * norm_1(&gather(&y, &j_sorted));
            for term in &decomposition.terms {
                if norm_inf(&term.vector) > bound {
                    if let Some(cert) = certify_term(space, &j_sorted, term, m) {
                        return Ok(HoffmanOutcome::Certificate(cert));
                    }
                }
            }
            debug_assert!(norm_inf(&y) <= m * tol.slack() * forcing + tol.zero_tol * scale);
            return Ok(HoffmanOutcome::Point(y));
        }

        // Walk along −z until some coordinate reaches its inner bound. The
        // remainder never flips a sign of y and vanishes on J, so every
        // touched coordinate moves monotonically toward its inner bound.
        let mut alpha = f64::INFINITY;
        let mut binding = usize::MAX;
        for i in 0..n {
            if z[i] != 0.0 {
                let cap = (y[i] - inner_bound(lower[i], upper[i], y[i])) / z[i];
                debug_assert!(cap >= 0.0, "remainder moved a coordinate outward");
                if cap < alpha {
                    alpha = cap;
                    binding = i;
                }
            }
        }
        if binding == usize::MAX || !alpha.is_finite() {
            return Err(Error::NumericalBreakdown(
                "no finite step along the elimination remainder".into(),
            ));
        }
        for i in 0..n {
            y[i] -= alpha * z[i];
        }
        y[binding] = inner_bound(lower[binding], upper[binding], y[binding]);
    }
    Err(Error::IterationLimit(n + 2))
}

/// Decomposes `y ∈ W` into conformal elementary vectors: `y = Σ hₖ` with
/// every `hₖ ∈ W` support-minimal and `sign((hₖ)ᵢ) ∈ {0, sign(yᵢ)}`.
///
/// At most `n` terms are produced; the decomposition is exact up to the
/// zero tolerance.
pub fn sign_consistent_decompose(space: &SubspaceRep, y: &[f64]) -> Result<Vec<Circuit>> {
    let n = space.ambient_dim();
    let tol = *space.tol();
    if y.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "sign_consistent_decompose got length {} in dimension {n}",
            y.len()
        )));
    }
    if !space.contains(y) {
        return Err(Error::Guard(
            "sign_consistent_decompose requires a vector inside the subspace".into(),
        ));
    }
    let scale = 1.0 + norm_inf(y);
    let mut rem = y.to_vec();
    snap_zeros(&mut rem, tol.zero_tol, scale);
    let mut out = Vec::new();

    for _ in 0..n {
        if norm_inf(&rem) == 0.0 {
            break;
        }
        // Shrink the support of a copy of the remainder until it is
        // elementary, never flipping a sign.
        let mut v = rem.clone();
        for _ in 0..n {
            let supp: Vec<usize> = (0..n).filter(|&i| v[i] != 0.0).collect();
            let fixed = space.fix_coords(&supp)?;
            if fixed.dim() <= 1 {
                break;
            }
            // A direction in W ∩ ℝ^supp independent of v, via one
            // Gram–Schmidt step against v.
            let v_s = gather(&v, &supp);
            let vv = dense::dot(&v_s, &v_s);
            let mut best: Option<Vector> = None;
            let mut best_norm = 0.0;
            for r in 0..fixed.kernel_rows().nrows() {
                let b = fixed.kernel_rows().row(r);
                let coef = dense::dot(b, &v_s) / vv;
                let cand: Vector = b.iter().zip(&v_s).map(|(bi, vi)| bi - coef * vi).collect();
                let cn = norm_inf(&cand);
                if cn > best_norm {
                    best_norm = cn;
                    best = Some(cand);
                }
            }
            let Some(mut w_s) = best else { break };
            if best_norm <= tol.zero_tol * scale {
                break;
            }
            // Orient w so a sign-safe positive step exists, then step to
            // the first zero crossing.
            let mut t = f64::INFINITY;
            for (k, &i) in supp.iter().enumerate() {
                if w_s[k] != 0.0 && v[i] / w_s[k] > 0.0 {
                    t = t.min(v[i] / w_s[k]);
                }
            }
            if !t.is_finite() {
                for w in w_s.iter_mut() {
                    *w = -*w;
                }
                t = f64::INFINITY;
                for (k, &i) in supp.iter().enumerate() {
                    if w_s[k] != 0.0 && v[i] / w_s[k] > 0.0 {
                        t = t.min(v[i] / w_s[k]);
                    }
                }
            }
            if !t.is_finite() {
                break;
            }
            for (k, &i) in supp.iter().enumerate() {
                v[i] -= t * w_s[k];
            }
            let v_scale = scale + norm_inf(&v);
            snap_zeros(&mut v, tol.zero_tol, v_scale);
        }
        // Peel the largest conformal multiple of the elementary v.
        let mut step = f64::INFINITY;
        for i in 0..n {
            if v[i] != 0.0 {
                let r = rem[i] / v[i];
                debug_assert!(r > 0.0, "elementary piece lost conformality");
                step = step.min(r);
            }
        }
        if !step.is_finite() || step <= 0.0 {
            return Err(Error::NumericalBreakdown(
                "conformal peeling produced no progress".into(),
            ));
        }
        let h: Vector = v.iter().map(|&vi| step * vi).collect();
        for i in 0..n {
            rem[i] -= h[i];
        }
        snap_zeros(&mut rem, tol.zero_tol, scale);
        let support = dense::support(&h, 0.0);
        out.push(Circuit { vector: h, support });
    }
    Ok(out)
}
