//! Drive the approximate-solver interface directly and re-measure every
//! line of its contract.
//!
//! The exact framework treats the interior-point backend as a black box
//! that, given `min ⟨c,x⟩, Ax = b, x ≥ 0` with solution radii `R_P, R_D`
//! and accuracy `δ`, must return `(x, y, s)` with `x, s ≥ 0` and
//!
//! 1. `⟨c,x⟩ − ⟨b,y⟩ ≤ δ·(‖c‖₂R_P + ‖b‖₂R_D)`,
//! 2. `‖Ax − b‖₂ ≤ δ·(‖A‖_F·R_P + ‖b‖₂)`,
//! 3. `‖Aᵀy + s − c‖₂ ≤ δ·(‖A‖_F·R_D + ‖c‖₂)`.
//!
//! Everything downstream — repairs, trims, exact rounding — is proved
//! against those three inequalities alone, so any backend honoring them can
//! be swapped in (see `register_external_solver`). Here the built-in
//! short-step method answers a small request and each line is re-measured
//! from the raw response before `validate_contract` re-checks the lot.
//!
//! Run with `cargo run --example solver_contract`.

use circuit_lp::dense::{self, Matrix};
use circuit_lp::solver::{solve_approx, validate_contract, SolverRequest};
use circuit_lp::{Result, Tolerance};

fn main() -> Result<()> {
    let tol = Tolerance::default();

    // min x₁ + 2x₂ + 3x₃ over the simplex x₁ + x₂ + x₃ = 3, x ≥ 0.
    // The barycenter is strictly feasible; y = 0 gives strictly positive
    // dual slacks. That interior warm start is part of the request.
    let a = Matrix::from_rows(&[vec![1.0, 1.0, 1.0]]);
    let b = vec![3.0];
    let c = vec![1.0, 2.0, 3.0];
    let req = SolverRequest::new(
        a,
        b,
        c,
        vec![1.0, 1.0, 1.0],
        vec![0.0],
        vec![1.0, 2.0, 3.0],
        1e-6, // δ
        10.0, // R_P
        10.0, // R_D
    );

    let resp = solve_approx(&req, &tol)?;
    println!("converged in {} iterations", resp.iterations);
    println!("x = {:?}", resp.primal);
    println!("y = {:?}, s = {:?}", resp.dual_y, resp.dual_slack);

    let line = |label: &str, measured: f64, bound: f64| {
        println!("  {label}: {measured:.3e} ≤ {bound:.3e}  ({})",
            if measured <= bound * tol.slack() { "ok" } else { "VIOLATED" });
    };
    println!("\ncontract lines, re-measured from the response:");
    line("(1) duality gap   ", resp.objective_gap(&req), req.gap_target());
    line("(2) primal residual", resp.primal_residual(&req), req.primal_residual_target());
    line("(3) dual residual ", resp.dual_residual(&req), req.dual_residual_target());
    line("    ‖x‖₂ within R_P", dense::norm_2(&resp.primal), req.radius_primal);
    line("    ‖s‖₂ within R_D", dense::norm_2(&resp.dual_slack), req.radius_dual);
    let monotone = resp.gap_history.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9) + f64::EPSILON);
    println!("  gap history non-increasing over {} records: {monotone}", resp.gap_history.len());

    validate_contract(&req, &resp, &tol)?;
    println!("\nvalidate_contract: all lines hold");

    // The backend is *only* trusted to this accuracy. The point it returns
    // is near (3, 0, 0) but not exact — turning answers like this one into
    // exact optima is the rest of the library's job.
    println!("approximate objective = {:.9} (exact optimum 3)", dense::dot(&req.c, &resp.primal));
    Ok(())
}
