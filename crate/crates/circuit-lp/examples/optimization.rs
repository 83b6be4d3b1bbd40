//! Solve an LP to *exact* optimality using only approximate interior-point
//! solves, then cross-check the objective against a rational simplex.
//!
//! The headline guarantee: the returned pair `(x, s)` has disjoint supports,
//! so complementary slackness `x_j · s_j = 0` holds with exact floating-point
//! zeros — no "small gap", an actual certificate of optimality. The example
//! re-measures that, then reruns the instance through the exact rational
//! simplex and compares objectives.
//!
//! Run with `cargo run --example optimization`.

use circuit_lp::dense::{self, Matrix};
use circuit_lp::optimization::{solve_optimization, OptimizationOutcome};
use circuit_lp::oracles::OracleStats;
use circuit_lp::subspace::SubspaceRep;
use circuit_lp::verify::{rat_to_f64, subspace_ground_truth, GroundTruth};
use circuit_lp::{Result, Tolerance};

fn main() -> Result<()> {
    let tol = Tolerance::default();

    // min x₂ + 2x₃ over x₁ + x₂ + x₃ = 4, x₂ − x₃ = 1, x ≥ 0.
    // In subspace form: W = ker(A), feasible set W + d with Ad = b.
    let a = Matrix::from_rows(&[vec![1.0, 1.0, 1.0], vec![0.0, 1.0, -1.0]]);
    let d = vec![3.0, 1.0, 0.0]; // A·d = (4, 1)
    let c = vec![0.0, 1.0, 2.0];
    let space = SubspaceRep::from_matrix(&a, &tol)?;

    let mut stats = OracleStats::default();
    let (x, s) = match solve_optimization(&space, &d, &c, 2.0, &mut stats)? {
        OptimizationOutcome::Optimal { x, s } => (x, s),
        other => {
            println!("unexpected outcome: {other:?}");
            return Ok(());
        }
    };

    println!("primal optimum  x = {x:?}");
    println!("dual optimum    s = {s:?}");
    println!("objective   ⟨c,x⟩ = {:.12}", dense::dot(&c, &x));
    println!("duality gap ⟨x,s⟩ = {:?}", dense::dot(&x, &s));
    for j in 0..x.len() {
        println!("  x[{j}]·s[{j}] = {:?} (supports disjoint)", x[j] * s[j]);
    }
    println!("primal residual against W + d:  {:.3e}", space.shifted_residual(&x, &d));
    let dual = space.dual()?;
    println!("dual residual against W⊥ + c:   {:.3e}", dual.shifted_residual(&s, &c));

    // The same instance in exact arithmetic. Agreement here is the check the
    // CLI's --verify flag runs on every solved instance.
    match subspace_ground_truth(&a, &d, &c)? {
        GroundTruth::Optimal { objective, .. } => {
            let exact = rat_to_f64(&objective);
            let approx = dense::dot(&c, &x);
            println!("\nrational simplex objective = {exact:.12}");
            println!("difference                 = {:.3e}", (approx - exact).abs());
        }
        other => println!("\nrational simplex disagrees: {other:?}"),
    }

    println!("\noracle work: {} extended solves, {} interior-point iterations",
        stats.extended_solves, stats.solver_iterations);
    Ok(())
}
