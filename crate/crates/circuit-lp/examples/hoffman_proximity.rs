//! Shrink a point of a subspace into a box, with a Hoffman-style bound on
//! how large the result must be — or a certificate that the bound lies.
//!
//! Given `start ∈ W` inside the box `[ℓ, u]`, `hoffman_point` returns
//! `y ∈ W ∩ [ℓ, u]` with `‖y‖∞ ≤ M·‖ℓ⁺ + u⁻‖₁`: the right-hand side is the
//! total mass by which the box forbids the origin, and `M` is the imbalance
//! estimate. When no such small point exists, that impossibility is itself
//! evidence that `M < κ_W`, and the routine returns a lifting certificate
//! instead of a point.
//!
//! Both arms are exercised on `W = span{(100, −1)}`, whose lone circuit has
//! imbalance 100.
//!
//! Run with `cargo run --example hoffman_proximity`.

use circuit_lp::circuits::{hoffman_point, HoffmanOutcome};
use circuit_lp::dense::{self, Matrix};
use circuit_lp::subspace::SubspaceRep;
use circuit_lp::verify::check_certificate;
use circuit_lp::{Result, Tolerance};

const INF: f64 = f64::INFINITY;

fn forcing_mass(lower: &[f64], upper: &[f64]) -> f64 {
    lower.iter().map(|&l| l.max(0.0)).sum::<f64>()
        + upper.iter().map(|&u| (-u).max(0.0)).sum::<f64>()
}

fn main() -> Result<()> {
    let tol = Tolerance::default();
    let space = SubspaceRep::from_matrix(&Matrix::from_rows(&[vec![1.0, 100.0]]), &tol)?;

    // Box forcing the *large* side of the circuit: x₁ ≥ 5. The minimal
    // point (5, -0.05) is no bigger than the forcing mass, so even a very
    // poor estimate M = 2 suffices.
    let lower = vec![5.0, -INF];
    let upper = vec![INF, 0.0];
    let start = vec![500.0, -5.0];
    let mass = forcing_mass(&lower, &upper);
    match hoffman_point(&space, &start, &lower, &upper, 2.0)? {
        HoffmanOutcome::Point(y) => {
            println!("easy side:  y = {y:?}");
            println!("  ‖y‖∞ = {:.3} ≤ M·‖ℓ⁺+u⁻‖₁ = {:.3}", dense::norm_inf(&y), 2.0 * mass);
        }
        HoffmanOutcome::Certificate(_) => println!("unexpected certificate"),
    }

    // Box forcing the *small* side: x₂ ≥ 1. Every point of W in the box has
    // first coordinate ≤ -100, yet the forcing mass is only 1 — no point
    // can satisfy the bound with M = 2, so out comes a certificate.
    let lower = vec![-INF, 1.0];
    let upper = vec![0.0, INF];
    let start = vec![-300.0, 3.0];
    let mass = forcing_mass(&lower, &upper);
    let cert = match hoffman_point(&space, &start, &lower, &upper, 2.0)? {
        HoffmanOutcome::Certificate(cert) => cert,
        HoffmanOutcome::Point(y) => {
            println!("unexpected point {y:?}");
            return Ok(());
        }
    };
    let check = check_certificate(&cert, 2.0)?;
    println!("\nhard side at M = 2: lifting certificate on I = {:?}", cert.index_set);
    println!("  measured ratio {:.1}, exact ratio {:.1}, proves κ_W > 2: {}",
        cert.ratio, check.exact_ratio, check.valid);

    // Escalate the way the driver would and retry: now the bound has room.
    let m_next = (2.0 * cert.ratio).max(4.0);
    match hoffman_point(&space, &start, &lower, &upper, m_next)? {
        HoffmanOutcome::Point(y) => {
            println!("\nretry at M = {m_next}: y = {y:?}");
            println!("  ‖y‖∞ = {:.3} ≤ M·‖ℓ⁺+u⁻‖₁ = {:.3}", dense::norm_inf(&y), m_next * mass);
        }
        HoffmanOutcome::Certificate(_) => println!("still certifying — estimate too small"),
    }
    Ok(())
}
