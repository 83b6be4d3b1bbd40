//! Run a miniature benchmark over the four built-in instance families and
//! print the CSV the `bench` CLI mode emits.
//!
//! The families are chosen to hit the solver's distinct regimes:
//!
//! * `tu-network` — totally unimodular network matrices, `κ = 1`: no guess
//!   is ever wrong, so no restarts and no lifting events,
//! * `random-int` — small integer matrices, modest imbalance,
//! * `high-kappa` — rows like `(1, 100)` force `κ = 100`, so the `M = 2`
//!   start must fail, produce a verified lifting certificate, and restart,
//! * `infeasible` — constructed empty systems: every run ends in an exactly
//!   verified Farkas certificate.
//!
//! Each run is cross-checked against the exact rational oracle (the
//! `agree_oracle` column). Generated deterministically from the seed.
//!
//! Run with `cargo run --release --example bench_families`.

use circuit_lp::bench::{bench, csv, Family};
use circuit_lp::Result;

fn main() -> Result<()> {
    let seed = 7;
    let per_family = 4;

    let mut rows = Vec::new();
    for family in Family::ALL {
        rows.extend(bench(family, per_family, seed, true)?);
    }
    print!("{}", csv(&rows));

    let restarts: usize = rows.iter().map(|r| r.restarts).sum();
    let verified = rows.iter().filter(|r| r.verified).count();
    let agreed = rows.iter().filter(|r| r.agree_oracle == Some(true)).count();
    println!(
        "\n{} runs: {} certificate-backed restarts, {}/{} verified, {}/{} agree with the exact oracle",
        rows.len(), restarts, verified, rows.len(), agreed, rows.len(),
    );
    Ok(())
}
