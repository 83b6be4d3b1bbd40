//! Benchmark families and the harness that runs them.
//!
//! Four generators cover the interesting regimes:
//!
//! * `tu-network` — incidence matrices of random connected digraphs with a
//!   feasible integer flow. Network matrices are totally unimodular, so
//!   the circuit imbalance is exactly 1 and the initial estimate `M = 2`
//!   never needs a restart.
//! * `random-int` — small dense matrices with integer entries in
//!   `[−3, 3]`, a nonnegative integer particular solution, and a random
//!   integer objective. The bread-and-butter correctness corpus.
//! * `high-kappa` — block-diagonal gadgets with kernel rows `(K, −1)` for
//!   `K = 100`, shifted so the solve must cross the imbalanced circuit.
//!   Exercises the escalation loop: the first attempt produces a lifting
//!   certificate with ratio `K` and the second attempt succeeds.
//! * `infeasible` — instances built around a planted Farkas witness
//!   (column signs are flipped until `s = Aᵀy ≥ 0`, then `d = −s`), so
//!   every run must end in an exactly verified infeasibility certificate.
//!
//! Generation is deterministic in the seed; rows are produced in order.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dense::Matrix;
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::report::{run, Mode, ReportOutcome, RunConfig, SolveReport};

/// Gadget scale of the `high-kappa` family.
pub const HIGH_KAPPA_K: f64 = 100.0;

/// A benchmark instance family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// Digraph incidence matrices (totally unimodular, κ = 1).
    TuNetwork,
    /// Random small integer matrices.
    RandomInt,
    /// Block-diagonal `(K, −1)` kernel gadgets, κ = K.
    HighKappa,
    /// Instances with a planted primal Farkas witness.
    Infeasible,
}

impl Family {
    /// All families, in display order.
    pub const ALL: [Family; 4] = [
        Family::TuNetwork,
        Family::RandomInt,
        Family::HighKappa,
        Family::Infeasible,
    ];
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::TuNetwork => "tu-network",
            Family::RandomInt => "random-int",
            Family::HighKappa => "high-kappa",
            Family::Infeasible => "infeasible",
        })
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tu-network" => Ok(Family::TuNetwork),
            "random-int" => Ok(Family::RandomInt),
            "high-kappa" => Ok(Family::HighKappa),
            "infeasible" => Ok(Family::Infeasible),
            other => Err(Error::Parse {
                line: 0,
                msg: format!(
                    "unknown family {other:?}; expected tu-network, random-int, high-kappa or infeasible"
                ),
            }),
        }
    }
}

/// Generates the `idx`-th instance of a family from the given stream.
pub fn generate(family: Family, rng: &mut impl Rng, idx: usize) -> Instance {
    match family {
        Family::TuNetwork => tu_network_instance(rng, idx),
        Family::RandomInt => random_int_instance(rng, idx),
        Family::HighKappa => high_kappa_instance(rng, idx),
        Family::Infeasible => infeasible_instance(rng, idx),
    }
}

/// Random connected digraph incidence instance with a feasible integer
/// flow: 3–8 nodes, a random spanning tree plus up to 4 extra arcs, one
/// balance row dropped so the matrix has full row rank.
pub fn tu_network_instance(rng: &mut impl Rng, idx: usize) -> Instance {
    let nodes = rng.gen_range(3..=8usize);
    let extra = rng.gen_range(0..=4usize);
    let mut arcs: Vec<(usize, usize)> = Vec::new();
    for v in 1..nodes {
        let u = rng.gen_range(0..v);
        if rng.gen_bool(0.5) {
            arcs.push((u, v));
        } else {
            arcs.push((v, u));
        }
    }
    for _ in 0..extra {
        let u = rng.gen_range(0..nodes);
        let mut v = rng.gen_range(0..nodes);
        while v == u {
            v = rng.gen_range(0..nodes);
        }
        arcs.push((u, v));
    }
    let n = arcs.len();
    // Node-arc incidence with the last balance row dropped.
    let mut rows = vec![vec![0.0; n]; nodes - 1];
    for (j, &(u, v)) in arcs.iter().enumerate() {
        if u < nodes - 1 {
            rows[u][j] = 1.0;
        }
        if v < nodes - 1 {
            rows[v][j] = -1.0;
        }
    }
    let d: Vec<f64> = (0..n).map(|_| rng.gen_range(0..=3) as f64).collect();
    let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-1..=3) as f64).collect();
    Instance {
        name: format!("tu-network-{idx}"),
        a: Matrix::from_rows_dims(&rows, n),
        d,
        c: Some(c),
    }
}

/// Random dense integer instance: `m ∈ [1,6]`, `n ∈ [2,12]`, entries in
/// `[−3, 3]`, nonnegative integer particular solution, integer objective.
pub fn random_int_instance(rng: &mut impl Rng, idx: usize) -> Instance {
    let m = rng.gen_range(1..=6usize);
    let n = rng.gen_range(2..=12usize).max(m + 1);
    let rows: Vec<Vec<f64>> = (0..m)
        .map(|_| (0..n).map(|_| rng.gen_range(-3..=3) as f64).collect())
        .collect();
    let d: Vec<f64> = (0..n).map(|_| rng.gen_range(0..=3) as f64).collect();
    let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-3..=3) as f64).collect();
    Instance {
        name: format!("random-int-{idx}"),
        a: Matrix::from_rows_dims(&rows, n),
        d,
        c: Some(c),
    }
}

/// Block-diagonal gadget instance: each block has the single constraint
/// row `(1, K)`, shift `(−a, a/50)`, and objective `(0, 1)`. The block's
/// kernel is spanned by `(K, −1)`, so κ = K, and minimizing the second
/// coordinate from the negative-mass shift forces the solve to traverse
/// the imbalanced circuit.
pub fn high_kappa_instance(rng: &mut impl Rng, idx: usize) -> Instance {
    let blocks = rng.gen_range(1..=3usize);
    let n = 2 * blocks;
    let mut rows = vec![vec![0.0; n]; blocks];
    let mut d = vec![0.0; n];
    let mut c = vec![0.0; n];
    for b in 0..blocks {
        let a = rng.gen_range(1..=3) as f64;
        rows[b][2 * b] = 1.0;
        rows[b][2 * b + 1] = HIGH_KAPPA_K;
        d[2 * b] = -a;
        d[2 * b + 1] = 2.0 * a / HIGH_KAPPA_K;
        c[2 * b + 1] = 1.0;
    }
    Instance {
        name: format!("high-kappa-{idx}"),
        a: Matrix::from_rows_dims(&rows, n),
        d,
        c: Some(c),
    }
}

/// Instance with a planted primal Farkas witness: draw an integer matrix
/// and multiplier `y`, flip column signs until `s = Aᵀy ≥ 0`, and set
/// `d = −s`, so `⟨d, s⟩ = −‖s‖² < 0` with `s` a nonnegative row-space
/// vector — primal infeasibility with a certificate by construction.
pub fn infeasible_instance(rng: &mut impl Rng, idx: usize) -> Instance {
    loop {
        let m = rng.gen_range(1..=4usize);
        let n = rng.gen_range(2..=10usize).max(m + 1);
        let mut rows: Vec<Vec<f64>> = (0..m)
            .map(|_| (0..n).map(|_| rng.gen_range(-3..=3) as f64).collect())
            .collect();
        let y: Vec<f64> = (0..m).map(|_| rng.gen_range(-3..=3) as f64).collect();
        let mut s = vec![0.0; n];
        for j in 0..n {
            let v: f64 = (0..m).map(|i| rows[i][j] * y[i]).sum();
            if v < 0.0 {
                for row in rows.iter_mut() {
                    row[j] = -row[j];
                }
            }
            s[j] = v.abs();
        }
        if s.iter().all(|&v| v == 0.0) {
            continue;
        }
        let d: Vec<f64> = s.iter().map(|&v| -v).collect();
        let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-3..=3) as f64).collect();
        return Instance {
            name: format!("infeasible-{idx}"),
            a: Matrix::from_rows_dims(&rows, n),
            d,
            c: Some(c),
        };
    }
}

/// One line of the benchmark table.
#[derive(Debug, Clone)]
pub struct BenchRow {
    /// Family the instance came from.
    pub family: String,
    /// Instance name.
    pub name: String,
    /// Constraint rows.
    pub m: usize,
    /// Ambient dimension.
    pub n: usize,
    /// Final outcome kind.
    pub outcome: String,
    /// Whether every certificate the run checked verified exactly.
    pub verified: bool,
    /// Exact-oracle agreement, when the cross-check ran.
    pub agree_oracle: Option<bool>,
    /// Escalation restarts.
    pub restarts: usize,
    /// Exactly verified lifting certificates found.
    pub lifting_events: usize,
    /// Estimate history, `;`-separated.
    pub m_history: String,
    /// Extended systems solved.
    pub extended_solves: usize,
    /// Interior-point iterations.
    pub solver_iterations: usize,
    /// Wall time of the run in milliseconds.
    pub wall_ms: f64,
}

fn outcome_kind(outcome: &ReportOutcome) -> &'static str {
    match outcome {
        ReportOutcome::Feasible { .. } => "feasible",
        ReportOutcome::Optimal { .. } => "optimal",
        ReportOutcome::FarkasPrimal { .. } => "farkas_primal",
        ReportOutcome::FarkasDual { .. } => "farkas_dual",
        ReportOutcome::RestartLimit { .. } => "restart_limit",
    }
}

impl BenchRow {
    fn new(family: Family, instance: &Instance, report: &SolveReport) -> Self {
        BenchRow {
            family: family.to_string(),
            name: report.instance.clone(),
            m: instance.rows(),
            n: instance.cols(),
            outcome: outcome_kind(&report.outcome).to_string(),
            verified: report.verification.certificates_valid
                == report.verification.certificates_checked,
            agree_oracle: report.verification.oracle_agreement,
            restarts: report.restarts,
            lifting_events: report.lifting_events.len(),
            m_history: report
                .m_history
                .iter()
                .map(|m| format!("{m}"))
                .collect::<Vec<_>>()
                .join(";"),
            extended_solves: report.calls.extended_solves,
            solver_iterations: report.calls.solver_iterations,
            wall_ms: report.wall_ms,
        }
    }
}

/// Runs `count` generated instances of a family and collects the table.
///
/// Instance generation and solving are deterministic in `(family, count,
/// seed)`; only the wall-time column varies between runs.
pub fn bench(family: Family, count: usize, seed: u64, verify: bool) -> Result<Vec<BenchRow>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let config = RunConfig {
        mode: Mode::Opt,
        verify,
        ..RunConfig::default()
    };
    let mut rows = Vec::with_capacity(count);
    for idx in 0..count {
        let instance = generate(family, &mut rng, idx);
        let report = run(&instance, &config)?;
        rows.push(BenchRow::new(family, &instance, &report));
    }
    Ok(rows)
}

/// Renders benchmark rows as CSV with a header line.
pub fn csv(rows: &[BenchRow]) -> String {
    let mut out = String::from(
        "family,name,m,n,outcome,verified,agree_oracle,restarts,lifting_events,m_history,extended_solves,solver_iterations,wall_ms\n",
    );
    for r in rows {
        let agree = match r.agree_oracle {
            Some(true) => "yes",
            Some(false) => "no",
            None => "-",
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{:.3}\n",
            r.family,
            r.name,
            r.m,
            r.n,
            r.outcome,
            r.verified,
            agree,
            r.restarts,
            r.lifting_events,
            r.m_history,
            r.extended_solves,
            r.solver_iterations,
            r.wall_ms,
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generation_is_deterministic_in_the_seed() {
        for family in Family::ALL {
            let mut r1 = ChaCha8Rng::seed_from_u64(7);
            let mut r2 = ChaCha8Rng::seed_from_u64(7);
            for idx in 0..5 {
                let a = generate(family, &mut r1, idx);
                let b = generate(family, &mut r2, idx);
                assert_eq!(a.d, b.d, "{family} #{idx}");
                assert_eq!(a.c, b.c, "{family} #{idx}");
            }
        }
    }

    #[test]
    fn family_names_round_trip() {
        for family in Family::ALL {
            assert_eq!(family.to_string().parse::<Family>().unwrap(), family);
        }
        assert!("mps".parse::<Family>().is_err());
    }

    #[test]
    fn tu_network_solves_without_restarts() {
        let rows = bench(Family::TuNetwork, 8, 3, true).unwrap();
        for row in &rows {
            assert_eq!(row.restarts, 0, "{row:?}");
            assert_eq!(row.lifting_events, 0, "{row:?}");
            assert!(row.verified, "{row:?}");
            assert_eq!(row.agree_oracle, Some(true), "{row:?}");
        }
    }

    #[test]
    fn the_infeasible_family_is_certified() {
        let rows = bench(Family::Infeasible, 8, 5, true).unwrap();
        for row in &rows {
            assert_eq!(row.outcome, "farkas_primal", "{row:?}");
            assert!(row.verified, "{row:?}");
            assert_eq!(row.agree_oracle, Some(true), "{row:?}");
        }
    }

    #[test]
    fn the_high_kappa_family_escalates_and_recovers() {
        let rows = bench(Family::HighKappa, 6, 11, true).unwrap();
        let mut escalated = 0;
        for row in &rows {
            assert_eq!(row.outcome, "optimal", "{row:?}");
            assert!(row.restarts <= 3, "{row:?}");
            assert_eq!(row.agree_oracle, Some(true), "{row:?}");
            escalated += row.lifting_events;
        }
        assert!(escalated > 0, "expected at least one recorded lift: {rows:?}");
    }

    #[test]
    fn csv_has_one_line_per_row_plus_header() {
        let rows = bench(Family::RandomInt, 4, 1, false).unwrap();
        let table = csv(&rows);
        assert_eq!(table.lines().count(), 5);
        assert!(table.starts_with("family,name,m,n,outcome"));
    }
}
