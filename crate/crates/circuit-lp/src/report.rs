//! End-to-end driver: the estimate-and-restart loop around the solvers.
//!
//! [`run`] wraps [`solve_feasibility`] / [`solve_optimization`] in the
//! restart discipline that makes the pipeline parameter-free. The condition
//! estimate starts at the optimistic `M = 2`; whenever a solve ends in a
//! lifting certificate, the certificate is re-proved in exact arithmetic
//! and the estimate is raised to `max{2·ratio, M²}`. A certificate that
//! fails the exact check (the floating-point lift overshot) still squares
//! the estimate but is not recorded as evidence, and the same silent
//! squaring handles internal inconsistencies and iteration limits, which
//! the theory attributes to an underestimated `M`. Since the estimate at
//! least squares on every restart, `k` restarts cover every imbalance up
//! to `2^(2^k)` — the default cap of 60 is far past the range of `f64`,
//! so the cap is only ever hit by genuinely stuck instances.
//!
//! The emitted [`SolveReport`] embeds no unverified claim: Farkas outcomes
//! are re-proved exactly before they are wrapped, and only exactly valid
//! lifting certificates appear in [`SolveReport::lifting_events`].

use std::fmt;
use std::time::Instant;

use serde::Serialize;

use crate::dense::{dot, Vector};
use crate::error::{Error, Result};
use crate::feasibility::{solve_feasibility, FeasibilityOutcome};
use crate::instance::Instance;
use crate::optimization::{solve_optimization, OptimizationOutcome};
use crate::oracles::{FarkasCertificate, OracleStats};
use crate::subspace::{ConditionEstimate, LiftingCertificate, SubspaceRep};
use crate::tol::Tolerance;
use crate::verify::{
    check_certificate, check_farkas_dual, check_farkas_primal, rat_to_f64,
    subspace_ground_truth, FarkasCheck, GroundTruth,
};

/// Largest ambient dimension at which `verify` runs the exact rational
/// simplex alongside the floating-point pipeline.
pub const VERIFY_DIM_GUARD: usize = 30;

/// Relative tolerance for objective agreement with the exact oracle.
pub const AGREEMENT_REL_TOL: f64 = 1e-7;

/// What the driver is asked to decide.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Find a nonnegative point of `W + d` or prove there is none.
    Feas,
    /// Solve `min ⟨c,x⟩` over the same set, producing an optimal pair.
    Opt,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Feas => "feasibility",
            Mode::Opt => "optimization",
        })
    }
}

/// Driver settings.
#[derive(Debug, Clone)]
pub struct RunConfig {
    /// Question to decide.
    pub mode: Mode,
    /// Initial condition estimate (values below 2 are raised to 2).
    pub m_start: f64,
    /// Numerical tolerances used throughout.
    pub tol: Tolerance,
    /// Cross-check the outcome against the exact rational oracle when the
    /// dimension permits.
    pub verify: bool,
    /// Maximum number of estimate escalations before giving up.
    pub max_restarts: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mode: Mode::Opt,
            m_start: 2.0,
            tol: Tolerance::default(),
            verify: false,
            max_restarts: 60,
        }
    }
}

/// A Farkas certificate flattened for reporting, together with the numbers
/// its exact re-verification produced.
#[derive(Debug, Clone, Serialize)]
pub struct CertificateRecord {
    /// The nonnegative witness vector.
    pub vector: Vec<f64>,
    /// Floating-point inner product with the relevant shift (negative).
    pub inner: f64,
    /// Exact inner product of the verified reconstruction, rounded.
    pub exact_inner: f64,
    /// How far exact verification had to move the witness.
    pub projection_shift: f64,
}

impl CertificateRecord {
    fn new(cert: &FarkasCertificate, check: &FarkasCheck) -> Self {
        CertificateRecord {
            vector: cert.vector.clone(),
            inner: cert.inner,
            exact_inner: check.exact_inner,
            projection_shift: check.projection_shift,
        }
    }
}

/// One exactly verified lifting certificate and the estimate update it
/// triggered.
#[derive(Debug, Clone, Serialize)]
pub struct LiftingEvent {
    /// Ratio `‖lift‖∞ / ‖p‖₁` measured in floating point.
    pub ratio: f64,
    /// The exactly recomputed ratio.
    pub exact_ratio: f64,
    /// Number of prescribed coordinates in the certificate.
    pub index_count: usize,
    /// Estimate before the update.
    pub m_before: f64,
    /// Estimate after `M ← max{2·ratio, M²}`.
    pub m_after: f64,
}

/// Oracle-call counters, mirrored from [`OracleStats`] for serialization.
#[derive(Debug, Clone, Default, Serialize)]
pub struct CallCounts {
    /// Near-feasibility oracle calls.
    pub near_feasible: usize,
    /// Near-optimality oracle calls.
    pub near_optimal: usize,
    /// Proximity-feasibility oracle calls.
    pub prox_feas: usize,
    /// Proximity-optimality oracle calls.
    pub prox_opt: usize,
    /// Extended systems handed to the approximate solver.
    pub extended_solves: usize,
    /// Total interior-point iterations across those solves.
    pub solver_iterations: usize,
    /// Accuracy parameter of each proximity-oracle call, in call order.
    pub eps_used: Vec<f64>,
    /// Deepest feasibility recursion level reached.
    pub feasibility_depth: usize,
    /// Iterations of the optimization outer loop.
    pub outer_iterations: usize,
}

impl From<&OracleStats> for CallCounts {
    fn from(s: &OracleStats) -> Self {
        CallCounts {
            near_feasible: s.near_feasible_calls,
            near_optimal: s.near_optimal_calls,
            prox_feas: s.prox_feas_calls,
            prox_opt: s.prox_opt_calls,
            extended_solves: s.extended_solves,
            solver_iterations: s.solver_iterations,
            eps_used: s.eps_used.clone(),
            feasibility_depth: s.feasibility_depth,
            outer_iterations: s.outer_iterations,
        }
    }
}

/// What exact re-verification was performed and how it went.
#[derive(Debug, Clone, Default, Serialize)]
pub struct VerificationSummary {
    /// Certificates (Farkas and lifting) submitted to exact checks.
    pub certificates_checked: usize,
    /// How many of those passed. Always equal to `certificates_checked`
    /// for emitted reports; invalid lifting certificates are dropped and
    /// invalid Farkas certificates abort the run.
    pub certificates_valid: usize,
    /// Whether the exact rational oracle agrees with the outcome; `None`
    /// when the cross-check was not requested or the instance is too big.
    pub oracle_agreement: Option<bool>,
}

/// Final answer of a driver run.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReportOutcome {
    /// A nonnegative point of `W + d`.
    Feasible {
        /// The feasible point.
        x: Vec<f64>,
    },
    /// An optimal primal–dual pair with exactly complementary supports.
    Optimal {
        /// Optimal primal point.
        x: Vec<f64>,
        /// Optimal dual slack.
        s: Vec<f64>,
        /// `⟨c, x⟩`.
        objective: f64,
    },
    /// The primal program is infeasible.
    FarkasPrimal {
        /// The exactly verified witness.
        certificate: CertificateRecord,
    },
    /// The dual program is infeasible; with a feasible primal this means
    /// the objective is unbounded below.
    FarkasDual {
        /// The exactly verified witness.
        certificate: CertificateRecord,
    },
    /// The escalation loop hit its cap (or the range of `f64`).
    RestartLimit {
        /// Where the estimate stood when the run gave up.
        last_m: f64,
    },
}

impl ReportOutcome {
    /// Conventional process exit code: 0 solved/feasible, 1 infeasible
    /// with certificate, 2 restart limit.
    pub fn exit_code(&self) -> i32 {
        match self {
            ReportOutcome::Feasible { .. } | ReportOutcome::Optimal { .. } => 0,
            ReportOutcome::FarkasPrimal { .. } | ReportOutcome::FarkasDual { .. } => 1,
            ReportOutcome::RestartLimit { .. } => 2,
        }
    }
}

/// Everything a run produced, serializable as JSON and printable as text.
#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    /// Instance name.
    pub instance: String,
    /// Mode the driver ran in.
    pub mode: Mode,
    /// Final answer.
    pub outcome: ReportOutcome,
    /// Every estimate value actually tried, in order (strictly increasing).
    pub m_history: Vec<f64>,
    /// Number of escalation restarts performed (`m_history.len() − 1`).
    pub restarts: usize,
    /// The exactly verified lifting certificates found along the way.
    pub lifting_events: Vec<LiftingEvent>,
    /// Oracle-call counters accumulated over all attempts.
    pub calls: CallCounts,
    /// Wall-clock time of the whole run in milliseconds.
    pub wall_ms: f64,
    /// Exact-verification bookkeeping.
    pub verification: VerificationSummary,
}

enum Solved {
    Feasible(Vector),
    Optimal { x: Vector, s: Vector },
    PrimalInfeasible(FarkasCertificate),
    DualInfeasible(FarkasCertificate),
}

fn attempt(
    space: &SubspaceRep,
    instance: &Instance,
    mode: Mode,
    m: f64,
    stats: &mut OracleStats,
) -> Result<std::result::Result<Solved, LiftingCertificate>> {
    match mode {
        Mode::Feas => Ok(match solve_feasibility(space, &instance.d, m, stats)? {
            FeasibilityOutcome::Feasible(x) => Ok(Solved::Feasible(x)),
            FeasibilityOutcome::Infeasible(cert) => Ok(Solved::PrimalInfeasible(cert)),
            FeasibilityOutcome::Lifting(cert) => Err(cert),
        }),
        Mode::Opt => {
            let c = instance.c.as_deref().expect("run() checks the objective");
            Ok(match solve_optimization(space, &instance.d, c, m, stats)? {
                OptimizationOutcome::Optimal { x, s } => Ok(Solved::Optimal { x, s }),
                OptimizationOutcome::PrimalInfeasible(cert) => Ok(Solved::PrimalInfeasible(cert)),
                OptimizationOutcome::DualInfeasible(cert) => Ok(Solved::DualInfeasible(cert)),
                OptimizationOutcome::Lifting(cert) => Err(cert),
            })
        }
    }
}

fn finish(
    instance: &Instance,
    solved: Solved,
    verification: &mut VerificationSummary,
) -> Result<ReportOutcome> {
    Ok(match solved {
        Solved::Feasible(x) => ReportOutcome::Feasible { x },
        Solved::Optimal { x, s } => {
            let c = instance.c.as_deref().expect("run() checks the objective");
            let objective = dot(c, &x);
            ReportOutcome::Optimal { x, s, objective }
        }
        Solved::PrimalInfeasible(cert) => {
            verification.certificates_checked += 1;
            let check = check_farkas_primal(&cert.constraints, &instance.d, &cert.vector)?;
            if !check.valid {
                return Err(Error::InternalInconsistency(
                    "a primal Farkas certificate failed exact re-verification".into(),
                ));
            }
            verification.certificates_valid += 1;
            ReportOutcome::FarkasPrimal {
                certificate: CertificateRecord::new(&cert, &check),
            }
        }
        Solved::DualInfeasible(cert) => {
            let c = instance.c.as_deref().expect("run() checks the objective");
            verification.certificates_checked += 1;
            let check = check_farkas_dual(&cert.constraints, c, &cert.vector)?;
            if !check.valid {
                return Err(Error::InternalInconsistency(
                    "a dual Farkas certificate failed exact re-verification".into(),
                ));
            }
            verification.certificates_valid += 1;
            ReportOutcome::FarkasDual {
                certificate: CertificateRecord::new(&cert, &check),
            }
        }
    })
}

fn agreement(instance: &Instance, mode: Mode, outcome: &ReportOutcome) -> Result<Option<bool>> {
    if matches!(outcome, ReportOutcome::RestartLimit { .. })
        || instance.cols() > VERIFY_DIM_GUARD
    {
        return Ok(None);
    }
    let zero;
    let c: &[f64] = match (mode, &instance.c) {
        (Mode::Opt, Some(c)) => c,
        _ => {
            zero = vec![0.0; instance.cols()];
            &zero
        }
    };
    let truth = subspace_ground_truth(&instance.a, &instance.d, c)?;
    let agree = match (outcome, &truth) {
        (ReportOutcome::Feasible { .. }, GroundTruth::Optimal { .. })
        | (ReportOutcome::Feasible { .. }, GroundTruth::Unbounded { .. }) => true,
        (ReportOutcome::Optimal { objective, .. }, GroundTruth::Optimal { objective: exact, .. }) => {
            let exact = rat_to_f64(exact);
            (objective - exact).abs() <= AGREEMENT_REL_TOL * (1.0 + exact.abs())
        }
        (ReportOutcome::FarkasPrimal { .. }, GroundTruth::Infeasible { .. }) => true,
        (ReportOutcome::FarkasDual { .. }, GroundTruth::Unbounded { .. }) => true,
        _ => false,
    };
    Ok(Some(agree))
}

/// Runs the full pipeline on one instance.
///
/// Builds the subspace representation once, then attempts the requested
/// solve up to `1 + max_restarts` times, escalating the condition estimate
/// between attempts as described in the module docs. The returned report
/// is deterministic for fixed inputs up to wall-clock times.
pub fn run(instance: &Instance, config: &RunConfig) -> Result<SolveReport> {
    let started = Instant::now();
    if config.mode == Mode::Opt && instance.c.is_none() {
        return Err(Error::DimensionMismatch(
            "optimization mode needs an objective line in the instance".into(),
        ));
    }
    let space = SubspaceRep::from_matrix(&instance.a, &config.tol)?;

    let mut m_est = ConditionEstimate::new(config.m_start)?;
    let mut m_history = vec![m_est.value()];
    let mut lifting_events: Vec<LiftingEvent> = Vec::new();
    let mut stats = OracleStats::default();
    let mut verification = VerificationSummary::default();
    let mut outcome: Option<ReportOutcome> = None;

    for attempt_no in 0..=config.max_restarts {
        let m_before = m_est.value();
        let lifting = match attempt(&space, instance, config.mode, m_before, &mut stats) {
            Ok(Ok(solved)) => {
                outcome = Some(finish(instance, solved, &mut verification)?);
                break;
            }
            Ok(Err(cert)) => Some(cert),
            // Failures the theory attributes to an underestimated M are
            // absorbed into a plain squaring restart.
            Err(
                Error::InternalInconsistency(_)
                | Error::ResidualTooLarge(_)
                | Error::IterationLimit(_)
                | Error::NumericalBreakdown(_),
            ) => None,
            Err(other) => return Err(other),
        };

        let m_after = match lifting {
            Some(cert) => {
                verification.certificates_checked += 1;
                let check = check_certificate(&cert, m_before)?;
                if check.valid {
                    verification.certificates_valid += 1;
                    let after = m_est.bump(cert.ratio);
                    lifting_events.push(LiftingEvent {
                        ratio: cert.ratio,
                        exact_ratio: check.exact_ratio,
                        index_count: cert.index_set.len(),
                        m_before,
                        m_after: after,
                    });
                    after
                } else {
                    m_est.bump(0.0)
                }
            }
            None => m_est.bump(0.0),
        };
        if attempt_no == config.max_restarts || !m_after.is_finite() {
            break;
        }
        m_history.push(m_after);
    }

    let outcome = outcome.unwrap_or_else(|| {
        let last = m_est.value();
        ReportOutcome::RestartLimit {
            last_m: if last.is_finite() {
                last
            } else {
                *m_history.last().expect("history starts non-empty")
            },
        }
    });

    verification.oracle_agreement = if config.verify {
        agreement(instance, config.mode, &outcome)?
    } else {
        None
    };

    Ok(SolveReport {
        instance: instance.name.clone(),
        mode: config.mode,
        restarts: m_history.len() - 1,
        outcome,
        m_history,
        lifting_events,
        calls: CallCounts::from(&stats),
        wall_ms: started.elapsed().as_secs_f64() * 1e3,
        verification,
    })
}

fn fmt_f(x: f64) -> String {
    let mut s = format!("{x:.6}");
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    s
}

fn fmt_vec(v: &[f64]) -> String {
    let mut out = String::from("[");
    for (i, x) in v.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        if i == 12 && v.len() > 16 {
            out.push_str(&format!("… {} more", v.len() - i));
            break;
        }
        out.push_str(&fmt_f(*x));
    }
    out.push(']');
    out
}

impl fmt::Display for SolveReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} — {}", self.instance, self.mode)?;
        match &self.outcome {
            ReportOutcome::Feasible { x } => {
                writeln!(f, "outcome:      feasible")?;
                writeln!(f, "x:            {}", fmt_vec(x))?;
            }
            ReportOutcome::Optimal { x, s, objective } => {
                writeln!(f, "outcome:      optimal, objective {}", fmt_f(*objective))?;
                writeln!(f, "x:            {}", fmt_vec(x))?;
                writeln!(f, "s:            {}", fmt_vec(s))?;
            }
            ReportOutcome::FarkasPrimal { certificate } => {
                writeln!(
                    f,
                    "outcome:      primal infeasible (exact Farkas witness, ⟨d,s⟩ = {})",
                    fmt_f(certificate.exact_inner)
                )?;
                writeln!(f, "witness:      {}", fmt_vec(&certificate.vector))?;
            }
            ReportOutcome::FarkasDual { certificate } => {
                writeln!(
                    f,
                    "outcome:      dual infeasible — objective unbounded below (exact witness, ⟨c,x⟩ = {})",
                    fmt_f(certificate.exact_inner)
                )?;
                writeln!(f, "witness:      {}", fmt_vec(&certificate.vector))?;
            }
            ReportOutcome::RestartLimit { last_m } => {
                writeln!(
                    f,
                    "outcome:      restart limit reached (estimate grew to {})",
                    fmt_f(*last_m)
                )?;
            }
        }
        writeln!(
            f,
            "M history:    {} ({} restarts, {} lifting events)",
            fmt_vec(&self.m_history),
            self.restarts,
            self.lifting_events.len()
        )?;
        writeln!(
            f,
            "oracle calls: {} extended solves, {} interior-point iterations, feasibility depth {}, outer rounds {}",
            self.calls.extended_solves,
            self.calls.solver_iterations,
            self.calls.feasibility_depth,
            self.calls.outer_iterations
        )?;
        write!(
            f,
            "verification: {}/{} certificates valid",
            self.verification.certificates_valid, self.verification.certificates_checked
        )?;
        match self.verification.oracle_agreement {
            Some(true) => write!(f, "; exact oracle agrees")?,
            Some(false) => write!(f, "; EXACT ORACLE DISAGREES")?,
            None => {}
        }
        writeln!(f)?;
        write!(f, "wall time:    {:.1} ms", self.wall_ms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::Matrix;
    use crate::instance::parse_instance;

    fn parse(text: &str) -> Instance {
        parse_instance(text, "test", &Tolerance::default()).unwrap()
    }

    fn config(mode: Mode) -> RunConfig {
        RunConfig {
            mode,
            verify: true,
            ..RunConfig::default()
        }
    }

    #[test]
    fn optimization_reports_agreement_with_the_exact_oracle() {
        let inst = parse("1 3\n1 1 -1\nd 2 1 0\nc 1 2 0.5\n");
        let report = run(&inst, &config(Mode::Opt)).unwrap();
        match &report.outcome {
            ReportOutcome::Optimal { objective, .. } => {
                assert!((objective - 3.0).abs() <= 1e-7 * 4.0, "objective {objective}");
            }
            other => panic!("expected optimal, got {other:?}"),
        }
        assert_eq!(report.outcome.exit_code(), 0);
        assert_eq!(report.m_history, vec![2.0]);
        assert_eq!(report.restarts, 0);
        assert_eq!(report.verification.oracle_agreement, Some(true));
        assert!(report.lifting_events.is_empty());
    }

    #[test]
    fn infeasibility_is_reported_with_a_verified_witness() {
        // ker([1,1]) + (−1, 0) has coordinate sum −1 < 0 throughout.
        let inst = parse("1 2\n1 1\nd -1 0\n");
        let report = run(&inst, &config(Mode::Feas)).unwrap();
        match &report.outcome {
            ReportOutcome::FarkasPrimal { certificate } => {
                assert!(certificate.inner < 0.0);
                assert!(certificate.exact_inner < 0.0);
            }
            other => panic!("expected a primal Farkas outcome, got {other:?}"),
        }
        assert_eq!(report.outcome.exit_code(), 1);
        assert_eq!(report.m_history, vec![2.0]);
        assert_eq!(report.verification.certificates_checked, 1);
        assert_eq!(report.verification.certificates_valid, 1);
        assert_eq!(report.verification.oracle_agreement, Some(true));
    }

    #[test]
    fn unbounded_objectives_produce_a_dual_witness() {
        // ker([1,−1]) contains (1,1); with c = (−1,0) the objective is
        // unbounded below over x = (t+2, t).
        let inst = parse("1 2\n1 -1\nd 2 0\nc -1 0\n");
        let report = run(&inst, &config(Mode::Opt)).unwrap();
        assert!(
            matches!(report.outcome, ReportOutcome::FarkasDual { .. }),
            "{:?}",
            report.outcome
        );
        assert_eq!(report.outcome.exit_code(), 1);
        assert_eq!(report.verification.oracle_agreement, Some(true));
    }

    #[test]
    fn feasibility_mode_ignores_the_objective() {
        let inst = parse("1 3\n1 1 -1\nd 2 1 0\nc 1 2 0.5\n");
        let report = run(&inst, &config(Mode::Feas)).unwrap();
        assert!(matches!(report.outcome, ReportOutcome::Feasible { .. }));
        assert_eq!(report.verification.oracle_agreement, Some(true));
    }

    #[test]
    fn optimization_mode_requires_an_objective() {
        let inst = parse("1 2\n1 1\nd 1 1\n");
        let err = run(&inst, &config(Mode::Opt)).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch(_)), "{err}");
    }

    fn imbalanced() -> Instance {
        // ker([1, 100]) = span{(100, −1)}: κ = 100, and minimizing x₂ from
        // a shift with negative mass forces a lift that the initial guess
        // of 2 cannot cover.
        Instance {
            name: "imbalanced".into(),
            a: Matrix::from_rows_dims(&[vec![1.0, 100.0]], 2),
            d: vec![-1.0, 0.02],
            c: Some(vec![0.0, 1.0]),
        }
    }

    #[test]
    fn escalation_records_only_exactly_verified_events() {
        let inst = imbalanced();
        let report = run(&inst, &config(Mode::Opt)).unwrap();
        assert!(
            matches!(report.outcome, ReportOutcome::Optimal { .. }),
            "{:?}",
            report.outcome
        );
        assert!(report.restarts >= 1, "expected at least one restart");
        for w in report.m_history.windows(2) {
            assert!(w[1] > w[0], "M history must increase: {:?}", report.m_history);
        }
        for ev in &report.lifting_events {
            assert!(ev.exact_ratio > ev.m_before, "event not evidence: {ev:?}");
            assert!(ev.m_after >= (ev.m_before * ev.m_before).min(2.0 * ev.ratio));
        }
        assert_eq!(report.verification.oracle_agreement, Some(true));
    }

    #[test]
    fn the_restart_cap_is_reported_not_raised() {
        let inst = imbalanced();
        let mut cfg = config(Mode::Opt);
        cfg.max_restarts = 0;
        let report = run(&inst, &cfg).unwrap();
        match report.outcome {
            ReportOutcome::RestartLimit { last_m } => assert!(last_m > 2.0),
            ref other => panic!("expected the restart limit, got {other:?}"),
        }
        assert_eq!(report.outcome.exit_code(), 2);
        assert_eq!(report.m_history, vec![2.0]);
        assert_eq!(report.restarts, 0);
    }

    #[test]
    fn reports_serialize_and_display() {
        let inst = parse("1 3\n1 1 -1\nd 2 1 0\nc 1 2 0.5\n");
        let report = run(&inst, &config(Mode::Opt)).unwrap();
        let json = serde_json::to_value(&report).unwrap();
        assert_eq!(json["outcome"]["kind"], "optimal");
        assert_eq!(json["mode"], "opt");
        assert!(json["m_history"].as_array().unwrap().len() == 1);
        let text = report.to_string();
        assert!(text.contains("optimal"), "{text}");
        assert!(text.contains("M history"), "{text}");
    }
}
