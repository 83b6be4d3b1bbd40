//! Command-line front end: solve, decide feasibility, analyze condition
//! numbers, or run benchmark families.

use std::fs;
use std::io::{self, Write};
use std::path::Path;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use serde_json::json;

use circuit_lp::bench::{bench, csv, Family};
use circuit_lp::dense::norm_inf;
use circuit_lp::error::{Error, Result};
use circuit_lp::instance::{parse_instance, Instance};
use circuit_lp::report::{run, Mode, RunConfig};
use circuit_lp::subspace::SubspaceRep;
use circuit_lp::tol::Tolerance;
use circuit_lp::verify::{brute_chibar, brute_kappa, brute_kappa_dual};

/// Exact enumeration is exponential in the dimension; above this the
/// analyze mode falls back to lifting probes, which only bound κ from
/// below.
const ANALYZE_EXACT_GUARD: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CliMode {
    /// Decide feasibility of `x ∈ ker(A) + d, x ≥ 0`.
    Feas,
    /// Minimize `⟨c, x⟩` over the same set.
    Opt,
    /// Report condition numbers of `ker(A)` instead of solving.
    Analyze,
    /// Generate and solve a benchmark family, emitting CSV.
    Bench,
}

#[derive(Debug, Parser)]
#[command(
    name = "circuit-lp",
    version,
    about = "Exact linear programming from approximate solves, with accuracy driven by the circuit imbalance"
)]
struct Cli {
    /// Instance file; in bench mode, a family name (`tu-network`,
    /// `random-int`, `high-kappa`, `infeasible`), optionally as
    /// `family:count`.
    target: String,

    /// What to do with the instance.
    #[arg(long, value_enum, default_value_t = CliMode::Opt)]
    mode: CliMode,

    /// Initial condition estimate; values below 2 are raised to 2.
    #[arg(long = "M", default_value_t = 2.0)]
    m: f64,

    /// Relative residual tolerance.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,

    /// Cross-check outcomes against the exact rational oracle (runs when
    /// the dimension permits).
    #[arg(long)]
    verify: bool,

    /// Emit machine-readable JSON instead of text (bench always emits CSV).
    #[arg(long)]
    json: bool,

    /// Seed for bench-mode instance generation.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Cap on condition-estimate escalations before giving up.
    #[arg(long, default_value_t = 60)]
    max_restarts: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}

fn make_tol(residual_tol: f64) -> Result<Tolerance> {
    let zero_tol = 1e-11f64.min(residual_tol / 10.0);
    Tolerance::new(zero_tol, residual_tol)
}

/// Prints to stdout, treating a closed pipe (e.g. `| head`) as a normal
/// end of output rather than a panic.
fn emit(text: &str) {
    if let Err(e) = writeln!(io::stdout(), "{text}") {
        if e.kind() == io::ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
        eprintln!("error: cannot write output: {e}");
        std::process::exit(3);
    }
}

fn load_instance(path: &str, tol: &Tolerance) -> Result<Instance> {
    let text = fs::read_to_string(path).map_err(|e| Error::Parse {
        line: 0,
        msg: format!("cannot read {path}: {e}"),
    })?;
    let name = Path::new(path)
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.to_string());
    parse_instance(&text, &name, tol)
}

fn dispatch(cli: &Cli) -> Result<u8> {
    let tol = make_tol(cli.tol)?;
    match cli.mode {
        CliMode::Bench => bench_cmd(cli),
        CliMode::Analyze => {
            let instance = load_instance(&cli.target, &tol)?;
            analyze_cmd(cli, &instance, &tol)
        }
        CliMode::Feas | CliMode::Opt => {
            let instance = load_instance(&cli.target, &tol)?;
            solve_cmd(cli, &instance, tol)
        }
    }
}

fn solve_cmd(cli: &Cli, instance: &Instance, tol: Tolerance) -> Result<u8> {
    // An instance without an objective line can only be decided for
    // feasibility, whatever the requested mode.
    let mode = if cli.mode == CliMode::Feas || instance.c.is_none() {
        Mode::Feas
    } else {
        Mode::Opt
    };
    let config = RunConfig {
        mode,
        m_start: cli.m,
        tol,
        verify: cli.verify,
        max_restarts: cli.max_restarts,
    };
    let report = run(instance, &config)?;
    if cli.json {
        emit(&serde_json::to_string_pretty(&report).expect("report serializes"));
    } else {
        emit(&report.to_string());
    }
    Ok(report.outcome.exit_code() as u8)
}

fn analyze_cmd(cli: &Cli, instance: &Instance, tol: &Tolerance) -> Result<u8> {
    let (m, n) = (instance.rows(), instance.cols());
    if n <= ANALYZE_EXACT_GUARD {
        let primal = brute_kappa(&instance.a)?;
        let dual = brute_kappa_dual(&instance.a)?;
        let chibar = brute_chibar(&instance.a, tol)?;
        let kappa = primal.kappa_f64;
        let band = match (kappa, chibar) {
            (Some(k), Some(x)) => {
                let lo = x / n as f64;
                let hi = (x * x - 1.0).max(0.0).sqrt();
                Some((lo, hi, lo <= k * (1.0 + 1e-9) && k <= hi * (1.0 + 1e-9)))
            }
            _ => None,
        };
        if cli.json {
            emit(
                &serde_json::to_string_pretty(&json!({
                    "mode": "analyze",
                    "instance": instance.name,
                    "m": m,
                    "n": n,
                    "exact": true,
                    "kappa": kappa,
                    "kappa_dual": dual.kappa_f64,
                    "chibar": chibar,
                    "circuits": primal.circuits,
                    "band": band.map(|(lo, hi, ok)| json!({"low": lo, "high": hi, "holds": ok})),
                }))
                .expect("analysis serializes"),
            );
        } else {
            let mut out = format!("{} — condition analysis ({m}×{n}, exact)\n", instance.name);
            match kappa {
                Some(k) => out += &format!("kappa:        {k}\n"),
                None => out += "kappa:        undefined (the kernel is trivial)\n",
            }
            match dual.kappa_f64 {
                Some(k) => out += &format!("kappa (dual): {k}\n"),
                None => out += "kappa (dual): undefined\n",
            }
            match chibar {
                Some(x) => out += &format!("chibar:       {x}\n"),
                None => out += "chibar:       undefined\n",
            }
            out += &format!("circuits:     {}", primal.circuits);
            if let Some((lo, hi, ok)) = band {
                out += &format!(
                    "\nband:         {lo:.6} ≤ kappa ≤ {hi:.6} — {}",
                    if ok { "holds" } else { "VIOLATED" }
                );
            }
            emit(&out);
        }
    } else {
        // Exact enumeration is out of reach; lifting probes give certified
        // lower bounds instead (any lift ratio bounds κ from below).
        let space = SubspaceRep::from_matrix(&instance.a, tol)?;
        let dual_rep = space.dual()?;
        let probe = |rep: &SubspaceRep| -> f64 {
            let mut best = 0.0f64;
            for j in 0..n {
                if let Ok(z) = rep.lift(&[j], &[1.0]) {
                    best = best.max(norm_inf(&z));
                }
            }
            best
        };
        let lb = probe(&space);
        let lb_dual = probe(&dual_rep);
        if cli.json {
            emit(
                &serde_json::to_string_pretty(&json!({
                    "mode": "analyze",
                    "instance": instance.name,
                    "m": m,
                    "n": n,
                    "exact": false,
                    "kappa_lower_bound": lb,
                    "kappa_dual_lower_bound": lb_dual,
                }))
                .expect("analysis serializes"),
            );
        } else {
            emit(&format!(
                "{} — condition analysis ({m}×{n}, probe lower bounds)\n\
                 kappa ≥        {lb}\n\
                 kappa (dual) ≥ {lb_dual}\n\
                 (dimension exceeds the exact-enumeration guard {ANALYZE_EXACT_GUARD})",
                instance.name
            ));
        }
    }
    Ok(0)
}

fn bench_cmd(cli: &Cli) -> Result<u8> {
    let (family, count) = match cli.target.split_once(':') {
        Some((f, c)) => {
            let count: usize = c.parse().map_err(|_| Error::Parse {
                line: 0,
                msg: format!("bad instance count {c:?}"),
            })?;
            (f.parse::<Family>()?, count)
        }
        None => (cli.target.parse::<Family>()?, 20),
    };
    let rows = bench(family, count, cli.seed, cli.verify)?;
    emit(csv(&rows).trim_end());
    Ok(0)
}
