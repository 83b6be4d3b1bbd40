use circuit_lp::dense::Matrix;
use circuit_lp::instance::Instance;
use circuit_lp::report::{run, Mode, ReportOutcome, RunConfig};

fn probe(name: &str, rows: &[Vec<f64>], n: usize, d: Vec<f64>, c: Vec<f64>) {
    let inst = Instance {
        name: name.into(),
        a: Matrix::from_rows_dims(rows, n),
        d,
        c: Some(c),
    };
    let cfg = RunConfig {
        mode: Mode::Opt,
        verify: true,
        ..RunConfig::default()
    };
    match run(&inst, &cfg) {
        Ok(r) => println!(
            "{name}: outcome={} restarts={} events={} m_hist={:?} agree={:?}",
            match &r.outcome {
                ReportOutcome::Optimal { .. } => "optimal",
                ReportOutcome::Feasible { .. } => "feasible",
                ReportOutcome::FarkasPrimal { .. } => "farkas_p",
                ReportOutcome::FarkasDual { .. } => "farkas_d",
                ReportOutcome::RestartLimit { .. } => "cap",
            },
            r.restarts,
            r.lifting_events.len(),
            r.m_history,
            r.verification.oracle_agreement,
        ),
        Err(e) => println!("{name}: ERR {e}"),
    }
}

#[test]
fn probe_high_kappa_shapes() {
    let k = 100.0;
    probe("g1", &[vec![1.0, k]], 2, vec![-1.0, 0.02], vec![1.0, 1.0]);
    probe("g2", &[vec![1.0, k]], 2, vec![-1.0, 0.02], vec![0.0, 1.0]);
    probe("g3", &[vec![1.0, k]], 2, vec![-1.0, 0.02], vec![1.0, 0.0]);
    probe("g4", &[vec![100.0, -1.0]], 2, vec![1.0, -1.0], vec![0.0, 1.0]);
    probe("g5", &[vec![100.0, -1.0]], 2, vec![1.0, -1.0], vec![1.0, 1.0]);
    probe("g6", &[vec![100.0, -1.0]], 2, vec![-0.01, 2.0], vec![1.0, 1.0]);
    probe(
        "g7",
        &[vec![1.0, k, 0.0, 0.0], vec![0.0, 0.0, 1.0, k]],
        4,
        vec![-1.0, 0.02, -1.0, 0.02],
        vec![1.0, 1.0, 1.0, 1.0],
    );
    probe("g8", &[vec![1.0, k]], 2, vec![1.0, -0.005], vec![1.0, 1.0]);
    probe("g9", &[vec![1.0, k]], 2, vec![3.0, -0.005], vec![-1.0, 200.0]);
    probe("g10", &[vec![1.0, k]], 2, vec![-1.0, 0.02], vec![-1.0, 0.0]);
}
