use halpern_vr::harness::config::{Algorithm, ExperimentConfig, ProblemKind};
use halpern_vr::harness::experiment::{build_problem, metadata_path};
use halpern_vr::harness::{emit_csv, emit_plot, execute, parse_csv, read_csv, run_experiment, RunTrace};
use halpern_vr::{Error, TraceRecord};

fn record(iter: usize, epochs: f64, residual: f64) -> TraceRecord {
    TraceRecord { iter, oracle_epochs: epochs, residual, elapsed_ms: 1.25 }
}

fn trace(run_id: &str, algorithm: &str, records: Vec<TraceRecord>) -> RunTrace {
    RunTrace { run_id: run_id.into(), algorithm: algorithm.into(), problem: "matrix-game".into(), seed: 3, records }
}

#[test]
fn single_record_gives_two_lines() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("one.csv");
    emit_csv(&[trace("a", "eg", vec![record(0, 0.0, 0.5)])], &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(
        text,
        "run_id,algorithm,problem,seed,iter,oracle_epochs,residual,elapsed_ms\na,eg,matrix-game,3,0,0,0.5,1.250\n"
    );
}

#[test]
fn round_trip_keeps_full_precision() {
    let values = [0.1 + 0.2, 1.0 / 3.0, 2.0f64.sqrt() * 1e-9, 6.02214076e23, 4.9e-324, 123456.78901234567];
    let records: Vec<_> = values.iter().enumerate().map(|(i, &v)| record(i, v * 0.5, v)).collect();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rt.csv");
    emit_csv(&[trace("r", "vr-halpern", records.clone())], &path).unwrap();
    let back = read_csv(&path).unwrap();
    assert_eq!(back.len(), 1);
    for (a, b) in back[0].records.iter().zip(&records) {
        assert_eq!(a.residual.to_bits(), b.residual.to_bits());
        assert_eq!(a.oracle_epochs.to_bits(), b.oracle_epochs.to_bits());
    }
}

#[test]
fn empty_input_creates_no_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("none.csv");
    assert!(emit_csv(&[], &path).is_err());
    assert!(!path.exists());
}

#[test]
fn malformed_rows_are_reported_by_number() {
    let text = "run_id,algorithm,problem,seed,iter,oracle_epochs,residual,elapsed_ms\n\
                a,eg,p,0,0,0,1,0\n\
                a,eg,p,0,1,2,oops,0\n";
    let err = parse_csv(text.as_bytes(), "bad.csv").unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("bad.csv") && msg.contains("row 3") && msg.contains("residual"), "{msg}");
}

#[test]
fn config_errors_name_line_and_field() {
    let err = ExperimentConfig::from_file_text("problem = matrix-game\n\nepochs = -3\n", "run.cfg")
        .and_then(|c| c.validate().map(|_| c))
        .unwrap_err();
    let msg = err.to_string();
    assert!(matches!(err, Error::Config { .. }));
    assert!(msg.contains("epochs"), "{msg}");
    let err = ExperimentConfig::from_file_text("algorithm = sgd\n", "run.cfg").unwrap_err();
    assert!(err.to_string().contains("run.cfg:1") && err.to_string().contains("algorithm"), "{err}");
}

#[test]
fn budget_below_one_iteration_logs_only_the_start() {
    let config = ExperimentConfig { algorithm: Algorithm::Eg, m: 8, epochs: 1.0, ..Default::default() };
    let out = run_experiment(&config).unwrap();
    assert_eq!(out.runs[0].records.len(), 1);
    assert_eq!(out.runs[0].records[0].oracle_epochs, 0.0);
}

#[test]
fn full_scale_game_has_the_expected_dimensions() {
    let config = ExperimentConfig { problem: ProblemKind::MatrixGame, m: 500, ..Default::default() };
    let p = build_problem(&config).unwrap();
    assert_eq!(p.dim(), 1000);
    assert_eq!(p.effective_components(), 500);
}

#[test]
fn execute_writes_csv_and_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("trace.csv");
    let config = ExperimentConfig {
        problem: ProblemKind::OuyangXu,
        algorithm: Algorithm::InexactHalpern,
        m: 6,
        seeds: 3,
        epochs: 8.0,
        eta: Some(0.5),
        out: out.clone(),
        ..Default::default()
    };
    let result = execute(&config).unwrap();
    let back = read_csv(&out).unwrap();
    assert_eq!(back.len(), 3);
    assert_eq!(back.iter().map(|r| r.seed).collect::<Vec<_>>(), vec![0, 1, 2]);
    assert!(back.iter().all(|r| r.records.last().unwrap().oracle_epochs <= 8.0));
    let meta = std::fs::read_to_string(metadata_path(&out)).unwrap();
    for key in ["problem = ouyang-xu", "eta = 0.5", "eta_used = 0.5", "seed_list = 0,1,2", "build_id = halpern-vr"] {
        assert!(meta.contains(key), "missing {key:?} in\n{meta}");
    }
    let strip = |runs: &[RunTrace]| -> Vec<(String, usize, u64, u64)> {
        runs.iter()
            .flat_map(|r| {
                r.records
                    .iter()
                    .map(move |x| (r.run_id.clone(), x.iter, x.oracle_epochs.to_bits(), x.residual.to_bits()))
            })
            .collect()
    };
    assert_eq!(strip(&result.runs), strip(&back));
}

#[test]
fn plot_has_one_legend_entry_per_algorithm() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("two.csv");
    emit_csv(
        &[
            trace("a", "eg", vec![record(0, 0.0, 1.0), record(1, 2.0, 0.5), record(2, 4.0, 0.25)]),
            trace("b", "vr-halpern", vec![record(0, 0.0, 1.0), record(1, 1.5, 0.1), record(2, 4.0, 0.01)]),
        ],
        &csv,
    )
    .unwrap();
    let svg = dir.path().join("two.svg");
    let series = emit_plot(&[&csv], &svg).unwrap();
    assert_eq!(series.len(), 2);
    let text = std::fs::read_to_string(&svg).unwrap();
    assert!(text.contains("<svg") && text.contains("eg / matrix-game") && text.contains("vr-halpern / matrix-game"));

    let single = dir.path().join("one.csv");
    emit_csv(&[trace("c", "eg", vec![record(0, 0.0, 1.0)])], &single).unwrap();
    let series = emit_plot(&[&single], &dir.path().join("one.svg")).unwrap();
    assert_eq!(series[0].epochs.len(), 1);
}
