use adamdo_core::harness::*;
use adamdo_core::Error;

fn synthetic(alg: &str, extra: &str) -> ExperimentConfig {
    parse_config(&format!(
        "algorithm = {alg}\ntopology = ring\nnodes = 4\ndataset.synthetic.n = 20\ndataset.synthetic.d = 5\nseed = 3\n{extra}\n"
    ))
    .unwrap()
}

#[test]
fn epoch_cadence_gives_one_row_per_epoch() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = synthetic("adamdos", "batch = 1\nT = 60\nrecord_every = epoch");
    let out = run_experiment_to(&cfg, &dir.path().join("t.csv")).unwrap();
    let rows = read_trace_csv(&out.csv).unwrap();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows.iter().map(|r| r.step).collect::<Vec<_>>(), vec![20, 40, 60]);
    assert_eq!(rows.iter().map(|r| r.epoch).collect::<Vec<_>>(), vec![1.0, 2.0, 3.0]);
}

#[test]
fn trace_files_have_fixed_schema_and_footer() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = synthetic("adamdof", "T = 30\nrecord_every = 10");
    let path = dir.path().join("nested/t.csv");
    run_experiment_to(&cfg, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(CSV_HEADER));
    assert!(text.contains("# algorithm = adamdof"));
    assert!(text.contains("# evaluation_epochs = "));
    assert!(side_path(&path, ".summary").exists());
    assert_eq!(read_trace_csv(&path).unwrap().len(), 3);
}

#[test]
fn comparing_a_run_with_itself_shows_no_difference() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let cfg = synthetic("adamdos", "T = 100");
    run_experiment_to(&cfg, &a).unwrap();
    run_experiment_to(&cfg, &b).unwrap();
    let cmp = compare_runs(&[&a, &b]).unwrap();
    assert_eq!(cmp.max_differences(), vec![0.0, 0.0]);
    assert_eq!(cmp.ranking().len(), 2);
    assert!(cmp.render().contains("ranking by final gap"));
}

#[test]
fn comparison_rejects_mismatched_grids_and_missing_files() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    run_experiment_to(&synthetic("adamdos", "T = 40"), &a).unwrap();
    run_experiment_to(&synthetic("adamdos", "T = 80"), &b).unwrap();
    assert!(matches!(compare_runs(&[&a, &b]), Err(Error::Compare(_))));
    assert!(matches!(compare_runs(&[&a]), Err(Error::Compare(_))));
    let missing = dir.path().join("missing.csv");
    assert!(matches!(compare_runs(&[&a, &missing]), Err(Error::Io { .. })));
}

#[test]
fn config_round_trips_through_text() {
    let cfg = synthetic("adamdof", "adaptive = bb\ngamma = 0.02\neta = 0.5/T^{2/3}\nrecord_every = step");
    assert_eq!(parse_config(&cfg.to_config_string()).unwrap(), cfg);
}

#[test]
fn invalid_configs_list_every_problem() {
    let count = |text: &str| match parse_config(text).unwrap_err() {
        Error::Config(errors) => errors.len(),
        other => panic!("unexpected {other:?}"),
    };
    assert_eq!(count("algorithm = nope\ntopology = ring\n"), 2);
    let text = "algorithm = adamdos\ntopology = ring\nnodes = 2\ndataset.synthetic.n = 10\n\
                dataset.synthetic.d = 3\ngamma = -1\nworkers = 0\n";
    assert_eq!(count(text), 3);
}

#[test]
fn lyapunov_mode_writes_potential_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = parse_config(
        "algorithm = adamdof\ntopology = ring\nnodes = 5\ndataset.quadratic.n = 4\ndataset.quadratic.d = 3\n\
         adaptive = identity\nrho = 1\ngamma = 0.001\neta = 0.2\nbatch = 4\nbeta = 0.5\nT = 20\n\
         diagnostics = gap, lyapunov\n",
    )
    .unwrap();
    let path = dir.path().join("q.csv");
    run_experiment_to(&cfg, &path).unwrap();
    let text = std::fs::read_to_string(side_path(&path, ".lyapunov.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(LYAPUNOV_HEADER));
    let potentials: Vec<f64> = lines.map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(potentials.len(), 21);
    assert!(potentials.windows(2).all(|p| p[1] <= p[0] + 1e-12 * p[0].abs()));
}

#[test]
fn divergent_runs_leave_a_marker() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = parse_config(
        "algorithm = adamdof\ntopology = ring\nnodes = 3\ndataset.quadratic.n = 2\ndataset.quadratic.d = 3\n\
         adaptive = identity\nrho = 1e-6\ngamma = 1000\nbatch = 2\nT = 500\n",
    )
    .unwrap();
    let path = dir.path().join("d.csv");
    assert!(matches!(run_experiment_to(&cfg, &path), Err(Error::Divergence { .. })));
    assert!(side_path(&path, ".diverged").exists());
    assert!(path.exists());
}
