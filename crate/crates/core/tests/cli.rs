use std::path::Path;
use std::process::{Command, Output};

const HEADER: &str = "model,beta0,beta1,beta2,beta3,delta,n,m,solver,iters,time_ms,error,seed";

fn qtsolve(args: &[&str]) -> Output {
    qtsolve_env(args, &[])
}

fn qtsolve_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_qtsolve"));
    cmd.args(args).env_remove("QTSOLVE_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Data rows split into columns, with the version and header lines checked.
fn rows(text: &str) -> Vec<Vec<String>> {
    let mut lines = text.lines();
    assert!(lines
        .next()
        .unwrap()
        .starts_with("# qtsolve solve report, schema v"));
    assert_eq!(lines.next().unwrap(), HEADER);
    lines
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn without_time(rows: &[Vec<String>]) -> Vec<Vec<String>> {
    rows.iter()
        .map(|r| {
            r.iter()
                .enumerate()
                .filter(|(i, _)| *i != 10)
                .map(|(_, v)| v.clone())
                .collect()
        })
        .collect()
}

#[test]
fn table_preset_rows() {
    let out = qtsolve(&["solve", "--preset", "table1"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let rows = rows(&stdout(&out));
    assert_eq!(rows.len(), 24);
    for r in rows.iter().filter(|r| r[8] == "PCG-C") {
        assert_eq!(r[9], "3");
        assert_eq!(r[7], "exact");
    }
}

#[test]
fn ma1_preset_first_cell() {
    let out = qtsolve(&["solve", "--preset", "table3", "--n", "256"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = rows(&stdout(&out));
    let first = &rows[..2];
    assert_eq!(&first[0][..5], ["ma1", "-0.08", "0.21", "-0.8", "-0.79"]);
    let iters = |tag: &str| first.iter().find(|r| r[8] == tag).unwrap()[9].clone();
    assert_eq!(iters("PCG-C"), "2");
    assert_eq!(iters("PCG-I"), "119");
}

#[test]
fn single_unknown() {
    let out = qtsolve(&["solve", "--model", "ma1", "--beta", "0.5,0,0,0", "--n", "1"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(rows(&stdout(&out)).iter().all(|r| r[9] == "1"));
}

#[test]
fn estimate_is_deterministic_across_pool_sizes() {
    let args = [
        "estimate",
        "--model",
        "ar1",
        "--beta",
        "0.3,0.4,0,0.4",
        "--beta",
        "0.1,0,-0.3,-0.4",
        "--n",
        "64,128",
        "--m",
        "4,8",
        "--seed",
        "17",
    ];
    let a = qtsolve_env(&args, &[("QTSOLVE_THREADS", "1")]);
    let b = qtsolve_env(&args, &[("QTSOLVE_THREADS", "3")]);
    assert_eq!(a.status.code(), Some(0));
    let (ra, rb) = (rows(&stdout(&a)), rows(&stdout(&b)));
    assert_eq!(ra.len(), 2 * 2 * 2 * 2);
    assert_eq!(without_time(&ra), without_time(&rb));
    let other = rows(&stdout(&qtsolve(
        &[&args[..11], &["--seed", "18"]].concat(),
    )));
    assert_ne!(without_time(&ra), without_time(&other));
}

#[test]
fn iteration_cap_exits_with_two() {
    let out = qtsolve(&[
        "solve",
        "--preset",
        "table3",
        "--n",
        "256",
        "--max-iter",
        "10",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
    // the capped cell still reports its partial result
    let rows = rows(&stdout(&out));
    let capped = rows.iter().find(|r| r[8] == "PCG-I").unwrap();
    assert_eq!(capped[9], "10");
    assert_ne!(capped[11], "nan");
}

#[test]
fn silent_noise_fails_per_cell() {
    let out = qtsolve(&[
        "estimate",
        "--model",
        "ma1",
        "--beta",
        "0.5,0,0,0",
        "--delta",
        "0",
        "--n",
        "16",
        "--m",
        "4",
    ]);
    assert_eq!(out.status.code(), Some(3));
    let rows = rows(&stdout(&out));
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r[11] == "nan"));
    assert!(String::from_utf8_lossy(&out.stderr).contains("degenerate"));
}

#[test]
fn singular_strang_preconditioner_fails_its_cell() {
    // column (16/3, 8/3, 0, 8/3): the frequency-2 eigenvalue t0 - 2 t1 vanishes
    let out = qtsolve(&["solve", "--model", "ar1", "--beta", "0.5,0,0,0", "--n", "4"]);
    assert_eq!(out.status.code(), Some(3));
    let rows = rows(&stdout(&out));
    let c = rows.iter().find(|r| r[8] == "PCG-C").unwrap();
    assert_eq!(c[11], "nan");
    let i = rows.iter().find(|r| r[8] == "PCG-I").unwrap();
    assert_eq!(i[9], "4");
    assert!(String::from_utf8_lossy(&out.stderr).contains("frequency 2"));
}

#[test]
fn usage_errors_exit_with_one() {
    let unstable = qtsolve(&[
        "solve",
        "--model",
        "ar1",
        "--beta",
        "0.9,0.9,0,0",
        "--n",
        "8",
    ]);
    assert_eq!(unstable.status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("no/such/dir/out.csv");
    let unwritable = qtsolve(&[
        "solve",
        "--preset",
        "table1",
        "--out",
        missing.to_str().unwrap(),
    ]);
    assert_eq!(unwritable.status.code(), Some(1));
    assert_eq!(qtsolve(&["solve"]).status.code(), Some(1));
    assert_eq!(
        qtsolve(&["solve", "--preset", "table9"]).status.code(),
        Some(1)
    );
    let bad_threads = qtsolve_env(
        &["solve", "--preset", "table1"],
        &[("QTSOLVE_THREADS", "0")],
    );
    assert_eq!(bad_threads.status.code(), Some(1));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        "# two parameters, two sizes\nmodel = ma1\nbeta = 0.9,0.9,0.5,1.3\nbeta = -2,-0.6,-0.4,-0.1\nn = 32\nn = 64\nprecond = strang\n",
    )
    .unwrap();
    let path = cfg.to_str().unwrap();
    let from_file = rows(&stdout(&qtsolve(&["solve", "--config", path])));
    assert_eq!(from_file.len(), 4);
    assert!(from_file.iter().all(|r| r[8] == "PCG-C" && r[0] == "ma1"));
    let overridden = rows(&stdout(&qtsolve(&["solve", "--config", path, "--n", "16"])));
    assert_eq!(overridden.len(), 2);
    assert!(overridden.iter().all(|r| r[6] == "16"));

    std::fs::write(&cfg, "colour = blue\n").unwrap();
    assert_eq!(qtsolve(&["solve", "--config", path]).status.code(), Some(1));
}

#[test]
fn json_output_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let run = qtsolve(&[
        "solve",
        "--model",
        "ar1",
        "--beta",
        "0.5,0,0,0",
        "--n",
        "5",
        "--format",
        "json",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(run.status.code(), Some(0));
    assert!(run.stdout.is_empty());
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc["schema_version"], 1);
    assert_eq!(doc["command"], "solve");
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["status"], "converged");
}

fn spectrum_values(path: &Path) -> Vec<f64> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert!(lines
        .next()
        .unwrap()
        .starts_with("# qtsolve spectrum report"));
    assert_eq!(
        lines.next().unwrap(),
        "model,beta0,beta1,beta2,beta3,delta,n,index,eigenvalue"
    );
    lines
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect()
}

#[test]
fn spectrum_of_constant_symbol() {
    // AR1 with beta = 0 and 4δ² = 1 has the symbol f ≡ 1
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("spec.csv");
    let run = qtsolve(&[
        "spectrum",
        "--model",
        "ar1",
        "--beta",
        "0,0,0,0",
        "--delta",
        "0.5",
        "--n",
        "8",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(
        run.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );
    let eig = spectrum_values(&out);
    assert_eq!(eig.len(), 8);
    assert!(eig.iter().all(|&l| (l - 1.0).abs() < 1e-14));
    let summary = std::fs::read_to_string(dir.path().join("spec.summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 3);
}

#[test]
fn spectrum_reports_clustering() {
    let run = qtsolve(&[
        "spectrum",
        "--model",
        "ma1",
        "--beta",
        "0.5,0,0,0",
        "--n",
        "64",
        "--eps",
        "0.1,0.5",
    ]);
    assert_eq!(run.status.code(), Some(0));
    let summary = String::from_utf8(run.stderr).unwrap();
    let lines: Vec<&str> = summary.lines().skip(2).collect();
    assert_eq!(lines.len(), 2);
    let cols: Vec<&str> = lines[0].split(',').collect();
    let min_eig: f64 = cols[7].parse().unwrap();
    assert!(min_eig > 0.0);
    let outside: usize = cols[17].parse().unwrap();
    assert!(outside <= 64);
}
