use std::path::Path;
use std::process::{Command, Output};

fn qpsocd(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qpsocd"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn data_rows(csv: &str) -> Vec<&str> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .collect()
}

#[test]
fn bench_writes_one_row_per_run_and_a_summary() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "bench",
        "--problem",
        "sphere",
        "--algo",
        "qpso-cd",
        "--pop",
        "20",
        "--dim",
        "10",
        "--iters",
        "1000",
        "--runs",
        "30",
        "--seed",
        "7",
        "--plot",
    ];
    let o = qpsocd(&args, dir.path());
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );

    let csv = std::fs::read_to_string(dir.path().join("runs.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("#schema=1"));
    let provenance = lines.next().unwrap();
    assert!(provenance.starts_with("# config={"));
    assert!(provenance.contains("\"seed\":7"));
    assert!(lines
        .next()
        .unwrap()
        .starts_with("experiment,algorithm,problem,P,D,G,run,seed,final_value"));
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 30);
    assert!(rows
        .iter()
        .all(|r| r.starts_with("bench,qpso-cd,sphere,20,10,1000,")));

    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["schema"], 1);
    assert_eq!(summary["config"]["runs"], 30);
    assert!(summary["cells"][0]["mean"].as_f64().unwrap() <= 1e-10);
    assert!(dir
        .path()
        .join("plots/convergence_sphere_P20_D10_G1000.svg")
        .exists());
}

#[test]
fn invalid_population_exits_2_with_message() {
    let dir = tempfile::tempdir().unwrap();
    let o = qpsocd(&["bench", "--pop", "1"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("population must be ≥ 2"));
    assert!(!dir.path().join("runs.csv").exists());
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        qpsocd(&["engineer", "--problem", "bridge"], dir.path())
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        qpsocd(&["engineer", "--problem", "sphere"], dir.path())
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        qpsocd(&["bench", "--bogus"], dir.path()).status.code(),
        Some(2)
    );
    assert_eq!(
        qpsocd(&["bench", "--pr", "1.5"], dir.path()).status.code(),
        Some(2)
    );
    assert_eq!(
        qpsocd(&["timecomplexity", "--dims", "9..3"], dir.path())
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn unwritable_output_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let o = qpsocd(
        &["bench", "--runs", "1", "--iters", "5"],
        &blocker.join("sub"),
    );
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn engineer_reports_table_row() {
    let dir = tempfile::tempdir().unwrap();
    let o = qpsocd(
        &[
            "engineer",
            "--problem",
            "truss",
            "--runs",
            "30",
            "--seed",
            "7",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for label in ["x1", "x2", "g1(x)", "g2(x)", "g3(x)", "f(x)"] {
        assert!(
            text.lines().any(|l| l.starts_with(label)),
            "missing {label}:\n{text}"
        );
    }
    let f: f64 = text
        .lines()
        .find(|l| l.starts_with("f(x)"))
        .and_then(|l| l.split_whitespace().nth(1))
        .unwrap()
        .parse()
        .unwrap();
    assert!((f - 263.895).abs() / 263.895 < 0.01, "{f}");
}

#[test]
fn engineer_single_run_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "engineer",
        "--problem",
        "spring",
        "--runs",
        "1",
        "--seed",
        "3",
        "--iters",
        "200",
    ];
    let a = qpsocd(&args, &dir.path().join("a"));
    let b = qpsocd(&args, &dir.path().join("b"));
    assert_eq!(a.status.code(), Some(0));
    let strip = |s: String| {
        s.lines()
            .filter(|l| !l.starts_with("wrote"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(strip(stdout(&a)), strip(stdout(&b)));
    let csv = std::fs::read_to_string(dir.path().join("a/runs.csv")).unwrap();
    assert_eq!(data_rows(&csv).len(), 1);
}

#[test]
fn timecomplexity_two_runs_se() {
    let dir = tempfile::tempdir().unwrap();
    let o = qpsocd(
        &[
            "timecomplexity",
            "--runs",
            "2",
            "--dims",
            "2..4",
            "--algo",
            "qpso-cd",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("Dimension") && text.contains("Mean/N"));
    let rows: Vec<Vec<f64>> = text
        .lines()
        .filter_map(|l| {
            let v: Vec<f64> = l
                .split_whitespace()
                .filter_map(|t| t.parse().ok())
                .collect();
            (v.len() == 6).then_some(v)
        })
        .collect();
    assert_eq!(rows.len(), 3);
    for r in rows {
        let (sd, se) = (r[3], r[4]);
        assert!((se - sd / 2f64.sqrt()).abs() <= 1e-3, "{r:?}");
    }
    assert!(text.contains("Pearson(Mean, N) = 0.") || text.contains("Pearson(Mean, N) = 1."));
}

#[test]
fn timecomplexity_single_dimension_has_undefined_correlation() {
    let dir = tempfile::tempdir().unwrap();
    let o = qpsocd(
        &["timecomplexity", "--dims", "3..3", "--runs", "4"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.matches("Pearson(Mean, N) = undefined").count(), 2);
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap())
            .unwrap();
    assert!(summary["algorithms"][0]["pearson"].is_null());
    assert_eq!(
        summary["algorithms"][0]["rows"].as_array().unwrap().len(),
        1
    );
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        "problem = \"rastrigin\"\ndim = 3\niters = 20\nruns = 4\nseed = 5\n",
    )
    .unwrap();
    let o = qpsocd(
        &["bench", "--config", cfg.to_str().unwrap(), "--runs", "2"],
        &dir.path().join("o"),
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let csv = std::fs::read_to_string(dir.path().join("o/runs.csv")).unwrap();
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 2);
    assert!(rows[0].starts_with("bench,qpso-cd,rastrigin,20,3,20,0,5,"));
}
