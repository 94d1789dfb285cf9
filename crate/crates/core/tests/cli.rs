use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn finsler(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_finsler"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("FINSLER_LOG")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn verify_examples_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["verify", "--model", "riemannian"][..],
        &["verify", "--model", "example1", "--xi", "1", "--seed", "42"],
        &["verify", "--model", "randers", "--c0", "0.3"],
    ] {
        let o = finsler(args, dir.path());
        assert_eq!(
            o.status.code(),
            Some(0),
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        assert!(stdout(&o).contains(": pass"));
    }
    let report: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("verify.json")).unwrap()).unwrap();
    assert_eq!(report["config"]["seed"], 42);
    assert_eq!(report["pass"], true);
}

#[test]
fn classify_examples() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        (
            &[
                "classify", "--model", "example2", "--mu", "1", "--xi", "1", "--eps", "1",
            ][..],
            "holds",
            "holds",
        ),
        (
            &["classify", "--model", "randers", "--c0", "1"],
            "fails",
            "fails",
        ),
        (
            &["classify", "--model", "randers", "--c0", "0"],
            "holds",
            "holds",
        ),
    ];
    for (args, berwald, weak) in cases {
        let o = finsler(args, dir.path());
        assert_eq!(o.status.code(), Some(0));
        let line = stdout(&o);
        assert_eq!(
            line.trim(),
            format!("berwald: {berwald}, landsberg: {weak}, weak_landsberg: {weak}")
        );
    }
    let csv = fs::read_to_string(dir.path().join("residuals.csv")).unwrap();
    assert!(csv.starts_with("b2,s,e22,h222,combined,e_defect,h_defect,"));
    assert_eq!(csv.lines().count(), 1 + 40 * 40);
}

#[test]
fn construct_tabulates_and_checks() {
    let dir = tempfile::tempdir().unwrap();
    let o = finsler(
        &[
            "construct",
            "--varphi",
            "1/(1+t)",
            "--theta",
            "1/(1+b2)",
            "--fit",
            "example2",
            "--grid",
            "10x8",
        ],
        dir.path(),
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(stdout(&o).contains("max |E - sE2|"));
    let csv = fs::read_to_string(dir.path().join("construct.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 80);
    let report: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("construct.json")).unwrap()).unwrap();
    assert!(report["reference_max_relative_error"].as_f64().unwrap() < 1e-8);

    let o = finsler(
        &[
            "construct",
            "--varphi",
            "1+t",
            "--theta",
            "1",
            "--c0",
            "0",
            "--grid",
            "10",
        ],
        dir.path(),
    );
    assert!(matches!(o.status.code(), Some(0) | Some(3)));
    let report: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("construct.json")).unwrap()).unwrap();
    assert_eq!(report["classification"]["verdicts"]["is_berwald"], "holds");
}

#[test]
fn curvature_dump_writes_json_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let o = finsler(
        &[
            "curvature-dump",
            "--model",
            "randers",
            "--samples",
            "2",
            "--dim",
            "2",
            "--seed",
            "1",
        ],
        dir.path(),
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let csv = fs::read_to_string(dir.path().join("curvature.csv")).unwrap();
    assert!(csv.starts_with("point,x0,x1,y0,y1,quantity,route,index,value\n"));
    assert!(csv.contains(",berwald,oracle,0:1:1:0,"));
    let json: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("curvature.json")).unwrap()).unwrap();
    assert_eq!(json["points"].as_array().unwrap().len(), 2);
}

#[test]
fn config_file_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "model = \"randers\"\nc0 = 0.0\ngrid = \"6x5\"\n").unwrap();
    let o = finsler(&["classify", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("berwald: holds"));
    let o = finsler(
        &["classify", "--config", cfg.to_str().unwrap(), "--c0", "1"],
        dir.path(),
    );
    assert!(stdout(&o).contains("berwald: fails"));

    fs::write(&cfg, "modle = \"randers\"\n").unwrap();
    assert_eq!(
        finsler(&["classify", "--config", cfg.to_str().unwrap()], dir.path())
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        finsler(&["verify", "--model", "example2", "--xi", "0"], dir.path())
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        finsler(&["verify", "--grid", "abc"], dir.path())
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        finsler(&["verify", "--d", "1,2"], dir.path()).status.code(),
        Some(2)
    );
}

#[test]
fn indeterminate_and_failing_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    // φ = s is singular at s = 0, which every cell of a symmetric cone straddles
    let o = finsler(
        &["classify", "--model", "custom", "--phi", "s", "--grid", "5"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(3));
    let o = finsler(
        &[
            "verify",
            "--model",
            "example1",
            "--samples",
            "5",
            "--tol",
            "1e-300",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("FAIL point"));
}
