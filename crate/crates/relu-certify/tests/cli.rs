use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const TRIANGLE: &str = "0,1\n-0.8660254037844386,-0.5\n0.8660254037844386,-0.5\n";

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relu-certify"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn triangle_below_its_maximal_bias_is_injective() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "t.csv", TRIANGLE);
    let v = json(&run(
        dir.path(),
        &[
            "certify",
            "--frame",
            "t.csv",
            "--bias",
            "const:-0.6",
            "--cap-samples",
            "500",
        ],
    ));
    assert_eq!(v["verdict"], "injective");
    assert!((v["min_margin"].as_f64().unwrap() - 0.1).abs() < 1e-9);
}

#[test]
fn zero_bias_comes_with_a_collision() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "t.csv", TRIANGLE);
    let v = json(&run(
        dir.path(),
        &[
            "certify",
            "--frame",
            "t.csv",
            "--bias",
            "const:0",
            "--cap-samples",
            "500",
        ],
    ));
    assert_eq!(v["verdict"], "not_injective");
    let w = &v["witnesses"][0];
    assert_ne!(w["x1"], w["x2"]);
}

#[test]
fn basis_is_refused_by_the_polytope_method() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "b.csv", "1,0\n0,1\n");
    let out = run(dir.path(), &["estimate-bias", "--frame", "b.csv"]);
    assert_eq!(out.status.code(), Some(3));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(
        msg.contains("not omnidirectional") || msg.contains("degenerate"),
        "{msg}"
    );
}

#[test]
fn tetrahedron_on_the_sphere() {
    let dir = tempfile::tempdir().unwrap();
    let s = 1.0 / 3f64.sqrt();
    write(
        dir.path(),
        "t.csv",
        &format!("{s},{s},{s}\n{s},-{s},-{s}\n-{s},{s},-{s}\n-{s},-{s},{s}\n"),
    );
    let v = json(&run(
        dir.path(),
        &[
            "estimate-bias",
            "--frame",
            "t.csv",
            "--domain",
            "sphere",
            "--cap-samples",
            "500",
            "--csv",
            "b.csv",
        ],
    ));
    for x in v["values"].as_array().unwrap() {
        assert!((x.as_f64().unwrap() + s).abs() < 1e-9);
    }
    let col = std::fs::read_to_string(dir.path().join("b.csv")).unwrap();
    assert_eq!(col.lines().count(), 4);
}

#[test]
fn reconstruct_recovers_the_inputs() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "t.csv", TRIANGLE);
    let xs = [[0.3, -0.2], [-0.5, 0.1], [0.0, 0.9]];
    let h = 0.8660254037844386;
    let rows: Vec<String> = xs
        .iter()
        .map(|x| {
            let c = [x[1], -h * x[0] - 0.5 * x[1], h * x[0] - 0.5 * x[1]];
            c.iter()
                .map(|v| (v + 0.5f64).max(0.0).to_string())
                .collect::<Vec<_>>()
                .join(",")
        })
        .collect();
    write(dir.path(), "z.csv", &(rows.join("\n") + "\n"));
    for extra in [&[][..], &["--iterative"][..]] {
        let mut args = vec![
            "reconstruct",
            "--frame",
            "t.csv",
            "--bias",
            "const:-0.5",
            "--outputs",
            "z.csv",
        ];
        args.extend_from_slice(extra);
        let out = run(dir.path(), &args);
        assert!(out.status.success());
        let text = String::from_utf8(out.stdout).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("x1,x2,residual,status"));
        for (line, x) in lines.zip(&xs) {
            let f: Vec<&str> = line.split(',').collect();
            assert_eq!(f[3], "ok");
            assert!((f[0].parse::<f64>().unwrap() - x[0]).abs() < 1e-7);
            assert!((f[1].parse::<f64>().unwrap() - x[1]).abs() < 1e-7);
        }
    }
}

#[test]
fn empty_outputs_give_empty_result() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "t.csv", TRIANGLE);
    write(dir.path(), "z.csv", "");
    let out = run(
        dir.path(),
        &[
            "reconstruct",
            "--frame",
            "t.csv",
            "--bias",
            "const:-0.5",
            "--outputs",
            "z.csv",
        ],
    );
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
}

#[test]
fn malformed_frame_reports_the_line() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "t.csv", "0,1\n# comment\n1,oops\n");
    let out = run(dir.path(), &["estimate-bias", "--frame", "t.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn usage_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), &["certify"]).status.code(), Some(1));
    assert_eq!(run(dir.path(), &["--help"]).status.code(), Some(0));
}

#[test]
fn same_seed_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "t.csv", TRIANGLE);
    let args = [
        "--seed",
        "5",
        "estimate-bias",
        "--frame",
        "t.csv",
        "--method",
        "sample",
        "--n-samples",
        "5000",
    ];
    let a = run(dir.path(), &args);
    let b = run(dir.path(), &args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = run(
        dir.path(),
        &[
            "--seed",
            "6",
            "estimate-bias",
            "--frame",
            "t.csv",
            "--method",
            "sample",
            "--n-samples",
            "5000",
        ],
    );
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn experiment_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        &[
            "--out",
            "m.csv",
            "experiment",
            "maxbias",
            "--iterations",
            "1000",
        ],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = std::fs::read_to_string(dir.path().join("m.csv")).unwrap();
    assert!(text.starts_with("iteration,distance\n"));
}
