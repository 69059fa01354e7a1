use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_torus-mobius"))
        .args(args)
        .output()
        .unwrap()
}

fn json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(|x| x.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

#[test]
fn overlap_both_agrees() {
    let v = json(&run(&[
        "overlap", "both", "--l1", "0", "--a1", "0", "--l2", "0", "--a2", "0", "--cutoff", "8",
    ]));
    assert_eq!(v["kind"], "overlap");
    let b = v["result"]["brute"][0].as_f64().unwrap();
    let t = v["result"]["theta"][0].as_f64().unwrap();
    assert!((b - t).abs() < 1e-12);
    assert!((b - 3.14224).abs() < 1e-5);
    assert_eq!(v["result"]["brute"][1].as_f64(), Some(0.0));
}

#[test]
fn envelope_keys_in_order() {
    let out = run(&["entangle", "pair", "--j", "1,0", "--jp", "2,0"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let pos: Vec<usize> = ["\"kind\"", "\"params\"", "\"result\"", "\"diagnostics\""]
        .iter()
        .map(|k| text.find(k).unwrap())
        .collect();
    assert!(pos.windows(2).all(|w| w[0] < w[1]));
    assert!(text.contains("\"entropy\":6.9314718055994"));
}

#[test]
fn mobius_trajectory_closes_after_two_turns() {
    let out = run(&[
        "geom",
        "trajectory",
        "--surface",
        "mobius",
        "--periods",
        "2",
    ]);
    assert!(out.status.success());
    let (header, rows) = csv_rows(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(header, ["t", "x", "y", "z", "energy"]);
    let (a, b) = (&rows[0], rows.last().unwrap());
    let gap = ((a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2) + (a[3] - b[3]).powi(2)).sqrt();
    assert!(gap < 1e-6, "{gap}");
    let half = run(&[
        "geom",
        "trajectory",
        "--surface",
        "mobius",
        "--periods",
        "1",
    ]);
    let (_, rows) = csv_rows(&String::from_utf8(half.stdout).unwrap());
    let (a, b) = (&rows[0], rows.last().unwrap());
    assert!((a[1] - b[1]).abs() > 0.5);
}

#[test]
fn mesh_headers() {
    let torus = String::from_utf8(run(&["geom", "mesh", "--n-phi", "8", "--n-second", "4"]).stdout)
        .unwrap();
    let (h, rows) = csv_rows(&torus);
    assert_eq!(h, ["phi", "theta", "x", "y", "z"]);
    assert_eq!(rows.len(), 32);
    let strip = String::from_utf8(
        run(&[
            "geom",
            "mesh",
            "--surface",
            "mobius",
            "--n-phi",
            "8",
            "--n-second",
            "5",
        ])
        .stdout,
    )
    .unwrap();
    assert!(strip.starts_with("phi,offset,x,y,z\n"));
    let both = String::from_utf8(
        run(&[
            "geom",
            "mesh",
            "--surface",
            "intersection",
            "--n-phi",
            "4",
            "--n-second",
            "4",
        ])
        .stdout,
    )
    .unwrap();
    let lines: Vec<&str> = both.lines().collect();
    assert_eq!(lines[0], "surface,phi,param,x,y,z");
    assert_eq!(lines.len(), 33);
    assert!(lines[1].starts_with("torus,") && lines[32].starts_with("mobius,"));
}

#[test]
fn output_is_byte_identical() {
    for args in [
        vec!["measure", "ratio", "--pipeline", "torus-mobius"],
        vec!["state", "mobius-cs", "--l", "0.1", "--phi", "2"],
        vec!["diag", "xi-factor"],
        vec!["geom", "trajectory", "--periods", "0.25"],
    ] {
        let a = run(&args);
        let b = run(&args);
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn output_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("state.csv");
    let out = run(&[
        "state",
        "torus-cs",
        "--format",
        "csv",
        "--cutoff",
        "4",
        "-o",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("j1,j2,re,im\n-4,-4,"));
    assert_eq!(text.lines().count(), 82);
}

#[test]
fn exit_codes_and_error_documents() {
    let cases: [(&[&str], i32, &str); 6] = [
        (&["bogus"], 2, "usage"),
        (&["overlap", "both", "--nope"], 2, "usage"),
        (&["state", "torus-cs", "--cutoff", "3"], 2, "usage"),
        (&["state", "mobius-cs", "--r", "1.0"], 3, "domain"),
        (
            &["entangle", "pair", "--j", "9,0", "--jp", "1,0"],
            3,
            "range",
        ),
        (&["geom", "mesh", "--R", "1", "--r", "2"], 3, "domain"),
    ];
    for (args, code, kind) in cases {
        let out = run(args);
        assert_eq!(out.status.code(), Some(code), "{args:?}");
        let doc: Value = serde_json::from_slice(&out.stderr).unwrap();
        assert_eq!(doc["error"]["kind"], kind, "{args:?}");
        assert_eq!(doc["exit_code"], code);
    }
}

#[test]
fn error_kinds_map_to_exit_codes() {
    use torus_mobius::cli::exit_code;
    use torus_mobius::Error;
    assert_eq!(exit_code(&Error::Singular("cos θ = 0".into())), 4);
    assert_eq!(exit_code(&Error::Domain("r".into())), 3);
    assert_eq!(exit_code(&Error::NoConvergence { terms: 10 }), 3);
    assert_eq!(
        exit_code(&Error::Range {
            j1: 9,
            j2: 0,
            cutoff: 8
        }),
        3
    );
    assert_eq!(exit_code(&Error::Contract("tag".into())), 2);
}

#[test]
fn diagnostics_emit_json() {
    for c in [
        "m-semantics",
        "xi-factor",
        "lagrangian",
        "t-invariance",
        "theta-approx",
        "embedding",
    ] {
        let v = json(&run(&["diag", c]));
        assert_eq!(v["kind"], format!("diag/{c}"));
        assert!(!v["result"].is_null());
    }
    let v = json(&run(&["diag", "theta-approx"]));
    assert!(v["result"]["max_relative_error"].as_f64().unwrap() < 2e-4);
}
