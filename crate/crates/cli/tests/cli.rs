use std::path::Path;
use std::process::{Command, Output};

fn cavisteady(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cavisteady")).args(args).output().expect("binary runs")
}

fn data_rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn j_scan_row_count_and_order() {
    let out = cavisteady(&[
        "scan", "--n", "4", "--nmax", "2", "--u", "6", "--omega", "0.5", "--scan", "j:0:1:11", "--methods",
        "exact,pert2",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("# rates in units of gamma0"));
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 22);
    for (k, r) in rows.iter().enumerate() {
        assert_eq!(r[0], "j");
        assert_eq!(r[2], if k % 2 == 0 { "exact" } else { "pert2" });
        let j: f64 = r[1].parse().unwrap();
        assert!((j - (k / 2) as f64 * 0.1).abs() < 1e-12);
    }
}

#[test]
fn rerun_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = |p: &Path| {
        vec![
            "scan".to_string(),
            "--n=4".into(),
            "--u=6".into(),
            "--omega=0.5".into(),
            "--j=0.3".into(),
            "--scan=laser_offset:-2:2:9".into(),
            "--methods=exact,pert0,pert1,pert2".into(),
            format!("--out={}", p.display()),
        ]
    };
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let argv = args(p);
        let out = cavisteady(&argv.iter().map(String::as_str).collect::<Vec<_>>());
        assert!(out.status.success());
    }
    let (ta, tb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ta, tb);
    let rows = data_rows(&String::from_utf8(ta).unwrap());
    assert_eq!(rows.len(), 36);
    // laser_offset is stored as delta = -offset.
    assert_eq!(rows[0][0], "delta");
    assert_eq!(rows[0][1].parse::<f64>().unwrap(), 2.0);
}

#[test]
fn exact_matches_pert0_without_tunneling() {
    let out = cavisteady(&[
        "scan", "--n", "4", "--u", "6", "--j", "0", "--scan", "omega:0.1:0.9:5", "--methods", "exact,pert0",
    ]);
    assert!(out.status.success());
    let rows = data_rows(&String::from_utf8(out.stdout).unwrap());
    for pair in rows.chunks(2) {
        for col in [3, 4] {
            let e: f64 = pair[0][col].parse().unwrap();
            let p: f64 = pair[1][col].parse().unwrap();
            assert!((e - p).abs() < 1e-10, "{e} vs {p}");
        }
    }
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{"n": 2, "nmax": 6, "u": 1.0, "omega": 0.3, "j": 0.2, "methods": ["exact", "oracle"], "format": "json"}"#,
    )
    .unwrap();
    let out = cavisteady(&["solve", "--config", cfg.to_str().unwrap(), "--j", "0.0"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 2);
    let n0 = rows[0]["n_a"].as_f64().unwrap();
    let n1 = rows[1]["n_a"].as_f64().unwrap();
    assert!((n0 - n1).abs() < 1e-4 * n0, "{n0} vs {n1}");

    // Same point with j overridden to 0 equals a lone cavity.
    let single = cavisteady(&["solve", "--n", "1", "--nmax", "6", "--u", "1", "--omega", "0.3", "--format", "json"]);
    let single: serde_json::Value = serde_json::from_slice(&single.stdout).unwrap();
    assert!((single[0]["n_a"].as_f64().unwrap() - n0).abs() < 1e-12);
}

#[test]
fn invalid_configuration_exits_2() {
    for args in [
        &["solve", "--gamma0", "-1"][..],
        &["solve", "--nmax", "0"],
        &["solve", "--methods", "pert7"],
        &["scan", "--n", "2"],
        &["scan", "--scan", "j:1:0:3"],
        &["scan", "--scan", "j:0:1:0"],
        &["solve", "--n", "4", "--nmax", "4", "--methods", "oracle"],
        &["solve", "--format", "xml"],
        &["solve", "--config", "/nonexistent/cfg.json"],
    ] {
        let out = cavisteady(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn solver_failure_exits_3_but_scan_continues() {
    let out = cavisteady(&["solve", "--n", "2", "--nmax", "3", "--omega", "0.1", "--gamma0", "1e-300"]);
    assert_eq!(out.status.code(), Some(3));

    // Perturbative methods reject N < 4 per point; the scan still succeeds.
    let out = cavisteady(&["scan", "--n", "2", "--scan", "j:0:0.2:3", "--methods", "exact,pert1", "--omega", "0.2"]);
    assert!(out.status.success());
    let rows = data_rows(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(rows.len(), 6);
    for r in &rows {
        if r[2] == "pert1" {
            assert!(!r[8].is_empty());
        } else {
            assert!(r[8].is_empty());
        }
    }
}

#[test]
fn system_dump_lines() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("m.txt");
    let out = cavisteady(&[
        "solve", "--n", "2", "--nmax", "2", "--u", "1", "--omega", "0.3", "--j", "0.2", "--nthermal", "0.5",
        "--dump-system", dump.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&dump).unwrap();
    let tags = [
        "decay", "kerr-diagonal", "detuning", "pump-diagonal", "pump-lower", "kerr-raise", "drive", "hop",
    ];
    for line in text.lines() {
        let f: Vec<&str> = line.split_whitespace().collect();
        assert_eq!(f.len(), 5, "{line}");
        f[0].parse::<usize>().unwrap();
        assert!(f[1] == "I" || f[1].parse::<usize>().is_ok());
        f[2].parse::<f64>().unwrap();
        f[3].parse::<f64>().unwrap();
        assert!(tags.contains(&f[4]), "{line}");
    }
    assert!(text.lines().any(|l| l.ends_with("pump-lower")));
    assert!(text.lines().any(|l| l.contains(" I ")));
}
