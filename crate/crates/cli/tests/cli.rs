use std::path::Path;
use std::process::{Command, Output};

fn impedukt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_impedukt"))
        .args(args)
        .output()
        .expect("failed to launch impedukt")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn modes_prints_cutoff_csv() {
    let o = impedukt(&["modes", "--radius", "0.01"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "mode,f_hz,centerline_limiting");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("(1,0),10109."), "{}", lines[1]);
    assert!(lines[3].ends_with("true"));
}

#[test]
fn advise_reports_optimum_spacing() {
    let o = impedukt(&["advise", "--fmax", "10000", "--h", "0.001"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("s_opt_m = 0.008625"), "{}", stdout(&o));
}

#[test]
fn missing_config_is_a_computation_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = impedukt(&[
        "simulate",
        "--config",
        "missing.cfg",
        "--mesh",
        "missing.mesh",
        "--out",
        arg(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(impedukt(&["bogus"]).status.code(), Some(1));
    assert_eq!(
        impedukt(&["advise", "--fmax", "abc", "--h", "0.001"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(impedukt(&[]).status.code(), Some(1));
}

#[test]
fn help_exits_zero() {
    assert_eq!(impedukt(&["--help"]).status.code(), Some(0));
}

#[test]
fn oracle_piston_values() {
    let o = impedukt(&["oracle", "piston", "--ka", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("2,1.0330"), "{}", stdout(&o));
}

#[test]
fn coarse_mesh_is_a_computation_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d.mesh");
    let o = impedukt(&[
        "mesh",
        "duct",
        "--radius",
        "0.01",
        "--length",
        "0.1",
        "--h",
        "0.02",
        "--out",
        arg(&out),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn mesh_simulate_impedance_pipeline_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = dir.path().join("duct.mesh");
    let o = impedukt(&[
        "mesh",
        "duct",
        "--radius",
        "0.01",
        "--length",
        "0.05",
        "--h",
        "0.005",
        "--out",
        arg(&mesh),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );

    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        "# closed lossy duct\nf0 = 4000\nt_total = 0.02\nprobe = 0 0 0.01\nprobe = 0 0 0.02\n",
    )
    .unwrap();
    let mut outputs = Vec::new();
    for name in ["a", "b"] {
        let out = dir.path().join(name);
        let o = impedukt(&[
            "simulate",
            "--config",
            arg(&cfg),
            "--mesh",
            arg(&mesh),
            "--out",
            arg(&out),
            "--mu-z",
            "0.05",
        ]);
        assert_eq!(
            o.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&o.stderr)
        );
        let manifest = std::fs::read_to_string(out.join("manifest.txt")).unwrap();
        assert!(manifest.contains("mu_z = 0.05"));
        outputs.push((
            std::fs::read(out.join("probe0.csv")).unwrap(),
            std::fs::read(out.join("probe1.csv")).unwrap(),
            manifest,
        ));
    }
    assert_eq!(outputs[0], outputs[1]);

    let csv = dir.path().join("z.csv");
    let a = dir.path().join("a");
    let o = impedukt(&[
        "impedance",
        "--probe1",
        arg(&a.join("probe0.csv")),
        "--probe2",
        arg(&a.join("probe1.csv")),
        "--x1",
        "0.04",
        "--x2",
        "0.03",
        "--radius",
        "0.01",
        "--mu-z",
        "0.05",
        "--fmax",
        "3000",
        "--out",
        arg(&csv),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("f_hz,re_R,im_R,resistance,reactance,flag"));
    // The far end is rigid, so |R| stays close to one below the first resonance.
    let row = text.lines().nth(20).unwrap();
    let cols: Vec<f64> = row.split(',').take(3).map(|c| c.parse().unwrap()).collect();
    let mag = (cols[1] * cols[1] + cols[2] * cols[2]).sqrt();
    assert!((mag - 1.0).abs() < 0.05, "row {row}");
}
