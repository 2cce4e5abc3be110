use std::process::{Command, Output};

use orbitex::integrate::Trajectory;

fn orbitex(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_orbitex")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn phases_lists_every_phase() {
    let o = orbitex(&["phases"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for name in ["a1", "a2", "b", "omega1", "omega4", "omega6", "omega8"] {
        assert!(text.lines().any(|l| l == name), "{name} missing");
    }
    assert!(text.contains("not known to be complete"));
}

#[test]
fn bphase_rotation_keeps_m3_and_energy() {
    let o = orbitex(&["simulate", "--phase", "b", "--w0", "1,0,1", "--z-span", "0,2", "--dz", "1e-3", "--points", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let m3 = header.iter().position(|c| *c == "m3").unwrap();
    let h = header.iter().position(|c| *c == "h").unwrap();
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 5);
    for r in &rows {
        assert_eq!(r[m3], rows[0][m3]);
        assert!((r[h] - rows[0][h]).abs() < 1e-10);
    }
}

#[test]
fn seeded_runs_are_reproducible() {
    let args = ["simulate", "--phase", "a2", "--seed", "7", "--z-span", "0,1", "--dz", "1e-2", "--format", "json"];
    let (a, b) = (orbitex(&args), orbitex(&args));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let other = orbitex(&["simulate", "--phase", "a2", "--seed", "8", "--z-span", "0,1", "--dz", "1e-2", "--format", "json"]);
    assert_ne!(a.stdout, other.stdout);
}

#[test]
fn json_output_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.json");
    let o = orbitex(&[
        "simulate", "--phase", "omega6", "--seed", "3", "--z-span", "0,0.5", "--dz", "1e-2", "--format", "json", "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("drift h"));
    let text = std::fs::read_to_string(&path).unwrap();
    let t = Trajectory::from_json(&text).unwrap();
    assert_eq!(t.samples.len(), 51);
    assert_eq!(t.to_json().trim_end(), text.trim_end());
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# b-phase\nphase = b\nw0 = 0,0,1\nz-span = 0,1\ndz = 1e-2\npoints = 2\n").unwrap();
    let o = orbitex(&["simulate", "--config", cfg.to_str().unwrap(), "--points", "5"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).lines().count(), 1 + 6);

    std::fs::write(&cfg, "phase = b\ncolour = red\n").unwrap();
    assert_eq!(orbitex(&["simulate", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn invalid_input_exits_two() {
    for args in [
        &["simulate"][..],
        &["simulate", "--phase", "c", "--seed", "1"],
        &["simulate", "--phase", "b", "--gamma", "1,-1,1", "--seed", "1"],
        &["simulate", "--phase", "b"],
        &["simulate", "--phase", "b", "--seed", "1", "--dz", "0"],
        &["verify"],
        &["nonsense"],
    ] {
        assert_eq!(orbitex(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn drift_above_tolerance_exits_three() {
    let o = orbitex(&["simulate", "--phase", "a2", "--seed", "2", "--z-span", "0,5", "--dz", "0.5", "--tol", "1e-15"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("exceeds tolerance"));
}

#[test]
fn verify_reports_flags_and_failures() {
    let o = orbitex(&["verify", "--phase", "omega4", "--points", "10", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let reports: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let inv = reports.as_array().unwrap().iter().find(|r| r["check"] == "involution").unwrap();
    assert_eq!(inv["flags"][0], "not-known-complete");
    assert_eq!(inv["pass"], true);

    // A tolerance no floating point residual can meet.
    let o = orbitex(&["verify", "--phase", "a2", "--points", "5", "--tol", "1e-300"]);
    assert_eq!(o.status.code(), Some(4));
}
