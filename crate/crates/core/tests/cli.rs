use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chebmodes"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap_or_else(|_| panic!("not a number: {s}"))
}

#[test]
fn modes_example1_first_row() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().to_str().unwrap();
    let env = data("example1.env");
    run_ok(&["modes", env.to_str().unwrap(), "--nw", "20", "--nb", "20", "--out", out]);
    let rows = csv_rows(&dir.path().join("modes.csv"));
    assert_eq!(rows[0], ["m", "re_kr", "im_kr", "phase_speed_mps"]);
    assert_eq!(rows.len(), 7);
    assert_eq!(rows[1][0], "1");
    assert!((num(&rows[1][1]) - 0.2070699109).abs() <= 1e-10);
    // Twelve significant digits, lowercase exponent.
    assert!(rows[1][1].contains('e') && !rows[1][1].contains('E'));
    assert_eq!(rows[1][1].split('e').next().unwrap().len(), 13);

    let shapes = csv_rows(&dir.path().join("mode_shapes.csv"));
    assert_eq!(shapes[0][0], "z_m");
    assert_eq!(shapes[0].len(), 13);
    assert_eq!(shapes.len(), 1 + 41);
    assert_eq!(num(&shapes[1][0]), 0.0);
    assert_eq!(num(&shapes[41][0]), 100.0);
}

#[test]
fn modes_example4_attenuation_at_20hz() {
    let dir = TempDir::new().unwrap();
    let env = data("example4.env");
    run_ok(&["modes", env.to_str().unwrap(), "--freq", "20", "--out", dir.path().to_str().unwrap()]);
    let rows = csv_rows(&dir.path().join("modes.csv"));
    assert!((num(&rows[1][2]) - 3.7597262940e-4).abs() <= 1e-9);
    assert!((num(&rows[1][1]) - 0.0735028581).abs() <= 1e-9);
}

#[test]
fn empty_phase_speed_window_fails() {
    let dir = TempDir::new().unwrap();
    let env = data("example1.env");
    let out = run(&["modes", env.to_str().unwrap(), "--cpmax", "1000", "--out", dir.path().to_str().unwrap()]);
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("no propagating modes"), "{err}");
    assert_eq!(err.trim_end().lines().count(), 1);
    assert!(!dir.path().join("modes.csv").exists());
}

#[test]
fn phase_speed_cutoff_limits_modes() {
    let dir = TempDir::new().unwrap();
    let env = data("example1.env");
    run_ok(&["modes", env.to_str().unwrap(), "--cpmax", "1600", "--out", dir.path().to_str().unwrap()]);
    let rows = csv_rows(&dir.path().join("modes.csv"));
    assert_eq!(rows.len(), 3);
    assert!(rows[1..].iter().all(|r| num(&r[3]) <= 1600.0));
}

#[test]
fn field_matches_golden_grid() {
    let dir = TempDir::new().unwrap();
    let env = data("example4.env");
    run_ok(&["field", env.to_str().unwrap(), "--image", "--out", dir.path().to_str().unwrap()]);
    let got = csv_rows(&dir.path().join("tl.csv"));
    let golden = csv_rows(&Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/example4_50hz_tl.csv"));
    assert_eq!(got.len(), golden.len());
    assert_eq!(got[0], golden[0]);
    for (g, e) in got.iter().zip(&golden).skip(1) {
        assert_eq!(g.len(), e.len());
        assert_eq!(g[0], e[0]);
        for (a, b) in g.iter().zip(e).skip(1) {
            if b == "inf" {
                assert_eq!(a, "inf");
            } else {
                assert!((num(a) - num(b)).abs() < 1e-6, "{a} vs {b}");
            }
        }
    }
    // Surface row is silent.
    assert!(got[1][1..].iter().all(|v| v == "inf"));

    let pgm = fs::read(dir.path().join("tl.pgm")).unwrap();
    let header = b"P5\n30 21\n255\n";
    assert_eq!(&pgm[..header.len()], header);
    assert_eq!(pgm.len(), header.len() + 30 * 21);
    assert!(pgm[header.len()..header.len() + 30].iter().all(|&b| b == 255));
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let env = data("example4.env");
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    for dir in [&a, &b] {
        let out = dir.path().to_str().unwrap();
        run_ok(&["modes", env.to_str().unwrap(), "--out", out]);
        run_ok(&["field", env.to_str().unwrap(), "--image", "--db-window", "30:90", "--out", out]);
    }
    for name in ["modes.csv", "mode_shapes.csv", "tl.csv", "tl.pgm"] {
        assert_eq!(
            fs::read(a.path().join(name)).unwrap(),
            fs::read(b.path().join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn near_source_level() {
    // A receiver 1 m from the source at the source depth. Only six modes
    // propagate, so the point-source singularity is not resolved; the level
    // is still within a modest offset of the 1 m reference.
    let dir = TempDir::new().unwrap();
    let text = fs::read_to_string(data("example1.env"))
        .unwrap()
        .replace("ranges_m = 100:100:3000", "ranges_m = 1:1:3")
        .replace("depths_m = 0:2:100", "depths_m = 36:1:36");
    let env = dir.path().join("near.env");
    fs::write(&env, text).unwrap();
    run_ok(&["field", env.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    let rows = csv_rows(&dir.path().join("tl.csv"));
    let tl1 = num(&rows[1][1]);
    assert!(tl1.is_finite() && tl1.abs() < 15.0, "{tl1}");
    assert!(num(&rows[1][2]) > tl1 && num(&rows[1][3]) > num(&rows[1][2]));
}

#[test]
fn converge_example1() {
    let dir = TempDir::new().unwrap();
    let env = data("example1.env");
    run_ok(&["converge", env.to_str().unwrap(), "--sweep", "10:10:50", "--out", dir.path().to_str().unwrap()]);
    let rows = csv_rows(&dir.path().join("converge.csv"));
    assert_eq!(rows[0], ["N", "max_abs_err_spectral", "max_abs_err_fdm"]);
    assert_eq!(rows.len(), 6);
    let spectral: Vec<f64> = rows[1..].iter().map(|r| num(&r[1])).collect();
    assert!(spectral[4] <= 1e-3 * spectral[0]);
    assert!(spectral[4] < 1e-12);
    let fdm: Vec<f64> = rows[1..].iter().map(|r| num(&r[2])).collect();
    assert!(fdm.windows(2).all(|w| w[1] < w[0]));
    assert!(fdm[3] > 1e-5);
}

#[test]
fn converge_fdm_is_second_order() {
    let dir = TempDir::new().unwrap();
    let env = data("example1.env");
    run_ok(&["converge", env.to_str().unwrap(), "--sweep", "100:100:200", "--out", dir.path().to_str().unwrap()]);
    let rows = csv_rows(&dir.path().join("converge.csv"));
    let ratio = num(&rows[1][2]) / num(&rows[2][2]);
    assert!((3.0..=5.0).contains(&ratio), "{ratio}");
}

#[test]
fn converge_needs_oracle_or_self() {
    let dir = TempDir::new().unwrap();
    let env = data("example4.env");
    let out = run(&["converge", env.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("--self"));

    run_ok(&["converge", env.to_str().unwrap(), "--self", "--sweep", "20:10:40", "--out", dir.path().to_str().unwrap()]);
    let rows = csv_rows(&dir.path().join("converge.csv"));
    let errs: Vec<f64> = rows[1..].iter().map(|r| num(&r[1])).collect();
    assert!(errs.windows(2).all(|w| w[1] <= w[0]), "{errs:?}");
    assert!(rows[1..].iter().all(|r| r[2] == "nan"));
}

#[test]
fn converge_self_on_deep_water() {
    let dir = TempDir::new().unwrap();
    let env = data("example5.env");
    run_ok(&["converge", env.to_str().unwrap(), "--self", "--sweep", "200:200:600", "--out", dir.path().to_str().unwrap()]);
    let rows = csv_rows(&dir.path().join("converge.csv"));
    let errs: Vec<f64> = rows[1..].iter().map(|r| num(&r[1])).collect();
    assert_eq!(errs.len(), 3);
    assert!(errs.windows(2).all(|w| w[1] <= w[0]), "{errs:?}");
}

#[test]
fn field_needs_receiver_lattice() {
    let dir = TempDir::new().unwrap();
    let env = data("example2.env");
    let out = run(&["field", env.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("ranges_m"));
}

#[test]
fn bad_inputs_give_one_line_diagnostics() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("nope.env");
    let out = run(&["modes", missing.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr).unwrap().contains("cannot read"));

    let bad = dir.path().join("bad.env");
    let text = fs::read_to_string(data("example4.env"))
        .unwrap()
        .replace("interface_depth_m = 50", "interface_depth_m = 100");
    fs::write(&bad, text).unwrap();
    let out = run(&["modes", bad.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.trim_end().lines().count(), 1);
    assert!(err.contains("line 4") && err.contains("strictly less"), "{err}");

    let out = run(&["modes", bad.to_str().unwrap(), "--nw", "2"]);
    assert!(!out.status.success());
}

#[test]
fn order_overrides_are_validated() {
    let dir = TempDir::new().unwrap();
    let env = data("example1.env");
    let out = run(&["modes", env.to_str().unwrap(), "--nw", "3", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr).unwrap().contains("n_water"));
}

#[test]
fn rigid_and_stratified_examples_solve() {
    let dir = TempDir::new().unwrap();
    for (name, first) in [("example2.env", 0.0822900069), ("example6.env", f64::NAN)] {
        let env = data(name);
        run_ok(&["modes", env.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
        let rows = csv_rows(&dir.path().join("modes.csv"));
        assert!(rows.len() > 2);
        if first.is_finite() {
            assert!((num(&rows[1][1]) - first).abs() < 1e-9);
        }
        for r in &rows[1..] {
            assert!(num(&r[1]) > 0.0 && num(&r[2]) >= 0.0);
        }
    }
}
