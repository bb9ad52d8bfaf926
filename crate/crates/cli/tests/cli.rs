//! End-to-end checks of the `sdde` binary: exit-status contract, output
//! files, config error reporting.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn sdde() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sdde"))
}

fn write_config(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

const CONTRACTIVE: &str = "\
problem.name = scalar_linear
problem.A1 = -4
problem.A2 = 1
problem.B1 = 0.5
problem.B2 = 0.5
delay.kind = constant
delay.tau = 1
grid.a = 0
grid.b = 2
grid.N = 20
mc.paths = 200
mc.seed = 7
pair.xi = constant(1.0)
pair.eta = constant(0.5)
";

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

#[test]
fn certify_reports_derived_constants() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.txt", CONTRACTIVE);
    let out = run(sdde()
        .arg("certify")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("out")));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("c = -5.0000000000000000e0"), "{stdout}");
    assert!(stdout.contains("classification = asymptotically_contractive"));
    let cert = fs::read_to_string(dir.path().join("out/certificate.txt")).unwrap();
    assert!(cert.contains("nu = 2.3076923076923078e-1"));
}

#[test]
fn certify_classifies_zero_and_growing_problems() {
    let dir = tempfile::tempdir().unwrap();
    // all-zero coefficients: c = 0, the contractive branch
    let zero = "\
problem.name = scalar_linear
grid.a = 0
grid.b = 1
grid.N = 10
mc.paths = 10
mc.seed = 1
";
    let cfg = write_config(dir.path(), "zero.txt", zero);
    let out = run(sdde()
        .arg("certify")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("z")));
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("c = 0.0000000000000000e0"), "{stdout}");
    assert!(stdout.contains("classification = contractive"), "{stdout}");
    assert!(stdout.contains("h_max = inf"), "{stdout}");

    // A1 = 1, rest zero: c = 2 > 0, stable with h_max = c0/c = 0.25
    let growing = format!("{zero}problem.A1 = 1\n");
    let cfg = write_config(dir.path(), "grow.txt", &growing);
    let out = run(sdde()
        .arg("certify")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("g")));
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("c = 2.0000000000000000e0"), "{stdout}");
    assert!(
        stdout.contains("classification = stable_in_mean_square"),
        "{stdout}"
    );
    assert!(stdout.contains("h_max = 2.5000000000000000e-1"), "{stdout}");
}

#[test]
fn pantograph_delay_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let body = "\
problem.name = scalar_linear
problem.A1 = -4
problem.A2 = 1
problem.B1 = 0.5
problem.B2 = 0.5
delay.kind = pantograph
delay.q = 0.5
grid.a = 0
grid.b = 5
grid.N = 50
mc.paths = 200
mc.seed = 11
pair.xi = constant(1.0)
pair.eta = constant(0.5)
";
    let cfg = write_config(dir.path(), "p.txt", body);
    let out = run(sdde()
        .arg("deviation")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("out")));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = fs::read_to_string(dir.path().join("out/summary.txt")).unwrap();
    assert!(summary.contains("violations = 0"), "{summary}");
    assert!(summary.contains("block_violations = 0"), "{summary}");
}

#[test]
fn deviation_exit_zero_without_violations_and_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.txt", CONTRACTIVE);
    let out = run(sdde()
        .arg("deviation")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("out")));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("out/deviation.csv")).unwrap();
    assert!(csv.starts_with("n,t,estimate,stderr,envelope,violated\n"));
    assert_eq!(csv.lines().count(), 22); // header + 21 nodes
    let summary = fs::read_to_string(dir.path().join("out/summary.txt")).unwrap();
    assert!(summary.contains("violations = 0"), "{summary}");
}

#[test]
fn equal_pair_gives_zero_deviation_column() {
    let dir = tempfile::tempdir().unwrap();
    let body = CONTRACTIVE.replace("pair.eta = constant(0.5)", "pair.eta = constant(1.0)");
    let cfg = write_config(dir.path(), "c.txt", &body);
    let out = run(sdde()
        .arg("deviation")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("out")));
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.path().join("out/deviation.csv")).unwrap();
    for line in csv.lines().skip(1) {
        let estimate = line.split(',').nth(2).unwrap();
        assert_eq!(estimate, "0.0000000000000000e0", "line: {line}");
    }
}

#[test]
fn unsolvable_stepsize_exits_nonzero_citing_the_condition() {
    let dir = tempfile::tempdir().unwrap();
    // (alpha + beta)*h = (9 + 2)*0.2 = 2.2 >= 1
    let body = CONTRACTIVE
        .replace("problem.A1 = -4", "problem.A1 = 9")
        .replace("problem.A2 = 1", "problem.A2 = 2")
        .replace("grid.N = 20", "grid.N = 10");
    let cfg = write_config(dir.path(), "c.txt", &body);
    let out = run(sdde()
        .arg("deviation")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("out")));
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("(alpha + sum(beta))*h"),
        "stderr should cite the solvability condition: {stderr}"
    );
}

#[test]
fn config_errors_exit_two_with_line_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "bad.txt",
        "problem.name = scalar_linear\ngrid.N = -5\n",
    );
    let out = run(sdde().arg("certify").arg(&cfg));
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("grid.N must be a positive integer"), "{stderr}");
    assert!(stderr.contains("missing required keys"), "{stderr}");
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.txt", CONTRACTIVE);
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    let out_c = dir.path().join("c");
    assert!(run(sdde().arg("deviation").arg(&cfg).arg("--out").arg(&out_a)).status.success());
    assert!(run(sdde()
        .arg("deviation")
        .arg(&cfg)
        .arg("--seed")
        .arg("99")
        .arg("--out")
        .arg(&out_b))
    .status
    .success());
    assert!(run(sdde()
        .arg("deviation")
        .arg(&cfg)
        .arg("--seed")
        .arg("7")
        .arg("--out")
        .arg(&out_c))
    .status
    .success());
    let a = fs::read(out_a.join("deviation.csv")).unwrap();
    let b = fs::read(out_b.join("deviation.csv")).unwrap();
    let c = fs::read(out_c.join("deviation.csv")).unwrap();
    assert_ne!(a, b, "different seed must change the ensemble");
    assert_eq!(a, c, "matching seed must reproduce the ensemble");
}

#[test]
fn simulate_writes_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.txt", CONTRACTIVE);
    let out = run(sdde()
        .arg("simulate")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("out")));
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.path().join("out/trajectory.csv")).unwrap();
    assert!(csv.starts_with("n,t,x0_re,x0_im\n"));
    assert_eq!(csv.lines().count(), 22);
    // X_0 = xi(a) = 1
    assert!(csv.lines().nth(1).unwrap().contains("1.0000000000000000e0"));
}

#[test]
fn order_requires_the_delay_free_family() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.txt", CONTRACTIVE);
    let out = run(sdde().arg("order").arg(&cfg));
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("pure_sde"));
}

#[test]
fn order_measures_a_slope() {
    let dir = tempfile::tempdir().unwrap();
    let body = "\
problem.name = pure_sde
problem.A1 = -1
problem.B1 = 0
grid.a = 0
grid.b = 1
grid.N = 16
mc.paths = 1
mc.seed = 3
order.exp_min = 3
order.exp_max = 6
";
    let cfg = write_config(dir.path(), "c.txt", body);
    let out = run(sdde()
        .arg("order")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("out")));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("out/order.csv")).unwrap();
    assert!(csv.starts_with("h,rms_error\n"));
    assert_eq!(csv.lines().count(), 5); // header + 4 stepsizes
}
