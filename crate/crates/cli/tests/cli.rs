use std::path::Path;
use std::process::{Command, Output};

const STABLE: &str = "\
# certified stable at every k of the grid
kappa = 2
gamma = 4
Delta_a = 0
P = 2
Omega_z = 3
k_min = -0.5
k_max = 0.5
k_count = 5
omega_min = -2
omega_max = 2
omega_count = 9
";

const UNSTABLE: &str = "kappa = 1\ngamma = 0.5\nOmega_z = 3\nk_count = 6\nomega_count = 10\n";

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_soc-cavity")).current_dir(dir).args(args).output().unwrap()
}

fn setup() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("stable.cfg"), STABLE).unwrap();
    std::fs::write(dir.path().join("unstable.cfg"), UNSTABLE).unwrap();
    dir
}

#[test]
fn psd_on_stable_config_writes_csv() {
    let dir = setup();
    let out = run(dir.path(), &["psd", "--config", "stable.cfg", "--out", "psd.csv"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("psd.csv")).unwrap();
    assert!(text.starts_with("k_index,k,omega_index,omega,S_up,S_dn,S_out,flag\n"));
    assert_eq!(text.lines().count(), 1 + 5 * 9);
}

#[test]
fn unstable_steady_state_exits_two() {
    let dir = setup();
    let out = run(dir.path(), &["chern", "--config", "unstable.cfg", "--out", "c.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--allow-unstable"));
    assert!(!dir.path().join("c.csv").exists());

    let out = run(dir.path(), &["chern", "--config", "unstable.cfg", "--out", "c.csv", "--allow-unstable"]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("c.csv")).unwrap();
    assert!(text.lines().next().unwrap().ends_with(",flag,C,Omega_B"));
}

#[test]
fn config_errors_exit_one_with_line() {
    let dir = setup();
    std::fs::write(dir.path().join("bad.cfg"), "kappa = 1\ngamma = 1\nOmega_z = 1\nwhatever = 3\n").unwrap();
    let out = run(dir.path(), &["eigen", "--config", "bad.cfg"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 4"));

    let out = run(dir.path(), &["eigen", "--config", "missing.cfg"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn coarse_ep_scan_is_a_numerical_failure() {
    let dir = setup();
    let out = run(dir.path(), &["ep-scan", "--config", "unstable.cfg"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn stability_certificate_reports_without_gating() {
    let dir = setup();
    let out = run(dir.path(), &["stability", "--config", "unstable.cfg"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == "rh_stable").unwrap();
    assert!(text.lines().skip(1).all(|l| l.split(',').nth(col) == Some("false")));
}

#[test]
fn worker_count_does_not_change_bytes() {
    let dir = setup();
    for (w, name) in [("1", "a.csv"), ("4", "b.csv")] {
        let out = run(dir.path(), &["sweep", "--config", "stable.cfg", "--workers", w, "--out", name]);
        assert_eq!(out.status.code(), Some(0));
    }
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    assert_eq!(a, std::fs::read(dir.path().join("b.csv")).unwrap());
}

#[test]
fn exact_json_round_trips() {
    let dir = setup();
    let out = run(dir.path(), &["eigen", "--config", "stable.cfg", "--format", "json", "--exact"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let ks = v["grids"]["k"].as_array().unwrap();
    assert_eq!(ks.len(), 5);
    assert_eq!(ks[0].as_str().unwrap().parse::<f64>().unwrap(), -0.5);
    assert_eq!(v["arrays"]["re_lambda_0"].as_array().unwrap().len(), 5);
    assert_eq!(v["meta"]["params"]["kappa"], serde_json::json!(2.0));
}

#[test]
fn plot_script_sits_next_to_csv() {
    let dir = setup();
    let out = run(dir.path(), &["eigen", "--config", "stable.cfg", "--out", "eig.csv", "--emit-plot"]);
    assert_eq!(out.status.code(), Some(0));
    let script = std::fs::read_to_string(dir.path().join("eig.gp")).unwrap();
    assert!(script.contains("'eig.csv'"));
    assert!(script.contains("layout 1,2"));

    let out = run(dir.path(), &["eigen", "--config", "stable.cfg", "--format", "json", "--emit-plot", "--out", "e.json"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn power_sweep_long_format() {
    let dir = setup();
    let cfg = format!("{STABLE}k_points = 0, 0.4\nP_count = 4\n");
    std::fs::write(dir.path().join("p.cfg"), cfg).unwrap();
    let out = run(dir.path(), &["power-sweep", "--config", "p.cfg"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("k,P,C_peak,omega_at_peak"));
    assert_eq!(text.lines().count(), 1 + 2 * 4);
}
