//! CLI behaviour through the built binary. Named to run ahead of the
//! long acceptance target.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ris-ambc"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn small_sweep(dir: &Path, out: &str) -> PathBuf {
    let out = dir.join(out);
    let o = run(&[
        "sweep", "--trials", "20000", "--quad-d", "64", "--sweep", "ps_dbm=10,20,30,40", "--out", s(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    out
}

#[test]
fn mismatched_block_layout_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.conf", "M = 12\nP = 5\nQ = 2\n");
    let o = run(&["verify", "--config", s(&cfg), "--only", "quadrature"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("config error"));
}

#[test]
fn unknown_config_key_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.conf", "kappa = 0.4\nfrobnicate = 1\n");
    let o = run(&["verify", "--config", s(&cfg), "--only", "quadrature"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}

#[test]
fn power_sweep_writes_sixteen_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = small_sweep(dir.path(), "power.csv");
    let text = fs::read_to_string(out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# quad_d=64 trials=20000 seed=1"));
    assert_eq!(lines.next(), Some("sweep_var,value,metric,method,signal,sic,estimate,std_err,trials,seed"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 16);
    for r in rows {
        let f: Vec<&str> = r.split(',').collect();
        if f[3] == "mc" {
            assert_eq!((f[8], f[9]), ("20000", "1"));
        } else {
            assert_eq!((f[7], f[8], f[9]), ("", "", ""));
        }
    }
}

#[test]
fn repeated_sweeps_are_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = fs::read(small_sweep(dir.path(), "a.csv")).unwrap();
    let b = fs::read(small_sweep(dir.path(), "b.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn invalid_sweeps_write_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.csv");
    for sweep in ["ps_dbm=30,20", "x_ris=5,45", "height=1,2", "m_elements=4,5", "ps_dbm"] {
        let o = run(&["sweep", "--trials", "100", "--sweep", sweep, "--out", s(&out)]);
        assert_eq!(o.status.code(), Some(2), "{sweep}");
        assert!(String::from_utf8_lossy(&o.stderr).contains("invalid argument"), "{sweep}");
        assert!(!out.exists());
    }
    let o = run(&["sweep", "--sweep", "ps_dbm=1", "--metrics", "sop_data", "--methods", "guess", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn baseline_and_all_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m.csv");
    let o = run(&[
        "sweep", "--trials", "8192", "--quad-d", "64", "--sweep", "m_elements=4,8",
        "--metrics", "sop_data,sop_backscatter,sop_system,throughput,energy_eff",
        "--methods", "analytic,asymptotic,mc", "--sic", "ipsic,psic", "--baseline", "no-ris", "--out", s(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&out).unwrap();
    // 2 points x 5 metrics x 3 methods x 2 sic x (RIS + baseline)
    assert_eq!(text.lines().count() - 2, 120);
    assert!(text.contains(",asymptotic-no-ris,"));
}

#[test]
fn render_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let csv = small_sweep(dir.path(), "r.csv");
    let (a, b) = (dir.path().join("a.svg"), dir.path().join("b.svg"));
    for svg in [&a, &b] {
        let o = run(&["render", "--csv", s(&csv), "--out", s(svg), "--title", "SOP vs power"]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let svg = fs::read(&a).unwrap();
    assert_eq!(svg, fs::read(&b).unwrap());
    assert!(String::from_utf8(svg).unwrap().contains("<polyline"));
}

#[test]
fn render_rejects_empty_selection_and_bad_schema() {
    let dir = tempfile::tempdir().unwrap();
    let csv = small_sweep(dir.path(), "r.csv");
    let svg = dir.path().join("x.svg");
    let o = run(&["render", "--csv", s(&csv), "--out", s(&svg), "--metrics", "energy_eff"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("format error"));
    assert!(!svg.exists());

    let bad = write(dir.path(), "bad.csv", "value,estimate\n1,0.5\n");
    let o = run(&["render", "--csv", s(&bad), "--out", s(&svg)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("format error"));
    assert!(!svg.exists());
}

#[test]
fn render_single_row() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write(
        dir.path(),
        "one.csv",
        "sweep_var,value,metric,method,signal,sic,estimate,std_err,trials,seed\n\
         ps_dbm,30.0,throughput,analytic,network,ipsic,0.6,,,\n",
    );
    let svg = dir.path().join("one.svg");
    let o = run(&["render", "--csv", s(&csv), "--out", s(&svg)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(fs::read_to_string(svg).unwrap().contains("<circle"));
}

#[test]
fn verify_reports_checks_and_exit_status() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "psic.conf", "varpi = 0\n");
    let o = run(&["verify", "--config", s(&cfg), "--only", "sic_reduction,error_floors"]);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(o.status.success(), "{stdout}");
    assert!(stdout.lines().any(|l| l.starts_with("CHECK sic_reduction_backscatter_sop ") && l.ends_with(" PASS")));
    assert!(stdout.contains("NOTE error_floors"));
    assert!(stdout.trim_end().ends_with("failed=0"));

    let o = run(&["verify", "--only", "nonsense"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn selftest_passes() {
    let o = run(&["selftest"]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("SUMMARY passed="));
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        ris_ambc::model::Scenario::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        n += 1;
    }
    assert!(n >= 5);
}
