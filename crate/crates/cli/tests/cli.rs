use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const EXTENDED: &str = r#"
a = 2.5e20
levels = 3

[potential]
kind = "infinite_well"
L = 1e-7

[grid]
points = 4001
"#;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_unruh-lab"));
    cmd.env_remove("UNRUH_LAB_OUT");
    cmd
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn first_line(path: &Path) -> String {
    fs::read_to_string(path).unwrap().lines().next().unwrap_or_default().to_string()
}

#[test]
fn extended_well_scenario_writes_report() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "run.toml", EXTENDED);
    let out = dir.path().join("out");
    let o = run(&["scenario", "extended-well", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        first_line(&out.join("spectrum.csv")),
        "n,E_dimless,E_joule,zbar_dimless,beta_bar_per_joule"
    );
    assert_eq!(first_line(&out.join("relax.csv")), "t_seconds,level_index,population");
    let spectrum = fs::read_to_string(out.join("spectrum.csv")).unwrap();
    assert_eq!(spectrum.lines().count(), 4);
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["all_passed"], true);
    assert_eq!(manifest["config"]["a"], 2.5e20);
    let files: Vec<&str> = manifest["files"].as_array().unwrap().iter().map(|f| f.as_str().unwrap()).collect();
    for f in &files {
        assert!(out.join(f).exists(), "{f}");
    }
    assert!(files.contains(&"spin_state.csv"));
}

#[test]
fn json_report_mirrors_fields() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "run.toml", EXTENDED);
    let out = dir.path().join("out");
    let o = run(&[
        "spin-state",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["scenario"], "extended_well");
    assert_eq!(report["ground_occupation"], 1.0);
    let t = report["t_eff_kelvin"].as_f64().unwrap();
    assert!((t - 1.0137).abs() < 1e-3);
    assert!(report.get("relaxation").is_none());
    assert!(!out.join("relax.csv").exists());
}

#[test]
fn runs_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "run.toml", EXTENDED);
    let outs: Vec<PathBuf> = (0..2).map(|i| dir.path().join(format!("out{i}"))).collect();
    for out in &outs {
        let o = run(&["relax", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let mut names: Vec<_> = fs::read_dir(&outs[0]).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.len() >= 6);
    for name in names {
        let a = fs::read_to_string(outs[0].join(&name)).unwrap();
        let b = fs::read_to_string(outs[1].join(&name)).unwrap();
        if name == "manifest.json" {
            let strip = |s: &str| {
                let mut v: serde_json::Value = serde_json::from_str(s).unwrap();
                v.as_object_mut().unwrap().remove("timestamp_unix");
                v
            };
            assert_eq!(strip(&a), strip(&b));
        } else {
            assert_eq!(a, b, "{name:?}");
        }
    }
}

#[test]
fn missing_config_flag_is_usage_error() {
    let o = run(&["scenario", "extended-well"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_config_file_is_usage_error() {
    let o = run(&["spectrum", "--config", "/nonexistent/run.toml"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("cannot read config"));
}

#[test]
fn invalid_config_names_invariant() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "bad.toml", &EXTENDED.replace("2.5e20", "-1.0"));
    let o = run(&["spectrum", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("a > 0"), "{}", stderr(&o));
}

#[test]
fn unknown_key_is_parse_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "bad.toml", &format!("omega_typo = 3.0\n{EXTENDED}"));
    let o = run(&["spectrum", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("omega_typo"), "{}", stderr(&o));
}

#[test]
fn regime_failure_is_computation_error() {
    let dir = TempDir::new().unwrap();
    let text = "a = 2.5e20\n[potential]\nkind = \"double_well\"\nL = 1e-7\nl = 1e-3\n";
    let cfg = write_config(dir.path(), "dw.toml", text);
    let o = run(&["scenario", "double-well", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("regime check failed") && err.contains("a*z/c^2"), "{err}");
}

#[test]
fn strict_regime_turns_warnings_into_errors() {
    let dir = TempDir::new().unwrap();
    let text = "a = 2.5e20\nlevels = 2\n[potential]\nkind = \"double_well\"\nL = 1e-7\nl = 1e-6\ncancel_tilt = true\n\
                [grid]\npoints = 2001\n[relaxation]\nenabled = false\n";
    let cfg = write_config(dir.path(), "dw.toml", text);
    let out = dir.path().join("out");
    let args = ["scenario", "double-well", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
    let o = run(&args);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(first_line(&out.join("double_well.csv")), "quantity,value");
    let wells = fs::read_to_string(out.join("wells.csv")).unwrap();
    assert!(wells.contains("symmetric") && wells.contains("antisymmetric"));
    let mut strict = args.to_vec();
    strict.push("--strict-regime");
    let o = run(&strict);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("warning"));
}

#[test]
fn scenario_kind_must_match_potential() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "run.toml", EXTENDED);
    let o = run(&["scenario", "double-well", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn environment_sets_default_output() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "run.toml", EXTENDED);
    let out = dir.path().join("env-out");
    let o = bin()
        .args(["spectrum", "--config", cfg.to_str().unwrap()])
        .env("UNRUH_LAB_OUT", &out)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(out.join("spectrum.csv").exists());
    assert!(out.join("manifest.json").exists());
}

#[test]
fn spectrum_dumps_states_when_asked() {
    let dir = TempDir::new().unwrap();
    let text = format!("{EXTENDED}\n[output]\nstates = true\n").replace("points = 4001", "points = 401");
    let cfg = write_config(dir.path(), "run.toml", &text);
    let out = dir.path().join("out");
    let o = run(&["spectrum", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let states = fs::read_to_string(out.join("states.csv")).unwrap();
    assert_eq!(states.lines().next().unwrap(), "n,z_dimless,z_meters,phi");
    assert_eq!(states.lines().count(), 1 + 3 * 401);
}

#[test]
fn sweep_collects_failures_in_order() {
    let dir = TempDir::new().unwrap();
    let text = EXTENDED.replace("[grid]", "[relaxation]\nenabled = false\n\n[grid]");
    let cfg = write_config(dir.path(), "run.toml", &text);
    let out = dir.path().join("out");
    let o = run(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--axis",
        "a",
        "--values",
        "1e20,-1,5e20",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(out.join("sweep.csv")).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert!(rows[0].starts_with("a,status,"));
    assert!(rows[1].contains(",ok,"));
    assert!(rows[2].contains(",error,") && rows[2].contains("a > 0"));
    assert!(rows[3].starts_with("5.0000000000000000e20,ok,"));
}

#[test]
fn bad_sweep_axis_is_usage_error() {
    let o = run(&["sweep", "--config", "x.toml", "--axis", "mass", "--values", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn kinematics_point_queries() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let o = run(&["kinematics", "--a", "2.5e20", "--z", "0,-1e-4,1e-3", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(out.join("kinematics.csv")).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0][2], 1.0);
    assert!((rows[0][4] - 1.0137533807).abs() < 1e-9);
    assert!((rows[2][2] - (1.0 + 2.5e20 * 1e-3 / 299_792_458f64.powi(2))).abs() < 1e-12);

    let o = run(&["kinematics", "--z", "0"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["kinematics", "--a", "2.5e20", "--z", "-1", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}
