use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn curvdim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_curvdim")).args(args).output().expect("binary runs")
}

fn run_config(dir: &Path, command: &str, ini: &str) -> Output {
    let cfg = dir.join(format!("{command}.ini"));
    std::fs::write(&cfg, ini).unwrap();
    curvdim(&[command, "--config", cfg.to_str().unwrap(), "--out", dir.to_str().unwrap()])
}

fn report(dir: &Path, command: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join(format!("{command}_report.json"))).unwrap()).unwrap()
}

const SINE_SPACE: &str = "\
[space]
kind = model
a = 0.1
b = 3.0415926535897931
n = 3
ode_field = const:1
u0 = 0.09983341664682815
v0 = 0.9950041652780258
";

#[test]
fn cd_on_the_sine_model_passes() {
    let dir = tempfile::tempdir().unwrap();
    let ini = format!("{SINE_SPACE}\n[measures]\nmu0 = uniform:0.3,0.9\nmu1 = uniform:1.8,2.6\n\n[params]\nform = all\nq = 128\n");
    let out = run_config(dir.path(), "cd", &ini);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(dir.path(), "cd");
    assert_eq!(r["passed"], Value::Bool(true));
    let forms: Vec<&str> = r["result"].as_array().unwrap().iter().map(|x| x["form"].as_str().unwrap()).collect();
    assert_eq!(forms, ["Pointwise", "Entropy", "Reduced", "Infinity"]);
    // the resolved config includes defaults
    assert_eq!(r["config"]["params"]["tol"], Value::from(1e-3));
    assert!(dir.path().join("cd_slacks.csv").exists());
}

#[test]
fn inflated_field_is_a_violation() {
    let dir = tempfile::tempdir().unwrap();
    let ini = format!("{SINE_SPACE}\n[measures]\nmu0 = uniform:0.6,0.62\nmu1 = uniform:2.52,2.54\n\n[params]\nfield = const:2.5\nq = 128\n");
    let out = run_config(dir.path(), "cd", &ini);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(report(dir.path(), "cd")["result"][0]["verdict"], "Violation");
}

#[test]
fn subcritical_schneider_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_config(dir.path(), "schneider", "[params]\nc = 0.5\nn = 3\nbig_r = 2\ndelta = 1\n");
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("critical constant"));
    let out = run_config(dir.path(), "schneider", "[params]\nc = 1.25\nn = 2\nbig_r = 2\ndelta = 1\nd = 10\n");
    assert_eq!(out.status.code(), Some(0));
    let r = report(dir.path(), "schneider");
    assert_eq!(r["result"]["diameter_bound"].as_f64().unwrap(), 3.0 * std::f64::consts::PI.exp());
}

#[test]
fn unknown_keys_and_bad_values_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_config(dir.path(), "sin", "[params]\nfield = const:1\nlength = 1\ncolour = red\n");
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("[params] colour"));
    let out = run_config(dir.path(), "sin", "[params]\nfield = cnst:1\nlength = 1\n");
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("position 0"));
    assert_eq!(curvdim(&["sin"]).status.code(), Some(2));
    assert_eq!(curvdim(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn borderline_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let k = std::f64::consts::PI.powi(2);
    let out = run_config(dir.path(), "distortion", &format!("[params]\nfield = const:{k}\nthetas = 1\n"));
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    let out = run_config(dir.path(), "distortion", &format!("[params]\nfield = const:{k}\nthetas = 1\nborderline = infinite\n"));
    assert_eq!(out.status.code(), Some(0));
    assert!(std::fs::read_to_string(dir.path().join("distortion.csv")).unwrap().contains("inf"));
}

#[test]
fn artifacts_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let ini = "[params]\nfield = min(const:1,pow:-0.5,1,5)\nthetas = 0.5,1,2\nn = 3\n";
    assert_eq!(run_config(dir.path(), "distortion", ini).status.code(), Some(0));
    let first = std::fs::read(dir.path().join("distortion.csv")).unwrap();
    assert_eq!(run_config(dir.path(), "distortion", ini).status.code(), Some(0));
    assert_eq!(first, std::fs::read(dir.path().join("distortion.csv")).unwrap());
    let text = String::from_utf8(first).unwrap();
    assert!(text.starts_with("theta,t,sigma,sigma_kn,tau_kn\n"));
    assert_eq!(text.lines().count(), 1 + 3 * 5);
}

#[test]
fn help_lists_the_grammar() {
    let out = curvdim(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    for token in ["const:<K>", "pow:<a>,<q>[,<p>]", "table:<path>", "min(<e1>,<e2>)", "schneider", "suite"] {
        assert!(text.contains(token), "missing {token}");
    }
}

#[test]
fn geometry_commands() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = run_config(d, "sin", "[params]\nfield = const:1\nlength = 4\npoints = 11\n");
    assert_eq!(out.status.code(), Some(0));
    let z = report(d, "sin")["result"]["first_zero"].as_f64().unwrap();
    assert!((z - std::f64::consts::PI).abs() < 1e-8);

    let bm = format!("{SINE_SPACE}\n[params]\na0 = 0.3,0.8\na1 = 1.5,2.5\npair_points = 6\n");
    assert_eq!(run_config(d, "bm", &bm).status.code(), Some(0));
    assert!(d.join("bm.csv").exists());

    let bg = "[space]\nkind = model\na = 0\nb = 3.141592653589793\nn = 3\node_field = const:1\nu0 = 0\nv0 = 1\n\n\
              [params]\nx0 = 0\nk_low = 2\nr = 0.5,1\nbig_r = 1,2\n";
    assert_eq!(run_config(d, "bg", bg).status.code(), Some(0));
    // a bound above the true curvature fails
    assert_eq!(run_config(d, "bg", &bg.replace("k_low = 2", "k_low = 4")).status.code(), Some(1));

    let dbl = "[space]\nkind = lebesgue\na = 0\nb = 4\nn = 1\n\n[params]\nk_low = 0\ncentres = 1,2\nradii = 0.1,0.5\n";
    assert_eq!(run_config(d, "doubling", dbl).status.code(), Some(0));
}

#[test]
fn convexity_and_tensor_commands() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let rows: String = (0..=200)
        .map(|i| {
            let s = 0.1 + 2.9 * i as f64 / 200.0;
            format!("{s},{}\n", s.sin())
        })
        .collect();
    std::fs::write(d.join("u.csv"), format!("s,value\n{rows}")).unwrap();
    let out = run_config(d, "convexity", "[params]\nu = u.csv\nkappa = const:1\n");
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(report(d, "convexity")["result"].as_array().unwrap().len(), 3);
    assert_eq!(run_config(d, "convexity", "[params]\nu = u.csv\nkappa = const:1.5\n").status.code(), Some(1));

    let tensor = "[space1]\nkind = lebesgue\na = 0\nb = 1\nn = 1\n\n[space2]\nkind = lebesgue\na = 0\nb = 1\nn = 1\n\n\
                  [measures]\nmu0_1 = uniform:0,0.4\nmu1_1 = uniform:0.5,1\nmu0_2 = uniform:0.2,0.6\nmu1_2 = uniform:0.1,0.9\n\n[params]\nq = 32\n";
    let out = run_config(d, "tensor", tensor);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn suite_reports_every_criterion() {
    let dir = tempfile::tempdir().unwrap();
    let out = curvdim(&["suite", "--out", dir.path().to_str().unwrap()]);
    let table = String::from_utf8_lossy(&out.stderr);
    assert_eq!(out.status.code(), Some(0), "{table}");
    assert_eq!(table.lines().filter(|l| l.contains("PASS")).count(), 10);
    let csv = std::fs::read_to_string(dir.path().join("suite.csv")).unwrap();
    assert_eq!(csv.lines().count(), 11);
}
