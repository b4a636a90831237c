use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use funnelsync::output::read_trajectory_csv;
use funnelsync::ScenarioFile;
use funnelsync_core::netsim::integrate;
use serde_json::{json, Value};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_funnelsync"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn write_scenario(dir: &Path, name: &str, doc: &Value) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, serde_json::to_string_pretty(doc).unwrap()).unwrap();
    p
}

fn agent(f: &str, funnel: Value, coupling: Value, x0: f64) -> Value {
    json!({"f": f, "funnel": funnel, "coupling": coupling, "x0": x0})
}

fn k2_doc() -> Value {
    let psi = json!({"family": "constant", "psi0": 1});
    let c = json!({"family": "classical", "kappa": 1});
    json!({
        "schema": 1, "t0": 0, "t_end": 20, "dt": 0.01,
        "graph": {"n": 2, "edges": [[0, 1, 1.0]]},
        "agents": [agent("1", psi.clone(), c.clone(), 0.0), agent("-1", psi, c, 0.0)]
    })
}

fn homogeneous_doc() -> Value {
    let psi = json!({"family": "exp_to_eta", "psi0": 1, "eta": 0.1, "lambda": 1});
    let c = json!({"family": "classical", "kappa": 1});
    let agents: Vec<Value> = (0..4).map(|_| agent("-x", psi.clone(), c.clone(), 3.0)).collect();
    json!({"schema": 1, "t_end": 2, "dt": 0.01, "graph": {"family": "ring", "n": 4}, "agents": agents})
}

fn mixed_doc(t_end: f64) -> Value {
    let psi = json!({"family": "exp_to_eta", "psi0": 1, "eta": 0.2, "lambda": 1});
    let c = json!({"family": "classical", "kappa": 1});
    let agents: Vec<Value> =
        ["1 - x", "2 - x", "3 - x", "10 - x", "20 - x"].iter().map(|f| agent(f, psi.clone(), c.clone(), 0.0)).collect();
    json!({"schema": 1, "t_end": t_end, "dt": 0.01, "graph": {"family": "ring", "n": 5}, "agents": agents})
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn simulate_k2_gap() {
    let dir = tempfile::tempdir().unwrap();
    let sc = write_scenario(dir.path(), "k2.json", &k2_doc());
    let out = dir.path().join("out");
    let o = run(&["simulate", "--scenario", sc.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let cols = read_trajectory_csv(std::fs::File::open(out.join("trajectory.csv")).unwrap()).unwrap();
    let x = cols.x.last().unwrap();
    assert!((x[1] - x[0] + 0.5).abs() < 1e-3);
    let summary = read_json(&out.join("summary.json"));
    assert_eq!(summary["breach"], json!(false));
    assert!(summary["max_input"].as_f64().unwrap().is_finite());
}

#[test]
fn simulate_rejects_bad_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let mut outside = k2_doc();
    outside["agents"][1]["x0"] = json!(2.0);
    let mut disconnected = k2_doc();
    disconnected["graph"] = json!({"n": 3, "edges": [[0, 1, 1.0]]});
    let extra = disconnected["agents"][0].clone();
    disconnected["agents"].as_array_mut().unwrap().push(extra);
    let mut unknown = k2_doc();
    unknown["colour"] = json!("blue");
    let mut bad_family = k2_doc();
    bad_family["agents"][0]["coupling"] = json!({"family": "quadratic"});
    let mut bad_field = k2_doc();
    bad_field["agents"][0]["f"] = json!("y - x");
    let mut bad_schema = k2_doc();
    bad_schema["schema"] = json!(2);
    for (name, doc) in [
        ("outside", outside),
        ("disconnected", disconnected),
        ("unknown", unknown),
        ("family", bad_family),
        ("field", bad_field),
        ("schema", bad_schema),
    ] {
        let sc = write_scenario(dir.path(), &format!("{name}.json"), &doc);
        let o = run(&["simulate", "--scenario", sc.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert_eq!(code(&o), 3, "{name}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let o = run(&["simulate", "--scenario", "/nonexistent/file.json", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 3);
}

#[test]
fn breach_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let mut doc = k2_doc();
    doc["agents"][0]["f"] = json!("1000");
    doc["agents"][1]["f"] = json!("-1000");
    doc["dt"] = json!(0.5);
    doc["dt_min"] = json!(0.5);
    doc["t_end"] = json!(1.0);
    let sc = write_scenario(dir.path(), "breach.json", &doc);
    let out = dir.path().join("out");
    let o = run(&["simulate", "--scenario", sc.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    let summary = read_json(&out.join("summary.json"));
    assert_eq!(summary["breach"], json!(true));
    assert_eq!(summary["breach_detail"]["last_safe_t"], json!(0.0));
}

#[test]
fn emergent_modes() {
    let dir = tempfile::tempdir().unwrap();
    let sc = write_scenario(dir.path(), "h.json", &homogeneous_doc());
    let out = dir.path().join("em");
    let o = run(&["emergent", "--scenario", sc.to_str().unwrap(), "--mode", "two_dim", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let mut r = csv::Reader::from_path(out.join("emergent.csv")).unwrap();
    for rec in r.records() {
        let rec = rec.unwrap();
        let t: f64 = rec[0].parse().unwrap();
        let xi: f64 = rec[1].parse().unwrap();
        assert!((xi - 3.0 * (-t).exp()).abs() < 1e-9);
    }

    let sc = write_scenario(dir.path(), "m.json", &mixed_doc(3.0));
    let read_xi = |mode: &str| -> Vec<f64> {
        let out = dir.path().join(mode);
        let o = run(&["emergent", "--scenario", sc.to_str().unwrap(), "--mode", mode, "--out", out.to_str().unwrap()]);
        assert_eq!(code(&o), 0);
        let mut r = csv::Reader::from_path(out.join("emergent.csv")).unwrap();
        r.records().map(|rec| rec.unwrap()[1].parse().unwrap()).collect()
    };
    let (a, b) = (read_xi("direct"), read_xi("two_dim"));
    let sup = a.iter().zip(&b).fold(0.0f64, |m, (p, q)| m.max((p - q).abs()));
    assert!(sup < 1e-5, "sup {sup}");

    let o =
        run(&["emergent", "--scenario", sc.to_str().unwrap(), "--mode", "sideways", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 64);
}

#[test]
fn compare_sweeps() {
    let dir = tempfile::tempdir().unwrap();
    let sc = write_scenario(dir.path(), "m.json", &mixed_doc(4.0));
    let out = dir.path().join("cmp");
    let o = run(&[
        "compare",
        "--scenario",
        sc.to_str().unwrap(),
        "--tau",
        "1",
        "--eps",
        "0.5,0.25,0.125",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let mut r = csv::Reader::from_path(out.join("sweep.csv")).unwrap();
    let rows: Vec<Vec<f64>> =
        r.records().map(|rec| rec.unwrap().iter().take(3).map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[0][1] > rows[1][1] && rows[1][1] > rows[2][1], "{rows:?}");

    let sc = write_scenario(dir.path(), "h.json", &homogeneous_doc());
    let o = run(&["compare", "--scenario", sc.to_str().unwrap(), "--eps", "1,0.5", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let mut r = csv::Reader::from_path(out.join("sweep.csv")).unwrap();
    for rec in r.records() {
        let rec = rec.unwrap();
        assert!(rec[1].parse::<f64>().unwrap() < 1e-9);
        assert!(rec[2].parse::<f64>().unwrap() < 1e-9);
    }

    let o = run(&["compare", "--scenario", sc.to_str().unwrap(), "--eps", "", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 64);
    let o = run(&["compare", "--scenario", sc.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 64);
}

#[test]
fn median_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("med");
    let o = run(&[
        "median",
        "--values",
        "1,2,3,10,20",
        "--graph",
        "path",
        "--eps",
        "0.2",
        "--eta",
        "0.05",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rep = read_json(&out.join("median.json"));
    assert_eq!(rep["median_set"], json!([3.0]));
    assert!((rep["h_star"].as_f64().unwrap() - 3.0).abs() <= 0.05);
    let slack = 0.05 + 10.0 * 0.5 * (-15.0f64).exp();
    for x in rep["final_states"].as_array().unwrap() {
        assert!((x.as_f64().unwrap() - 3.0).abs() <= slack);
    }
    assert!((rep["eps_max"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-15);

    let o = run(&["median", "--values", "1,2,3,10,20", "--eps", "0.5", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 3);

    let o = run(&["median", "--values", "7.5", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let rep = read_json(&out.join("median.json"));
    assert_eq!(rep["median_set"], json!([7.5]));
    assert_eq!(rep["h_star"], json!(7.5));

    let o = run(&["median", "--values", "-4,7,0.5", "--t-end", "5", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(read_json(&out.join("median.json"))["median_set"], json!([0.5]));
}

#[test]
fn hsolve_examples() {
    let h = |args: &[&str]| -> f64 {
        let mut all = vec!["hsolve"];
        all.extend_from_slice(args);
        let o = run(&all);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        String::from_utf8(o.stdout).unwrap().trim().parse().unwrap()
    };
    assert_eq!(h(&["--f", "2.5,2.5,2.5"]), 2.5);
    assert!((h(&["--f", "0,1,3"]) - 1.135).abs() < 1e-3);
    assert!((h(&["--f", "0,2", "--coupling", "log"]) - 1.0).abs() < 1e-14);
    assert!((h(&["--f", "-1,1", "--psi", "1,1", "--coupling", "near_signum"])).abs() < 1e-12);
    let o = run(&["hsolve", "--f", "0,1", "--psi", "1,2,3"]);
    assert_eq!(code(&o), 3);
}

#[test]
fn usage_and_help() {
    assert_eq!(code(&run(&["--help"])), 0);
    assert_eq!(code(&run(&["--version"])), 0);
    assert_eq!(code(&run(&["simulate", "--help"])), 0);
    assert_eq!(code(&run(&[])), 64);
    assert_eq!(code(&run(&["frobnicate"])), 64);
    assert_eq!(code(&run(&["simulate", "--scenario"])), 64);
}

#[test]
fn validate_report() {
    let dir = tempfile::tempdir().unwrap();
    let sc = write_scenario(dir.path(), "k2.json", &k2_doc());
    let o = run(&["validate", "--scenario", sc.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let rep: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(rep["standing_assumptions_hold"], json!(true));
    let mut doc = k2_doc();
    doc["agents"][0]["f"] = json!("x^2");
    let sc = write_scenario(dir.path(), "sq.json", &doc);
    let o = run(&["validate", "--scenario", sc.to_str().unwrap()]);
    let rep: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(rep["standing_assumptions_hold"], json!(false));
    assert!(!rep["warnings"].as_array().unwrap().is_empty());
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let psi = json!({"family": "exp_to_eta", "psi0": 2, "eta": 0.1, "lambda": 1});
    let agents: Vec<Value> = ["-4 - x", "sin(t) - 2*x", "1.5 - x", "3 - 0.5*x", "cos(t) - x", "-1 - x"]
        .iter()
        .map(|f| agent(f, psi.clone(), json!({"family": "log"}), 0.0))
        .collect();
    let doc = json!({
        "schema": 1, "t_end": 3, "dt": 0.01, "seed": 42,
        "graph": {"family": "random", "n": 6, "p": 0.3}, "agents": agents
    });
    let sc = write_scenario(dir.path(), "r.json", &doc);
    let files = |tag: &str| -> (Vec<u8>, Vec<u8>) {
        let out = dir.path().join(tag);
        let o = run(&["simulate", "--scenario", sc.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        (std::fs::read(out.join("trajectory.csv")).unwrap(), std::fs::read(out.join("summary.json")).unwrap())
    };
    assert_eq!(files("a"), files("b"));
    let med = |tag: &str| {
        let out = dir.path().join(tag);
        let o = run(&["median", "--values", "1,2,3,10,20", "--t-end", "5", "--out", out.to_str().unwrap()]);
        assert_eq!(code(&o), 0);
        std::fs::read(out.join("median.json")).unwrap()
    };
    assert_eq!(med("m1"), med("m2"));
}

#[test]
fn csv_round_trip_is_lossless() {
    let dir = tempfile::tempdir().unwrap();
    let doc = mixed_doc(2.0);
    let sc = write_scenario(dir.path(), "m.json", &doc);
    let out = dir.path().join("out");
    let o = run(&["simulate", "--scenario", sc.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let cols = read_trajectory_csv(std::fs::File::open(out.join("trajectory.csv")).unwrap()).unwrap();
    let rec = integrate(&ScenarioFile::load(&sc).unwrap().build().unwrap()).unwrap();
    assert_eq!(cols, funnelsync::output::TrajectoryColumns::from(&rec));
}
