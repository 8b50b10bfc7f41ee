use std::path::Path;
use std::process::{Command, Output};

fn geams_sim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_geams-sim"))
        .args(args)
        .env_remove("GEAMS_SIM_OUT")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn summary_rows(dir: &Path) -> Vec<Vec<String>> {
    let text = std::fs::read_to_string(dir.join("summary.csv")).unwrap();
    text.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn run_prints_summary_and_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = geams_sim(&["run", "--protocol", "gpsr", "--nodes", "30", "--seed", "2", "--out-dir", out]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    for needle in ["dead nodes", "delivered", "delay mean", "energy mean", "energy var"] {
        assert!(text.contains(needle), "missing {needle} in {text}");
    }
    let rows = summary_rows(dir.path());
    assert_eq!(rows.len(), 1);
    assert_eq!(&rows[0][..3], ["gpsr", "2", "30"]);
    assert!(dir.path().join("regional.csv").exists());
}

#[test]
fn flags_override_the_scenario_file() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("s.json");
    std::fs::write(&scenario, r#"{ "protocol": "gpsr", "nodes": 30, "seed": 4 }"#).unwrap();
    let out = dir.path().join("out");
    let o = geams_sim(&[
        "run",
        "--scenario",
        scenario.to_str().unwrap(),
        "--nodes",
        "50",
        "--out-dir",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = summary_rows(&out);
    assert_eq!(&rows[0][..3], ["gpsr", "4", "50"]);
}

#[test]
fn missing_scenario_names_the_path() {
    let o = geams_sim(&["run", "--scenario", "/nonexistent/scenario.json"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("/nonexistent/scenario.json"), "{}", stderr(&o));
}

#[test]
fn unknown_scenario_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("bad.json");
    std::fs::write(&scenario, "{\n  \"nodes\": 30,\n  \"radio\": 80\n}\n").unwrap();
    let o = geams_sim(&["run", "--scenario", scenario.to_str().unwrap()]);
    assert!(!o.status.success());
    let err = stderr(&o);
    assert!(err.contains("radio") && err.contains("line 3"), "{err}");
}

#[test]
fn topology_round_trip_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let topo = dir.path().join("topo.csv");
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let o = geams_sim(&[
        "run",
        "--nodes",
        "50",
        "--seed",
        "3",
        "--topology-out",
        topo.to_str().unwrap(),
        "--out-dir",
        a.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let header = std::fs::read_to_string(&topo).unwrap();
    assert!(header.starts_with("node_id,x,y"));
    let o = geams_sim(&[
        "run",
        "--seed",
        "3",
        "--topology-in",
        topo.to_str().unwrap(),
        "--out-dir",
        b.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        std::fs::read(a.join("summary.csv")).unwrap(),
        std::fs::read(b.join("summary.csv")).unwrap()
    );
}

#[test]
fn experiment_is_independent_of_jobs() {
    let dir = tempfile::tempdir().unwrap();
    let run = |jobs: &str, sub: &str| {
        let out = dir.path().join(sub);
        let o = geams_sim(&[
            "experiment",
            "--nodes",
            "30,50",
            "--seeds",
            "1..3",
            "--jobs",
            jobs,
            "--packets",
            "--out-dir",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        out
    };
    let serial = run("1", "serial");
    let parallel = run("4", "parallel");
    assert_eq!(summary_rows(&serial).len(), 2 * 2 * 3);
    for f in ["summary.csv", "regional.csv", "comparison.csv", "packets.csv"] {
        assert_eq!(std::fs::read(serial.join(f)).unwrap(), std::fs::read(parallel.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn out_dir_can_come_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_geams-sim"))
        .args(["run", "--nodes", "30"])
        .env("GEAMS_SIM_OUT", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(dir.path().join("summary.csv").exists());
}

#[test]
fn bad_inputs_fail_cleanly() {
    assert!(!geams_sim(&["run", "--protocol", "aodv"]).status.success());
    assert!(!geams_sim(&["experiment", "--seeds", "5..1"]).status.success());
    assert!(!geams_sim(&["experiment", "--jobs", "0", "--nodes", "30", "--seeds", "1"]).status.success());
}

#[test]
fn config_prints_the_defaults() {
    let o = geams_sim(&["config"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("\"initial_energy_j\": 1.0"), "{text}");
}
