//! End-to-end checks of the secchain binary: pipeline wiring, output
//! formats and exit codes.

use std::path::Path;
use std::process::{Command, Output};

use secchain_core::harness::METRICS_HEADER;
use secchain_core::rl::QTable;
use secchain_core::Scenario;

fn secchain(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_secchain"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn assert_success(out: &Output) {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn gen_train_run_pipeline_produces_all_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();

    let out = secchain(
        &["gen", "--tasks", "8", "--providers", "3", "--services", "2", "--seed", "5", "-o", "scen.json"],
        d,
    );
    assert_success(&out);
    let scenario = Scenario::load(&d.join("scen.json")).unwrap();
    assert_eq!(scenario.workflow.tasks().len(), 8);
    assert_eq!(scenario.services.len(), 6);

    let out = secchain(
        &["train", "--scenario", "scen.json", "--episodes", "20", "--seed", "3", "--log", "train.csv", "-o", "q.json"],
        d,
    );
    assert_success(&out);
    let qtable = QTable::load(&d.join("q.json")).unwrap();
    assert!(!qtable.is_empty(), "20 episodes at default rate should observe states");
    let log = std::fs::read_to_string(d.join("train.csv")).unwrap();
    assert_eq!(log.lines().next().unwrap(), "episode,epsilon,mean_cost");
    assert_eq!(log.lines().count(), 21);

    let out = secchain(
        &[
            "run", "--scenario", "scen.json", "--strategy", "none,single,chain", "--qtable",
            "q.json", "--executions", "30", "--seed", "3", "--traces", "traces.jsonl", "-o",
            "metrics.csv",
        ],
        d,
    );
    assert_success(&out);
    let csv = std::fs::read_to_string(d.join("metrics.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), METRICS_HEADER);
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[0].starts_with("none,30,"));
    assert!(rows[1].starts_with("single,30,"));
    assert!(rows[2].starts_with("chain,30,"));
    assert!(d.join("metrics.rolling.json").is_file());
    for strategy in ["none", "single", "chain"] {
        let traces = std::fs::read_to_string(d.join(format!("traces.{strategy}.jsonl"))).unwrap();
        assert_eq!(traces.lines().count(), 30);
    }
}

#[test]
fn run_twice_with_same_seed_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_success(&secchain(
        &["gen", "--tasks", "6", "--seed", "9", "-o", "scen.json"],
        d,
    ));
    for name in ["a.csv", "b.csv"] {
        assert_success(&secchain(
            &["run", "--scenario", "scen.json", "--strategy", "none,oracle", "--executions", "40", "--seed", "11", "-o", name],
            d,
        ));
    }
    assert_eq!(
        std::fs::read(d.join("a.csv")).unwrap(),
        std::fs::read(d.join("b.csv")).unwrap()
    );
    assert_eq!(
        std::fs::read(d.join("a.rolling.json")).unwrap(),
        std::fs::read(d.join("b.rolling.json")).unwrap()
    );
}

#[test]
fn sdm_prints_matrix_with_diagonal_ones() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let workflow = secchain_core::demo::insurance_workflow();
    std::fs::write(d.join("wf.json"), workflow.to_json().unwrap()).unwrap();
    let out = secchain(&["sdm", "--workflow", "wf.json"], d);
    assert_success(&out);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "task,t1,t2,t3,t4,t5,t6,t7,t8");
    let t5_row: Vec<&str> = lines.nth(4).unwrap().split(',').collect();
    assert_eq!(t5_row[0], "t5");
    assert_eq!(t5_row[5], "1|1|1");
    let t8 = text.lines().nth(8).unwrap();
    let t8_cells: Vec<&str> = t8.split(',').collect();
    assert_eq!(t8_cells[5], "0|0|0");
}

#[test]
fn oracle_ranks_chains_for_the_demo_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let scenario = secchain_core::demo::insurance_scenario();
    scenario.save(&d.join("scen.json")).unwrap();
    let out = secchain(
        &["oracle", "--scenario", "scen.json", "--vt", "t5", "--attack", "DoS", "--severity", "High", "--top", "4"],
        d,
    );
    assert_success(&out);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "rank,chain,price,time,value,mitigation,total");
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("1,"));
    let best_total: f64 = lines[1].rsplit(',').next().unwrap().parse().unwrap();
    let fourth_total: f64 = lines[4].rsplit(',').next().unwrap().parse().unwrap();
    assert!(best_total <= fourth_total);
}

#[test]
fn exit_codes_distinguish_config_from_validation() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();

    let out = secchain(&["run", "--scenario", "missing.json", "--strategy", "none", "-o", "m.csv"], d);
    assert_eq!(out.status.code(), Some(2));

    assert_success(&secchain(&["gen", "--tasks", "6", "--seed", "9", "-o", "scen.json"], d));
    let out = secchain(&["oracle", "--scenario", "scen.json", "--vt", "t1", "--attack", "NotAnAttack"], d);
    assert_eq!(out.status.code(), Some(3));

    let cyclic = r#"{"id":"w","tasks":[{"id":"a","c":0.5,"i":0.5,"a":0.5,"value":1,"actions":["Insert"]},
        {"id":"b","c":0.5,"i":0.5,"a":0.5,"value":1,"actions":["Insert"]}],
        "control_edges":[["a","b"],["b","a"]]}"#;
    std::fs::write(d.join("cyclic.json"), cyclic).unwrap();
    let out = secchain(&["sdm", "--workflow", "cyclic.json"], d);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cycle"));

    let out = secchain(&["gen", "--tasks", "1", "--seed", "0", "-o", "x.json"], d);
    assert_eq!(out.status.code(), Some(2));
}
