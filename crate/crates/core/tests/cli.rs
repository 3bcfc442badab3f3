mod common;

use std::path::Path;
use std::process::{Command, Output};

use heurevo::instances::write_tsplib;
use heurevo::orchestrator::RunReport;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const UNIT_SQUARE: &str = "NAME: square\nTYPE: TSP\nDIMENSION: 4\nEDGE_WEIGHT_TYPE: EUC_2D\n\
NODE_COORD_SECTION\n1 0 0\n2 1 0\n3 1 1\n4 0 1\nEOF\n";

fn heurevo(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_heurevo"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn mean_line(o: &Output) -> String {
    stdout(o)
        .lines()
        .find(|l| l.starts_with("mean"))
        .unwrap_or_else(|| panic!("no mean line in\n{}", stdout(o)))
        .split_whitespace()
        .last()
        .unwrap()
        .to_string()
}

#[test]
fn help_and_version_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    let help = heurevo(&["--help"], dir.path());
    assert_eq!(help.status.code(), Some(0));
    for cmd in ["run", "eval", "oracle", "bench", "report"] {
        assert!(stdout(&help).contains(cmd));
    }
    assert_eq!(heurevo(&["--version"], dir.path()).status.code(), Some(0));
    assert_eq!(heurevo(&["frobnicate"], dir.path()).status.code(), Some(1));
}

#[test]
fn eval_first_fit_on_small_bpp_is_optimal() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("small.bpp"), "4\n100\n50\n70\n50\n30\n").unwrap();
    let o = heurevo(&["eval", "--heuristic", "first-fit", "--instances", "small.bpp"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(mean_line(&o), "0.00");
}

#[test]
fn eval_nearest_neighbor_on_unit_square() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("square.tsp"), UNIT_SQUARE).unwrap();
    let o = heurevo(
        &["eval", "--heuristic", "nearest-neighbor", "--instances", "square.tsp", "--out", "eval.json"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(mean_line(&o), "0.00");
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("eval.json")).unwrap()).unwrap();
    assert_eq!(json["mean_relative_error"], 0.0);
}

#[test]
fn eval_rejects_unknown_heuristic() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("square.tsp"), UNIT_SQUARE).unwrap();
    let o = heurevo(&["eval", "--heuristic", "simulated-annealing", "--instances", "square.tsp"], dir.path());
    assert_ne!(o.status.code(), Some(0));
}

#[test]
fn eval_reports_failing_candidate_without_crashing() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("square.tsp"), UNIT_SQUARE).unwrap();
    std::fs::write(dir.path().join("bad.py"), "print('{\"tour\": [0, 1]}')\n").unwrap();
    let o = heurevo(&["eval", "--candidate", "bad.py", "--instances", "square.tsp"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("failed: invalid-output"), "{}", stdout(&o));
}

#[test]
fn oracle_solves_and_refuses() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("square.tsp"), UNIT_SQUARE).unwrap();
    let o = heurevo(&["oracle", "square.tsp"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("optimal value: 4.0"), "{}", stdout(&o));
    assert!(dir.path().join("square.tsp.witness.json").is_file());

    std::fs::write(dir.path().join("small.bpp"), "4\n100\n50\n70\n50\n30\n").unwrap();
    let o = heurevo(&["oracle", "small.bpp", "--out", "w.json"], dir.path());
    assert!(stdout(&o).contains("optimal value: 2\n"), "{}", stdout(&o));
    assert!(dir.path().join("w.json").is_file());

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let big = heurevo::instances::random_euclidean("big", 25, 100.0, heurevo::instances::Rounding::Exact, &mut rng);
    std::fs::write(dir.path().join("big.tsp"), write_tsplib(&big)).unwrap();
    let o = heurevo(&["oracle", "big.tsp"], dir.path());
    assert_ne!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("refusing"));
}

fn raw_dir(root: &Path) -> std::path::PathBuf {
    let raw = root.join("raw");
    std::fs::create_dir_all(&raw).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for (name, n) in [("a", 6), ("b", 9), ("huge", 30)] {
        let t = heurevo::instances::random_euclidean(name, n, 100.0, heurevo::instances::Rounding::NearestInteger, &mut rng);
        std::fs::write(raw.join(format!("{name}.tsp")), write_tsplib(&t)).unwrap();
    }
    std::fs::write(raw.join("c.bpp"), "5\n10\n6\n5\n4\n3\n2\n").unwrap();
    std::fs::write(raw.join("notes.txt"), "ignored").unwrap();
    raw
}

#[test]
fn bench_keeps_solvable_instances() {
    let dir = tempfile::tempdir().unwrap();
    raw_dir(dir.path());
    let o = heurevo(&["bench", "raw", "--out", "bench"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let bench = dir.path().join("bench");
    let mut kept: Vec<String> = std::fs::read_dir(&bench)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".tsp") || n.ends_with(".bpp"))
        .collect();
    kept.sort();
    assert_eq!(kept, ["a.tsp", "b.tsp", "c.bpp"]);
    let excluded = std::fs::read_to_string(bench.join("excluded.txt")).unwrap();
    assert_eq!(excluded.lines().count(), 1);
    assert!(excluded.starts_with("huge.tsp"));
    assert!(String::from_utf8_lossy(&o.stderr).contains("excluded huge.tsp"));
    let optima = std::fs::read_to_string(bench.join("optima.txt")).unwrap();
    assert!(optima.contains("c 2\n"), "{optima}");

    let again = heurevo(&["bench", "raw", "--out", "bench2"], dir.path());
    assert_eq!(again.status.code(), Some(0));
    assert_eq!(optima, std::fs::read_to_string(dir.path().join("bench2/optima.txt")).unwrap());

    assert_eq!(optima.lines().count(), 3);
    // one problem class per benchmark directory
    assert!(heurevo::instances::load_benchmark(&bench).is_err());
}

#[test]
fn bench_rejects_directory_without_instances() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::create_dir(dir.path().join("empty")).unwrap();
    let o = heurevo(&["bench", "empty", "--out", "bench"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

fn write_run_config(root: &Path, instances: &str) {
    let script = common::write_script(&root.join("script.json"), &common::nn_script());
    let text = format!(
        "# small mock run\nproblem = tsp\ninstances = {instances}\nseeds = nearest-neighbor\n\
iterations = 3\nislands = 2\nbackend = mock\nmock_script = {}\nrng_seed = 5\ntimeout = 30\n",
        script.file_name().unwrap().to_string_lossy()
    );
    std::fs::write(root.join("run.cfg"), text).unwrap();
}

#[test]
fn run_then_report() {
    let dir = tempfile::tempdir().unwrap();
    let set = common::tsp_fixture();
    common::write_set(&dir.path().join("instances"), &set);
    write_run_config(dir.path(), "instances");

    let first = heurevo(&["--config", "run.cfg", "run", "--out", "out1"], dir.path());
    assert_eq!(first.status.code(), Some(0), "{}", String::from_utf8_lossy(&first.stderr));
    let second = heurevo(&["run", "--config", "run.cfg", "--out", "out2"], dir.path());
    assert_eq!(second.status.code(), Some(0));
    let a = std::fs::read_to_string(dir.path().join("out1/report.json")).unwrap();
    let b = std::fs::read_to_string(dir.path().join("out2/report.json")).unwrap();
    assert_eq!(a, b);
    let report = RunReport::from_json(&a).unwrap();
    assert_eq!(report.trace.len(), 3);

    let eval = heurevo(
        &["eval", "--heuristic", "nearest-neighbor", "--instances", "instances"],
        dir.path(),
    );
    let base = mean_line(&eval);

    let table = heurevo(&["report", "out1/report.json", "--out", "tables"], dir.path());
    assert_eq!(table.status.code(), Some(0), "{}", String::from_utf8_lossy(&table.stderr));
    let text = stdout(&table);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].contains("BASE %") && lines[0].contains("EVOLVED %"));
    let cols: Vec<&str> = lines[1].split_whitespace().collect();
    assert_eq!(cols[1], "nearest-neighbor");
    assert_eq!(cols[2], base);
    assert_eq!(std::fs::read_to_string(dir.path().join("tables/report_table.txt")).unwrap(), text);
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("tables/report_table.json")).unwrap()).unwrap();
    assert_eq!(json["rows"].as_array().unwrap().len(), 1);

    let resumed = heurevo(
        &["run", "--config", "run.cfg", "--out", "out1", "--resume", "out1/checkpoints/gen-002.json"],
        dir.path(),
    );
    assert_eq!(resumed.status.code(), Some(0), "{}", String::from_utf8_lossy(&resumed.stderr));
    assert_eq!(std::fs::read_to_string(dir.path().join("out1/report.json")).unwrap(), a);
}

#[test]
fn run_with_missing_instances_fails() {
    let dir = tempfile::tempdir().unwrap();
    write_run_config(dir.path(), "nowhere");
    let o = heurevo(&["run", "--config", "run.cfg", "--out", "out"], dir.path());
    assert_ne!(o.status.code(), Some(0));
    assert!(!dir.path().join("out/report.json").exists());
    let o = heurevo(&["run"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn report_rejects_malformed_input() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.json"), "{\"format\": 1}").unwrap();
    let o = heurevo(&["report", "bad.json"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(!dir.path().join("report_table.txt").exists());
}
