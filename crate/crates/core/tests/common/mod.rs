#![allow(dead_code)]

use std::path::{Path, PathBuf};

use heurevo::heuristics::SeedHeuristic;
use heurevo::instances::{random_euclidean, write_tsplib, Rounding, TspInstance, SIDECAR_FILE};
use heurevo::llm::MockScript;
use heurevo::oracles::held_karp;
use heurevo::orchestrator::{BackendKind, RunConfig};
use heurevo::seeds::seed_source;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Relative error written out independently of the library.
pub fn rel(a: f64, o: f64) -> f64 {
    (a - o) / o * 100.0
}

fn cycle(inst: &TspInstance, tour: &[usize]) -> f64 {
    let n = tour.len();
    (0..n).map(|k| inst.matrix[tour[k]][tour[(k + 1) % n]]).sum()
}

/// Mean relative error of a native seed heuristic over `set`.
pub fn native_mean_error(set: &[TspInstance], h: SeedHeuristic) -> f64 {
    let errs: Vec<f64> = set
        .iter()
        .map(|i| {
            let tour = h.solve_tsp(i).expect("tsp heuristic");
            rel(cycle(i, &tour.0), i.known_optimal.expect("optimum"))
        })
        .collect();
    errs.iter().sum::<f64>() / errs.len() as f64
}

/// Five small Euclidean instances with exact optima, chosen so that
/// nearest-neighbor is strictly worse than 2-opt on average.
pub fn tsp_fixture() -> Vec<TspInstance> {
    for attempt in 0u64.. {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + attempt);
        let set: Vec<TspInstance> = (0..5)
            .map(|k| {
                let mut t = random_euclidean(format!("rnd{k}"), 8 + k, 100.0, Rounding::NearestInteger, &mut rng);
                t.known_optimal = Some(held_karp(&t).unwrap().optimal_value);
                t
            })
            .collect();
        let nn = native_mean_error(&set, SeedHeuristic::NearestNeighbor);
        let two = native_mean_error(&set, SeedHeuristic::TwoOpt);
        if nn > two && two > 0.0 {
            return set;
        }
    }
    unreachable!()
}

pub fn write_set(dir: &Path, set: &[TspInstance]) -> PathBuf {
    std::fs::create_dir_all(dir).unwrap();
    let mut sidecar = String::new();
    for t in set {
        std::fs::write(dir.join(format!("{}.tsp", t.name)), write_tsplib(t)).unwrap();
        sidecar.push_str(&format!("{} {:?}\n", t.name, t.known_optimal.unwrap()));
    }
    std::fs::write(dir.join(SIDECAR_FILE), sidecar).unwrap();
    dir.to_path_buf()
}

pub const EVOLVED_PROMPT: &str = "Improve the tour construction program.\n\n{{protocol}}\n\n\
{{strategy_directive}}\n\n{{parent_source}}\n\n{{diagnostics}}\n\n{{experience_summary}}";

/// Answers every generation request with the nearest-neighbor seed and
/// every prompt revision with a fixed prompt.
pub fn nn_script() -> MockScript {
    let mut s = MockScript::default();
    s.repeat.insert(
        "generate".into(),
        format!("```python\n{}\n```", seed_source(SeedHeuristic::NearestNeighbor)),
    );
    s.repeat.insert("evolve-prompt".into(), format!("```\n{EVOLVED_PROMPT}\n```"));
    s
}

pub fn write_script(path: &Path, script: &MockScript) -> PathBuf {
    std::fs::write(path, serde_json::to_string_pretty(script).unwrap()).unwrap();
    path.to_path_buf()
}

pub fn mock_config(instances: &Path, script: &Path, iterations: u32) -> RunConfig {
    let mut cfg = RunConfig {
        instances: instances.to_path_buf(),
        seeds: vec![SeedHeuristic::NearestNeighbor],
        iterations,
        backend: BackendKind::Mock,
        mock_script: Some(script.to_path_buf()),
        rng_seed: 7,
        ..RunConfig::default()
    };
    cfg.runner.timeout = std::time::Duration::from_secs(30);
    cfg
}

/// Python program that reuses a seed but differs textually.
pub fn variant(h: SeedHeuristic, tag: &str) -> String {
    format!("# variant {tag}\n{}", seed_source(h))
}
