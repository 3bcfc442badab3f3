//! Acceptance suite: one line per criterion, PASS or FAIL with its runtime.

mod common;

use std::collections::BTreeMap;
use std::panic;
use std::time::{Duration, Instant};

use heurevo::archive::{
    archive_insert, migrate, Descriptor, EvolutionState, InsertOutcome, IslandArchive, MigrationConfig,
};
use heurevo::evaluator::{Candidate, CandidateId};
use heurevo::experience::{smoothed_mean, StrategyStat};
use heurevo::heuristics::{christofides, fit_packing, two_opt, FitPolicy, SeedHeuristic, Tour};
use heurevo::instances::{random_bpp, random_euclidean, BppInstance, Rounding, TspInstance};
use heurevo::llm::MockScript;
use heurevo::oracles::{brute_force_tsp, exact_bpp, held_karp, relative_error};
use heurevo::orchestrator::{self, RunReport};
use heurevo::promptevo::{sample_strategy, strategy_pool};
use heurevo::seeds::seed_source;
use proptest::prelude::*;
use proptest::test_runner::{Config as PropConfig, TestRunner};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn cycle(inst: &TspInstance, tour: &[usize]) -> f64 {
    let n = tour.len();
    (0..n).map(|k| inst.matrix[tour[k]][tour[(k + 1) % n]]).sum()
}

fn is_permutation(tour: &[usize], n: usize) -> bool {
    let mut seen = vec![false; n];
    tour.len() == n && tour.iter().all(|&v| v < n && !std::mem::replace(&mut seen[v], true))
}

fn c01_metric_exactness() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..1000 {
        let o: f64 = rng.gen_range(1e-3..1e6);
        let a: f64 = o * rng.gen_range(0.5..3.0);
        let direct = (a - o) / o * 100.0;
        let got = relative_error(a, o).unwrap();
        let scale = direct.abs().max(1.0);
        assert!((got - direct).abs() <= 1e-12 * scale, "a={a} o={o}: {got} vs {direct}");
    }
}

fn c02_oracle_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for k in 0..200 {
        let n = rng.gen_range(4..=8);
        let rounding = if k % 2 == 0 { Rounding::Exact } else { Rounding::NearestInteger };
        let t = random_euclidean("r", n, 100.0, rounding, &mut rng);
        let hk = held_karp(&t).unwrap();
        let bf = brute_force_tsp(&t).unwrap();
        assert_eq!(hk.optimal_value, bf.optimal_value, "instance {k}, n={n}");
    }
}

fn c03_christofides_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for k in 0..100 {
        let n = rng.gen_range(6..=14);
        let t = random_euclidean("r", n, 100.0, Rounding::Exact, &mut rng);
        let tour = christofides(&t);
        assert!(is_permutation(&tour.0, n));
        let opt = held_karp(&t).unwrap().optimal_value;
        let ratio = cycle(&t, &tour.0) / opt;
        worst = worst.max(ratio);
        assert!(ratio <= 1.5 * (1.0 + 1e-12), "instance {k}: ratio {ratio}");
    }
    println!("    worst christofides ratio {worst:.4}");
}

fn c04_two_opt_local_optimality() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for k in 0..100 {
        let n = rng.gen_range(8..=30);
        let t = random_euclidean("r", n, 100.0, Rounding::Exact, &mut rng);
        let mut start: Vec<usize> = (0..n).collect();
        start.shuffle(&mut rng);
        let before = cycle(&t, &start);
        let out = two_opt(&t, &Tour(start));
        assert!(is_permutation(&out.0, n));
        let len = cycle(&t, &out.0);
        assert!(len <= before + 1e-9, "instance {k}: grew from {before} to {len}");
        for i in 0..n - 1 {
            for j in i + 1..n {
                let mut cand = out.0.clone();
                cand[i..=j].reverse();
                let l2 = cycle(&t, &cand);
                assert!(l2 >= len - 1e-9, "instance {k}: reversing {i}..={j} improves {len} to {l2}");
            }
        }
    }
}

fn valid_packing(b: &BppInstance, bins: &[Vec<usize>]) -> bool {
    let mut seen = vec![false; b.sizes.len()];
    for bin in bins {
        if bin.is_empty() {
            return false;
        }
        let mut load = 0.0;
        for &i in bin {
            if i >= seen.len() || std::mem::replace(&mut seen[i], true) {
                return false;
            }
            load += b.sizes[i];
        }
        if load > b.capacity * (1.0 + 1e-9) {
            return false;
        }
    }
    seen.iter().all(|&s| s)
}

fn c05_bpp_validity_and_bounds() {
    let policies = [FitPolicy::First, FitPolicy::Best, FitPolicy::Next, FitPolicy::Worst];
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for k in 0..500 {
        let n = rng.gen_range(1..=50);
        let cap = rng.gen_range(10..=150);
        let b = random_bpp("r", n, cap, &mut rng);
        let lower = (b.sizes.iter().sum::<f64>() / b.capacity).ceil() as usize;
        for p in policies {
            let packing = fit_packing(&b, p);
            assert!(valid_packing(&b, &packing.0), "instance {k} {p:?}");
            let used = packing.0.len();
            assert!(lower <= used && used <= n, "instance {k} {p:?}: {used} bins outside [{lower}, {n}]");
        }
    }
    let mut ff_optimal = 0;
    for k in 0..100 {
        let n = rng.gen_range(1..=14);
        let cap = rng.gen_range(10..=150);
        let b = random_bpp("r", n, cap, &mut rng);
        let opt = exact_bpp(&b).unwrap().optimal_value as usize;
        for p in policies {
            let used = fit_packing(&b, p).0.len();
            assert!(used >= opt, "instance {k} {p:?}: {used} bins beat the optimum {opt}");
        }
        if fit_packing(&b, FitPolicy::First).0.len() == opt {
            ff_optimal += 1;
        }
    }
    println!("    first-fit optimal on {ff_optimal}/100");
    assert!(ff_optimal >= 50);
}

fn cand(id: u64, perf: f64, cell: Descriptor, island: usize) -> Candidate {
    let mut c = Candidate::seed(CandidateId(id), format!("# {id}"), "python", island);
    c.descriptor = Some(cell);
    c.performance = Some(perf);
    c
}

fn insertion_strategy() -> impl Strategy<Value = Vec<(usize, usize, i32)>> {
    prop::collection::vec((0usize..3, 0usize..2, -6i32..=0), 1..30)
}

fn c06_archive_law() {
    let mut runner = TestRunner::new(PropConfig {
        cases: 10_000,
        failure_persistence: None,
        ..PropConfig::default()
    });
    runner
        .run(&insertion_strategy(), |seq| {
            let mut isl = IslandArchive::new(0);
            let mut best: BTreeMap<Descriptor, f64> = BTreeMap::new();
            for (k, (pb, cb, perf)) in seq.into_iter().enumerate() {
                let d = Descriptor { performance_bin: pb, complexity_bin: cb };
                let perf = f64::from(perf);
                let before = isl.get(&d).cloned();
                let outcome = archive_insert(&mut isl, cand(k as u64, perf, d, 0)).unwrap();
                let after = isl.get(&d).unwrap();
                match before {
                    None => prop_assert_eq!(outcome, InsertOutcome::AcceptedNew),
                    Some(old) => {
                        let old_perf = old.performance.unwrap();
                        if perf >= old_perf {
                            prop_assert_eq!(outcome, InsertOutcome::Replaced);
                            prop_assert_eq!(after.id, CandidateId(k as u64));
                        } else {
                            prop_assert_eq!(outcome, InsertOutcome::Rejected);
                            prop_assert_eq!(after, &old);
                        }
                    }
                }
                let stored = after.performance.unwrap();
                let prev = best.insert(d, stored);
                prop_assert!(prev.map_or(true, |p| stored >= p));
            }
            prop_assert_eq!(IslandArchive::replay(0, &isl.log).unwrap(), isl);
            Ok(())
        })
        .unwrap();
}

fn c07_migration_safety() {
    let mut runner = TestRunner::new(PropConfig {
        cases: 1000,
        failure_persistence: None,
        ..PropConfig::default()
    });
    let states = (insertion_strategy(), insertion_strategy(), 1usize..3);
    runner
        .run(&states, |(a, b, migrants)| {
            let mut state = EvolutionState::new(2, ChaCha8Rng::seed_from_u64(0));
            let mut id = 0;
            for (island, seq) in [(0, a), (1, b)] {
                for (pb, cb, perf) in seq {
                    let d = Descriptor { performance_bin: pb, complexity_bin: cb };
                    state.insert(cand(id, f64::from(perf), d, island)).unwrap();
                    id += 1;
                }
            }
            let before: Vec<BTreeMap<Descriptor, f64>> = state
                .islands
                .iter()
                .map(|i| i.cells.iter().map(|(d, c)| (*d, c.performance.unwrap())).collect())
                .collect();
            migrate(&mut state, &MigrationConfig { interval: 4, migrants });
            for (isl, old) in state.islands.iter().zip(&before) {
                for (d, p) in old {
                    let now = isl.get(d).and_then(|c| c.performance);
                    prop_assert!(now.is_some_and(|n| n >= *p), "cell {:?} fell from {} to {:?}", d, p, now);
                }
            }
            Ok(())
        })
        .unwrap();
}

struct Fixture {
    _dir: tempfile::TempDir,
    root: std::path::PathBuf,
    instances: std::path::PathBuf,
    set: Vec<TspInstance>,
}

fn fixture() -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().to_path_buf();
    let set = common::tsp_fixture();
    let instances = common::write_set(&root.join("instances"), &set);
    Fixture { _dir: dir, root, instances, set }
}

fn fenced(src: &str) -> String {
    format!("Here is the program.\n```python\n{src}\n```\n")
}

fn busy_script() -> MockScript {
    let mut s = common::nn_script();
    let put = |s: &mut MockScript, tag: &str, text: String| {
        s.keyed.insert(tag.to_string(), vec![text]);
    };
    put(&mut s, "generate/g2/i1", fenced(seed_source(SeedHeuristic::NearestInsertion)));
    put(&mut s, "generate/g3/i2", fenced("import sys\nprint('not json')"));
    put(&mut s, "generate/g5/i3", fenced(seed_source(SeedHeuristic::TwoOpt)));
    put(&mut s, "generate/g7/i0", fenced(seed_source(SeedHeuristic::Christofides)));
    put(&mut s, "generate/g9/i4", fenced("def broken(:\n    pass"));
    put(&mut s, "generate/g11/i1", fenced(seed_source(SeedHeuristic::FarthestInsertion)));
    s
}

fn no_wall_clock(report: &RunReport) -> String {
    let text = report.to_json();
    assert!(!text.contains("wall") && !text.contains("latency"));
    text
}

fn c08_determinism() {
    let fx = fixture();
    let script = common::write_script(&fx.root.join("script.json"), &busy_script());
    let run = |name: &str| {
        let mut cfg = common::mock_config(&fx.instances, &script, 20);
        cfg.out = Some(fx.root.join(name));
        orchestrator::run(cfg).unwrap()
    };
    let a = run("a");
    let b = run("b");
    assert_eq!(a.trace.len(), 20);
    assert_eq!(a.islands, 5);
    assert_eq!(no_wall_clock(&a), no_wall_clock(&b));
    let on_disk = std::fs::read_to_string(fx.root.join("a").join(orchestrator::REPORT_FILE)).unwrap();
    assert_eq!(on_disk, a.to_json());
    let log = |name: &str| std::fs::read_to_string(fx.root.join(name).join(orchestrator::EXPERIENCE_FILE)).unwrap();
    assert_eq!(log("a"), log("b"));
}

fn c09_loop_efficacy() {
    let fx = fixture();
    // derived beforehand from the native heuristics and exact optima
    let nn_error = common::native_mean_error(&fx.set, SeedHeuristic::NearestNeighbor);
    let two_opt_error = common::native_mean_error(&fx.set, SeedHeuristic::TwoOpt);
    assert!(nn_error > two_opt_error);

    let mut script = common::nn_script();
    script
        .keyed
        .insert("generate/g3/i0".into(), vec![fenced(seed_source(SeedHeuristic::TwoOpt))]);
    let script = common::write_script(&fx.root.join("script.json"), &script);
    let mut cfg = common::mock_config(&fx.instances, &script, 20);
    cfg.out = Some(fx.root.join("run"));
    let report = orchestrator::run(cfg).unwrap();

    assert_eq!(report.base_error, nn_error);
    let trace: Vec<f64> = report.trace.iter().map(|p| p.best_error).collect();
    println!("    nn {nn_error:.4}%  2-opt {two_opt_error:.4}%  trace {trace:.2?}");
    assert_eq!(trace[0], nn_error);
    assert_eq!(trace[1], nn_error);
    assert!(trace[2] < trace[1], "no drop at generation 3");
    for w in trace.windows(2) {
        assert!(w[1] <= w[0]);
    }
    assert_eq!(*trace.last().unwrap(), two_opt_error);
    assert_eq!(report.best.error, two_opt_error);
}

fn c10_executable_rate() {
    let fx = fixture();
    let valid = [
        seed_source(SeedHeuristic::NearestNeighbor).to_string(),
        seed_source(SeedHeuristic::TwoOpt).to_string(),
        seed_source(SeedHeuristic::NearestInsertion).to_string(),
        seed_source(SeedHeuristic::FarthestInsertion).to_string(),
        seed_source(SeedHeuristic::RandomInsertion).to_string(),
        seed_source(SeedHeuristic::Christofides).to_string(),
        common::variant(SeedHeuristic::NearestNeighbor, "b"),
    ];
    let invalid = [
        "def broken(:\n    pass".to_string(),
        "print('{\"tour\": [0, 0, 1]}')".to_string(),
        "import sys\nsys.exit(3)".to_string(),
    ];
    let mut sources: Vec<String> = valid.iter().chain(&invalid).cloned().collect();
    sources.shuffle(&mut ChaCha8Rng::seed_from_u64(10));
    let mut script = common::nn_script();
    for (k, src) in sources.iter().enumerate() {
        let tag = format!("generate/g{}/i{}", k / 5 + 1, k % 5);
        script.keyed.insert(tag, vec![fenced(src)]);
    }
    let script = common::write_script(&fx.root.join("script.json"), &script);
    let mut cfg = common::mock_config(&fx.instances, &script, 2);
    cfg.out = Some(fx.root.join("run"));
    let report = orchestrator::run(cfg).unwrap();
    let generated: u32 = report.executable.iter().map(|p| p.generated).sum();
    assert_eq!(generated, 10);
    assert_eq!(report.executable_rate, Some(70.0));
}

fn c11_strategy_sampling() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let empty = BTreeMap::new();
    let mut counts: BTreeMap<&str, u32> = BTreeMap::new();
    for _ in 0..10_000 {
        *counts.entry(sample_strategy(&empty, 1.0, &mut rng).unwrap().name).or_default() += 1;
    }
    assert_eq!(counts.len(), 5);
    let expected = 2000.0;
    let chi2: f64 = counts.values().map(|&c| (f64::from(c) - expected).powi(2) / expected).sum();
    let p = 1.0 - ChiSquared::new(4.0).unwrap().cdf(chi2);
    println!("    uniform counts {counts:?}, chi2 {chi2:.3}, p {p:.3}");
    assert!(p > 0.01);

    let dominant = strategy_pool()[3].name;
    let mut stats = BTreeMap::new();
    stats.insert(
        dominant.to_string(),
        StrategyStat { attempts: 3, total_delta: 12.0, smoothed_mean: smoothed_mean(12.0, 3) },
    );
    let mut counts: BTreeMap<&str, u32> = BTreeMap::new();
    for _ in 0..10_000 {
        *counts.entry(sample_strategy(&stats, 1.0, &mut rng).unwrap().name).or_default() += 1;
    }
    let modal = counts.iter().max_by_key(|(_, &c)| c).unwrap().0;
    assert_eq!(*modal, dominant);
}

fn c12_resume_fidelity() {
    let fx = fixture();
    let script = common::write_script(&fx.root.join("script.json"), &busy_script());
    let mut full = common::mock_config(&fx.instances, &script, 20);
    full.out = Some(fx.root.join("full"));
    let uninterrupted = orchestrator::run(full).unwrap();

    let mut first = common::mock_config(&fx.instances, &script, 10);
    first.out = Some(fx.root.join("split"));
    orchestrator::run(first).unwrap();
    let checkpoint = fx.root.join("split").join("checkpoints").join("gen-010.json");
    let mut rest = common::mock_config(&fx.instances, &script, 20);
    rest.out = Some(fx.root.join("split"));
    let resumed = orchestrator::resume(rest, &checkpoint).unwrap();
    assert_eq!(resumed, uninterrupted);
    assert_eq!(resumed.to_json(), uninterrupted.to_json());
    let log_a = std::fs::read_to_string(fx.root.join("full").join(orchestrator::EXPERIENCE_FILE)).unwrap();
    let log_b = std::fs::read_to_string(fx.root.join("split").join(orchestrator::EXPERIENCE_FILE)).unwrap();
    assert_eq!(log_a.lines().count(), log_b.lines().count());
    for (a, b) in log_a.lines().zip(log_b.lines()) {
        assert_eq!(a, b);
    }
}

fn main() {
    let criteria: [(&str, Duration, fn()); 12] = [
        ("metric exactness", Duration::from_secs(1), c01_metric_exactness),
        ("oracle equivalence", Duration::from_secs(10), c02_oracle_equivalence),
        ("christofides 1.5 bound", Duration::from_secs(60), c03_christofides_bound),
        ("2-opt local optimality", Duration::from_secs(60), c04_two_opt_local_optimality),
        ("bpp validity and bounds", Duration::from_secs(120), c05_bpp_validity_and_bounds),
        ("archive update law", Duration::from_secs(5), c06_archive_law),
        ("migration safety", Duration::from_secs(5), c07_migration_safety),
        ("run determinism", Duration::from_secs(60), c08_determinism),
        ("loop efficacy", Duration::from_secs(60), c09_loop_efficacy),
        ("executable-rate accounting", Duration::from_secs(30), c10_executable_rate),
        ("strategy sampling", Duration::from_secs(5), c11_strategy_sampling),
        ("resume fidelity", Duration::from_secs(60), c12_resume_fidelity),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (k, (name, limit, f)) in criteria.iter().enumerate() {
        let label = format!("criterion {:>2} {name}", k + 1);
        if !filter.is_empty() && !filter.iter().any(|p| label.contains(p.as_str())) {
            continue;
        }
        let started = Instant::now();
        let ok = panic::catch_unwind(f).is_ok();
        let took = started.elapsed();
        let verdict = match (ok, took <= *limit) {
            (true, true) => "PASS",
            (true, false) => "FAIL (too slow)",
            (false, _) => "FAIL",
        };
        if verdict != "PASS" {
            failed += 1;
        }
        println!("{label}: {verdict} in {:.2}s (limit {}s)", took.as_secs_f64(), limit.as_secs());
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
