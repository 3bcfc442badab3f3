//! Append-only record of generation outcomes and its distillation into
//! summaries that feed strategy sampling and prompt evolution.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::evaluator::{CandidateId, FailureClass};

/// Default number of trailing generations covered by a summary.
pub const DEFAULT_WINDOW: u32 = 5;

/// Additive smoothing weight and prior mean for strategy statistics.
pub const SMOOTHING_WEIGHT: f64 = 1.0;
pub const SMOOTHING_PRIOR: f64 = 0.0;

#[derive(Debug, Error)]
pub enum ExperienceError {
    #[error("record references unknown candidate {0}")]
    Dangling(CandidateId),
    #[error("experience log: {0}")]
    Io(#[from] std::io::Error),
    #[error("experience log line {line}: {source}")]
    Parse {
        line: usize,
        source: serde_json::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Outcome {
    /// `delta` = parent error − child error, in percentage points.
    Improved { delta: f64 },
    NoImprovement { delta: f64 },
    Failure { class: FailureClass },
}

impl Outcome {
    pub fn from_errors(parent_error: f64, child_error: f64) -> Self {
        let delta = parent_error - child_error;
        if delta > 0.0 {
            Outcome::Improved { delta }
        } else {
            Outcome::NoImprovement { delta }
        }
    }

    pub fn delta(&self) -> Option<f64> {
        match self {
            Outcome::Improved { delta } | Outcome::NoImprovement { delta } => Some(*delta),
            Outcome::Failure { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperienceRecord {
    pub generation: u32,
    pub island: usize,
    pub parent_id: CandidateId,
    pub child_id: CandidateId,
    pub strategy_used: String,
    pub prompt_version: usize,
    pub outcome: Outcome,
    /// Child mean relative error when it was scored.
    #[serde(default)]
    pub child_error: Option<f64>,
    #[serde(default)]
    pub diagnostic: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct StrategyStat {
    pub attempts: u32,
    pub total_delta: f64,
    pub smoothed_mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategySummary {
    pub strategy: String,
    pub attempts: u32,
    pub successes: u32,
    pub failures: u32,
    /// Mean delta over scored offspring; 0 when none were scored.
    pub mean_improvement: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureDigest {
    pub class: FailureClass,
    pub count: u32,
    pub example: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopSketch {
    pub id: CandidateId,
    pub error: f64,
    /// Strategies along the recorded ancestry, oldest first.
    pub lineage: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct ExperienceSummary {
    pub window: Option<(u32, u32)>,
    pub strategies: Vec<StrategySummary>,
    pub failures: Vec<FailureDigest>,
    pub top: Option<TopSketch>,
}

/// Excerpt length kept in failure digests.
const DIGEST_EXCERPT: usize = 400;

impl ExperienceSummary {
    pub fn is_empty(&self) -> bool {
        self.window.is_none()
    }

    pub fn strategy(&self, name: &str) -> Option<&StrategySummary> {
        self.strategies.iter().find(|s| s.strategy == name)
    }

    /// Fixed-template rendering used inside prompts.
    pub fn render(&self) -> String {
        let Some((lo, hi)) = self.window else {
            return "No offspring have been evaluated yet.".to_string();
        };
        let mut out = String::new();
        let _ = writeln!(out, "Generations {lo}-{hi}:");
        for s in &self.strategies {
            let _ = writeln!(
                out,
                "- {}: {} attempts, {} improved, {} failed, mean improvement {:.2}%",
                s.strategy, s.attempts, s.successes, s.failures, s.mean_improvement
            );
        }
        if !self.failures.is_empty() {
            let _ = writeln!(out, "Recent failures:");
            for f in &self.failures {
                let excerpt = f.example.lines().last().unwrap_or("").trim();
                let _ = writeln!(out, "- {} x{}: {}", f.class, f.count, excerpt);
            }
        }
        if let Some(top) = &self.top {
            let path = if top.lineage.is_empty() {
                "seed".to_string()
            } else {
                top.lineage.join(" -> ")
            };
            let _ = writeln!(out, "Best recent offspring {} at {:.2}% via {}", top.id, top.error, path);
        }
        out.trim_end().to_string()
    }
}

/// Append-only store; optionally mirrored to a newline-delimited log file.
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct ExperienceStore {
    records: Vec<ExperienceRecord>,
    known: BTreeSet<CandidateId>,
    #[serde(skip)]
    log_path: Option<PathBuf>,
}

impl ExperienceStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Mirrors every future append to `path`, first rewriting it with the
    /// records already held.
    pub fn attach_log(&mut self, path: impl Into<PathBuf>) -> Result<(), ExperienceError> {
        let path = path.into();
        let mut f = File::create(&path)?;
        for r in &self.records {
            writeln!(f, "{}", serde_json::to_string(r).expect("records serialize"))?;
        }
        self.log_path = Some(path);
        Ok(())
    }

    /// Declares a candidate as referenceable.
    pub fn register(&mut self, id: CandidateId) {
        self.known.insert(id);
    }

    pub fn is_known(&self, id: CandidateId) -> bool {
        self.known.contains(&id)
    }

    pub fn record(&mut self, rec: ExperienceRecord) -> Result<(), ExperienceError> {
        for id in [rec.parent_id, rec.child_id] {
            if !self.known.contains(&id) {
                return Err(ExperienceError::Dangling(id));
            }
        }
        if let Some(path) = &self.log_path {
            let mut f = OpenOptions::new().append(true).create(true).open(path)?;
            writeln!(f, "{}", serde_json::to_string(&rec).expect("records serialize"))?;
        }
        self.records.push(rec);
        Ok(())
    }

    pub fn records(&self) -> &[ExperienceRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Smoothed mean per strategy over the whole store; failures count as
    /// zero-delta attempts.
    pub fn strategy_stats(&self) -> BTreeMap<String, StrategyStat> {
        let mut stats: BTreeMap<String, StrategyStat> = BTreeMap::new();
        for r in &self.records {
            let s = stats.entry(r.strategy_used.clone()).or_default();
            s.attempts += 1;
            s.total_delta += r.outcome.delta().unwrap_or(0.0);
        }
        for s in stats.values_mut() {
            s.smoothed_mean = smoothed_mean(s.total_delta, s.attempts);
        }
        stats
    }

    pub fn summarize(&self, window: u32) -> ExperienceSummary {
        let Some(last) = self.records.iter().map(|r| r.generation).max() else {
            return ExperienceSummary::default();
        };
        let first = last.saturating_sub(window.max(1) - 1);
        let recent: Vec<&ExperienceRecord> = self
            .records
            .iter()
            .filter(|r| r.generation >= first && r.generation <= last)
            .collect();

        #[derive(Default)]
        struct Acc {
            attempts: u32,
            successes: u32,
            failures: u32,
            deltas: Vec<f64>,
        }
        let mut per: BTreeMap<&str, Acc> = BTreeMap::new();
        let mut fails: BTreeMap<FailureClass, (u32, String)> = BTreeMap::new();
        for r in &recent {
            let a = per.entry(&r.strategy_used).or_default();
            a.attempts += 1;
            match &r.outcome {
                Outcome::Improved { delta } => {
                    a.successes += 1;
                    a.deltas.push(*delta);
                }
                Outcome::NoImprovement { delta } => a.deltas.push(*delta),
                Outcome::Failure { class } => {
                    a.failures += 1;
                    let e = fails.entry(*class).or_insert((0, String::new()));
                    e.0 += 1;
                    // keep the most recent diagnostic as the representative
                    e.1 = excerpt(&r.diagnostic);
                }
            }
        }
        let strategies = per
            .into_iter()
            .map(|(name, a)| StrategySummary {
                strategy: name.to_string(),
                attempts: a.attempts,
                successes: a.successes,
                failures: a.failures,
                mean_improvement: if a.deltas.is_empty() {
                    0.0
                } else {
                    a.deltas.iter().sum::<f64>() / a.deltas.len() as f64
                },
            })
            .collect();
        let failures = fails
            .into_iter()
            .map(|(class, (count, example))| FailureDigest { class, count, example })
            .collect();
        let top = recent
            .iter()
            .filter_map(|r| r.child_error.map(|e| (e, *r)))
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.child_id.cmp(&b.1.child_id)))
            .map(|(error, r)| TopSketch {
                id: r.child_id,
                error,
                lineage: self.lineage_of(r.child_id),
            });
        ExperienceSummary {
            window: Some((first, last)),
            strategies,
            failures,
            top,
        }
    }

    fn lineage_of(&self, id: CandidateId) -> Vec<String> {
        let by_child: BTreeMap<CandidateId, &ExperienceRecord> =
            self.records.iter().map(|r| (r.child_id, r)).collect();
        let mut chain = Vec::new();
        let mut cur = id;
        while let Some(r) = by_child.get(&cur) {
            chain.push(r.strategy_used.clone());
            if chain.len() > self.records.len() {
                break;
            }
            cur = r.parent_id;
        }
        chain.reverse();
        chain
    }
}

pub fn smoothed_mean(total_delta: f64, attempts: u32) -> f64 {
    (total_delta + SMOOTHING_WEIGHT * SMOOTHING_PRIOR) / (attempts as f64 + SMOOTHING_WEIGHT)
}

fn excerpt(text: &str) -> String {
    crate::evaluator::truncate_tail(text.trim(), DIGEST_EXCERPT)
}

/// Reads a newline-delimited experience log.
pub fn read_log(path: &Path) -> Result<Vec<ExperienceRecord>, ExperienceError> {
    let f = File::open(path)?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line).map_err(|source| ExperienceError::Parse { line: i + 1, source })?,
        );
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(gen: u32, child: u64, strategy: &str, outcome: Outcome) -> ExperienceRecord {
        ExperienceRecord {
            generation: gen,
            island: 0,
            parent_id: CandidateId(0),
            child_id: CandidateId(child),
            strategy_used: strategy.into(),
            prompt_version: 0,
            child_error: outcome.delta().map(|d| 10.0 - d),
            outcome,
            diagnostic: String::new(),
        }
    }

    fn store_with(ids: impl IntoIterator<Item = u64>) -> ExperienceStore {
        let mut s = ExperienceStore::new();
        s.register(CandidateId(0));
        for i in ids {
            s.register(CandidateId(i));
        }
        s
    }

    #[test]
    fn append_and_read_back() {
        let mut s = store_with([1, 2]);
        let a = rec(1, 1, "parameter-modification", Outcome::Improved { delta: 3.0 });
        let b = rec(1, 2, "complete-rewrite", Outcome::Failure { class: FailureClass::Timeout });
        s.record(a.clone()).unwrap();
        s.record(b.clone()).unwrap();
        assert_eq!(s.records(), &[a, b]);
    }

    #[test]
    fn dangling_reference_is_rejected() {
        let mut s = store_with([1]);
        let err = s.record(rec(1, 9, "x", Outcome::NoImprovement { delta: 0.0 })).unwrap_err();
        assert!(matches!(err, ExperienceError::Dangling(CandidateId(9))));
        assert!(s.is_empty());
    }

    #[test]
    fn summaries() {
        let s = ExperienceStore::new();
        let sum = s.summarize(DEFAULT_WINDOW);
        assert!(sum.is_empty());
        assert!(sum.strategies.is_empty());

        let mut s = store_with([1]);
        s.record(rec(1, 1, "parameter-modification", Outcome::Improved { delta: 3.0 })).unwrap();
        let p = s.summarize(DEFAULT_WINDOW);
        let p = p.strategy("parameter-modification").unwrap();
        assert_eq!((p.attempts, p.successes, p.mean_improvement), (1, 1, 3.0));

        let mut s = store_with([1, 2, 3]);
        s.record(rec(1, 1, "a", Outcome::Improved { delta: 2.0 })).unwrap();
        s.record(rec(1, 2, "a", Outcome::Improved { delta: 4.0 })).unwrap();
        s.record(rec(1, 3, "b", Outcome::NoImprovement { delta: -1.0 })).unwrap();
        let sum = s.summarize(DEFAULT_WINDOW);
        assert_eq!(sum.strategy("a").unwrap().mean_improvement, 3.0);
        assert_eq!(sum.strategy("b").unwrap().mean_improvement, -1.0);
        assert_eq!(sum.top.as_ref().unwrap().id, CandidateId(2));
        assert_eq!(sum, s.summarize(DEFAULT_WINDOW));
    }

    #[test]
    fn window_drops_old_generations() {
        let mut s = store_with(1..=10);
        for g in 1..=10u32 {
            s.record(rec(g, g as u64, "a", Outcome::NoImprovement { delta: 0.0 })).unwrap();
        }
        let sum = s.summarize(3);
        assert_eq!(sum.window, Some((8, 10)));
        assert_eq!(sum.strategy("a").unwrap().attempts, 3);
    }

    #[test]
    fn smoothing() {
        let mut s = store_with([1, 2]);
        assert!(s.strategy_stats().is_empty());
        s.record(rec(1, 1, "a", Outcome::Improved { delta: 4.0 })).unwrap();
        assert_eq!(s.strategy_stats()["a"].smoothed_mean, 2.0);
        s.record(rec(1, 2, "a", Outcome::Failure { class: FailureClass::Timeout })).unwrap();
        let st = s.strategy_stats()["a"];
        assert_eq!(st.attempts, 2);
        assert!((st.smoothed_mean - 4.0 / 3.0).abs() < 1e-12);
        let d = 2.5;
        let big = smoothed_mean(d * 1e6, 1_000_000);
        assert!((big - d).abs() < 1e-5);
        assert_eq!(smoothed_mean(0.0, 0), 0.0);
    }

    #[test]
    fn log_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("exp.ndjson");
        let mut s = store_with([1, 2]);
        s.record(rec(1, 1, "a", Outcome::Improved { delta: 1.5 })).unwrap();
        s.attach_log(&path).unwrap();
        s.record(rec(2, 2, "b", Outcome::Failure { class: FailureClass::InvalidOutput })).unwrap();
        assert_eq!(read_log(&path).unwrap(), s.records());
    }

    #[test]
    fn rendering_is_stable() {
        let mut s = store_with([1, 2]);
        s.record(rec(1, 1, "a", Outcome::Improved { delta: 1.5 })).unwrap();
        let mut f = rec(1, 2, "b", Outcome::Failure { class: FailureClass::StartFailure });
        f.diagnostic = "Traceback\nNameError: boom".into();
        s.record(f).unwrap();
        let text = s.summarize(5).render();
        assert!(text.contains("- a: 1 attempts, 1 improved, 0 failed, mean improvement 1.50%"));
        assert!(text.contains("NameError: boom"));
        assert_eq!(text, s.summarize(5).render());
    }
}
