//! Mutation prompts: the strategy pool, experience-weighted strategy
//! sampling, prompt composition and LLM-driven prompt revision with revert.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::evaluator::{Candidate, EvalReport};
use crate::experience::{ExperienceSummary, StrategyStat};
use crate::instances::ProblemKind;
use crate::llm::{extract_code, LlmBackend, LlmError, RequestParams};

/// Default softmax temperature for strategy sampling.
pub const DEFAULT_TAU: f64 = 1.0;

/// Best-error observations averaged into a switch baseline.
pub const BASELINE_SPAN: usize = 3;

/// Stagnant observations after a switch before it is reverted.
pub const REVERT_AFTER: u32 = 2;

#[derive(Debug, Error)]
pub enum PromptError {
    #[error("sampling temperature must be positive, got {0}")]
    Temperature(f64),
    #[error("unknown strategy `{0}`")]
    UnknownStrategy(String),
    #[error("prompt template {path}: {source}")]
    Template {
        path: String,
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Strategy {
    pub name: &'static str,
    /// 1 is the most conservative, 5 the most exploratory.
    pub rank: u8,
    pub directive: &'static str,
}

const STRATEGIES: [Strategy; 5] = [
    Strategy {
        name: "parameter-modification",
        rank: 1,
        directive: "Keep the algorithm and the code structure unchanged. Adjust only numeric \
            parameters, thresholds, iteration counts, tie-breaking rules or initial conditions \
            to obtain better results.",
    },
    Strategy {
        name: "redundancy-removal",
        rank: 2,
        directive: "Keep the algorithm. Remove computations that do not influence the result, \
            repeated work and dead code, and simplify control flow so the program does the same \
            job faster and more reliably.",
    },
    Strategy {
        name: "structural-modification",
        rank: 3,
        directive: "Keep the core idea but reorganize how it is carried out: change the order \
            of the main steps, the data structures, or add or replace one component such as an \
            initialization or an improvement phase.",
    },
    Strategy {
        name: "heuristic-rewrite",
        rank: 4,
        directive: "Replace the central decision rule with a different, better heuristic for \
            this problem. Reuse the surrounding code where it helps, but the main rule that \
            builds or improves solutions should change.",
    },
    Strategy {
        name: "complete-rewrite",
        rank: 5,
        directive: "Discard the current implementation and write a new program from scratch \
            based on a different algorithmic idea that you expect to perform better on these \
            instances.",
    },
];

/// All five strategies by increasing exploration rank.
pub fn strategy_pool() -> &'static [Strategy; 5] {
    &STRATEGIES
}

pub fn strategy_by_name(name: &str) -> Result<&'static Strategy, PromptError> {
    STRATEGIES
        .iter()
        .find(|s| s.name == name)
        .ok_or_else(|| PromptError::UnknownStrategy(name.to_string()))
}

/// Softmax over smoothed mean improvements; unattempted strategies sit at 0.
pub fn strategy_probabilities(
    stats: &BTreeMap<String, StrategyStat>,
    tau: f64,
) -> Result<[f64; 5], PromptError> {
    if !(tau > 0.0) {
        return Err(PromptError::Temperature(tau));
    }
    let scores: Vec<f64> = STRATEGIES
        .iter()
        .map(|s| stats.get(s.name).map_or(0.0, |st| st.smoothed_mean) / tau)
        .collect();
    let top = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = scores.iter().map(|x| (x - top).exp()).collect();
    let total: f64 = weights.iter().sum();
    let mut p = [0.0; 5];
    for (slot, w) in p.iter_mut().zip(&weights) {
        // floor keeps every strategy reachable even under extreme scores
        *slot = (w / total).max(f64::MIN_POSITIVE);
    }
    Ok(p)
}

pub fn sample_strategy<R: Rng + ?Sized>(
    stats: &BTreeMap<String, StrategyStat>,
    tau: f64,
    rng: &mut R,
) -> Result<&'static Strategy, PromptError> {
    let p = strategy_probabilities(stats, tau)?;
    let u: f64 = rng.gen::<f64>() * p.iter().sum::<f64>();
    let mut acc = 0.0;
    for (s, pi) in STRATEGIES.iter().zip(p) {
        acc += pi;
        if u < acc {
            return Ok(s);
        }
    }
    Ok(&STRATEGIES[4])
}

/// Template texts; built-in copies may be overridden from a directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Templates {
    pub task_tsp: String,
    pub task_bpp: String,
    pub repair: String,
    pub meta: String,
    pub protocol_tsp: String,
    pub protocol_bpp: String,
}

impl Default for Templates {
    fn default() -> Self {
        Self {
            task_tsp: include_str!("../assets/prompts/tsp.txt").into(),
            task_bpp: include_str!("../assets/prompts/bpp.txt").into(),
            repair: include_str!("../assets/prompts/repair.txt").into(),
            meta: include_str!("../assets/prompts/meta.txt").into(),
            protocol_tsp: include_str!("../assets/prompts/protocol_tsp.txt").into(),
            protocol_bpp: include_str!("../assets/prompts/protocol_bpp.txt").into(),
        }
    }
}

impl Templates {
    /// Built-ins, with any of `tsp.txt`, `bpp.txt`, `repair.txt`, `meta.txt`,
    /// `protocol_tsp.txt`, `protocol_bpp.txt` found in `dir` taking precedence.
    pub fn with_overrides(dir: &Path) -> Result<Self, PromptError> {
        let mut t = Self::default();
        for (file, slot) in [
            ("tsp.txt", &mut t.task_tsp),
            ("bpp.txt", &mut t.task_bpp),
            ("repair.txt", &mut t.repair),
            ("meta.txt", &mut t.meta),
            ("protocol_tsp.txt", &mut t.protocol_tsp),
            ("protocol_bpp.txt", &mut t.protocol_bpp),
        ] {
            let path = dir.join(file);
            if path.exists() {
                *slot = std::fs::read_to_string(&path).map_err(|source| PromptError::Template {
                    path: path.display().to_string(),
                    source,
                })?;
            }
        }
        Ok(t)
    }

    pub fn task(&self, kind: ProblemKind) -> &str {
        match kind {
            ProblemKind::Tsp => &self.task_tsp,
            ProblemKind::Bpp => &self.task_bpp,
        }
    }

    pub fn protocol(&self, kind: ProblemKind) -> &str {
        match kind {
            ProblemKind::Tsp => &self.protocol_tsp,
            ProblemKind::Bpp => &self.protocol_bpp,
        }
    }
}

/// Single-pass `{{key}}` substitution; inserted text is never rescanned and
/// unknown placeholders are left as they are.
pub fn fill(template: &str, values: &[(&str, &str)]) -> String {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    while let Some(open) = rest.find("{{") {
        out.push_str(&rest[..open]);
        let after = &rest[open + 2..];
        match after.find("}}") {
            Some(close) => {
                let key = after[..close].trim();
                match values.iter().find(|(k, _)| *k == key) {
                    Some((_, v)) => out.push_str(v),
                    None => out.push_str(&rest[open..open + 2 + close + 2]),
                }
                rest = &after[close + 2..];
            }
            None => {
                out.push_str(&rest[open..]);
                rest = "";
            }
        }
    }
    out.push_str(rest);
    out
}

fn has_placeholder(text: &str, key: &str) -> bool {
    let mut rest = text;
    while let Some(open) = rest.find("{{") {
        let after = &rest[open + 2..];
        let Some(close) = after.find("}}") else { break };
        if after[..close].trim() == key {
            return true;
        }
        rest = &after[close + 2..];
    }
    false
}

/// Fills `template`, appending a labelled section for every value whose
/// placeholder the template lacks.
fn fill_complete(template: &str, values: &[(&str, &str, &str)]) -> String {
    let pairs: Vec<(&str, &str)> = values.iter().map(|(k, _, v)| (*k, *v)).collect();
    let mut out = fill(template, &pairs);
    for (key, label, value) in values {
        if !has_placeholder(template, key) {
            let _ = write!(out, "\n\n## {label}\n{value}");
        }
    }
    out
}

/// Evaluation text shown to the model for the parent program.
pub fn render_diagnostics(report: &EvalReport) -> String {
    let mut out = String::new();
    match report.mean_relative_error {
        Some(mean) => {
            let _ = writeln!(
                out,
                "Valid on all {} instances; mean relative error {:.2}%.",
                report.records.len(),
                mean
            );
            for r in &report.records {
                if let (Some(obj), Some(err)) = (r.objective, r.relative_error) {
                    let _ = writeln!(out, "- {}: objective {}, error {:.2}%", r.instance, obj, err);
                }
            }
        }
        None => {
            let class = report
                .failure_class
                .map_or_else(|| "unknown".to_string(), |c| c.to_string());
            let _ = writeln!(out, "Failure class: {class}");
            let _ = writeln!(out, "{}", report.diagnostic.trim_end());
        }
    }
    out.trim_end().to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptVersion {
    pub id: usize,
    pub text: String,
    pub created_at: u32,
    /// Version this one was derived from.
    pub parent: Option<usize>,
    /// Best-so-far errors observed while this version was current.
    pub outcomes: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "kebab-case")]
pub enum PromptEvent {
    Switch { generation: u32, from: usize, to: usize },
    Reinforced { generation: u32, version: usize },
    Revert { generation: u32, discarded: usize, restored: usize },
    Failed { generation: u32, message: String },
}

/// A pending switch awaiting judgement against its baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub prior: usize,
    pub baseline: f64,
    pub observed: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptState {
    pub task: ProblemKind,
    pub versions: Vec<PromptVersion>,
    pub current: usize,
    pub timeline: Vec<PromptEvent>,
    pub trial: Option<Trial>,
    pub best_history: Vec<f64>,
}

impl PromptState {
    pub fn new(task: ProblemKind, templates: &Templates) -> Self {
        Self {
            task,
            versions: vec![PromptVersion {
                id: 0,
                text: templates.task(task).to_string(),
                created_at: 0,
                parent: None,
                outcomes: Vec::new(),
            }],
            current: 0,
            timeline: Vec::new(),
            trial: None,
            best_history: Vec::new(),
        }
    }

    pub fn current_version(&self) -> &PromptVersion {
        &self.versions[self.current]
    }

    pub fn is_discarded(&self, id: usize) -> bool {
        self.timeline
            .iter()
            .any(|e| matches!(e, PromptEvent::Revert { discarded, .. } if *discarded == id))
    }

    /// Records the best error after a generation and settles a pending
    /// trial: a strict improvement over the baseline keeps the switch, two
    /// observations without one revert it.
    pub fn observe(&mut self, generation: u32, best_error: f64) -> Option<PromptEvent> {
        self.best_history.push(best_error);
        let cur = self.current;
        self.versions[cur].outcomes.push(best_error);
        let trial = self.trial.as_mut()?;
        trial.observed += 1;
        let event = if best_error < trial.baseline {
            PromptEvent::Reinforced {
                generation,
                version: cur,
            }
        } else if trial.observed >= REVERT_AFTER {
            let restored = trial.prior;
            self.current = restored;
            PromptEvent::Revert {
                generation,
                discarded: cur,
                restored,
            }
        } else {
            return None;
        };
        self.trial = None;
        self.timeline.push(event.clone());
        Some(event)
    }

    fn baseline(&self) -> Option<f64> {
        let k = self.best_history.len().min(BASELINE_SPAN);
        if k == 0 {
            return None;
        }
        let tail = &self.best_history[self.best_history.len() - k..];
        Some(tail.iter().sum::<f64>() / k as f64)
    }

    pub fn meta_prompt(&self, templates: &Templates, summary: &ExperienceSummary) -> String {
        let rendered = summary.render();
        fill_complete(
            &templates.meta,
            &[
                ("current_prompt", "Current prompt", &self.current_version().text),
                ("experience_summary", "Experience summary", &rendered),
            ],
        )
    }

    /// Asks the model for a revised prompt. On failure the state keeps its
    /// current version and the failure is logged.
    pub fn evolve(
        &mut self,
        generation: u32,
        summary: &ExperienceSummary,
        llm: &dyn LlmBackend,
        templates: &Templates,
        params: &RequestParams,
        tags: Vec<String>,
    ) -> Result<usize, LlmError> {
        let request = params.request(self.meta_prompt(templates, summary), tags);
        let text = llm.complete(&request).and_then(|r| extract_code(&r.text));
        let text = match text {
            Ok(t) => t,
            Err(e) => {
                self.timeline.push(PromptEvent::Failed {
                    generation,
                    message: e.to_string(),
                });
                return Err(e);
            }
        };
        let from = self.current;
        let id = self.versions.len();
        self.versions.push(PromptVersion {
            id,
            text,
            created_at: generation,
            parent: Some(from),
            outcomes: Vec::new(),
        });
        if self.trial.is_none() {
            if let Some(baseline) = self.baseline() {
                self.trial = Some(Trial {
                    prior: from,
                    baseline,
                    observed: 0,
                });
            }
        }
        self.current = id;
        self.timeline.push(PromptEvent::Switch { generation, from, to: id });
        Ok(id)
    }
}

/// The prompt sent to the model for one offspring. A failed parent gets a
/// repair-only prompt without any strategy section.
pub fn compose_prompt(
    state: &PromptState,
    templates: &Templates,
    strategy: &Strategy,
    parent: &Candidate,
    report: &EvalReport,
    summary: &ExperienceSummary,
) -> String {
    let diagnostics = render_diagnostics(report);
    let protocol = templates.protocol(state.task).trim_end();
    if !report.is_success() {
        return fill_complete(
            &templates.repair,
            &[
                ("protocol", "Protocol", protocol),
                ("parent_source", "Program", &parent.source),
                ("diagnostics", "Error report", &diagnostics),
            ],
        );
    }
    let rendered = summary.render();
    let directive = format!("{} ({})", strategy.directive, strategy.name);
    fill_complete(
        &state.current_version().text,
        &[
            ("protocol", "Protocol", protocol),
            ("strategy_directive", "Strategy", &directive),
            ("parent_source", "Current program", &parent.source),
            ("diagnostics", "Evaluation of the current program", &diagnostics),
            ("experience_summary", "Experience from recent generations", &rendered),
        ],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluator::{CandidateId, FailureClass, InstanceRecord};
    use crate::llm::{MockLlm, MockScript};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ok_report() -> EvalReport {
        EvalReport {
            candidate_id: CandidateId(1),
            records: vec![InstanceRecord {
                instance: "a".into(),
                objective: Some(110.0),
                relative_error: Some(10.0),
                wall_seconds: 0.5,
                failure: None,
            }],
            mean_relative_error: Some(10.0),
            failure_class: None,
            diagnostic: String::new(),
            warnings: Vec::new(),
        }
    }

    fn parent() -> Candidate {
        Candidate::seed(CandidateId(1), "def solve():\n    return {{not_a_key}}\n", "python", 0)
    }

    #[test]
    fn pool_order() {
        let pool = strategy_pool();
        assert_eq!(pool.len(), 5);
        assert_eq!(pool[0].name, "parameter-modification");
        assert_eq!(pool[4].name, "complete-rewrite");
        let ranks: Vec<u8> = pool.iter().map(|s| s.rank).collect();
        assert_eq!(ranks, vec![1, 2, 3, 4, 5]);
        assert!(strategy_by_name("nope").is_err());
    }

    #[test]
    fn probabilities() {
        let empty = BTreeMap::new();
        let p = strategy_probabilities(&empty, 1.0).unwrap();
        assert!(p.iter().all(|&x| (x - 0.2).abs() < 1e-15));
        assert!(strategy_probabilities(&empty, 0.0).is_err());

        let mut stats = BTreeMap::new();
        stats.insert(
            "structural-modification".to_string(),
            StrategyStat { attempts: 1, total_delta: 10.0, smoothed_mean: 5.0 },
        );
        let p = strategy_probabilities(&stats, 1.0).unwrap();
        assert!(p[2] > p[0] && p[2] > p[4]);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let p = strategy_probabilities(&stats, 0.01).unwrap();
        assert!(p.iter().all(|&x| x > 0.0));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            assert_eq!(sample_strategy(&stats, 0.01, &mut rng).unwrap().name, "structural-modification");
        }
    }

    #[test]
    fn substitution_is_single_pass() {
        assert_eq!(fill("a {{x}} b {{y}}", &[("x", "{{y}}"), ("y", "Y")]), "a {{y}} b Y");
        assert_eq!(fill("{{ unknown }} {{", &[]), "{{ unknown }} {{");
    }

    #[test]
    fn composition() {
        let t = Templates::default();
        let state = PromptState::new(ProblemKind::Tsp, &t);
        let s = &strategy_pool()[1];
        let sum = ExperienceSummary::default();
        let text = compose_prompt(&state, &t, s, &parent(), &ok_report(), &sum);
        assert!(text.contains(&parent().source));
        assert_eq!(text.matches(s.directive).count(), 1);
        for other in &strategy_pool()[..] {
            if other.name != s.name {
                assert!(!text.contains(other.directive));
            }
        }
        assert!(text.contains("mean relative error 10.00%"));
        assert!(!text.contains("wall"));
        assert_eq!(text, compose_prompt(&state, &t, s, &parent(), &ok_report(), &sum));

        let failed = EvalReport::not_run(
            CandidateId(1),
            FailureClass::StartFailure,
            "Traceback\nNameError: name 'x' is not defined".into(),
        );
        let text = compose_prompt(&state, &t, s, &parent(), &failed, &sum);
        assert!(text.contains("NameError: name 'x' is not defined"));
        assert!(text.contains(&parent().source));
        assert!(!text.contains("## Strategy"));
        assert!(strategy_pool().iter().all(|x| !text.contains(x.directive)));
    }

    #[test]
    fn evolved_prompt_without_placeholders_still_carries_inputs() {
        let t = Templates::default();
        let mut state = PromptState::new(ProblemKind::Bpp, &t);
        let llm = MockLlm::new(MockScript::sequence(["```\nPack items tightly.\n```"]));
        state
            .evolve(1, &ExperienceSummary::default(), &llm, &t, &RequestParams::default(), vec![])
            .unwrap();
        assert_eq!(state.current_version().text, "Pack items tightly.");
        let s = &strategy_pool()[0];
        let text = compose_prompt(&state, &t, s, &parent(), &ok_report(), &ExperienceSummary::default());
        assert!(text.starts_with("Pack items tightly."));
        assert!(text.contains(&parent().source));
        assert!(text.contains(s.directive));
        assert!(text.contains("\"bins\""));
    }

    #[test]
    fn evolution_and_revert() {
        let t = Templates::default();
        let mut state = PromptState::new(ProblemKind::Tsp, &t);
        let llm = MockLlm::new(MockScript::sequence(["new prompt"]));
        let params = RequestParams::default();
        let sum = ExperienceSummary::default();

        state.observe(1, 10.0);
        let v = state.evolve(1, &sum, &llm, &t, &params, vec![]).unwrap();
        assert_eq!(state.current_version().text, "new prompt");
        assert_eq!(state.versions.len(), 2);
        assert_eq!(v, 1);

        assert_eq!(state.observe(2, 10.0), None);
        let ev = state.observe(3, 10.0).unwrap();
        assert_eq!(ev, PromptEvent::Revert { generation: 3, discarded: 1, restored: 0 });
        assert_eq!(state.current, 0);
        assert_eq!(state.versions.len(), 2);
        assert!(state.is_discarded(1));

        // transport failure leaves the state untouched apart from the log
        let before = state.current;
        assert!(state.evolve(4, &sum, &llm, &t, &params, vec![]).is_err());
        assert_eq!(state.current, before);
        assert_eq!(state.versions.len(), 2);
        assert!(matches!(state.timeline.last(), Some(PromptEvent::Failed { .. })));
    }

    #[test]
    fn improvement_reinforces_a_switch() {
        let t = Templates::default();
        let mut state = PromptState::new(ProblemKind::Tsp, &t);
        let llm = MockLlm::new(MockScript::sequence(["p1"]));
        state.observe(1, 10.0);
        state.observe(2, 8.0);
        state
            .evolve(2, &ExperienceSummary::default(), &llm, &t, &RequestParams::default(), vec![])
            .unwrap();
        // baseline is the mean of 10 and 8
        let ev = state.observe(3, 8.5).unwrap();
        assert_eq!(ev, PromptEvent::Reinforced { generation: 3, version: 1 });
        assert_eq!(state.current, 1);
        assert!(state.trial.is_none());
    }
}
