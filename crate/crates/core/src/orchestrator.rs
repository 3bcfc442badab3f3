//! The generation loop: seed the islands, then repeatedly select, mutate
//! through the LLM, evaluate, record, archive, revise the prompt and migrate.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::thread;
use std::time::Duration;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::archive::{
    descriptor, migrate, select_island, select_parent, ArchiveError, EvolutionState,
    ExplorationSchedule, GridConfig, MigrationConfig, MigrationReport,
};
use crate::evaluator::{evaluate_candidate, Candidate, CandidateId, EvalError, EvalReport, RunnerConfig};
use crate::experience::{ExperienceError, ExperienceRecord, ExperienceStore, Outcome, DEFAULT_WINDOW};
use crate::heuristics::SeedHeuristic;
use crate::instances::{load_benchmark, InstanceError, InstanceSet, ProblemKind};
use crate::llm::{extract_code, LiveConfig, LiveLlm, LlmBackend, LlmError, MockLlm, MockScript, RequestParams};
use crate::promptevo::{compose_prompt, sample_strategy, PromptError, PromptEvent, PromptState, Templates, DEFAULT_TAU};
use crate::seeds::{seed_source, SEED_LANGUAGE};

pub const CHECKPOINT_FORMAT: u32 = 1;
pub const REPORT_FORMAT: u32 = 1;
pub const CHECKPOINT_FILE: &str = "checkpoint.json";
pub const REPORT_FILE: &str = "report.json";
pub const EXPERIENCE_FILE: &str = "experience.ndjson";

#[derive(Debug, Error)]
pub enum RunError {
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Instances(#[from] InstanceError),
    #[error("seed heuristic `{name}` failed evaluation: {reason}")]
    Seed { name: String, reason: String },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Archive(#[from] ArchiveError),
    #[error(transparent)]
    Experience(#[from] ExperienceError),
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl RunError {
    /// Problems with the inputs rather than with the run itself.
    pub fn is_config(&self) -> bool {
        matches!(self, RunError::Config(_) | RunError::Instances(_) | RunError::Prompt(_))
            || matches!(self, RunError::Llm(LlmError::Script(_)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Mock,
    Live,
}

impl FromStr for BackendKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "mock" => Ok(BackendKind::Mock),
            "live" => Ok(BackendKind::Live),
            _ => Err(format!("unknown backend `{s}` (expected mock or live)")),
        }
    }
}

impl fmt::Display for BackendKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BackendKind::Mock => "mock",
            BackendKind::Live => "live",
        })
    }
}

/// Which islands produce an offspring each generation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IslandMode {
    /// Every island, in index order.
    All,
    /// One island drawn uniformly among the non-empty ones.
    One,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: Option<ProblemKind>,
    pub instances: PathBuf,
    pub seeds: Vec<SeedHeuristic>,
    pub iterations: u32,
    pub islands: usize,
    pub migration: MigrationConfig,
    pub runner: RunnerConfig,
    pub rng_seed: u64,
    pub backend: BackendKind,
    pub mock_script: Option<PathBuf>,
    pub live: LiveConfig,
    pub api_key_env: String,
    pub params: RequestParams,
    pub exploration: ExplorationSchedule,
    pub tau: f64,
    pub window: u32,
    /// Prompt revision every this many generations; 0 disables it.
    pub prompt_cadence: u32,
    pub per_island_prompts: bool,
    pub island_mode: IslandMode,
    pub grid: GridConfig,
    pub prompt_dir: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            problem: None,
            instances: PathBuf::new(),
            seeds: Vec::new(),
            iterations: 20,
            islands: 5,
            migration: MigrationConfig::default(),
            runner: RunnerConfig::default(),
            rng_seed: 0,
            backend: BackendKind::Mock,
            mock_script: None,
            live: LiveConfig::default(),
            api_key_env: "HEUREVO_API_KEY".into(),
            params: RequestParams::default(),
            exploration: ExplorationSchedule::default(),
            tau: DEFAULT_TAU,
            window: DEFAULT_WINDOW,
            prompt_cadence: 1,
            per_island_prompts: false,
            island_mode: IslandMode::All,
            grid: GridConfig::default(),
            prompt_dir: None,
            out: None,
        }
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str, line: usize) -> Result<T, RunError>
where
    T::Err: fmt::Display,
{
    value
        .parse()
        .map_err(|e| RunError::Config(format!("line {line}: bad value for `{key}`: {e}")))
}

fn parse_bool(key: &str, value: &str, line: usize) -> Result<bool, RunError> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(RunError::Config(format!("line {line}: `{key}` expects true or false"))),
    }
}

fn parse_seconds(key: &str, value: &str, line: usize) -> Result<Duration, RunError> {
    let s: f64 = parse_value(key, value, line)?;
    Duration::try_from_secs_f64(s)
        .map_err(|_| RunError::Config(format!("line {line}: `{key}` must be a non-negative number of seconds")))
}

impl RunConfig {
    /// Parses `key = value` lines; `#` starts a comment. Relative paths are
    /// resolved against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self, RunError> {
        let mut cfg = Self::default();
        let path = |v: &str| {
            let p = PathBuf::from(v);
            if p.is_absolute() {
                p
            } else {
                base.join(p)
            }
        };
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| RunError::Config(format!("line {line}: expected `key = value`")))?;
            match key {
                "problem" => {
                    cfg.problem = Some(value.parse().map_err(|e| RunError::Config(format!("line {line}: {e}")))?)
                }
                "instances" => cfg.instances = path(value),
                "seeds" | "seed_heuristics" => {
                    cfg.seeds = value
                        .split(',')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(|s| {
                            SeedHeuristic::from_name(s)
                                .ok_or_else(|| RunError::Config(format!("line {line}: unknown seed heuristic `{s}`")))
                        })
                        .collect::<Result<_, _>>()?
                }
                "iterations" => cfg.iterations = parse_value(key, value, line)?,
                "islands" => cfg.islands = parse_value(key, value, line)?,
                "migration_interval" => cfg.migration.interval = parse_value(key, value, line)?,
                "migrants" => cfg.migration.migrants = parse_value(key, value, line)?,
                "timeout" => cfg.runner.timeout = parse_seconds(key, value, line)?,
                "candidate_timeout" => cfg.runner.candidate_timeout = Some(parse_seconds(key, value, line)?),
                "workers" => cfg.runner.workers = parse_value(key, value, line)?,
                "rng_seed" => cfg.rng_seed = parse_value(key, value, line)?,
                "backend" => cfg.backend = value.parse().map_err(|e| RunError::Config(format!("line {line}: {e}")))?,
                "mock_script" => cfg.mock_script = Some(path(value)),
                "endpoint" => cfg.live.endpoint = value.to_string(),
                "model" => cfg.params.model = value.to_string(),
                "api_key_env" => cfg.api_key_env = value.to_string(),
                "llm_timeout" => cfg.live.timeout = parse_seconds(key, value, line)?,
                "retries" => cfg.live.retries = parse_value(key, value, line)?,
                "backoff_ms" => cfg.live.backoff_base = Duration::from_millis(parse_value(key, value, line)?),
                "call_cap" => cfg.live.call_cap = Some(parse_value(key, value, line)?),
                "temperature" => cfg.params.temperature = parse_value(key, value, line)?,
                "top_p" => cfg.params.top_p = parse_value(key, value, line)?,
                "max_tokens" => cfg.params.max_tokens = parse_value(key, value, line)?,
                "tau" => cfg.tau = parse_value(key, value, line)?,
                "window" => cfg.window = parse_value(key, value, line)?,
                "epsilon" => cfg.exploration.base = parse_value(key, value, line)?,
                "epsilon_stagnant" => cfg.exploration.stagnant = parse_value(key, value, line)?,
                "stagnation_window" => cfg.exploration.window = parse_value(key, value, line)?,
                "prompt_cadence" => cfg.prompt_cadence = parse_value(key, value, line)?,
                "per_island_prompts" => cfg.per_island_prompts = parse_bool(key, value, line)?,
                "island_mode" => {
                    cfg.island_mode = match value {
                        "all" => IslandMode::All,
                        "one" => IslandMode::One,
                        _ => return Err(RunError::Config(format!("line {line}: island_mode is `all` or `one`"))),
                    }
                }
                "prompt_dir" => cfg.prompt_dir = Some(path(value)),
                "out" => cfg.out = Some(path(value)),
                _ => return Err(RunError::Config(format!("line {line}: unknown key `{key}`"))),
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, RunError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| RunError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }

    pub fn validate(&self) -> Result<(), RunError> {
        let bad = |m: &str| Err(RunError::Config(m.to_string()));
        if self.iterations < 1 {
            return bad("iterations must be at least 1");
        }
        if self.islands < 1 {
            return bad("islands must be at least 1");
        }
        if self.seeds.is_empty() {
            return bad("at least one seed heuristic is required");
        }
        if self.instances.as_os_str().is_empty() {
            return bad("no instance directory configured");
        }
        if !(self.tau > 0.0) {
            return bad("tau must be positive");
        }
        if self.window < 1 {
            return bad("window must be at least 1");
        }
        for (name, p) in [("epsilon", self.exploration.base), ("epsilon_stagnant", self.exploration.stagnant)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(RunError::Config(format!("{name} must lie in [0, 1]")));
            }
        }
        if self.backend == BackendKind::Mock && self.mock_script.is_none() {
            return bad("the mock backend needs `mock_script`");
        }
        let kinds: Vec<ProblemKind> = self.seeds.iter().map(|s| s.problem()).collect();
        if kinds.iter().any(|k| *k != kinds[0]) || self.problem.is_some_and(|p| p != kinds[0]) {
            return bad("seed heuristics do not match the configured problem");
        }
        self.runner
            .validate()
            .map_err(|e| RunError::Config(e.to_string()))?;
        self.params
            .request("x", Vec::new())
            .validate()
            .map_err(|e| RunError::Config(e.to_string()))?;
        Ok(())
    }

    pub fn problem_kind(&self) -> ProblemKind {
        self.problem.unwrap_or_else(|| self.seeds[0].problem())
    }
}

/// Builds the configured completion backend.
pub fn build_backend(cfg: &RunConfig) -> Result<Box<dyn LlmBackend>, RunError> {
    match cfg.backend {
        BackendKind::Mock => {
            let path = cfg
                .mock_script
                .as_ref()
                .ok_or_else(|| RunError::Config("the mock backend needs `mock_script`".into()))?;
            Ok(Box::new(MockLlm::new(MockScript::load(path)?)))
        }
        BackendKind::Live => {
            let mut live = cfg.live.clone();
            live.model = cfg.params.model.clone();
            live.api_key = std::env::var(&cfg.api_key_env).ok();
            Ok(Box::new(LiveLlm::new(live)))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub generation: u32,
    pub best_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecPoint {
    pub generation: u32,
    pub generated: u32,
    pub executable: u32,
    /// Percent; absent when nothing was generated.
    pub rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Skip {
    pub generation: u32,
    pub island: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimelineEntry {
    pub prompt_state: usize,
    #[serde(flatten)]
    pub event: PromptEvent,
}

/// Report accumulators carried through checkpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Progress {
    pub base_errors: BTreeMap<String, f64>,
    pub trace: Vec<TracePoint>,
    pub executable: Vec<ExecPoint>,
    pub strategy_counts: BTreeMap<String, u32>,
    pub skips: Vec<Skip>,
    pub migrations: Vec<MigrationReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestRecord {
    pub id: CandidateId,
    pub source: String,
    pub error: f64,
    pub strategy: String,
    pub generation: u32,
    pub island: usize,
}

/// Run summary; contains no wall-clock quantities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub format: u32,
    pub problem: ProblemKind,
    pub dataset: String,
    pub instances: usize,
    pub seeds: Vec<String>,
    pub rng_seed: u64,
    pub iterations: u32,
    pub islands: usize,
    /// Best standalone error among the seeds.
    pub base_error: f64,
    pub base_errors: BTreeMap<String, f64>,
    pub best: BestRecord,
    pub trace: Vec<TracePoint>,
    pub strategy_counts: BTreeMap<String, u32>,
    pub executable: Vec<ExecPoint>,
    pub executable_rate: Option<f64>,
    pub prompt_versions: Vec<usize>,
    pub prompt_timeline: Vec<TimelineEntry>,
    pub skips: Vec<Skip>,
    pub migrations: Vec<MigrationReport>,
    pub llm_calls: u64,
    pub experience_records: usize,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Everything needed to continue a run exactly where it stopped.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: u32,
    pub problem: ProblemKind,
    pub islands: usize,
    pub rng_seed: u64,
    pub state: EvolutionState,
    pub experience: ExperienceStore,
    pub prompts: Vec<PromptState>,
    /// Evaluation reports keyed by program source.
    pub cache: BTreeMap<String, EvalReport>,
    pub progress: Progress,
    pub llm: serde_json::Value,
}

/// Per-generation outcome, for callers that step manually.
#[derive(Debug, Clone, PartialEq)]
pub struct StepSummary {
    pub generation: u32,
    pub best_error: f64,
    pub generated: u32,
    pub executable: u32,
    pub skipped: usize,
    pub migrated: bool,
}

struct Offspring {
    child: Candidate,
    parent_error: f64,
    prompt_version: usize,
}

pub struct Orchestrator {
    cfg: RunConfig,
    set: InstanceSet,
    templates: Templates,
    llm: Box<dyn LlmBackend>,
    state: EvolutionState,
    experience: ExperienceStore,
    prompts: Vec<PromptState>,
    cache: BTreeMap<String, EvalReport>,
    progress: Progress,
}

fn load_inputs(cfg: &RunConfig) -> Result<(InstanceSet, Templates), RunError> {
    cfg.validate()?;
    if !cfg.instances.is_dir() {
        return Err(RunError::Config(format!(
            "instance directory {} does not exist",
            cfg.instances.display()
        )));
    }
    let set = load_benchmark(&cfg.instances)?;
    if set.kind != cfg.problem_kind() {
        return Err(RunError::Config(format!(
            "instance set holds {} instances but the run is configured for {}",
            set.kind,
            cfg.problem_kind()
        )));
    }
    if let Some(missing) = set.iter().find(|i| i.known_optimal().is_none()) {
        return Err(RunError::Config(format!("instance `{}` has no known optimum", missing.name())));
    }
    let templates = match &cfg.prompt_dir {
        Some(dir) => Templates::with_overrides(dir)?,
        None => Templates::default(),
    };
    Ok((set, templates))
}

impl Orchestrator {
    /// Seeds every island, evaluating each seed once.
    pub fn init(cfg: RunConfig, llm: Box<dyn LlmBackend>) -> Result<Self, RunError> {
        let (set, templates) = load_inputs(&cfg)?;
        let kind = cfg.problem_kind();
        let n_prompts = if cfg.per_island_prompts { cfg.islands } else { 1 };
        let mut orch = Self {
            prompts: (0..n_prompts).map(|_| PromptState::new(kind, &templates)).collect(),
            state: EvolutionState::new(cfg.islands, ChaCha8Rng::seed_from_u64(cfg.rng_seed)),
            experience: ExperienceStore::new(),
            cache: BTreeMap::new(),
            progress: Progress::default(),
            cfg,
            set,
            templates,
            llm,
        };
        for &seed in &orch.cfg.seeds.clone() {
            let source = seed_source(seed);
            let probe = Candidate::seed(CandidateId(u64::MAX), source, SEED_LANGUAGE, 0);
            let report = evaluate_candidate(&probe, &orch.set, &orch.cfg.runner)?;
            let Some(err) = report.mean_relative_error else {
                return Err(RunError::Seed {
                    name: seed.name().to_string(),
                    reason: report.diagnostic,
                });
            };
            orch.progress.base_errors.insert(seed.name().to_string(), err);
            for island in 0..orch.cfg.islands {
                let mut c = Candidate::seed(orch.state.fresh_id(), source, SEED_LANGUAGE, island);
                c.descriptor = Some(descriptor(&c, &report, &orch.cfg.grid)?);
                c.performance = report.performance();
                orch.experience.register(c.id);
                orch.state.insert(c)?;
            }
            orch.cache.insert(source.to_string(), report);
        }
        orch.state.refresh_best();
        orch.attach_outputs()?;
        Ok(orch)
    }

    /// Continues from a checkpoint written by an earlier run of `cfg`.
    pub fn resume(cfg: RunConfig, checkpoint: &Path, llm: Box<dyn LlmBackend>) -> Result<Self, RunError> {
        let (set, templates) = load_inputs(&cfg)?;
        let text = std::fs::read_to_string(checkpoint)
            .map_err(|e| RunError::Checkpoint(format!("{}: {e}", checkpoint.display())))?;
        let cp: Checkpoint =
            serde_json::from_str(&text).map_err(|e| RunError::Checkpoint(format!("{}: {e}", checkpoint.display())))?;
        if cp.format != CHECKPOINT_FORMAT {
            return Err(RunError::Checkpoint(format!("unsupported format {}", cp.format)));
        }
        if cp.problem != cfg.problem_kind() || cp.islands != cfg.islands || cp.rng_seed != cfg.rng_seed {
            return Err(RunError::Checkpoint(
                "checkpoint was written by a run with a different problem, island count or seed".into(),
            ));
        }
        llm.restore(&cp.llm)?;
        let mut orch = Self {
            cfg,
            set,
            templates,
            llm,
            state: cp.state,
            experience: cp.experience,
            prompts: cp.prompts,
            cache: cp.cache,
            progress: cp.progress,
        };
        orch.attach_outputs()?;
        Ok(orch)
    }

    fn attach_outputs(&mut self) -> Result<(), RunError> {
        if let Some(out) = &self.cfg.out {
            std::fs::create_dir_all(out.join("checkpoints"))?;
            self.experience.attach_log(out.join(EXPERIENCE_FILE))?;
        }
        Ok(())
    }

    pub fn state(&self) -> &EvolutionState {
        &self.state
    }

    pub fn experience(&self) -> &ExperienceStore {
        &self.experience
    }

    pub fn prompts(&self) -> &[PromptState] {
        &self.prompts
    }

    pub fn instances(&self) -> &InstanceSet {
        &self.set
    }

    pub fn llm(&self) -> &dyn LlmBackend {
        self.llm.as_ref()
    }

    pub fn is_done(&self) -> bool {
        self.state.generation >= self.cfg.iterations
    }

    fn prompt_index(&self, island: usize) -> usize {
        if self.cfg.per_island_prompts {
            island
        } else {
            0
        }
    }

    fn report_for(&mut self, candidate: &Candidate) -> Result<EvalReport, RunError> {
        if let Some(r) = self.cache.get(&candidate.source) {
            return Ok(r.clone());
        }
        let r = evaluate_candidate(candidate, &self.set, &self.cfg.runner)?;
        self.cache.insert(candidate.source.clone(), r.clone());
        Ok(r)
    }

    /// One generation across the configured islands.
    pub fn step(&mut self) -> Result<StepSummary, RunError> {
        let g = self.state.generation + 1;
        let summary = self.experience.summarize(self.cfg.window);
        let stats = self.experience.strategy_stats();
        let epsilon = self.cfg.exploration.epsilon(self.state.stagnation);
        let islands: Vec<usize> = match self.cfg.island_mode {
            IslandMode::All => (0..self.cfg.islands).collect(),
            IslandMode::One => vec![select_island(&self.state.islands, &mut self.state.rng)?],
        };

        let mut offspring = Vec::new();
        let mut skipped = 0;
        for &i in &islands {
            let source_island = if self.state.islands[i].is_empty() {
                select_island(&self.state.islands, &mut self.state.rng)?
            } else {
                i
            };
            let parent = select_parent(
                &self.state.islands[source_island],
                &self.state.lineage,
                epsilon,
                &mut self.state.rng,
            )?
            .clone();
            let strategy = sample_strategy(&stats, self.cfg.tau, &mut self.state.rng)?;
            let parent_report = self.report_for(&parent)?;
            let p = self.prompt_index(i);
            let prompt = compose_prompt(&self.prompts[p], &self.templates, strategy, &parent, &parent_report, &summary);
            let tags = vec![format!("generate/g{g}/i{i}"), format!("generate/i{i}"), "generate".to_string()];
            let request = self.cfg.params.request(prompt, tags);
            let code = self.llm.complete(&request).and_then(|r| extract_code(&r.text));
            let source = match code {
                Ok(s) => s,
                Err(e) => {
                    skipped += 1;
                    self.progress.skips.push(Skip {
                        generation: g,
                        island: i,
                        reason: e.to_string(),
                    });
                    continue;
                }
            };
            let child = Candidate {
                id: self.state.fresh_id(),
                source,
                language: parent.language.clone(),
                parent_id: Some(parent.id),
                island: i,
                generation: g,
                strategy_used: strategy.name.to_string(),
                descriptor: None,
                performance: None,
            };
            offspring.push(Offspring {
                child,
                parent_error: parent.mean_error().expect("archived parents are scored"),
                prompt_version: self.prompts[p].current,
            });
        }

        self.evaluate_pending(&offspring)?;

        let mut generated = 0;
        let mut executable = 0;
        for Offspring {
            mut child,
            parent_error,
            prompt_version,
        } in offspring
        {
            let report = self.cache[&child.source].with_candidate(child.id);
            self.experience.register(child.id);
            generated += 1;
            *self.progress.strategy_counts.entry(child.strategy_used.clone()).or_default() += 1;
            let (outcome, child_error) = match report.mean_relative_error {
                Some(err) => {
                    executable += 1;
                    (Outcome::from_errors(parent_error, err), Some(err))
                }
                None => (
                    Outcome::Failure {
                        class: report.failure_class.expect("failed reports carry a class"),
                    },
                    None,
                ),
            };
            let record = ExperienceRecord {
                generation: g,
                island: child.island,
                parent_id: child.parent_id.expect("offspring have parents"),
                child_id: child.id,
                strategy_used: child.strategy_used.clone(),
                prompt_version,
                outcome,
                child_error,
                diagnostic: report.diagnostic.clone(),
            };
            self.experience.record(record)?;
            if child_error.is_some() {
                child.descriptor = Some(descriptor(&child, &report, &self.cfg.grid)?);
                child.performance = report.performance();
                self.state.insert(child)?;
            }
        }

        if self.state.refresh_best() {
            self.state.stagnation = 0;
        } else {
            self.state.stagnation += 1;
        }
        let best_error = self.state.best_error().expect("islands are seeded");

        let summary = self.experience.summarize(self.cfg.window);
        let evolve_now = self.cfg.prompt_cadence > 0 && g % self.cfg.prompt_cadence == 0;
        let per_island = self.cfg.per_island_prompts;
        for (k, ps) in self.prompts.iter_mut().enumerate() {
            ps.observe(g, best_error);
            if evolve_now {
                let mut tags = vec![format!("evolve-prompt/g{g}"), "evolve-prompt".to_string()];
                if per_island {
                    tags.insert(0, format!("evolve-prompt/g{g}/i{k}"));
                }
                // a failed revision is logged in the timeline and the loop goes on
                let _ = ps.evolve(g, &summary, self.llm.as_ref(), &self.templates, &self.cfg.params, tags);
            }
        }

        self.state.generation = g;
        let migrated = self.cfg.migration.due(g);
        if migrated {
            let report = migrate(&mut self.state, &self.cfg.migration);
            self.progress.migrations.push(report);
            self.state.refresh_best();
        }

        self.progress.trace.push(TracePoint {
            generation: g,
            best_error: self.state.best_error().expect("islands are seeded"),
        });
        self.progress.executable.push(ExecPoint {
            generation: g,
            generated,
            executable,
            rate: rate(executable, generated),
        });
        self.write_checkpoint()?;
        Ok(StepSummary {
            generation: g,
            best_error,
            generated,
            executable,
            skipped,
            migrated,
        })
    }

    /// Evaluates every not-yet-seen source concurrently.
    fn evaluate_pending(&mut self, offspring: &[Offspring]) -> Result<(), RunError> {
        let mut fresh: Vec<&Candidate> = Vec::new();
        for o in offspring {
            if !self.cache.contains_key(&o.child.source) && !fresh.iter().any(|c| c.source == o.child.source) {
                fresh.push(&o.child);
            }
        }
        let set = &self.set;
        let runner = &self.cfg.runner;
        let results: Vec<Result<EvalReport, EvalError>> = thread::scope(|scope| {
            let handles: Vec<_> = fresh
                .iter()
                .map(|c| scope.spawn(move || evaluate_candidate(c, set, runner)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("evaluation thread panicked"))
                .collect()
        });
        for (c, r) in fresh.iter().zip(results) {
            self.cache.insert(c.source.clone(), r?);
        }
        Ok(())
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            format: CHECKPOINT_FORMAT,
            problem: self.cfg.problem_kind(),
            islands: self.cfg.islands,
            rng_seed: self.cfg.rng_seed,
            state: self.state.clone(),
            experience: self.experience.clone(),
            prompts: self.prompts.clone(),
            cache: self.cache.clone(),
            progress: self.progress.clone(),
            llm: self.llm.snapshot(),
        }
    }

    fn write_checkpoint(&self) -> Result<(), RunError> {
        let Some(out) = &self.cfg.out else {
            return Ok(());
        };
        let text = serde_json::to_string(&self.checkpoint()).expect("checkpoints serialize");
        let numbered = out
            .join("checkpoints")
            .join(format!("gen-{:03}.json", self.state.generation));
        std::fs::write(&numbered, &text)?;
        let latest = out.join(CHECKPOINT_FILE);
        let tmp = out.join(format!("{CHECKPOINT_FILE}.tmp"));
        std::fs::write(&tmp, &text)?;
        std::fs::rename(&tmp, &latest)?;
        Ok(())
    }

    pub fn report(&self) -> RunReport {
        let best = self.state.best_so_far.as_ref().expect("islands are seeded");
        let (generated, executable) = self
            .progress
            .executable
            .iter()
            .fold((0, 0), |(g, e), p| (g + p.generated, e + p.executable));
        let base_error = self
            .progress
            .base_errors
            .values()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        RunReport {
            format: REPORT_FORMAT,
            problem: self.cfg.problem_kind(),
            dataset: self.set.dataset_name(),
            instances: self.set.len(),
            seeds: self.cfg.seeds.iter().map(|s| s.name().to_string()).collect(),
            rng_seed: self.cfg.rng_seed,
            iterations: self.cfg.iterations,
            islands: self.cfg.islands,
            base_error,
            base_errors: self.progress.base_errors.clone(),
            best: BestRecord {
                id: best.id,
                source: best.source.clone(),
                error: best.mean_error().expect("best is scored"),
                strategy: best.strategy_used.clone(),
                generation: best.generation,
                island: best.island,
            },
            trace: self.progress.trace.clone(),
            strategy_counts: self.progress.strategy_counts.clone(),
            executable: self.progress.executable.clone(),
            executable_rate: rate(executable, generated),
            prompt_versions: self.prompts.iter().map(|p| p.current).collect(),
            prompt_timeline: self
                .prompts
                .iter()
                .enumerate()
                .flat_map(|(k, p)| {
                    p.timeline.iter().map(move |e| TimelineEntry {
                        prompt_state: k,
                        event: e.clone(),
                    })
                })
                .collect(),
            skips: self.progress.skips.clone(),
            migrations: self.progress.migrations.clone(),
            llm_calls: self.llm.calls(),
            experience_records: self.experience.len(),
        }
    }

    /// Steps until the configured iteration count and writes the report.
    pub fn run_to_end(&mut self) -> Result<RunReport, RunError> {
        while !self.is_done() {
            self.step()?;
        }
        let report = self.report();
        if let Some(out) = &self.cfg.out {
            std::fs::write(out.join(REPORT_FILE), report.to_json())?;
        }
        Ok(report)
    }
}

fn rate(executable: u32, generated: u32) -> Option<f64> {
    (generated > 0).then(|| f64::from(100 * executable) / f64::from(generated))
}

/// Initializes and runs a whole experiment with the configured backend.
pub fn run(cfg: RunConfig) -> Result<RunReport, RunError> {
    let llm = build_backend(&cfg)?;
    Orchestrator::init(cfg, llm)?.run_to_end()
}

/// Continues a run from `checkpoint` up to the configured iteration count.
pub fn resume(cfg: RunConfig, checkpoint: &Path) -> Result<RunReport, RunError> {
    let llm = build_backend(&cfg)?;
    Orchestrator::resume(cfg, checkpoint, llm)?.run_to_end()
}
