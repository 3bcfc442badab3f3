//! Island elite archives.
//!
//! Each island keeps a grid of cells keyed by a behavioral [`Descriptor`]
//! (relative-error bin × source-size bin). A child takes a cell when the
//! cell is empty or the child's performance is at least the incumbent's.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::evaluator::{Candidate, CandidateId, EvalReport};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArchiveError {
    #[error("candidate {0} has no performance score")]
    Unscored(CandidateId),
    #[error("candidate {0} has no descriptor")]
    NoDescriptor(CandidateId),
    #[error("island {0} has no elites")]
    EmptyIsland(usize),
    #[error("every island archive is empty")]
    AllEmpty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Descriptor {
    pub performance_bin: usize,
    pub complexity_bin: usize,
}

/// Lower bin edges; the last bin is open-ended.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    /// Relative error, percent.
    pub error_edges: Vec<f64>,
    /// Source length, KiB.
    pub size_edges_kib: Vec<f64>,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            error_edges: vec![0.0, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0],
            size_edges_kib: vec![0.0, 1.0, 2.0, 4.0, 8.0, 16.0],
        }
    }
}

fn bin_index(edges: &[f64], value: f64) -> usize {
    edges
        .iter()
        .rposition(|&e| value >= e)
        .unwrap_or(0)
}

impl GridConfig {
    pub fn bins(&self) -> (usize, usize) {
        (self.error_edges.len(), self.size_edges_kib.len())
    }

    pub fn locate(&self, mean_error: f64, source_bytes: usize) -> Descriptor {
        Descriptor {
            performance_bin: bin_index(&self.error_edges, mean_error),
            complexity_bin: bin_index(&self.size_edges_kib, source_bytes as f64 / 1024.0),
        }
    }
}

pub fn descriptor(
    candidate: &Candidate,
    report: &EvalReport,
    grid: &GridConfig,
) -> Result<Descriptor, ArchiveError> {
    let err = report
        .mean_relative_error
        .ok_or(ArchiveError::Unscored(candidate.id))?;
    Ok(grid.locate(err, candidate.source.len()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InsertOutcome {
    AcceptedNew,
    Replaced,
    Rejected,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InsertionEvent {
    pub candidate: Candidate,
    pub outcome: InsertOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IslandArchive {
    pub island_id: usize,
    #[serde(with = "cells_as_pairs")]
    pub cells: BTreeMap<Descriptor, Candidate>,
    pub log: Vec<InsertionEvent>,
}

mod cells_as_pairs {
    use super::{Candidate, Descriptor};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};
    use std::collections::BTreeMap;

    pub fn serialize<S: Serializer>(
        cells: &BTreeMap<Descriptor, Candidate>,
        s: S,
    ) -> Result<S::Ok, S::Error> {
        let pairs: Vec<(&Descriptor, &Candidate)> = cells.iter().collect();
        pairs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> Result<BTreeMap<Descriptor, Candidate>, D::Error> {
        let pairs: Vec<(Descriptor, Candidate)> = Vec::deserialize(d)?;
        Ok(pairs.into_iter().collect())
    }
}

impl IslandArchive {
    pub fn new(island_id: usize) -> Self {
        Self {
            island_id,
            cells: BTreeMap::new(),
            log: Vec::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn get(&self, d: &Descriptor) -> Option<&Candidate> {
        self.cells.get(d)
    }

    /// Highest performance, ties to the lowest id.
    pub fn best(&self) -> Option<&Candidate> {
        self.ranked().into_iter().next()
    }

    /// Elites by decreasing performance, then increasing id.
    pub fn ranked(&self) -> Vec<&Candidate> {
        let mut elites: Vec<&Candidate> = self.cells.values().collect();
        elites.sort_by(|a, b| {
            let (pa, pb) = (a.performance.unwrap_or(f64::NEG_INFINITY), b.performance.unwrap_or(f64::NEG_INFINITY));
            pb.total_cmp(&pa).then(a.id.cmp(&b.id))
        });
        elites
    }

    /// Rebuilds an archive from its insertion log.
    pub fn replay(island_id: usize, log: &[InsertionEvent]) -> Result<Self, ArchiveError> {
        let mut island = Self::new(island_id);
        for event in log {
            archive_insert(&mut island, event.candidate.clone())?;
        }
        Ok(island)
    }
}

/// Cell update: empty cell or `g(child) >= g(incumbent)` takes the cell.
pub fn archive_insert(
    island: &mut IslandArchive,
    candidate: Candidate,
) -> Result<InsertOutcome, ArchiveError> {
    let perf = candidate.performance.ok_or(ArchiveError::Unscored(candidate.id))?;
    let cell = candidate.descriptor.ok_or(ArchiveError::NoDescriptor(candidate.id))?;
    let outcome = match island.cells.get(&cell) {
        None => InsertOutcome::AcceptedNew,
        Some(incumbent) if perf >= incumbent.performance.unwrap_or(f64::NEG_INFINITY) => {
            InsertOutcome::Replaced
        }
        Some(_) => InsertOutcome::Rejected,
    };
    if outcome != InsertOutcome::Rejected {
        island.cells.insert(cell, candidate.clone());
    }
    island.log.push(InsertionEvent { candidate, outcome });
    Ok(outcome)
}

/// Exploration probability schedule driven by stagnation of the global best.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExplorationSchedule {
    pub base: f64,
    pub stagnant: f64,
    /// Generations without improvement before switching to `stagnant`.
    pub window: u32,
}

impl Default for ExplorationSchedule {
    fn default() -> Self {
        Self {
            base: 0.2,
            stagnant: 0.4,
            window: 3,
        }
    }
}

impl ExplorationSchedule {
    pub fn epsilon(&self, stagnation: u32) -> f64 {
        if stagnation >= self.window {
            self.stagnant
        } else {
            self.base
        }
    }
}

/// Parent links of every archived candidate, for lineage queries.
pub type Lineage = BTreeMap<CandidateId, Option<CandidateId>>;

fn descends_from(lineage: &Lineage, mut id: CandidateId, ancestor: CandidateId) -> bool {
    let mut guard = 0;
    loop {
        if id == ancestor {
            return true;
        }
        match lineage.get(&id).copied().flatten() {
            Some(p) if guard < 1_000_000 => {
                id = p;
                guard += 1;
            }
            _ => return false,
        }
    }
}

/// Number of distinct cells held by `id` or its descendants.
pub fn lineage_coverage(island: &IslandArchive, lineage: &Lineage, id: CandidateId) -> usize {
    island
        .cells
        .values()
        .filter(|c| descends_from(lineage, c.id, id))
        .count()
}

/// With probability `epsilon`, a uniformly random elite; otherwise the best
/// elite, ties broken by lineage coverage and then lowest id. The rng is only
/// consulted when `0 < epsilon < 1` or when exploring.
pub fn select_parent<'a>(
    island: &'a IslandArchive,
    lineage: &Lineage,
    epsilon: f64,
    rng: &mut ChaCha8Rng,
) -> Result<&'a Candidate, ArchiveError> {
    if island.is_empty() {
        return Err(ArchiveError::EmptyIsland(island.island_id));
    }
    let explore = if epsilon <= 0.0 {
        false
    } else if epsilon >= 1.0 {
        true
    } else {
        rng.gen_bool(epsilon)
    };
    if explore {
        let k = rng.gen_range(0..island.len());
        return Ok(island.cells.values().nth(k).expect("index within bounds"));
    }
    let top = island
        .cells
        .values()
        .filter_map(|c| c.performance)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut best: Option<(&Candidate, usize)> = None;
    for c in island.cells.values().filter(|c| c.performance == Some(top)) {
        let cover = lineage_coverage(island, lineage, c.id);
        let better = match best {
            None => true,
            Some((b, bc)) => cover > bc || (cover == bc && c.id < b.id),
        };
        if better {
            best = Some((c, cover));
        }
    }
    Ok(best.expect("island is non-empty").0)
}

/// Uniform over islands with at least one elite.
pub fn select_island(islands: &[IslandArchive], rng: &mut ChaCha8Rng) -> Result<usize, ArchiveError> {
    let live: Vec<usize> = islands
        .iter()
        .filter(|i| !i.is_empty())
        .map(|i| i.island_id)
        .collect();
    if live.is_empty() {
        return Err(ArchiveError::AllEmpty);
    }
    Ok(live[rng.gen_range(0..live.len())])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MigrationConfig {
    pub interval: u32,
    /// Elites offered per island per event.
    pub migrants: usize,
}

impl Default for MigrationConfig {
    fn default() -> Self {
        Self {
            interval: 4,
            migrants: 1,
        }
    }
}

impl MigrationConfig {
    pub fn due(&self, generation: u32) -> bool {
        self.interval > 0 && generation > 0 && generation % self.interval == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MigrationOffer {
    pub from: usize,
    pub to: usize,
    pub candidate: CandidateId,
    pub outcome: InsertOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct MigrationReport {
    pub generation: u32,
    pub offers: Vec<MigrationOffer>,
}

/// Global search state: every island plus the rng and bookkeeping that make
/// a run resumable.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvolutionState {
    pub islands: Vec<IslandArchive>,
    pub generation: u32,
    pub rng: ChaCha8Rng,
    pub best_so_far: Option<Candidate>,
    pub lineage: Lineage,
    /// Consecutive generations without a strictly better global best.
    pub stagnation: u32,
    pub next_id: u64,
}

impl EvolutionState {
    pub fn new(islands: usize, rng: ChaCha8Rng) -> Self {
        Self {
            islands: (0..islands).map(IslandArchive::new).collect(),
            generation: 0,
            rng,
            best_so_far: None,
            lineage: Lineage::new(),
            stagnation: 0,
            next_id: 0,
        }
    }

    pub fn fresh_id(&mut self) -> CandidateId {
        let id = CandidateId(self.next_id);
        self.next_id += 1;
        id
    }

    pub fn insert(&mut self, candidate: Candidate) -> Result<InsertOutcome, ArchiveError> {
        let island = candidate.island;
        self.lineage.insert(candidate.id, candidate.parent_id);
        archive_insert(&mut self.islands[island], candidate)
    }

    /// Raises `best_so_far` to the best elite if strictly better; returns
    /// whether it improved.
    pub fn refresh_best(&mut self) -> bool {
        let champion = self
            .islands
            .iter()
            .filter_map(IslandArchive::best)
            .min_by(|a, b| {
                let (pa, pb) = (a.performance.unwrap_or(f64::NEG_INFINITY), b.performance.unwrap_or(f64::NEG_INFINITY));
                pb.total_cmp(&pa).then(a.id.cmp(&b.id))
            })
            .cloned();
        let Some(champion) = champion else {
            return false;
        };
        let improved = match &self.best_so_far {
            None => true,
            Some(b) => champion.performance > b.performance,
        };
        if improved {
            self.best_so_far = Some(champion);
        }
        improved
    }

    pub fn best_error(&self) -> Option<f64> {
        self.best_so_far.as_ref().and_then(Candidate::mean_error)
    }
}

/// Ring migration: the top elites of island `i` are offered to island
/// `(i + 1) % N` through the normal insertion rule. Offers are drawn from a
/// snapshot taken before any insertion.
pub fn migrate(state: &mut EvolutionState, cfg: &MigrationConfig) -> MigrationReport {
    let n = state.islands.len();
    let mut report = MigrationReport {
        generation: state.generation,
        offers: Vec::new(),
    };
    if n < 2 {
        return report;
    }
    let snapshot: Vec<Vec<Candidate>> = state
        .islands
        .iter()
        .map(|isl| isl.ranked().into_iter().take(cfg.migrants).cloned().collect())
        .collect();
    for (from, migrants) in snapshot.into_iter().enumerate() {
        let to = (from + 1) % n;
        for mut migrant in migrants {
            migrant.island = to;
            let id = migrant.id;
            let outcome = archive_insert(&mut state.islands[to], migrant)
                .expect("archived candidates are scored and mapped");
            report.offers.push(MigrationOffer {
                from,
                to,
                candidate: id,
                outcome,
            });
        }
    }
    report
}

/// Distinct descriptors across all islands, for reporting.
pub fn occupied_cells(state: &EvolutionState) -> BTreeSet<(usize, Descriptor)> {
    state
        .islands
        .iter()
        .flat_map(|isl| isl.cells.keys().map(move |d| (isl.island_id, *d)))
        .collect()
}
