//! Reference implementations of the classical seed heuristics, plus
//! solution validators and objective functions.
//!
//! Every routine here has a twin among the shipped Python seed programs
//! (see [`crate::seeds`]). The two must agree bit for bit, so comparisons,
//! tie-breaks and summation order are kept simple and explicit.

use rand::RngCore;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instances::{BppInstance, TspInstance};

/// Relative slack applied to bin capacity checks.
pub const CAPACITY_SLACK: f64 = 1e-9;

/// Minimum gain for a 2-opt move to count as an improvement.
pub const TWO_OPT_EPS: f64 = 1e-10;

/// Largest odd-vertex set matched exactly in Christofides.
pub const EXACT_MATCHING_LIMIT: usize = 16;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Violation {
    #[error("tour has {found} vertices, expected {expected}")]
    WrongLength { expected: usize, found: usize },
    #[error("vertex {0} is out of range")]
    VertexOutOfRange(usize),
    #[error("duplicate vertex {0}")]
    DuplicateVertex(usize),
    #[error("item {0} is out of range")]
    ItemOutOfRange(usize),
    #[error("duplicate item {0}")]
    DuplicateItem(usize),
    #[error("item {0} is not packed")]
    MissingItem(usize),
    #[error("bin {bin} is empty")]
    EmptyBin { bin: usize },
    #[error("bin {bin} holds {load} which exceeds capacity {capacity}")]
    Overfull { bin: usize, load: f64, capacity: f64 },
}

impl Violation {
    /// Capacity breaches are a distinct failure class from malformed output.
    pub fn is_capacity(&self) -> bool {
        matches!(self, Violation::Overfull { .. })
    }
}

/// Visit order of a Hamiltonian cycle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tour(pub Vec<usize>);

impl Tour {
    pub fn identity(n: usize) -> Self {
        Tour((0..n).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Assignment of item indices to bins.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Packing(pub Vec<Vec<usize>>);

impl Packing {
    pub fn bin_count(&self) -> usize {
        self.0.len()
    }
}

pub fn validate_tour(instance: &TspInstance, tour: &Tour) -> Result<(), Violation> {
    let n = instance.n();
    if tour.len() != n {
        return Err(Violation::WrongLength {
            expected: n,
            found: tour.len(),
        });
    }
    let mut seen = vec![false; n];
    for &v in &tour.0 {
        if v >= n {
            return Err(Violation::VertexOutOfRange(v));
        }
        if seen[v] {
            return Err(Violation::DuplicateVertex(v));
        }
        seen[v] = true;
    }
    Ok(())
}

pub fn validate_packing(instance: &BppInstance, packing: &Packing) -> Result<(), Violation> {
    let n = instance.n();
    let mut seen = vec![false; n];
    for bin in &packing.0 {
        for &item in bin {
            if item >= n {
                return Err(Violation::ItemOutOfRange(item));
            }
            if seen[item] {
                return Err(Violation::DuplicateItem(item));
            }
            seen[item] = true;
        }
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(Violation::MissingItem(missing));
    }
    let limit = instance.capacity * (1.0 + CAPACITY_SLACK);
    for (b, bin) in packing.0.iter().enumerate() {
        if bin.is_empty() {
            return Err(Violation::EmptyBin { bin: b });
        }
        let load: f64 = bin.iter().map(|&i| instance.sizes[i]).sum();
        if load > limit {
            return Err(Violation::Overfull {
                bin: b,
                load,
                capacity: instance.capacity,
            });
        }
    }
    Ok(())
}

/// Cyclic tour length including the closing edge.
pub fn tour_length(instance: &TspInstance, tour: &Tour) -> Result<f64, Violation> {
    validate_tour(instance, tour)?;
    Ok(cycle_length(&instance.matrix, &tour.0))
}

pub(crate) fn cycle_length(matrix: &[Vec<f64>], order: &[usize]) -> f64 {
    let n = order.len();
    if n < 2 {
        return 0.0;
    }
    let mut total = 0.0;
    for i in 0..n - 1 {
        total += matrix[order[i]][order[i + 1]];
    }
    total + matrix[order[n - 1]][order[0]]
}

pub fn nearest_neighbor(instance: &TspInstance, start: usize) -> Tour {
    let n = instance.n();
    assert!(start < n, "start vertex {start} out of range for n={n}");
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut current = start;
    visited[current] = true;
    order.push(current);
    for _ in 1..n {
        let mut best: Option<usize> = None;
        for j in 0..n {
            if visited[j] {
                continue;
            }
            if best.is_none_or(|b| instance.dist(current, j) < instance.dist(current, b)) {
                best = Some(j);
            }
        }
        let next = best.expect("an unvisited vertex remains");
        visited[next] = true;
        order.push(next);
        current = next;
    }
    Tour(order)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InsertionMode {
    Nearest,
    Farthest,
    Random,
}

/// The pair `(i, j)`, `i < j`, with extreme distance; first pair wins ties.
fn extreme_pair(instance: &TspInstance, farthest: bool) -> (usize, usize) {
    let n = instance.n();
    let mut best = (0, 1);
    for i in 0..n {
        for j in (i + 1)..n {
            let d = instance.dist(i, j);
            let b = instance.dist(best.0, best.1);
            if (farthest && d > b) || (!farthest && d < b) {
                best = (i, j);
            }
        }
    }
    best
}

/// Cheapest insertion position: the city goes after `tour[p]`.
fn cheapest_position(instance: &TspInstance, tour: &[usize], city: usize) -> usize {
    let k = tour.len();
    let mut best_p = 0;
    let mut best_cost = f64::INFINITY;
    for p in 0..k {
        let a = tour[p];
        let b = tour[(p + 1) % k];
        let cost = instance.dist(a, city) + instance.dist(city, b) - instance.dist(a, b);
        if cost < best_cost {
            best_cost = cost;
            best_p = p;
        }
    }
    best_p
}

/// Insertion construction. Random mode draws `next_u64() % remaining` over
/// the ascending list of uninserted cities, so it is reproducible from the
/// stream alone.
pub fn insertion_tour<R: RngCore + ?Sized>(
    instance: &TspInstance,
    mode: InsertionMode,
    rng: &mut R,
) -> Tour {
    let n = instance.n();
    if n <= 2 {
        return Tour::identity(n);
    }
    let (a, b) = extreme_pair(instance, mode != InsertionMode::Nearest);
    let mut tour = vec![a, b];
    let mut in_tour = vec![false; n];
    in_tour[a] = true;
    in_tour[b] = true;
    // distance from each city to the nearest tour city
    let mut reach: Vec<f64> = (0..n)
        .map(|c| instance.dist(c, a).min(instance.dist(c, b)))
        .collect();
    let mut remaining: Vec<usize> = (0..n).filter(|&c| !in_tour[c]).collect();

    while !remaining.is_empty() {
        let pick = match mode {
            InsertionMode::Random => (rng.next_u64() % remaining.len() as u64) as usize,
            InsertionMode::Nearest | InsertionMode::Farthest => {
                let mut best = 0;
                for idx in 1..remaining.len() {
                    let (c, bc) = (remaining[idx], remaining[best]);
                    let better = match mode {
                        InsertionMode::Nearest => reach[c] < reach[bc],
                        _ => reach[c] > reach[bc],
                    };
                    if better {
                        best = idx;
                    }
                }
                best
            }
        };
        let city = remaining.remove(pick);
        let p = cheapest_position(instance, &tour, city);
        tour.insert(p + 1, city);
        in_tour[city] = true;
        for &c in &remaining {
            let d = instance.dist(c, city);
            if d < reach[c] {
                reach[c] = d;
            }
        }
    }
    Tour(tour)
}

/// Best-improvement 2-opt: every sweep applies the single most improving
/// exchange until none remains.
pub fn two_opt(instance: &TspInstance, initial: &Tour) -> Tour {
    let mut t = initial.0.clone();
    let n = t.len();
    if n < 4 {
        return Tour(t);
    }
    let d = &instance.matrix;
    loop {
        let mut best_delta = -TWO_OPT_EPS;
        let mut best_move: Option<(usize, usize)> = None;
        for i in 0..n - 1 {
            for j in (i + 2)..n {
                if i == 0 && j == n - 1 {
                    continue;
                }
                let (a, b, c, e) = (t[i], t[i + 1], t[j], t[(j + 1) % n]);
                let delta = d[a][c] + d[b][e] - d[a][b] - d[c][e];
                if delta < best_delta {
                    best_delta = delta;
                    best_move = Some((i, j));
                }
            }
        }
        match best_move {
            Some((i, j)) => t[i + 1..=j].reverse(),
            None => break,
        }
    }
    Tour(t)
}

/// Prim's MST from vertex 0; parent links, ties to the lowest index.
fn minimum_spanning_tree(instance: &TspInstance) -> Vec<(usize, usize)> {
    let n = instance.n();
    let mut in_tree = vec![false; n];
    let mut key = vec![f64::INFINITY; n];
    let mut parent = vec![usize::MAX; n];
    key[0] = 0.0;
    let mut edges = Vec::with_capacity(n.saturating_sub(1));
    for _ in 0..n {
        let mut u = usize::MAX;
        for v in 0..n {
            if !in_tree[v] && (u == usize::MAX || key[v] < key[u]) {
                u = v;
            }
        }
        in_tree[u] = true;
        if parent[u] != usize::MAX {
            edges.push((parent[u], u));
        }
        for v in 0..n {
            if !in_tree[v] && instance.dist(u, v) < key[v] {
                key[v] = instance.dist(u, v);
                parent[v] = u;
            }
        }
    }
    edges
}

/// Minimum-weight perfect matching over `odd` by subset DP.
fn exact_matching(instance: &TspInstance, odd: &[usize]) -> Vec<(usize, usize)> {
    let m = odd.len();
    let full = (1usize << m) - 1;
    let mut cost = vec![f64::INFINITY; 1 << m];
    let mut choice = vec![(0usize, 0usize); 1 << m];
    cost[0] = 0.0;
    for mask in 1..=full {
        if mask.count_ones() % 2 == 1 {
            continue;
        }
        let i = mask.trailing_zeros() as usize;
        let rest = mask & !(1 << i);
        for j in (i + 1)..m {
            if rest & (1 << j) == 0 {
                continue;
            }
            let c = cost[rest & !(1 << j)] + instance.dist(odd[i], odd[j]);
            if c < cost[mask] {
                cost[mask] = c;
                choice[mask] = (i, j);
            }
        }
    }
    let mut pairs = Vec::with_capacity(m / 2);
    let mut mask = full;
    while mask != 0 {
        let (i, j) = choice[mask];
        pairs.push((odd[i], odd[j]));
        mask &= !((1 << i) | (1 << j));
    }
    pairs
}

/// Greedy matching: cheapest remaining pair first, ties by `(i, j)`.
fn greedy_matching(instance: &TspInstance, odd: &[usize]) -> Vec<(usize, usize)> {
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (x, &i) in odd.iter().enumerate() {
        for &j in &odd[x + 1..] {
            pairs.push((instance.dist(i, j), i, j));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut used = vec![false; instance.n()];
    let mut out = Vec::new();
    for (_, i, j) in pairs {
        if !used[i] && !used[j] {
            used[i] = true;
            used[j] = true;
            out.push((i, j));
        }
    }
    out
}

/// Christofides: MST, matching on odd-degree vertices, Euler circuit,
/// shortcutting. Exact matching up to [`EXACT_MATCHING_LIMIT`] odd vertices.
pub fn christofides(instance: &TspInstance) -> Tour {
    let n = instance.n();
    if n <= 3 {
        return Tour::identity(n);
    }
    let mut edges = minimum_spanning_tree(instance);
    let mut degree = vec![0usize; n];
    for &(u, v) in &edges {
        degree[u] += 1;
        degree[v] += 1;
    }
    let odd: Vec<usize> = (0..n).filter(|&v| degree[v] % 2 == 1).collect();
    let matching = if odd.len() <= EXACT_MATCHING_LIMIT {
        exact_matching(instance, &odd)
    } else {
        greedy_matching(instance, &odd)
    };
    edges.extend(matching);

    // adjacency lists of (neighbor, edge id) in edge insertion order
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (id, &(u, v)) in edges.iter().enumerate() {
        adj[u].push((v, id));
        adj[v].push((u, id));
    }
    let mut used = vec![false; edges.len()];
    let mut ptr = vec![0usize; n];
    let mut stack = vec![0usize];
    let mut circuit = Vec::with_capacity(edges.len() + 1);
    while let Some(&v) = stack.last() {
        while ptr[v] < adj[v].len() && used[adj[v][ptr[v]].1] {
            ptr[v] += 1;
        }
        if ptr[v] == adj[v].len() {
            circuit.push(v);
            stack.pop();
        } else {
            let (w, id) = adj[v][ptr[v]];
            used[id] = true;
            stack.push(w);
        }
    }
    circuit.reverse();
    let mut seen = vec![false; n];
    let order = circuit
        .into_iter()
        .filter(|&v| !std::mem::replace(&mut seen[v], true))
        .collect();
    Tour(order)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitPolicy {
    First,
    Best,
    Next,
    Worst,
}

/// Sequential fit heuristics over the input order; ties go to the lowest bin.
pub fn fit_packing(instance: &BppInstance, policy: FitPolicy) -> Packing {
    let limit = instance.capacity * (1.0 + CAPACITY_SLACK);
    let mut bins: Vec<Vec<usize>> = Vec::new();
    let mut loads: Vec<f64> = Vec::new();
    for (item, &size) in instance.sizes.iter().enumerate() {
        let fits = |b: usize| loads[b] + size <= limit;
        let target = match policy {
            FitPolicy::First => (0..bins.len()).find(|&b| fits(b)),
            FitPolicy::Next => bins.len().checked_sub(1).filter(|&b| fits(b)),
            FitPolicy::Best | FitPolicy::Worst => {
                let mut chosen: Option<usize> = None;
                for b in 0..bins.len() {
                    if !fits(b) {
                        continue;
                    }
                    let take = match chosen {
                        None => true,
                        // fullest bin leaves the least room, emptiest the most
                        Some(c) if policy == FitPolicy::Best => loads[b] > loads[c],
                        Some(c) => loads[b] < loads[c],
                    };
                    if take {
                        chosen = Some(b);
                    }
                }
                chosen
            }
        };
        match target {
            Some(b) => {
                bins[b].push(item);
                loads[b] += size;
            }
            None => {
                bins.push(vec![item]);
                loads.push(size);
            }
        }
    }
    Packing(bins)
}

/// SplitMix64 stream; the Python random-insertion seed embeds the same
/// generator so subprocess and native runs agree.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }
}

impl RngCore for SplitMix64 {
    fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }

    fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        for chunk in dest.chunks_mut(8) {
            let bytes = self.next_u64().to_le_bytes();
            chunk.copy_from_slice(&bytes[..chunk.len()]);
        }
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
        self.fill_bytes(dest);
        Ok(())
    }
}

/// Seed used by the shipped random-insertion program.
pub const RANDOM_INSERTION_SEED: u64 = 0x5EED;

/// A named seed heuristic with a native implementation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeedHeuristic {
    NearestNeighbor,
    NearestInsertion,
    FarthestInsertion,
    RandomInsertion,
    TwoOpt,
    Christofides,
    FirstFit,
    BestFit,
    NextFit,
    WorstFit,
}

impl SeedHeuristic {
    pub const ALL: [SeedHeuristic; 10] = [
        SeedHeuristic::NearestNeighbor,
        SeedHeuristic::NearestInsertion,
        SeedHeuristic::FarthestInsertion,
        SeedHeuristic::RandomInsertion,
        SeedHeuristic::TwoOpt,
        SeedHeuristic::Christofides,
        SeedHeuristic::FirstFit,
        SeedHeuristic::BestFit,
        SeedHeuristic::NextFit,
        SeedHeuristic::WorstFit,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SeedHeuristic::NearestNeighbor => "nearest-neighbor",
            SeedHeuristic::NearestInsertion => "nearest-insertion",
            SeedHeuristic::FarthestInsertion => "farthest-insertion",
            SeedHeuristic::RandomInsertion => "random-insertion",
            SeedHeuristic::TwoOpt => "2-opt",
            SeedHeuristic::Christofides => "christofides",
            SeedHeuristic::FirstFit => "first-fit",
            SeedHeuristic::BestFit => "best-fit",
            SeedHeuristic::NextFit => "next-fit",
            SeedHeuristic::WorstFit => "worst-fit",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|h| h.name() == name.trim())
    }

    pub fn problem(self) -> crate::instances::ProblemKind {
        use crate::instances::ProblemKind;
        match self {
            SeedHeuristic::FirstFit
            | SeedHeuristic::BestFit
            | SeedHeuristic::NextFit
            | SeedHeuristic::WorstFit => ProblemKind::Bpp,
            _ => ProblemKind::Tsp,
        }
    }

    /// Runs the native implementation. The 2-opt seed improves the identity
    /// tour; random insertion uses [`RANDOM_INSERTION_SEED`].
    pub fn solve_tsp(self, instance: &TspInstance) -> Option<Tour> {
        Some(match self {
            SeedHeuristic::NearestNeighbor => nearest_neighbor(instance, 0),
            SeedHeuristic::NearestInsertion => {
                insertion_tour(instance, InsertionMode::Nearest, &mut SplitMix64::new(0))
            }
            SeedHeuristic::FarthestInsertion => {
                insertion_tour(instance, InsertionMode::Farthest, &mut SplitMix64::new(0))
            }
            SeedHeuristic::RandomInsertion => insertion_tour(
                instance,
                InsertionMode::Random,
                &mut SplitMix64::new(RANDOM_INSERTION_SEED),
            ),
            SeedHeuristic::TwoOpt => two_opt(instance, &Tour::identity(instance.n())),
            SeedHeuristic::Christofides => christofides(instance),
            _ => return None,
        })
    }

    pub fn solve_bpp(self, instance: &BppInstance) -> Option<Packing> {
        let policy = match self {
            SeedHeuristic::FirstFit => FitPolicy::First,
            SeedHeuristic::BestFit => FitPolicy::Best,
            SeedHeuristic::NextFit => FitPolicy::Next,
            SeedHeuristic::WorstFit => FitPolicy::Worst,
            _ => return None,
        };
        Some(fit_packing(instance, policy))
    }
}

impl std::fmt::Display for SeedHeuristic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}
