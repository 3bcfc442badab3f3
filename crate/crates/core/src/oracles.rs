//! Exact optima for small instances and the relative-error metric.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::heuristics::{cycle_length, fit_packing, FitPolicy, Packing, Tour};
use crate::instances::{BppInstance, Instance, TspInstance};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("instance size {n} exceeds the oracle limit of {limit}")]
    TooLarge { n: usize, limit: usize },
    #[error("search exceeded {0} expanded states")]
    ExpansionCap(u64),
    #[error("search exceeded its time budget")]
    Deadline,
    #[error("optimal value {0} must be positive")]
    NonPositiveOptimum(f64),
}

/// Size, expansion and wall-clock caps for the exact solvers.
#[derive(Debug, Clone, Copy)]
pub struct OracleLimits {
    pub max_tsp_n: usize,
    pub max_bpp_n: usize,
    pub max_expansions: u64,
    pub deadline: Option<Instant>,
}

impl Default for OracleLimits {
    fn default() -> Self {
        Self {
            max_tsp_n: 18,
            max_bpp_n: 20,
            max_expansions: 50_000_000,
            deadline: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Witness {
    Tour(Tour),
    Packing(Packing),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub optimal_value: f64,
    pub witness: Witness,
    pub expanded_states: u64,
}

/// `(a - o) / o * 100`.
pub fn relative_error(a_sol: f64, o_sol: f64) -> Result<f64, OracleError> {
    if !(o_sol > 0.0) {
        return Err(OracleError::NonPositiveOptimum(o_sol));
    }
    Ok((a_sol - o_sol) / o_sol * 100.0)
}

pub fn held_karp(instance: &TspInstance) -> Result<OracleResult, OracleError> {
    held_karp_with(instance, &OracleLimits::default())
}

/// Subset DP anchored at vertex 0. `cost[mask][j]` is the cheapest path from
/// 0 through the vertices of `mask` (over 1..n) ending at `j`.
pub fn held_karp_with(
    instance: &TspInstance,
    limits: &OracleLimits,
) -> Result<OracleResult, OracleError> {
    let n = instance.n();
    if n > limits.max_tsp_n {
        return Err(OracleError::TooLarge {
            n,
            limit: limits.max_tsp_n,
        });
    }
    if n <= 3 {
        let tour = Tour::identity(n);
        return Ok(OracleResult {
            optimal_value: cycle_length(&instance.matrix, &tour.0),
            witness: Witness::Tour(tour),
            expanded_states: 1,
        });
    }
    let d = &instance.matrix;
    let m = n - 1;
    let states = 1usize << m;
    let mut cost = vec![f64::INFINITY; states * m];
    let mut parent = vec![u8::MAX; states * m];
    for j in 0..m {
        cost[(1 << j) * m + j] = d[0][j + 1];
    }
    let mut expanded: u64 = 0;
    for mask in 1..states {
        if mask & 0xFFF == 0 {
            check_deadline(limits)?;
        }
        for j in 0..m {
            if mask & (1 << j) == 0 {
                continue;
            }
            let here = cost[mask * m + j];
            if here == f64::INFINITY {
                continue;
            }
            expanded += 1;
            for k in 0..m {
                if mask & (1 << k) != 0 {
                    continue;
                }
                let next = mask | (1 << k);
                let c = here + d[j + 1][k + 1];
                if c < cost[next * m + k] {
                    cost[next * m + k] = c;
                    parent[next * m + k] = j as u8;
                }
            }
        }
        if expanded > limits.max_expansions {
            return Err(OracleError::ExpansionCap(limits.max_expansions));
        }
    }
    let full = states - 1;
    let mut best = f64::INFINITY;
    let mut last = 0;
    for j in 0..m {
        let c = cost[full * m + j] + d[j + 1][0];
        if c < best {
            best = c;
            last = j;
        }
    }
    let mut order = Vec::with_capacity(n);
    let mut mask = full;
    let mut j = last;
    loop {
        order.push(j + 1);
        let p = parent[mask * m + j];
        mask &= !(1 << j);
        if p == u8::MAX {
            break;
        }
        j = p as usize;
    }
    order.push(0);
    order.reverse();
    // same orientation as brute_force_tsp so both sum the cycle identically
    if order[1] > order[n - 1] {
        order[1..].reverse();
    }
    let optimal_value = cycle_length(d, &order);
    Ok(OracleResult {
        optimal_value,
        witness: Witness::Tour(Tour(order)),
        expanded_states: expanded,
    })
}

fn check_deadline(limits: &OracleLimits) -> Result<(), OracleError> {
    match limits.deadline {
        Some(t) if Instant::now() > t => Err(OracleError::Deadline),
        _ => Ok(()),
    }
}

pub const BRUTE_FORCE_LIMIT: usize = 9;

/// Enumerates every tour with vertex 0 fixed first and `order[1] < order[n-1]`.
pub fn brute_force_tsp(instance: &TspInstance) -> Result<OracleResult, OracleError> {
    let n = instance.n();
    if n > BRUTE_FORCE_LIMIT {
        return Err(OracleError::TooLarge {
            n,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    if n <= 3 {
        let tour = Tour::identity(n);
        return Ok(OracleResult {
            optimal_value: cycle_length(&instance.matrix, &tour.0),
            witness: Witness::Tour(tour),
            expanded_states: 1,
        });
    }
    let mut rest: Vec<usize> = (1..n).collect();
    let mut best = f64::INFINITY;
    let mut best_order = Vec::new();
    let mut count = 0u64;
    permute(&mut rest, 0, &mut |perm| {
        if perm[0] > perm[perm.len() - 1] {
            return;
        }
        count += 1;
        let mut order = Vec::with_capacity(n);
        order.push(0);
        order.extend_from_slice(perm);
        let len = cycle_length(&instance.matrix, &order);
        if len < best {
            best = len;
            best_order = order;
        }
    });
    Ok(OracleResult {
        optimal_value: best,
        witness: Witness::Tour(Tour(best_order)),
        expanded_states: count,
    })
}

fn permute(items: &mut [usize], k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == items.len() {
        visit(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, visit);
        items.swap(k, i);
    }
}

pub fn exact_bpp(instance: &BppInstance) -> Result<OracleResult, OracleError> {
    exact_bpp_with(instance, &OracleLimits::default())
}

struct BppSearch<'a> {
    sizes: Vec<f64>,
    order: Vec<usize>,
    limit: f64,
    lower: usize,
    best: usize,
    best_assign: Vec<usize>,
    assign: Vec<usize>,
    loads: Vec<f64>,
    expanded: u64,
    limits: &'a OracleLimits,
}

impl BppSearch<'_> {
    fn dfs(&mut self, k: usize) -> Result<(), OracleError> {
        if self.best == self.lower {
            return Ok(());
        }
        self.expanded += 1;
        if self.expanded > self.limits.max_expansions {
            return Err(OracleError::ExpansionCap(self.limits.max_expansions));
        }
        if self.expanded & 0xFFF == 0 {
            check_deadline(self.limits)?;
        }
        if k == self.sizes.len() {
            if self.loads.len() < self.best {
                self.best = self.loads.len();
                self.best_assign = self.assign.clone();
            }
            return Ok(());
        }
        let size = self.sizes[k];
        // remaining volume bound on the bins this branch must still use
        let remaining: f64 = self.sizes[k..].iter().sum();
        let free: f64 = self.loads.iter().map(|l| (self.limit - l).max(0.0)).sum();
        let extra = ((remaining - free) / self.limit - 1e-9).ceil().max(0.0) as usize;
        if self.loads.len() + extra >= self.best {
            return Ok(());
        }
        for b in 0..self.loads.len() {
            if self.loads[b] + size > self.limit {
                continue;
            }
            // bins with equal load are interchangeable
            if self.loads[..b].contains(&self.loads[b]) {
                continue;
            }
            self.loads[b] += size;
            self.assign[k] = b;
            self.dfs(k + 1)?;
            self.loads[b] -= size;
        }
        if self.loads.len() + 1 < self.best {
            self.loads.push(size);
            self.assign[k] = self.loads.len() - 1;
            self.dfs(k + 1)?;
            self.loads.pop();
        }
        Ok(())
    }
}

/// Depth-first branch and bound over items in decreasing size, pruned by
/// the volume bound and seeded with a first-fit-decreasing incumbent.
pub fn exact_bpp_with(
    instance: &BppInstance,
    limits: &OracleLimits,
) -> Result<OracleResult, OracleError> {
    let n = instance.n();
    if n > limits.max_bpp_n {
        return Err(OracleError::TooLarge {
            n,
            limit: limits.max_bpp_n,
        });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| instance.sizes[b].total_cmp(&instance.sizes[a]).then(a.cmp(&b)));
    let sorted = BppInstance {
        name: instance.name.clone(),
        sizes: order.iter().map(|&i| instance.sizes[i]).collect(),
        capacity: instance.capacity,
        known_optimal: None,
    };
    let incumbent = fit_packing(&sorted, FitPolicy::First);
    let mut best_assign = vec![0; n];
    for (b, bin) in incumbent.0.iter().enumerate() {
        for &k in bin {
            best_assign[k] = b;
        }
    }
    let mut search = BppSearch {
        sizes: sorted.sizes.clone(),
        order,
        limit: instance.capacity * (1.0 + crate::heuristics::CAPACITY_SLACK),
        lower: instance.volume_bound(),
        best: incumbent.bin_count(),
        best_assign,
        assign: vec![0; n],
        loads: Vec::new(),
        expanded: 0,
        limits,
    };
    search.dfs(0)?;
    let mut bins = vec![Vec::new(); search.best];
    for (k, &b) in search.best_assign.iter().enumerate() {
        bins[b].push(search.order[k]);
    }
    for bin in &mut bins {
        bin.sort_unstable();
    }
    bins.sort();
    Ok(OracleResult {
        optimal_value: search.best as f64,
        witness: Witness::Packing(Packing(bins)),
        expanded_states: search.expanded,
    })
}

/// Dispatches to the exact solver for the instance's problem.
pub fn solve_exact(instance: &Instance, limits: &OracleLimits) -> Result<OracleResult, OracleError> {
    match instance {
        Instance::Tsp(t) => held_karp_with(t, limits),
        Instance::Bpp(b) => exact_bpp_with(b, limits),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heuristics::{validate_packing, validate_tour};
    use crate::instances::{random_bpp, random_euclidean, Rounding};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn unit_square() -> TspInstance {
        TspInstance::from_coords(
            "sq",
            &[(0.0, 0.0), (0.0, 1.0), (1.0, 1.0), (1.0, 0.0)],
            Rounding::Exact,
        )
        .unwrap()
    }

    #[test]
    fn unit_square_optimum_is_perimeter() {
        let sq = unit_square();
        assert_eq!(held_karp(&sq).unwrap().optimal_value, 4.0);
        let bf = brute_force_tsp(&sq).unwrap();
        assert_eq!(bf.optimal_value, 4.0);
        // (4-1)!/2 distinct cycles
        assert_eq!(bf.expanded_states, 3);
    }

    #[test]
    fn tiny_instances() {
        let two = TspInstance::new("2", vec![vec![0.0, 2.5], vec![2.5, 0.0]]).unwrap();
        assert_eq!(brute_force_tsp(&two).unwrap().optimal_value, 5.0);
        assert_eq!(held_karp(&two).unwrap().optimal_value, 5.0);
        let tri = TspInstance::new(
            "3",
            vec![vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 3.0], vec![2.0, 3.0, 0.0]],
        )
        .unwrap();
        assert_eq!(held_karp(&tri).unwrap().optimal_value, 6.0);
        assert_eq!(brute_force_tsp(&tri).unwrap().optimal_value, 6.0);
    }

    #[test]
    fn size_limits_refuse() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let big = random_euclidean("big", 19, 10.0, Rounding::Exact, &mut rng);
        assert!(matches!(held_karp(&big), Err(OracleError::TooLarge { n: 19, limit: 18 })));
        let ten = random_euclidean("ten", 10, 10.0, Rounding::Exact, &mut rng);
        assert!(matches!(brute_force_tsp(&ten), Err(OracleError::TooLarge { .. })));
        let b = random_bpp("b", 21, 10, &mut rng);
        assert!(matches!(exact_bpp(&b), Err(OracleError::TooLarge { .. })));
        let capped = OracleLimits {
            max_expansions: 10,
            ..OracleLimits::default()
        };
        let mid = random_euclidean("mid", 12, 10.0, Rounding::Exact, &mut rng);
        assert!(matches!(held_karp_with(&mid, &capped), Err(OracleError::ExpansionCap(10))));
    }

    #[test]
    fn bpp_examples() {
        let b = BppInstance::new("b", vec![50.0, 70.0, 50.0, 30.0], 100.0).unwrap();
        let r = exact_bpp(&b).unwrap();
        assert_eq!(r.optimal_value, 2.0);
        match &r.witness {
            Witness::Packing(p) => assert!(validate_packing(&b, p).is_ok()),
            _ => panic!("wrong witness"),
        }
        let full = BppInstance::new("full", vec![10.0; 6], 10.0).unwrap();
        assert_eq!(exact_bpp(&full).unwrap().optimal_value, 6.0);
        let half = BppInstance::new("half", vec![2.0, 3.0, 1.0, 4.0], 10.0).unwrap();
        assert_eq!(exact_bpp(&half).unwrap().optimal_value, 1.0);
    }

    #[test]
    fn relative_error_examples() {
        assert_eq!(relative_error(5.0, 5.0).unwrap(), 0.0);
        assert!((relative_error(1.2 * 7.0, 7.0).unwrap() - 20.0).abs() < 1e-12);
        assert_eq!(relative_error(100.0, 80.0).unwrap(), 25.0);
        assert!(relative_error(1.0, 0.0).is_err());
        assert!(relative_error(1.0, -3.0).is_err());
    }

    #[test]
    fn held_karp_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for trial in 0..60 {
            let n = 4 + trial % 5;
            let inst = random_euclidean("r", n, 100.0, Rounding::NearestInteger, &mut rng);
            let hk = held_karp(&inst).unwrap();
            assert_eq!(hk.optimal_value, brute_force_tsp(&inst).unwrap().optimal_value);
            match &hk.witness {
                Witness::Tour(t) => assert!(validate_tour(&inst, t).is_ok()),
                _ => panic!("wrong witness"),
            }
        }
    }

    proptest! {
        #[test]
        fn exact_bpp_is_bounded(seed in 0u64..5000, n in 1usize..13) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let b = random_bpp("p", n, 100, &mut rng);
            let r = exact_bpp(&b).unwrap();
            let k = r.optimal_value as usize;
            prop_assert!(k >= b.volume_bound());
            prop_assert!(k <= fit_packing(&b, FitPolicy::First).bin_count());
            match &r.witness {
                Witness::Packing(p) => {
                    prop_assert!(validate_packing(&b, p).is_ok());
                    prop_assert_eq!(p.bin_count(), k);
                }
                _ => prop_assert!(false),
            }
        }

        #[test]
        fn relative_error_monotone(o in 0.1f64..1e6, a in 0.1f64..1e6, bump in 1e-3f64..1e3) {
            let e1 = relative_error(a, o).unwrap();
            let e2 = relative_error(a + bump, o).unwrap();
            prop_assert!(e2 > e1);
            if a >= o { prop_assert!(e1 >= 0.0); }
        }
    }
}
