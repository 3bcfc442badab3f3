//! Python sources for the seed heuristics, shipped as real candidate programs.

use crate::heuristics::SeedHeuristic;

/// Runner key for the shipped seed programs.
pub const SEED_LANGUAGE: &str = "python";

pub fn seed_source(heuristic: SeedHeuristic) -> &'static str {
    match heuristic {
        SeedHeuristic::NearestNeighbor => include_str!("../assets/seeds/nearest_neighbor.py"),
        SeedHeuristic::NearestInsertion => include_str!("../assets/seeds/nearest_insertion.py"),
        SeedHeuristic::FarthestInsertion => include_str!("../assets/seeds/farthest_insertion.py"),
        SeedHeuristic::RandomInsertion => include_str!("../assets/seeds/random_insertion.py"),
        SeedHeuristic::TwoOpt => include_str!("../assets/seeds/two_opt.py"),
        SeedHeuristic::Christofides => include_str!("../assets/seeds/christofides.py"),
        SeedHeuristic::FirstFit => include_str!("../assets/seeds/first_fit.py"),
        SeedHeuristic::BestFit => include_str!("../assets/seeds/best_fit.py"),
        SeedHeuristic::NextFit => include_str!("../assets/seeds/next_fit.py"),
        SeedHeuristic::WorstFit => include_str!("../assets/seeds/worst_fit.py"),
    }
}
