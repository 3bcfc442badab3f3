//! Co-evolution of heuristic programs and the prompts that mutate them.
//!
//! Candidates are standalone programs that read a TSP or bin packing
//! instance on stdin and print a solution. They are scored by relative
//! error against known optima, kept in per-island elite grids, and mutated
//! through an LLM whose prompt is itself revised from accumulated
//! experience.

pub mod archive;
pub mod cli;
pub mod evaluator;
pub mod experience;
pub mod heuristics;
pub mod instances;
pub mod llm;
pub mod oracles;
pub mod orchestrator;
pub mod promptevo;
pub mod seeds;
