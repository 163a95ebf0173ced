//! Exact label blocking against independent-cascade spread.
//!
//! Given a labeled directed multigraph, a seed set and a batch of sampled
//! live-arc scenarios, pick a budget-feasible set of labels whose arcs are
//! removed so that the average number of nodes reached from the seeds is as
//! small as possible. The solver is a branch-and-Benders-cut over one
//! continuous variable per scenario, with optimality cuts separated by a
//! shortest-path computation instead of an LP.
//!
//! Module map:
//! - [`graph`]: the multigraph, scenarios, instances and spread evaluation.
//! - [`generate`]: synthetic instance pipeline (BA/ER, labels, scenarios, seeds).
//! - [`separation`]: Benders cut generation (combinatorial and LP based).
//! - [`lp`]: the bounded-variable simplex used by the master and the baselines.
//! - [`master`]: master model, branch-and-cut driver, greedy and brute force.

pub mod error;
pub mod formulation;
pub mod generate;
pub mod graph;
pub mod io;
pub mod lp;
pub mod master;
pub mod rng;
pub mod separation;

pub use error::{Error, Result};
pub use graph::{
    Arc, ExtendedSeedSets, Instance, LabelId, LabelSet, LabeledDigraph, NodeId, ScenarioGraph, ScenarioSet,
    Spread,
};
pub use master::{
    branch_and_benders_cut, brute_force_oracle, greedy_heuristic, Setting, SolveReport, SolverSettings,
};
pub use separation::{BendersCut, LiftMode};
