//! Single-caregiver home-care rescheduling with rejection of new customers.
//!
//! Given an optimal baseline route over existing customers, the solver
//! re-optimises the route to profitably insert same-day customers under a
//! travel-time budget and a per-customer arrival-disruption cap. The search
//! is a memetic algorithm: an adaptive large neighbourhood search builds the
//! initial population, and a tabu search with two tabu lists and a
//! violation-penalised evaluation refines each member.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod alns;
pub mod bank;
pub mod baseline;
pub mod config;
pub mod error;
pub mod instance;
pub mod lp;
pub mod memetic;
pub mod operators;
pub mod oracle;
pub mod scenario;
pub mod schedule;
pub mod ts;

pub use alns::{alns_run, build_population, SaState};
pub use bank::OperatorBank;
pub use baseline::{solve_tsp, tsp_baseline, OriginalSchedule, Tour, TspMode};
pub use config::SolverConfig;
pub use error::{Error, Result};
pub use instance::{DerivedLimits, Instance, Node, NodeKind};
pub use memetic::{memetic_solve, run_algorithm, run_algorithm_traced, Algorithm, Population, RunReport, RunTraces};
pub use oracle::{solve_exact, solve_exact_within, OracleResult};
pub use scenario::Scenario;
pub use schedule::{
    check_feasible, disruption, measure, solution_distance, Assessment, Relax, Solution, Verdict, Violation,
};
pub use ts::ts_run;
