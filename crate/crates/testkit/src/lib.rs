//! Reference oracles and fixtures for the hhcr test suites.
//!
//! Everything here recomputes distances from raw coordinates and never calls
//! the solver's own evaluation code, so it can be used to check it.

pub mod brute;
pub mod gen;
pub mod invariants;
pub mod lpcheck;

pub use brute::{enumerate_optimum, tsp_length, Problem};
pub use gen::{chao_surrogate, instance_text, random_instance, t1};
