//! An instance bundled with its frozen baseline schedule and limits.

use crate::baseline::{tsp_baseline, OriginalSchedule, TspMode};
use crate::error::Result;
use crate::instance::{DerivedLimits, Instance};
use crate::schedule::{check_feasible, measure, Assessment, Relax, Solution, Violation};

/// Read-only problem data shared by every engine during a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub inst: Instance,
    pub baseline: OriginalSchedule,
    pub limits: DerivedLimits,
}

impl Scenario {
    /// Solves the baseline TSPs and scales the limits by `mu` and `lambda`.
    pub fn prepare(inst: Instance, mu: f64, lambda: f64, mode: TspMode) -> Result<Self> {
        let baseline = OriginalSchedule::build(&inst, mode)?;
        let tsp = tsp_baseline(&inst, mode)?;
        let limits = DerivedLimits::compute(&inst, mu, lambda, tsp)?;
        Ok(Scenario { inst, baseline, limits })
    }

    pub fn new(inst: Instance, baseline: OriginalSchedule, limits: DerivedLimits) -> Self {
        Scenario { inst, baseline, limits }
    }

    /// The baseline route with every new customer rejected.
    pub fn seed_solution(&self) -> Solution {
        Solution::from_route(&self.inst, self.baseline.route().to_vec())
            .expect("baseline visits every existing customer")
    }

    pub fn measure(&self, sol: &Solution) -> Violation {
        measure(sol, &self.baseline, &self.limits)
    }

    pub fn assess(&self, sol: &Solution, relax: Relax) -> Assessment {
        check_feasible(sol, &self.baseline, &self.limits, relax)
    }

    pub fn is_feasible(&self, sol: &Solution) -> bool {
        self.measure(sol).is_feasible()
    }

    pub fn evaluate(&self, route: Vec<usize>) -> Result<Solution> {
        Solution::from_route(&self.inst, route)
    }
}
