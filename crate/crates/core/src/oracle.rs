//! Exact optimum by depth-first branch and bound over all routes.
//!
//! Practical up to about a dozen customers.

use crate::error::{Error, Result};
use crate::scenario::Scenario;
use crate::schedule::{Solution, FEAS_TOL};

/// Hard limit on the number of customers accepted by [`solve_exact`].
pub const ORACLE_LIMIT: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    /// `None` when no route satisfies both constraints.
    pub best: Option<Solution>,
    /// Search-tree nodes expanded.
    pub expanded: u64,
}

impl OracleResult {
    pub fn objective(&self) -> Option<f64> {
        self.best.as_ref().map(Solution::objective)
    }
}

struct Search<'a> {
    sc: &'a Scenario,
    gains: Vec<f64>,
    route: Vec<usize>,
    visited: Vec<bool>,
    existing_left: usize,
    best_gain: f64,
    best_route: Option<Vec<usize>>,
    expanded: u64,
}

impl Search<'_> {
    fn t_max(&self) -> f64 {
        self.sc.limits.t_max + FEAS_TOL
    }

    fn cap(&self) -> f64 {
        self.sc.limits.disruption_cap + FEAS_TOL
    }

    /// Every unvisited existing customer can still be reached on time and
    /// within the budget.
    fn existing_reachable(&self, last: usize, clock: f64) -> bool {
        let inst = &self.sc.inst;
        inst.existing_ids().all(|e| {
            if self.visited[e] {
                return true;
            }
            let arrive = clock + inst.dist(last, e);
            let promised = self.sc.baseline.promised_time(e).unwrap_or(0.0);
            arrive <= promised + self.cap() && arrive + inst.dist(e, 0) <= self.t_max()
        })
    }

    /// Gain of unvisited new customers that can still be visited and
    /// followed by a return within the budget.
    fn reachable_gain(&self, last: usize, clock: f64) -> f64 {
        let inst = &self.sc.inst;
        inst.new_ids()
            .filter(|&j| !self.visited[j] && clock + inst.dist(last, j) + inst.dist(j, 0) <= self.t_max())
            .map(|j| self.gains[j])
            .sum()
    }

    fn dfs(&mut self, clock: f64, gain: f64) {
        self.expanded += 1;
        let inst = &self.sc.inst;
        let last = *self.route.last().expect("route starts at the depot");
        if self.best_route.is_some() && gain + self.reachable_gain(last, clock) <= self.best_gain + FEAS_TOL {
            return;
        }
        if self.existing_left == 0 && clock + inst.dist(last, 0) <= self.t_max() && gain > self.best_gain + FEAS_TOL {
            let mut r = self.route.clone();
            r.push(0);
            self.best_gain = gain;
            self.best_route = Some(r);
        }
        if !self.existing_reachable(last, clock) {
            return;
        }
        for j in inst.customer_ids() {
            if self.visited[j] {
                continue;
            }
            let arrive = clock + inst.dist(last, j);
            if arrive + inst.dist(j, 0) > self.t_max() {
                continue;
            }
            let existing = inst.is_existing(j);
            if existing {
                let promised = self.sc.baseline.promised_time(j).unwrap_or(0.0);
                if (arrive - promised).abs() > self.cap() {
                    continue;
                }
                self.existing_left -= 1;
            }
            self.visited[j] = true;
            self.route.push(j);
            self.dfs(arrive, gain + self.gains[j]);
            self.route.pop();
            self.visited[j] = false;
            if existing {
                self.existing_left += 1;
            }
        }
    }
}

/// Proven optimum of the scenario.
pub fn solve_exact(sc: &Scenario) -> Result<OracleResult> {
    solve_exact_within(sc, ORACLE_LIMIT)
}

/// [`solve_exact`] with a caller-chosen size limit. Run time grows
/// exponentially; tight disruption caps keep 20 customers manageable.
pub fn solve_exact_within(sc: &Scenario, limit: usize) -> Result<OracleResult> {
    let inst = &sc.inst;
    let customers = inst.len() - 1;
    if customers > limit {
        return Err(Error::Capacity {
            limit,
            requested: customers,
        });
    }
    let r = inst.rejection_cost();
    let gains: Vec<f64> = (0..inst.len())
        .map(|j| if inst.is_new(j) { inst.payment(j) + r } else { 0.0 })
        .collect();
    let mut s = Search {
        sc,
        gains,
        route: vec![0],
        visited: vec![false; inst.len()],
        existing_left: inst.n_existing(),
        best_gain: f64::NEG_INFINITY,
        best_route: None,
        expanded: 0,
    };
    s.visited[0] = true;
    s.dfs(0.0, 0.0);
    let mut best = None;
    if let Some(route) = s.best_route {
        let sol = Solution::from_route(inst, route)?;
        if sc.is_feasible(&sol) {
            best = Some(sol);
        }
    }
    Ok(OracleResult {
        best,
        expanded: s.expanded,
    })
}
