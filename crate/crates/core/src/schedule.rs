//! Solution representation, objective, arrival propagation and the two
//! constraint-violation measures.

use std::collections::hash_map::DefaultHasher;
use std::collections::BTreeMap;
use std::fmt;
use std::hash::{Hash, Hasher};

use crate::baseline::OriginalSchedule;
use crate::error::{Error, Result};
use crate::instance::{DerivedLimits, Instance};

/// Absolute tolerance used at constraint boundaries.
pub const FEAS_TOL: f64 = 1e-9;

/// A depot-anchored route with cached arrival times and objective.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    route: Vec<usize>,
    rejected: Vec<usize>,
    arrivals: Vec<Option<f64>>,
    length: f64,
    objective: f64,
}

impl Solution {
    /// Evaluates `route`, checking it against the declared `rejected` set.
    pub fn evaluate(inst: &Instance, route: Vec<usize>, rejected: &[usize]) -> Result<Self> {
        let sol = Self::from_route(inst, route)?;
        let mut declared = rejected.to_vec();
        declared.sort_unstable();
        if declared != sol.rejected {
            return Err(Error::Structure(format!(
                "rejected set {:?} does not match the off-route new customers {:?}",
                declared, sol.rejected
            )));
        }
        Ok(sol)
    }

    /// Evaluates `route`; every new customer missing from it is rejected.
    pub fn from_route(inst: &Instance, route: Vec<usize>) -> Result<Self> {
        let n = inst.len();
        if route.len() < 2 || route[0] != 0 || route[route.len() - 1] != 0 {
            return Err(Error::Structure(format!(
                "route must start and end at the depot: {route:?}"
            )));
        }
        let mut arrivals: Vec<Option<f64>> = vec![None; n];
        let mut clock = 0.0;
        for w in route.windows(2) {
            let (from, to) = (w[0], w[1]);
            if to >= n {
                return Err(Error::Structure(format!("node {to} out of range")));
            }
            clock += inst.dist(from, to);
            if to == 0 {
                continue;
            }
            if arrivals[to].is_some() {
                return Err(Error::Structure(format!("node {to} visited twice")));
            }
            arrivals[to] = Some(clock);
        }
        if route[1..route.len() - 1].contains(&0) {
            return Err(Error::Structure("depot inside the route".into()));
        }
        if let Some(missing) = inst.existing_ids().find(|&e| arrivals[e].is_none()) {
            return Err(Error::Structure(format!(
                "existing customer {missing} missing from route"
            )));
        }
        let rejected: Vec<usize> = inst.new_ids().filter(|&j| arrivals[j].is_none()).collect();
        let served: f64 = route.iter().map(|&i| inst.payment(i)).sum();
        let objective = served - inst.rejection_cost() * rejected.len() as f64;
        Ok(Solution {
            route,
            rejected,
            arrivals,
            length: clock,
            objective,
        })
    }

    pub fn route(&self) -> &[usize] {
        &self.route
    }

    /// Customers on the route, without the depot endpoints.
    pub fn interior(&self) -> &[usize] {
        &self.route[1..self.route.len() - 1]
    }

    pub fn into_route(self) -> Vec<usize> {
        self.route
    }

    pub fn rejected(&self) -> &[usize] {
        &self.rejected
    }

    pub fn arrival(&self, node: usize) -> Option<f64> {
        self.arrivals.get(node).copied().flatten()
    }

    /// Arrival times of every customer on the route, keyed by node id.
    pub fn arrivals(&self) -> BTreeMap<usize, f64> {
        self.arrivals
            .iter()
            .enumerate()
            .filter_map(|(i, a)| a.map(|t| (i, t)))
            .collect()
    }

    pub fn visits(&self, node: usize) -> bool {
        node != 0 && self.arrival(node).is_some()
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn objective(&self) -> f64 {
        self.objective
    }

    /// Number of nodes the solution was evaluated against.
    pub fn node_count(&self) -> usize {
        self.arrivals.len()
    }

    /// Route in canonical orientation: of the route and its reversal, the
    /// one whose first customer has the smaller id.
    pub fn canonical_route(&self) -> Vec<usize> {
        let interior = self.interior();
        match (interior.first(), interior.last()) {
            (Some(first), Some(last)) if last < first => self.route.iter().rev().copied().collect(),
            _ => self.route.clone(),
        }
    }

    /// Hash of the canonical route; a route and its reversal collide.
    pub fn fingerprint(&self) -> u64 {
        let mut h = DefaultHasher::new();
        self.canonical_route().hash(&mut h);
        h.finish()
    }

    /// One-line text form `route=...; rejected=...; obj=...; len=...`.
    pub fn to_line(&self) -> String {
        self.to_string()
    }

    /// Parses the one-line text form and re-evaluates it against `inst`.
    pub fn parse_line(inst: &Instance, line: &str) -> Result<Self> {
        let mut route = None;
        let mut rejected = None;
        for part in line.split(';') {
            let part = part.trim();
            if let Some(v) = part.strip_prefix("route=") {
                route = Some(parse_ids(v)?);
            } else if let Some(v) = part.strip_prefix("rejected=") {
                rejected = Some(parse_ids(v)?);
            }
        }
        let route = route.ok_or_else(|| Error::Structure("missing `route=` field".into()))?;
        Solution::evaluate(inst, route, &rejected.unwrap_or_default())
    }
}

fn parse_ids(text: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| Error::Structure(format!("bad node id `{s}`"))))
        .collect()
}

fn join(ids: &[usize]) -> String {
    ids.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",")
}

impl fmt::Display for Solution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "route={}; rejected={}; obj={}; len={}",
            join(&self.route),
            join(&self.rejected),
            self.objective,
            self.length
        )
    }
}

/// Which constraint a violation mode is allowed to breach.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relax {
    None,
    TravelBudget,
    DisruptionCap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Feasible,
    ConditionallyFeasible,
    Infeasible,
}

/// `ex1` is the travel-budget excess, `ex2` the summed payment of existing
/// customers whose disruption exceeds the cap.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Violation {
    pub ex1: f64,
    pub ex2: f64,
    /// Number of existing customers over the disruption cap.
    pub violators: usize,
}

impl Violation {
    pub fn travel_ok(&self) -> bool {
        self.ex1 == 0.0
    }

    pub fn disruption_ok(&self) -> bool {
        self.violators == 0
    }

    pub fn is_feasible(&self) -> bool {
        self.travel_ok() && self.disruption_ok()
    }

    /// Excess that the given mode penalises.
    pub fn excess(&self, relax: Relax) -> f64 {
        match relax {
            Relax::None => 0.0,
            Relax::TravelBudget => self.ex1,
            Relax::DisruptionCap => self.ex2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Assessment {
    pub violation: Violation,
    pub verdict: Verdict,
}

/// Per-customer arrival deviation from the promised schedule.
pub fn disruption(sol: &Solution, baseline: &OriginalSchedule) -> Result<BTreeMap<usize, f64>> {
    let mut out = BTreeMap::new();
    for (&node, &promised) in baseline.promised() {
        let actual = sol
            .arrival(node)
            .ok_or_else(|| Error::Structure(format!("existing customer {node} not on route")))?;
        out.insert(node, (actual - promised).abs());
    }
    let existing_on_route = sol.interior().iter().filter(|&&i| i <= baseline.n_existing()).count();
    if existing_on_route != out.len() {
        return Err(Error::Structure(
            "baseline does not cover every existing customer".into(),
        ));
    }
    Ok(out)
}

/// Violation measures without allocating.
pub fn measure(sol: &Solution, baseline: &OriginalSchedule, limits: &DerivedLimits) -> Violation {
    let over = sol.length() - limits.t_max;
    let ex1 = if over > FEAS_TOL { over } else { 0.0 };
    let mut ex2 = 0.0;
    let mut violators = 0;
    for (&node, &promised) in baseline.promised() {
        let delta = sol.arrival(node).map_or(f64::INFINITY, |a| (a - promised).abs());
        if delta > limits.disruption_cap + FEAS_TOL {
            ex2 += baseline.payment(node);
            violators += 1;
        }
    }
    Violation { ex1, ex2, violators }
}

/// Feasibility verdict under an optional relaxation.
pub fn check_feasible(sol: &Solution, baseline: &OriginalSchedule, limits: &DerivedLimits, relax: Relax) -> Assessment {
    let violation = measure(sol, baseline, limits);
    let verdict = verdict_for(&violation, relax);
    Assessment { violation, verdict }
}

pub fn verdict_for(v: &Violation, relax: Relax) -> Verdict {
    if v.is_feasible() {
        return Verdict::Feasible;
    }
    let conditional = match relax {
        Relax::None => false,
        Relax::TravelBudget => v.disruption_ok(),
        Relax::DisruptionCap => v.travel_ok(),
    };
    if conditional {
        Verdict::ConditionallyFeasible
    } else {
        Verdict::Infeasible
    }
}

/// Dissimilarity between two solutions over the same instance.
///
/// Symmetric difference of the visited customer sets plus the larger of the
/// two one-sided broken-arc counts, with arcs taken as unordered pairs.
pub fn solution_distance(a: &Solution, b: &Solution) -> Result<f64> {
    if a.node_count() != b.node_count() {
        return Err(Error::Structure("solutions belong to different instances".into()));
    }
    let visited_diff = (1..a.node_count()).filter(|&i| a.visits(i) != b.visits(i)).count();
    let arcs_a = arc_set(a.route());
    let arcs_b = arc_set(b.route());
    let a_only = arcs_a.iter().filter(|arc| arcs_b.binary_search(arc).is_err()).count();
    let b_only = arcs_b.iter().filter(|arc| arcs_a.binary_search(arc).is_err()).count();
    Ok((visited_diff + a_only.max(b_only)) as f64)
}

fn arc_set(route: &[usize]) -> Vec<(usize, usize)> {
    let mut arcs: Vec<(usize, usize)> = route.windows(2).map(|w| (w[0].min(w[1]), w[0].max(w[1]))).collect();
    arcs.sort_unstable();
    arcs.dedup();
    arcs
}
