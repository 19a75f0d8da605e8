//! The original (pre-disruption) schedule and the full-node TSP baseline.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::instance::Instance;

/// Largest node set the subset DP will accept.
pub const EXACT_CAPACITY: usize = 20;
/// `Auto` mode switches to the heuristic above this many nodes.
pub const AUTO_EXACT_LIMIT: usize = 15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TspMode {
    Exact,
    Heuristic,
    #[default]
    Auto,
}

impl std::str::FromStr for TspMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "exact" => Ok(TspMode::Exact),
            "heuristic" => Ok(TspMode::Heuristic),
            "auto" => Ok(TspMode::Auto),
            other => Err(Error::Config(format!("unknown tsp mode `{other}`"))),
        }
    }
}

/// Depot-anchored closed tour.
#[derive(Debug, Clone, PartialEq)]
pub struct Tour {
    pub route: Vec<usize>,
    pub length: f64,
}

/// Solves a TSP over `nodes` plus the depot.
pub fn solve_tsp(inst: &Instance, nodes: &[usize], mode: TspMode) -> Result<Tour> {
    if nodes.is_empty() {
        return Err(Error::Domain("TSP over an empty node set".into()));
    }
    if let Some(&bad) = nodes.iter().find(|&&i| i == 0 || i >= inst.len()) {
        return Err(Error::Domain(format!("node {bad} is not a customer")));
    }
    let mut sorted = nodes.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let exact = match mode {
        TspMode::Exact => {
            if sorted.len() > EXACT_CAPACITY {
                return Err(Error::Capacity {
                    limit: EXACT_CAPACITY,
                    requested: sorted.len(),
                });
            }
            true
        }
        TspMode::Heuristic => false,
        TspMode::Auto => sorted.len() <= AUTO_EXACT_LIMIT,
    };
    let route = if exact {
        held_karp(inst, &sorted)
    } else {
        let mut route = nearest_neighbour(inst, &sorted);
        two_opt_descent(inst, &mut route);
        route
    };
    let route = orient(route);
    let length = route_length(inst, &route);
    Ok(Tour { route, length })
}

pub fn route_length(inst: &Instance, route: &[usize]) -> f64 {
    route.windows(2).map(|w| inst.dist(w[0], w[1])).sum()
}

/// Of a tour and its reversal, keep the one whose first customer has the
/// smaller id.
fn orient(mut route: Vec<usize>) -> Vec<usize> {
    if route.len() > 3 && route[route.len() - 2] < route[1] {
        route.reverse();
    }
    route
}

fn held_karp(inst: &Instance, nodes: &[usize]) -> Vec<usize> {
    let k = nodes.len();
    let full = 1usize << k;
    let mut cost = vec![f64::INFINITY; full * k];
    let mut parent = vec![u8::MAX; full * k];
    for (j, &node) in nodes.iter().enumerate() {
        cost[(1 << j) * k + j] = inst.dist(0, node);
    }
    for mask in 1..full {
        for last in 0..k {
            if mask & (1 << last) == 0 {
                continue;
            }
            let here = cost[mask * k + last];
            if !here.is_finite() {
                continue;
            }
            for next in 0..k {
                if mask & (1 << next) != 0 {
                    continue;
                }
                let m2 = mask | (1 << next);
                let c = here + inst.dist(nodes[last], nodes[next]);
                if c < cost[m2 * k + next] {
                    cost[m2 * k + next] = c;
                    parent[m2 * k + next] = last as u8;
                }
            }
        }
    }
    let mask = full - 1;
    let mut best = f64::INFINITY;
    let mut last = 0;
    for j in 0..k {
        let c = cost[mask * k + j] + inst.dist(nodes[j], 0);
        if c < best {
            best = c;
            last = j;
        }
    }
    let mut order = Vec::with_capacity(k + 2);
    let mut mask = mask;
    let mut cur = last;
    loop {
        order.push(nodes[cur]);
        let p = parent[mask * k + cur];
        mask &= !(1 << cur);
        if p == u8::MAX {
            break;
        }
        cur = p as usize;
    }
    order.push(0);
    order.reverse();
    order.push(0);
    order
}

fn nearest_neighbour(inst: &Instance, nodes: &[usize]) -> Vec<usize> {
    let mut left = nodes.to_vec();
    let mut route = vec![0];
    let mut cur = 0;
    while !left.is_empty() {
        let (idx, _) = left.iter().enumerate().fold((0, f64::INFINITY), |(bi, bd), (i, &n)| {
            let d = inst.dist(cur, n);
            if d < bd {
                (i, d)
            } else {
                (bi, bd)
            }
        });
        cur = left.remove(idx);
        route.push(cur);
    }
    route.push(0);
    route
}

/// First-improvement 2-opt until no move shortens the tour.
pub(crate) fn two_opt_descent(inst: &Instance, route: &mut [usize]) {
    let n = route.len();
    let mut improved = true;
    while improved {
        improved = false;
        for i in 0..n.saturating_sub(3) {
            for j in (i + 2)..(n - 1) {
                let (a, b, c, d) = (route[i], route[i + 1], route[j], route[j + 1]);
                let delta = inst.dist(a, c) + inst.dist(b, d) - inst.dist(a, b) - inst.dist(c, d);
                if delta < -1e-10 {
                    route[i + 1..=j].reverse();
                    improved = true;
                }
            }
        }
    }
}

/// Cost-minimal tour over the existing customers with its promised arrival
/// times. Frozen for the rest of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct OriginalSchedule {
    route: Vec<usize>,
    promised: BTreeMap<usize, f64>,
    payments: BTreeMap<usize, f64>,
    length: f64,
    n_existing: usize,
}

impl OriginalSchedule {
    /// Solves the TSP over the existing customers and propagates arrivals.
    pub fn build(inst: &Instance, mode: TspMode) -> Result<Self> {
        if inst.n_existing() == 0 {
            return Err(Error::Domain("instance has no existing customers".into()));
        }
        let nodes: Vec<usize> = inst.existing_ids().collect();
        let tour = solve_tsp(inst, &nodes, mode)?;
        Self::from_route(inst, tour.route)
    }

    /// Wraps a given depot-anchored permutation of the existing customers.
    pub fn from_route(inst: &Instance, route: Vec<usize>) -> Result<Self> {
        if route.len() < 2 || route[0] != 0 || route[route.len() - 1] != 0 {
            return Err(Error::Structure(
                "baseline route must start and end at the depot".into(),
            ));
        }
        let interior = &route[1..route.len() - 1];
        let mut seen: Vec<usize> = interior.to_vec();
        seen.sort_unstable();
        let expected: Vec<usize> = inst.existing_ids().collect();
        if seen != expected {
            return Err(Error::Structure(format!(
                "baseline must visit each existing customer once, got {interior:?}"
            )));
        }
        let mut promised = BTreeMap::new();
        let mut payments = BTreeMap::new();
        let mut clock = 0.0;
        for w in route.windows(2) {
            clock += inst.dist(w[0], w[1]);
            if w[1] != 0 {
                promised.insert(w[1], clock);
                payments.insert(w[1], inst.payment(w[1]));
            }
        }
        Ok(OriginalSchedule {
            route,
            promised,
            payments,
            length: clock,
            n_existing: inst.n_existing(),
        })
    }

    pub fn route(&self) -> &[usize] {
        &self.route
    }

    pub fn promised(&self) -> &BTreeMap<usize, f64> {
        &self.promised
    }

    pub fn promised_time(&self, node: usize) -> Option<f64> {
        self.promised.get(&node).copied()
    }

    pub fn payment(&self, node: usize) -> f64 {
        self.payments.get(&node).copied().unwrap_or(0.0)
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn n_existing(&self) -> usize {
        self.n_existing
    }
}

/// Length of a TSP tour over every customer, the travel-budget baseline.
pub fn tsp_baseline(inst: &Instance, mode: TspMode) -> Result<f64> {
    let nodes: Vec<usize> = inst.customer_ids().collect();
    Ok(solve_tsp(inst, &nodes, mode)?.length)
}
