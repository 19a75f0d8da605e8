//! Structural checks on solver output, recomputed from coordinates.

use hhcr_core::schedule::verdict_for;
use hhcr_core::{Instance, Relax, Scenario, Solution, Verdict};

use crate::brute::euclid;

const EPS: f64 = 1e-7;

fn d(inst: &Instance, i: usize, j: usize) -> f64 {
    let (a, b) = (inst.node(i), inst.node(j));
    euclid((a.x, a.y), (b.x, b.y))
}

/// Route shape, multiplicities, rejected set, arrival propagation, length
/// and objective.
pub fn check_structure(inst: &Instance, sol: &Solution) -> Result<(), String> {
    let route = sol.route();
    if route.len() < 2 || route[0] != 0 || route[route.len() - 1] != 0 {
        return Err(format!("route {route:?} must start and end at the depot"));
    }
    let mut seen = vec![0usize; inst.len()];
    for &v in &route[1..route.len() - 1] {
        if v == 0 || v >= inst.len() {
            return Err(format!("bad interior node {v}"));
        }
        seen[v] += 1;
    }
    for e in inst.existing_ids() {
        if seen[e] != 1 {
            return Err(format!("existing customer {e} visited {} times", seen[e]));
        }
    }
    let mut rejected = Vec::new();
    for j in inst.new_ids() {
        match seen[j] {
            0 => rejected.push(j),
            1 => {}
            k => return Err(format!("new customer {j} visited {k} times")),
        }
    }
    if rejected != sol.rejected() {
        return Err(format!("rejected set {:?} != {:?}", sol.rejected(), rejected));
    }
    let mut t = 0.0;
    for w in route.windows(2) {
        t += d(inst, w[0], w[1]);
        if w[1] != 0 {
            let got = sol.arrival(w[1]).ok_or_else(|| format!("no arrival at {}", w[1]))?;
            if (got - t).abs() > EPS {
                return Err(format!("arrival at {} is {got}, expected {t}", w[1]));
            }
        }
    }
    for &j in &rejected {
        if sol.arrival(j).is_some() {
            return Err(format!("rejected customer {j} has an arrival time"));
        }
    }
    if (sol.length() - t).abs() > EPS {
        return Err(format!("length {} != {t}", sol.length()));
    }
    let f: f64 = (1..inst.len())
        .map(|i| {
            if seen[i] == 1 {
                inst.node(i).payment
            } else {
                -inst.rejection_cost()
            }
        })
        .sum();
    if (sol.objective() - f).abs() > EPS {
        return Err(format!("objective {} != {f}", sol.objective()));
    }
    Ok(())
}

/// The solver's violation measures and verdicts agree with a recomputation.
pub fn check_verdicts(sc: &Scenario, sol: &Solution) -> Result<(), String> {
    let inst = &sc.inst;
    let ex1 = (sol.length() - sc.limits.t_max).max(0.0);
    let mut violators = 0;
    let mut ex2 = 0.0;
    for e in inst.existing_ids() {
        let promised = sc.baseline.promised_time(e).ok_or("baseline misses a customer")?;
        let delta = (sol.arrival(e).unwrap_or(f64::INFINITY) - promised).abs();
        if delta > sc.limits.disruption_cap + 1e-9 {
            violators += 1;
            ex2 += inst.node(e).payment;
        }
    }
    let v = sc.measure(sol);
    if (v.ex1 - ex1).abs() > EPS && !(ex1 <= 1e-9 && v.ex1 == 0.0) {
        return Err(format!("ex1 {} != {ex1}", v.ex1));
    }
    if v.violators != violators || (v.ex2 - ex2).abs() > EPS {
        return Err(format!("ex2 {} / {} != {ex2} / {violators}", v.ex2, v.violators));
    }
    let travel_ok = ex1 <= 1e-9;
    let disruption_ok = violators == 0;
    for relax in [Relax::None, Relax::TravelBudget, Relax::DisruptionCap] {
        let expected = if travel_ok && disruption_ok {
            Verdict::Feasible
        } else if (relax == Relax::TravelBudget && disruption_ok) || (relax == Relax::DisruptionCap && travel_ok) {
            Verdict::ConditionallyFeasible
        } else {
            Verdict::Infeasible
        };
        if verdict_for(&v, relax) != expected {
            return Err(format!("verdict under {relax:?} disagrees"));
        }
    }
    Ok(())
}

pub fn check_all(sc: &Scenario, sol: &Solution) -> Result<(), String> {
    check_structure(&sc.inst, sol)?;
    check_verdicts(sc, sol)
}
