//! Move operators on a single route: three insertions of new customers, two
//! internal reorderings, and two removals of new customers.
//!
//! Every operator is a pure function of the incoming solution (and the rng
//! for the randomised ones). Ties break toward the lower node id, then the
//! earlier arc.

use rand::Rng;

use crate::instance::Instance;
use crate::schedule::Solution;

const IMPROVE_EPS: f64 = 1e-9;
const TIE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum InsertionOp {
    PaymentPrioritized,
    RestrictedShortest,
    DisturbedShortest,
    /// Greedy best-position insertion, used by the ablation variant.
    BestPosition,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum InternalOp {
    TwoOpt,
    OrOpt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RemovalOp {
    Ratio,
    Longest,
}

impl InsertionOp {
    pub const STANDARD: [InsertionOp; 3] = [
        InsertionOp::PaymentPrioritized,
        InsertionOp::RestrictedShortest,
        InsertionOp::DisturbedShortest,
    ];

    pub fn name(self) -> &'static str {
        match self {
            InsertionOp::PaymentPrioritized => "payment_ins",
            InsertionOp::RestrictedShortest => "shortest_ins",
            InsertionOp::DisturbedShortest => "disturbed_ins",
            InsertionOp::BestPosition => "best_pos_ins",
        }
    }
}

impl InternalOp {
    pub const ALL: [InternalOp; 2] = [InternalOp::TwoOpt, InternalOp::OrOpt];

    pub fn name(self) -> &'static str {
        match self {
            InternalOp::TwoOpt => "2opt",
            InternalOp::OrOpt => "oropt",
        }
    }
}

impl RemovalOp {
    pub const ALL: [RemovalOp; 2] = [RemovalOp::Ratio, RemovalOp::Longest];

    pub fn name(self) -> &'static str {
        match self {
            RemovalOp::Ratio => "ratio_rem",
            RemovalOp::Longest => "longest_rem",
        }
    }
}

/// Result of one operator application.
///
/// `Unchanged` is the no-op signal for insertions and removals (nothing to
/// insert or remove) and the no-improvement flag for internal moves.
#[derive(Debug, Clone, PartialEq)]
pub enum OpResult {
    Changed(Solution),
    Unchanged,
}

impl OpResult {
    pub fn is_changed(&self) -> bool {
        matches!(self, OpResult::Changed(_))
    }

    /// The changed solution, or `fallback` when nothing happened.
    pub fn unwrap_or(self, fallback: Solution) -> Solution {
        match self {
            OpResult::Changed(s) => s,
            OpResult::Unchanged => fallback,
        }
    }
}

/// Shared knobs of the randomised insertions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InsertionParams {
    /// Probability of taking the random branch.
    pub random_prob: f64,
    /// Perturbation factor of the disturbed insertion.
    pub perturbation: f64,
}

impl Default for InsertionParams {
    fn default() -> Self {
        InsertionParams {
            random_prob: 0.1,
            perturbation: 0.1,
        }
    }
}

fn rebuild(inst: &Instance, route: Vec<usize>) -> Solution {
    Solution::from_route(inst, route).expect("operators preserve route structure")
}

fn unvisited(sol: &Solution, inst: &Instance) -> Vec<usize> {
    inst.new_ids().filter(|&j| !sol.visits(j)).collect()
}

/// Extra travel from inserting `node` between `route[pos]` and `route[pos + 1]`.
#[inline]
pub fn insertion_cost(inst: &Instance, route: &[usize], node: usize, pos: usize) -> f64 {
    let (a, b) = (route[pos], route[pos + 1]);
    inst.dist(a, node) + inst.dist(node, b) - inst.dist(a, b)
}

/// Cheapest arc for `node`, earliest position on ties.
pub fn best_position(inst: &Instance, route: &[usize], node: usize) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for pos in 0..route.len() - 1 {
        let c = insertion_cost(inst, route, node, pos);
        if c < best.1 - TIE_EPS {
            best = (pos, c);
        }
    }
    best
}

fn insert_at(inst: &Instance, sol: &Solution, node: usize, pos: usize) -> Solution {
    let mut route = sol.route().to_vec();
    route.insert(pos + 1, node);
    rebuild(inst, route)
}

/// Highest-payment unvisited customer at its cheapest arc; with
/// probability `random_prob` a uniformly random unvisited customer instead.
pub fn payment_prioritized_insertion<R: Rng + ?Sized>(
    sol: &Solution,
    inst: &Instance,
    rng: &mut R,
    params: InsertionParams,
) -> OpResult {
    let cands = unvisited(sol, inst);
    if cands.is_empty() {
        return OpResult::Unchanged;
    }
    let node = if rng.gen_bool(params.random_prob.clamp(0.0, 1.0)) {
        cands[rng.gen_range(0..cands.len())]
    } else {
        let mut best = cands[0];
        for &c in &cands[1..] {
            if inst.payment(c) > inst.payment(best) {
                best = c;
            }
        }
        best
    };
    let (pos, _) = best_position(inst, sol.route(), node);
    OpResult::Changed(insert_at(inst, sol, node, pos))
}

/// The `(node, arc)` pair with the least travel increase over all unvisited
/// customers; with probability `random_prob` a random customer at its
/// cheapest arc.
pub fn restricted_shortest_insertion<R: Rng + ?Sized>(
    sol: &Solution,
    inst: &Instance,
    rng: &mut R,
    params: InsertionParams,
) -> OpResult {
    let cands = unvisited(sol, inst);
    if cands.is_empty() {
        return OpResult::Unchanged;
    }
    let route = sol.route();
    let (node, pos) = if rng.gen_bool(params.random_prob.clamp(0.0, 1.0)) {
        let node = cands[rng.gen_range(0..cands.len())];
        (node, best_position(inst, route, node).0)
    } else {
        let mut best = (cands[0], 0, f64::INFINITY);
        for &c in &cands {
            let (pos, inc) = best_position(inst, route, c);
            if inc < best.2 - TIE_EPS {
                best = (c, pos, inc);
            }
        }
        (best.0, best.1)
    };
    OpResult::Changed(insert_at(inst, sol, node, pos))
}

/// Perturbation added to an arc score: `shortest_arc * factor * r`, with
/// `r` uniform on (-1, 1).
pub fn perturbation(shortest_arc: f64, factor: f64, r: f64) -> f64 {
    shortest_arc * factor * r
}

/// A random unvisited customer is placed on the arc minimising its travel
/// increase after each arc score is perturbed by
/// `perturbation(shortest_arc, u, r)`; with probability `random_prob` the arc
/// is chosen uniformly instead.
pub fn disturbed_shortest_insertion<R: Rng + ?Sized>(
    sol: &Solution,
    inst: &Instance,
    rng: &mut R,
    params: InsertionParams,
) -> OpResult {
    let cands = unvisited(sol, inst);
    if cands.is_empty() {
        return OpResult::Unchanged;
    }
    let route = sol.route();
    let node = cands[rng.gen_range(0..cands.len())];
    let arcs = route.len() - 1;
    let pos = if rng.gen_bool(params.random_prob.clamp(0.0, 1.0)) {
        rng.gen_range(0..arcs)
    } else {
        let shortest = route
            .windows(2)
            .map(|w| inst.dist(w[0], w[1]))
            .fold(f64::INFINITY, f64::min);
        let shortest = if shortest.is_finite() { shortest } else { 0.0 };
        let mut best = (0, f64::INFINITY);
        for pos in 0..arcs {
            let r: f64 = if params.perturbation == 0.0 {
                0.0
            } else {
                rng.gen_range(-1.0..1.0)
            };
            let score = insertion_cost(inst, route, node, pos) + perturbation(shortest, params.perturbation, r);
            if score < best.1 - TIE_EPS {
                best = (pos, score);
            }
        }
        best.0
    };
    OpResult::Changed(insert_at(inst, sol, node, pos))
}

/// Greedy insertion maximising `(payment + rejection_cost) / increase` at the
/// customer's cheapest arc. Deterministic.
pub fn best_position_insertion(sol: &Solution, inst: &Instance) -> OpResult {
    let cands = unvisited(sol, inst);
    if cands.is_empty() {
        return OpResult::Unchanged;
    }
    let route = sol.route();
    let mut best: Option<(usize, usize, f64)> = None;
    for &c in &cands {
        let (pos, inc) = best_position(inst, route, c);
        let gain = inst.payment(c) + inst.rejection_cost();
        let score = if inc <= TIE_EPS { f64::INFINITY } else { gain / inc };
        match best {
            Some((_, _, s)) if !(score > s + TIE_EPS) => {}
            _ => best = Some((c, pos, score)),
        }
    }
    let (node, pos, _) = best.expect("non-empty candidates");
    OpResult::Changed(insert_at(inst, sol, node, pos))
}

/// Applies the single best-improving 2-opt move.
pub fn two_opt(sol: &Solution, inst: &Instance) -> OpResult {
    let route = sol.route();
    let n = route.len();
    if n < 4 {
        return OpResult::Unchanged;
    }
    let mut best: Option<(usize, usize, f64)> = None;
    for i in 0..n - 3 {
        for j in (i + 2)..(n - 1) {
            let (a, b, c, d) = (route[i], route[i + 1], route[j], route[j + 1]);
            let delta = inst.dist(a, c) + inst.dist(b, d) - inst.dist(a, b) - inst.dist(c, d);
            if delta < -IMPROVE_EPS && best.is_none_or(|(_, _, bd)| delta < bd - TIE_EPS) {
                best = Some((i, j, delta));
            }
        }
    }
    match best {
        Some((i, j, _)) => {
            let mut r = route.to_vec();
            r[i + 1..=j].reverse();
            OpResult::Changed(rebuild(inst, r))
        }
        None => OpResult::Unchanged,
    }
}

/// Longest chain relocated by [`or_opt`].
pub const OR_OPT_MAX_CHAIN: usize = 3;

/// Applies the single best-improving relocation of a chain of one to three
/// consecutive customers, keeping the chain's order.
pub fn or_opt(sol: &Solution, inst: &Instance) -> OpResult {
    let route = sol.route();
    let n = route.len();
    if n < 4 {
        return OpResult::Unchanged;
    }
    // (start, chain length, target arc in the reduced route, delta)
    let mut best: Option<(usize, usize, usize, f64)> = None;
    let mut reduced = Vec::with_capacity(n);
    for start in 1..n - 1 {
        for len in 1..=OR_OPT_MAX_CHAIN {
            let end = start + len - 1;
            if end > n - 2 {
                break;
            }
            let (prev, next) = (route[start - 1], route[end + 1]);
            let (first, last) = (route[start], route[end]);
            let saving = inst.dist(prev, first) + inst.dist(last, next) - inst.dist(prev, next);
            reduced.clear();
            reduced.extend_from_slice(&route[..start]);
            reduced.extend_from_slice(&route[end + 1..]);
            for pos in 0..reduced.len() - 1 {
                if pos == start - 1 {
                    continue;
                }
                let (a, b) = (reduced[pos], reduced[pos + 1]);
                let cost = inst.dist(a, first) + inst.dist(last, b) - inst.dist(a, b);
                let delta = cost - saving;
                if delta < -IMPROVE_EPS && best.is_none_or(|(.., bd)| delta < bd - TIE_EPS) {
                    best = Some((start, len, pos, delta));
                }
            }
        }
    }
    match best {
        Some((start, len, pos, _)) => {
            let chain: Vec<usize> = route[start..start + len].to_vec();
            let mut r: Vec<usize> = route[..start].to_vec();
            r.extend_from_slice(&route[start + len..]);
            let at = pos + 1;
            r.splice(at..at, chain);
            OpResult::Changed(rebuild(inst, r))
        }
        None => OpResult::Unchanged,
    }
}

/// Travel saved by dropping the customer at route position `pos`.
#[inline]
pub fn removal_saving(inst: &Instance, route: &[usize], pos: usize) -> f64 {
    let (a, k, b) = (route[pos - 1], route[pos], route[pos + 1]);
    inst.dist(a, k) + inst.dist(k, b) - inst.dist(a, b)
}

/// Visited new customers as `(id, position, saving)`, ascending by id.
fn visited_new(sol: &Solution, inst: &Instance) -> Vec<(usize, usize, f64)> {
    let route = sol.route();
    let mut out: Vec<(usize, usize, f64)> = (1..route.len() - 1)
        .filter(|&p| inst.is_new(route[p]))
        .map(|p| (route[p], p, removal_saving(inst, route, p)))
        .collect();
    out.sort_unstable_by_key(|&(id, ..)| id);
    out
}

fn remove_at(inst: &Instance, sol: &Solution, pos: usize) -> Solution {
    let mut route = sol.route().to_vec();
    route.remove(pos);
    rebuild(inst, route)
}

/// Payment per unit of travel a visited new customer contributes.
pub fn payment_ratio(payment: f64, saving: f64) -> f64 {
    if saving > TIE_EPS {
        payment / saving
    } else if payment > 0.0 {
        f64::INFINITY
    } else {
        0.0
    }
}

/// Removes the visited new customer with the smallest payment/travel ratio.
pub fn ratio_removal(sol: &Solution, inst: &Instance) -> OpResult {
    let cands = visited_new(sol, inst);
    let mut best: Option<(usize, f64)> = None;
    for &(id, pos, saving) in &cands {
        let ratio = payment_ratio(inst.payment(id), saving);
        if best.is_none_or(|(_, br)| ratio < br - TIE_EPS) {
            best = Some((pos, ratio));
        }
    }
    match best {
        Some((pos, _)) => OpResult::Changed(remove_at(inst, sol, pos)),
        None => OpResult::Unchanged,
    }
}

/// Removes the visited new customer whose removal saves the most travel.
pub fn longest_removal(sol: &Solution, inst: &Instance) -> OpResult {
    let cands = visited_new(sol, inst);
    let mut best: Option<(usize, f64)> = None;
    for &(_, pos, saving) in &cands {
        if best.is_none_or(|(_, bs)| saving > bs + TIE_EPS) {
            best = Some((pos, saving));
        }
    }
    match best {
        Some((pos, _)) => OpResult::Changed(remove_at(inst, sol, pos)),
        None => OpResult::Unchanged,
    }
}

pub fn apply_insertion<R: Rng + ?Sized>(
    op: InsertionOp,
    sol: &Solution,
    inst: &Instance,
    rng: &mut R,
    params: InsertionParams,
) -> OpResult {
    match op {
        InsertionOp::PaymentPrioritized => payment_prioritized_insertion(sol, inst, rng, params),
        InsertionOp::RestrictedShortest => restricted_shortest_insertion(sol, inst, rng, params),
        InsertionOp::DisturbedShortest => disturbed_shortest_insertion(sol, inst, rng, params),
        InsertionOp::BestPosition => best_position_insertion(sol, inst),
    }
}

pub fn apply_internal(op: InternalOp, sol: &Solution, inst: &Instance) -> OpResult {
    match op {
        InternalOp::TwoOpt => two_opt(sol, inst),
        InternalOp::OrOpt => or_opt(sol, inst),
    }
}

pub fn apply_removal(op: RemovalOp, sol: &Solution, inst: &Instance) -> OpResult {
    match op {
        RemovalOp::Ratio => ratio_removal(sol, inst),
        RemovalOp::Longest => longest_removal(sol, inst),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::tests::t1;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const DET: InsertionParams = InsertionParams {
        random_prob: 0.0,
        perturbation: 0.0,
    };

    fn sol(inst: &Instance, route: &[usize]) -> Solution {
        Solution::from_route(inst, route.to_vec()).unwrap()
    }

    fn route_of(r: OpResult) -> Vec<usize> {
        match r {
            OpResult::Changed(s) => s.into_route(),
            OpResult::Unchanged => panic!("expected a change"),
        }
    }

    #[test]
    fn insertion_increments_on_t1() {
        let inst = t1();
        let r = [0, 1, 2, 0];
        assert_eq!(insertion_cost(&inst, &r, 3, 0), 6.0);
        assert_eq!(insertion_cost(&inst, &r, 3, 1), 4.0);
        assert_eq!(insertion_cost(&inst, &r, 3, 2), 2.0);
        assert_eq!(insertion_cost(&inst, &r, 4, 0), 6.0);
        assert_eq!(insertion_cost(&inst, &r, 4, 1), 4.0);
    }

    #[test]
    fn payment_prioritized_inserts_n1_at_tail() {
        let inst = t1();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = sol(&inst, &[0, 1, 2, 0]);
        let out = payment_prioritized_insertion(&s, &inst, &mut rng, DET);
        assert_eq!(route_of(out), vec![0, 1, 2, 3, 0]);
    }

    #[test]
    fn singleton_candidate_both_branches() {
        let inst = t1();
        let s = sol(&inst, &[0, 1, 2, 3, 0]);
        for p in [0.0, 1.0] {
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            let params = InsertionParams {
                random_prob: p,
                perturbation: 0.0,
            };
            let r = route_of(payment_prioritized_insertion(&s, &inst, &mut rng, params));
            assert!(r.contains(&4));
        }
    }

    #[test]
    fn random_branch_is_seed_deterministic() {
        let inst = t1();
        let s = sol(&inst, &[0, 1, 2, 0]);
        let params = InsertionParams {
            random_prob: 1.0,
            perturbation: 0.1,
        };
        let a = payment_prioritized_insertion(&s, &inst, &mut ChaCha8Rng::seed_from_u64(9), params);
        let b = payment_prioritized_insertion(&s, &inst, &mut ChaCha8Rng::seed_from_u64(9), params);
        assert_eq!(a, b);
        let a = disturbed_shortest_insertion(&s, &inst, &mut ChaCha8Rng::seed_from_u64(5), params);
        let b = disturbed_shortest_insertion(&s, &inst, &mut ChaCha8Rng::seed_from_u64(5), params);
        assert_eq!(a, b);
    }

    #[test]
    fn restricted_shortest_picks_global_minimum() {
        let inst = t1();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = sol(&inst, &[0, 1, 2, 0]);
        let out = restricted_shortest_insertion(&s, &inst, &mut rng, DET);
        assert_eq!(route_of(out), vec![0, 1, 2, 3, 0]);

        let full = sol(&inst, &[0, 1, 4, 2, 3, 0]);
        assert_eq!(
            restricted_shortest_insertion(&full, &inst, &mut rng, DET),
            OpResult::Unchanged
        );
    }

    #[test]
    fn restricted_shortest_tie_goes_to_lower_id() {
        // two new customers mirrored across the depot-existing axis
        let inst = Instance::new(
            (0.0, 0.0),
            &[(4.0, 0.0, 1.0)],
            &[(2.0, 1.0, 1.0), (2.0, -1.0, 1.0)],
            None,
        )
        .unwrap();
        let s = sol(&inst, &[0, 1, 0]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let r = route_of(restricted_shortest_insertion(&s, &inst, &mut rng, DET));
        assert_eq!(r, vec![0, 2, 1, 0]);
    }

    #[test]
    fn disturbed_without_perturbation_takes_cheapest_arc() {
        let inst = t1();
        let s = sol(&inst, &[0, 1, 2, 0]);
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let r = route_of(disturbed_shortest_insertion(&s, &inst, &mut rng, DET));
            let node = r.iter().copied().find(|&i| i > 2).unwrap();
            let expected = if node == 3 {
                vec![0, 1, 2, 3, 0]
            } else {
                vec![0, 1, 4, 2, 0]
            };
            assert_eq!(r, expected);
        }
    }

    #[test]
    fn perturbation_value() {
        assert!((perturbation(3.0, 0.1, 1.0) - 0.3).abs() < 1e-12);
        assert_eq!(perturbation(3.0, 0.0, 0.7), 0.0);
    }

    #[test]
    fn two_opt_uncrosses() {
        let inst = t1();
        let s = sol(&inst, &[0, 1, 3, 2, 0]);
        assert_eq!(s.length(), 16.0);
        let out = match two_opt(&s, &inst) {
            OpResult::Changed(o) => o,
            OpResult::Unchanged => panic!(),
        };
        assert_eq!(out.length(), 14.0);
        assert_eq!(out.route(), &[0, 1, 2, 3, 0]);
        assert_eq!(two_opt(&out, &inst), OpResult::Unchanged);
    }

    #[test]
    fn two_opt_minimal_case() {
        let inst = t1();
        assert_eq!(two_opt(&sol(&inst, &[0, 1, 2, 0]), &inst), OpResult::Unchanged);
    }

    #[test]
    fn or_opt_relocates_single_node() {
        let inst = t1();
        let s = sol(&inst, &[0, 1, 3, 2, 0]);
        let out = match or_opt(&s, &inst) {
            OpResult::Changed(o) => o,
            OpResult::Unchanged => panic!(),
        };
        assert_eq!(out.length(), 14.0);
        assert_eq!(or_opt(&out, &inst), OpResult::Unchanged);
    }

    #[test]
    fn or_opt_chain_capped_at_three() {
        // ten points on a line visited as a zig-zag block
        let pts: Vec<(f64, f64, f64)> = (1..=10).map(|i| (i as f64, 0.0, 1.0)).collect();
        let inst = Instance::new((0.0, 0.0), &pts, &[], None).unwrap();
        // moving the 4-chain 5..8 would be required to fix this in one step
        let s = sol(&inst, &[0, 1, 2, 3, 4, 9, 10, 5, 6, 7, 8, 0]);
        let out = match or_opt(&s, &inst) {
            OpResult::Changed(o) => o,
            OpResult::Unchanged => panic!(),
        };
        let moved: Vec<usize> = s
            .route()
            .iter()
            .zip(out.route())
            .filter(|(a, b)| a != b)
            .map(|(a, _)| *a)
            .collect();
        assert!(!moved.is_empty());
        assert!(out.length() < s.length());
    }

    #[test]
    fn removals_on_t1() {
        let inst = t1();
        let s = sol(&inst, &[0, 1, 4, 2, 3, 0]);
        let route = s.route().to_vec();
        assert_eq!(removal_saving(&inst, &route, 2), 4.0);
        assert_eq!(removal_saving(&inst, &route, 4), 2.0);
        assert_eq!(route_of(ratio_removal(&s, &inst)), vec![0, 1, 2, 3, 0]);
        assert_eq!(route_of(longest_removal(&s, &inst)), vec![0, 1, 2, 3, 0]);
    }

    #[test]
    fn removal_edge_cases() {
        let inst = t1();
        let none = sol(&inst, &[0, 1, 2, 0]);
        assert_eq!(ratio_removal(&none, &inst), OpResult::Unchanged);
        assert_eq!(longest_removal(&none, &inst), OpResult::Unchanged);
        let one = sol(&inst, &[0, 1, 2, 3, 0]);
        assert_eq!(route_of(ratio_removal(&one, &inst)), vec![0, 1, 2, 0]);
    }

    #[test]
    fn removal_ties_pick_lower_id() {
        let inst = Instance::new(
            (0.0, 0.0),
            &[(4.0, 0.0, 1.0)],
            &[(2.0, 1.0, 3.0), (2.0, -1.0, 3.0)],
            None,
        )
        .unwrap();
        let s = sol(&inst, &[0, 3, 1, 2, 0]);
        assert_eq!(route_of(longest_removal(&s, &inst)), vec![0, 3, 1, 0]);
        assert_eq!(route_of(ratio_removal(&s, &inst)), vec![0, 3, 1, 0]);
    }

    #[test]
    fn best_position_prefers_profit_per_travel() {
        let inst = t1();
        let s = sol(&inst, &[0, 1, 2, 0]);
        // N1: (8+2)/2 = 5, N2: (5+2)/4 = 1.75
        assert_eq!(route_of(best_position_insertion(&s, &inst)), vec![0, 1, 2, 3, 0]);
    }
}
