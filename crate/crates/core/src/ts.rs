//! Dual tabu search with adaptive neighbourhood selection.
//!
//! The local-improvement step of the memetic loop. Besides the strict
//! incumbent `S*` it keeps a conditional incumbent `S'` that may breach one
//! constraint, scored by the penalised value `f - phi * ex`.

use std::collections::{BTreeMap, VecDeque};

use rand::Rng;

use crate::alns::composite_move;
use crate::bank::OperatorBank;
use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::scenario::Scenario;
use crate::schedule::{verdict_for, Relax, Solution, Verdict, Violation};

const OBJ_EPS: f64 = 1e-9;

/// New customers whose visit status changed recently, with expiry iteration.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TabuNodeList {
    entries: BTreeMap<usize, usize>,
}

impl TabuNodeList {
    pub fn new() -> Self {
        Self::default()
    }

    /// `floor(alpha * n_new) + random(1..=10)`.
    pub fn tenure<R: Rng + ?Sized>(alpha: f64, n_new: usize, rng: &mut R) -> usize {
        (alpha * n_new as f64).floor() as usize + rng.gen_range(1..=10)
    }

    pub fn push(&mut self, node: usize, now: usize, tenure: usize) {
        self.entries.insert(node, now + tenure);
    }

    pub fn is_tabu(&self, node: usize, now: usize) -> bool {
        self.entries.get(&node).is_some_and(|&exp| now < exp)
    }

    pub fn expiry(&self, node: usize) -> Option<usize> {
        self.entries.get(&node).copied()
    }

    pub fn live(&self, now: usize) -> usize {
        self.entries.values().filter(|&&e| now < e).count()
    }
}

/// Fixed-length ring of fingerprints of solutions that broke both
/// constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct TabuSolutionList {
    ring: VecDeque<u64>,
    capacity: usize,
}

impl TabuSolutionList {
    pub fn new(capacity: usize) -> Self {
        TabuSolutionList {
            ring: VecDeque::with_capacity(capacity),
            capacity,
        }
    }

    pub fn push(&mut self, fingerprint: u64) {
        if self.capacity == 0 {
            return;
        }
        if self.ring.len() == self.capacity {
            self.ring.pop_front();
        }
        self.ring.push_back(fingerprint);
    }

    pub fn contains(&self, fingerprint: u64) -> bool {
        self.ring.contains(&fingerprint)
    }

    pub fn len(&self) -> usize {
        self.ring.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ring.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltyState {
    pub phi: f64,
    pub phi_min: f64,
    pub phi_max: f64,
}

impl PenaltyState {
    pub fn new(phi: f64, phi_min: f64, phi_max: f64) -> Self {
        PenaltyState {
            phi: phi.clamp(phi_min, phi_max),
            phi_min,
            phi_max,
        }
    }

    pub fn from_config(cfg: &SolverConfig) -> Self {
        Self::new(cfg.phi_init, cfg.phi_min, cfg.phi_max)
    }
}

/// Penalised objective `f - phi * ex` under `mode`. A zero excess yields
/// `f` even when `phi` is infinite.
pub fn phi_eval(objective: f64, violation: &Violation, mode: Relax, phi: f64) -> f64 {
    let ex = violation.excess(mode);
    if ex == 0.0 {
        objective
    } else {
        objective - phi * ex
    }
}

/// Halves `phi` after an all-feasible window, doubles it after an
/// all-infeasible one, and leaves it alone otherwise.
pub fn update_phi(state: PenaltyState, feasible: usize, infeasible: usize) -> PenaltyState {
    let mut next = state;
    if infeasible == 0 && feasible > 0 {
        next.phi = (state.phi / 2.0).max(state.phi_min);
    } else if feasible == 0 && infeasible > 0 {
        next.phi = (state.phi * 2.0).min(state.phi_max);
    }
    next
}

/// Outcome label of one tabu iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TsVerdict {
    Aspiration,
    Conditional,
    Tabu,
    Rejected,
}

impl TsVerdict {
    pub fn name(self) -> &'static str {
        match self {
            TsVerdict::Aspiration => "aspiration",
            TsVerdict::Conditional => "conditional",
            TsVerdict::Tabu => "tabu",
            TsVerdict::Rejected => "rejected",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TsTraceRow {
    pub iter: usize,
    pub mode: Relax,
    pub phi: f64,
    pub objective: f64,
    pub penalised: f64,
    pub verdict: TsVerdict,
    pub tabu_hits: usize,
}

impl TsTraceRow {
    pub const HEADER: &'static str = "iter,mode,phi,obj,Φ,verdict,tabu_hits";

    pub fn to_csv(&self) -> String {
        let mode = match self.mode {
            Relax::TravelBudget => "budget",
            Relax::DisruptionCap => "disruption",
            Relax::None => "strict",
        };
        format!(
            "{},{},{},{},{},{},{}",
            self.iter,
            mode,
            self.phi,
            self.objective,
            self.penalised,
            self.verdict.name(),
            self.tabu_hits
        )
    }
}

#[derive(Debug, Clone)]
pub struct TsOutcome {
    /// Best strictly feasible solution.
    pub best: Solution,
    /// Conditional incumbent at exit.
    pub conditional: Solution,
    pub bank: OperatorBank,
    pub phi: f64,
    pub tabu_hits: usize,
}

fn status_changes(sc: &Scenario, a: &Solution, b: &Solution) -> Vec<usize> {
    sc.inst.new_ids().filter(|&j| a.visits(j) != b.visits(j)).collect()
}

/// Runs `cfg.ts_iterations` iterations from the feasible `start`.
///
/// `bank` carries the operator weights in; the updated bank is returned.
/// `solution_tenure` is the length of the tabu-solution ring.
pub fn ts_run<R: Rng + ?Sized>(
    sc: &Scenario,
    start: &Solution,
    bank: OperatorBank,
    cfg: &SolverConfig,
    solution_tenure: usize,
    rng: &mut R,
    mut trace: Option<&mut Vec<TsTraceRow>>,
) -> Result<TsOutcome> {
    if !sc.is_feasible(start) {
        return Err(Error::Structure("tabu search start is infeasible".into()));
    }
    let mut bank = bank;
    let mut penalty = PenaltyState::from_config(cfg);
    let mut tabu_nodes = TabuNodeList::new();
    let mut tabu_sols = TabuSolutionList::new(solution_tenure);
    let mut best = start.clone();
    let mut cond = start.clone();
    let mut cond_violation = Violation::default();
    let (mut win_feasible, mut win_infeasible) = (0usize, 0usize);
    let mut tabu_hits = 0usize;
    let n_new = sc.inst.n_new();

    for iter in 1..=cfg.ts_iterations {
        let from = if cond.objective() > best.objective() {
            &cond
        } else {
            &best
        };
        let mode = bank.violation.select(rng)?;
        bank.violation.record_use(mode);
        let (cand, triple) = composite_move(sc, from, &bank, cfg, mode, rng)?;
        triple.record_use(&mut bank);

        let violation = sc.measure(&cand);
        let verdict = verdict_for(&violation, mode);
        if verdict == Verdict::Feasible {
            win_feasible += 1;
        } else {
            win_infeasible += 1;
        }
        let penalised = phi_eval(cand.objective(), &violation, mode, penalty.phi);
        let cond_penalised = phi_eval(cond.objective(), &cond_violation, mode, penalty.phi);
        let changed = status_changes(sc, from, &cand);

        let outcome = if verdict == Verdict::Feasible && cand.objective() > best.objective() + OBJ_EPS {
            for &j in &changed {
                tabu_nodes.push(j, iter, TabuNodeList::tenure(cfg.tabu_alpha, n_new, rng));
            }
            triple.reward(&mut bank, cfg.score_feasible);
            bank.violation.reward(mode, cfg.score_feasible);
            if penalised > cond_penalised + OBJ_EPS {
                cond = cand.clone();
                cond_violation = violation;
            }
            best = cand.clone();
            TsVerdict::Aspiration
        } else if tabu_sols.contains(cand.fingerprint()) || changed.iter().any(|&j| tabu_nodes.is_tabu(j, iter)) {
            tabu_hits += 1;
            TsVerdict::Tabu
        } else if verdict != Verdict::Infeasible && penalised > cond_penalised + OBJ_EPS {
            for &j in &changed {
                tabu_nodes.push(j, iter, TabuNodeList::tenure(cfg.tabu_alpha, n_new, rng));
            }
            triple.reward(&mut bank, cfg.score_conditional);
            bank.violation.reward(mode, cfg.score_conditional);
            cond = cand.clone();
            cond_violation = violation;
            TsVerdict::Conditional
        } else {
            triple.reward(&mut bank, cfg.score_infeasible);
            bank.violation.reward(mode, cfg.score_infeasible);
            if !violation.travel_ok() && !violation.disruption_ok() {
                tabu_sols.push(cand.fingerprint());
            }
            TsVerdict::Rejected
        };

        if let Some(rows) = trace.as_deref_mut() {
            rows.push(TsTraceRow {
                iter,
                mode,
                phi: penalty.phi,
                objective: cand.objective(),
                penalised,
                verdict: outcome,
                tabu_hits,
            });
        }
        if iter % cfg.weight_period == 0 {
            bank.refresh_moves(cfg.rho);
        }
        if iter % cfg.penalty_period == 0 {
            bank.violation.refresh(cfg.rho);
            penalty = update_phi(penalty, win_feasible, win_infeasible);
            win_feasible = 0;
            win_infeasible = 0;
        }
    }
    Ok(TsOutcome {
        best,
        conditional: cond,
        bank,
        phi: penalty.phi,
        tabu_hits,
    })
}
