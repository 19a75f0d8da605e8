//! Adaptive large neighbourhood search that builds the initial population.
//!
//! Each iteration applies one insertion, one internal move and one removal
//! in sequence, all three drawn by roulette from their groups. Only strictly
//! feasible candidates are kept; worse ones pass a simulated-annealing test
//! with periodic reheating.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bank::OperatorBank;
use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::operators::{apply_insertion, apply_internal, apply_removal, InsertionOp, InternalOp, OpResult, RemovalOp};
use crate::scenario::Scenario;
use crate::schedule::{solution_distance, verdict_for, Relax, Solution, Verdict};

const OBJ_EPS: f64 = 1e-9;

/// Simulated-annealing temperature with reheating.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaState {
    pub temperature: f64,
    pub t_init: f64,
    pub t_min: f64,
    pub cooling: f64,
}

impl SaState {
    pub fn new(t_init: f64, t_min: f64, cooling: f64) -> Self {
        SaState {
            temperature: t_init,
            t_init,
            t_min,
            cooling,
        }
    }

    /// Probability of accepting a candidate that is `delta_f` worse
    /// (`delta_f = f(current) - f(candidate)` under maximisation).
    pub fn acceptance_probability(&self, delta_f: f64) -> f64 {
        if delta_f <= 0.0 {
            1.0
        } else {
            (-delta_f / self.temperature).exp()
        }
    }

    /// One acceptance test followed by one cooling step.
    pub fn accept<R: Rng + ?Sized>(&mut self, delta_f: f64, rng: &mut R) -> bool {
        let p = self.acceptance_probability(delta_f);
        let ok = p >= 1.0 || rng.gen::<f64>() < p;
        self.cool();
        ok
    }

    /// Multiplies the temperature by the cooling rate, reheating to
    /// `t_init` once it falls below `t_min`.
    pub fn cool(&mut self) {
        self.temperature *= self.cooling;
        if self.temperature < self.t_min {
            self.temperature = self.t_init;
        }
    }
}

/// Operators drawn for one composite move and whether each changed the route.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoveTriple {
    pub insertion: InsertionOp,
    pub internal: InternalOp,
    pub removal: RemovalOp,
    pub inserted: bool,
    pub reordered: bool,
    pub removed: bool,
}

impl MoveTriple {
    pub fn label(&self) -> String {
        let tag = |name: &str, used: bool| if used { name.to_string() } else { format!("({name})") };
        format!(
            "{}+{}+{}",
            tag(self.insertion.name(), self.inserted),
            tag(self.internal.name(), self.reordered),
            tag(self.removal.name(), self.removed)
        )
    }

    pub fn record_use(&self, bank: &mut OperatorBank) {
        if self.inserted {
            bank.insertion.record_use(self.insertion);
        }
        if self.reordered {
            bank.internal.record_use(self.internal);
        }
        if self.removed {
            bank.removal.record_use(self.removal);
        }
    }

    /// Credits `score` to every operator that changed the route.
    pub fn reward(&self, bank: &mut OperatorBank, score: f64) {
        if self.inserted {
            bank.insertion.reward(self.insertion, score);
        }
        if self.reordered {
            bank.internal.reward(self.internal, score);
        }
        if self.removed {
            bank.removal.reward(self.removal, score);
        }
    }
}

/// Insertion, then internal move, then removal.
///
/// A reordering that would turn an admissible route into one breaking a
/// constraint `relax` does not waive is dropped. The removal step runs when the intermediate candidate breaks a
/// constraint that `relax` does not waive, and otherwise with probability
/// `removal_prob`.
pub fn composite_move<R: Rng + ?Sized>(
    sc: &Scenario,
    start: &Solution,
    bank: &OperatorBank,
    cfg: &SolverConfig,
    relax: Relax,
    rng: &mut R,
) -> Result<(Solution, MoveTriple)> {
    let ins = bank.insertion.select(rng)?;
    let int = bank.internal.select(rng)?;
    let rem = bank.removal.select(rng)?;
    let params = cfg.insertion_params();

    let mut triple = MoveTriple {
        insertion: ins,
        internal: int,
        removal: rem,
        inserted: false,
        reordered: false,
        removed: false,
    };
    let mut cur = start.clone();
    if let OpResult::Changed(s) = apply_insertion(ins, &cur, &sc.inst, rng, params) {
        cur = s;
        triple.inserted = true;
    }
    let mut verdict = verdict_for(&sc.measure(&cur), relax);
    if let OpResult::Changed(s) = apply_internal(int, &cur, &sc.inst) {
        let reordered = verdict_for(&sc.measure(&s), relax);
        if verdict == Verdict::Infeasible || reordered != Verdict::Infeasible {
            cur = s;
            verdict = reordered;
            triple.reordered = true;
        }
    }
    let must_repair = verdict == Verdict::Infeasible;
    if must_repair || rng.gen_bool(cfg.removal_prob) {
        if let OpResult::Changed(s) = apply_removal(rem, &cur, &sc.inst) {
            cur = s;
            triple.removed = true;
        }
    }
    Ok((cur, triple))
}

/// One row of the optional iteration trace.
#[derive(Debug, Clone, PartialEq)]
pub struct AlnsTraceRow {
    pub iter: usize,
    pub operators: String,
    pub objective: f64,
    pub accepted: bool,
    pub temperature: f64,
}

impl AlnsTraceRow {
    pub const HEADER: &'static str = "iter,operator_triple,obj,accepted,temperature";

    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.iter, self.operators, self.objective, self.accepted, self.temperature
        )
    }
}

#[derive(Debug, Clone)]
pub struct AlnsOutcome {
    pub best: Solution,
    pub bank: OperatorBank,
    /// Best feasible objective after each iteration.
    pub best_trace: Vec<f64>,
}

/// Runs exactly `cfg.alns_iterations` iterations from `seed`.
pub fn alns_run<R: Rng + ?Sized>(
    sc: &Scenario,
    seed: &Solution,
    cfg: &SolverConfig,
    rng: &mut R,
    mut trace: Option<&mut Vec<AlnsTraceRow>>,
) -> Result<AlnsOutcome> {
    if !sc.is_feasible(seed) {
        return Err(Error::Structure("ALNS seed solution is infeasible".into()));
    }
    let mut bank = OperatorBank::new(&cfg.insertions);
    let t_init = cfg.t_init.unwrap_or(0.05 * seed.objective().abs() + 1.0);
    let mut sa = SaState::new(t_init, t_init * cfg.t_min_ratio, cfg.cooling);
    let mut best = seed.clone();
    let mut current = seed.clone();
    let mut best_trace = Vec::with_capacity(cfg.alns_iterations);

    for iter in 1..=cfg.alns_iterations {
        let (cand, triple) = composite_move(sc, &current, &bank, cfg, Relax::None, rng)?;
        triple.record_use(&mut bank);
        let mut accepted = false;
        if sc.is_feasible(&cand) {
            if cand.objective() > current.objective() + OBJ_EPS {
                if cand.objective() > best.objective() + OBJ_EPS {
                    best = cand.clone();
                    triple.reward(&mut bank, cfg.score_best);
                } else {
                    triple.reward(&mut bank, cfg.score_better);
                }
                current = cand.clone();
                accepted = true;
                sa.cool();
            } else if sa.accept(current.objective() - cand.objective(), rng) {
                triple.reward(&mut bank, cfg.score_worse);
                current = cand.clone();
                accepted = true;
            }
        } else {
            sa.cool();
        }
        if let Some(rows) = trace.as_deref_mut() {
            rows.push(AlnsTraceRow {
                iter,
                operators: triple.label(),
                objective: cand.objective(),
                accepted,
                temperature: sa.temperature,
            });
        }
        if iter % cfg.weight_period == 0 {
            bank.refresh_moves(cfg.rho);
        }
        best_trace.push(best.objective());
    }
    Ok(AlnsOutcome { best, bank, best_trace })
}

/// Seed of the `k`-th independent stream derived from `master`.
pub fn derive_seed(master: u64, k: u64) -> u64 {
    // splitmix64 finaliser over a golden-ratio stride
    let mut z = master.wrapping_add((k.wrapping_add(1)).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Initial population plus the operator bank each member's run ended with.
#[derive(Debug, Clone)]
pub struct SeededPopulation {
    pub members: Vec<Solution>,
    pub banks: Vec<OperatorBank>,
}

const DUPLICATE_RETRIES: u64 = 3;

/// `size` independent ALNS runs on derived streams. A member identical to
/// an earlier one is re-drawn up to three times, then kept.
pub fn build_population(
    sc: &Scenario,
    seed: &Solution,
    size: usize,
    cfg: &SolverConfig,
    master_seed: u64,
) -> Result<SeededPopulation> {
    build_population_traced(sc, seed, size, cfg, master_seed, None)
}

/// As [`build_population`], collecting the trace of each member's final
/// run.
pub fn build_population_traced(
    sc: &Scenario,
    seed: &Solution,
    size: usize,
    cfg: &SolverConfig,
    master_seed: u64,
    mut traces: Option<&mut Vec<Vec<AlnsTraceRow>>>,
) -> Result<SeededPopulation> {
    if size == 0 {
        return Err(Error::Domain("population size must be at least 1".into()));
    }
    let mut members: Vec<Solution> = Vec::with_capacity(size);
    let mut banks = Vec::with_capacity(size);
    for k in 0..size as u64 {
        let mut attempt = 0;
        let (outcome, rows) = loop {
            let stream = derive_seed(master_seed, k * (DUPLICATE_RETRIES + 1) + attempt);
            let mut rng = ChaCha8Rng::seed_from_u64(stream);
            let mut rows = Vec::new();
            let sink = if traces.is_some() { Some(&mut rows) } else { None };
            let out = alns_run(sc, seed, cfg, &mut rng, sink)?;
            let duplicate = members
                .iter()
                .any(|m| solution_distance(m, &out.best).map(|d| d == 0.0).unwrap_or(false));
            if !duplicate || attempt == DUPLICATE_RETRIES {
                break (out, rows);
            }
            attempt += 1;
        };
        if let Some(t) = traces.as_deref_mut() {
            t.push(rows);
        }
        members.push(outcome.best);
        banks.push(outcome.bank);
    }
    Ok(SeededPopulation { members, banks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baseline::OriginalSchedule;
    use crate::instance::tests::t1;
    use crate::instance::DerivedLimits;

    fn t1_scenario(lambda: f64) -> Scenario {
        let inst = t1();
        let baseline = OriginalSchedule::from_route(&inst, vec![0, 1, 2, 0]).unwrap();
        let limits = DerivedLimits::compute(&inst, 1.0, lambda, 18.0).unwrap();
        Scenario::new(inst, baseline, limits)
    }

    #[test]
    fn sa_probabilities() {
        let sa = SaState::new(2.0, 0.002, 0.999);
        assert_eq!(sa.acceptance_probability(0.0), 1.0);
        assert!((sa.acceptance_probability(2.0) - (-1.0f64).exp()).abs() < 1e-12);
        assert!((sa.acceptance_probability(2.0) - 0.367_879_441_171_442_3).abs() < 1e-9);
    }

    #[test]
    fn sa_reheats_below_minimum() {
        let mut sa = SaState::new(1.0, 0.5, 0.6);
        sa.cool();
        assert!((sa.temperature - 0.6).abs() < 1e-12);
        sa.cool();
        assert_eq!(sa.temperature, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..100 {
            sa.accept(0.3, &mut rng);
            assert!(sa.temperature >= sa.t_min && sa.temperature <= sa.t_init);
        }
    }

    #[test]
    fn zero_iterations_return_seed() {
        let sc = t1_scenario(1.0);
        let cfg = SolverConfig {
            alns_iterations: 0,
            ..SolverConfig::default()
        };
        let seed = sc.seed_solution();
        let out = alns_run(&sc, &seed, &cfg, &mut ChaCha8Rng::seed_from_u64(1), None).unwrap();
        assert_eq!(out.best, seed);
    }

    #[test]
    fn t1_optimum_reached() {
        for (lambda, expected) in [(1.0, 33.0), (0.5, 26.0)] {
            let sc = t1_scenario(lambda);
            let cfg = SolverConfig::default();
            for seed in 0..5 {
                let out = alns_run(
                    &sc,
                    &sc.seed_solution(),
                    &cfg,
                    &mut ChaCha8Rng::seed_from_u64(seed),
                    None,
                )
                .unwrap();
                assert_eq!(out.best.objective(), expected, "lambda {lambda} seed {seed}");
                assert!(sc.is_feasible(&out.best));
                assert!(out.best_trace.windows(2).all(|w| w[1] >= w[0]));
            }
        }
    }

    #[test]
    fn infeasible_seed_rejected() {
        let inst = t1();
        let baseline = OriginalSchedule::from_route(&inst, vec![0, 1, 2, 0]).unwrap();
        let sc = Scenario::new(inst, baseline, DerivedLimits::explicit(10.0, 1.0));
        let seed = sc.seed_solution();
        let r = alns_run(
            &sc,
            &seed,
            &SolverConfig::default(),
            &mut ChaCha8Rng::seed_from_u64(1),
            None,
        );
        assert!(matches!(r, Err(Error::Structure(_))));
    }

    #[test]
    fn population_is_deterministic_and_feasible() {
        let sc = t1_scenario(1.0);
        let cfg = SolverConfig {
            alns_iterations: 200,
            ..SolverConfig::default()
        };
        let a = build_population(&sc, &sc.seed_solution(), 5, &cfg, 42).unwrap();
        let b = build_population(&sc, &sc.seed_solution(), 5, &cfg, 42).unwrap();
        assert_eq!(a.members, b.members);
        assert_eq!(a.members.len(), 5);
        assert!(a.members.iter().all(|m| sc.is_feasible(m)));
        let one = build_population(&sc, &sc.seed_solution(), 1, &cfg, 42).unwrap();
        assert_eq!(one.members.len(), 1);
    }

    #[test]
    fn trace_rows_are_emitted() {
        let sc = t1_scenario(1.0);
        let cfg = SolverConfig {
            alns_iterations: 20,
            ..SolverConfig::default()
        };
        let mut rows = Vec::new();
        alns_run(
            &sc,
            &sc.seed_solution(),
            &cfg,
            &mut ChaCha8Rng::seed_from_u64(3),
            Some(&mut rows),
        )
        .unwrap();
        assert_eq!(rows.len(), 20);
        assert_eq!(rows[0].iter, 1);
        assert_eq!(rows[0].to_csv().split(',').count(), 5);
    }
}
