//! The outer memetic loop: ALNS population, tabu refinement of every
//! member, and elitist / fitness-distance-ratio replacement.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::alns::{alns_run, build_population_traced, derive_seed, AlnsTraceRow};
use crate::bank::OperatorBank;
use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::operators::InsertionOp;
use crate::scenario::Scenario;
use crate::schedule::{solution_distance, Solution};
use crate::ts::{ts_run, TsTraceRow};

const OBJ_EPS: f64 = 1e-9;

/// Mean distance `D` of `sol` to the members of `population`, divided by
/// the population size.
pub fn mean_distance(sol: &Solution, population: &[Solution]) -> Result<f64> {
    if population.is_empty() {
        return Err(Error::Domain("empty population".into()));
    }
    let mut sum = 0.0;
    for m in population {
        sum += solution_distance(sol, m)?;
    }
    Ok(sum / population.len() as f64)
}

pub fn fdr_value(fitness: f64, distance: f64, epsilon: f64) -> f64 {
    fitness / (distance + epsilon)
}

/// `f / (D + epsilon)` with `D` from [`mean_distance`]. `population` may
/// contain `sol` itself; its self-distance is zero.
pub fn fdr(sol: &Solution, population: &[Solution], epsilon: f64) -> Result<f64> {
    Ok(fdr_value(sol.objective(), mean_distance(sol, population)?, epsilon))
}

/// Number of elitist members: `max(1, ceil(fraction * n))`, capped at `n`.
pub fn elite_count(n: usize, fraction: f64) -> usize {
    ((fraction * n as f64).ceil() as usize).max(1).min(n)
}

/// Feasible solutions of constant size with an elitist tier.
#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    pub members: Vec<Solution>,
    pub elite_fraction: f64,
    pub epsilon: f64,
    /// Added to every objective before computing FDR so fitness is
    /// non-negative.
    pub fitness_shift: f64,
}

/// What [`Population::update`] did with the candidate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Replacement {
    /// Entered the elitist tier at this index.
    Elite(usize),
    /// Replaced the average-tier member at this index.
    Average(usize),
    Rejected,
}

impl Population {
    pub fn new(members: Vec<Solution>, cfg: &SolverConfig, fitness_shift: f64) -> Self {
        Population {
            members,
            elite_fraction: cfg.elite_fraction,
            epsilon: cfg.fdr_epsilon,
            fitness_shift,
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Indices ordered by objective, best first; ties keep member order.
    fn ranking(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.members.len()).collect();
        idx.sort_by(|&a, &b| self.members[b].objective().total_cmp(&self.members[a].objective()));
        idx
    }

    pub fn elite_indices(&self) -> Vec<usize> {
        let mut r = self.ranking();
        r.truncate(elite_count(self.len(), self.elite_fraction));
        r
    }

    pub fn best(&self) -> Option<&Solution> {
        self.ranking().first().map(|&i| &self.members[i])
    }

    pub fn average_objective(&self) -> f64 {
        self.members.iter().map(Solution::objective).sum::<f64>() / self.len().max(1) as f64
    }

    fn shifted_fdr(&self, sol: &Solution, pool: &[Solution]) -> Result<f64> {
        Ok(fdr_value(
            sol.objective() + self.fitness_shift,
            mean_distance(sol, pool)?,
            self.epsilon,
        ))
    }

    /// Elitist replacement first; otherwise the candidate, or the elitist
    /// member it displaced, competes with the average tier by FDR computed
    /// over the population plus the contender. Ties and exact duplicates
    /// are rejected.
    pub fn update(&mut self, candidate: Solution) -> Result<Replacement> {
        if self.members.is_empty() {
            self.members.push(candidate);
            return Ok(Replacement::Elite(0));
        }
        let elite = self.elite_indices();
        let worst_elite = *elite.last().expect("at least one elitist member");
        let mut result = Replacement::Rejected;
        let contender = if candidate.objective() > self.members[worst_elite].objective() + OBJ_EPS {
            result = Replacement::Elite(worst_elite);
            std::mem::replace(&mut self.members[worst_elite], candidate)
        } else {
            candidate
        };
        let average: Vec<usize> = (0..self.len()).filter(|i| !elite.contains(i)).collect();
        if average.is_empty() {
            return Ok(result);
        }
        for m in &self.members {
            if solution_distance(&contender, m)? == 0.0 {
                return Ok(result);
            }
        }
        let mut pool = self.members.clone();
        pool.push(contender.clone());
        let mut weakest: Option<(usize, f64)> = None;
        for &i in &average {
            let v = self.shifted_fdr(&self.members[i], &pool)?;
            if weakest.is_none_or(|(_, w)| v < w) {
                weakest = Some((i, v));
            }
        }
        let (slot, weakest_fdr) = weakest.expect("average tier is non-empty");
        if self.shifted_fdr(&contender, &pool)? > weakest_fdr {
            self.members[slot] = contender;
            if result == Replacement::Rejected {
                result = Replacement::Average(slot);
            }
        }
        Ok(result)
    }
}

/// Free-function form of [`Population::update`].
pub fn population_update(pop: &mut Population, candidate: Solution) -> Result<Replacement> {
    pop.update(candidate)
}

/// Outcome of one solver run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub instance: String,
    pub seed: u64,
    pub best: Solution,
    /// Population average objective after construction and after each
    /// generation.
    pub avg_obj_trace: Vec<f64>,
    /// Best objective after construction and after each generation.
    pub best_obj_trace: Vec<f64>,
    pub time_s: f64,
    pub generations: usize,
    pub operator_usage: Vec<(String, u64)>,
}

impl RunReport {
    pub const HEADER: &'static str = "instance,seed,best_obj,avg_obj_trace,time_s,generations";

    pub fn best_obj(&self) -> f64 {
        self.best.objective()
    }

    /// One CSV row; the trace is `;`-separated.
    pub fn to_csv(&self) -> String {
        let trace: Vec<String> = self.avg_obj_trace.iter().map(|v| format!("{v:.6}")).collect();
        format!(
            "{},{},{},{},{:.3},{}",
            self.instance,
            self.seed,
            self.best_obj(),
            trace.join(";"),
            self.time_s,
            self.generations
        )
    }
}

fn time_left(start: &Instant, cfg: &SolverConfig) -> bool {
    start.elapsed().as_secs_f64() < cfg.time_limit
}

fn feasible_seed(sc: &Scenario) -> Result<Solution> {
    let seed = sc.seed_solution();
    if !sc.is_feasible(&seed) {
        return Err(Error::Structure(format!(
            "baseline route length {} exceeds the travel budget {}",
            seed.length(),
            sc.limits.t_max
        )));
    }
    Ok(seed)
}

/// Iteration traces of one memetic run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunTraces {
    /// One trace per population member's ALNS run.
    pub alns: Vec<Vec<AlnsTraceRow>>,
    /// `(generation, member, trace)` per tabu refinement.
    pub ts: Vec<(usize, usize, Vec<TsTraceRow>)>,
}

/// Memetic search on a prepared scenario.
pub fn memetic_on(sc: &Scenario, cfg: &SolverConfig, master_seed: u64) -> Result<RunReport> {
    memetic_traced(sc, cfg, master_seed, None)
}

pub fn memetic_traced(
    sc: &Scenario,
    cfg: &SolverConfig,
    master_seed: u64,
    mut traces: Option<&mut RunTraces>,
) -> Result<RunReport> {
    cfg.validate()?;
    let clock = Instant::now();
    let seed = feasible_seed(sc)?;
    let seeded = build_population_traced(
        sc,
        &seed,
        cfg.population_size,
        cfg,
        master_seed,
        traces.as_deref_mut().map(|t| &mut t.alns),
    )?;
    let shift = sc.inst.rejection_cost() * sc.inst.n_new() as f64;
    let mut pop = Population::new(seeded.members, cfg, shift);

    let lead = pop
        .members
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.objective().total_cmp(&b.1.objective()).then(b.0.cmp(&a.0)))
        .map(|(i, _)| i)
        .expect("population is non-empty");
    let mut best = pop.members[lead].clone();
    let mut bank = seeded.banks[lead].clone();
    let mut avg_trace = vec![pop.average_objective()];
    let mut best_trace = vec![best.objective()];
    let mut generations = 0;

    'outer: for g in 0..cfg.generations {
        if !time_left(&clock, cfg) {
            break;
        }
        let snapshot = pop.members.clone();
        for (i, member) in snapshot.iter().enumerate() {
            if !time_left(&clock, cfg) {
                break 'outer;
            }
            let stream = derive_seed(master_seed ^ 0x5453_5453_5453_5453, (g * snapshot.len() + i) as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(stream);
            let mut rows = Vec::new();
            let sink = if traces.is_some() { Some(&mut rows) } else { None };
            let out = ts_run(sc, member, bank.clone(), cfg, cfg.population_size, &mut rng, sink)?;
            if let Some(t) = traces.as_deref_mut() {
                t.ts.push((g, i, rows));
            }
            if out.best.objective() > best.objective() + OBJ_EPS {
                best = out.best.clone();
                bank = out.bank;
            }
            pop.update(out.best)?;
        }
        generations += 1;
        avg_trace.push(pop.average_objective());
        best_trace.push(best.objective());
    }

    Ok(RunReport {
        instance: String::new(),
        seed: master_seed,
        best,
        avg_obj_trace: avg_trace,
        best_obj_trace: best_trace,
        time_s: clock.elapsed().as_secs_f64(),
        generations,
        operator_usage: bank.usage_summary(),
    })
}

/// Applies the optional rejection-cost override, prepares the scenario
/// and runs the memetic search.
pub fn memetic_solve(inst: &Instance, cfg: &SolverConfig, master_seed: u64) -> Result<RunReport> {
    let sc = prepare(inst, cfg)?;
    memetic_on(&sc, cfg, master_seed)
}

pub fn prepare(inst: &Instance, cfg: &SolverConfig) -> Result<Scenario> {
    let inst = match cfg.rejection_cost {
        Some(r) => inst.with_rejection_cost(r)?,
        None => inst.clone(),
    };
    Scenario::prepare(inst, cfg.mu, cfg.lambda, cfg.tsp_mode)
}

/// Solver variants compared by the benchmark harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    /// Memetic algorithm with the three standard insertions.
    Ma2,
    /// One ALNS run with the memetic iteration budget.
    AlnsOnly,
    /// One tabu search run with the memetic iteration budget.
    TsOnly,
    /// Memetic algorithm using best-position insertion only.
    Ma1,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::Ma2, Algorithm::AlnsOnly, Algorithm::TsOnly, Algorithm::Ma1];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Ma2 => "ma2",
            Algorithm::AlnsOnly => "alns",
            Algorithm::TsOnly => "ts",
            Algorithm::Ma1 => "ma1",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ma2" | "ma" | "memetic" => Ok(Algorithm::Ma2),
            "alns" | "alns-only" => Ok(Algorithm::AlnsOnly),
            "ts" | "ts-only" => Ok(Algorithm::TsOnly),
            "ma1" | "best-position" => Ok(Algorithm::Ma1),
            other => Err(Error::Config(format!("unknown algorithm `{other}`"))),
        }
    }
}

/// Total move evaluations of one memetic run, used as the budget of the
/// single-engine variants.
pub fn iteration_budget(cfg: &SolverConfig) -> usize {
    cfg.population_size * cfg.alns_iterations + cfg.generations * cfg.population_size * cfg.ts_iterations
}

pub fn run_algorithm(sc: &Scenario, algo: Algorithm, cfg: &SolverConfig, master_seed: u64) -> Result<RunReport> {
    run_algorithm_traced(sc, algo, cfg, master_seed, None)
}

/// As [`run_algorithm`]; the single-engine variants record their one run
/// as member 0 (ALNS) or generation 0, member 0 (tabu search).
pub fn run_algorithm_traced(
    sc: &Scenario,
    algo: Algorithm,
    cfg: &SolverConfig,
    master_seed: u64,
    mut traces: Option<&mut RunTraces>,
) -> Result<RunReport> {
    match algo {
        Algorithm::Ma2 => memetic_traced(sc, cfg, master_seed, traces),
        Algorithm::Ma1 => {
            let cfg = SolverConfig {
                insertions: vec![InsertionOp::BestPosition],
                ..cfg.clone()
            };
            memetic_traced(sc, &cfg, master_seed, traces)
        }
        Algorithm::AlnsOnly | Algorithm::TsOnly => {
            cfg.validate()?;
            let clock = Instant::now();
            let seed = feasible_seed(sc)?;
            let budget = iteration_budget(cfg);
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(master_seed, 0));
            let (best, bank) = if algo == Algorithm::AlnsOnly {
                let cfg = SolverConfig {
                    alns_iterations: budget,
                    ..cfg.clone()
                };
                let mut rows = Vec::new();
                let sink = if traces.is_some() { Some(&mut rows) } else { None };
                let out = alns_run(sc, &seed, &cfg, &mut rng, sink)?;
                if let Some(t) = traces.as_deref_mut() {
                    t.alns.push(rows);
                }
                (out.best, out.bank)
            } else {
                let cfg = SolverConfig {
                    ts_iterations: budget,
                    ..cfg.clone()
                };
                let bank = OperatorBank::new(&cfg.insertions);
                let mut rows = Vec::new();
                let sink = if traces.is_some() { Some(&mut rows) } else { None };
                let out = ts_run(sc, &seed, bank, &cfg, cfg.population_size, &mut rng, sink)?;
                if let Some(t) = traces {
                    t.ts.push((0, 0, rows));
                }
                (out.best, out.bank)
            };
            Ok(RunReport {
                instance: String::new(),
                seed: master_seed,
                avg_obj_trace: vec![best.objective()],
                best_obj_trace: vec![best.objective()],
                best,
                time_s: clock.elapsed().as_secs_f64(),
                generations: 0,
                operator_usage: bank.usage_summary(),
            })
        }
    }
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
    fn fdr_examples() {
        assert!((fdr_value(26.0, 2.0, 1e-9) - 13.0).abs() < 1e-6);
        assert_eq!(fdr_value(5.0, 0.0, 1e-9), 5.0 / 1e-9);
        let sc = t1_scenario(1.0);
        let a = sc.evaluate(vec![0, 1, 2, 0]).unwrap();
        let b = sc.evaluate(vec![0, 1, 2, 3, 0]).unwrap();
        let c = sc.evaluate(vec![0, 1, 4, 2, 3, 0]).unwrap();
        let pop = [a.clone(), b.clone(), c.clone()];
        let d_ab = solution_distance(&a, &b).unwrap();
        let d_ac = solution_distance(&a, &c).unwrap();
        let d = mean_distance(&a, &pop).unwrap();
        assert!((d - (d_ab + d_ac) / 3.0).abs() < 1e-12);
        assert!((fdr(&a, &pop, 1e-9).unwrap() - a.objective() / (d + 1e-9)).abs() < 1e-9);
    }

    #[test]
    fn elite_sizes() {
        assert_eq!(elite_count(5, 0.2), 1);
        assert_eq!(elite_count(1, 0.2), 1);
        assert_eq!(elite_count(6, 0.2), 2);
        assert_eq!(elite_count(10, 0.2), 2);
    }

    #[test]
    fn dominant_candidate_enters_elite() {
        let sc = t1_scenario(1.0);
        let cfg = SolverConfig::default();
        let base = sc.evaluate(vec![0, 1, 2, 0]).unwrap();
        let mid = sc.evaluate(vec![0, 1, 2, 3, 0]).unwrap();
        let mut pop = Population::new(vec![mid.clone(), base.clone(), base.clone()], &cfg, 20.0);
        let top = sc.evaluate(vec![0, 1, 4, 2, 3, 0]).unwrap();
        assert_eq!(pop.update(top.clone()).unwrap(), Replacement::Elite(0));
        assert_eq!(pop.best().unwrap(), &top);
        assert_eq!(pop.len(), 3);
        // the displaced elitist is more diverse than a duplicate and takes its slot
        assert!(pop.members.contains(&mid));
    }

    #[test]
    fn duplicate_is_rejected() {
        let sc = t1_scenario(1.0);
        let cfg = SolverConfig::default();
        let a = sc.evaluate(vec![0, 1, 2, 3, 0]).unwrap();
        let b = sc.evaluate(vec![0, 1, 2, 0]).unwrap();
        let mut pop = Population::new(vec![a.clone(), b.clone()], &cfg, 20.0);
        let before = pop.clone();
        assert_eq!(pop.update(b.clone()).unwrap(), Replacement::Rejected);
        assert_eq!(pop, before);
    }

    #[test]
    fn more_distant_candidate_wins_on_equal_objective() {
        let sc = t1_scenario(1.0);
        let cfg = SolverConfig::default();
        let top = sc.evaluate(vec![0, 1, 4, 2, 3, 0]).unwrap();
        let weak = sc.evaluate(vec![0, 1, 2, 0]).unwrap();
        // two candidates with f = 21: N2 tail vs N1 head placement
        let near = sc.evaluate(vec![0, 1, 2, 4, 0]).unwrap();
        let far = sc.evaluate(vec![0, 4, 1, 2, 0]).unwrap();
        assert_eq!(near.objective(), far.objective());
        let pool = [top.clone(), weak.clone()];
        let d_near = mean_distance(&near, &pool).unwrap();
        let d_far = mean_distance(&far, &pool).unwrap();
        let (winner, loser) = if d_far > d_near { (far, near) } else { (near, far) };
        assert!(mean_distance(&winner, &pool).unwrap() > mean_distance(&loser, &pool).unwrap());
        let mut pop = Population::new(vec![top.clone(), weak.clone(), loser.clone()], &cfg, 20.0);
        pop.update(winner.clone()).unwrap();
        assert!(pop.members.contains(&winner));
        assert!(!pop.members.contains(&loser) || !pop.members.contains(&weak));
    }

    #[test]
    fn t1_fixtures() {
        let inst = t1();
        for (lambda, expected) in [(1.0, 33.0), (0.5, 26.0)] {
            let cfg = SolverConfig {
                lambda,
                mu: 1.0,
                ..SolverConfig::default()
            };
            let rep = memetic_solve(&inst, &cfg, 7).unwrap();
            assert_eq!(rep.best_obj(), expected);
            assert_eq!(rep.generations, 5);
            assert!(rep.best_obj_trace.windows(2).all(|w| w[1] >= w[0]));
        }
    }

    #[test]
    fn zero_generations_return_best_initial_member() {
        let inst = t1();
        let cfg = SolverConfig {
            generations: 0,
            alns_iterations: 50,
            ..SolverConfig::default()
        };
        let rep = memetic_solve(&inst, &cfg, 3).unwrap();
        let sc = prepare(&inst, &cfg).unwrap();
        let pop = crate::alns::build_population(&sc, &sc.seed_solution(), cfg.population_size, &cfg, 3).unwrap();
        let best = pop.members.iter().map(Solution::objective).fold(f64::MIN, f64::max);
        assert_eq!(rep.best_obj(), best);
        assert_eq!(rep.generations, 0);
    }

    #[test]
    fn runs_are_reproducible() {
        let inst = t1();
        let cfg = SolverConfig {
            alns_iterations: 100,
            ts_iterations: 50,
            ..SolverConfig::default()
        };
        for algo in Algorithm::ALL {
            let sc = prepare(&inst, &cfg).unwrap();
            let a = run_algorithm(&sc, algo, &cfg, 11).unwrap();
            let b = run_algorithm(&sc, algo, &cfg, 11).unwrap();
            assert_eq!(a.best, b.best, "{algo}");
            assert_eq!(a.avg_obj_trace, b.avg_obj_trace);
            assert!(sc.is_feasible(&a.best));
        }
    }

    #[test]
    fn report_row_shape() {
        let inst = t1();
        let mut rep = memetic_solve(&inst, &SolverConfig::default(), 1).unwrap();
        rep.instance = "t1".into();
        let row = rep.to_csv();
        assert_eq!(row.split(',').count(), 6);
        assert!(row.starts_with("t1,1,"));
    }

    #[test]
    fn algorithm_names_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
        }
        assert!("nope".parse::<Algorithm>().is_err());
    }
}
