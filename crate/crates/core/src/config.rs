//! Solver tunables. Defaults follow the tuned values reported for the
//! memetic algorithm; the rest are documented per field.

use crate::baseline::TspMode;
use crate::error::{Error, Result};
use crate::operators::{InsertionOp, InsertionParams};

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Population size `N`.
    pub population_size: usize,
    /// Generations `G` of the memetic loop.
    pub generations: usize,
    /// ALNS search depth.
    pub alns_iterations: usize,
    /// Weight refresh period `u_w` (ALNS and tabu search).
    pub weight_period: usize,
    /// Evaporation factor.
    pub rho: f64,
    /// Perturbation factor `u` of the disturbed insertion.
    pub perturbation: f64,
    /// Tabu search depth.
    pub ts_iterations: usize,
    /// Penalty refresh period `u_p`.
    pub penalty_period: usize,
    /// Probability `P` of the random branch in every insertion operator.
    pub random_prob: f64,
    /// Probability of applying the removal step to a candidate that already
    /// satisfies the constraints of the active mode.
    pub removal_prob: f64,
    pub score_best: f64,
    pub score_better: f64,
    pub score_worse: f64,
    pub score_feasible: f64,
    pub score_conditional: f64,
    pub score_infeasible: f64,
    /// Initial SA temperature; `None` means `0.05 * |f(seed)| + 1`.
    pub t_init: Option<f64>,
    pub cooling: f64,
    /// `t_min = t_init * t_min_ratio`.
    pub t_min_ratio: f64,
    /// Tabu-node tenure coefficient `alpha`.
    pub tabu_alpha: f64,
    pub phi_init: f64,
    pub phi_min: f64,
    pub phi_max: f64,
    pub fdr_epsilon: f64,
    pub elite_fraction: f64,
    /// Wall-clock cap per run in seconds.
    pub time_limit: f64,
    pub mu: f64,
    pub lambda: f64,
    /// `None` means the mean payment of the new customers.
    pub rejection_cost: Option<f64>,
    pub tsp_mode: TspMode,
    pub insertions: Vec<InsertionOp>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            population_size: 5,
            generations: 5,
            alns_iterations: 1000,
            weight_period: 50,
            rho: 0.95,
            perturbation: 0.1,
            ts_iterations: 200,
            penalty_period: 10,
            random_prob: 0.1,
            removal_prob: 0.1,
            score_best: 10.0,
            score_better: 5.0,
            score_worse: 2.0,
            score_feasible: 10.0,
            score_conditional: 5.0,
            score_infeasible: 1.0,
            t_init: None,
            cooling: 0.999,
            t_min_ratio: 1e-3,
            tabu_alpha: 0.25,
            phi_init: 1.0,
            phi_min: 0.01,
            phi_max: 100.0,
            fdr_epsilon: 1e-9,
            elite_fraction: 0.2,
            time_limit: 60.0,
            mu: 1.0,
            lambda: 0.5,
            rejection_cost: None,
            tsp_mode: TspMode::Auto,
            insertions: InsertionOp::STANDARD.to_vec(),
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("`{key}`: cannot parse `{value}`")))
}

impl SolverConfig {
    pub fn insertion_params(&self) -> InsertionParams {
        InsertionParams {
            random_prob: self.random_prob,
            perturbation: self.perturbation,
        }
    }

    /// Sets one field from its textual key. Table-style short names
    /// (`N`, `G`, `L_ALNS`, `u_w`, `u`, `L_TS`, `u_p`, `P`) are accepted.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key.trim() {
            "population_size" | "N" => self.population_size = parse_num(key, value)?,
            "generations" | "G" => self.generations = parse_num(key, value)?,
            "alns_iterations" | "L_ALNS" => self.alns_iterations = parse_num(key, value)?,
            "weight_period" | "u_w" => self.weight_period = parse_num(key, value)?,
            "rho" => self.rho = parse_num(key, value)?,
            "perturbation" | "u" => self.perturbation = parse_num(key, value)?,
            "ts_iterations" | "L_TS" => self.ts_iterations = parse_num(key, value)?,
            "penalty_period" | "u_p" => self.penalty_period = parse_num(key, value)?,
            "random_prob" | "P" => self.random_prob = parse_num(key, value)?,
            "removal_prob" => self.removal_prob = parse_num(key, value)?,
            "score_best" | "s_b" => self.score_best = parse_num(key, value)?,
            "score_better" | "s_c" => self.score_better = parse_num(key, value)?,
            "score_worse" | "s_w" => self.score_worse = parse_num(key, value)?,
            "score_feasible" | "s_1" => self.score_feasible = parse_num(key, value)?,
            "score_conditional" | "s_2" => self.score_conditional = parse_num(key, value)?,
            "score_infeasible" | "s_3" => self.score_infeasible = parse_num(key, value)?,
            "t_init" => self.t_init = Some(parse_num(key, value)?),
            "cooling" => self.cooling = parse_num(key, value)?,
            "t_min_ratio" => self.t_min_ratio = parse_num(key, value)?,
            "tabu_alpha" | "alpha" => self.tabu_alpha = parse_num(key, value)?,
            "phi_init" => self.phi_init = parse_num(key, value)?,
            "phi_min" => self.phi_min = parse_num(key, value)?,
            "phi_max" => self.phi_max = parse_num(key, value)?,
            "fdr_epsilon" | "epsilon" => self.fdr_epsilon = parse_num(key, value)?,
            "elite_fraction" => self.elite_fraction = parse_num(key, value)?,
            "time_limit" => self.time_limit = parse_num(key, value)?,
            "mu" => self.mu = parse_num(key, value)?,
            "lambda" => self.lambda = parse_num(key, value)?,
            "rejection_cost" | "r" => self.rejection_cost = Some(parse_num(key, value)?),
            "tsp_mode" => self.tsp_mode = value.parse()?,
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Applies a flat `key = value` text; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", no + 1)))?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = SolverConfig::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let err = |m: &str| Err(Error::Config(m.to_string()));
        if self.population_size == 0 {
            return err("population_size must be at least 1");
        }
        if self.weight_period == 0 || self.penalty_period == 0 {
            return err("refresh periods must be positive");
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return err("rho must lie in (0, 1)");
        }
        if !(0.0..=1.0).contains(&self.random_prob) || !(0.0..=1.0).contains(&self.removal_prob) {
            return err("probabilities must lie in [0, 1]");
        }
        if !(self.cooling > 0.0 && self.cooling < 1.0) {
            return err("cooling must lie in (0, 1)");
        }
        if !(self.phi_min > 0.0) || self.phi_max < self.phi_min {
            return err("phi bounds must satisfy 0 < phi_min <= phi_max");
        }
        if !(self.fdr_epsilon > 0.0) {
            return err("fdr_epsilon must be positive");
        }
        if self.insertions.is_empty() {
            return err("at least one insertion operator is required");
        }
        if !(self.mu > 0.0) || !(self.lambda > 0.0) {
            return err("mu and lambda must be positive");
        }
        Ok(())
    }
}
