//! Adaptive operator weights: roulette selection and the evaporating weight
//! update.

use rand::Rng;

use crate::error::{Error, Result};
use crate::operators::{InsertionOp, InternalOp, RemovalOp};
use crate::schedule::Relax;

/// Weights never drop below this, so every operator keeps a non-zero
/// selection probability.
pub const WEIGHT_FLOOR: f64 = 1e-6;

/// New weight after one refresh period.
///
/// `weight * rho` for an unused operator, otherwise
/// `weight * (1 - rho) + score * rho / times`.
pub fn update_weight(weight: f64, rho: f64, score: f64, times: u32) -> f64 {
    if times == 0 {
        weight * rho
    } else {
        weight * (1.0 - rho) + score * rho / times as f64
    }
}

/// Selection probabilities `w_i / sum(w)`.
pub fn probabilities(weights: &[f64]) -> Result<Vec<f64>> {
    let total: f64 = weights.iter().sum();
    if weights.is_empty() || !(total > 0.0) || weights.iter().any(|w| *w < 0.0) {
        return Err(Error::DegenerateBank);
    }
    Ok(weights.iter().map(|w| w / total).collect())
}

/// Roulette-wheel draw over `weights`; returns the chosen index.
pub fn roulette<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> Result<usize> {
    let total: f64 = weights.iter().sum();
    if weights.is_empty() || !(total > 0.0) || weights.iter().any(|w| *w < 0.0) {
        return Err(Error::DegenerateBank);
    }
    if weights.len() == 1 {
        return Ok(0);
    }
    let mut pick = rng.gen::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        if pick < *w {
            return Ok(i);
        }
        pick -= w;
    }
    Ok(weights.iter().rposition(|w| *w > 0.0).unwrap_or(0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct OpStats {
    pub weight: f64,
    pub score: f64,
    pub usage: u32,
    /// Lifetime usage, never reset.
    pub total_usage: u64,
}

impl Default for OpStats {
    fn default() -> Self {
        OpStats {
            weight: 1.0,
            score: 0.0,
            usage: 0,
            total_usage: 0,
        }
    }
}

/// One operator group with its weights, scores and usage counts.
#[derive(Debug, Clone, PartialEq)]
pub struct Group<T> {
    ops: Vec<T>,
    stats: Vec<OpStats>,
}

impl<T: Copy + PartialEq> Group<T> {
    pub fn new(ops: &[T]) -> Self {
        Group {
            ops: ops.to_vec(),
            stats: vec![OpStats::default(); ops.len()],
        }
    }

    pub fn ops(&self) -> &[T] {
        &self.ops
    }

    pub fn stats(&self) -> &[OpStats] {
        &self.stats
    }

    pub fn weights(&self) -> Vec<f64> {
        self.stats.iter().map(|s| s.weight).collect()
    }

    pub fn set_weights(&mut self, weights: &[f64]) {
        for (s, w) in self.stats.iter_mut().zip(weights) {
            s.weight = *w;
        }
    }

    pub fn probabilities(&self) -> Result<Vec<f64>> {
        probabilities(&self.weights())
    }

    pub fn select<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<T> {
        let w: Vec<f64> = self.stats.iter().map(|s| s.weight).collect();
        Ok(self.ops[roulette(&w, rng)?])
    }

    fn index(&self, op: T) -> Option<usize> {
        self.ops.iter().position(|o| *o == op)
    }

    pub fn record_use(&mut self, op: T) {
        if let Some(i) = self.index(op) {
            self.stats[i].usage += 1;
            self.stats[i].total_usage += 1;
        }
    }

    pub fn reward(&mut self, op: T, score: f64) {
        if let Some(i) = self.index(op) {
            self.stats[i].score += score;
        }
    }

    /// Applies [`update_weight`] to every operator, then zeroes scores and
    /// usage counts.
    pub fn refresh(&mut self, rho: f64) {
        for s in &mut self.stats {
            s.weight = update_weight(s.weight, rho, s.score, s.usage).max(WEIGHT_FLOOR);
            s.score = 0.0;
            s.usage = 0;
        }
    }
}

/// The four operator groups: insertions, internal moves, removals and the
/// violation modes used by the tabu search.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorBank {
    pub insertion: Group<InsertionOp>,
    pub internal: Group<InternalOp>,
    pub removal: Group<RemovalOp>,
    pub violation: Group<Relax>,
}

impl OperatorBank {
    pub fn new(insertions: &[InsertionOp]) -> Self {
        OperatorBank {
            insertion: Group::new(insertions),
            internal: Group::new(&InternalOp::ALL),
            removal: Group::new(&RemovalOp::ALL),
            violation: Group::new(&[Relax::TravelBudget, Relax::DisruptionCap]),
        }
    }

    /// Refreshes the insertion, internal and removal groups.
    pub fn refresh_moves(&mut self, rho: f64) {
        self.insertion.refresh(rho);
        self.internal.refresh(rho);
        self.removal.refresh(rho);
    }

    /// `(operator name, lifetime usage)` across all groups.
    pub fn usage_summary(&self) -> Vec<(String, u64)> {
        let mut out = Vec::new();
        for (op, s) in self.insertion.ops.iter().zip(&self.insertion.stats) {
            out.push((op.name().to_string(), s.total_usage));
        }
        for (op, s) in self.internal.ops.iter().zip(&self.internal.stats) {
            out.push((op.name().to_string(), s.total_usage));
        }
        for (op, s) in self.removal.ops.iter().zip(&self.removal.stats) {
            out.push((op.name().to_string(), s.total_usage));
        }
        for (op, s) in self.violation.ops.iter().zip(&self.violation.stats) {
            let name = match op {
                Relax::TravelBudget => "violate_budget",
                Relax::DisruptionCap => "violate_disruption",
                Relax::None => "strict",
            };
            out.push((name.to_string(), s.total_usage));
        }
        out
    }
}

impl Default for OperatorBank {
    fn default() -> Self {
        OperatorBank::new(&InsertionOp::STANDARD)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn weight_update_branches() {
        assert!((update_weight(1.0, 0.95, 0.0, 0) - 0.95).abs() < 1e-12);
        assert!((update_weight(1.0, 0.95, 10.0, 2) - 4.80).abs() < 1e-9);
        assert!((update_weight(2.0, 0.95, 0.0, 3) - 2.0 * 0.05).abs() < 1e-12);
    }

    #[test]
    fn probabilities_from_weights() {
        let p = probabilities(&[4.0, 1.0]).unwrap();
        assert!((p[0] - 0.8).abs() < 1e-12 && (p[1] - 0.2).abs() < 1e-12);
        let p = probabilities(&[1.0, 1.0, 1.0]).unwrap();
        assert!(p.iter().all(|x| (x - 1.0 / 3.0).abs() < 1e-12));
        assert_eq!(probabilities(&[0.0, 0.0]), Err(Error::DegenerateBank));
    }

    #[test]
    fn roulette_frequencies() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut hits = [0u32; 2];
        for _ in 0..20_000 {
            hits[roulette(&[4.0, 1.0], &mut rng).unwrap()] += 1;
        }
        let frac = hits[0] as f64 / 20_000.0;
        assert!((frac - 0.8).abs() < 0.015, "{frac}");
        assert_eq!(roulette(&[3.0], &mut rng).unwrap(), 0);
        assert!(roulette(&[0.0, 0.0], &mut rng).is_err());
    }

    #[test]
    fn refresh_resets_and_normalises() {
        let mut g = Group::new(&RemovalOp::ALL);
        g.record_use(RemovalOp::Ratio);
        g.record_use(RemovalOp::Ratio);
        g.reward(RemovalOp::Ratio, 10.0);
        g.refresh(0.95);
        assert!((g.stats()[0].weight - 4.8).abs() < 1e-9);
        assert!((g.stats()[1].weight - 0.95).abs() < 1e-12);
        assert_eq!(g.stats()[0].usage, 0);
        assert_eq!(g.stats()[0].score, 0.0);
        assert_eq!(g.stats()[0].total_usage, 2);
        let sum: f64 = g.probabilities().unwrap().iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }
}
