//! Plain enumeration of every route. No pruning, no shared code.

use hhcr_core::Instance;

pub const TOL: f64 = 1e-9;

/// Raw problem data in a form independent of the solver types.
#[derive(Debug, Clone)]
pub struct Problem {
    pub xy: Vec<(f64, f64)>,
    pub payment: Vec<f64>,
    pub n_existing: usize,
    pub rejection_cost: f64,
    /// Depot-to-depot baseline route over the existing customers.
    pub baseline: Vec<usize>,
    pub t_max: f64,
    pub cap: f64,
}

pub fn euclid(a: (f64, f64), b: (f64, f64)) -> f64 {
    ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
}

impl Problem {
    pub fn from_instance(inst: &Instance, baseline: &[usize], t_max: f64, cap: f64) -> Self {
        Problem {
            xy: inst.nodes().iter().map(|n| (n.x, n.y)).collect(),
            payment: inst.nodes().iter().map(|n| n.payment).collect(),
            n_existing: inst.n_existing(),
            rejection_cost: inst.rejection_cost(),
            baseline: baseline.to_vec(),
            t_max,
            cap,
        }
    }

    pub fn d(&self, i: usize, j: usize) -> f64 {
        euclid(self.xy[i], self.xy[j])
    }

    pub fn n(&self) -> usize {
        self.xy.len()
    }

    pub fn is_new(&self, i: usize) -> bool {
        i > self.n_existing
    }

    /// Arrival time at every node of a depot-to-depot route.
    pub fn arrivals(&self, route: &[usize]) -> Vec<Option<f64>> {
        let mut out = vec![None; self.n()];
        let mut t = 0.0;
        for w in route.windows(2) {
            t += self.d(w[0], w[1]);
            if w[1] != 0 {
                out[w[1]] = Some(t);
            }
        }
        out
    }

    pub fn length(&self, route: &[usize]) -> f64 {
        route.windows(2).map(|w| self.d(w[0], w[1])).sum()
    }

    pub fn promised(&self) -> Vec<Option<f64>> {
        self.arrivals(&self.baseline)
    }

    pub fn objective(&self, route: &[usize]) -> f64 {
        let mut f = 0.0;
        for i in 1..self.n() {
            if route.contains(&i) {
                f += self.payment[i];
            } else if self.is_new(i) {
                f -= self.rejection_cost;
            }
        }
        f
    }

    pub fn max_disruption(&self, route: &[usize]) -> f64 {
        let got = self.arrivals(route);
        let want = self.promised();
        (1..=self.n_existing)
            .map(|e| match (got[e], want[e]) {
                (Some(a), Some(b)) => (a - b).abs(),
                _ => f64::INFINITY,
            })
            .fold(0.0, f64::max)
    }

    pub fn feasible(&self, route: &[usize]) -> bool {
        self.length(route) <= self.t_max + TOL && self.max_disruption(route) <= self.cap + TOL
    }

    /// Every depot-to-depot route visiting all existing customers and any
    /// subset of new ones, in every order.
    pub fn all_routes(&self) -> Vec<Vec<usize>> {
        let n_new = self.n() - 1 - self.n_existing;
        let mut routes = Vec::new();
        for mask in 0u32..(1 << n_new) {
            let mut chosen: Vec<usize> = (1..=self.n_existing).collect();
            for k in 0..n_new {
                if mask & (1 << k) != 0 {
                    chosen.push(self.n_existing + 1 + k);
                }
            }
            permute(&mut chosen, 0, &mut |p| {
                let mut r = Vec::with_capacity(p.len() + 2);
                r.push(0);
                r.extend_from_slice(p);
                r.push(0);
                routes.push(r);
            });
        }
        routes
    }
}

fn permute(items: &mut Vec<usize>, k: usize, emit: &mut dyn FnMut(&[usize])) {
    if k == items.len() {
        emit(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, emit);
        items.swap(k, i);
    }
}

/// Optimal objective and one optimal route, or `None` if nothing is
/// feasible.
pub fn enumerate_optimum(p: &Problem) -> Option<(f64, Vec<usize>)> {
    let mut best: Option<(f64, Vec<usize>)> = None;
    for r in p.all_routes() {
        if !p.feasible(&r) {
            continue;
        }
        let f = p.objective(&r);
        if best.as_ref().is_none_or(|(b, _)| f > *b + TOL) {
            best = Some((f, r));
        }
    }
    best
}

/// Shortest closed tour from the depot through `nodes`, by trying every
/// order.
pub fn tsp_length(xy: &[(f64, f64)], nodes: &[usize]) -> f64 {
    if nodes.is_empty() {
        return 0.0;
    }
    let mut items = nodes.to_vec();
    let mut best = f64::INFINITY;
    permute(&mut items, 0, &mut |p| {
        let mut len = euclid(xy[0], xy[p[0]]);
        for w in p.windows(2) {
            len += euclid(xy[w[0]], xy[w[1]]);
        }
        len += euclid(xy[p[p.len() - 1]], xy[0]);
        best = best.min(len);
    });
    best
}

/// Mean Euclidean distance over ordered pairs of distinct nodes.
pub fn average_distance(xy: &[(f64, f64)]) -> f64 {
    let n = xy.len();
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += euclid(xy[i], xy[j]);
            }
        }
    }
    sum / (n * (n - 1)) as f64
}
