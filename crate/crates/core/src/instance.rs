//! Problem instances: node partition, payments, distances, and the derived
//! travel budget and disruption cap.

use crate::error::{Error, Result};

/// Role of a node in the rescheduling problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeKind {
    Depot,
    /// Pre-scheduled, mandatory customer.
    Existing,
    /// Same-day request that may be rejected.
    New,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: usize,
    pub x: f64,
    pub y: f64,
    pub payment: f64,
    pub kind: NodeKind,
}

/// An immutable problem instance.
///
/// Node `0` is the depot, ids `1..=n_existing` are existing customers and
/// the following `n_new` ids are new customers.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    nodes: Vec<Node>,
    n_existing: usize,
    n_new: usize,
    rejection_cost: f64,
    dist: Vec<f64>,
}

impl Instance {
    /// Builds an instance from raw `(x, y, payment)` triples.
    ///
    /// The depot payment is forced to zero. When `rejection_cost` is `None`
    /// the mean payment over new customers is used.
    pub fn new(
        depot: (f64, f64),
        existing: &[(f64, f64, f64)],
        new: &[(f64, f64, f64)],
        rejection_cost: Option<f64>,
    ) -> Result<Self> {
        let mut nodes = Vec::with_capacity(1 + existing.len() + new.len());
        nodes.push(Node {
            id: 0,
            x: depot.0,
            y: depot.1,
            payment: 0.0,
            kind: NodeKind::Depot,
        });
        let tagged = existing
            .iter()
            .map(|p| (p, NodeKind::Existing))
            .chain(new.iter().map(|p| (p, NodeKind::New)));
        for (&(x, y, payment), kind) in tagged {
            if !(payment >= 0.0) || !payment.is_finite() {
                return Err(Error::Domain(format!(
                    "node {} has invalid payment {payment}",
                    nodes.len()
                )));
            }
            if !x.is_finite() || !y.is_finite() {
                return Err(Error::Domain(format!(
                    "node {} has non-finite coordinates",
                    nodes.len()
                )));
            }
            nodes.push(Node {
                id: nodes.len(),
                x,
                y,
                payment,
                kind,
            });
        }

        let rejection_cost = match rejection_cost {
            Some(r) if r >= 0.0 && r.is_finite() => r,
            Some(r) => return Err(Error::Domain(format!("rejection cost must be non-negative, got {r}"))),
            None if new.is_empty() => 0.0,
            None => new.iter().map(|p| p.2).sum::<f64>() / new.len() as f64,
        };

        let n = nodes.len();
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = (nodes[i].x - nodes[j].x).hypot(nodes[i].y - nodes[j].y);
                dist[i * n + j] = d;
                dist[j * n + i] = d;
            }
        }

        Ok(Instance {
            nodes,
            n_existing: existing.len(),
            n_new: new.len(),
            rejection_cost,
            dist,
        })
    }

    /// Parses a whitespace-separated `x y score` file in the OP/TOP
    /// benchmark layout.
    ///
    /// Header lines starting with a letter (or `#`) are skipped, as is a
    /// leading two-field numeric line (`tmax paths`). The first data line is
    /// the depot; the next `n_existing` lines become existing customers and
    /// the following `n_new` lines new customers. Remaining lines are
    /// ignored.
    pub fn parse(content: &str, n_existing: usize, n_new: usize, rejection_cost: Option<f64>) -> Result<Self> {
        let mut points: Vec<(f64, f64, f64)> = Vec::new();
        for (idx, raw) in content.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            let first = line.chars().next().unwrap_or(' ');
            if first.is_ascii_alphabetic() || first == '#' {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if points.is_empty() && fields.len() == 2 {
                continue;
            }
            if fields.len() != 3 {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected `x y score`, found {} fields", fields.len()),
                });
            }
            let mut vals = [0.0f64; 3];
            for (slot, field) in vals.iter_mut().zip(&fields) {
                *slot = field.parse().map_err(|_| Error::Parse {
                    line: line_no,
                    message: format!("`{field}` is not a number"),
                })?;
            }
            if vals[2] < 0.0 {
                return Err(Error::Domain(format!("line {line_no}: negative score {}", vals[2])));
            }
            points.push((vals[0], vals[1], vals[2]));
        }

        let available = points.len().saturating_sub(1);
        if points.is_empty() || n_existing + n_new > available {
            return Err(Error::Cardinality {
                requested: n_existing + n_new,
                available,
            });
        }
        let depot = (points[0].0, points[0].1);
        let existing = &points[1..1 + n_existing];
        let new = &points[1 + n_existing..1 + n_existing + n_new];
        Instance::new(depot, existing, new, rejection_cost)
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.nodes.len() + j]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: usize) -> &Node {
        &self.nodes[id]
    }

    pub fn n_existing(&self) -> usize {
        self.n_existing
    }

    pub fn n_new(&self) -> usize {
        self.n_new
    }

    pub fn rejection_cost(&self) -> f64 {
        self.rejection_cost
    }

    /// Copy of this instance with a different rejection cost.
    pub fn with_rejection_cost(&self, r: f64) -> Result<Self> {
        if !(r >= 0.0) || !r.is_finite() {
            return Err(Error::Domain(format!("rejection cost must be non-negative, got {r}")));
        }
        Ok(Instance {
            rejection_cost: r,
            ..self.clone()
        })
    }

    #[inline]
    pub fn payment(&self, id: usize) -> f64 {
        self.nodes[id].payment
    }

    #[inline]
    pub fn kind(&self, id: usize) -> NodeKind {
        self.nodes[id].kind
    }

    #[inline]
    pub fn is_existing(&self, id: usize) -> bool {
        id >= 1 && id <= self.n_existing
    }

    #[inline]
    pub fn is_new(&self, id: usize) -> bool {
        id > self.n_existing && id < self.nodes.len()
    }

    pub fn existing_ids(&self) -> std::ops::RangeInclusive<usize> {
        1..=self.n_existing
    }

    pub fn new_ids(&self) -> std::ops::Range<usize> {
        self.n_existing + 1..self.nodes.len()
    }

    pub fn customer_ids(&self) -> std::ops::Range<usize> {
        1..self.nodes.len()
    }

    /// Average shortest-path length over all ordered pairs of distinct nodes.
    ///
    /// The graph is complete and Euclidean, so every shortest path is the
    /// direct edge.
    pub fn average_path_length(&self) -> f64 {
        let n = self.nodes.len();
        if n < 2 {
            return 0.0;
        }
        let total: f64 = self.dist.iter().sum();
        total / (n * (n - 1)) as f64
    }

    pub fn max_distance(&self) -> f64 {
        self.dist.iter().copied().fold(0.0, f64::max)
    }
}

/// Travel budget and disruption cap for one `(mu, lambda)` setting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedLimits {
    pub t_max: f64,
    pub disruption_cap: f64,
    pub tsp_baseline: f64,
    pub avg_path: f64,
}

impl DerivedLimits {
    /// `t_max = mu * tsp_baseline` and `disruption_cap = lambda * avg_path`.
    pub fn compute(inst: &Instance, mu: f64, lambda: f64, tsp_baseline: f64) -> Result<Self> {
        for (name, v) in [("mu", mu), ("lambda", lambda), ("tsp_baseline", tsp_baseline)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Domain(format!("{name} must be positive, got {v}")));
            }
        }
        let avg_path = inst.average_path_length();
        Ok(DerivedLimits {
            t_max: mu * tsp_baseline,
            disruption_cap: lambda * avg_path,
            tsp_baseline,
            avg_path,
        })
    }

    /// Limits with explicit values, bypassing the scaling rules.
    pub fn explicit(t_max: f64, disruption_cap: f64) -> Self {
        DerivedLimits {
            t_max,
            disruption_cap,
            tsp_baseline: t_max,
            avg_path: disruption_cap,
        }
    }
}
