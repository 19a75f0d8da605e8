//! CPLEX-LP export of the original TSP model and the rescheduling model, so
//! that any external MILP solver can certify small instances, plus the gap
//! metric used to compare against its results.

use std::fmt::Write as _;

use crate::baseline::OriginalSchedule;
use crate::error::{Error, Result};
use crate::instance::{DerivedLimits, Instance};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Le,
    Ge,
    Eq,
}

impl Cmp {
    fn symbol(self) -> &'static str {
        match self {
            Cmp::Le => "<=",
            Cmp::Ge => ">=",
            Cmp::Eq => "=",
        }
    }
}

pub type Terms = Vec<(f64, String)>;

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub terms: Terms,
    pub cmp: Cmp,
    pub rhs: f64,
}

/// `lower <= var <= upper`; `None` means the LP default (0 / +inf).
#[derive(Debug, Clone, PartialEq)]
pub struct Bound {
    pub var: String,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

/// An in-memory linear model that renders to LP text.
#[derive(Debug, Clone, PartialEq)]
pub struct LpModel {
    pub comments: Vec<String>,
    pub sense: Sense,
    pub objective: Terms,
    pub constraints: Vec<Constraint>,
    pub bounds: Vec<Bound>,
    pub binaries: Vec<String>,
    pub generals: Vec<String>,
    pub continuous: Vec<String>,
}

impl LpModel {
    fn new(sense: Sense) -> Self {
        LpModel {
            comments: Vec::new(),
            sense,
            objective: Vec::new(),
            constraints: Vec::new(),
            bounds: Vec::new(),
            binaries: Vec::new(),
            generals: Vec::new(),
            continuous: Vec::new(),
        }
    }

    fn add(&mut self, name: String, terms: Terms, cmp: Cmp, rhs: f64) {
        self.constraints.push(Constraint { name, terms, cmp, rhs });
    }

    /// All declared variables: binaries, generals, then continuous.
    pub fn variables(&self) -> impl Iterator<Item = &str> {
        self.binaries
            .iter()
            .chain(&self.generals)
            .chain(&self.continuous)
            .map(String::as_str)
    }

    pub fn to_lp(&self) -> String {
        let mut out = String::new();
        for c in &self.comments {
            let _ = writeln!(out, "\\ {c}");
        }
        out.push_str(match self.sense {
            Sense::Minimize => "Minimize\n",
            Sense::Maximize => "Maximize\n",
        });
        let _ = writeln!(out, " obj: {}", render_terms(&self.objective));
        out.push_str("Subject To\n");
        for c in &self.constraints {
            let _ = writeln!(
                out,
                " {}: {} {} {}",
                c.name,
                render_terms(&c.terms),
                c.cmp.symbol(),
                num(c.rhs)
            );
        }
        out.push_str("Bounds\n");
        for b in &self.bounds {
            match (b.lower, b.upper) {
                (Some(l), Some(u)) if l == u => {
                    let _ = writeln!(out, " {} = {}", b.var, num(l));
                }
                (Some(l), Some(u)) => {
                    let _ = writeln!(out, " {} <= {} <= {}", num(l), b.var, num(u));
                }
                (Some(l), None) => {
                    let _ = writeln!(out, " {} >= {}", b.var, num(l));
                }
                (None, Some(u)) => {
                    let _ = writeln!(out, " {} <= {}", b.var, num(u));
                }
                (None, None) => {}
            }
        }
        if !self.binaries.is_empty() {
            out.push_str("Binaries\n");
            wrap_names(&mut out, &self.binaries);
        }
        if !self.generals.is_empty() {
            out.push_str("Generals\n");
            wrap_names(&mut out, &self.generals);
        }
        out.push_str("End\n");
        out
    }
}

fn num(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else {
        format!("{v}")
    }
}

fn render_terms(terms: &Terms) -> String {
    if terms.is_empty() {
        return "0".into();
    }
    let mut s = String::new();
    for (k, (coef, var)) in terms.iter().enumerate() {
        let sign = if *coef < 0.0 { "-" } else { "+" };
        let mag = coef.abs();
        if k == 0 {
            if *coef < 0.0 {
                s.push_str("- ");
            }
        } else {
            let _ = write!(s, " {sign} ");
        }
        if mag == 1.0 {
            s.push_str(var);
        } else {
            let _ = write!(s, "{} {}", num(mag), var);
        }
    }
    s
}

fn wrap_names(out: &mut String, names: &[String]) {
    for chunk in names.chunks(8) {
        let _ = writeln!(out, " {}", chunk.join(" "));
    }
}

fn x(i: usize, j: usize) -> String {
    format!("x_{i}_{j}")
}

/// Big-M: node count times the largest pairwise distance.
fn big_m(inst: &Instance, nodes: usize) -> f64 {
    nodes as f64 * inst.max_distance()
}

/// TSP over the depot and existing customers with MTZ subtour elimination.
pub fn original_model(inst: &Instance) -> Result<LpModel> {
    let ne = inst.n_existing();
    if ne < 2 {
        return Err(Error::DegenerateModel(format!(
            "original model needs at least two existing customers, got {ne}"
        )));
    }
    let existing: Vec<usize> = inst.existing_ids().collect();
    let all: Vec<usize> = std::iter::once(0).chain(existing.iter().copied()).collect();
    let m = big_m(inst, all.len());

    let mut lp = LpModel::new(Sense::Minimize);
    lp.comments
        .push("original schedule: minimum-length tour over the existing customers".into());
    lp.comments.push(format!("big-M = {}", num(m)));
    for &i in &all {
        for &j in &all {
            if i != j {
                lp.objective.push((inst.dist(i, j), x(i, j)));
            }
        }
    }
    for &j in &existing {
        let terms = all.iter().filter(|&&i| i != j).map(|&i| (1.0, x(i, j))).collect();
        lp.add(format!("in_{j}"), terms, Cmp::Eq, 1.0);
    }
    for &i in &existing {
        let terms = all.iter().filter(|&&j| j != i).map(|&j| (1.0, x(i, j))).collect();
        lp.add(format!("out_{i}"), terms, Cmp::Eq, 1.0);
    }
    lp.add(
        "depot_out".into(),
        existing.iter().map(|&i| (1.0, x(0, i))).collect(),
        Cmp::Eq,
        1.0,
    );
    lp.add(
        "depot_in".into(),
        existing.iter().map(|&i| (1.0, x(i, 0))).collect(),
        Cmp::Eq,
        1.0,
    );
    for &i in &existing {
        for &j in &existing {
            if i != j {
                lp.add(
                    format!("time_{i}_{j}"),
                    vec![
                        (1.0, format!("s_{i}")),
                        (-1.0, format!("s_{j}")),
                        (inst.dist(i, j) + m, x(i, j)),
                    ],
                    Cmp::Le,
                    m,
                );
            }
        }
    }
    let nef = ne as f64;
    for &i in &existing {
        for &j in &existing {
            if i != j {
                lp.add(
                    format!("mtz_{i}_{j}"),
                    vec![(1.0, format!("u_{i}")), (-1.0, format!("u_{j}")), (nef, x(i, j))],
                    Cmp::Le,
                    nef - 1.0,
                );
            }
        }
    }
    for &i in &existing {
        lp.bounds.push(Bound {
            var: format!("u_{i}"),
            lower: Some(1.0),
            upper: Some(nef),
        });
    }
    for &i in &all {
        lp.bounds.push(Bound {
            var: format!("s_{i}"),
            lower: Some(0.0),
            upper: None,
        });
    }
    for &i in &all {
        for &j in &all {
            if i != j {
                lp.binaries.push(x(i, j));
            }
        }
    }
    lp.generals = existing.iter().map(|i| format!("u_{i}")).collect();
    lp.continuous = all.iter().map(|i| format!("s_{i}")).collect();
    Ok(lp)
}

pub fn export_original(inst: &Instance) -> Result<String> {
    Ok(original_model(inst)?.to_lp())
}

/// The rescheduling model: maximise served payments minus rejection costs
/// subject to the travel budget, the disruption cap and no-wait timing.
pub fn rescheduling_model(inst: &Instance, baseline: &OriginalSchedule, limits: &DerivedLimits) -> Result<LpModel> {
    if baseline.n_existing() != inst.n_existing() || inst.existing_ids().any(|e| baseline.promised_time(e).is_none()) {
        return Err(Error::Structure(
            "baseline does not match the instance's existing customers".into(),
        ));
    }
    let customers: Vec<usize> = inst.customer_ids().collect();
    let all: Vec<usize> = (0..inst.len()).collect();
    let m = big_m(inst, all.len());
    let nc = customers.len() as f64;

    let mut lp = LpModel::new(Sense::Maximize);
    lp.comments
        .push("rescheduling with rejection of new customers; net profit is maximised".into());
    lp.comments.push(format!(
        "T_max = {}, disruption cap = {}, big-M = {}",
        num(limits.t_max),
        num(limits.disruption_cap),
        num(m)
    ));
    lp.comments
        .push("arrival times are exact (no waiting): arc timing is linked in both directions".into());

    for &i in &customers {
        lp.objective.push((inst.payment(i), format!("y_{i}")));
    }
    for j in inst.new_ids() {
        lp.objective.push((-inst.rejection_cost(), format!("v_{j}")));
    }

    lp.add(
        "depot_out".into(),
        customers.iter().map(|&i| (1.0, x(0, i))).collect(),
        Cmp::Eq,
        1.0,
    );
    lp.add(
        "depot_in".into(),
        customers.iter().map(|&i| (1.0, x(i, 0))).collect(),
        Cmp::Eq,
        1.0,
    );
    for e in inst.existing_ids() {
        lp.add(format!("serve_{e}"), vec![(1.0, format!("y_{e}"))], Cmp::Eq, 1.0);
    }
    for &j in &customers {
        let mut terms: Terms = all.iter().filter(|&&i| i != j).map(|&i| (1.0, x(i, j))).collect();
        terms.push((-1.0, format!("y_{j}")));
        lp.add(format!("in_{j}"), terms, Cmp::Eq, 0.0);
    }
    for &i in &customers {
        let mut terms: Terms = all.iter().filter(|&&j| j != i).map(|&j| (1.0, x(i, j))).collect();
        terms.push((-1.0, format!("y_{i}")));
        lp.add(format!("out_{i}"), terms, Cmp::Eq, 0.0);
    }
    for j in inst.new_ids() {
        let mut terms: Terms = all.iter().filter(|&&i| i != j).map(|&i| (1.0, x(i, j))).collect();
        terms.push((1.0, format!("v_{j}")));
        lp.add(format!("reject_{j}"), terms, Cmp::Eq, 1.0);
    }
    for e in inst.existing_ids() {
        let promised = baseline.promised_time(e).unwrap_or(0.0);
        lp.add(
            format!("late_{e}"),
            vec![(1.0, format!("s_{e}")), (-1.0, "z".into())],
            Cmp::Le,
            promised,
        );
        lp.add(
            format!("early_{e}"),
            vec![(-1.0, format!("s_{e}")), (-1.0, "z".into())],
            Cmp::Le,
            -promised,
        );
    }
    let mut budget = Terms::new();
    for &i in &all {
        for &j in &all {
            if i != j {
                budget.push((inst.dist(i, j), x(i, j)));
            }
        }
    }
    lp.add("budget".into(), budget, Cmp::Le, limits.t_max);
    for &i in &all {
        for &j in &customers {
            if i == j {
                continue;
            }
            let t = inst.dist(i, j);
            lp.add(
                format!("time_{i}_{j}"),
                vec![(1.0, format!("s_{i}")), (-1.0, format!("s_{j}")), (t + m, x(i, j))],
                Cmp::Le,
                m,
            );
            lp.add(
                format!("wait_{i}_{j}"),
                vec![(1.0, format!("s_{j}")), (-1.0, format!("s_{i}")), (m - t, x(i, j))],
                Cmp::Le,
                m,
            );
        }
    }
    for &i in &customers {
        for &j in &customers {
            if i != j {
                lp.add(
                    format!("mtz_{i}_{j}"),
                    vec![(1.0, format!("u_{i}")), (-1.0, format!("u_{j}")), (nc, x(i, j))],
                    Cmp::Le,
                    nc - 1.0,
                );
            }
        }
    }

    lp.bounds.push(Bound {
        var: "z".into(),
        lower: Some(0.0),
        upper: Some(limits.disruption_cap),
    });
    lp.bounds.push(Bound {
        var: "s_0".into(),
        lower: Some(0.0),
        upper: Some(0.0),
    });
    for &i in &customers {
        lp.bounds.push(Bound {
            var: format!("s_{i}"),
            lower: Some(0.0),
            upper: None,
        });
    }
    for &i in &customers {
        lp.bounds.push(Bound {
            var: format!("u_{i}"),
            lower: Some(1.0),
            upper: Some(nc),
        });
    }

    for &i in &all {
        for &j in &all {
            if i != j {
                lp.binaries.push(x(i, j));
            }
        }
    }
    lp.binaries.extend(customers.iter().map(|i| format!("y_{i}")));
    lp.binaries.extend(inst.new_ids().map(|j| format!("v_{j}")));
    lp.generals = customers.iter().map(|i| format!("u_{i}")).collect();
    lp.continuous = all.iter().map(|i| format!("s_{i}")).collect();
    lp.continuous.push("z".into());
    Ok(lp)
}

pub fn export_rescheduling(inst: &Instance, baseline: &OriginalSchedule, limits: &DerivedLimits) -> Result<String> {
    Ok(rescheduling_model(inst, baseline, limits)?.to_lp())
}

/// Relative gap in percent: `(exact - heuristic) / exact * 100`.
pub fn gap(exact_obj: f64, heuristic_obj: f64) -> Result<f64> {
    if exact_obj == 0.0 {
        return Err(Error::Division("exact objective is zero".into()));
    }
    Ok((exact_obj - heuristic_obj) / exact_obj * 100.0)
}
