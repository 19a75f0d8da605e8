//! Reader for the LP files written by the exporter, and an evaluator that
//! checks a variable assignment against every row, bound and integrality
//! marker.

use std::collections::{BTreeSet, HashMap};

use crate::brute::Problem;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub name: String,
    pub terms: Vec<(f64, String)>,
    pub cmp: Cmp,
    pub rhs: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParsedLp {
    pub maximize: bool,
    pub objective: Vec<(f64, String)>,
    pub rows: Vec<Row>,
    /// `(lower, upper)`; missing entries default to `[0, inf)`.
    pub bounds: HashMap<String, (f64, f64)>,
    pub binaries: BTreeSet<String>,
    pub generals: BTreeSet<String>,
}

fn parse_terms(text: &str) -> Result<Vec<(f64, String)>, String> {
    let mut out = Vec::new();
    let mut sign = 1.0;
    let mut coef: Option<f64> = None;
    for tok in text.split_whitespace() {
        match tok {
            "+" => sign = 1.0,
            "-" => sign = -1.0,
            _ => {
                if let Ok(v) = tok.parse::<f64>() {
                    coef = Some(v);
                } else {
                    out.push((sign * coef.unwrap_or(1.0), tok.to_string()));
                    sign = 1.0;
                    coef = None;
                }
            }
        }
    }
    if coef.is_some() {
        return Err(format!("dangling coefficient in `{text}`"));
    }
    Ok(out)
}

fn parse_row(line: &str) -> Result<Row, String> {
    let (name, rest) = line.split_once(':').ok_or_else(|| format!("unnamed row `{line}`"))?;
    let (lhs, cmp, rhs) = ["<=", ">=", "="]
        .iter()
        .find_map(|op| rest.split_once(op).map(|(l, r)| (l, *op, r)))
        .ok_or_else(|| format!("no comparison in `{line}`"))?;
    let cmp = match cmp {
        "<=" => Cmp::Le,
        ">=" => Cmp::Ge,
        _ => Cmp::Eq,
    };
    Ok(Row {
        name: name.trim().to_string(),
        terms: parse_terms(lhs)?,
        cmp,
        rhs: rhs.trim().parse().map_err(|_| format!("bad rhs in `{line}`"))?,
    })
}

fn parse_bound(line: &str, bounds: &mut HashMap<String, (f64, f64)>) -> Result<(), String> {
    let toks: Vec<&str> = line.split_whitespace().collect();
    let num = |s: &str| s.parse::<f64>().map_err(|_| format!("bad bound `{line}`"));
    match toks.as_slice() {
        [l, "<=", v, "<=", u] => {
            bounds.insert(v.to_string(), (num(l)?, num(u)?));
        }
        [v, "=", x] => {
            let x = num(x)?;
            bounds.insert(v.to_string(), (x, x));
        }
        [v, ">=", l] => {
            let e = bounds.entry(v.to_string()).or_insert((0.0, f64::INFINITY));
            e.0 = num(l)?;
        }
        [v, "<=", u] => {
            let e = bounds.entry(v.to_string()).or_insert((0.0, f64::INFINITY));
            e.1 = num(u)?;
        }
        _ => return Err(format!("unrecognised bound `{line}`")),
    }
    Ok(())
}

pub fn parse(text: &str) -> Result<ParsedLp, String> {
    #[derive(PartialEq)]
    enum Sec {
        Head,
        Obj,
        Rows,
        Bounds,
        Bin,
        Gen,
        Done,
    }
    let mut lp = ParsedLp::default();
    let mut sec = Sec::Head;
    for raw in text.lines() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('\\') {
            continue;
        }
        match line.to_ascii_lowercase().as_str() {
            "maximize" => {
                lp.maximize = true;
                sec = Sec::Obj;
                continue;
            }
            "minimize" => {
                sec = Sec::Obj;
                continue;
            }
            "subject to" => {
                sec = Sec::Rows;
                continue;
            }
            "bounds" => {
                sec = Sec::Bounds;
                continue;
            }
            "binaries" => {
                sec = Sec::Bin;
                continue;
            }
            "generals" => {
                sec = Sec::Gen;
                continue;
            }
            "end" => {
                sec = Sec::Done;
                continue;
            }
            _ => {}
        }
        match sec {
            Sec::Obj => {
                let body = line.split_once(':').map_or(line, |(_, b)| b);
                lp.objective.extend(parse_terms(body)?);
            }
            Sec::Rows => lp.rows.push(parse_row(line)?),
            Sec::Bounds => parse_bound(line, &mut lp.bounds)?,
            Sec::Bin => lp.binaries.extend(line.split_whitespace().map(String::from)),
            Sec::Gen => lp.generals.extend(line.split_whitespace().map(String::from)),
            Sec::Head | Sec::Done => return Err(format!("text outside a section: `{line}`")),
        }
    }
    if sec != Sec::Done {
        return Err("missing End".into());
    }
    Ok(lp)
}

fn dot(terms: &[(f64, String)], vals: &HashMap<String, f64>) -> f64 {
    terms.iter().map(|(c, v)| c * vals.get(v).copied().unwrap_or(0.0)).sum()
}

impl ParsedLp {
    pub fn objective_value(&self, vals: &HashMap<String, f64>) -> f64 {
        dot(&self.objective, vals)
    }

    /// Names of violated rows, bounds or integrality markers.
    pub fn violations(&self, vals: &HashMap<String, f64>, tol: f64) -> Vec<String> {
        let mut bad = Vec::new();
        for r in &self.rows {
            let lhs = dot(&r.terms, vals);
            let ok = match r.cmp {
                Cmp::Le => lhs <= r.rhs + tol,
                Cmp::Ge => lhs >= r.rhs - tol,
                Cmp::Eq => (lhs - r.rhs).abs() <= tol,
            };
            if !ok {
                bad.push(r.name.clone());
            }
        }
        let mut names: BTreeSet<&str> = self.binaries.iter().map(String::as_str).collect();
        names.extend(self.generals.iter().map(String::as_str));
        names.extend(self.bounds.keys().map(String::as_str));
        for r in &self.rows {
            names.extend(r.terms.iter().map(|(_, v)| v.as_str()));
        }
        for name in names {
            let v = vals.get(name).copied().unwrap_or(0.0);
            let (lo, hi) = if self.binaries.contains(name) {
                (0.0, 1.0)
            } else {
                self.bounds.get(name).copied().unwrap_or((0.0, f64::INFINITY))
            };
            if v < lo - tol || v > hi + tol {
                bad.push(format!("bound:{name}"));
            }
            if (self.binaries.contains(name) || self.generals.contains(name)) && (v - v.round()).abs() > tol {
                bad.push(format!("integer:{name}"));
            }
        }
        bad
    }
}

/// Variable values induced by a depot-to-depot route of the rescheduling
/// model: arcs, visit and rejection flags, exact arrival times, visit
/// positions and the largest disruption.
pub fn route_assignment(p: &Problem, route: &[usize]) -> HashMap<String, f64> {
    let mut vals = HashMap::new();
    for w in route.windows(2) {
        vals.insert(format!("x_{}_{}", w[0], w[1]), 1.0);
    }
    let arrivals = p.arrivals(route);
    for (i, arrival) in arrivals.iter().enumerate().skip(1) {
        let on = route.contains(&i);
        vals.insert(format!("y_{i}"), if on { 1.0 } else { 0.0 });
        if p.is_new(i) {
            vals.insert(format!("v_{i}"), if on { 0.0 } else { 1.0 });
        }
        vals.insert(format!("s_{i}"), arrival.unwrap_or(0.0));
        let pos = route[1..route.len() - 1].iter().position(|&v| v == i);
        vals.insert(format!("u_{i}"), pos.map_or(1.0, |k| (k + 1) as f64));
    }
    vals.insert("s_0".into(), 0.0);
    vals.insert("z".into(), p.max_disruption(route));
    vals
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn terms_and_rows() {
        assert_eq!(
            parse_terms("x_0_1 + 3.5 y_2 - z").unwrap(),
            vec![(1.0, "x_0_1".into()), (3.5, "y_2".into()), (-1.0, "z".into())]
        );
        assert_eq!(parse_terms("- 2 a").unwrap(), vec![(-2.0, "a".into())]);
        let r = parse_row("c1: a - b <= -4").unwrap();
        assert_eq!(r.cmp, Cmp::Le);
        assert_eq!(r.rhs, -4.0);
    }

    #[test]
    fn small_model() {
        let text =
            "\\ toy\nMaximize\n obj: 2 a + b\nSubject To\n c: a + b <= 1\nBounds\n 0 <= b <= 1\nBinaries\n a\nEnd\n";
        let lp = parse(text).unwrap();
        let mut v = HashMap::new();
        v.insert("a".to_string(), 1.0);
        assert!(lp.violations(&v, 1e-9).is_empty());
        assert_eq!(lp.objective_value(&v), 2.0);
        v.insert("b".to_string(), 0.5);
        assert_eq!(lp.violations(&v, 1e-9), vec!["c".to_string()]);
    }
}
