use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use hhcr_core::lp::{export_original, export_rescheduling, gap};
use hhcr_core::memetic::prepare;
use hhcr_core::{run_algorithm_traced, solve_exact, Algorithm, Instance, RunReport, RunTraces, Scenario, SolverConfig};
use rayon::prelude::*;

use crate::cli::{ExportArgs, GapArgs, GridArgs, OracleArgs, SolveArgs, Source};
use crate::io::{fmt_num, read_instance_list, resolve_config, write_csv, InstanceSpec};

pub const SUMMARY_HEADER: [&str; 10] = [
    "instance",
    "mu",
    "lambda",
    "algo",
    "runs",
    "best_obj",
    "avg_obj",
    "worst_obj",
    "best_time_s",
    "infeasible_runs",
];

/// One finished run. `report` is `None` when the baseline route already
/// exceeds the travel budget, so no feasible start exists.
#[derive(Debug, Clone)]
pub struct RunRow {
    pub instance: String,
    pub mu: f64,
    pub lambda: f64,
    pub algo: Algorithm,
    pub seed: u64,
    pub report: Option<RunReport>,
}

impl RunRow {
    fn key(&self) -> (String, u64, u64, Algorithm, u64) {
        (
            self.instance.clone(),
            self.mu.to_bits(),
            self.lambda.to_bits(),
            self.algo,
            self.seed,
        )
    }

    /// Run-report columns.
    pub fn report_record(&self, no_time: bool) -> Vec<String> {
        match &self.report {
            Some(r) => {
                let trace: Vec<String> = r.avg_obj_trace.iter().map(|v| format!("{v:.6}")).collect();
                vec![
                    self.instance.clone(),
                    self.seed.to_string(),
                    r.best_obj().to_string(),
                    trace.join(";"),
                    time_field(r.time_s, no_time),
                    r.generations.to_string(),
                ]
            }
            None => vec![
                self.instance.clone(),
                self.seed.to_string(),
                "infeasible".into(),
                String::new(),
                time_field(0.0, true),
                "0".into(),
            ],
        }
    }
}

fn time_field(t: f64, no_time: bool) -> String {
    if no_time {
        "0.000".into()
    } else {
        format!("{t:.3}")
    }
}

fn report_header() -> Vec<&'static str> {
    RunReport::HEADER.split(',').collect()
}

struct Job<'a> {
    name: &'a str,
    scenario: &'a Scenario,
    cfg: &'a SolverConfig,
    mu: f64,
    lambda: f64,
    algo: Algorithm,
    seed: u64,
}

fn execute(job: &Job<'_>) -> Result<RunRow> {
    let sc = job.scenario;
    let report = if sc.is_feasible(&sc.seed_solution()) {
        let mut r = run_algorithm_traced(sc, job.algo, job.cfg, job.seed, None)
            .with_context(|| format!("{} seed {}", job.name, job.seed))?;
        r.instance = job.name.to_string();
        Some(r)
    } else {
        None
    };
    Ok(RunRow {
        instance: job.name.to_string(),
        mu: job.mu,
        lambda: job.lambda,
        algo: job.algo,
        seed: job.seed,
        report,
    })
}

fn run_jobs(jobs: &[Job<'_>], threads: Option<usize>) -> Result<Vec<RunRow>> {
    let work = || jobs.par_iter().map(execute).collect::<Result<Vec<_>>>();
    let mut rows = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()?
            .install(work)?,
        None => work()?,
    };
    rows.sort_by_key(RunRow::key);
    Ok(rows)
}

/// Best / average / worst objective over the feasible runs of one group.
pub fn summary_record(group: &[&RunRow], no_time: bool) -> Vec<String> {
    let first = group[0];
    let objs: Vec<f64> = group
        .iter()
        .filter_map(|r| r.report.as_ref().map(RunReport::best_obj))
        .collect();
    let infeasible = group.len() - objs.len();
    let mut rec = vec![
        first.instance.clone(),
        fmt_num(first.mu),
        fmt_num(first.lambda),
        first.algo.to_string(),
        group.len().to_string(),
    ];
    if objs.is_empty() {
        rec.extend([String::new(), String::new(), String::new(), String::new()]);
    } else {
        let best = objs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let worst = objs.iter().copied().fold(f64::INFINITY, f64::min);
        let avg = objs.iter().sum::<f64>() / objs.len() as f64;
        let best_time = group
            .iter()
            .filter_map(|r| r.report.as_ref())
            .filter(|r| r.best_obj() == best)
            .map(|r| r.time_s)
            .fold(f64::INFINITY, f64::min);
        rec.extend([
            best.to_string(),
            avg.to_string(),
            worst.to_string(),
            time_field(best_time, no_time),
        ]);
    }
    rec.push(infeasible.to_string());
    rec
}

fn group_key(r: &RunRow) -> (&str, u64, u64, Algorithm) {
    (&r.instance, r.mu.to_bits(), r.lambda.to_bits(), r.algo)
}

/// Groups sorted rows by (instance, mu, lambda, algo).
fn groups(rows: &[RunRow]) -> Vec<Vec<&RunRow>> {
    let mut out: Vec<Vec<&RunRow>> = Vec::new();
    for r in rows {
        match out.last_mut() {
            Some(g) if group_key(g[0]) == group_key(r) => g.push(r),
            _ => out.push(vec![r]),
        }
    }
    out
}

fn write_traces(dir: &Path, traces: &RunTraces) -> Result<()> {
    fs::create_dir_all(dir)?;
    for (k, rows) in traces.alns.iter().enumerate() {
        let mut f = fs::File::create(dir.join(format!("alns_{k}.csv")))?;
        writeln!(f, "{}", hhcr_core::alns::AlnsTraceRow::HEADER)?;
        for r in rows {
            writeln!(f, "{}", r.to_csv())?;
        }
    }
    for (g, i, rows) in &traces.ts {
        let mut f = fs::File::create(dir.join(format!("ts_{g}_{i}.csv")))?;
        writeln!(f, "{}", hhcr_core::ts::TsTraceRow::HEADER)?;
        for r in rows {
            writeln!(f, "{}", r.to_csv())?;
        }
    }
    Ok(())
}

fn prepare_scenario(inst: &Instance, cfg: &SolverConfig, name: &str) -> Result<Scenario> {
    prepare(inst, cfg).with_context(|| format!("preparing {name}"))
}

pub fn solve(args: &SolveArgs) -> Result<()> {
    if args.repeats == 0 {
        bail!("--repeats must be at least 1");
    }
    let cfg = resolve_config(&args.config, args.mu, args.lambda)?;
    let spec = InstanceSpec::new(
        args.inst.instance.clone(),
        args.inst.ne,
        args.inst.nn,
        args.inst.name.clone(),
    );
    let inst = spec.load(cfg.rejection_cost)?;
    let sc = prepare_scenario(&inst, &cfg, &spec.name)?;

    if let Some(dir) = &args.trace {
        if sc.is_feasible(&sc.seed_solution()) {
            let mut traces = RunTraces::default();
            run_algorithm_traced(&sc, args.algo, &cfg, args.seed, Some(&mut traces))?;
            write_traces(dir, &traces)?;
        }
    }

    let jobs: Vec<Job<'_>> = (0..args.repeats)
        .map(|k| Job {
            name: &spec.name,
            scenario: &sc,
            cfg: &cfg,
            mu: cfg.mu,
            lambda: cfg.lambda,
            algo: args.algo,
            seed: args.seed + k,
        })
        .collect();
    let rows = run_jobs(&jobs, args.jobs)?;
    let refs: Vec<&RunRow> = rows.iter().collect();
    let summary = summary_record(&refs, args.no_time);

    let mut out = std::io::stdout().lock();
    for r in &rows {
        match &r.report {
            Some(rep) => writeln!(out, "seed={} {}", r.seed, rep.best.to_line())?,
            None => writeln!(out, "seed={} infeasible", r.seed)?,
        }
    }
    writeln!(out, "{}", SUMMARY_HEADER.join(","))?;
    writeln!(out, "{}", summary.join(","))?;

    if let Some(dir) = &args.out {
        let recs: Vec<Vec<String>> = rows.iter().map(|r| r.report_record(args.no_time)).collect();
        write_csv(&dir.join("runs.csv"), &report_header(), &recs)?;
        write_csv(&dir.join("summary.csv"), &SUMMARY_HEADER, &[summary])?;
    }
    Ok(())
}

pub fn grid(args: &GridArgs) -> Result<()> {
    if args.repeats == 0 || args.mu.is_empty() || args.lambda.is_empty() || args.algos.is_empty() {
        bail!("grid needs at least one repeat, mu, lambda and algorithm");
    }
    let base = resolve_config(&args.config, None, None)?;
    let specs = read_instance_list(&args.instances)?;
    let mut instances = Vec::new();
    for s in &specs {
        instances.push(s.load(base.rejection_cost)?);
    }

    let mut cells = Vec::new();
    for (s, inst) in specs.iter().zip(&instances) {
        for &mu in &args.mu {
            for &lambda in &args.lambda {
                let cfg = SolverConfig {
                    mu,
                    lambda,
                    ..base.clone()
                };
                cfg.validate()?;
                let sc = prepare_scenario(inst, &cfg, &s.name)?;
                cells.push((s.name.clone(), mu, lambda, cfg, sc));
            }
        }
    }
    let mut jobs = Vec::new();
    for (name, mu, lambda, cfg, sc) in &cells {
        for &algo in &args.algos {
            for k in 0..args.repeats {
                jobs.push(Job {
                    name,
                    scenario: sc,
                    cfg,
                    mu: *mu,
                    lambda: *lambda,
                    algo,
                    seed: args.seed + k,
                });
            }
        }
    }
    let rows = run_jobs(&jobs, args.jobs)?;
    write_grid(&args.out, &rows, &args.lambda, args.no_time)
}

/// Writes cell files, the comparison table, the summary and the pivot.
pub fn write_grid(out: &Path, rows: &[RunRow], lambdas: &[f64], no_time: bool) -> Result<()> {
    let mut cell_rows: BTreeMap<(Algorithm, u64, u64), Vec<Vec<String>>> = BTreeMap::new();
    for r in rows {
        cell_rows
            .entry((r.algo, r.mu.to_bits(), r.lambda.to_bits()))
            .or_default()
            .push(r.report_record(no_time));
    }
    for ((algo, mu, lambda), recs) in &cell_rows {
        let file = format!(
            "mu{}_lambda{}.csv",
            fmt_num(f64::from_bits(*mu)),
            fmt_num(f64::from_bits(*lambda))
        );
        write_csv(&out.join("cells").join(algo.name()).join(file), &report_header(), recs)?;
    }

    let comparison: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.instance.clone(),
                fmt_num(r.mu),
                fmt_num(r.lambda),
                r.algo.to_string(),
                r.seed.to_string(),
                r.report
                    .as_ref()
                    .map_or("infeasible".into(), |rep| rep.best_obj().to_string()),
            ]
        })
        .collect();
    write_csv(
        &out.join("comparison.csv"),
        &["instance", "mu", "lambda", "algo", "seed", "best_obj"],
        &comparison,
    )?;

    let grouped = groups(rows);
    let summary: Vec<Vec<String>> = grouped.iter().map(|g| summary_record(g, no_time)).collect();
    write_csv(&out.join("summary.csv"), &SUMMARY_HEADER, &summary)?;

    let mut pivot: BTreeMap<(String, Algorithm, u64), BTreeMap<u64, String>> = BTreeMap::new();
    for (g, rec) in grouped.iter().zip(&summary) {
        pivot
            .entry((g[0].instance.clone(), g[0].algo, g[0].mu.to_bits()))
            .or_default()
            .insert(g[0].lambda.to_bits(), rec[6].clone());
    }
    let mut header = vec!["instance".to_string(), "algo".into(), "mu".into()];
    header.extend(lambdas.iter().map(|l| format!("lambda={}", fmt_num(*l))));
    let pivot_rows: Vec<Vec<String>> = pivot
        .iter()
        .map(|((inst, algo, mu), by_lambda)| {
            let mut rec = vec![inst.clone(), algo.to_string(), fmt_num(f64::from_bits(*mu))];
            rec.extend(
                lambdas
                    .iter()
                    .map(|l| by_lambda.get(&l.to_bits()).cloned().unwrap_or_default()),
            );
            rec
        })
        .collect();
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    write_csv(&out.join("pivot.csv"), &header_refs, &pivot_rows)?;
    Ok(())
}

fn source_specs(source: &Source, ne: Option<usize>, nn: Option<usize>) -> Result<Vec<InstanceSpec>> {
    match (&source.instance, &source.instances) {
        (Some(path), None) => {
            let (Some(ne), Some(nn)) = (ne, nn) else {
                bail!("--instance needs --ne and --nn");
            };
            Ok(vec![InstanceSpec::new(path.clone(), ne, nn, None)])
        }
        (None, Some(list)) => read_instance_list(list),
        _ => bail!("give exactly one of --instance or --instances"),
    }
}

pub fn export(args: &ExportArgs) -> Result<()> {
    let cfg = resolve_config(&args.config, args.mu, args.lambda)?;
    let specs = source_specs(&args.source, args.ne, args.nn)?;
    fs::create_dir_all(&args.out)?;
    let mut manifest = Vec::new();
    for s in &specs {
        let inst = s.load(cfg.rejection_cost)?;
        let sc = prepare_scenario(&inst, &cfg, &s.name)?;
        let original = format!("{}_original.lp", s.name);
        let resched = format!("{}_mu{}_lambda{}.lp", s.name, fmt_num(cfg.mu), fmt_num(cfg.lambda));
        fs::write(args.out.join(&original), export_original(&sc.inst)?)?;
        fs::write(
            args.out.join(&resched),
            export_rescheduling(&sc.inst, &sc.baseline, &sc.limits)?,
        )?;
        let common = [s.name.clone(), s.ne.to_string(), s.nn.to_string()];
        manifest.push(
            [
                vec![original, "original".into()],
                common.to_vec(),
                vec![String::new(); 4],
            ]
            .concat(),
        );
        manifest.push(
            [
                vec![resched, "rescheduling".into()],
                common.to_vec(),
                vec![
                    fmt_num(cfg.mu),
                    fmt_num(cfg.lambda),
                    sc.limits.t_max.to_string(),
                    sc.limits.disruption_cap.to_string(),
                ],
            ]
            .concat(),
        );
    }
    write_csv(
        &args.out.join("manifest.csv"),
        &[
            "file",
            "model",
            "instance",
            "ne",
            "nn",
            "mu",
            "lambda",
            "t_max",
            "disruption_cap",
        ],
        &manifest,
    )
}

fn column(headers: &csv::StringRecord, name: &str) -> Option<usize> {
    headers.iter().position(|h| h.trim() == name)
}

fn read_table(path: &Path) -> Result<(csv::StringRecord, Vec<csv::StringRecord>)> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let headers = r.headers()?.clone();
    let rows = r.records().collect::<std::result::Result<Vec<_>, _>>()?;
    Ok((headers, rows))
}

struct Exact {
    mu: Option<f64>,
    lambda: Option<f64>,
    value: Option<f64>,
}

fn matches(key: Option<f64>, field: Option<&str>) -> bool {
    match (key, field.and_then(|f| f.trim().parse::<f64>().ok())) {
        (Some(a), Some(b)) => (a - b).abs() < 1e-12,
        (Some(_), None) => false,
        (None, _) => true,
    }
}

pub const GAP_HEADER: [&str; 10] = [
    "instance",
    "mu",
    "lambda",
    "algo",
    "exact_obj",
    "best_obj",
    "avg_obj",
    "gap_best",
    "gap_avg",
    "note",
];

/// Rows of the gap table for one results/summary pair.
pub fn gap_rows(results: &Path, summary: &Path) -> Result<Vec<Vec<String>>> {
    let (rh, rrows) = read_table(results)?;
    let (ri, re) = match (column(&rh, "instance"), column(&rh, "exact_obj")) {
        (Some(i), Some(e)) => (i, e),
        _ => bail!("{} needs `instance` and `exact_obj` columns", results.display()),
    };
    let (rmu, rl) = (column(&rh, "mu"), column(&rh, "lambda"));
    let mut exact: BTreeMap<String, Vec<Exact>> = BTreeMap::new();
    for r in &rrows {
        let parse = |c: Option<usize>| c.and_then(|c| r.get(c)).and_then(|v| v.trim().parse::<f64>().ok());
        exact
            .entry(r.get(ri).unwrap_or("").trim().to_string())
            .or_default()
            .push(Exact {
                mu: parse(rmu),
                lambda: parse(rl),
                value: parse(Some(re)),
            });
    }

    let (sh, srows) = read_table(summary)?;
    let (si, sb) = match (column(&sh, "instance"), column(&sh, "best_obj")) {
        (Some(i), Some(b)) => (i, b),
        _ => bail!("{} needs `instance` and `best_obj` columns", summary.display()),
    };
    let (smu, sl, sa, savg) = (
        column(&sh, "mu"),
        column(&sh, "lambda"),
        column(&sh, "algo"),
        column(&sh, "avg_obj"),
    );
    let mut out = Vec::new();
    for r in &srows {
        let get = |c: Option<usize>| c.and_then(|c| r.get(c)).unwrap_or("").trim().to_string();
        let name = get(Some(si));
        let (mu, lambda) = (get(smu), get(sl));
        let best = get(Some(sb)).parse::<f64>().ok();
        let avg = get(savg).parse::<f64>().ok();
        let found = exact.get(&name).and_then(|cands| {
            cands
                .iter()
                .find(|e| matches(e.mu, Some(&mu)) && matches(e.lambda, Some(&lambda)))
        });
        let mut rec = vec![name, mu, lambda, get(sa)];
        let fmt_opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let (gb, ga, note) = match (found.and_then(|e| e.value), best) {
            _ if found.is_none() => (None, None, "no_exact"),
            (None, _) => (None, None, "exact_unavailable"),
            (Some(_), None) => (None, None, "infeasible"),
            (Some(0.0), Some(_)) => (None, None, "exact_obj_zero"),
            (Some(e), Some(b)) => (gap(e, b).ok(), avg.and_then(|a| gap(e, a).ok()), ""),
        };
        rec.extend([
            fmt_opt(found.and_then(|e| e.value)),
            fmt_opt(best),
            fmt_opt(avg),
            gb.map(|g| format!("{g:.4}")).unwrap_or_default(),
            ga.map(|g| format!("{g:.4}")).unwrap_or_default(),
            note.to_string(),
        ]);
        out.push(rec);
    }
    Ok(out)
}

pub fn gap_cmd(args: &GapArgs) -> Result<()> {
    let rows = gap_rows(&args.results, &args.summary)?;
    match &args.out {
        Some(path) => write_csv(path, &GAP_HEADER, &rows),
        None => {
            let mut w = csv::Writer::from_writer(std::io::stdout().lock());
            w.write_record(GAP_HEADER)?;
            for r in &rows {
                w.write_record(r)?;
            }
            w.flush()?;
            Ok(())
        }
    }
}

pub fn oracle(args: &OracleArgs) -> Result<()> {
    let cfg = resolve_config(&args.config, args.mu, args.lambda)?;
    let specs = source_specs(&args.source, args.ne, args.nn)?;
    let mut rows = Vec::new();
    let mut stdout = std::io::stdout().lock();
    for s in &specs {
        let inst = s.load(cfg.rejection_cost)?;
        let sc = prepare_scenario(&inst, &cfg, &s.name)?;
        let res = solve_exact(&sc).with_context(|| format!("oracle on {}", s.name))?;
        match &res.best {
            Some(sol) => {
                writeln!(stdout, "{} {}", s.name, sol.to_line())?;
                rows.push(vec![s.name.clone(), sol.objective().to_string()]);
            }
            None => {
                writeln!(stdout, "{} infeasible", s.name)?;
                rows.push(vec![s.name.clone(), "infeasible".into()]);
            }
        }
    }
    if let Some(path) = &args.out {
        write_csv(path, &["instance", "exact_obj"], &rows)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use hhcr_core::Solution;

    fn row(obj: Option<f64>, seed: u64) -> RunRow {
        let inst = Instance::new((0.0, 0.0), &[(1.0, 0.0, 1.0)], &[], Some(0.0)).unwrap();
        let report = obj.map(|o| RunReport {
            instance: "a".into(),
            seed,
            best: Solution::from_route(&inst, vec![0, 1, 0]).unwrap(),
            avg_obj_trace: vec![o],
            best_obj_trace: vec![o],
            time_s: 1.5,
            generations: 5,
            operator_usage: vec![],
        });
        RunRow {
            instance: "a".into(),
            mu: 1.0,
            lambda: 0.5,
            algo: Algorithm::Ma2,
            seed,
            report,
        }
    }

    #[test]
    fn summary_orders_best_avg_worst() {
        let rows = [row(Some(1.0), 1), row(None, 2)];
        let refs: Vec<&RunRow> = rows.iter().collect();
        let rec = summary_record(&refs, true);
        assert_eq!(rec[4], "2");
        assert_eq!(&rec[5..9], &["1", "1", "1", "0.000"]);
        assert_eq!(rec[9], "1");
        let none = [row(None, 1)];
        let refs: Vec<&RunRow> = none.iter().collect();
        assert_eq!(summary_record(&refs, false)[5], "");
    }

    #[test]
    fn report_record_shape() {
        assert_eq!(
            row(Some(1.0), 3).report_record(false),
            ["a", "3", "1", "1.000000", "1.500", "5"]
        );
        assert_eq!(row(None, 3).report_record(false)[2], "infeasible");
    }
}
