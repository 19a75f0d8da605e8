//! End-to-end runs of the `hhcr` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hhcr_testkit::{instance_text, random_instance, t1};
use tempfile::TempDir;

fn hhcr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hhcr"))
        .args(args)
        .env_remove("HHCR_CONFIG")
        .output()
        .expect("binary runs")
}

fn write_t1(dir: &Path) -> PathBuf {
    let p = dir.join("t1.txt");
    fs::write(&p, instance_text(&t1())).unwrap();
    p
}

fn lines(p: &Path) -> Vec<String> {
    fs::read_to_string(p).unwrap().lines().map(str::to_string).collect()
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(hhcr(&[]).status.code(), Some(2));
    let out = hhcr(&["solve", "--ne", "2", "--nn", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--instance"));
    assert_eq!(
        hhcr(&["solve", "--instance", "x", "--ne", "two", "--nn", "2"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(hhcr(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn runtime_errors_exit_1() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("missing.txt");
    let out = hhcr(&[
        "solve",
        "--instance",
        missing.to_str().unwrap(),
        "--ne",
        "2",
        "--nn",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
    let inst = write_t1(dir.path());
    let too_many = hhcr(&["solve", "--instance", inst.to_str().unwrap(), "--ne", "3", "--nn", "3"]);
    assert_eq!(too_many.status.code(), Some(1));
    let bad_set = hhcr(&[
        "solve",
        "--instance",
        inst.to_str().unwrap(),
        "--ne",
        "2",
        "--nn",
        "2",
        "--set",
        "rho=7",
    ]);
    assert_eq!(bad_set.status.code(), Some(1));
}

#[test]
fn solve_writes_runs_and_aggregate() {
    let dir = TempDir::new().unwrap();
    let inst = write_t1(dir.path());
    let out_dir = dir.path().join("out");
    let out = hhcr(&[
        "solve",
        "--instance",
        inst.to_str().unwrap(),
        "--ne",
        "2",
        "--nn",
        "2",
        "--rejection-cost",
        "2",
        "--mu",
        "1.0",
        "--lambda",
        "0.5",
        "--repeats",
        "4",
        "--seed",
        "42",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(stdout.lines().filter(|l| l.contains("route=")).count(), 4);
    assert!(stdout.contains("obj=26"));

    let runs = lines(&out_dir.join("runs.csv"));
    assert_eq!(runs[0], "instance,seed,best_obj,avg_obj_trace,time_s,generations");
    assert_eq!(runs.len(), 5);
    let seeds: Vec<&str> = runs[1..].iter().map(|l| l.split(',').nth(1).unwrap()).collect();
    assert_eq!(seeds, ["42", "43", "44", "45"]);
    for r in &runs[1..] {
        let f: Vec<&str> = r.split(',').collect();
        assert_eq!(f[2], "26");
        assert_eq!(f[3].split(';').count(), 6);
        assert_eq!(f[5], "5");
    }
    let summary = lines(&out_dir.join("summary.csv"));
    assert_eq!(summary.len(), 2);
    let f: Vec<&str> = summary[1].split(',').collect();
    assert_eq!(&f[..8], ["t1", "1", "0.5", "ma2", "4", "26", "26", "26"]);
}

#[test]
fn single_repeat_aggregate_equals_run() {
    let dir = TempDir::new().unwrap();
    let p = dir.path().join("r.txt");
    fs::write(&p, instance_text(&random_instance(5, 4, 4))).unwrap();
    let out_dir = dir.path().join("o");
    let out = hhcr(&[
        "solve",
        "--instance",
        p.to_str().unwrap(),
        "--ne",
        "4",
        "--nn",
        "4",
        "--repeats",
        "1",
        "--out",
        out_dir.to_str().unwrap(),
        "--trace",
        dir.path().join("tr").to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let run: Vec<String> = lines(&out_dir.join("runs.csv"))[1]
        .split(',')
        .map(String::from)
        .collect();
    let agg: Vec<String> = lines(&out_dir.join("summary.csv"))[1]
        .split(',')
        .map(String::from)
        .collect();
    assert_eq!(agg[5], run[2]);
    assert_eq!(agg[6], run[2]);
    assert_eq!(agg[7], run[2]);
    assert_eq!(agg[8], run[4]);
    let alns = lines(&dir.path().join("tr").join("alns_0.csv"));
    assert_eq!(alns[0], "iter,operator_triple,obj,accepted,temperature");
    assert_eq!(alns.len(), 1001);
    let ts = lines(&dir.path().join("tr").join("ts_0_0.csv"));
    assert_eq!(ts[0], "iter,mode,phi,obj,Φ,verdict,tabu_hits");
    assert_eq!(ts.len(), 201);
}

#[test]
fn config_file_from_env() {
    let dir = TempDir::new().unwrap();
    let inst = write_t1(dir.path());
    let cfg = dir.path().join("hhcr.conf");
    fs::write(&cfg, "# small run\ngenerations = 2\nlambda = 0.5\n").unwrap();
    let out_dir = dir.path().join("o");
    let out = Command::new(env!("CARGO_BIN_EXE_hhcr"))
        .args([
            "solve",
            "--instance",
            inst.to_str().unwrap(),
            "--ne",
            "2",
            "--nn",
            "2",
            "--rejection-cost",
            "2",
        ])
        .args(["--out", out_dir.to_str().unwrap()])
        .env("HHCR_CONFIG", &cfg)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = &lines(&out_dir.join("runs.csv"))[1];
    assert!(run.ends_with(",2"), "{run}");
    let summary = &lines(&out_dir.join("summary.csv"))[1];
    assert!(summary.starts_with("t1,1,0.5,ma2,1,26,"));

    // explicit flags beat the file
    let out = Command::new(env!("CARGO_BIN_EXE_hhcr"))
        .args([
            "solve",
            "--instance",
            inst.to_str().unwrap(),
            "--ne",
            "2",
            "--nn",
            "2",
            "--rejection-cost",
            "2",
        ])
        .args(["--lambda", "1", "--out", out_dir.to_str().unwrap()])
        .env("HHCR_CONFIG", &cfg)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(lines(&out_dir.join("summary.csv"))[1].starts_with("t1,1,1,ma2,1,33,"));

    let out = Command::new(env!("CARGO_BIN_EXE_hhcr"))
        .args(["solve", "--instance", inst.to_str().unwrap(), "--ne", "2", "--nn", "2"])
        .env("HHCR_CONFIG", dir.path().join("nope.conf"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

fn write_list(dir: &Path, entries: &[(&str, u64, usize, usize)]) -> PathBuf {
    let mut list = String::from("# path ne nn\n");
    for (name, seed, ne, nn) in entries {
        fs::write(
            dir.join(format!("{name}.txt")),
            instance_text(&random_instance(*seed, *ne, *nn)),
        )
        .unwrap();
        list.push_str(&format!("{name}.txt {ne} {nn}\n"));
    }
    let p = dir.join("list.txt");
    fs::write(&p, list).unwrap();
    p
}

#[test]
fn default_grid_has_thirty_cells() {
    let dir = TempDir::new().unwrap();
    let list = write_list(dir.path(), &[("a", 1, 3, 3)]);
    let out_dir = dir.path().join("g");
    let out = hhcr(&[
        "grid",
        "--instances",
        list.to_str().unwrap(),
        "--repeats",
        "1",
        "--set",
        "generations=1",
        "--set",
        "alns_iterations=50",
        "--set",
        "ts_iterations=20",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(fs::read_dir(out_dir.join("cells").join("ma2")).unwrap().count(), 30);
    assert_eq!(lines(&out_dir.join("summary.csv")).len(), 31);
    let pivot = lines(&out_dir.join("pivot.csv"));
    assert_eq!(pivot.len(), 4);
    assert_eq!(pivot[0].split(',').count(), 13);
    for row in &lines(&out_dir.join("summary.csv"))[1..] {
        let f: Vec<&str> = row.split(',').collect();
        if f[9] == "0" {
            let (best, avg, worst): (f64, f64, f64) =
                (f[5].parse().unwrap(), f[6].parse().unwrap(), f[7].parse().unwrap());
            assert!(worst <= avg && avg <= best);
        }
    }
}

#[test]
fn single_cell_grid_matches_solve() {
    let dir = TempDir::new().unwrap();
    let list = write_list(dir.path(), &[("b", 2, 4, 3)]);
    let g = dir.path().join("g");
    let s = dir.path().join("s");
    let common = ["--repeats", "3", "--seed", "7", "--no-time", "--set", "generations=2"];
    let out = hhcr(
        &[
            &[
                "grid",
                "--instances",
                list.to_str().unwrap(),
                "--mu",
                "1",
                "--lambda",
                "0.6",
            ][..],
            &common[..],
            &["--out", g.to_str().unwrap()][..],
        ]
        .concat(),
    );
    assert!(out.status.success());
    let inst = dir.path().join("b.txt");
    let out = hhcr(
        &[
            &[
                "solve",
                "--instance",
                inst.to_str().unwrap(),
                "--ne",
                "4",
                "--nn",
                "3",
                "--mu",
                "1",
                "--lambda",
                "0.6",
            ][..],
            &common[..],
            &["--out", s.to_str().unwrap()][..],
        ]
        .concat(),
    );
    assert!(out.status.success());
    assert_eq!(
        fs::read(g.join("cells").join("ma2").join("mu1_lambda0.6.csv")).unwrap(),
        fs::read(s.join("runs.csv")).unwrap()
    );
    assert_eq!(
        fs::read(g.join("summary.csv")).unwrap(),
        fs::read(s.join("summary.csv")).unwrap()
    );
}

#[test]
fn grid_with_all_algorithms() {
    let dir = TempDir::new().unwrap();
    let list = write_list(dir.path(), &[("c", 3, 3, 3), ("d", 4, 3, 2)]);
    let g = dir.path().join("g");
    let out = hhcr(&[
        "grid",
        "--instances",
        list.to_str().unwrap(),
        "--mu",
        "1.0",
        "--lambda",
        "0.5,1.0",
        "--algos",
        "ma2,alns,ts,ma1",
        "--repeats",
        "2",
        "--set",
        "generations=1",
        "--out",
        g.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let cmp = lines(&g.join("comparison.csv"));
    assert_eq!(cmp[0], "instance,mu,lambda,algo,seed,best_obj");
    assert_eq!(cmp.len(), 1 + 2 * 2 * 4 * 2);
    let keys: Vec<Vec<&str>> = cmp[1..].iter().map(|l| l.split(',').take(5).collect()).collect();
    let mut sorted = keys.clone();
    sorted.sort_by(|a, b| {
        (a[0], a[1].parse::<f64>().unwrap(), a[2].parse::<f64>().unwrap())
            .partial_cmp(&(b[0], b[1].parse::<f64>().unwrap(), b[2].parse::<f64>().unwrap()))
            .unwrap()
    });
    assert_eq!(
        keys.iter().map(|k| (k[0], k[1], k[2])).collect::<Vec<_>>(),
        sorted.iter().map(|k| (k[0], k[1], k[2])).collect::<Vec<_>>()
    );
    for algo in ["ma2", "alns", "ts", "ma1"] {
        assert!(g.join("cells").join(algo).join("mu1_lambda0.5.csv").exists());
    }
}

#[test]
fn export_writes_two_models_per_instance() {
    let dir = TempDir::new().unwrap();
    let list = write_list(dir.path(), &[("e", 5, 3, 2), ("f", 6, 2, 2)]);
    let out_dir = dir.path().join("lp");
    let out = hhcr(&[
        "export",
        "--instances",
        list.to_str().unwrap(),
        "--lambda",
        "0.5",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest = lines(&out_dir.join("manifest.csv"));
    assert_eq!(manifest.len(), 5);
    for name in ["e", "f"] {
        let rows: Vec<&String> = manifest.iter().filter(|l| l.split(',').nth(2) == Some(name)).collect();
        assert_eq!(rows.len(), 2);
        for r in rows {
            let file = r.split(',').next().unwrap();
            let text = fs::read_to_string(out_dir.join(file)).unwrap();
            assert!(text.starts_with("\\") || text.contains("Maximize") || text.contains("Minimize"));
            assert!(text.trim_end().ends_with("End"));
        }
    }
    // byte-stable
    let again = dir.path().join("lp2");
    hhcr(&[
        "export",
        "--instances",
        list.to_str().unwrap(),
        "--lambda",
        "0.5",
        "--out",
        again.to_str().unwrap(),
    ]);
    assert_eq!(
        fs::read(out_dir.join("e_mu1_lambda0.5.lp")).unwrap(),
        fs::read(again.join("e_mu1_lambda0.5.lp")).unwrap()
    );
}

#[test]
fn gap_joins_exact_results() {
    let dir = TempDir::new().unwrap();
    let results = dir.path().join("exact.csv");
    fs::write(&results, "instance,exact_obj\na,100\nb,0\n").unwrap();
    let summary = dir.path().join("summary.csv");
    fs::write(
        &summary,
        "instance,mu,lambda,algo,runs,best_obj,avg_obj,worst_obj,best_time_s,infeasible_runs\n\
         a,1,0.5,ma2,2,95,90,85,0.1,0\nb,1,0.5,ma2,1,3,3,3,0.1,0\nc,1,0.5,ma2,1,3,3,3,0.1,0\n",
    )
    .unwrap();
    let out_csv = dir.path().join("gap.csv");
    let out = hhcr(&[
        "gap",
        "--results",
        results.to_str().unwrap(),
        "--summary",
        summary.to_str().unwrap(),
        "--out",
        out_csv.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut rdr = csv::Reader::from_path(&out_csv).unwrap();
    let h = rdr.headers().unwrap().clone();
    let col = |name: &str| h.iter().position(|c| c == name).unwrap();
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows[0][col("gap_best")].parse::<f64>().unwrap(), 5.0);
    assert_eq!(rows[0][col("gap_avg")].parse::<f64>().unwrap(), 10.0);
    assert_eq!(&rows[1][col("gap_best")], "");
    assert_eq!(&rows[1][col("note")], "exact_obj_zero");
    assert_eq!(&rows[2][col("note")], "no_exact");

    let out = hhcr(&[
        "gap",
        "--results",
        dir.path().join("none.csv").to_str().unwrap(),
        "--summary",
        summary.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "name,value\nx,1\n").unwrap();
    let out = hhcr(&[
        "gap",
        "--results",
        bad.to_str().unwrap(),
        "--summary",
        summary.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn oracle_reports_t1_optima() {
    let dir = TempDir::new().unwrap();
    let inst = write_t1(dir.path());
    for (lambda, expected) in [("1", "t1,33"), ("0.5", "t1,26")] {
        let csv_path = dir.path().join(format!("exact{lambda}.csv"));
        let out = hhcr(&[
            "oracle",
            "--instance",
            inst.to_str().unwrap(),
            "--ne",
            "2",
            "--nn",
            "2",
            "--rejection-cost",
            "2",
            "--mu",
            "1",
            "--lambda",
            lambda,
            "--out",
            csv_path.to_str().unwrap(),
        ]);
        assert!(out.status.success());
        assert_eq!(lines(&csv_path), ["instance,exact_obj", expected]);
    }
    let big = dir.path().join("big.txt");
    fs::write(&big, instance_text(&random_instance(1, 7, 6))).unwrap();
    let out = hhcr(&["oracle", "--instance", big.to_str().unwrap(), "--ne", "7", "--nn", "6"]);
    assert_eq!(out.status.code(), Some(1));
}
