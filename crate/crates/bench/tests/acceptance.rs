//! One PASS/FAIL line per acceptance criterion; exits non-zero if any fails.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use sapgm_bench::config::Solver;
use sapgm_bench::run::pooled_front;
use sapgm_bench::verify::{momentum_check, smoothing_reports, subproblem_check};
use sapgm_bench::{run_benchmark, run_rate_experiment, BenchConfig, BenchOutcome};
use sapgm_core::metrics::dominates;
use sapgm_core::RunStatus;

struct Verdict {
    pass: bool,
    detail: String,
}

fn timed(budget: Duration, f: impl FnOnce() -> Verdict) -> Verdict {
    let start = Instant::now();
    let mut v = f();
    let took = start.elapsed();
    if took > budget {
        v.pass = false;
        v.detail.push_str(&format!("; over the {budget:?} budget"));
    }
    v.detail.push_str(&format!(" [{:.2}s]", took.as_secs_f64()));
    v
}

fn smoothing() -> Verdict {
    let reports = smoothing_reports(1000, 2024);
    let worst = |f: fn(&sapgm_core::VerifyReport) -> f64| {
        reports.iter().map(|(_, r)| f(r)).fold(0.0, f64::max)
    };
    let kappa = worst(|r| r.max_kappa_violation);
    let fd = worst(|r| r.max_fd_rel_error);
    let convex = worst(|r| r.max_convexity_violation);
    let failing: Vec<&str> = reports
        .iter()
        .filter(|(_, r)| {
            !(r.max_kappa_violation <= 1e-9
                && r.max_fd_rel_error <= 1e-5
                && r.max_convexity_violation <= 1e-9)
        })
        .map(|(n, _)| n.as_str())
        .collect();
    Verdict {
        pass: failing.is_empty(),
        detail: format!(
            "{} surrogates; worst kappa {kappa:.1e}, fd {fd:.1e}, convexity {convex:.1e}{}",
            reports.len(),
            if failing.is_empty() {
                String::new()
            } else {
                format!("; failing {failing:?}")
            }
        ),
    }
}

fn momentum() -> Verdict {
    let checks: Vec<_> = [0.5, 1.0, 1.5, 1.9]
        .iter()
        .enumerate()
        .map(|(i, &s)| momentum_check(s, 10_000, i as u64))
        .collect();
    let identity = checks
        .iter()
        .map(|c| c.max_identity_error)
        .fold(0.0, f64::max);
    let theta = checks.iter().map(|c| c.max_theta_sq).fold(0.0, f64::max);
    let growth = checks
        .iter()
        .map(|c| c.max_growth_excess)
        .fold(f64::NEG_INFINITY, f64::max);
    Verdict {
        pass: checks.iter().all(|c| c.passes()),
        detail: format!(
            "identity {identity:.1e}, max theta^2 {theta:.6}, growth bound slack {:.3}",
            -growth
        ),
    }
}

fn subproblem() -> Verdict {
    let c = subproblem_check(100, 0);
    Verdict {
        pass: c.max_oracle_distance <= 1e-3 && c.max_gap <= 1e-8 && c.max_kkt <= 1e-6,
        detail: format!(
            "{} instances; grid distance {:.1e}, gap {:.1e}, kkt {:.1e}",
            c.instances, c.max_oracle_distance, c.max_gap, c.max_kkt
        ),
    }
}

const REPORTED_ITERATIONS: [(&str, f64); 6] = [
    ("JOS1", 32.82),
    ("CR&MF2", 40.76),
    ("CB3&LQ", 51.63),
    ("BK1", 57.53),
    ("SP1", 379.27),
    ("CB3&MF1", 483.85),
];

fn median(mut v: Vec<usize>) -> f64 {
    v.sort_unstable();
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2] as f64
    } else {
        (v[n / 2 - 1] + v[n / 2]) as f64 / 2.0
    }
}

fn benchmark(out: &BenchOutcome) -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, reported) in REPORTED_ITERATIONS {
        let runs: Vec<_> = out
            .records
            .iter()
            .filter(|r| r.problem == name && r.solver == Solver::Sapgm)
            .collect();
        let converged = runs
            .iter()
            .filter(|r| r.status == RunStatus::Converged)
            .count() as f64
            / runs.len() as f64;
        let med = median(runs.iter().map(|r| r.iterations).collect());
        let ok = converged >= 0.9 && med >= reported / 3.0 && med <= 3.0 * reported;
        pass &= ok;
        parts.push(format!(
            "{name} median {med} vs {reported} (window [{:.1}, {:.1}]) conv {:.2}{}",
            reported / 3.0,
            3.0 * reported,
            converged,
            if ok { "" } else { " X" }
        ));
    }
    Verdict {
        pass,
        detail: parts.join("; "),
    }
}

fn rates(dir: &Path) -> Verdict {
    let cfg = BenchConfig {
        problems: vec!["JOS1".into()],
        out_dir: dir.to_path_buf(),
        ..BenchConfig::default()
    };
    match run_rate_experiment("JOS1", &[0.5, 1.5], &cfg) {
        Err(e) => Verdict {
            pass: false,
            detail: format!("experiment failed: {e}"),
        },
        Ok(out) => {
            let limits = [-0.4, -0.1];
            let mut pass = true;
            let parts: Vec<String> = out
                .rows
                .iter()
                .zip(limits)
                .map(|(row, limit)| match row.slope {
                    Some(s) => {
                        pass &= s <= limit;
                        format!("sigma {} slope {s:.3} (need <= {limit})", row.sigma)
                    }
                    None => {
                        pass = false;
                        let nonzero = out.series[0].iter().filter(|(_, v)| *v != 0.0).count();
                        format!(
                            "sigma {}: no slope, {} positive merit values in [20, 1000] ({nonzero} nonzero overall)",
                            row.sigma, row.positive_points
                        )
                    }
                })
                .collect();
            Verdict {
                pass,
                detail: format!(
                    "reference front {} points; {}",
                    out.reference_size,
                    parts.join("; ")
                ),
            }
        }
    }
}

fn fronts(out: &BenchOutcome) -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, front) in &out.fronts {
        let clean = front
            .iter()
            .all(|a| !front.iter().any(|b| dominates(&b.point.f, &a.point.f)));
        let mine: Vec<_> = out.records.iter().filter(|r| &r.problem == name).collect();
        let by_solver: BTreeMap<Solver, Vec<_>> = [Solver::Sapgm, Solver::Baseline]
            .into_iter()
            .map(|s| {
                (
                    s,
                    pooled_front(
                        &mine
                            .iter()
                            .copied()
                            .filter(|r| r.solver == s)
                            .collect::<Vec<_>>(),
                    ),
                )
            })
            .collect();
        let sapgm = &by_solver[&Solver::Sapgm];
        let baseline = &by_solver[&Solver::Baseline];
        let swamped = !sapgm.is_empty()
            && sapgm
                .iter()
                .all(|a| baseline.iter().any(|b| dominates(&b.point.f, &a.point.f)));
        let ok = front.len() >= 20 && clean && !swamped;
        pass &= ok;
        parts.push(format!(
            "{name} {} distinct{}{}{}",
            front.len(),
            if clean { "" } else { " (dominated pair!)" },
            if swamped {
                " (baseline dominates sapgm front)"
            } else {
                ""
            },
            if ok { "" } else { " X" }
        ));
    }
    Verdict {
        pass,
        detail: parts.join("; "),
    }
}

fn determinism(dir: &Path) -> Verdict {
    let bin = env!("CARGO_BIN_EXE_bench");
    let mut tables = Vec::new();
    for i in 0..2 {
        let out = dir.join(format!("det{i}"));
        let run = Command::new(bin)
            .args(["run", "--runs", "5", "--seed", "7", "--out"])
            .arg(&out)
            .env("RUST_LOG", "error")
            .output();
        match run {
            Ok(o) if o.status.success() => {}
            other => {
                return Verdict {
                    pass: false,
                    detail: format!("bench run failed: {other:?}"),
                }
            }
        }
        let csv = std::fs::read_to_string(out.join("runs.csv")).unwrap_or_default();
        let stripped: Vec<String> = csv
            .lines()
            .map(|l| {
                let mut cols: Vec<&str> = l.split(',').collect();
                if cols.len() > 6 {
                    cols.remove(6);
                }
                cols.join(",")
            })
            .collect();
        tables.push(stripped);
    }
    let same = tables[0] == tables[1] && !tables[0].is_empty();
    Verdict {
        pass: same,
        detail: format!(
            "{} rows, identical without time_s: {same}",
            tables[0].len().saturating_sub(1)
        ),
    }
}

fn main() -> ExitCode {
    let dir = tempfile::tempdir().expect("temp dir");
    let mut verdicts = Vec::new();
    let mut report = |n: usize, name: &str, v: Verdict| {
        println!(
            "criterion {n} ({name}): {} - {}",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
        verdicts.push(v.pass);
    };

    report(
        1,
        "smoothing conformance",
        timed(Duration::from_secs(10), smoothing),
    );
    report(
        2,
        "momentum identities",
        timed(Duration::from_secs(1), momentum),
    );
    report(
        3,
        "subproblem oracle",
        timed(Duration::from_secs(60), subproblem),
    );

    let start = Instant::now();
    let bench_cfg = BenchConfig {
        out_dir: dir.path().join("bench"),
        ..BenchConfig::default()
    };
    let outcome = run_benchmark(&bench_cfg);
    let bench_time = start.elapsed();
    match &outcome {
        Ok(out) => {
            let mut v = benchmark(out);
            if bench_time > Duration::from_secs(600) {
                v.pass = false;
            }
            v.detail
                .push_str(&format!(" [{:.2}s]", bench_time.as_secs_f64()));
            report(4, "benchmark iterations", v);
        }
        Err(e) => report(
            4,
            "benchmark iterations",
            Verdict {
                pass: false,
                detail: e.to_string(),
            },
        ),
    }

    report(
        5,
        "rate regimes",
        timed(Duration::from_secs(120), || rates(&dir.path().join("rate"))),
    );
    match &outcome {
        Ok(out) => report(6, "front sanity", fronts(out)),
        Err(e) => report(
            6,
            "front sanity",
            Verdict {
                pass: false,
                detail: e.to_string(),
            },
        ),
    }
    report(
        7,
        "determinism",
        timed(Duration::from_secs(600), || determinism(dir.path())),
    );

    let passed = verdicts.iter().filter(|p| **p).count();
    println!("{passed}/{} criteria passed", verdicts.len());
    if passed == verdicts.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
