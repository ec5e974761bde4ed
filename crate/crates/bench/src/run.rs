//! The multi-start benchmark: solves, aggregation and artifacts.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use sapgm_core::problems::Problem;
use sapgm_core::{nondominated_filter, solve, solve_baseline, FrontPoint, RunStatus, SolverConfig};
use serde::Serialize;

use crate::config::{BenchConfig, Solver};
use crate::error::{BenchError, Result};
use crate::svg::emit_svg_scatter;

/// Outcome of one seeded solve.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub problem: String,
    pub problem_index: usize,
    pub solver: Solver,
    pub seed: u64,
    pub status: RunStatus,
    pub iterations: usize,
    pub fevals: usize,
    /// Wall time of the solve call alone.
    pub time_s: f64,
    pub final_x: Vec<f64>,
    pub final_f: Vec<f64>,
    pub bound_warnings: usize,
    pub inexact_subproblems: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub problem: String,
    pub solver: String,
    pub avg_time_s: f64,
    pub avg_iter: f64,
    pub avg_feval: f64,
    pub converged_fraction: f64,
}

/// A front point tagged with the run that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct TaggedPoint {
    pub solver: Solver,
    pub seed: u64,
    pub point: FrontPoint,
}

#[derive(Debug, Clone)]
pub struct BenchOutcome {
    /// Sorted by (problem index, solver, seed).
    pub records: Vec<RunRecord>,
    pub summary: Vec<SummaryRow>,
    /// Pooled nondominated, distinct final points per problem name.
    pub fronts: BTreeMap<String, Vec<TaggedPoint>>,
    pub out_dir: PathBuf,
}

/// Runs one solve and times it.
pub fn run_one(p: &Problem, solver: Solver, seed: u64, cfg: &SolverConfig) -> Result<RunRecord> {
    let x0 = p.sample_start(seed);
    let start = Instant::now();
    let r = match solver {
        Solver::Sapgm => solve(p, &x0, cfg)?,
        Solver::Baseline => solve_baseline(p, &x0, cfg)?,
    };
    let time_s = start.elapsed().as_secs_f64();
    Ok(RunRecord {
        problem: p.name().to_string(),
        problem_index: p.index(),
        solver,
        seed,
        status: r.status,
        iterations: r.iterations,
        fevals: r.fevals,
        time_s,
        final_x: r.final_x,
        final_f: r.final_f,
        bound_warnings: r.bound_warnings,
        inexact_subproblems: r.inexact_subproblems,
    })
}

fn thread_pool(parallel: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(parallel)
        .build()
        .map_err(|e| BenchError::Config(format!("thread pool: {e}")))
}

/// All `(problem, solver, seed)` solves of `cfg`, sorted.
pub fn collect_runs(cfg: &BenchConfig, problems: &[Problem]) -> Result<Vec<RunRecord>> {
    let solver_cfg = cfg.solver_config();
    let jobs: Vec<(&Problem, Solver, u64)> = problems
        .iter()
        .flat_map(|p| {
            cfg.solver
                .solvers()
                .into_iter()
                .flat_map(move |s| cfg.seeds().map(move |seed| (p, s, seed)))
        })
        .collect();
    let mut records = thread_pool(cfg.parallel)?.install(|| {
        jobs.par_iter()
            .map(|(p, s, seed)| run_one(p, *s, *seed, &solver_cfg))
            .collect::<Result<Vec<_>>>()
    })?;
    records.sort_by_key(|r| (r.problem_index, r.solver, r.seed));
    Ok(records)
}

/// Averages per (problem, solver), in record order.
pub fn summarize(records: &[RunRecord]) -> Vec<SummaryRow> {
    let mut rows: Vec<SummaryRow> = Vec::new();
    for group in records.chunk_by(|a, b| a.problem_index == b.problem_index && a.solver == b.solver)
    {
        let n = group.len() as f64;
        let mean = |f: &dyn Fn(&RunRecord) -> f64| group.iter().map(f).sum::<f64>() / n;
        rows.push(SummaryRow {
            problem: group[0].problem.clone(),
            solver: group[0].solver.as_str().to_string(),
            avg_time_s: mean(&|r| r.time_s),
            avg_iter: mean(&|r| r.iterations as f64),
            avg_feval: mean(&|r| r.fevals as f64),
            converged_fraction: mean(&|r| (r.status == RunStatus::Converged) as u8 as f64),
        });
    }
    rows
}

/// Objective vectors closer than this (sup norm) count as one point.
pub const DISTINCT_TOL: f64 = 1e-9;

/// Drops points whose objective vector repeats an earlier one.
pub fn distinct_points(points: &[FrontPoint]) -> Vec<FrontPoint> {
    let mut out: Vec<FrontPoint> = Vec::new();
    for p in points {
        let seen = out.iter().any(|q| {
            q.f.iter()
                .zip(&p.f)
                .all(|(a, b)| (a - b).abs() <= DISTINCT_TOL)
        });
        if !seen {
            out.push(p.clone());
        }
    }
    out
}

/// Nondominated, distinct final points of `records`, keeping run tags.
pub fn pooled_front(records: &[&RunRecord]) -> Vec<TaggedPoint> {
    let points: Vec<FrontPoint> = records
        .iter()
        .map(|r| FrontPoint {
            x: r.final_x.clone(),
            f: r.final_f.clone(),
        })
        .collect();
    let kept = distinct_points(&nondominated_filter(&points));
    kept.into_iter()
        .map(|point| {
            let r = records
                .iter()
                .find(|r| r.final_f == point.f && r.final_x == point.x)
                .expect("point comes from a run");
            TaggedPoint {
                solver: r.solver,
                seed: r.seed,
                point,
            }
        })
        .collect()
}

fn fmt(v: f64) -> String {
    format!("{v}")
}

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).map_err(|e| BenchError::csv(path, e))
}

fn write_runs(path: &Path, records: &[RunRecord]) -> Result<()> {
    let n = records.iter().map(|r| r.final_x.len()).max().unwrap_or(0);
    let m = records.iter().map(|r| r.final_f.len()).max().unwrap_or(0);
    let mut w = writer(path)?;
    let mut header: Vec<String> = [
        "problem", "solver", "seed", "status", "iters", "fevals", "time_s",
    ]
    .map(String::from)
    .to_vec();
    header.extend((1..=n).map(|i| format!("final_x{i}")));
    header.extend((1..=m).map(|i| format!("final_F{i}")));
    w.write_record(&header)
        .map_err(|e| BenchError::csv(path, e))?;
    for r in records {
        let mut row = vec![
            r.problem.clone(),
            r.solver.as_str().to_string(),
            r.seed.to_string(),
            r.status.as_str().to_string(),
            r.iterations.to_string(),
            r.fevals.to_string(),
            fmt(r.time_s),
        ];
        row.extend((0..n).map(|i| r.final_x.get(i).map_or_else(String::new, |v| fmt(*v))));
        row.extend((0..m).map(|i| r.final_f.get(i).map_or_else(String::new, |v| fmt(*v))));
        w.write_record(&row).map_err(|e| BenchError::csv(path, e))?;
    }
    w.flush().map_err(|e| BenchError::io(path, e))
}

fn write_summary(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    let mut w = writer(path)?;
    for row in rows {
        w.serialize(row).map_err(|e| BenchError::csv(path, e))?;
    }
    w.flush().map_err(|e| BenchError::io(path, e))
}

fn write_front(path: &Path, front: &[TaggedPoint]) -> Result<()> {
    let mut w = writer(path)?;
    let n = front.first().map_or(0, |t| t.point.x.len());
    let m = front.first().map_or(0, |t| t.point.f.len());
    let mut header = vec!["solver".to_string(), "seed".to_string()];
    header.extend((1..=n).map(|i| format!("x{i}")));
    header.extend((1..=m).map(|i| format!("F{i}")));
    w.write_record(&header)
        .map_err(|e| BenchError::csv(path, e))?;
    for t in front {
        let mut row = vec![t.solver.as_str().to_string(), t.seed.to_string()];
        row.extend(t.point.x.iter().chain(&t.point.f).map(|v| fmt(*v)));
        w.write_record(&row).map_err(|e| BenchError::csv(path, e))?;
    }
    w.flush().map_err(|e| BenchError::io(path, e))
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    config: &'a BenchConfig,
    solver: SolverSettings,
    problems: Vec<&'a str>,
    seeds: Vec<u64>,
    files: Vec<String>,
}

/// Solver settings that `BenchConfig` does not expose.
#[derive(Serialize)]
pub(crate) struct SolverSettings {
    inner_tol: f64,
    max_inner: usize,
    warm_start_l: bool,
    backtrack_rule: &'static str,
    bound_factor: f64,
    bound_offset: f64,
}

impl From<&SolverConfig> for SolverSettings {
    fn from(c: &SolverConfig) -> Self {
        Self {
            inner_tol: c.inner_tol,
            max_inner: c.max_inner,
            warm_start_l: c.warm_start_l,
            backtrack_rule: match c.backtrack_rule {
                sapgm_core::BacktrackRule::DescentLemma => "descent-lemma",
                sapgm_core::BacktrackRule::Literal => "literal",
            },
            bound_factor: c.bound_factor,
            bound_offset: c.bound_offset,
        }
    }
}

pub(crate) fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| BenchError::io(dir, e))
}

/// Runs every configured solve and writes `runs.csv`, `summary.csv`,
/// `front_<problem>.{csv,svg}` and `manifest.json` under `cfg.out_dir`.
pub fn run_benchmark(cfg: &BenchConfig) -> Result<BenchOutcome> {
    cfg.validate()?;
    let problems = cfg.resolve_problems()?;
    create_dir(&cfg.out_dir)?;

    let records = collect_runs(cfg, &problems)?;
    for r in &records {
        if r.bound_warnings > 0 || r.inexact_subproblems > 0 {
            log::warn!(
                "{} {} seed {}: {} level-bound warnings, {} inexact subproblems",
                r.problem,
                r.solver.as_str(),
                r.seed,
                r.bound_warnings,
                r.inexact_subproblems
            );
        }
    }
    let summary = summarize(&records);
    let mut files = vec!["runs.csv".to_string(), "summary.csv".to_string()];
    write_runs(&cfg.out_dir.join("runs.csv"), &records)?;
    write_summary(&cfg.out_dir.join("summary.csv"), &summary)?;

    let mut fronts = BTreeMap::new();
    for p in &problems {
        let mine: Vec<&RunRecord> = records
            .iter()
            .filter(|r| r.problem_index == p.index())
            .collect();
        let front = pooled_front(&mine);
        let slug = p.slug();
        write_front(&cfg.out_dir.join(format!("front_{slug}.csv")), &front)?;

        let mut per_solver: BTreeMap<String, Vec<FrontPoint>> = BTreeMap::new();
        for s in cfg.solver.solvers() {
            let own: Vec<&RunRecord> = mine.iter().copied().filter(|r| r.solver == s).collect();
            per_solver.insert(
                s.as_str().to_string(),
                pooled_front(&own).into_iter().map(|t| t.point).collect(),
            );
        }
        emit_svg_scatter(
            p.name(),
            &per_solver,
            &cfg.out_dir.join(format!("front_{slug}.svg")),
        )?;
        files.push(format!("front_{slug}.csv"));
        files.push(format!("front_{slug}.svg"));
        fronts.insert(p.name().to_string(), front);
    }

    let solver_cfg = cfg.solver_config();
    files.push("manifest.json".into());
    let manifest = Manifest {
        tool: "sapgm-bench",
        version: env!("CARGO_PKG_VERSION"),
        config: cfg,
        solver: SolverSettings::from(&solver_cfg),
        problems: problems.iter().map(Problem::name).collect(),
        seeds: cfg.seeds().collect(),
        files,
    };
    let path = cfg.out_dir.join("manifest.json");
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&path, json + "\n").map_err(|e| BenchError::io(&path, e))?;

    Ok(BenchOutcome {
        records,
        summary,
        fronts,
        out_dir: cfg.out_dir.clone(),
    })
}
