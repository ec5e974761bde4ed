//! Decay of the merit function along long runs, for several σ.

use std::fs;
use std::path::{Path, PathBuf};

use sapgm_core::metrics::merit_from_values;
use sapgm_core::problems::find;
use sapgm_core::{fit_rate, solve, FrontPoint, RateFit, RunStatus};
use serde::Serialize;

use crate::config::{BenchConfig, SolverChoice};
use crate::error::{BenchError, Result};
use crate::run::{collect_runs, create_dir, distinct_points};

/// Fixed run length with the stopping rule off.
pub const RATE_ITERATIONS: usize = 2000;
/// Fit window; earlier iterations are transient.
pub const FIT_RANGE: (usize, usize) = (20, 1000);

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlopeRow {
    pub sigma: f64,
    /// `None` when the series has too few positive values to fit.
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub residual: Option<f64>,
    pub positive_points: usize,
    pub series_file: String,
}

#[derive(Debug, Clone)]
pub struct RateOutcome {
    pub problem: String,
    pub reference_size: usize,
    pub rows: Vec<SlopeRow>,
    pub series: Vec<Vec<(usize, f64)>>,
    pub out_dir: PathBuf,
}

fn sigma_tag(sigma: f64) -> String {
    format!("{sigma}").replace('.', "p")
}

/// Reference front: nondominated final points of all converged default-σ
/// runs of both solvers over the seeds of `cfg`.
pub fn reference_front(problem: &str, cfg: &BenchConfig) -> Result<Vec<FrontPoint>> {
    let p = find(problem)?;
    let pooled_cfg = BenchConfig {
        solver: SolverChoice::Both,
        ..cfg.clone()
    };
    let records = collect_runs(&pooled_cfg, std::slice::from_ref(&p))?;
    let points: Vec<FrontPoint> = records
        .iter()
        .filter(|r| r.status == RunStatus::Converged)
        .map(|r| FrontPoint {
            x: r.final_x.clone(),
            f: r.final_f.clone(),
        })
        .collect();
    Ok(distinct_points(&sapgm_core::nondominated_filter(&points)))
}

/// Runs the accelerated solver from seed `cfg.base_seed` for each σ with the
/// stopping rule disabled and writes `rate_<problem>_sigma<σ>.csv` (k, merit)
/// plus `rate_<problem>_slopes.csv`. An empty σ list does nothing.
pub fn run_rate_experiment(
    problem: &str,
    sigmas: &[f64],
    cfg: &BenchConfig,
) -> Result<RateOutcome> {
    let p = find(problem)?;
    if sigmas.is_empty() {
        log::warn!(
            "rate experiment for {}: empty σ list, nothing to do",
            p.name()
        );
        return Ok(RateOutcome {
            problem: p.name().to_string(),
            reference_size: 0,
            rows: Vec::new(),
            series: Vec::new(),
            out_dir: cfg.out_dir.clone(),
        });
    }
    cfg.validate()?;
    for &s in sigmas {
        if !(s > 0.0 && s < 2.0) {
            return Err(BenchError::Config(format!("sigma {s} outside (0, 2)")));
        }
    }
    create_dir(&cfg.out_dir)?;
    let reference = reference_front(problem, cfg)?;
    if reference.is_empty() {
        return Err(BenchError::Solver(sapgm_core::Error::Empty(
            "reference front",
        )));
    }
    let x0 = p.sample_start(cfg.base_seed);
    let slug = p.slug();

    let mut rows = Vec::new();
    let mut all_series = Vec::new();
    for &sigma in sigmas {
        let solver_cfg = sapgm_core::SolverConfig {
            sigma,
            stopping: false,
            max_iter: RATE_ITERATIONS,
            record_trace: true,
            ..cfg.solver_config()
        };
        let run = solve(&p, &x0, &solver_cfg)?;
        let trace = run.trace.unwrap_or_default();
        let series = trace
            .iter()
            .map(|rec| Ok((rec.k, merit_from_values(&p.eval_true(&rec.x)?, &reference))))
            .collect::<std::result::Result<Vec<_>, sapgm_core::Error>>()?;

        let file = format!("rate_{slug}_sigma{}.csv", sigma_tag(sigma));
        write_series(&cfg.out_dir.join(&file), &series)?;
        let positive_points = series
            .iter()
            .filter(|(k, v)| *k >= FIT_RANGE.0 && *k <= FIT_RANGE.1 && *v > 0.0)
            .count();
        let fit: Option<RateFit> = match fit_rate(&series, FIT_RANGE.0, FIT_RANGE.1) {
            Ok(f) => Some(f),
            Err(e) => {
                log::warn!("{} σ={sigma}: no slope ({e})", p.name());
                None
            }
        };
        rows.push(SlopeRow {
            sigma,
            slope: fit.map(|f| f.slope),
            intercept: fit.map(|f| f.intercept),
            residual: fit.map(|f| f.residual),
            positive_points,
            series_file: file,
        });
        all_series.push(series);
    }

    let path = cfg.out_dir.join(format!("rate_{slug}_slopes.csv"));
    let mut w = csv::Writer::from_path(&path).map_err(|e| BenchError::csv(&path, e))?;
    for row in &rows {
        w.serialize(row).map_err(|e| BenchError::csv(&path, e))?;
    }
    w.flush().map_err(|e| BenchError::io(&path, e))?;

    Ok(RateOutcome {
        problem: p.name().to_string(),
        reference_size: reference.len(),
        rows,
        series: all_series,
        out_dir: cfg.out_dir.clone(),
    })
}

fn write_series(path: &Path, series: &[(usize, f64)]) -> Result<()> {
    let mut out = String::from("k,merit\n");
    for (k, v) in series {
        out.push_str(&format!("{k},{v}\n"));
    }
    fs::write(path, out).map_err(|e| BenchError::io(path, e))
}
