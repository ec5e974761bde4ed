//! The outer smoothing accelerated proximal gradient loop.
//!
//! Iteration `k` (from 0):
//!
//! 1. `μ_{k+1} = μ0 / (k+1)^σ`;
//! 2. starting from `L0`, solve the subproblem at `(x_k, y_k, μ_{k+1})` with
//!    `ℓ = L / μ_{k+1}` and multiply `L` by `η` until the descent-lemma test
//!    accepts `x_{k+1}`;
//! 3. stop when `‖x_k − x_{k+1}‖ < ε` and `μ_{k+1} < ε`;
//! 4. update `t`, `θ` and extrapolate `y_{k+1} = x_{k+1} + θ_{k+1}(x_{k+1} − x_k)`.

use alloc::vec::Vec;

use crate::error::{check_dim, Error, Result};
use crate::problems::{Evaluator, Problem};
use crate::subproblem::{solve_subproblem, SubproblemInput, SubproblemSolution};
use crate::vector;

/// Inflations allowed before backtracking gives up.
pub const MAX_INFLATIONS: usize = 60;

/// Inflate-or-accept rule used by [`backtrack_step`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BacktrackRule {
    /// Accept when `max_i [f̃_i(x̂) − f̃_i(y) − ⟨∇f̃_i(y), x̂ − y⟩] ≤ (ℓ/2)‖x̂ − y‖²`.
    #[default]
    DescentLemma,
    /// Inflate when `2 min_i [f̃_i(x̂) − f̃_i(y) − ⟨∇f̃_i(y), x̂ − y⟩] > (ℓ/2)‖x̂ − y‖²`.
    Literal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub mu0: f64,
    pub l0: f64,
    pub eta: f64,
    pub sigma: f64,
    pub eps: f64,
    pub max_iter: usize,
    pub inner_tol: f64,
    pub max_inner: usize,
    /// Start each backtracking search from `max(L0, L_prev/η)` instead of `L0`.
    pub warm_start_l: bool,
    pub record_trace: bool,
    /// When false the run always lasts `max_iter` iterations.
    pub stopping: bool,
    pub backtrack_rule: BacktrackRule,
    /// Boundedness diagnostic: warn when `max_i F̃_i(x_k, μ_k)` exceeds
    /// `bound_factor·|F̃₀| + bound_offset` (F̃₀ the value at the start).
    pub bound_factor: f64,
    pub bound_offset: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            mu0: 1.0,
            l0: 1.0,
            eta: 2.0,
            sigma: 1.9,
            eps: 1e-3,
            max_iter: 1000,
            inner_tol: 1e-10,
            max_inner: 500,
            warm_start_l: false,
            record_trace: false,
            stopping: true,
            backtrack_rule: BacktrackRule::DescentLemma,
            bound_factor: 10.0,
            bound_offset: 1.0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |name, value| Err(Error::InvalidParameter { name, value });
        if !(self.mu0 > 0.0 && self.mu0 <= 1.0) {
            return bad("mu0", self.mu0);
        }
        if !(self.l0 >= 1.0 && self.l0.is_finite()) {
            return bad("L0", self.l0);
        }
        if !(self.eta > 1.0 && self.eta.is_finite()) {
            return bad("eta", self.eta);
        }
        if !(self.sigma > 0.0 && self.sigma < 2.0) {
            return bad("sigma", self.sigma);
        }
        if !(self.eps > 0.0) {
            return bad("eps", self.eps);
        }
        if !(self.inner_tol > 0.0) {
            return bad("inner_tol", self.inner_tol);
        }
        if self.max_iter == 0 {
            return bad("max_iter", 0.0);
        }
        Ok(())
    }
}

/// Full algorithm state after `k` iterations.
#[derive(Debug, Clone, PartialEq)]
pub struct IterateState {
    pub k: usize,
    pub x_prev: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub t: f64,
    pub theta: f64,
    /// `μ_k`
    pub mu: f64,
    /// `L_k` (accepted in the last backtracking search)
    pub l: f64,
    pub fevals: usize,
    pub backtracks: usize,
}

impl IterateState {
    pub fn initial(x0: &[f64], cfg: &SolverConfig) -> Self {
        Self {
            k: 0,
            x_prev: x0.to_vec(),
            x: x0.to_vec(),
            y: x0.to_vec(),
            t: 1.0,
            theta: 0.0,
            mu: cfg.mu0,
            l: cfg.l0,
            fevals: 0,
            backtracks: 0,
        }
    }
}

/// One row of the optional per-iteration trace (values after iteration `k`).
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    /// Iteration number, 1-based (`x` is `x_k`).
    pub k: usize,
    pub x: Vec<f64>,
    pub mu: f64,
    pub l: f64,
    pub t: f64,
    pub theta: f64,
    pub step_norm: f64,
    pub trials: usize,
    /// `max_i F̃_i(x_k, μ_k)`
    pub merit: f64,
    pub subproblem_gap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Converged,
    MaxIter,
}

impl RunStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RunStatus::Converged => "converged",
            RunStatus::MaxIter => "max_iter",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub final_x: Vec<f64>,
    pub final_f: Vec<f64>,
    pub iterations: usize,
    pub fevals: usize,
    pub backtracks: usize,
    pub status: RunStatus,
    pub trace: Option<Vec<TraceRecord>>,
    /// Iterations at which the boundedness diagnostic fired.
    pub bound_warnings: usize,
    /// Subproblems that hit `max_inner` before reaching `inner_tol`.
    pub inexact_subproblems: usize,
}

/// `μ_{k+1} = μ0 / (k+1)^σ`.
pub fn mu_schedule(k: usize, mu0: f64, sigma: f64) -> f64 {
    mu0 / libm::pow((k + 1) as f64, sigma)
}

/// `(t_{k+1}, θ_{k+1})` from the quadratic
/// `t_{k+1}(t_{k+1} − 1) = (μ_k L_{k+1} / (μ_{k+1} L_k)) t_k²`.
pub fn momentum_update(t: f64, mu: f64, mu_next: f64, l: f64, l_next: f64) -> (f64, f64) {
    let ratio = (mu * l_next) / (mu_next * l);
    let t_next = 0.5 * (1.0 + libm::sqrt(1.0 + 4.0 * ratio * t * t));
    (t_next, (t - 1.0) / t_next)
}

/// Whether `x_hat` passes the acceptance test for proximal weight `ell`.
pub fn sufficient_decrease(
    rule: BacktrackRule,
    f_hat: &[f64],
    input: &SubproblemInput,
    x_hat: &[f64],
    ell: f64,
) -> bool {
    let step = vector::sub(x_hat, &input.y);
    let quad = 0.5 * ell * vector::dot(&step, &step);
    let excess: Vec<f64> = f_hat
        .iter()
        .zip(input.fy.iter().zip(&input.grads))
        .map(|(fh, (fy, gr))| fh - fy - vector::dot(gr, &step))
        .collect();
    match rule {
        // small absolute slack for rounding in f̃(x̂) − f̃(y)
        BacktrackRule::DescentLemma => {
            let scale = f_hat
                .iter()
                .chain(&input.fy)
                .fold(1.0, |m, v| f64::max(m, v.abs()));
            vector::max(&excess) <= quad + 1e-13 * scale
        }
        BacktrackRule::Literal => !(2.0 * vector::min(&excess) > quad),
    }
}

/// Accepted step of one backtracking search.
#[derive(Debug, Clone, PartialEq)]
pub struct BacktrackOutcome {
    pub x_next: Vec<f64>,
    pub l_accepted: f64,
    pub trials: usize,
    /// `μ_{k+1}` used throughout the search.
    pub mu: f64,
    /// `f̃_i(x_next, μ_{k+1})`
    pub f_next: Vec<f64>,
    pub input: SubproblemInput,
    pub solution: SubproblemSolution,
}

/// Lipschitz search of iteration `state.k`.
pub fn backtrack_step(
    state: &IterateState,
    ev: &mut Evaluator<'_>,
    cfg: &SolverConfig,
) -> Result<BacktrackOutcome> {
    let mu = mu_schedule(state.k, cfg.mu0, cfg.sigma);
    let mut l_trial = if cfg.warm_start_l {
        f64::max(cfg.l0, state.l / cfg.eta)
    } else {
        cfg.l0
    };
    let mut input = SubproblemInput::from_problem(ev, &state.x, &state.y, mu, l_trial / mu)?;
    for trials in 1..=MAX_INFLATIONS + 1 {
        let ell = l_trial / mu;
        input.ell = ell;
        let solution = solve_subproblem(&input, cfg.inner_tol, cfg.max_inner);
        let f_next = ev.eval_smooth(&solution.z, mu)?.values;
        if sufficient_decrease(cfg.backtrack_rule, &f_next, &input, &solution.z, ell) {
            return Ok(BacktrackOutcome {
                x_next: solution.z.clone(),
                l_accepted: l_trial,
                trials,
                mu,
                f_next,
                input,
                solution,
            });
        }
        l_trial *= cfg.eta;
    }
    Err(Error::DivergingLipschitz {
        inflations: MAX_INFLATIONS,
        last_l: l_trial,
    })
}

/// Accelerated run from `x0`.
pub fn solve(p: &Problem, x0: &[f64], cfg: &SolverConfig) -> Result<RunResult> {
    run(p, x0, cfg, true)
}

/// Same loop with the extrapolation switched off (`θ ≡ 0`, `y_{k+1} = x_{k+1}`).
pub fn solve_baseline(p: &Problem, x0: &[f64], cfg: &SolverConfig) -> Result<RunResult> {
    run(p, x0, cfg, false)
}

fn run(p: &Problem, x0: &[f64], cfg: &SolverConfig, accelerated: bool) -> Result<RunResult> {
    cfg.validate()?;
    check_dim(p.n(), x0.len())?;
    let mut ev = Evaluator::new(p);
    let mut state = IterateState::initial(x0, cfg);
    let mut trace = cfg.record_trace.then(Vec::new);

    let start_level = vector::max(&p.eval_smoothed_total(x0, cfg.mu0)?);
    let ceiling = cfg.bound_factor * start_level.abs() + cfg.bound_offset;
    let mut bound_warnings = 0;
    let mut inexact_subproblems = 0;
    let mut status = RunStatus::MaxIter;

    while state.k < cfg.max_iter {
        let step = backtrack_step(&state, &mut ev, cfg)?;
        if !step.solution.converged {
            inexact_subproblems += 1;
        }
        let x_next = step.x_next;
        let step_norm = vector::dist(&state.x, &x_next);
        let (t_next, theta_momentum) =
            momentum_update(state.t, state.mu, step.mu, state.l, step.l_accepted);
        let theta = if accelerated { theta_momentum } else { 0.0 };

        let merit = vector::max(&step.f_next) + p.g_kind().value(&x_next);
        if merit > ceiling {
            bound_warnings += 1;
            log::warn!(
                "{}: iterate {} left the level bound ({merit} > {ceiling})",
                p.name(),
                state.k + 1
            );
        }
        if let Some(tr) = trace.as_mut() {
            tr.push(TraceRecord {
                k: state.k + 1,
                x: x_next.clone(),
                mu: step.mu,
                l: step.l_accepted,
                t: t_next,
                theta,
                step_norm,
                trials: step.trials,
                merit,
                subproblem_gap: step.solution.gap,
            });
        }

        let y_next: Vec<f64> = x_next
            .iter()
            .zip(&state.x)
            .map(|(xn, xo)| xn + theta * (xn - xo))
            .collect();
        state.x_prev = core::mem::replace(&mut state.x, x_next);
        state.y = y_next;
        state.t = t_next;
        state.theta = theta;
        state.mu = step.mu;
        state.l = step.l_accepted;
        state.backtracks += step.trials - 1;
        state.k += 1;

        if cfg.stopping && step_norm < cfg.eps && step.mu < cfg.eps {
            status = RunStatus::Converged;
            break;
        }
    }

    Ok(RunResult {
        final_f: p.eval_true(&state.x)?,
        final_x: state.x,
        iterations: state.k,
        fevals: ev.fevals(),
        backtracks: state.backtracks,
        status,
        trace,
        bound_warnings,
        inexact_subproblems,
    })
}
