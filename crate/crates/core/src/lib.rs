//! Smoothing accelerated proximal gradient method (SAPGM) for composite
//! nonsmooth multiobjective problems
//!
//! ```text
//! min_x  (F_1(x), ..., F_m(x)),   F_i(x) = f_i(x) + g(x)
//! ```
//!
//! where every `f_i` is convex but possibly nonsmooth and `g` is a shared
//! proximable term. Each `f_i` is replaced by a smoothing `f̃_i(·, μ)` whose
//! gradient is Lipschitz with constant `L/μ`; the driver shrinks `μ` on a
//! fixed schedule, estimates the local Lipschitz constant by backtracking and
//! applies Nesterov-style extrapolation.
//!
//! The crate is `no_std` (it needs `alloc`). IO, timing and the benchmark CLI
//! live in the `sapgm-bench` crate.
#![no_std]
// `!(a < b)` deliberately treats NaN as a violation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod error;
pub mod metrics;
pub mod problems;
pub mod smoothing;
pub mod solver;
pub mod subproblem;
pub mod vector;

pub use error::{Error, Result};
pub use metrics::{
    fit_rate, merit_u0_approx, nondominated_filter, w_k_diagnostic, FrontPoint, RateFit,
};
pub use problems::{registry, Evaluator, GKind, Problem, SmoothEval};
pub use smoothing::{
    compose_surrogate, smooth_abs, smooth_max2, smooth_max_list, smooth_plus, verify_surrogate,
    Domain, Expr, SmoothSurrogate, SmoothingConstants, VerifyReport,
};
pub use solver::{
    backtrack_step, momentum_update, mu_schedule, solve, solve_baseline, BacktrackRule,
    IterateState, RunResult, RunStatus, SolverConfig, TraceRecord,
};
pub use subproblem::{
    dual_inner, kkt_residual, project_simplex, prox_g, solve_subproblem, KktReport,
    SubproblemInput, SubproblemSolution,
};
