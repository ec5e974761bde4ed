//! Benchmark instances: two-objective, two-variable composite problems with
//! the shared nonsmooth term `g(x) = (1/n)‖x‖₁`.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_dim, check_positive, Error, Result};
use crate::smoothing::{compose_surrogate, Domain, Expr, SmoothSurrogate};
use crate::vector;

/// The nonsmooth term `g` shared by every objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GKind {
    /// `g(x) = (1/n)‖x‖₁`
    ScaledL1,
    Zero,
}

impl GKind {
    pub fn value(self, x: &[f64]) -> f64 {
        match self {
            GKind::ScaledL1 => vector::norm1(x) / x.len() as f64,
            GKind::Zero => 0.0,
        }
    }

    /// `argmin_z τ g(z) + ½‖z − v‖²`.
    pub fn prox(self, v: &[f64], tau: f64) -> Vec<f64> {
        match self {
            GKind::ScaledL1 => {
                let t = tau / v.len() as f64;
                v.iter()
                    .map(|vi| vi.signum() * f64::max(vi.abs() - t, 0.0))
                    .collect()
            }
            GKind::Zero => v.to_vec(),
        }
    }

    /// Per-coordinate weight of the ℓ1 term (0 for `Zero`).
    pub fn l1_weight(self, n: usize) -> f64 {
        match self {
            GKind::ScaledL1 => 1.0 / n as f64,
            GKind::Zero => 0.0,
        }
    }
}

/// Smoothed values and Jacobian of all objectives at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothEval {
    pub values: Vec<f64>,
    /// Row `i` is `∇f̃_i`.
    pub jacobian: Vec<Vec<f64>>,
}

/// A named multiobjective instance `F_i = f_i + g`.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    name: String,
    index: usize,
    objectives: Vec<SmoothSurrogate>,
    g: GKind,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Problem {
    /// `g_kinds` has one entry per objective; they must all agree.
    pub fn new(
        name: &str,
        index: usize,
        objectives: Vec<SmoothSurrogate>,
        g_kinds: &[GKind],
        lower: Vec<f64>,
        upper: Vec<f64>,
    ) -> Result<Self> {
        if objectives.len() < 2 {
            return Err(Error::InvalidParameter {
                name: "objective count",
                value: objectives.len() as f64,
            });
        }
        check_dim(objectives.len(), g_kinds.len())?;
        if g_kinds.iter().any(|g| *g != g_kinds[0]) {
            return Err(Error::DistinctNonsmoothTerms);
        }
        let n = lower.len();
        check_dim(n, upper.len())?;
        if let Some((l, u)) = lower.iter().zip(&upper).find(|(l, u)| !(l < u)) {
            return Err(Error::InvalidParameter {
                name: "start box width",
                value: u - l,
            });
        }
        for obj in &objectives {
            check_dim(n, obj.dim())?;
        }
        Ok(Self {
            name: name.to_string(),
            index,
            objectives,
            g: g_kinds[0],
            lower,
            upper,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Name usable in file names (`&` becomes `_`).
    pub fn slug(&self) -> String {
        self.name.replace('&', "_")
    }

    /// 1-based position in [`registry`].
    pub fn index(&self) -> usize {
        self.index
    }

    pub fn n(&self) -> usize {
        self.lower.len()
    }

    pub fn m(&self) -> usize {
        self.objectives.len()
    }

    pub fn g_kind(&self) -> GKind {
        self.g
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn objectives(&self) -> &[SmoothSurrogate] {
        &self.objectives
    }

    pub fn start_box(&self) -> Domain {
        Domain {
            lower: self.lower.clone(),
            upper: self.upper.clone(),
        }
    }

    /// Largest κ over the objectives.
    pub fn kappa_max(&self) -> f64 {
        self.objectives
            .iter()
            .map(|o| o.constants().kappa)
            .fold(0.0, f64::max)
    }

    /// Largest Lipschitz factor over the objectives.
    pub fn lip_max(&self) -> f64 {
        self.objectives
            .iter()
            .map(|o| o.constants().lip_factor)
            .fold(0.0, f64::max)
    }

    /// Exact objective vector `(F_1(x), …, F_m(x))`.
    pub fn eval_true(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.n(), x.len())?;
        let g = self.g.value(x);
        Ok(self
            .objectives
            .iter()
            .map(|o| o.expr().eval_true(x) + g)
            .collect())
    }

    pub fn eval_g(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.n(), x.len())?;
        Ok(self.g.value(x))
    }

    /// Smooth parts only (`g` excluded). Not counted; see [`Evaluator`].
    pub fn eval_smooth(&self, x: &[f64], mu: f64) -> Result<SmoothEval> {
        check_dim(self.n(), x.len())?;
        check_positive("mu", mu)?;
        let mut jacobian = vec![vec![0.0; self.n()]; self.m()];
        let values = self
            .objectives
            .iter()
            .zip(jacobian.iter_mut())
            .map(|(o, row)| o.eval_into(x, mu, row))
            .collect();
        Ok(SmoothEval { values, jacobian })
    }

    /// `F̃_i(x, μ) = f̃_i(x, μ) + g(x)`, uncounted.
    pub fn eval_smoothed_total(&self, x: &[f64], mu: f64) -> Result<Vec<f64>> {
        let g = self.eval_g(x)?;
        Ok(self
            .eval_smooth(x, mu)?
            .values
            .into_iter()
            .map(|v| v + g)
            .collect())
    }

    /// Uniform draw from the start box, deterministic in `seed`.
    pub fn sample_start(&self, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| rng.gen_range(*l..*u))
            .collect()
    }
}

/// Borrowed problem plus a per-run count of smooth evaluations.
#[derive(Debug)]
pub struct Evaluator<'p> {
    problem: &'p Problem,
    fevals: usize,
}

impl<'p> Evaluator<'p> {
    pub fn new(problem: &'p Problem) -> Self {
        Self { problem, fevals: 0 }
    }

    pub fn problem(&self) -> &'p Problem {
        self.problem
    }

    pub fn fevals(&self) -> usize {
        self.fevals
    }

    /// Values and Jacobian of the smooth parts; one counted evaluation.
    pub fn eval_smooth(&mut self, x: &[f64], mu: f64) -> Result<SmoothEval> {
        let out = self.problem.eval_smooth(x, mu)?;
        self.fevals += 1;
        Ok(out)
    }
}

/// Extra margin (in box widths) around the start box on which the
/// Lipschitz factors are certified.
const LIP_MARGIN: f64 = 1.0;

fn sq(e: Expr) -> Expr {
    e.square()
}

fn aff(c: [f64; 2], k: f64) -> Expr {
    Expr::affine(c.to_vec(), k)
}

fn x1() -> Expr {
    Expr::var(2, 0)
}

fn x2() -> Expr {
    Expr::var(2, 1)
}

/// `x1² + x2² − 1`
fn circle() -> Expr {
    Expr::Sum(vec![sq(x1()), sq(x2()), Expr::constant(2, -1.0)])
}

fn cb3() -> Expr {
    Expr::MaxList(vec![
        Expr::Sum(vec![x1().quartic(), sq(x2())]),
        Expr::Sum(vec![sq(aff([-1.0, 0.0], 2.0)), sq(aff([0.0, -1.0], 2.0))]),
        aff([-1.0, 1.0], 0.0).exp().scale(2.0),
    ])
}

fn build(name: &str, index: usize, f: [Expr; 2], lower: [f64; 2], upper: [f64; 2]) -> Problem {
    let start = Domain {
        lower: lower.to_vec(),
        upper: upper.to_vec(),
    };
    let certified = start.widened(LIP_MARGIN);
    let objectives = f
        .into_iter()
        .map(|e| compose_surrogate(e, &certified).expect("registry expressions are well-formed"))
        .collect();
    Problem::new(
        name,
        index,
        objectives,
        &[GKind::ScaledL1, GKind::ScaledL1],
        lower.to_vec(),
        upper.to_vec(),
    )
    .expect("registry problems are well-formed")
}

/// The six benchmark problems, in index order.
pub fn registry() -> Vec<Problem> {
    vec![
        build(
            "BK1",
            1,
            [
                Expr::Sum(vec![sq(x1()), sq(x2())]),
                Expr::Sum(vec![sq(aff([1.0, 0.0], -5.0)), sq(aff([0.0, 1.0], -5.0))]),
            ],
            [-5.0, -5.0],
            [10.0, 10.0],
        ),
        build(
            "CB3&LQ",
            2,
            [
                cb3(),
                Expr::max2(
                    aff([-1.0, -1.0], 0.0),
                    Expr::Sum(vec![aff([-1.0, -1.0], -1.0), sq(x1()), sq(x2())]),
                ),
            ],
            [1.5, 1.5],
            [2.0, 2.0],
        ),
        build(
            "CB3&MF1",
            3,
            [
                cb3(),
                Expr::Sum(vec![aff([-1.0, 0.0], 0.0), circle().plus().scale(20.0)]),
            ],
            [0.0, 0.0],
            [1.0, 1.0],
        ),
        build(
            "CR&MF2",
            4,
            [
                Expr::max2(
                    Expr::Sum(vec![
                        sq(x1()),
                        sq(aff([0.0, 1.0], -1.0)),
                        aff([0.0, 1.0], -1.0),
                    ]),
                    Expr::Sum(vec![
                        sq(x1()).scale(-1.0),
                        sq(aff([0.0, 1.0], -1.0)).scale(-1.0),
                        aff([0.0, 1.0], 1.0),
                    ]),
                ),
                Expr::Sum(vec![
                    aff([-1.0, 0.0], 0.0),
                    circle().scale(2.0),
                    circle().abs().scale(1.75),
                ]),
            ],
            [1.5, 1.5],
            [2.0, 2.0],
        ),
        build(
            "JOS1",
            5,
            [
                Expr::Sum(vec![sq(x1()), sq(x2())]).scale(0.5),
                Expr::Sum(vec![sq(aff([1.0, 0.0], -2.0)), sq(aff([0.0, 1.0], -2.0))]).scale(0.5),
            ],
            [-5.0, -5.0],
            [5.0, 5.0],
        ),
        build(
            "SP1",
            6,
            [
                Expr::Sum(vec![sq(aff([1.0, 0.0], -1.0)), sq(aff([1.0, -1.0], 0.0))]),
                Expr::Sum(vec![sq(aff([0.0, 1.0], -3.0)), sq(aff([1.0, -1.0], 0.0))]),
            ],
            [2.0, -2.0],
            [3.0, 3.0],
        ),
    ]
}

/// Resolves a problem by name (case-insensitive; `_` accepted for `&`) or
/// by its 1-based index.
pub fn find(key: &str) -> Result<Problem> {
    let key = key.trim();
    let all = registry();
    if let Ok(idx) = key.parse::<usize>() {
        return all
            .into_iter()
            .find(|p| p.index() == idx)
            .ok_or_else(|| Error::UnknownProblem(key.to_string()));
    }
    let wanted = key.to_ascii_uppercase().replace('_', "&");
    all.into_iter()
        .find(|p| p.name() == wanted)
        .ok_or_else(|| Error::UnknownProblem(key.to_string()))
}
