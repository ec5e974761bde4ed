//! The per-iteration min-max subproblem
//!
//! ```text
//! min_z φ(z) = max_i [⟨∇f̃_i(y), z − y⟩ + g(z) + f̃_i(y) − F̃_i(x)] + (ℓ/2)‖z − y‖²
//! ```
//!
//! solved through its concave dual over the unit simplex. For fixed weights
//! `λ` the inner minimisation is a single proximal step of `g`, so the dual
//! is maximised by projected gradient ascent on `λ` alone.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{check_dim, check_positive, Error, Result};
use crate::problems::{Evaluator, GKind, SmoothEval};
use crate::vector;

/// Linearisation data defining one subproblem.
#[derive(Debug, Clone, PartialEq)]
pub struct SubproblemInput {
    /// Expansion point `y`.
    pub y: Vec<f64>,
    /// `f̃_i(y, μ)`.
    pub fy: Vec<f64>,
    /// Rows `∇f̃_i(y, μ)`.
    pub grads: Vec<Vec<f64>>,
    /// `F̃_i(x, μ)` at the reference point `x`.
    pub offsets: Vec<f64>,
    /// Proximal weight `ℓ = L / μ`.
    pub ell: f64,
    pub g: GKind,
}

impl SubproblemInput {
    pub fn new(
        y: Vec<f64>,
        at_y: SmoothEval,
        offsets: Vec<f64>,
        ell: f64,
        g: GKind,
    ) -> Result<Self> {
        check_positive("ell", ell)?;
        let m = at_y.values.len();
        if m == 0 {
            return Err(Error::Empty("objectives"));
        }
        check_dim(m, at_y.jacobian.len())?;
        check_dim(m, offsets.len())?;
        for row in &at_y.jacobian {
            check_dim(y.len(), row.len())?;
        }
        Ok(Self {
            y,
            fy: at_y.values,
            grads: at_y.jacobian,
            offsets,
            ell,
            g,
        })
    }

    /// Evaluates the problem at `y` and `x` (two counted evaluations).
    pub fn from_problem(
        ev: &mut Evaluator<'_>,
        x: &[f64],
        y: &[f64],
        mu: f64,
        ell: f64,
    ) -> Result<Self> {
        let at_y = ev.eval_smooth(y, mu)?;
        let at_x = ev.eval_smooth(x, mu)?;
        let gx = ev.problem().g_kind().value(x);
        let offsets = at_x.values.iter().map(|v| v + gx).collect();
        Self::new(y.to_vec(), at_y, offsets, ell, ev.problem().g_kind())
    }

    pub fn m(&self) -> usize {
        self.fy.len()
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    /// The pieces `⟨∇f̃_i(y), z − y⟩ + f̃_i(y) − F̃_i(x)` of the max (without `g`).
    pub fn linear_parts(&self, z: &[f64]) -> Vec<f64> {
        let step = vector::sub(z, &self.y);
        self.grads
            .iter()
            .zip(self.fy.iter().zip(&self.offsets))
            .map(|(gr, (f, off))| vector::dot(gr, &step) + f - off)
            .collect()
    }

    /// Subproblem objective `φ_ℓ(z)`.
    pub fn primal_value(&self, z: &[f64]) -> f64 {
        let d = vector::dist(z, &self.y);
        vector::max(&self.linear_parts(z)) + self.g.value(z) + 0.5 * self.ell * d * d
    }

    /// Lagrangian of `φ_ℓ` for weights `λ`.
    pub fn lagrangian(&self, lambda: &[f64], z: &[f64]) -> f64 {
        let d = vector::dist(z, &self.y);
        vector::dot(lambda, &self.linear_parts(z)) + self.g.value(z) + 0.5 * self.ell * d * d
    }

    fn inner_unchecked(&self, lambda: &[f64]) -> (Vec<f64>, f64) {
        let mut v = self.y.clone();
        for (l, gr) in lambda.iter().zip(&self.grads) {
            vector::axpy(-l / self.ell, gr, &mut v);
        }
        let z = self.g.prox(&v, 1.0 / self.ell);
        let value = self.lagrangian(lambda, &z);
        (z, value)
    }
}

/// Result of [`solve_subproblem`].
#[derive(Debug, Clone, PartialEq)]
pub struct SubproblemSolution {
    /// Minimiser `p_ℓ(x, y, μ)`.
    pub z: Vec<f64>,
    pub lambda: Vec<f64>,
    /// `θ_ℓ = φ_ℓ(z)`.
    pub theta: f64,
    pub dual_value: f64,
    /// `θ − dual_value`.
    pub gap: f64,
    pub kkt_residual: f64,
    pub inner_iterations: usize,
    pub converged: bool,
}

/// `argmin_z τ g(z) + ½‖z − v‖²`.
pub fn prox_g(v: &[f64], tau: f64, g: GKind) -> Vec<f64> {
    debug_assert!(tau > 0.0);
    g.prox(v, tau)
}

/// Euclidean projection onto `{λ ≥ 0, Σλ = 1}` (sort and threshold).
pub fn project_simplex(w: &[f64]) -> Vec<f64> {
    let mut sorted = w.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut shift = 0.0;
    for (i, u) in sorted.iter().enumerate() {
        cumulative += u;
        let candidate = (cumulative - 1.0) / (i + 1) as f64;
        if u - candidate > 0.0 {
            shift = candidate;
        }
    }
    w.iter().map(|v| f64::max(v - shift, 0.0)).collect()
}

fn check_simplex(lambda: &[f64]) -> Result<()> {
    let sum: f64 = lambda.iter().sum();
    let min = vector::min(lambda);
    if (sum - 1.0).abs() > 1e-8 || min < -1e-8 {
        return Err(Error::OffSimplex { sum, min });
    }
    Ok(())
}

/// Inner minimiser `z(λ)` of the λ-weighted Lagrangian and the dual value there.
pub fn dual_inner(lambda: &[f64], input: &SubproblemInput) -> Result<(Vec<f64>, f64)> {
    check_dim(input.m(), lambda.len())?;
    check_simplex(lambda)?;
    Ok(input.inner_unchecked(lambda))
}

/// Dual projected gradient ascent from the barycentre of the simplex.
///
/// Stops once `φ_ℓ(z(λ)) − D(λ) ≤ tol` or after `max_inner` ascent steps; in
/// the latter case the iterate with the smallest gap is returned with
/// `converged = false`.
pub fn solve_subproblem(input: &SubproblemInput, tol: f64, max_inner: usize) -> SubproblemSolution {
    let m = input.m();
    let start = vec![1.0 / m as f64; m];
    solve_from(input, start, tol, max_inner)
}

/// Same as [`solve_subproblem`] with an explicit starting `λ`.
pub fn solve_subproblem_from(
    input: &SubproblemInput,
    lambda0: &[f64],
    tol: f64,
    max_inner: usize,
) -> Result<SubproblemSolution> {
    check_dim(input.m(), lambda0.len())?;
    Ok(solve_from(input, project_simplex(lambda0), tol, max_inner))
}

fn solve_from(
    input: &SubproblemInput,
    mut lambda: Vec<f64>,
    tol: f64,
    max_inner: usize,
) -> SubproblemSolution {
    if input.m() == 2 {
        return solve_pair(input, lambda[0], tol, max_inner);
    }
    let frob: f64 = input.grads.iter().map(|r| vector::dot(r, r)).sum();
    let mut step = input.ell / f64::max(frob, 1e-300);
    let (mut z, mut dual) = input.inner_unchecked(&lambda);
    let mut best: Option<SubproblemSolution> = None;
    let mut iterations = 0;

    loop {
        let parts = input.linear_parts(&z);
        let d = vector::dist(&z, &input.y);
        let primal = vector::max(&parts) + input.g.value(&z) + 0.5 * input.ell * d * d;
        let gap = primal - dual;
        if best.as_ref().is_none_or(|b| gap < b.gap) {
            best = Some(SubproblemSolution {
                z: z.clone(),
                lambda: lambda.clone(),
                theta: primal,
                dual_value: dual,
                gap,
                kkt_residual: 0.0,
                inner_iterations: iterations,
                converged: gap <= tol,
            });
        }
        if gap <= tol || iterations >= max_inner {
            break;
        }
        iterations += 1;

        // ascent along ∇D(λ) = parts, backtracking on the concave quadratic model
        let mut moved = false;
        for _ in 0..100 {
            let trial: Vec<f64> = lambda
                .iter()
                .zip(&parts)
                .map(|(l, a)| l + step * a)
                .collect();
            let cand = project_simplex(&trial);
            let diff = vector::sub(&cand, &lambda);
            let dn = vector::norm(&diff);
            if dn <= 1e-16 {
                break;
            }
            let (zc, dc) = input.inner_unchecked(&cand);
            let model = dual + vector::dot(&parts, &diff) - dn * dn / (2.0 * step);
            if dc >= model - 1e-15 * f64::max(1.0, dual.abs()) {
                lambda = cand;
                z = zc;
                dual = dc;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if !moved {
            break;
        }
        step *= 2.0;
    }

    let mut sol = best.expect("at least one iterate");
    sol.inner_iterations = iterations;
    sol.kkt_residual = kkt_residual(&sol, input).stationarity;
    sol
}

fn evaluate(
    input: &SubproblemInput,
    lambda: Vec<f64>,
    tol: f64,
    iterations: usize,
) -> SubproblemSolution {
    let (z, dual) = input.inner_unchecked(&lambda);
    let theta = input.primal_value(&z);
    let gap = theta - dual;
    let mut sol = SubproblemSolution {
        z,
        lambda,
        theta,
        dual_value: dual,
        gap,
        kkt_residual: 0.0,
        inner_iterations: iterations,
        converged: gap <= tol,
    };
    sol.kkt_residual = kkt_residual(&sol, input).stationarity;
    sol
}

/// Two objectives: the dual is a concave function of `s = λ₁` on `[0, 1]`
/// whose derivative `a₁(z(s)) − a₂(z(s))` is monotone, so bisect on its sign.
/// Each halving counts as one inner iteration.
fn solve_pair(input: &SubproblemInput, s0: f64, tol: f64, max_inner: usize) -> SubproblemSolution {
    let slope = |s: f64| {
        let (z, _) = input.inner_unchecked(&[s, 1.0 - s]);
        let a = input.linear_parts(&z);
        a[0] - a[1]
    };
    let s0 = s0.clamp(0.0, 1.0);
    let first = evaluate(input, vec![s0, 1.0 - s0], tol, 0);
    if first.converged {
        return first;
    }
    if slope(1.0) >= 0.0 {
        return evaluate(input, vec![1.0, 0.0], tol, 1);
    }
    if slope(0.0) <= 0.0 {
        return evaluate(input, vec![0.0, 1.0], tol, 1);
    }
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    let mut best = first;
    let mut iterations = 0;
    while iterations < max_inner && hi - lo > f64::EPSILON {
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        let d = slope(mid);
        if d > 0.0 {
            lo = mid;
        } else if d < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            hi = mid;
        }
        let cand = evaluate(input, vec![mid, 1.0 - mid], tol, iterations);
        if cand.gap < best.gap {
            best = cand;
        }
        if best.converged {
            break;
        }
    }
    best.inner_iterations = iterations;
    best
}

/// Optimality certificate of a subproblem solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KktReport {
    /// `‖Σλ_i∇f̃_i(y) + ξ + ℓ(z − y)‖` with `ξ ∈ ∂g(z)` chosen to minimise it.
    pub stationarity: f64,
    /// Largest `λ_j` over objectives outside the active set (ties within 1e−8).
    pub complementarity: f64,
}

pub fn kkt_residual(sol: &SubproblemSolution, input: &SubproblemInput) -> KktReport {
    let n = input.n();
    let mut r: Vec<f64> = sol
        .z
        .iter()
        .zip(&input.y)
        .map(|(z, y)| input.ell * (z - y))
        .collect();
    for (l, gr) in sol.lambda.iter().zip(&input.grads) {
        vector::axpy(*l, gr, &mut r);
    }
    let c = input.g.l1_weight(n);
    let residual: Vec<f64> = r
        .iter()
        .zip(&sol.z)
        .map(|(ri, zi)| {
            let xi = if c == 0.0 {
                0.0
            } else if *zi != 0.0 {
                c * zi.signum()
            } else {
                (-ri).clamp(-c, c)
            };
            ri + xi
        })
        .collect();
    let parts = input.linear_parts(&sol.z);
    let top = vector::max(&parts);
    let complementarity = parts
        .iter()
        .zip(&sol.lambda)
        .filter(|(a, _)| **a < top - 1e-8)
        .map(|(_, l)| *l)
        .fold(0.0, f64::max);
    KktReport {
        stationarity: vector::norm(&residual),
        complementarity,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn input(grads: Vec<Vec<f64>>, y: Vec<f64>, ell: f64, g: GKind) -> SubproblemInput {
        let m = grads.len();
        SubproblemInput::new(
            y,
            SmoothEval {
                values: vec![0.0; m],
                jacobian: grads,
            },
            vec![0.0; m],
            ell,
            g,
        )
        .unwrap()
    }

    #[test]
    fn simplex_examples() {
        assert_eq!(project_simplex(&[0.6, 0.6]), vec![0.5, 0.5]);
        assert_eq!(project_simplex(&[2.0, 0.0, 0.0]), vec![1.0, 0.0, 0.0]);
        let third = 1.0 / 3.0;
        let p = project_simplex(&[third, third, third]);
        assert!(p.iter().all(|v| (v - third).abs() < 1e-15));
    }

    #[test]
    fn single_objective_is_gradient_step() {
        let inp = input(vec![vec![1.0, -2.0]], vec![0.5, 0.5], 4.0, GKind::Zero);
        let (z, _) = dual_inner(&[1.0], &inp).unwrap();
        assert_eq!(z, vec![0.25, 1.0]);
        let sol = solve_subproblem(&inp, 1e-10, 500);
        assert!(sol.converged && sol.gap.abs() <= 1e-14);
        assert!(sol.inner_iterations <= 1);
        assert_eq!(sol.z, z);
    }

    #[test]
    fn zero_gradients_keep_y() {
        let inp = input(vec![vec![0.0, 0.0]; 2], vec![1.0, -1.0], 3.0, GKind::Zero);
        let (z, value) = dual_inner(&[0.3, 0.7], &inp).unwrap();
        assert_eq!(z, vec![1.0, -1.0]);
        assert_eq!(value, 0.0);
    }

    #[test]
    fn off_simplex_is_rejected() {
        let inp = input(vec![vec![1.0], vec![2.0]], vec![0.0], 1.0, GKind::Zero);
        assert!(matches!(
            dual_inner(&[0.6, 0.6], &inp),
            Err(Error::OffSimplex { .. })
        ));
        assert!(matches!(
            dual_inner(&[1.1, -0.1], &inp),
            Err(Error::OffSimplex { .. })
        ));
        assert!(dual_inner(&[0.5 + 5e-9, 0.5], &inp).is_ok());
    }

    #[test]
    fn identical_objectives_split_evenly() {
        let g = vec![0.7, -1.3];
        let sym = input(
            vec![g.clone(), g.clone()],
            vec![0.2, 0.4],
            2.0,
            GKind::ScaledL1,
        );
        let one = input(vec![g], vec![0.2, 0.4], 2.0, GKind::ScaledL1);
        let a = solve_subproblem(&sym, 1e-10, 500);
        let b = solve_subproblem(&one, 1e-10, 500);
        assert!((a.lambda[0] - 0.5).abs() < 1e-12 && (a.lambda[1] - 0.5).abs() < 1e-12);
        assert!(vector::dist(&a.z, &b.z) < 1e-12);
    }

    #[test]
    fn kkt_of_exact_unconstrained_solution() {
        let inp = input(
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![0.0, 0.0],
            2.0,
            GKind::Zero,
        );
        let sol = solve_subproblem(&inp, 1e-12, 500);
        assert!(sol.converged, "{sol:?}");
        let k = kkt_residual(&sol, &inp);
        assert!(k.stationarity <= 1e-8);
        assert!(k.complementarity <= 1e-8);
        let mut bumped = sol.clone();
        bumped.z[0] += 0.1;
        let k2 = kkt_residual(&bumped, &inp);
        assert!((k2.stationarity - k.stationarity - 0.2).abs() < 1e-6);
    }

    #[test]
    fn theta_never_exceeds_value_at_y() {
        let inp = input(
            vec![vec![3.0, 1.0], vec![-2.0, 0.5]],
            vec![1.0, 1.0],
            0.7,
            GKind::ScaledL1,
        );
        let sol = solve_subproblem(&inp, 1e-10, 500);
        assert!(sol.theta <= inp.primal_value(&inp.y) + 1e-12);
        assert!(sol.gap >= -1e-12);
    }
}
