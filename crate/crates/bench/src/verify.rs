//! Self-checks behind `bench verify`: surrogate conformance, subproblem
//! accuracy against a brute-force grid, and the momentum recurrences.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sapgm_core::{
    compose_surrogate, kkt_residual, momentum_update, mu_schedule, registry, solve_subproblem,
    verify_surrogate, Domain, Expr, GKind, SmoothEval, SubproblemInput, VerifyReport,
};

/// Conformance of every atom and every benchmark surrogate in its box.
pub fn smoothing_reports(samples: usize, seed: u64) -> Vec<(String, VerifyReport)> {
    let cube = |n| Domain::cube(n, -3.0, 3.0).expect("valid cube");
    let atoms = [
        ("abs", Expr::var(1, 0).abs(), cube(1)),
        ("plus", Expr::var(1, 0).plus(), cube(1)),
        (
            "max2",
            Expr::max2(Expr::var(2, 0), Expr::var(2, 1)),
            cube(2),
        ),
        (
            "max-list",
            Expr::MaxList((0..3).map(|i| Expr::var(3, i)).collect()),
            cube(3),
        ),
    ];
    let mut out = Vec::new();
    for (name, e, d) in atoms {
        let s = compose_surrogate(e, &d).expect("atoms compose");
        out.push((
            format!("atom {name}"),
            verify_surrogate(&s, &d, samples, seed),
        ));
    }
    for p in registry() {
        let d = p.start_box();
        for (i, f) in p.objectives().iter().enumerate() {
            out.push((
                format!("{} f{}", p.name(), i + 1),
                verify_surrogate(f, &d, samples, seed),
            ));
        }
    }
    out
}

/// Random `n = 2`, `m = 2` subproblem; `g` alternates with the seed parity.
pub fn random_instance(seed: u64) -> SubproblemInput {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut u = |lo: f64, hi: f64| rng.gen_range(lo..hi);
    let y = vec![u(-1.0, 1.0), u(-1.0, 1.0)];
    let grads = vec![
        vec![u(-2.0, 2.0), u(-2.0, 2.0)],
        vec![u(-2.0, 2.0), u(-2.0, 2.0)],
    ];
    let values = vec![u(-1.0, 1.0), u(-1.0, 1.0)];
    let offsets = vec![u(-1.0, 1.0), u(-1.0, 1.0)];
    let ell = u(0.5, 4.0);
    let g = if seed.is_multiple_of(2) {
        GKind::ScaledL1
    } else {
        GKind::Zero
    };
    SubproblemInput::new(
        y,
        SmoothEval {
            values,
            jacobian: grads,
        },
        offsets,
        ell,
        g,
    )
    .expect("consistent instance")
}

/// Brute-force minimiser of a convex function of two variables: a
/// `cells × cells` grid over the box, then zooms of ±25 grid steps around the
/// best node until the spacing is below `resolution`.
pub fn grid_argmin(
    f: impl Fn(&[f64]) -> f64,
    lo: [f64; 2],
    hi: [f64; 2],
    cells: usize,
    resolution: f64,
) -> [f64; 2] {
    let (mut lo, mut hi) = (lo, hi);
    loop {
        let step = [
            (hi[0] - lo[0]) / (cells - 1) as f64,
            (hi[1] - lo[1]) / (cells - 1) as f64,
        ];
        let mut best = (f64::INFINITY, [0.0, 0.0]);
        for i in 0..cells {
            for j in 0..cells {
                let z = [lo[0] + i as f64 * step[0], lo[1] + j as f64 * step[1]];
                let v = f(&z);
                if v < best.0 {
                    best = (v, z);
                }
            }
        }
        if step[0].max(step[1]) < resolution {
            return best.1;
        }
        lo = [best.1[0] - 25.0 * step[0], best.1[1] - 25.0 * step[1]];
        hi = [best.1[0] + 25.0 * step[0], best.1[1] + 25.0 * step[1]];
    }
}

/// `ℓ‖z* − y‖ ≤ max_i ‖∇f̃_i(y)‖ + ‖ξ‖` for `ξ ∈ ∂g`, so this ball around `y`
/// holds the minimiser.
pub fn minimiser_radius(input: &SubproblemInput) -> f64 {
    let gmax = input
        .grads
        .iter()
        .map(|r| r.iter().map(|v| v * v).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    let xi = input.g.l1_weight(input.n()) * (input.n() as f64).sqrt();
    (gmax + xi) / input.ell + 1e-3
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SubproblemCheck {
    pub instances: usize,
    /// Largest sup-norm distance to the grid minimiser.
    pub max_oracle_distance: f64,
    pub max_gap: f64,
    pub max_kkt: f64,
    pub max_complementarity: f64,
    pub unconverged: usize,
}

pub fn subproblem_check(instances: usize, base_seed: u64) -> SubproblemCheck {
    let mut c = SubproblemCheck {
        instances,
        ..Default::default()
    };
    for seed in base_seed..base_seed + instances as u64 {
        let input = random_instance(seed);
        let sol = solve_subproblem(&input, 1e-10, 500);
        let r = minimiser_radius(&input);
        let (y0, y1) = (input.y[0], input.y[1]);
        let z = grid_argmin(
            |z| input.primal_value(z),
            [y0 - r, y1 - r],
            [y0 + r, y1 + r],
            400,
            1e-6,
        );
        let d = sol
            .z
            .iter()
            .zip(&z)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let kkt = kkt_residual(&sol, &input);
        c.max_oracle_distance = c.max_oracle_distance.max(d);
        c.max_gap = c.max_gap.max(sol.gap);
        c.max_kkt = c.max_kkt.max(kkt.stationarity);
        c.max_complementarity = c.max_complementarity.max(kkt.complementarity);
        c.unconverged += !sol.converged as usize;
    }
    c
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MomentumCheck {
    pub sigma: f64,
    pub steps: usize,
    /// Largest relative defect of `μ_{k+1}/L_{k+1}·t_{k+1}(t_{k+1} − 1) = μ_k/L_k·t_k²`.
    pub max_identity_error: f64,
    pub max_theta_sq: f64,
    /// Largest `t_{k+1}√(μ_{k+1}/L_{k+1}) − 4√(μ0/L0)/(2 − σ)·(k + 2)^{1−σ/2}`.
    pub max_growth_excess: f64,
}

impl MomentumCheck {
    pub fn passes(&self) -> bool {
        self.max_identity_error <= 1e-10 && self.max_theta_sq < 1.0 && self.max_growth_excess <= 0.0
    }
}

/// Chains `steps` momentum updates with `μ_k = 1/(k+1)^σ`, `L0 = 1`, `η = 2`.
/// Each `L_{k+1}/L_k` is log-uniform on `[√(μ_{k+1}/μ_k), η]` (mild decreases
/// included) and `L` stays within `[L0, L0·η⁸]`.
pub fn momentum_check(sigma: f64, steps: usize, seed: u64) -> MomentumCheck {
    let (mu0, l0, eta): (f64, f64, f64) = (1.0, 1.0, 2.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut t, mut l, mut mu) = (1.0, l0, mu0);
    let mut c = MomentumCheck {
        sigma,
        steps,
        max_growth_excess: f64::NEG_INFINITY,
        ..Default::default()
    };
    let scale = 4.0 * (mu0 / l0).sqrt() / (2.0 - sigma);
    for k in 0..steps {
        let mu_next = mu_schedule(k, mu0, sigma);
        let (mut lo, mut hi) = (0.5 * (mu_next / mu).ln(), eta.ln());
        if l * hi.exp() > l0 * eta.powi(8) {
            hi = 0.0;
        } else if l * lo.exp() < l0 {
            lo = 0.0;
        }
        let l_next = l * rng.gen_range(lo..=hi).exp();
        let (t_next, theta) = momentum_update(t, mu, mu_next, l, l_next);
        let lhs = mu_next / l_next * t_next * (t_next - 1.0);
        let rhs = mu / l * t * t;
        c.max_identity_error = c.max_identity_error.max(((lhs - rhs) / rhs).abs());
        c.max_theta_sq = c.max_theta_sq.max(theta * theta);
        let bound = scale * ((k + 2) as f64).powf(1.0 - sigma / 2.0);
        c.max_growth_excess = c
            .max_growth_excess
            .max(t_next * (mu_next / l_next).sqrt() - bound);
        t = t_next;
        l = l_next;
        mu = mu_next;
    }
    c
}

/// Everything `bench verify` prints.
#[derive(Debug, Clone)]
pub struct VerifyOutcome {
    pub smoothing: Vec<(String, VerifyReport)>,
    pub subproblem: SubproblemCheck,
    pub momentum: Vec<MomentumCheck>,
}

impl VerifyOutcome {
    pub fn passes(&self) -> bool {
        self.smoothing.iter().all(|(_, r)| r.passes())
            && self.subproblem.max_oracle_distance <= 1e-3
            && self.subproblem.max_gap <= 1e-8
            && self.subproblem.max_kkt <= 1e-6
            && self.momentum.iter().all(MomentumCheck::passes)
    }
}

pub fn run_verify(samples: usize, seed: u64) -> VerifyOutcome {
    VerifyOutcome {
        smoothing: smoothing_reports(samples, seed),
        subproblem: subproblem_check(100, seed),
        momentum: [0.5, 1.0, 1.5, 1.9]
            .iter()
            .map(|&s| momentum_check(s, 10_000, seed))
            .collect(),
    }
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "FAIL"
    }
}

impl fmt::Display for VerifyOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "smoothing ({} samples each, mu in {{1, 0.1, 0.01}})",
            self.smoothing.first().map_or(0, |r| r.1.samples)
        )?;
        for (name, r) in &self.smoothing {
            writeln!(
                f,
                "  {:<14} kappa {:.1e}  monotone {:.1e}  convexity {:.1e}  fd {:.1e}  lip-ratio {:.3}  {}",
                name,
                r.max_kappa_violation,
                r.max_mu_monotone_violation,
                r.max_convexity_violation,
                r.max_fd_rel_error,
                r.max_lipschitz_ratio,
                verdict(r.passes())
            )?;
        }
        let s = &self.subproblem;
        writeln!(
            f,
            "subproblem ({} random instances vs grid)\n  distance {:.1e}  gap {:.1e}  kkt {:.1e}  complementarity {:.1e}  unconverged {}  {}",
            s.instances,
            s.max_oracle_distance,
            s.max_gap,
            s.max_kkt,
            s.max_complementarity,
            s.unconverged,
            verdict(s.max_oracle_distance <= 1e-3 && s.max_gap <= 1e-8 && s.max_kkt <= 1e-6)
        )?;
        writeln!(f, "momentum")?;
        for m in &self.momentum {
            writeln!(
                f,
                "  sigma {:<4} steps {}  identity {:.1e}  max theta^2 {:.6}  growth excess {:.3e}  {}",
                m.sigma,
                m.steps,
                m.max_identity_error,
                m.max_theta_sq,
                m.max_growth_excess,
                verdict(m.passes())
            )?;
        }
        write!(f, "overall: {}", verdict(self.passes()))
    }
}
