use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sapgm_core::problems::{find, Evaluator};
use sapgm_core::solver::sufficient_decrease;
use sapgm_core::{
    backtrack_step, compose_surrogate, momentum_update, mu_schedule, registry, solve,
    solve_baseline, Domain, Expr, GKind, IterateState, Problem, RunStatus, SolverConfig,
};

fn quadratic_pair(h: f64, g: GKind) -> Problem {
    // f(x) = (h/2)(x − 1)², duplicated
    let d = Domain::cube(1, -4.0, 4.0).unwrap();
    let f =
        || compose_surrogate(Expr::affine(vec![1.0], -1.0).square().scale(h / 2.0), &d).unwrap();
    Problem::new("quad", 0, vec![f(), f()], &[g, g], vec![-4.0], vec![4.0]).unwrap()
}

fn strongly_convex_pair() -> Problem {
    let d = Domain::cube(2, -5.0, 5.0).unwrap();
    let f1 = Expr::Sum(vec![
        Expr::affine(vec![1.0, 0.0], -1.0).square().scale(4.0),
        Expr::var(2, 1).square().scale(0.05),
    ]);
    let f2 = Expr::Sum(vec![
        Expr::var(2, 0).square().scale(4.0),
        Expr::affine(vec![0.0, 1.0], -1.0).square().scale(0.05),
    ]);
    Problem::new(
        "ill-conditioned",
        0,
        vec![
            compose_surrogate(f1, &d).unwrap(),
            compose_surrogate(f2, &d).unwrap(),
        ],
        &[GKind::Zero, GKind::Zero],
        vec![-5.0, -5.0],
        vec![5.0, 5.0],
    )
    .unwrap()
}

/// Distance to the Pareto set `{(w, 1 − w) : w ∈ [0, 1]}` of [`strongly_convex_pair`].
fn pareto_distance(x: &[f64]) -> f64 {
    let w = ((x[0] - x[1] + 1.0) / 2.0).clamp(0.0, 1.0);
    ((x[0] - w).powi(2) + (x[1] - 1.0 + w).powi(2)).sqrt()
}

/// Chains `steps` momentum updates with random accepted constants kept in
/// `[L0, L0·η⁸]`; each log-ratio is drawn from `[½ ln(μ_{k+1}/μ_k), ln η]`.
fn momentum_chain(sigma: f64, steps: usize, seed: u64) -> Vec<(f64, f64, f64, f64)> {
    let (mu0, l0, eta) = (1.0, 1.0, 2.0_f64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut t, mut l) = (1.0, l0);
    let mut mu = mu0;
    let mut out = Vec::with_capacity(steps);
    for k in 0..steps {
        let mu_next = mu_schedule(k, mu0, sigma);
        let lo = 0.5 * (mu_next / mu).ln();
        let hi = eta.ln();
        let (lo, hi) = if l * hi.exp() > l0 * eta.powi(8) {
            (lo, 0.0)
        } else if l * lo.exp() < l0 {
            (0.0, hi)
        } else {
            (lo, hi)
        };
        let l_next = l * rng.gen_range(lo..=hi).exp();
        let (t_next, theta) = momentum_update(t, mu, mu_next, l, l_next);
        let lhs = mu_next / l_next * t_next * (t_next - 1.0);
        let rhs = mu / l * t * t;
        let bound =
            4.0 * (mu0 / l0).sqrt() / (2.0 - sigma) * ((k + 2) as f64).powf(1.0 - sigma / 2.0);
        out.push((
            ((lhs - rhs) / rhs).abs(),
            theta,
            t_next * (mu_next / l_next).sqrt() - bound,
            l_next,
        ));
        t = t_next;
        l = l_next;
        mu = mu_next;
    }
    out
}

#[test]
fn momentum_identities_over_long_chains() {
    for (i, sigma) in [0.5, 1.0, 1.5, 1.9].into_iter().enumerate() {
        for (k, (rel, theta, excess, l)) in momentum_chain(sigma, 10_000, i as u64)
            .into_iter()
            .enumerate()
        {
            assert!(rel <= 1e-10, "σ={sigma} k={k}: {rel}");
            assert!((0.0..1.0).contains(&theta), "σ={sigma} k={k}: θ={theta}");
            assert!(excess <= 0.0, "σ={sigma} k={k}: {excess}");
            assert!((1.0..=256.0).contains(&l));
        }
    }
}

#[test]
fn mu_schedule_is_strictly_decreasing() {
    for sigma in [0.5, 1.0, 1.9] {
        for k in 1..500 {
            assert!(mu_schedule(k, 1.0, sigma) < mu_schedule(k - 1, 1.0, sigma));
        }
    }
}

#[test]
fn backtracking_reaches_the_hessian() {
    let p = quadratic_pair(8.0, GKind::Zero);
    let cfg = SolverConfig::default();
    let state = IterateState::initial(&[3.0], &cfg);
    let mut ev = Evaluator::new(&p);
    let out = backtrack_step(&state, &mut ev, &cfg).unwrap();
    // μ₁ = 1, so ℓ goes 1, 2, 4, 8
    assert_eq!(out.trials, 4);
    assert_eq!(out.l_accepted, 8.0);
    assert!(sufficient_decrease(
        cfg.backtrack_rule,
        &out.f_next,
        &out.input,
        &out.x_next,
        out.l_accepted / out.mu
    ));

    let easy = quadratic_pair(0.5, GKind::Zero);
    let mut ev = Evaluator::new(&easy);
    let out = backtrack_step(&state, &mut ev, &cfg).unwrap();
    assert_eq!(out.trials, 1);
}

#[test]
fn accepted_steps_replay_the_decrease_test() {
    let cfg = SolverConfig::default();
    for p in registry() {
        let mut state = IterateState::initial(&p.sample_start(3), &cfg);
        let mut ev = Evaluator::new(&p);
        for _ in 0..10 {
            let out = backtrack_step(&state, &mut ev, &cfg).unwrap();
            let ell = out.l_accepted / out.mu;
            let f_next = p.eval_smooth(&out.x_next, out.mu).unwrap().values;
            assert!(sufficient_decrease(
                cfg.backtrack_rule,
                &f_next,
                &out.input,
                &out.x_next,
                ell
            ));
            state.y = out.x_next.clone();
            state.x = out.x_next;
            state.mu = out.mu;
            state.l = out.l_accepted;
            state.k += 1;
        }
    }
}

#[test]
fn minimiser_is_a_fixed_point() {
    let p = quadratic_pair(1.0, GKind::Zero);
    let r = solve(&p, &[1.0], &SolverConfig::default()).unwrap();
    assert_eq!(r.status, RunStatus::Converged);
    assert!((r.final_x[0] - 1.0).abs() < 1e-12);
    // the first k with μ_{k+1} < 1e-3 at σ = 1.9
    assert_eq!(r.iterations, 38);
}

#[test]
fn jos1_median_iterations() {
    let p = find("JOS1").unwrap();
    let cfg = SolverConfig::default();
    let mut iters: Vec<usize> = (0..200)
        .map(|s| solve(&p, &p.sample_start(s), &cfg).unwrap().iterations)
        .collect();
    iters.sort_unstable();
    let median = iters[100];
    assert!((10..=100).contains(&median), "{median}");
}

#[test]
fn trace_bookkeeping() {
    let p = find("CB3&LQ").unwrap();
    let cfg = SolverConfig {
        record_trace: true,
        ..Default::default()
    };
    let x0 = p.sample_start(5);
    let acc = solve(&p, &x0, &cfg).unwrap();
    let base = solve_baseline(&p, &x0, &cfg).unwrap();
    let (ta, tb) = (acc.trace.as_ref().unwrap(), base.trace.as_ref().unwrap());
    assert_eq!(ta.len(), acc.iterations);
    assert_eq!(tb.len(), base.iterations);
    assert!(tb.iter().all(|r| r.theta == 0.0));
    assert_eq!(ta[0].x, tb[0].x);
    assert_eq!(ta[0].theta, 0.0);
    assert!(ta.iter().map(|r| r.k).eq(1..=acc.iterations));
    assert!(solve(&p, &[1.0], &cfg).is_err());
    assert!(solve(
        &p,
        &x0,
        &SolverConfig {
            sigma: 2.5,
            ..Default::default()
        }
    )
    .is_err());
}

#[test]
fn run_invariants_on_benchmarks() {
    let cfg = SolverConfig {
        record_trace: true,
        ..Default::default()
    };
    for p in registry() {
        let upper = cfg.eta * f64::max(cfg.l0, p.lip_max());
        for seed in 0..20 {
            let r = solve(&p, &p.sample_start(seed), &cfg).unwrap();
            assert!(r.iterations <= cfg.max_iter);
            let trace = r.trace.unwrap();
            let (mut t, mut mu, mut l) = (1.0, cfg.mu0, cfg.l0);
            for rec in &trace {
                let lhs = rec.mu / rec.l * rec.t * (rec.t - 1.0);
                let rhs = mu / l * t * t;
                assert!(
                    ((lhs - rhs) / rhs).abs() <= 1e-10,
                    "{} seed {seed} k {}",
                    p.name(),
                    rec.k
                );
                assert!(rec.theta * rec.theta <= l * rec.mu / (rec.l * mu) + 1e-12);
                assert!(
                    rec.l >= cfg.l0 && rec.l <= upper,
                    "{} L={}",
                    p.name(),
                    rec.l
                );
                assert!(rec.t >= 1.0);
                assert!(rec.theta >= 0.0);
                // θ < 1 needs L_{k+1}/L_k ≥ μ_{k+1}/μ_k; resetting L to L0 can break it
                if rec.l / l >= rec.mu / mu {
                    assert!(rec.theta < 1.0, "{} θ={}", p.name(), rec.theta);
                }
                t = rec.t;
                mu = rec.mu;
                l = rec.l;
            }
        }
    }
}

/// With `ℓ = L/μ` growing like `k^σ` the baseline's steps are summable, so
/// it stops at the μ floor wherever it happens to be; the extrapolated run
/// keeps moving and ends nearer the Pareto set.
#[test]
fn momentum_beats_the_stalling_baseline() {
    let p = strongly_convex_pair();
    let cfg = SolverConfig::default();
    let mut closer = 0;
    for seed in 0..50 {
        let x0 = p.sample_start(seed);
        let a = solve(&p, &x0, &cfg).unwrap();
        let b = solve_baseline(&p, &x0, &cfg).unwrap();
        assert_eq!(b.iterations, 38);
        assert!(a.iterations >= b.iterations);
        if pareto_distance(&a.final_x) < pareto_distance(&b.final_x) {
            closer += 1;
        }
    }
    assert!(closer >= 40, "{closer}/50");
}
