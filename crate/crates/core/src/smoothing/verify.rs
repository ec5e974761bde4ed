use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::expr::{Domain, SmoothSurrogate};
use crate::vector;

/// Smoothing levels sampled by [`verify_surrogate`].
pub const DEFAULT_MUS: [f64; 3] = [1.0, 0.1, 0.01];

/// Worst observed violations of the smoothing-function contract.
///
/// All `max_*_violation` fields are clamped at zero; `max_lipschitz_ratio`
/// is the largest `‖∇f̃(a) − ∇f̃(b)‖ / ‖a − b‖` divided by `lip_factor / μ`
/// (so values `≤ 1` are fine).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VerifyReport {
    pub samples: usize,
    pub max_kappa_violation: f64,
    pub max_mu_monotone_violation: f64,
    pub max_convexity_violation: f64,
    pub max_fd_rel_error: f64,
    pub max_lipschitz_ratio: f64,
}

impl VerifyReport {
    /// Thresholds used throughout the test suites.
    pub fn passes(&self) -> bool {
        self.max_kappa_violation <= 1e-9
            && self.max_mu_monotone_violation <= 1e-9
            && self.max_convexity_violation <= 1e-9
            && self.max_fd_rel_error <= 1e-5
            && self.max_lipschitz_ratio <= 1.0 + 1e-6
    }
}

/// Samples `n_samples` points (and segment partners) uniformly in `domain`
/// and checks the κμ bound, μ-monotonicity, convexity on segments, central
/// finite-difference gradients and the empirical Lipschitz ratio at each of
/// [`DEFAULT_MUS`].
pub fn verify_surrogate(
    s: &SmoothSurrogate,
    domain: &Domain,
    n_samples: usize,
    seed: u64,
) -> VerifyReport {
    verify_surrogate_with(s, domain, n_samples, seed, &DEFAULT_MUS)
}

pub fn verify_surrogate_with(
    s: &SmoothSurrogate,
    domain: &Domain,
    n_samples: usize,
    seed: u64,
    mus: &[f64],
) -> VerifyReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = s.dim();
    let consts = s.constants();
    let mut report = VerifyReport {
        samples: n_samples,
        ..Default::default()
    };
    let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        domain
            .lower
            .iter()
            .zip(&domain.upper)
            .map(|(l, u)| if l < u { rng.gen_range(*l..=*u) } else { *l })
            .collect()
    };
    let mut grad = alloc::vec![0.0; n];
    let mut grad_b = alloc::vec![0.0; n];

    for _ in 0..n_samples {
        let a = draw(&mut rng);
        let b = draw(&mut rng);
        let alpha: f64 = rng.gen_range(0.0..=1.0);
        let mid: Vec<f64> = a
            .iter()
            .zip(&b)
            .map(|(x, y)| alpha * x + (1.0 - alpha) * y)
            .collect();
        let truth = s.expr().eval_true(&a);

        let mut previous: Option<(f64, f64)> = None;
        for &mu in mus {
            let fa = s.eval_into(&a, mu, &mut grad);
            let fb = s.eval_into(&b, mu, &mut grad_b);

            let kappa_gap = (fa - truth).abs() - consts.kappa * mu;
            report.max_kappa_violation = report.max_kappa_violation.max(kappa_gap);

            if let Some((mu_prev, f_prev)) = previous {
                let drift = (fa - f_prev).abs() - consts.kappa * (mu_prev - mu).abs();
                report.max_mu_monotone_violation = report.max_mu_monotone_violation.max(drift);
            }
            previous = Some((mu, fa));

            let fm = s.eval_into(&mid, mu, &mut alloc::vec![0.0; n]);
            let convex_gap = fm - (alpha * fa + (1.0 - alpha) * fb);
            report.max_convexity_violation = report.max_convexity_violation.max(convex_gap);

            let dist = vector::dist(&a, &b);
            if dist > 0.0 {
                let ratio = vector::dist(&grad, &grad_b) / dist / (consts.lip_factor / mu);
                report.max_lipschitz_ratio = report.max_lipschitz_ratio.max(ratio);
            }

            let fd_err = fd_gradient_error(s, &a, mu, &grad);
            report.max_fd_rel_error = report.max_fd_rel_error.max(fd_err);
        }
    }
    report
}

/// `‖∇ − ∇_fd‖_∞ / max(1, ‖∇‖_∞)` with step `1e−6·max(1, |x_i|)`.
fn fd_gradient_error(s: &SmoothSurrogate, x: &[f64], mu: f64, grad: &[f64]) -> f64 {
    let n = x.len();
    let mut scratch = alloc::vec![0.0; n];
    let mut probe = x.to_vec();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        let h = 1e-6 * f64::max(1.0, x[i].abs());
        probe[i] = x[i] + h;
        let up = s.eval_into(&probe, mu, &mut scratch);
        probe[i] = x[i] - h;
        let down = s.eval_into(&probe, mu, &mut scratch);
        probe[i] = x[i];
        let fd = (up - down) / (2.0 * h);
        worst = worst.max((fd - grad[i]).abs());
    }
    worst / f64::max(1.0, vector::norm_inf(grad))
}
