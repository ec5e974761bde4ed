//! Smoothing functions for nonsmooth convex pieces.
//!
//! A smoothing `f̃(·, μ)` of `f` is continuously differentiable for every
//! `μ > 0`, converges to `f` as `μ ↓ 0`, is convex whenever `f` is, satisfies
//! `|f̃(x, μ) − f(x)| ≤ κ μ` and has a gradient that is Lipschitz with
//! constant `L / μ` (for `μ ≤ 1`). The scalar atoms below realise this for
//! `|·|`, `max{·, 0}`, the two-term max and the finite max; [`Expr`] composes
//! them into full objective components.

mod expr;
mod verify;

pub use expr::{compose_surrogate, Domain, Expr, SmoothSurrogate, SmoothingConstants};
pub use verify::{verify_surrogate, verify_surrogate_with, VerifyReport, DEFAULT_MUS};

use alloc::vec::Vec;

use crate::error::{check_positive, Error, Result};

/// `sqrt(x² + μ²)` and its derivative. κ = 1, Lipschitz factor 1.
pub fn smooth_abs(x: f64, mu: f64) -> Result<(f64, f64)> {
    check_positive("mu", mu)?;
    let r = libm::hypot(x, mu);
    Ok((r, x / r))
}

/// `(x + sqrt(x² + 4μ²)) / 2` and its derivative. κ = 1, Lipschitz factor 1/2.
pub fn smooth_plus(x: f64, mu: f64) -> Result<(f64, f64)> {
    check_positive("mu", mu)?;
    let (value, wx, _) = max2_kernel(x, 0.0, mu);
    Ok((value, wx))
}

/// `(a + b + sqrt((a − b)² + 4μ²)) / 2` with partial derivatives. κ = 1.
pub fn smooth_max2(a: f64, b: f64, mu: f64) -> Result<(f64, f64, f64)> {
    check_positive("mu", mu)?;
    Ok(max2_kernel(a, b, mu))
}

// Written as max(a, b) + 2μ²/(r + |d|) so neither branch cancels.
pub(crate) fn max2_kernel(a: f64, b: f64, mu: f64) -> (f64, f64, f64) {
    let d = a - b;
    let r = libm::hypot(d, 2.0 * mu);
    let excess = 2.0 * mu * mu / (r + d.abs());
    let value = f64::max(a, b) + excess;
    // weight on the smaller argument: (r − |d|) / (2r)
    let minor = excess / r;
    if d >= 0.0 {
        (value, 1.0 - minor, minor)
    } else {
        (value, minor, 1.0 - minor)
    }
}

/// Log-sum-exp smoothing of a finite max, `μ ln Σ exp(v_j / μ)`, together
/// with the softmax weights (its gradient). κ = ln(len).
pub fn smooth_max_list(values: &[f64], mu: f64) -> Result<(f64, Vec<f64>)> {
    if values.is_empty() {
        return Err(Error::Empty("max-list values"));
    }
    check_positive("mu", mu)?;
    Ok(lse_kernel(values, mu))
}

pub(crate) fn lse_kernel(values: &[f64], mu: f64) -> (f64, Vec<f64>) {
    let top = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut weights: Vec<f64> = values.iter().map(|v| libm::exp((v - top) / mu)).collect();
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    (top + mu * libm::log(total), weights)
}

#[cfg(test)]
#[allow(clippy::approx_constant)] // literal reference values
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn abs_examples() {
        assert_eq!(smooth_abs(0.0, 1.0).unwrap(), (1.0, 0.0));
        let (v, d) = smooth_abs(3.0, 1e-6).unwrap();
        assert!(close(v, 3.0, 1e-9) && close(d, 1.0, 1e-9));
        let (v, d) = smooth_abs(1.0, 1.0).unwrap();
        assert!(close(v, 1.414_213_56, 1e-8));
        assert!(close(d, 0.707_106_78, 1e-8));
    }

    #[test]
    fn plus_examples() {
        let (v, d) = smooth_plus(0.0, 1.0).unwrap();
        assert!(close(v, 1.0, 1e-15) && close(d, 0.5, 1e-15));
        let (v, d) = smooth_plus(-10.0, 1e-6).unwrap();
        assert!(close(v, 0.0, 1e-9) && close(d, 0.0, 1e-9));
        assert!(v > 0.0 && d > 0.0);
        let (v, d) = smooth_plus(10.0, 1e-6).unwrap();
        assert!(close(v, 10.0, 1e-9) && close(d, 1.0, 1e-9));
    }

    #[test]
    fn max2_examples() {
        let (v, ga, gb) = smooth_max2(0.0, 0.0, 1.0).unwrap();
        assert!(close(v, 1.0, 1e-15) && close(ga, 0.5, 1e-15) && close(gb, 0.5, 1e-15));
        let (v, ga, gb) = smooth_max2(5.0, 0.0, 1e-6).unwrap();
        assert!(close(v, 5.0, 1e-9) && close(ga, 1.0, 1e-9) && close(gb, 0.0, 1e-9));
        let (v, ga, gb) = smooth_max2(2.0, 2.0 + 1e-12, 0.5).unwrap();
        assert!(close(v, 2.5, 1e-11) && close(ga, 0.5, 1e-11) && close(gb, 0.5, 1e-11));
        assert!(close(ga + gb, 1.0, 1e-15));
    }

    #[test]
    fn max_list_examples() {
        let (v, w) = smooth_max_list(&[0.0, 0.0, 0.0], 1.0).unwrap();
        assert!(close(v, libm::log(3.0), 1e-15));
        assert!(w.iter().all(|wi| close(*wi, 1.0 / 3.0, 1e-15)));
        let (v, w) = smooth_max_list(&[100.0, 0.0], 1.0).unwrap();
        assert!(v.is_finite() && close(v, 100.0, 1e-12));
        assert!(close(w[0], 1.0, 1e-12) && w[1] >= 0.0 && w[1] < 1e-40);
        let (v, _) = smooth_max_list(&[1.0, 2.0], 0.5).unwrap();
        assert!(v >= 2.0 && v <= 2.0 + 0.5 * libm::log(2.0));
    }

    #[test]
    fn rejects_bad_mu_and_empty() {
        assert!(matches!(
            smooth_abs(1.0, 0.0),
            Err(Error::InvalidParameter { .. })
        ));
        assert!(matches!(
            smooth_plus(1.0, -1.0),
            Err(Error::InvalidParameter { .. })
        ));
        assert!(matches!(
            smooth_max2(1.0, 2.0, 0.0),
            Err(Error::InvalidParameter { .. })
        ));
        assert!(matches!(
            smooth_max_list(&[1.0], f64::NAN),
            Err(Error::InvalidParameter { .. })
        ));
        assert_eq!(
            smooth_max_list(&[], 1.0),
            Err(Error::Empty("max-list values"))
        );
    }

    #[test]
    fn huge_inputs_stay_finite() {
        let (v, w) = smooth_max_list(&[1e300, -1e300], 1e-3).unwrap();
        assert!(v.is_finite());
        assert_eq!(w, [1.0, 0.0]);
        let (v, _, _) = smooth_max2(-1e200, 1e200, 1e-8).unwrap();
        assert!(v.is_finite());
    }
}
