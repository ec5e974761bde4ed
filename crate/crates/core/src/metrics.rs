//! Merit-function estimates, front filtering and decay-rate fits.

use alloc::vec::Vec;

use crate::error::{check_positive, Error, Result};
use crate::problems::Problem;

/// A decision vector with its exact objective values.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontPoint {
    pub x: Vec<f64>,
    pub f: Vec<f64>,
}

impl FrontPoint {
    pub fn new(p: &Problem, x: Vec<f64>) -> Result<Self> {
        let f = p.eval_true(&x)?;
        Ok(Self { x, f })
    }
}

/// Least-squares fit of `ln value` against `ln k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub k_range: (usize, usize),
    /// Root-mean-square residual of the log-log fit.
    pub residual: f64,
}

/// `max_{z ∈ Z} min_i [F_i(x) − F_i(z)]`, a lower bound of the merit
/// function `u₀(x)` with the supremum taken over the reference set only.
pub fn merit_u0_approx(x: &[f64], reference: &[FrontPoint], p: &Problem) -> Result<f64> {
    if reference.is_empty() {
        return Err(Error::Empty("reference set"));
    }
    let fx = p.eval_true(x)?;
    Ok(merit_from_values(&fx, reference))
}

/// [`merit_u0_approx`] for a precomputed objective vector.
pub fn merit_from_values(fx: &[f64], reference: &[FrontPoint]) -> f64 {
    reference
        .iter()
        .map(|z| {
            fx.iter()
                .zip(&z.f)
                .map(|(a, b)| a - b)
                .fold(f64::INFINITY, f64::min)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// `W_k(z) = min_i [F̃_i(x_k, μ_k) − F_i(z)] + κ μ_k`.
pub fn w_k_diagnostic(x_k: &[f64], mu_k: f64, z: &[f64], p: &Problem, kappa: f64) -> Result<f64> {
    check_positive("mu", mu_k)?;
    let smoothed = p.eval_smoothed_total(x_k, mu_k)?;
    let fz = p.eval_true(z)?;
    let gap = smoothed
        .iter()
        .zip(&fz)
        .map(|(a, b)| a - b)
        .fold(f64::INFINITY, f64::min);
    Ok(gap + kappa * mu_k)
}

/// Slack used when comparing objective vectors.
pub const DOMINANCE_SLACK: f64 = 1e-9;

/// `a` dominates `b`: no worse anywhere (up to slack) and strictly better somewhere.
pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| *x <= y + DOMINANCE_SLACK)
        && a.iter().zip(b).any(|(x, y)| *x < y - DOMINANCE_SLACK)
}

/// Keeps the points no other point dominates, in input order.
pub fn nondominated_filter(points: &[FrontPoint]) -> Vec<FrontPoint> {
    // a dominator's objective sum is at most sum + m·slack, so scan in sum order
    let sums: Vec<f64> = points.iter().map(|p| p.f.iter().sum()).collect();
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| sums[a].total_cmp(&sums[b]));
    let mut keep = alloc::vec![true; points.len()];
    for &i in &order {
        let limit = sums[i] + points[i].f.len() as f64 * DOMINANCE_SLACK;
        for &j in &order {
            if sums[j] > limit {
                break;
            }
            if j != i && dominates(&points[j].f, &points[i].f) {
                keep[i] = false;
                break;
            }
        }
    }
    points
        .iter()
        .zip(keep)
        .filter(|(_, k)| *k)
        .map(|(p, _)| p.clone())
        .collect()
}

/// Fits `ln value = slope·ln k + intercept` over `k ∈ [k_lo, k_hi]`, ignoring
/// non-positive values. Needs at least five usable points.
pub fn fit_rate(series: &[(usize, f64)], k_lo: usize, k_hi: usize) -> Result<RateFit> {
    if k_lo >= k_hi {
        return Err(Error::InvalidParameter {
            name: "k range",
            value: k_hi as f64 - k_lo as f64,
        });
    }
    let pts: Vec<(f64, f64)> = series
        .iter()
        .filter(|(k, v)| *k >= k_lo.max(1) && *k <= k_hi && *v > 0.0 && v.is_finite())
        .map(|(k, v)| (libm::log(*k as f64), libm::log(*v)))
        .collect();
    if pts.len() < 5 {
        return Err(Error::InsufficientData {
            needed: 5,
            found: pts.len(),
        });
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = pts
        .iter()
        .map(|(lx, ly)| {
            let r = ly - (slope * lx + intercept);
            r * r
        })
        .sum();
    Ok(RateFit {
        slope,
        intercept,
        k_range: (k_lo, k_hi),
        residual: libm::sqrt(sse / n),
    })
}
