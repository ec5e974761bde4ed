#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sapgm_core::{GKind, SmoothEval, SubproblemInput};

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
    .unwrap()
}

/// Brute-force minimiser of a convex 2-D function: a `cells × cells` grid
/// over `[lo, hi]`, then repeated zooms around the best node until the grid
/// spacing drops below `resolution`.
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
        // keep a generous window: the zoom only has to contain the minimiser
        let r = [25.0 * step[0], 25.0 * step[1]];
        lo = [best.1[0] - r[0], best.1[1] - r[1]];
        hi = [best.1[0] + r[0], best.1[1] + r[1]];
    }
}

/// Radius around `y` guaranteed to contain the subproblem minimiser:
/// `ℓ‖z* − y‖ ≤ max_i ‖∇f̃_i‖ + ‖ξ‖` with `ξ ∈ ∂g`.
pub fn minimiser_radius(input: &SubproblemInput) -> f64 {
    let gmax = input
        .grads
        .iter()
        .map(|r| r.iter().map(|v| v * v).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    let xi = input.g.l1_weight(input.n()) * (input.n() as f64).sqrt();
    (gmax + xi) / input.ell + 1e-3
}
