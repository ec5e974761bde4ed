use alloc::boxed::Box;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{lse_kernel, max2_kernel};
use crate::error::{check_dim, check_positive, Error, Result};
use crate::vector;

/// Approximation constant `κ` and gradient-Lipschitz factor `L` of a smoothing.
///
/// `|f̃(x, μ) − f(x)| ≤ κ μ` everywhere, and `∇f̃(·, μ)` is Lipschitz with
/// constant `lip_factor / μ` on the surrogate's [`Domain`] for `μ ∈ (0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothingConstants {
    pub kappa: f64,
    pub lip_factor: f64,
}

/// Axis-aligned box.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Domain {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        check_dim(lower.len(), upper.len())?;
        if lower.is_empty() {
            return Err(Error::Empty("domain"));
        }
        if let Some((l, u)) = lower.iter().zip(&upper).find(|(l, u)| !(l <= u)) {
            return Err(Error::InvalidParameter {
                name: "domain bounds",
                value: u - l,
            });
        }
        Ok(Self { lower, upper })
    }

    /// Cube `[lo, hi]^n`.
    pub fn cube(n: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo; n], vec![hi; n])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    /// Box grown by `factor` times its width on each side.
    pub fn widened(&self, factor: f64) -> Self {
        let (lower, upper) = self
            .lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| {
                let pad = factor * (u - l);
                (l - pad, u + pad)
            })
            .unzip();
        Self { lower, upper }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (l, u))| *l <= *v && *v <= *u)
    }
}

/// Expression tree over `x ∈ ℝⁿ` built from smoothable atoms.
///
/// `Square`, `Quartic` and `Exp` are smooth and only accept an affine
/// argument; the nonsmooth atoms (`Abs`, `Plus`, `Max2`, `MaxList`) accept
/// any subexpression.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Affine { coeffs: Vec<f64>, constant: f64 },
    Square(Box<Expr>),
    Quartic(Box<Expr>),
    Exp(Box<Expr>),
    Sum(Vec<Expr>),
    Scale(f64, Box<Expr>),
    Abs(Box<Expr>),
    Plus(Box<Expr>),
    Max2(Box<Expr>, Box<Expr>),
    MaxList(Vec<Expr>),
}

impl Expr {
    pub fn affine(coeffs: Vec<f64>, constant: f64) -> Self {
        Expr::Affine { coeffs, constant }
    }

    /// Coordinate `x_i` in dimension `n`.
    pub fn var(n: usize, i: usize) -> Self {
        let mut coeffs = vec![0.0; n];
        coeffs[i] = 1.0;
        Expr::Affine {
            coeffs,
            constant: 0.0,
        }
    }

    pub fn constant(n: usize, c: f64) -> Self {
        Expr::Affine {
            coeffs: vec![0.0; n],
            constant: c,
        }
    }

    pub fn square(self) -> Self {
        Expr::Square(Box::new(self))
    }

    pub fn quartic(self) -> Self {
        Expr::Quartic(Box::new(self))
    }

    pub fn exp(self) -> Self {
        Expr::Exp(Box::new(self))
    }

    pub fn scale(self, c: f64) -> Self {
        Expr::Scale(c, Box::new(self))
    }

    pub fn abs(self) -> Self {
        Expr::Abs(Box::new(self))
    }

    pub fn plus(self) -> Self {
        Expr::Plus(Box::new(self))
    }

    pub fn max2(a: Expr, b: Expr) -> Self {
        Expr::Max2(Box::new(a), Box::new(b))
    }

    pub fn name(&self) -> &'static str {
        match self {
            Expr::Affine { .. } => "affine",
            Expr::Square(_) => "square",
            Expr::Quartic(_) => "quartic",
            Expr::Exp(_) => "exp",
            Expr::Sum(_) => "sum",
            Expr::Scale(..) => "scale",
            Expr::Abs(_) => "abs",
            Expr::Plus(_) => "plus",
            Expr::Max2(..) => "max2",
            Expr::MaxList(_) => "max-list",
        }
    }

    /// Exact (possibly nonsmooth) value.
    pub fn eval_true(&self, x: &[f64]) -> f64 {
        match self {
            Expr::Affine { coeffs, constant } => vector::dot(coeffs, x) + constant,
            Expr::Square(e) => {
                let s = e.eval_true(x);
                s * s
            }
            Expr::Quartic(e) => {
                let s = e.eval_true(x);
                (s * s) * (s * s)
            }
            Expr::Exp(e) => libm::exp(e.eval_true(x)),
            Expr::Sum(terms) => terms.iter().map(|t| t.eval_true(x)).sum(),
            Expr::Scale(c, e) => c * e.eval_true(x),
            Expr::Abs(e) => e.eval_true(x).abs(),
            Expr::Plus(e) => f64::max(e.eval_true(x), 0.0),
            Expr::Max2(a, b) => f64::max(a.eval_true(x), b.eval_true(x)),
            Expr::MaxList(items) => items
                .iter()
                .map(|t| t.eval_true(x))
                .fold(f64::NEG_INFINITY, f64::max),
        }
    }

    /// Smoothed value; the gradient is accumulated into `grad` scaled by `weight`.
    fn eval_smooth(&self, x: &[f64], mu: f64, weight: f64, grad: &mut [f64]) -> f64 {
        match self {
            Expr::Affine { coeffs, constant } => {
                vector::axpy(weight, coeffs, grad);
                vector::dot(coeffs, x) + constant
            }
            Expr::Square(e) => {
                let s = e.eval_smooth(x, mu, 2.0 * weight * e.eval_true(x), grad);
                s * s
            }
            Expr::Quartic(e) => {
                let s0 = e.eval_true(x);
                let s = e.eval_smooth(x, mu, 4.0 * weight * s0 * s0 * s0, grad);
                (s * s) * (s * s)
            }
            Expr::Exp(e) => {
                let v = libm::exp(e.eval_true(x));
                e.eval_smooth(x, mu, weight * v, grad);
                v
            }
            Expr::Sum(terms) => terms
                .iter()
                .map(|t| t.eval_smooth(x, mu, weight, grad))
                .sum(),
            Expr::Scale(c, e) => c * e.eval_smooth(x, mu, c * weight, grad),
            Expr::Abs(e) => {
                let (s, inner) = e.smooth_with_grad(x, mu, grad.len());
                let r = libm::hypot(s, mu);
                vector::axpy(weight * s / r, &inner, grad);
                r
            }
            Expr::Plus(e) => {
                let (s, inner) = e.smooth_with_grad(x, mu, grad.len());
                let (v, w, _) = max2_kernel(s, 0.0, mu);
                vector::axpy(weight * w, &inner, grad);
                v
            }
            Expr::Max2(a, b) => {
                let (sa, ga) = a.smooth_with_grad(x, mu, grad.len());
                let (sb, gb) = b.smooth_with_grad(x, mu, grad.len());
                let (v, wa, wb) = max2_kernel(sa, sb, mu);
                vector::axpy(weight * wa, &ga, grad);
                vector::axpy(weight * wb, &gb, grad);
                v
            }
            Expr::MaxList(items) => {
                let parts: Vec<(f64, Vec<f64>)> = items
                    .iter()
                    .map(|t| t.smooth_with_grad(x, mu, grad.len()))
                    .collect();
                let values: Vec<f64> = parts.iter().map(|p| p.0).collect();
                let (v, w) = lse_kernel(&values, mu);
                for (wj, (_, gj)) in w.iter().zip(&parts) {
                    vector::axpy(weight * wj, gj, grad);
                }
                v
            }
        }
    }

    fn smooth_with_grad(&self, x: &[f64], mu: f64, n: usize) -> (f64, Vec<f64>) {
        let mut g = vec![0.0; n];
        let v = self.eval_smooth(x, mu, 1.0, &mut g);
        (v, g)
    }

    fn validate(&self, n: usize) -> Result<()> {
        match self {
            Expr::Affine { coeffs, constant } => {
                check_dim(n, coeffs.len())?;
                if !constant.is_finite() || coeffs.iter().any(|c| !c.is_finite()) {
                    return Err(Error::InvalidParameter {
                        name: "affine coefficient",
                        value: *constant,
                    });
                }
                Ok(())
            }
            Expr::Square(e) | Expr::Quartic(e) | Expr::Exp(e) => match **e {
                Expr::Affine { .. } => e.validate(n),
                ref inner => Err(Error::UnsupportedAtom(format!(
                    "{}({})",
                    self.name(),
                    inner.name()
                ))),
            },
            Expr::Sum(items) | Expr::MaxList(items) => {
                if items.is_empty() {
                    return Err(Error::UnsupportedAtom(format!("empty {}", self.name())));
                }
                items.iter().try_for_each(|t| t.validate(n))
            }
            Expr::Scale(c, e) => {
                if !c.is_finite() {
                    return Err(Error::InvalidParameter {
                        name: "scale",
                        value: *c,
                    });
                }
                e.validate(n)
            }
            Expr::Abs(e) | Expr::Plus(e) => e.validate(n),
            Expr::Max2(a, b) => {
                a.validate(n)?;
                b.validate(n)
            }
        }
    }

    /// Interval bounds and constants over `domain` (assumes `μ ≤ 1`).
    fn bounds(&self, domain: &Domain) -> NodeBounds {
        match self {
            Expr::Affine { coeffs, constant } => {
                let (lo, hi) = coeffs
                    .iter()
                    .zip(domain.lower.iter().zip(&domain.upper))
                    .fold((*constant, *constant), |(lo, hi), (c, (l, u))| {
                        let (a, b) = (c * l, c * u);
                        (lo + f64::min(a, b), hi + f64::max(a, b))
                    });
                NodeBounds {
                    kappa: 0.0,
                    lip: 0.0,
                    grad: vector::norm(coeffs),
                    lo,
                    hi,
                }
            }
            Expr::Square(e) => {
                let b = e.bounds(domain);
                let top = f64::max(b.lo.abs(), b.hi.abs());
                let bottom = if b.lo <= 0.0 && b.hi >= 0.0 {
                    0.0
                } else {
                    f64::min(b.lo.abs(), b.hi.abs())
                };
                NodeBounds {
                    kappa: 0.0,
                    lip: 2.0 * b.grad * b.grad,
                    grad: 2.0 * top * b.grad,
                    lo: bottom * bottom,
                    hi: top * top,
                }
            }
            Expr::Quartic(e) => {
                let b = e.bounds(domain);
                let top = f64::max(b.lo.abs(), b.hi.abs());
                let bottom = if b.lo <= 0.0 && b.hi >= 0.0 {
                    0.0
                } else {
                    f64::min(b.lo.abs(), b.hi.abs())
                };
                NodeBounds {
                    kappa: 0.0,
                    lip: 12.0 * top * top * b.grad * b.grad,
                    grad: 4.0 * top * top * top * b.grad,
                    lo: libm::pow(bottom, 4.0),
                    hi: libm::pow(top, 4.0),
                }
            }
            Expr::Exp(e) => {
                let b = e.bounds(domain);
                let peak = libm::exp(b.hi);
                NodeBounds {
                    kappa: 0.0,
                    lip: peak * b.grad * b.grad,
                    grad: peak * b.grad,
                    lo: libm::exp(b.lo),
                    hi: peak,
                }
            }
            Expr::Sum(items) => items.iter().map(|t| t.bounds(domain)).fold(
                NodeBounds {
                    kappa: 0.0,
                    lip: 0.0,
                    grad: 0.0,
                    lo: 0.0,
                    hi: 0.0,
                },
                |acc, b| NodeBounds {
                    kappa: acc.kappa + b.kappa,
                    lip: acc.lip + b.lip,
                    grad: acc.grad + b.grad,
                    lo: acc.lo + b.lo,
                    hi: acc.hi + b.hi,
                },
            ),
            Expr::Scale(c, e) => {
                let b = e.bounds(domain);
                let (x, y) = (c * b.lo, c * b.hi);
                NodeBounds {
                    kappa: c.abs() * b.kappa,
                    lip: c.abs() * b.lip,
                    grad: c.abs() * b.grad,
                    lo: f64::min(x, y),
                    hi: f64::max(x, y),
                }
            }
            // h(s) = sqrt(s² + μ²): |h'| ≤ 1, h'' ≤ 1/μ
            Expr::Abs(e) => {
                let b = e.bounds(domain);
                let top = f64::max(b.lo.abs(), b.hi.abs());
                NodeBounds {
                    kappa: b.kappa + 1.0,
                    lip: b.lip + b.grad * b.grad,
                    grad: b.grad,
                    lo: 0.0,
                    hi: top + b.kappa + 1.0,
                }
            }
            // h'' ≤ 1/(4μ), rounded up to 1/(2μ)
            Expr::Plus(e) => {
                let b = e.bounds(domain);
                NodeBounds {
                    kappa: b.kappa + 1.0,
                    lip: b.lip + 0.5 * b.grad * b.grad,
                    grad: b.grad,
                    lo: 0.0,
                    hi: f64::max(b.hi, 0.0) + b.kappa + 1.0,
                }
            }
            Expr::Max2(a, b) => {
                let (ba, bb) = (a.bounds(domain), b.bounds(domain));
                let spread = ba.grad + bb.grad;
                NodeBounds {
                    kappa: 1.0 + f64::max(ba.kappa, bb.kappa),
                    lip: f64::max(ba.lip, bb.lip) + 0.25 * spread * spread,
                    grad: f64::max(ba.grad, bb.grad),
                    lo: f64::max(ba.lo, bb.lo) - ba.kappa.max(bb.kappa),
                    hi: f64::max(ba.hi, bb.hi) + 1.0 + ba.kappa.max(bb.kappa),
                }
            }
            // Hessian of the softmax part is bounded by ½ max_{j,k} ‖∇_j − ∇_k‖² / μ
            Expr::MaxList(items) => {
                let parts: Vec<NodeBounds> = items.iter().map(|t| t.bounds(domain)).collect();
                let max_of = |f: fn(&NodeBounds) -> f64| parts.iter().map(f).fold(0.0, f64::max);
                let mut top_two = [0.0f64; 2];
                for p in &parts {
                    if p.grad > top_two[0] {
                        top_two = [p.grad, top_two[0]];
                    } else if p.grad > top_two[1] {
                        top_two[1] = p.grad;
                    }
                }
                let spread = top_two[0] + top_two[1];
                let log_len = libm::log(parts.len() as f64);
                let inner_kappa = max_of(|p| p.kappa);
                NodeBounds {
                    kappa: log_len + inner_kappa,
                    lip: max_of(|p| p.lip) + 0.5 * spread * spread,
                    grad: max_of(|p| p.grad),
                    lo: parts.iter().map(|p| p.lo).fold(f64::NEG_INFINITY, f64::max) - inner_kappa,
                    hi: parts.iter().map(|p| p.hi).fold(f64::NEG_INFINITY, f64::max)
                        + log_len
                        + inner_kappa,
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct NodeBounds {
    kappa: f64,
    lip: f64,
    grad: f64,
    lo: f64,
    hi: f64,
}

/// A smoothed objective component: expression tree plus its constants.
///
/// Immutable once built; evaluation allocates only local scratch vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothSurrogate {
    expr: Expr,
    constants: SmoothingConstants,
    domain: Domain,
}

impl SmoothSurrogate {
    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn constants(&self) -> SmoothingConstants {
        self.constants
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    /// Box on which `lip_factor` is certified.
    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    /// `(f̃(x, μ), ∇f̃(x, μ))`.
    pub fn eval(&self, x: &[f64], mu: f64) -> Result<(f64, Vec<f64>)> {
        check_dim(self.dim(), x.len())?;
        check_positive("mu", mu)?;
        Ok(self.expr.smooth_with_grad(x, mu, self.dim()))
    }

    /// Gradient accumulated into `grad` (which is overwritten).
    pub(crate) fn eval_into(&self, x: &[f64], mu: f64, grad: &mut [f64]) -> f64 {
        grad.iter_mut().for_each(|g| *g = 0.0);
        self.expr.eval_smooth(x, mu, 1.0, grad)
    }

    pub fn value(&self, x: &[f64], mu: f64) -> Result<f64> {
        self.eval(x, mu).map(|(v, _)| v)
    }

    /// The underlying nonsmooth function.
    pub fn true_eval(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        Ok(self.expr.eval_true(x))
    }
}

/// Builds a surrogate for `expr` whose Lipschitz factor is certified on `domain`.
///
/// `κ` propagates additively through sums (scaled by `|c|`) and adds the
/// atom's own constant at every nonsmooth node. The Lipschitz factor is a
/// conservative chain-rule bound using interval ranges of the smooth atoms.
pub fn compose_surrogate(expr: Expr, domain: &Domain) -> Result<SmoothSurrogate> {
    expr.validate(domain.dim())?;
    let b = expr.bounds(domain);
    // lip_factor must be positive even for affine pieces
    let lip_factor = if b.lip > 0.0 { b.lip } else { f64::EPSILON };
    Ok(SmoothSurrogate {
        expr,
        constants: SmoothingConstants {
            kappa: b.kappa,
            lip_factor,
        },
        domain: domain.clone(),
    })
}
