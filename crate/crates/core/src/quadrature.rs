//! Globally adaptive Gauss–Legendre quadrature.
//!
//! Each panel is integrated with a 15-point Gauss–Legendre rule and with the
//! same rule on its two halves; the difference is the panel's error estimate
//! and the halves' sum is the panel's value. The panel with the largest error
//! is bisected until the summed error meets the tolerance.
//!
//! Improper integrals over `[lower, ∞)` are mapped onto a bounded interval by
//! `x = lower / t` before integration.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::OnceLock;

use crate::error::{Error, Result};

const ORDER: usize = 15;

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_panels: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            rel_tol: 1e-8,
            abs_tol: 1e-300,
            max_panels: 4000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadEstimate {
    pub value: f64,
    pub error: f64,
}

impl std::ops::Add for QuadEstimate {
    type Output = QuadEstimate;

    fn add(self, rhs: QuadEstimate) -> QuadEstimate {
        QuadEstimate {
            value: self.value + rhs.value,
            error: self.error + rhs.error,
        }
    }
}

/// Nodes and weights of the Gauss–Legendre rule on [-1, 1], by Newton
/// iteration on the Legendre polynomial.
fn gauss_legendre() -> &'static ([f64; ORDER], [f64; ORDER]) {
    static RULE: OnceLock<([f64; ORDER], [f64; ORDER])> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = ORDER;
        let mut nodes = [0.0; ORDER];
        let mut weights = [0.0; ORDER];
        for i in 0..n {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        (nodes, weights)
    })
}

/// P_n(x) and P_n'(x) by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

fn rule<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Result<f64> {
    let (nodes, weights) = gauss_legendre();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut sum = 0.0;
    for (x, w) in nodes.iter().zip(weights) {
        let fx = f(mid + half * x);
        if !fx.is_finite() {
            return Err(Error::Domain(format!(
                "integrand is not finite at x = {}",
                mid + half * x
            )));
        }
        sum += w * fx;
    }
    Ok(sum * half)
}

struct Panel {
    a: f64,
    b: f64,
    left: f64,
    right: f64,
    error: f64,
}

impl Panel {
    fn new<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64, whole: f64) -> Result<Panel> {
        let m = 0.5 * (a + b);
        let left = rule(f, a, m)?;
        let right = rule(f, m, b)?;
        Ok(Panel {
            a,
            b,
            left,
            right,
            error: (whole - (left + right)).abs(),
        })
    }

    fn value(&self) -> f64 {
        self.left + self.right
    }

    fn splittable(&self) -> bool {
        let m = 0.5 * (self.a + self.b);
        m > self.a && m < self.b && (self.b - self.a) > 4.0 * f64::EPSILON * m.abs().max(f64::MIN_POSITIVE)
    }
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Integrates `f` over the finite interval `[a, b]`.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, opts: QuadOptions) -> Result<QuadEstimate> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain(format!("interval [{a}, {b}] is not finite")));
    }
    if a == b {
        return Ok(QuadEstimate { value: 0.0, error: 0.0 });
    }
    if a > b {
        let est = integrate(f, b, a, opts)?;
        return Ok(QuadEstimate { value: -est.value, error: est.error });
    }

    let whole = rule(&mut f, a, b)?;
    let mut heap = BinaryHeap::new();
    let mut frozen: Vec<Panel> = Vec::new();
    heap.push(Panel::new(&mut f, a, b, whole)?);
    let mut value: f64 = heap.iter().map(Panel::value).sum();
    let mut error: f64 = heap.iter().map(|p| p.error).sum();

    while error > opts.abs_tol.max(opts.rel_tol * value.abs()) {
        if heap.len() + frozen.len() >= opts.max_panels {
            break;
        }
        let Some(worst) = heap.pop() else { break };
        if !worst.splittable() {
            frozen.push(worst);
            continue;
        }
        let m = 0.5 * (worst.a + worst.b);
        let left = Panel::new(&mut f, worst.a, m, worst.left)?;
        let right = Panel::new(&mut f, m, worst.b, worst.right)?;
        value += left.value() + right.value() - worst.value();
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }

    // Re-sum from scratch to shed the running-update drift.
    let panels = heap.iter().chain(frozen.iter());
    let (value, error) = panels.fold((0.0, 0.0), |(v, e), p| (v + p.value(), e + p.error));
    let tol = opts.abs_tol.max(opts.rel_tol * value.abs());
    // Panels too narrow to split carry roundoff-level error; accept them.
    let unresolved: f64 = heap.iter().map(|p| p.error).sum();
    if unresolved > tol && error > tol {
        return Err(Error::QuadratureNotConverged { estimate: value, error });
    }
    Ok(QuadEstimate { value, error })
}

/// Integrates `f` over `[lower, ∞)`.
///
/// For `lower > 0` the substitution `x = lower / t` maps the range onto
/// `(0, 1]`. For `lower == 0` the range is split at 1 and the upper piece is
/// mapped by `x = 1 / t`.
pub fn integrate_to_infinity<F: FnMut(f64) -> f64>(f: F, lower: f64, opts: QuadOptions) -> Result<QuadEstimate> {
    integrate_power_tail(f, lower, 1.0, opts)
}

/// Like [`integrate_to_infinity`] with the substitution `x = lower · t^(−m)`.
///
/// An integrand decaying like `x^(−β−1)` becomes `t^(mβ − 1)`, so `m = 1/β`
/// removes the endpoint singularity that heavy tails leave at `t = 0`.
pub fn integrate_power_tail<F: FnMut(f64) -> f64>(
    mut f: F,
    lower: f64,
    m: f64,
    opts: QuadOptions,
) -> Result<QuadEstimate> {
    if !(lower.is_finite() && lower >= 0.0) {
        return Err(Error::Domain(format!("lower limit {lower} must be finite and nonnegative")));
    }
    if !(m.is_finite() && m > 0.0) {
        return Err(Error::Domain(format!("substitution power {m} must be positive")));
    }
    let (body, start) = if lower > 0.0 {
        (QuadEstimate { value: 0.0, error: 0.0 }, lower)
    } else {
        (integrate(&mut f, 0.0, 1.0, opts)?, 1.0)
    };
    let tail = integrate(
        |t| {
            let x = start * t.powf(-m);
            if !x.is_finite() {
                return 0.0;
            }
            let fx = f(x);
            if fx == 0.0 {
                0.0
            } else {
                fx * m * x / t
            }
        },
        0.0,
        1.0,
        opts,
    )?;
    Ok(body + tail)
}
