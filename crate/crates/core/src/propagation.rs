//! Error propagation from a probability estimate to its Pareto quantile.
//!
//! The exceedance probability `p` is treated as a Beta(a, b) random variable
//! and mapped through the Pareto inverse survival function
//! `K = L · p^(−1/α)`. The induced law of `K` has density
//!
//! ```text
//! f_K(k) = α k^(−aα−1) L^(aα) (1 − (L/k)^α)^(b−1) / B(a, b),   k ≥ L
//! ```
//!
//! and raw moments `E[K^n] = L^n Γ(a − n/α) Γ(a + b) / (Γ(a) Γ(a + b − n/α))`,
//! finite exactly when `α > n/a` and `α > n/(a + b)`.
//!
//! Gamma ratios are evaluated as exponentiated log-Gamma differences.

use rand_distr::{Beta, Distribution as _};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::beta::ln_beta;
use statrs::function::gamma::ln_gamma;

use crate::distributions::ParetoTail;
use crate::error::{Error, Result};
use crate::extended::ExtendedReal;
use crate::rng::{self, Seed};
use crate::stats::Running;

/// Two-sided 95% normal quantile.
const Z_95: f64 = 1.959_963_984_540_054;

/// Beta(a, b) law of a probability estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, try_from = "RawBeta")]
pub struct BetaErrorModel {
    a: f64,
    b: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBeta {
    a: f64,
    b: f64,
}

impl TryFrom<RawBeta> for BetaErrorModel {
    type Error = Error;

    fn try_from(raw: RawBeta) -> Result<Self> {
        BetaErrorModel::new(raw.a, raw.b)
    }
}

impl BetaErrorModel {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        for (name, v) in [("a", a), ("b", b)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("beta parameter {name} must be > 0, got {v}")));
            }
        }
        Ok(BetaErrorModel { a, b })
    }

    /// The uniform special case, Beta(1, 1).
    pub fn uniform() -> Self {
        BetaErrorModel { a: 1.0, b: 1.0 }
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn mean(&self) -> f64 {
        self.a / (self.a + self.b)
    }

    pub fn variance(&self) -> f64 {
        let s = self.a + self.b;
        self.a * self.b / (s * s * (s + 1.0))
    }
}

/// `(a/(a+b), ab/((a+b)²(a+b+1)))`.
pub fn beta_moments(model: &BetaErrorModel) -> (f64, f64) {
    (model.mean(), model.variance())
}

/// Whether the `n`-th moment of the pushforward exists: `α > n/a` and
/// `α > n/(a+b)`, both strict.
pub fn moment_exists(n: u32, model: &BetaErrorModel, alpha: f64) -> bool {
    let n = n as f64;
    alpha > n / model.a && alpha > n / (model.a + model.b)
}

/// Law of `K = L · p^(−1/α)` for `p ~ Beta(a, b)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pushforward {
    pub model: BetaErrorModel,
    pub tail: ParetoTail,
}

impl Pushforward {
    pub fn new(model: BetaErrorModel, scale: f64, tail_index: f64) -> Result<Self> {
        Ok(Pushforward {
            model,
            tail: ParetoTail::new(scale, tail_index)?,
        })
    }

    /// Density of `K`. Zero below `L`. At `k = L` the limit is returned:
    /// 0 for `b > 1`, `aα/L` for `b = 1`, `+∞` for `b < 1`.
    pub fn density(&self, k: f64) -> f64 {
        let (a, b) = (self.model.a, self.model.b);
        let (l, alpha) = (self.tail.scale, self.tail.tail_index);
        if k < l {
            return 0.0;
        }
        // (L/k)^α is the probability that maps to k.
        let ln_prob = alpha * (l / k).ln();
        let one_minus_r = if k == l { 0.0 } else { -ln_prob.exp_m1() };
        if one_minus_r == 0.0 {
            return if b > 1.0 {
                0.0
            } else if b == 1.0 {
                a * alpha / l
            } else {
                f64::INFINITY
            };
        }
        let ln_f = alpha.ln() - k.ln() + a * ln_prob + (b - 1.0) * one_minus_r.ln() - ln_beta(a, b);
        ln_f.exp()
    }

    pub fn moment_exists(&self, n: u32) -> bool {
        moment_exists(n, &self.model, self.tail.tail_index)
    }

    /// `E[K^n]`, or `Infinite` when the moment does not exist.
    pub fn raw_moment(&self, n: u32) -> ExtendedReal {
        if !self.moment_exists(n) {
            return ExtendedReal::Infinite;
        }
        let (a, b) = (self.model.a, self.model.b);
        let s = n as f64 / self.tail.tail_index;
        let ln_ratio = ln_gamma(a - s) + ln_gamma(a + b) - ln_gamma(a) - ln_gamma(a + b - s);
        ExtendedReal::Finite(self.tail.scale.powi(n as i32) * ln_ratio.exp())
    }

    /// `M_K = L Γ(a−1/α) Γ(a+b) / (Γ(a) Γ(a+b−1/α))`.
    pub fn mean(&self) -> ExtendedReal {
        self.raw_moment(1)
    }

    /// `V_K = E[K²] − M_K²`.
    pub fn variance(&self) -> ExtendedReal {
        match (self.raw_moment(2), self.raw_moment(1)) {
            (ExtendedReal::Finite(second), ExtendedReal::Finite(mean)) => {
                ExtendedReal::Finite(second - mean * mean)
            }
            _ => ExtendedReal::Infinite,
        }
    }

    /// One draw of `K`.
    fn map_probability(&self, p: f64) -> f64 {
        // Beta draws can underflow to exactly 0 for very small `a`.
        self.tail.quantile_of_survival(p.max(f64::MIN_POSITIVE))
    }

    /// Monte Carlo summary of `n` draws of `K`, sharded by fixed-size
    /// streams so the result does not depend on the worker count.
    fn monte_carlo(&self, seed: Seed, n: usize) -> Running {
        let beta = Beta::new(self.model.a, self.model.b).expect("validated beta parameters");
        let shards: Vec<(u64, usize)> = rng::shards(n).collect();
        shards
            .par_iter()
            .map(|&(stream, count)| {
                let mut r = seed.stream(stream);
                let mut acc = Running::default();
                for _ in 0..count {
                    acc.push(self.map_probability(beta.sample(&mut r)));
                }
                acc
            })
            .collect::<Vec<_>>()
            .into_iter()
            .fold(Running::default(), Running::merge)
    }

    /// Closed forms together with a Monte Carlo estimate of the mean from
    /// `n ≥ 1000` draws.
    pub fn sample(&self, seed: Seed, n: usize) -> Result<PushforwardResult> {
        if n < 1000 {
            return Err(Error::Domain(format!("Monte Carlo needs at least 1000 draws, got {n}")));
        }
        let mc = self.monte_carlo(seed, n);
        let mc_variance = mc.variance();
        let variance = self.variance();
        Ok(PushforwardResult {
            mean: self.mean(),
            variance,
            mc_mean: mc.mean,
            mc_mean_ci_halfwidth: Z_95 * (mc_variance / n as f64).sqrt(),
            mc_variance,
            mc_n: n as u64,
            mc_reliable: variance.is_finite(),
            moment_flags: (1..=4)
                .map(|n| MomentFlag {
                    n,
                    exists: self.moment_exists(n),
                })
                .collect(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MomentFlag {
    pub n: u32,
    pub exists: bool,
}

/// Closed-form moments of the pushforward next to a Monte Carlo estimate.
///
/// The confidence interval is a normal approximation; it is meaningless when
/// the variance is infinite, in which case `mc_reliable` is false.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PushforwardResult {
    pub mean: ExtendedReal,
    pub variance: ExtendedReal,
    pub mc_mean: f64,
    pub mc_mean_ci_halfwidth: f64,
    pub mc_variance: f64,
    pub mc_n: u64,
    pub mc_reliable: bool,
    pub moment_flags: Vec<MomentFlag>,
}

/// Thresholds matching the probability band `p_center ± p_halfwidth`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorBand {
    /// Quantile at the upper probability edge.
    pub k_low: f64,
    pub k_center: f64,
    /// Quantile at the lower probability edge.
    pub k_high: f64,
}

impl ErrorBand {
    pub fn width(&self) -> f64 {
        self.k_high - self.k_low
    }
}

/// Maps a probability band through `K = L · p^(−1/α)`.
///
/// A band whose lower edge reaches 0 has no finite upper threshold and
/// yields [`Error::UnboundedBand`].
pub fn error_band(scale: f64, alpha: f64, p_center: f64, p_halfwidth: f64) -> Result<ErrorBand> {
    let tail = ParetoTail::new(scale, alpha)?;
    if !(p_center > 0.0 && p_center < 1.0) {
        return Err(Error::Domain(format!("p_center must lie in (0, 1), got {p_center}")));
    }
    if !(p_halfwidth > 0.0 && p_halfwidth.is_finite()) {
        return Err(Error::Domain(format!("p_halfwidth must be positive, got {p_halfwidth}")));
    }
    let lower = p_center - p_halfwidth;
    let upper = p_center + p_halfwidth;
    if lower <= 0.0 {
        return Err(Error::UnboundedBand { lower_edge: lower });
    }
    if upper > 1.0 {
        return Err(Error::Domain(format!("upper probability edge {upper} exceeds 1")));
    }
    Ok(ErrorBand {
        k_low: tail.quantile_of_survival(upper),
        k_center: tail.quantile_of_survival(p_center),
        k_high: tail.quantile_of_survival(lower),
    })
}
