//! Distribution family with exact densities, survival functions, inverse
//! survival functions and seeded samplers.
//!
//! Four kinds are supported: a strong Pareto law with survival
//! `(L / x)^α` on `[L, ∞)`, the exponential, the lognormal, and a spliced law
//! whose body is exponential or lognormal and whose tail beyond the splice
//! point is Pareto. The spliced tail carries mass equal to the body's
//! survival at the splice point, so below the splice point the body density
//! is used as is and the total mass stays 1.

use rand_distr::{Distribution as _, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::extended::ExtendedReal;
use crate::rng::{self, Seed};

/// Relative tolerance for bisection-based inverse survival.
pub const BISECTION_REL_TOL: f64 = 1e-10;

const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Pareto tail parameters: survival `(scale / x)^tail_index` for `x ≥ scale`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParetoTail {
    pub scale: f64,
    pub tail_index: f64,
}

impl ParetoTail {
    pub fn new(scale: f64, tail_index: f64) -> Result<Self> {
        let tail = ParetoTail { scale, tail_index };
        tail.validate()?;
        Ok(tail)
    }

    pub fn validate(&self) -> Result<()> {
        positive("scale", self.scale)?;
        positive("tail_index", self.tail_index)
    }

    pub fn density(&self, x: f64) -> f64 {
        if x < self.scale {
            return 0.0;
        }
        self.tail_index / x * (self.scale / x).powf(self.tail_index)
    }

    pub fn survival(&self, x: f64) -> f64 {
        if x <= self.scale {
            1.0
        } else {
            (self.scale / x).powf(self.tail_index)
        }
    }

    /// `L · p^(−1/α)`; the caller guarantees `0 < p ≤ 1`.
    pub fn quantile_of_survival(&self, p: f64) -> f64 {
        self.scale * p.powf(-1.0 / self.tail_index)
    }
}

/// A sampleable distribution on the nonnegative reals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", try_from = "RawSpec", into = "RawSpec")]
pub enum DistributionSpec {
    StrongPareto {
        scale: f64,
        tail_index: f64,
    },
    Exponential {
        rate: f64,
    },
    Lognormal {
        log_mean: f64,
        log_sd: f64,
    },
    Spliced {
        body: Box<DistributionSpec>,
        splice_point: f64,
        tail: ParetoTail,
    },
}

// Serde mirror; conversion into `DistributionSpec` validates.
#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum RawSpec {
    #[serde(rename = "pareto")]
    StrongPareto { scale: f64, tail_index: f64 },
    Exponential { rate: f64 },
    Lognormal { log_mean: f64, log_sd: f64 },
    Spliced {
        body: Box<DistributionSpec>,
        splice_point: f64,
        tail: ParetoTail,
    },
}

impl TryFrom<RawSpec> for DistributionSpec {
    type Error = Error;

    fn try_from(raw: RawSpec) -> Result<Self> {
        let spec = match raw {
            RawSpec::StrongPareto { scale, tail_index } => DistributionSpec::StrongPareto { scale, tail_index },
            RawSpec::Exponential { rate } => DistributionSpec::Exponential { rate },
            RawSpec::Lognormal { log_mean, log_sd } => DistributionSpec::Lognormal { log_mean, log_sd },
            RawSpec::Spliced {
                body,
                splice_point,
                tail,
            } => DistributionSpec::Spliced {
                body,
                splice_point,
                tail,
            },
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl From<DistributionSpec> for RawSpec {
    fn from(spec: DistributionSpec) -> Self {
        match spec {
            DistributionSpec::StrongPareto { scale, tail_index } => RawSpec::StrongPareto { scale, tail_index },
            DistributionSpec::Exponential { rate } => RawSpec::Exponential { rate },
            DistributionSpec::Lognormal { log_mean, log_sd } => RawSpec::Lognormal { log_mean, log_sd },
            DistributionSpec::Spliced {
                body,
                splice_point,
                tail,
            } => RawSpec::Spliced {
                body,
                splice_point,
                tail,
            },
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be finite and strictly positive, got {v}")))
    }
}

impl DistributionSpec {
    pub fn pareto(scale: f64, tail_index: f64) -> Result<Self> {
        let spec = DistributionSpec::StrongPareto { scale, tail_index };
        spec.validate()?;
        Ok(spec)
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        let spec = DistributionSpec::Exponential { rate };
        spec.validate()?;
        Ok(spec)
    }

    pub fn lognormal(log_mean: f64, log_sd: f64) -> Result<Self> {
        let spec = DistributionSpec::Lognormal { log_mean, log_sd };
        spec.validate()?;
        Ok(spec)
    }

    /// Exponential or lognormal body below `splice_point`, Pareto tail with
    /// scale `splice_point` and the given index above it.
    pub fn spliced(body: DistributionSpec, splice_point: f64, tail_index: f64) -> Result<Self> {
        let spec = DistributionSpec::Spliced {
            body: Box::new(body),
            splice_point,
            tail: ParetoTail {
                scale: splice_point,
                tail_index,
            },
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DistributionSpec::StrongPareto { scale, tail_index } => {
                positive("scale", *scale)?;
                positive("tail_index", *tail_index)
            }
            DistributionSpec::Exponential { rate } => positive("rate", *rate),
            DistributionSpec::Lognormal { log_mean, log_sd } => {
                if !log_mean.is_finite() {
                    return Err(Error::InvalidParameter(format!("log_mean must be finite, got {log_mean}")));
                }
                positive("log_sd", *log_sd)
            }
            DistributionSpec::Spliced {
                body,
                splice_point,
                tail,
            } => {
                if !matches!(**body, DistributionSpec::Exponential { .. } | DistributionSpec::Lognormal { .. }) {
                    return Err(Error::InvalidParameter(
                        "spliced body must be exponential or lognormal".into(),
                    ));
                }
                body.validate()?;
                positive("splice_point", *splice_point)?;
                tail.validate()?;
                if (tail.scale - splice_point).abs() > 1e-12 * splice_point {
                    return Err(Error::InvalidParameter(format!(
                        "spliced tail scale {} must equal splice_point {splice_point}",
                        tail.scale
                    )));
                }
                Ok(())
            }
        }
    }

    /// Infimum of the support.
    pub fn support_min(&self) -> f64 {
        match self {
            DistributionSpec::StrongPareto { scale, .. } => *scale,
            DistributionSpec::Exponential { .. } | DistributionSpec::Lognormal { .. } => 0.0,
            DistributionSpec::Spliced { body, .. } => body.support_min(),
        }
    }

    /// Pareto tail index governing moment existence, if the law has one.
    pub fn tail_index(&self) -> Option<f64> {
        match self {
            DistributionSpec::StrongPareto { tail_index, .. } => Some(*tail_index),
            DistributionSpec::Spliced { tail, .. } => Some(tail.tail_index),
            _ => None,
        }
    }

    /// Mass carried by the Pareto segment of a spliced law.
    pub fn tail_mass(&self) -> f64 {
        match self {
            DistributionSpec::Spliced { body, splice_point, .. } => body.survival(*splice_point),
            DistributionSpec::StrongPareto { .. } => 1.0,
            _ => 0.0,
        }
    }

    pub fn density(&self, x: f64) -> f64 {
        match self {
            DistributionSpec::StrongPareto { scale, tail_index } => ParetoTail {
                scale: *scale,
                tail_index: *tail_index,
            }
            .density(x),
            DistributionSpec::Exponential { rate } => {
                if x < 0.0 {
                    0.0
                } else {
                    rate * (-rate * x).exp()
                }
            }
            DistributionSpec::Lognormal { log_mean, log_sd } => {
                if x <= 0.0 {
                    return 0.0;
                }
                let z = (x.ln() - log_mean) / log_sd;
                (-0.5 * z * z).exp() / (x * log_sd * (2.0 * std::f64::consts::PI).sqrt())
            }
            DistributionSpec::Spliced {
                body,
                splice_point,
                tail,
            } => {
                if x < *splice_point {
                    body.density(x)
                } else {
                    body.survival(*splice_point) * tail.density(x)
                }
            }
        }
    }

    /// `P(X > x)`.
    pub fn survival(&self, x: f64) -> f64 {
        match self {
            DistributionSpec::StrongPareto { scale, tail_index } => ParetoTail {
                scale: *scale,
                tail_index: *tail_index,
            }
            .survival(x),
            DistributionSpec::Exponential { rate } => {
                if x <= 0.0 {
                    1.0
                } else {
                    (-rate * x).exp()
                }
            }
            DistributionSpec::Lognormal { log_mean, log_sd } => {
                if x <= 0.0 {
                    return 1.0;
                }
                0.5 * erfc((x.ln() - log_mean) / (log_sd * SQRT_2))
            }
            DistributionSpec::Spliced {
                body,
                splice_point,
                tail,
            } => {
                if x < *splice_point {
                    body.survival(x)
                } else {
                    body.survival(*splice_point) * tail.survival(x)
                }
            }
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        1.0 - self.survival(x)
    }

    /// The threshold `K` with `survival(K) = p`, for `0 < p ≤ 1`.
    ///
    /// `p = 0` would map to an unbounded threshold and is rejected.
    pub fn inverse_survival(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::Domain(format!(
                "inverse survival needs 0 < p <= 1, got {p}"
            )));
        }
        Ok(self.inverse_survival_unchecked(p))
    }

    fn inverse_survival_unchecked(&self, p: f64) -> f64 {
        if p == 1.0 {
            return self.support_min();
        }
        match self {
            DistributionSpec::StrongPareto { scale, tail_index } => scale * p.powf(-1.0 / tail_index),
            DistributionSpec::Exponential { rate } => -p.ln() / rate,
            DistributionSpec::Lognormal { .. } => self.bisect_survival(p),
            DistributionSpec::Spliced {
                body,
                splice_point,
                tail,
            } => {
                let mass = body.survival(*splice_point);
                if p < mass {
                    tail.quantile_of_survival(p / mass)
                } else {
                    body.inverse_survival_unchecked(p).min(*splice_point)
                }
            }
        }
    }

    /// Bisection on the monotone survival function; the bracket grows
    /// geometrically from the support infimum.
    fn bisect_survival(&self, p: f64) -> f64 {
        let floor = self.support_min();
        let mut hi = if floor > 0.0 { 2.0 * floor } else { 1.0 };
        let mut lo;
        if self.survival(hi) > p {
            lo = hi;
            while self.survival(hi) > p {
                lo = hi;
                hi *= 2.0;
                if !hi.is_finite() {
                    return f64::MAX;
                }
            }
        } else {
            lo = floor + 0.5 * (hi - floor);
            while self.survival(lo) <= p {
                hi = lo;
                lo = floor + 0.5 * (lo - floor);
                if lo <= floor {
                    return floor;
                }
            }
        }
        while hi - lo > BISECTION_REL_TOL * hi {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.survival(mid) > p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Mean of the distribution; infinite when the tail index is at most 1.
    pub fn mean(&self) -> ExtendedReal {
        match self {
            DistributionSpec::StrongPareto { scale, tail_index } => {
                if *tail_index <= 1.0 {
                    ExtendedReal::Infinite
                } else {
                    ExtendedReal::Finite(tail_index * scale / (tail_index - 1.0))
                }
            }
            DistributionSpec::Exponential { rate } => ExtendedReal::Finite(1.0 / rate),
            DistributionSpec::Lognormal { log_mean, log_sd } => {
                ExtendedReal::Finite((log_mean + 0.5 * log_sd * log_sd).exp())
            }
            DistributionSpec::Spliced { .. } => {
                crate::tail_measures::partial_expectation(self, 0.0, crate::tail_measures::ImpactFunction::Identity)
                    .unwrap_or(ExtendedReal::Infinite)
            }
        }
    }

    /// Draws `n` values. Pareto, exponential and spliced laws use inverse
    /// transform sampling; the lognormal exponentiates a Gaussian draw.
    /// Draws are generated in fixed-size shards with one stream per shard,
    /// so the output depends only on `seed` and `n`.
    pub fn sample(&self, seed: Seed, n: usize) -> Vec<f64> {
        let shards: Vec<(u64, usize)> = rng::shards(n).collect();
        let mut out = Vec::with_capacity(n);
        let parts: Vec<Vec<f64>> = shards
            .par_iter()
            .map(|&(stream, count)| {
                let mut r = seed.stream(stream);
                (0..count).map(|_| self.draw(&mut r)).collect()
            })
            .collect();
        for part in parts {
            out.extend(part);
        }
        out
    }

    pub(crate) fn draw<R: rand::Rng + ?Sized>(&self, r: &mut R) -> f64 {
        match self {
            DistributionSpec::Lognormal { log_mean, log_sd } => {
                let z: f64 = StandardNormal.sample(r);
                (log_mean + log_sd * z).exp()
            }
            _ => self.inverse_survival_unchecked(rng::open_unit(r)),
        }
    }
}
