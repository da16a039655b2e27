//! Tail expectations and the split of `G_K` into a threshold term and an
//! integral over the survival function.
//!
//! For an impact `g(x) = x^p` the partial expectation is
//! `G_K = ∫_K^∞ x^p f(x) dx`. With `p = 0` it reduces to the exceedance
//! probability `P_K`; with `p = 1` it satisfies
//! `G_K = K · P_K + ∫_K^∞ P_x dx`.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;
use statrs::function::gamma::{gamma_ur, ln_gamma};

use crate::distributions::DistributionSpec;
use crate::error::{Error, Result};
use crate::extended::ExtendedReal;
use crate::quadrature::{integrate, integrate_power_tail, QuadEstimate, QuadOptions};

/// The payoff transform `g`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ImpactFunction {
    Identity,
    /// `x^exponent`; exponent 0 is the indicator of exceedance.
    Power { exponent: f64 },
}

impl ImpactFunction {
    pub fn exponent(&self) -> f64 {
        match self {
            ImpactFunction::Identity => 1.0,
            ImpactFunction::Power { exponent } => *exponent,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            ImpactFunction::Identity => x,
            ImpactFunction::Power { exponent } if *exponent == 0.0 => 1.0,
            ImpactFunction::Power { exponent } => x.powf(*exponent),
        }
    }
}

/// `G_K = threshold_term + integral_term` for the identity impact.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailDecomposition {
    /// `K · P_K`
    pub threshold_term: f64,
    /// `∫_K^∞ P_x dx`
    pub integral_term: f64,
    pub total: f64,
    pub quadrature_error: f64,
}

/// Evaluation route for [`partial_expectation_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    /// Closed forms where they exist, quadrature elsewhere.
    #[default]
    Auto,
    /// Quadrature of `g(x) f(x)` regardless of closed forms.
    Quadrature,
}

fn quad_options() -> QuadOptions {
    QuadOptions::default()
}

fn check_threshold(spec: &DistributionSpec, k: f64) -> Result<()> {
    let floor = spec.support_min();
    if !k.is_finite() || k < floor {
        return Err(Error::Domain(format!(
            "threshold {k} lies below the support infimum {floor}"
        )));
    }
    Ok(())
}

fn check_exponent(p: f64) -> Result<()> {
    if p.is_finite() && p >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("impact exponent must be nonnegative, got {p}")))
    }
}

/// `G_K` for the impact `g`, or `Infinite` when `E[X^p]` diverges.
pub fn partial_expectation(spec: &DistributionSpec, k: f64, g: ImpactFunction) -> Result<ExtendedReal> {
    partial_expectation_with(spec, k, g, Method::Auto)
}

pub fn partial_expectation_with(
    spec: &DistributionSpec,
    k: f64,
    g: ImpactFunction,
    method: Method,
) -> Result<ExtendedReal> {
    spec.validate()?;
    check_threshold(spec, k)?;
    let p = g.exponent();
    check_exponent(p)?;
    // Divergence is decided analytically; quadrature cannot certify it.
    if let Some(alpha) = spec.tail_index() {
        if alpha <= p {
            return Ok(ExtendedReal::Infinite);
        }
    }
    let value = match method {
        Method::Auto => closed_form(spec, k, p)?,
        Method::Quadrature => quadrature(spec, k, g)?.value,
    };
    Ok(ExtendedReal::Finite(value))
}

/// `α/(α−p) · K^p · (L/K)^α` for a Pareto law with `α > p`, `K ≥ L`.
fn pareto_moment(scale: f64, alpha: f64, k: f64, p: f64) -> f64 {
    let k = k.max(scale);
    alpha / (alpha - p) * k.powf(p) * (scale / k).powf(alpha)
}

fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

fn closed_form(spec: &DistributionSpec, k: f64, p: f64) -> Result<f64> {
    Ok(match spec {
        DistributionSpec::StrongPareto { scale, tail_index } => pareto_moment(*scale, *tail_index, k, p),
        DistributionSpec::Exponential { rate } => {
            // Γ(p+1, λK) / λ^p
            let a = p + 1.0;
            let upper = if k == 0.0 { 1.0 } else { gamma_ur(a, rate * k) };
            (ln_gamma(a) - p * rate.ln()).exp() * upper
        }
        DistributionSpec::Lognormal { log_mean, log_sd } => {
            let scale = (p * log_mean + 0.5 * p * p * log_sd * log_sd).exp();
            if k == 0.0 {
                scale
            } else {
                scale * std_normal_cdf((log_mean + p * log_sd * log_sd - k.ln()) / log_sd)
            }
        }
        DistributionSpec::Spliced {
            body,
            splice_point,
            tail,
        } => {
            let mass = body.survival(*splice_point);
            let g = ImpactFunction::Power { exponent: p };
            let body_part = if k < *splice_point {
                integrate(|x| g.eval(x) * body.density(x), k, *splice_point, quad_options())?.value
            } else {
                0.0
            };
            body_part + mass * pareto_moment(tail.scale, tail.tail_index, k, p)
        }
    })
}

/// Quadrature of `g(x) f(x)` over `[K, ∞)`, split at a splice point when
/// one lies above `K`.
pub(crate) fn quadrature(spec: &DistributionSpec, k: f64, g: ImpactFunction) -> Result<QuadEstimate> {
    let integrand = |x: f64| {
        let fx = spec.density(x);
        if fx == 0.0 {
            0.0
        } else {
            g.eval(x) * fx
        }
    };
    split_tail_integral(spec, k, g.exponent(), integrand)
}

/// Integrates over `[K, ∞)`. A Pareto segment is mapped by
/// `x = K t^(−1/(α−p))`, which flattens an integrand decaying like
/// `x^(p−α−1)`; other tails use `x = K / t`.
fn split_tail_integral(spec: &DistributionSpec, k: f64, p: f64, f: impl Fn(f64) -> f64) -> Result<QuadEstimate> {
    let m = spec.tail_index().map_or(1.0, |alpha| 1.0 / (alpha - p));
    match spec {
        DistributionSpec::Spliced { splice_point, .. } if k < *splice_point => {
            let body = integrate(&f, k, *splice_point, quad_options())?;
            let tail = integrate_power_tail(&f, *splice_point, m, quad_options())?;
            Ok(body + tail)
        }
        _ => integrate_power_tail(&f, k, m, quad_options()),
    }
}

/// Splits `G_K` (identity impact) into `K · P_K` and `∫_K^∞ P_x dx`, the
/// latter computed by quadrature over the survival function.
pub fn tail_decomposition(spec: &DistributionSpec, k: f64) -> Result<TailDecomposition> {
    spec.validate()?;
    check_threshold(spec, k)?;
    if let Some(alpha) = spec.tail_index() {
        if alpha <= 1.0 {
            return Err(Error::InfiniteMoment(format!(
                "tail index {alpha} <= 1: the first moment does not exist"
            )));
        }
    }
    let threshold_term = k * spec.survival(k);
    // The survival function decays one power slower than the density.
    let integral = split_tail_integral(spec, k, 1.0, |x| spec.survival(x))?;
    Ok(TailDecomposition {
        threshold_term,
        integral_term: integral.value,
        total: threshold_term + integral.value,
        quadrature_error: integral.error,
    })
}

/// `G_K` for `g(x) = x^p` at each exponent. Exponents must be ascending;
/// once an entry is infinite every later entry is too.
pub fn moment_map(spec: &DistributionSpec, k: f64, exponents: &[f64]) -> Result<Vec<(f64, ExtendedReal)>> {
    if exponents.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Domain("exponents must be sorted ascending".into()));
    }
    let mut diverged = false;
    exponents
        .iter()
        .map(|&p| {
            let value = if diverged {
                check_exponent(p)?;
                ExtendedReal::Infinite
            } else {
                partial_expectation(spec, k, ImpactFunction::Power { exponent: p })?
            };
            diverged |= !value.is_finite();
            Ok((p, value))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pareto(l: f64, a: f64) -> DistributionSpec {
        DistributionSpec::pareto(l, a).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn partial_expectation_examples() {
        let p = pareto(1.0, 2.0);
        let g1 = partial_expectation(&p, 1.0, ImpactFunction::Identity).unwrap();
        assert!((g1.unwrap() - 2.0).abs() < 1e-15);
        let g0 = partial_expectation(&p, 2.0, ImpactFunction::Power { exponent: 0.0 }).unwrap();
        assert!((g0.unwrap() - 0.25).abs() < 1e-15);
        let heavy = pareto(1.0, 0.8);
        assert_eq!(
            partial_expectation(&heavy, 1.0, ImpactFunction::Identity).unwrap(),
            ExtendedReal::Infinite
        );
    }

    #[test]
    fn threshold_below_support() {
        let p = pareto(1.0, 2.0);
        assert!(matches!(
            partial_expectation(&p, 0.5, ImpactFunction::Identity),
            Err(Error::Domain(_))
        ));
        assert!(matches!(tail_decomposition(&p, 0.5), Err(Error::Domain(_))));
        let e = DistributionSpec::exponential(1.0).unwrap();
        assert!(partial_expectation(&e, -1.0, ImpactFunction::Identity).is_err());
    }

    #[test]
    fn decomposition_examples() {
        let p = pareto(1.0, 2.0);
        let d = tail_decomposition(&p, 2.0).unwrap();
        assert!((d.threshold_term - 0.5).abs() < 1e-15);
        assert!((d.integral_term - 0.5).abs() < 1e-8);
        assert!((d.total - 1.0).abs() < 1e-8);
        assert_eq!(d.total, d.threshold_term + d.integral_term);
        let d = tail_decomposition(&p, 1.0).unwrap();
        assert!((d.threshold_term - 1.0).abs() < 1e-15);
        assert!((d.integral_term - 1.0).abs() < 1e-8);
        assert!(matches!(
            tail_decomposition(&pareto(1.0, 0.8), 1.0),
            Err(Error::InfiniteMoment(_))
        ));
        assert!(matches!(
            tail_decomposition(&pareto(1.0, 1.0), 1.0),
            Err(Error::InfiniteMoment(_))
        ));
    }

    #[test]
    fn integral_term_dominates_for_heavy_tails() {
        for alpha in [1.1, 1.25, 1.5, 1.75, 2.0] {
            for k in [1.0, 3.0, 40.0] {
                let d = tail_decomposition(&pareto(1.0, alpha), k).unwrap();
                let ratio = d.integral_term / d.threshold_term;
                assert!((ratio - 1.0 / (alpha - 1.0)).abs() < 1e-6, "α={alpha} K={k}: {ratio}");
                assert!(ratio >= 1.0);
            }
        }
    }

    #[test]
    fn moment_map_examples() {
        let p = pareto(1.0, 2.0);
        let m = moment_map(&p, 1.0, &[0.0, 1.0]).unwrap();
        assert_eq!(m[0], (0.0, ExtendedReal::Finite(1.0)));
        assert_eq!(m[1].0, 1.0);
        assert!((m[1].1.unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(moment_map(&p, 1.0, &[2.0]).unwrap(), vec![(2.0, ExtendedReal::Infinite)]);
        let ln = DistributionSpec::lognormal(0.3, 0.7).unwrap();
        let m = moment_map(&ln, 2.0, &[0.0]).unwrap();
        assert!((m[0].1.unwrap() - ln.survival(2.0)).abs() < 1e-15);
        assert!(moment_map(&p, 1.0, &[1.0, 0.0]).is_err());
    }

    #[test]
    fn moment_ladder_is_upward_closed() {
        let spec = DistributionSpec::spliced(DistributionSpec::exponential(1.0).unwrap(), 2.0, 1.7).unwrap();
        let exps: Vec<f64> = (0..20).map(|i| i as f64 * 0.25).collect();
        let m = moment_map(&spec, 2.5, &exps).unwrap();
        let first_inf = m.iter().position(|(_, v)| !v.is_finite()).unwrap();
        assert_eq!(m[first_inf].0, 1.75);
        assert!(m[first_inf..].iter().all(|(_, v)| !v.is_finite()));
        assert!(m[..first_inf].iter().all(|(_, v)| v.is_finite()));
    }

    #[test]
    fn quadrature_route_matches_closed_forms() {
        let cases = [
            (pareto(1.0, 2.0), 1.0, 1.0),
            (pareto(1.0, 3.0), 2.5, 2.0),
            (pareto(2.0, 1.5), 2.0, 0.0),
            (pareto(0.5, 2.5), 4.0, 1.0),
            (DistributionSpec::exponential(1.0).unwrap(), 0.0, 1.0),
            (DistributionSpec::exponential(2.0).unwrap(), 1.5, 2.5),
            (DistributionSpec::lognormal(0.0, 1.0).unwrap(), 0.0, 1.0),
            (DistributionSpec::lognormal(-0.5, 1.2).unwrap(), 3.0, 2.0),
        ];
        for (spec, k, p) in cases {
            let g = ImpactFunction::Power { exponent: p };
            let closed = partial_expectation_with(&spec, k, g, Method::Auto).unwrap().unwrap();
            let quad = partial_expectation_with(&spec, k, g, Method::Quadrature).unwrap().unwrap();
            assert!(rel(quad, closed) < 1e-6, "{spec:?} K={k} p={p}: {quad} vs {closed}");
        }
    }

    #[test]
    fn lognormal_partial_mean_by_hand() {
        // mean-1 lognormal, σ = 2, K = 3: Φ(σ/2 − ln K/σ)
        let sigma: f64 = 2.0;
        let spec = DistributionSpec::lognormal(-0.5 * sigma * sigma, sigma).unwrap();
        let g = partial_expectation(&spec, 3.0, ImpactFunction::Identity).unwrap().unwrap();
        let z = sigma / 2.0 - 3f64.ln() / sigma;
        let expected = 0.5 * erfc(-z / std::f64::consts::SQRT_2);
        assert!((g - expected).abs() < 1e-14);
    }

    #[test]
    fn impact_json() {
        let g: ImpactFunction = serde_json::from_str(r#"{"kind":"power","exponent":2}"#).unwrap();
        assert_eq!(g, ImpactFunction::Power { exponent: 2.0 });
        let id: ImpactFunction = serde_json::from_str(r#"{"kind":"identity"}"#).unwrap();
        assert_eq!(id.exponent(), 1.0);
        assert_eq!(ImpactFunction::Power { exponent: 0.0 }.eval(0.0), 1.0);
    }

    #[test]
    fn negative_exponent_rejected() {
        let p = pareto(1.0, 2.0);
        assert!(partial_expectation(&p, 1.0, ImpactFunction::Power { exponent: -1.0 }).is_err());
    }
}
