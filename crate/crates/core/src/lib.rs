//! Tail probabilities versus tail expectations for heavy-tailed laws.
//!
//! The crate compares the exceedance probability `P_K = P(X > K)` with the
//! partial expectation `G_K = ∫_K^∞ g(x) f(x) dx`, and models what happens
//! to a Pareto quantile `K = L p^(−1/α)` when the probability `p` is itself
//! uncertain and Beta distributed.
//!
//! ```
//! use tailgap::distributions::DistributionSpec;
//! use tailgap::tail_measures::{partial_expectation, ImpactFunction};
//!
//! let pareto = DistributionSpec::pareto(1.0, 2.0)?;
//! assert_eq!(pareto.survival(2.0), 0.25);
//! let g = partial_expectation(&pareto, 2.0, ImpactFunction::Identity)?;
//! assert!((g.unwrap() - 1.0).abs() < 1e-12);
//! # Ok::<(), tailgap::Error>(())
//! ```

pub mod cli;
pub mod distributions;
pub mod error;
pub mod experiments;
pub mod extended;
pub mod output;
pub mod propagation;
pub mod quadrature;
pub mod rng;
pub mod stats;
pub mod tail_measures;

pub use distributions::{DistributionSpec, ParetoTail};
pub use error::{Error, Result};
pub use experiments::SweepTable;
pub use extended::ExtendedReal;
pub use propagation::{error_band, moment_exists, BetaErrorModel, Pushforward, PushforwardResult};
pub use rng::Seed;
pub use tail_measures::{moment_map, partial_expectation, tail_decomposition, ImpactFunction, TailDecomposition};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/tail-gap.md")]
    mod tail_gap {}
    #[doc = include_str!("../../../book/src/pushforward.md")]
    mod pushforward {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
