//! Parameter sweeps that reproduce qualitative claims about tail
//! probabilities and tail expectations, each with a pass/fail verdict.
//!
//! Every sweep is a pure function of its arguments and seed. Replications run
//! in parallel on per-replication streams and are assembled by index.

use indexmap::IndexMap;
use rand_distr::{Beta, Distribution as _};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::DistributionSpec;
use crate::error::{Error, Result};
use crate::propagation::BetaErrorModel;
use crate::rng::{self, Seed};
use crate::stats;
use crate::tail_measures::{partial_expectation, ImpactFunction};

/// Bet counts reported by [`sum_of_bets`].
pub const BET_COUNTS: [usize; 5] = [1, 2, 5, 10, 30];
/// Bound on |skewness| and |excess kurtosis| for the CLT verdict.
pub const CLT_MOMENT_BOUND: f64 = 0.15;
/// Relative change allowed between the last two checkpoints of a converging mean.
pub const STABILIZATION_TOL: f64 = 0.05;
/// Tail index of the finite-mean control in [`nonconvergence_demo`].
pub const CONTROL_TAIL_INDEX: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub parameter_value: f64,
    pub metrics: IndexMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub pass: bool,
    pub reason: String,
}

/// Tabular sweep output. Rows are ordered by parameter value and share the
/// same metric names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub parameter_name: String,
    pub rows: Vec<SweepRow>,
    pub verdict: Verdict,
}

impl SweepTable {
    pub fn metric_names(&self) -> Vec<&str> {
        self.rows
            .first()
            .map(|r| r.metrics.keys().map(String::as_str).collect())
            .unwrap_or_default()
    }

    /// Values of one metric down the rows.
    pub fn column(&self, name: &str) -> Vec<f64> {
        self.rows.iter().map(|r| r.metrics[name]).collect()
    }

    pub fn parameters(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.parameter_value).collect()
    }
}

fn row(parameter_value: f64, metrics: &[(&str, f64)]) -> SweepRow {
    SweepRow {
        parameter_value,
        metrics: metrics.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
    }
}

fn strictly_increasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[0] < w[1])
}

fn strictly_decreasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[0] > w[1])
}

/// Mean-one lognormal with log-scale `sigma`.
pub fn mean_one_lognormal(sigma: f64) -> Result<DistributionSpec> {
    DistributionSpec::lognormal(-0.5 * sigma * sigma, sigma)
}

fn lognormal_skewness(sigma: f64) -> f64 {
    let e = (sigma * sigma).exp();
    (e + 2.0) * (e - 1.0).sqrt()
}

/// Exceedance probability and tail expectation of a mean-one lognormal as
/// its skewness grows.
///
/// Only `σ > √(2 ln K)` qualifies: there `P_K` falls with σ. The verdict
/// passes when, on that sub-grid, `P_K` strictly decreases while `G_K`
/// strictly increases.
pub fn skewness_sweep(k: f64, sigma_grid: &[f64]) -> Result<SweepTable> {
    if !(k > 1.0 && k.is_finite()) {
        return Err(Error::Domain(format!("threshold must exceed 1, got {k}")));
    }
    if sigma_grid.iter().any(|s| !(*s > 0.0 && s.is_finite())) || !strictly_increasing(sigma_grid) {
        return Err(Error::Domain("sigma grid must be positive and strictly ascending".into()));
    }
    let cutoff = (2.0 * k.ln()).sqrt();
    let mut rows = Vec::with_capacity(sigma_grid.len());
    for &sigma in sigma_grid {
        let spec = mean_one_lognormal(sigma)?;
        let p_k = spec.survival(k);
        let g_k = partial_expectation(&spec, k, ImpactFunction::Identity)?.unwrap();
        rows.push(row(
            sigma,
            &[
                ("p_k", p_k),
                ("g_k", g_k),
                ("skewness", lognormal_skewness(sigma)),
                ("qualifies", f64::from(u8::from(sigma > cutoff))),
            ],
        ));
    }
    let region: Vec<&SweepRow> = rows.iter().filter(|r| r.metrics["qualifies"] == 1.0).collect();
    if region.len() < 2 {
        return Err(Error::DegenerateGrid(format!(
            "{} grid point(s) above sigma = sqrt(2 ln K) = {cutoff:.6}; need at least 2",
            region.len()
        )));
    }
    let p: Vec<f64> = region.iter().map(|r| r.metrics["p_k"]).collect();
    let g: Vec<f64> = region.iter().map(|r| r.metrics["g_k"]).collect();
    let (p_dec, g_inc) = (strictly_decreasing(&p), strictly_increasing(&g));
    let verdict = Verdict {
        pass: p_dec && g_inc,
        reason: format!(
            "on sigma > {cutoff:.6} ({} points): P_K strictly decreasing = {p_dec}, G_K strictly increasing = {g_inc}",
            region.len()
        ),
    };
    Ok(SweepTable {
        parameter_name: "sigma".into(),
        rows,
        verdict,
    })
}

fn uniformity_table(u: Vec<f64>, n: usize, label: &str) -> SweepTable {
    let d = stats::ks_uniform(u);
    let critical = stats::ks_critical_001(n);
    let pass = d < critical;
    SweepTable {
        parameter_name: "n".into(),
        rows: vec![row(n as f64, &[("ks_statistic", d), ("critical_value", critical)])],
        verdict: Verdict {
            pass,
            reason: format!(
                "{label}: KS {d:.6} {} critical value 1.63/sqrt(n) = {critical:.6}",
                if pass { "<" } else { ">=" }
            ),
        },
    }
}

/// Probability integral transform: `u_i = survival(X_i)` should be
/// Uniform(0, 1). Passes when the KS statistic is below `1.63/√n`.
pub fn pit_check(spec: &DistributionSpec, seed: Seed, n: usize) -> Result<SweepTable> {
    spec.validate()?;
    if n < 10_000 {
        return Err(Error::Domain(format!("pit_check needs n >= 10^4, got {n}")));
    }
    let u: Vec<f64> = spec.sample(seed, n).into_iter().map(|x| spec.survival(x)).collect();
    Ok(uniformity_table(u, n, "survival-transformed samples"))
}

/// Negative control for [`pit_check`]: Beta(2, 2) draws in place of the
/// transformed sample. Expected to fail.
pub fn pit_control(seed: Seed, n: usize) -> Result<SweepTable> {
    if n < 10_000 {
        return Err(Error::Domain(format!("pit_control needs n >= 10^4, got {n}")));
    }
    let beta = Beta::new(2.0, 2.0).expect("valid beta");
    let mut u = Vec::with_capacity(n);
    for (stream, count) in rng::shards(n) {
        let mut r = seed.stream(stream);
        u.extend((0..count).map(|_| beta.sample(&mut r)));
    }
    Ok(uniformity_table(u, n, "Beta(2,2) control"))
}

const BET_BLOCK: usize = 4096;

fn bet_sums(beta: &Beta<f64>, m: usize, seed: Seed, replications: usize) -> Vec<f64> {
    let blocks: Vec<(u64, usize)> = (0..replications.div_ceil(BET_BLOCK))
        .map(|i| (i as u64, BET_BLOCK.min(replications - i * BET_BLOCK)))
        .collect();
    blocks
        .par_iter()
        .map(|&(stream, count)| {
            let mut r = seed.stream(stream);
            (0..count)
                .map(|_| (0..m).map(|_| beta.sample(&mut r)).sum::<f64>())
                .collect::<Vec<f64>>()
        })
        .collect::<Vec<_>>()
        .concat()
}

/// Skewness and excess kurtosis of sums of `m` independent Beta bets.
///
/// Rows cover the bet counts in [`BET_COUNTS`] up to `m`, plus `m`. The
/// verdict passes when the largest count has smaller |excess kurtosis| than
/// a single bet and both of its moment ratios lie within ±0.15.
pub fn sum_of_bets(model: &BetaErrorModel, m: usize, seed: Seed, replications: usize) -> Result<SweepTable> {
    if m < 2 {
        return Err(Error::Domain(format!("need at least 2 bets, got {m}")));
    }
    if replications < 10_000 {
        return Err(Error::Domain(format!("need at least 10^4 replications, got {replications}")));
    }
    let beta = Beta::new(model.a(), model.b()).expect("validated beta parameters");
    let mut counts: Vec<usize> = BET_COUNTS.iter().copied().filter(|&c| c < m).collect();
    counts.push(m);
    let rows: Vec<SweepRow> = counts
        .iter()
        .map(|&c| {
            let sums = bet_sums(&beta, c, seed.derive(c as u64), replications);
            let mo = stats::moments(&sums);
            row(
                c as f64,
                &[
                    ("mean", mo.mean),
                    ("variance", mo.variance),
                    ("skewness", mo.skewness),
                    ("excess_kurtosis", mo.excess_kurtosis),
                ],
            )
        })
        .collect();
    let first = &rows[0].metrics;
    let last = &rows[rows.len() - 1].metrics;
    let (k1, km, sm) = (first["excess_kurtosis"], last["excess_kurtosis"], last["skewness"]);
    let shrinks = km.abs() < k1.abs();
    let bounded = km.abs() < CLT_MOMENT_BOUND && sm.abs() < CLT_MOMENT_BOUND;
    Ok(SweepTable {
        parameter_name: "bets".into(),
        verdict: Verdict {
            pass: shrinks && bounded,
            reason: format!(
                "m={m}: |excess kurtosis| {:.4} vs {:.4} at m=1; |skewness| {:.4}; bound {CLT_MOMENT_BOUND}",
                km.abs(),
                k1.abs(),
                sm.abs()
            ),
        },
        rows,
    })
}

/// Running means of Pareto samples at each checkpoint, one vector per
/// replication.
fn running_means(spec: &DistributionSpec, checkpoints: &[usize], seed: Seed, replications: usize) -> Vec<Vec<f64>> {
    let last = *checkpoints.last().expect("nonempty checkpoints");
    (0..replications)
        .into_par_iter()
        .map(|rep| {
            let mut r = seed.stream(rep as u64);
            let mut sum = 0.0;
            let mut out = Vec::with_capacity(checkpoints.len());
            let mut next = checkpoints.iter().peekable();
            for i in 1..=last {
                sum += spec.draw(&mut r);
                if next.peek() == Some(&&i) {
                    out.push(sum / i as f64);
                    next.next();
                }
            }
            out
        })
        .collect()
}

fn medians(per_rep: &[Vec<f64>], n_checkpoints: usize) -> Vec<f64> {
    (0..n_checkpoints)
        .map(|j| {
            let mut col: Vec<f64> = per_rep.iter().map(|r| r[j]).collect();
            stats::median(&mut col)
        })
        .collect()
}

fn stabilizes(m: &[f64]) -> bool {
    match m {
        [.., prev, last] => (last / prev - 1.0).abs() <= STABILIZATION_TOL,
        _ => false,
    }
}

/// Median running means of Pareto samples at growing sample sizes, with a
/// finite-mean control at α = 3.
///
/// For α < 1 the verdict requires the median to grow strictly across all
/// checkpoints; for α ≥ 1 it requires stabilization. The control must
/// stabilize (last two checkpoints within 5%) in either case.
pub fn nonconvergence_demo(
    alpha: f64,
    scale: f64,
    checkpoints: &[usize],
    seed: Seed,
    replications: usize,
) -> Result<SweepTable> {
    let spec = DistributionSpec::pareto(scale, alpha)?;
    let control = DistributionSpec::pareto(scale, CONTROL_TAIL_INDEX)?;
    if checkpoints.len() < 2 || checkpoints[0] == 0 || checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain(
            "checkpoints must be at least two positive, strictly ascending counts".into(),
        ));
    }
    if replications == 0 {
        return Err(Error::Domain("need at least one replication".into()));
    }
    let headline = medians(&running_means(&spec, checkpoints, seed.derive(0), replications), checkpoints.len());
    let ctrl = medians(&running_means(&control, checkpoints, seed.derive(1), replications), checkpoints.len());

    let headline_ok = if alpha < 1.0 {
        strictly_increasing(&headline)
    } else {
        stabilizes(&headline)
    };
    let control_ok = stabilizes(&ctrl);
    let mut reason = format!(
        "alpha={alpha}: median running mean {} = {headline_ok}; control alpha={CONTROL_TAIL_INDEX} stabilizes within {}% = {control_ok}",
        if alpha < 1.0 { "strictly increasing" } else { "stabilizes" },
        STABILIZATION_TOL * 100.0
    );
    if replications == 1 {
        reason.push_str("; low confidence: single replication");
    }
    let rows = checkpoints
        .iter()
        .zip(headline.iter().zip(&ctrl))
        .map(|(&n, (&h, &c))| row(n as f64, &[("median_running_mean", h), ("control_median_running_mean", c)]))
        .collect();
    Ok(SweepTable {
        parameter_name: "samples".into(),
        rows,
        verdict: Verdict {
            pass: headline_ok && control_ok,
            reason,
        },
    })
}

/// `K = L p^(−1/α)` and its sensitivity `|dK/dp| = (L/α) p^(−1/α−1)` for
/// every `(α, p)` pair. Rows are ordered by `p`, then `α`.
pub fn amplification_curve(scale: f64, alpha_list: &[f64], p_grid: &[f64]) -> Result<SweepTable> {
    if alpha_list.is_empty() || p_grid.is_empty() {
        return Err(Error::Domain("alpha list and p grid must be nonempty".into()));
    }
    if !(scale > 0.0 && scale.is_finite()) || alpha_list.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
        return Err(Error::InvalidParameter("scale and tail indices must be positive".into()));
    }
    if p_grid.iter().any(|p| !(*p > 0.0 && *p < 1.0)) {
        return Err(Error::Domain("p grid values must lie in (0, 1)".into()));
    }
    let mut ps = p_grid.to_vec();
    ps.sort_by(f64::total_cmp);
    ps.dedup();
    let mut alphas = alpha_list.to_vec();
    alphas.sort_by(f64::total_cmp);
    alphas.dedup();

    let amp = |alpha: f64, p: f64| scale / alpha * p.powf(-1.0 / alpha - 1.0);
    let mut rows = Vec::with_capacity(ps.len() * alphas.len());
    for &p in &ps {
        for &alpha in &alphas {
            rows.push(row(
                p,
                &[
                    ("alpha", alpha),
                    ("k", scale * p.powf(-1.0 / alpha)),
                    ("amplification", amp(alpha, p)),
                ],
            ));
        }
    }
    // Both grids are ascending: amplification must fall along p and along α.
    let along_p = alphas
        .iter()
        .all(|&a| strictly_decreasing(&ps.iter().map(|&p| amp(a, p)).collect::<Vec<_>>()));
    let along_alpha = ps
        .iter()
        .all(|&p| strictly_decreasing(&alphas.iter().map(|&a| amp(a, p)).collect::<Vec<_>>()));
    Ok(SweepTable {
        parameter_name: "p".into(),
        rows,
        verdict: Verdict {
            pass: along_p && along_alpha,
            reason: format!(
                "|dK/dp| increases as p decreases = {along_p}; increases as alpha decreases = {along_alpha}"
            ),
        },
    })
}
