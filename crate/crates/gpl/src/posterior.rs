//! Posterior summaries and chain diagnostics.
//!
//! Summaries are per-entity: draw means, equal-tailed 95% credible
//! intervals from interpolated empirical quantiles, effective sample sizes
//! from the initial-positive-sequence autocorrelation estimator (per-chain
//! autocovariances averaged across chains), and the classical multi-chain
//! potential scale reduction factor. Order aggregation ranks entities by
//! posterior mean, or exhaustively maximizes the posterior-averaged
//! probability of a tie-free total order for small entity sets.

use rayon::prelude::*;

use crate::data::Direction;
use crate::error::{GplError, Result};
use crate::gibbs::PosteriorSamples;
use crate::model::validate_theta;
use crate::numeric::{ln_1m, one_minus_exp};

#[derive(Clone, Debug)]
pub struct PosteriorSummary {
    pub labels: Vec<String>,
    pub mean: Vec<f64>,
    pub ci_low: Vec<f64>,
    pub ci_high: Vec<f64>,
    /// `None` marks an undefined estimate (all draws identical).
    pub ess: Vec<Option<f64>>,
    /// `None` when fewer than two chains were run.
    pub psrf: Vec<Option<f64>>,
}

/// Interpolated empirical quantile (the common linear order-statistic rule):
/// at probability `p`, position `h = (n-1)p` interpolates between the
/// neighboring sorted values. `sorted` must be non-empty and ascending.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn chain_autocovariance(chain: &[f64], mean: f64, lag: usize) -> f64 {
    let n = chain.len();
    let mut acc = 0.0;
    for i in 0..n - lag {
        acc += (chain[i] - mean) * (chain[i + lag] - mean);
    }
    acc / n as f64
}

/// Effective sample size of one quantity observed in one or more chains of
/// equal length. Per-chain autocovariances are averaged, consecutive
/// autocorrelations are paired, and the sum truncates at the first
/// non-positive pair. Returns `None` when the draws carry no variance.
pub fn ess_from_chains(chains: &[&[f64]]) -> Option<f64> {
    let n = chains.first()?.len();
    if n == 0 {
        return None;
    }
    let means: Vec<f64> = chains
        .iter()
        .map(|c| c.iter().sum::<f64>() / c.len() as f64)
        .collect();
    let avg_gamma = |lag: usize| -> f64 {
        chains
            .iter()
            .zip(&means)
            .map(|(c, &m)| chain_autocovariance(c, m, lag))
            .sum::<f64>()
            / chains.len() as f64
    };
    let gamma0 = avg_gamma(0);
    if gamma0 <= 0.0 {
        return None;
    }
    let rho = |lag: usize| -> f64 {
        if lag >= n {
            0.0
        } else {
            avg_gamma(lag) / gamma0
        }
    };
    let mut tau = -1.0;
    let mut lag = 0;
    while lag < n {
        let pair = rho(lag) + rho(lag + 1);
        if pair <= 0.0 {
            break;
        }
        tau += 2.0 * pair;
        lag += 2;
    }
    let total = (chains.len() * n) as f64;
    Some(total / tau.max(f64::MIN_POSITIVE))
}

/// Potential scale reduction factor over two or more equal-length chains:
/// the square root of the pooled-variance estimate over the mean
/// within-chain variance. Near 1 indicates the chains are mixing over the
/// same distribution.
pub fn psrf_from_chains(chains: &[&[f64]]) -> Result<f64> {
    let m = chains.len();
    if m < 2 {
        return Err(GplError::InvalidParameter(
            "PSRF needs at least two chains".into(),
        ));
    }
    let n = chains[0].len();
    if n < 2 {
        return Err(GplError::InvalidParameter(
            "PSRF needs at least two draws per chain".into(),
        ));
    }
    let means: Vec<f64> = chains
        .iter()
        .map(|c| c.iter().sum::<f64>() / n as f64)
        .collect();
    let grand = means.iter().sum::<f64>() / m as f64;
    let b_over_n = means
        .iter()
        .map(|&x| (x - grand) * (x - grand))
        .sum::<f64>()
        / (m - 1) as f64;
    let w = chains
        .iter()
        .zip(&means)
        .map(|(c, &mu)| c.iter().map(|&x| (x - mu) * (x - mu)).sum::<f64>() / (n - 1) as f64)
        .sum::<f64>()
        / m as f64;
    if w == 0.0 {
        return Ok(if b_over_n == 0.0 { 1.0 } else { f64::INFINITY });
    }
    let v_hat = (n - 1) as f64 / n as f64 * w + (1.0 + 1.0 / m as f64) * b_over_n;
    Ok((v_hat / w).sqrt())
}

/// Per-entity means, 95% credible intervals, ESS, and (with two or more
/// chains) PSRF. Requires at least 10 retained draws in total.
pub fn summarize(samples: &PosteriorSamples) -> Result<PosteriorSummary> {
    let total = samples.total_draws();
    if total < 10 {
        return Err(GplError::InvalidParameter(format!(
            "summaries need at least 10 retained draws, got {total}"
        )));
    }
    let k = samples.num_entities();
    let m = samples.num_chains();
    let n = samples.draws_per_chain();

    type EntityStats = (f64, f64, f64, Option<f64>, Option<f64>);
    let per_entity: Vec<EntityStats> = (0..k)
        .into_par_iter()
        .map(|e| {
            let chains: Vec<Vec<f64>> = (0..m)
                .map(|c| (0..n).map(|t| samples.value(c, t, e)).collect())
                .collect();
            let views: Vec<&[f64]> = chains.iter().map(|c| c.as_slice()).collect();
            let mut all: Vec<f64> = chains.iter().flatten().copied().collect();
            let mean = all.iter().sum::<f64>() / total as f64;
            all.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let lo = quantile(&all, 0.025);
            let hi = quantile(&all, 0.975);
            let ess = ess_from_chains(&views);
            let psrf = if m >= 2 {
                psrf_from_chains(&views).ok()
            } else {
                None
            };
            (mean, lo, hi, ess, psrf)
        })
        .collect();

    let mut s = PosteriorSummary {
        labels: samples.labels().to_vec(),
        mean: Vec::with_capacity(k),
        ci_low: Vec::with_capacity(k),
        ci_high: Vec::with_capacity(k),
        ess: Vec::with_capacity(k),
        psrf: Vec::with_capacity(k),
    };
    for (mean, lo, hi, ess, psrf) in per_entity {
        s.mean.push(mean);
        s.ci_low.push(lo);
        s.ci_high.push(hi);
        s.ess.push(ess);
        s.psrf.push(psrf);
    }
    Ok(s)
}

/// Probability that each field member is the sole first-place finisher:
/// `p_k = theta_k prod_{i != k} (1 - theta_i) / (1 - prod_j (1 - theta_j))`.
/// Results align with `field`; the shortfall from 1 is the probability of a
/// tied first place.
pub fn first_place_prob(theta: &[f64], field: &[usize]) -> Result<Vec<f64>> {
    validate_field(field, theta.len())?;
    validate_theta(theta, theta.len())?;
    let q = field.len();
    // prefix/suffix sums of ln(1-theta) over the field avoid subtracting
    // -inf when some theta is 1
    let logs: Vec<f64> = field.iter().map(|&k| ln_1m(theta[k])).collect();
    let mut prefix = vec![0.0; q + 1];
    for i in 0..q {
        prefix[i + 1] = prefix[i] + logs[i];
    }
    let mut suffix = vec![0.0; q + 1];
    for i in (0..q).rev() {
        suffix[i] = suffix[i + 1] + logs[i];
    }
    let denom = one_minus_exp(prefix[q]);
    Ok(field
        .iter()
        .enumerate()
        .map(|(i, &k)| theta[k] * (prefix[i] + suffix[i + 1]).exp() / denom)
        .collect())
}

/// Draw-averaged [`first_place_prob`].
pub fn posterior_first_place(samples: &PosteriorSamples, field: &[usize]) -> Result<Vec<f64>> {
    validate_field(field, samples.num_entities())?;
    let mut acc = vec![0.0; field.len()];
    for draw in samples.draws_iter() {
        for (a, p) in acc.iter_mut().zip(first_place_prob(draw, field)?) {
            *a += p;
        }
    }
    let n = samples.total_draws() as f64;
    for a in &mut acc {
        *a /= n;
    }
    Ok(acc)
}

/// Entities of `subset` ordered best first by posterior mean: descending
/// means for the standard model, ascending for the reverse model (where
/// small rates are strong). Equal means break by ascending entity id.
pub fn aggregate_total_order(
    summary: &PosteriorSummary,
    subset: &[usize],
    direction: Direction,
) -> Result<Vec<usize>> {
    validate_field(subset, summary.mean.len())?;
    let mut order = subset.to_vec();
    order.sort_by(|&x, &y| {
        let (mx, my) = (summary.mean[x], summary.mean[y]);
        let primary = match direction {
            Direction::Standard => my.partial_cmp(&mx).unwrap(),
            Direction::Reverse => mx.partial_cmp(&my).unwrap(),
        };
        primary.then(x.cmp(&y))
    });
    Ok(order)
}

fn permutations_lex(items: &[usize]) -> Vec<Vec<usize>> {
    let mut sorted = items.to_vec();
    sorted.sort_unstable();
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(sorted.len());
    let mut used = vec![false; sorted.len()];
    fn recurse(
        sorted: &[usize],
        used: &mut [bool],
        current: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if current.len() == sorted.len() {
            out.push(current.clone());
            return;
        }
        for i in 0..sorted.len() {
            if !used[i] {
                used[i] = true;
                current.push(sorted[i]);
                recurse(sorted, used, current, out);
                current.pop();
                used[i] = false;
            }
        }
    }
    recurse(&sorted, &mut used, &mut current, &mut out);
    out
}

/// Probability under `theta` that the strict order `order` (best first in
/// standard reading) is realized with no ties among its entities.
fn strict_order_prob(theta: &[f64], order: &[usize]) -> f64 {
    let q = order.len();
    let mut tail = vec![1.0; q + 1];
    for i in (0..q).rev() {
        tail[i] = tail[i + 1] * (1.0 - theta[order[i]]);
    }
    let mut prob = 1.0;
    for j in 0..q.saturating_sub(1) {
        prob *= theta[order[j]] * tail[j + 1] / (1.0 - tail[j]);
    }
    prob
}

/// The total order of `subset` (at most 8 entities) maximizing the average
/// over posterior draws of the probability that the order is realized
/// tie-free. Under the reverse model an order is realized when the reversed
/// sequence is realized in the standard reading, so candidate orders are
/// scored on their reversal. Score ties break toward the lexicographically
/// smallest id sequence.
pub fn exhaustive_modal_order(
    samples: &PosteriorSamples,
    subset: &[usize],
    direction: Direction,
) -> Result<Vec<usize>> {
    validate_field(subset, samples.num_entities())?;
    if subset.len() > 8 {
        return Err(GplError::InvalidParameter(format!(
            "exhaustive order search is capped at 8 entities, got {}",
            subset.len()
        )));
    }
    let perms = permutations_lex(subset);
    let scored: Vec<Vec<usize>> = perms
        .iter()
        .map(|p| match direction {
            Direction::Standard => p.clone(),
            Direction::Reverse => p.iter().rev().copied().collect(),
        })
        .collect();

    let draws: Vec<&[f64]> = samples.draws_iter().collect();
    let sums: Vec<f64> = draws
        .par_iter()
        .fold(
            || vec![0.0; perms.len()],
            |mut acc, draw| {
                for (a, order) in acc.iter_mut().zip(&scored) {
                    *a += strict_order_prob(draw, order);
                }
                acc
            },
        )
        .reduce(
            || vec![0.0; perms.len()],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );

    let mut best = 0;
    for i in 1..perms.len() {
        if sums[i] > sums[best] {
            best = i;
        }
    }
    Ok(perms[best].clone())
}

fn validate_field(field: &[usize], k: usize) -> Result<()> {
    if field.is_empty() {
        return Err(GplError::InvalidParameter(
            "entity set must be non-empty".into(),
        ));
    }
    let mut seen = std::collections::HashSet::new();
    for &id in field {
        if id >= k {
            return Err(GplError::InvalidParameter(format!(
                "entity id {id} out of range (have {k})"
            )));
        }
        if !seen.insert(id) {
            return Err(GplError::InvalidParameter(format!(
                "entity id {id} repeated in entity set"
            )));
        }
    }
    Ok(())
}
