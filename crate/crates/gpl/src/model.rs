//! Exact likelihoods and pairwise identities.
//!
//! Under the GPL model entity `k` draws `W_k ~ Geometric(theta_k)` on
//! `{1, 2, ...}` and smaller draws rank better, so a ranking with ties is a
//! sequence of stages: at stage `j` the entities of bucket `j` jointly attain
//! the minimum latent value over the risk set `R_j` (everyone not yet
//! placed). By the memorylessness of the geometric distribution each stage
//! contributes an independent factor
//!
//! ```text
//!             prod_{k in B_j} theta_k  *  prod_{l in R_j \ B_j} (1 - theta_l)
//! P(stage j) = ---------------------------------------------------------------
//!                          1 - prod_{l in R_j} (1 - theta_l)
//! ```
//!
//! Complete rankings count stages up to the bucket at position `n - 1`; a
//! lone last entity adds no factor. Top-m rankings count stages up to the
//! bucket at position `m`, with unranked entities staying in every risk set.
//! All products of complements run in the log domain.

use crate::data::{Dataset, Ranking};
use crate::error::{GplError, Result};
use crate::numeric::{ln_1m, ln_one_minus_exp, one_minus_exp};

/// Probabilities of the three outcomes of one geometric pairwise comparison:
/// first entity ranks strictly better, tie, second strictly better. The
/// three always sum to one.
pub fn geom_pair_probs(theta_i: f64, theta_j: f64) -> Result<(f64, f64, f64)> {
    validate_theta(&[theta_i, theta_j], 2)?;
    // 1 - (1-ti)(1-tj) without cancellation
    let denom = theta_i + theta_j - theta_i * theta_j;
    Ok((
        theta_i * (1.0 - theta_j) / denom,
        theta_i * theta_j / denom,
        theta_j * (1.0 - theta_i) / denom,
    ))
}

/// Success rate of `min_k W_k`, which is itself geometric:
/// `1 - prod_k (1 - theta_k)`, in the log domain.
pub fn geom_min_rate(thetas: &[f64]) -> Result<f64> {
    if thetas.is_empty() {
        return Err(GplError::InvalidParameter(
            "geom_min_rate needs at least one theta".into(),
        ));
    }
    validate_theta(thetas, thetas.len())?;
    Ok(one_minus_exp(thetas.iter().map(|&t| ln_1m(t)).sum()))
}

/// Checks length, finiteness, and the open-closed range (0, 1].
pub fn validate_theta(theta: &[f64], k: usize) -> Result<()> {
    if theta.len() != k {
        return Err(GplError::DimensionMismatch {
            expected: k,
            got: theta.len(),
        });
    }
    for (idx, &t) in theta.iter().enumerate() {
        if !t.is_finite() || t <= 0.0 || t > 1.0 {
            return Err(GplError::InvalidParameter(format!(
                "theta[{idx}] = {t} outside (0, 1]"
            )));
        }
    }
    Ok(())
}

/// Suffix sums of `ln(1 - theta)` over a ranking's positions:
/// `out[idx] = sum_{p >= idx} ln(1 - theta[y_p])`, `out[n] = 0`.
pub(crate) fn suffix_log_complements(r: &Ranking, theta: &[f64], out: &mut Vec<f64>) {
    let n = r.len();
    out.clear();
    out.resize(n + 1, 0.0);
    for idx in (0..n).rev() {
        out[idx] = out[idx + 1] + ln_1m(theta[r.entities()[idx]]);
    }
}

fn stage_logs<F: FnMut(f64)>(r: &Ranking, theta: &[f64], suffix: &mut Vec<f64>, mut sink: F) {
    suffix_log_complements(r, theta, suffix);
    let v = r.counted_stages();
    let mut start = 0usize;
    for j in 1..=v {
        let mut end = start;
        let mut num_theta = 0.0;
        while end < r.len() && r.buckets()[end] as usize == j {
            num_theta += theta[r.entities()[end]].ln();
            end += 1;
        }
        sink(num_theta + suffix[end] - ln_one_minus_exp(suffix[start]));
        start = end;
    }
}

/// Log-probability of each counted stage of one ranking; the sum is the
/// ranking's total log-likelihood contribution.
pub fn stagewise_log_probs(r: &Ranking, theta: &[f64]) -> Result<Vec<f64>> {
    let needed = r.entities().iter().max().map_or(0, |&k| k + 1);
    if theta.len() < needed {
        return Err(GplError::DimensionMismatch {
            expected: needed,
            got: theta.len(),
        });
    }
    validate_theta(theta, theta.len())?;
    let mut out = Vec::with_capacity(r.counted_stages());
    let mut suffix = Vec::new();
    stage_logs(r, theta, &mut suffix, |v| out.push(v));
    Ok(out)
}

/// Total log-likelihood of the dataset at `theta` (one value per entity).
/// `-inf` is a legal result: it reports data that the parameter vector gives
/// probability zero, e.g. anything ranked above a theta = 1 entity.
pub fn log_likelihood(data: &Dataset, theta: &[f64]) -> Result<f64> {
    validate_theta(theta, data.num_entities())?;
    let mut suffix = Vec::new();
    let mut total = 0.0;
    for r in &data.rankings {
        stage_logs(r, theta, &mut suffix, |v| total += v);
    }
    Ok(total)
}

/// Log-likelihood of every ranking under every draw: `out[i][t]` is ranking
/// `i` under draw `t`. Rows are rankings so the matrix feeds leave-one-out
/// style evaluations directly.
pub fn pointwise_log_likelihoods<'a, I>(data: &Dataset, draws: I) -> Result<Vec<Vec<f64>>>
where
    I: IntoIterator<Item = &'a [f64]>,
{
    let mut out: Vec<Vec<f64>> = vec![Vec::new(); data.rankings.len()];
    let mut suffix = Vec::new();
    for theta in draws {
        validate_theta(theta, data.num_entities())?;
        for (i, r) in data.rankings.iter().enumerate() {
            let mut total = 0.0;
            stage_logs(r, theta, &mut suffix, |v| total += v);
            out[i].push(total);
        }
    }
    Ok(out)
}

// ---- Plackett-Luce ----

/// Log-likelihood of tie-free rankings under Plackett-Luce with positive
/// worths `lambda`: each ranked position contributes
/// `ln lambda_{y_j} - ln sum_{l >= j} lambda_{y_l}`. Ties anywhere in a
/// ranked prefix are rejected; truncated rankings keep their unranked
/// entities in every denominator. The result is invariant to rescaling
/// `lambda`.
pub fn pl_log_likelihood(data: &Dataset, lambda: &[f64]) -> Result<f64> {
    validate_lambda(lambda, data.num_entities())?;
    let mut total = 0.0;
    for r in &data.rankings {
        let n = r.len();
        let m_star = r.truncation().min(n - 1);
        for idx in 1..r.truncation() {
            if r.buckets()[idx] == r.buckets()[idx - 1] {
                return Err(GplError::IncompatibleData(
                    "Plackett-Luce requires tie-free ranked positions".into(),
                ));
            }
        }
        let mut suffix = 0.0;
        let mut denoms = vec![0.0; n + 1];
        for idx in (0..n).rev() {
            suffix += lambda[r.entities()[idx]];
            denoms[idx] = suffix;
        }
        for idx in 0..m_star {
            total += lambda[r.entities()[idx]].ln() - denoms[idx].ln();
        }
    }
    Ok(total)
}

fn validate_lambda(lambda: &[f64], k: usize) -> Result<()> {
    if lambda.len() != k {
        return Err(GplError::DimensionMismatch {
            expected: k,
            got: lambda.len(),
        });
    }
    for (idx, &l) in lambda.iter().enumerate() {
        if !l.is_finite() || l <= 0.0 {
            return Err(GplError::InvalidParameter(format!(
                "lambda[{idx}] = {l} must be positive and finite"
            )));
        }
    }
    Ok(())
}

// ---- Davidson paired comparisons ----

/// Davidson's paired-comparison model with ties: with worths `lambda_i`,
/// `lambda_j` and tie parameter `delta >= 0`,
/// `P(i beats j) = lambda_i / D`, `P(tie) = delta sqrt(lambda_i lambda_j) / D`,
/// `P(j beats i) = lambda_j / D` where `D` is their sum. `delta = 0` recovers
/// Bradley-Terry.
pub fn davidson_pair_probs(lambda_i: f64, lambda_j: f64, delta: f64) -> Result<(f64, f64, f64)> {
    for (name, v) in [("lambda_i", lambda_i), ("lambda_j", lambda_j)] {
        if !v.is_finite() || v <= 0.0 {
            return Err(GplError::InvalidParameter(format!(
                "{name} = {v} must be positive and finite"
            )));
        }
    }
    if !delta.is_finite() || delta < 0.0 {
        return Err(GplError::InvalidParameter(format!(
            "delta = {delta} must be nonnegative and finite"
        )));
    }
    let cross = delta * (lambda_i * lambda_j).sqrt();
    let denom = lambda_i + lambda_j + cross;
    Ok((lambda_i / denom, cross / denom, lambda_j / denom))
}
