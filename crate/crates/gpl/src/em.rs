//! EM algorithms for the posterior mode.
//!
//! Replacing each stage's latent minimum by its conditional expectation
//! turns the M-step into a closed form: with stage weights
//! `q_ij = 1 / (1 - prod_{l in R_ij} (1 - theta_l))` the general update is
//!
//! ```text
//! theta_k <- (a_k + w_k - 1) / (a_k + b_k + sum_i sum_{j <= v_i} delta_ijk q_ij - 2)
//! ```
//!
//! and the paired-comparison variant replaces the double sum by
//! `sum_j n_kj / P_kj` with `P_kj = 1 - (1-theta_k)(1-theta_j)`. Every
//! iteration increases the log posterior, and under Beta(1, 1) priors the
//! fixed point is the MLE.
//!
//! The two boundaries differ because only one belongs to the parameter
//! space. A numerator `a_k + w_k - 1 <= 0` pushes the mode toward 0, which
//! is outside (0, 1]; the rate is clamped to [`DEGENERATE_FLOOR`] and the
//! entity reported in `EmResult::degenerate`. A complement weight
//! `b_k + denom_k - w_k - 1 <= 0` means entity `k` won or tied every stage
//! it appeared in and the constrained maximizer is exactly 1, a legal rate,
//! so the update returns 1 with no flag.

use crate::data::{compute_suffstats, Dataset, SuffStats};
use crate::error::{GplError, Result};
use crate::gibbs::{PairedStats, PriorSpec};
use crate::model::{log_likelihood, suffix_log_complements, validate_theta};
use crate::numeric::one_minus_exp;

/// Clamping floor for modes pushed to the illegal boundary at 0.
pub const DEGENERATE_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EmVariant {
    General,
    Paired,
}

#[derive(Clone, Debug)]
pub struct EmConfig {
    pub max_iterations: usize,
    /// Stop when the mean squared parameter change falls below this.
    pub tolerance: f64,
    pub variant: EmVariant,
}

impl Default for EmConfig {
    fn default() -> Self {
        EmConfig {
            max_iterations: 10_000,
            tolerance: 1e-16,
            variant: EmVariant::General,
        }
    }
}

impl EmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(GplError::InvalidParameter(
                "max_iterations must be >= 1".into(),
            ));
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(GplError::InvalidParameter(
                "tolerance must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct EmResult {
    pub theta_hat: Vec<f64>,
    pub iterations_used: usize,
    /// Log posterior at the initial point and after every update.
    pub log_posterior_trace: Vec<f64>,
    pub converged: bool,
    /// Entities whose mode sat on a boundary and was clamped.
    pub degenerate: Vec<usize>,
}

/// Log posterior up to an additive constant: the exact log-likelihood plus
/// the unnormalized Beta log-prior `sum_k (a_k-1) ln theta_k + (b_k-1) ln(1-theta_k)`.
pub fn log_posterior(d: &Dataset, prior: &PriorSpec, theta: &[f64]) -> Result<f64> {
    Ok(log_likelihood(d, theta)? + log_prior(prior, theta))
}

/// Paired-data counterpart of [`log_posterior`], computed from the pairwise
/// sufficient statistics alone. Equals the general form on the same data.
pub fn paired_log_posterior(ps: &PairedStats, prior: &PriorSpec, theta: &[f64]) -> Result<f64> {
    validate_theta(theta, ps.num_entities())?;
    let mut total = 0.0;
    for (k, &t) in theta.iter().enumerate() {
        total += ps.win_tie[k] as f64 * t.ln();
        if ps.losses[k] > 0 {
            total += ps.losses[k] as f64 * (1.0 - t).ln();
        }
    }
    for &(i, j, n) in &ps.pairs {
        total -= n as f64 * (theta[i] + theta[j] - theta[i] * theta[j]).ln();
    }
    Ok(total + log_prior(prior, theta))
}

fn log_prior(prior: &PriorSpec, theta: &[f64]) -> f64 {
    // skip zero coefficients: 0 * ln(0) must contribute nothing, not NaN
    let mut total = 0.0;
    for (k, &t) in theta.iter().enumerate() {
        let (ca, cb) = (prior.a()[k] - 1.0, prior.b()[k] - 1.0);
        if ca != 0.0 {
            total += ca * t.ln();
        }
        if cb != 0.0 {
            total += cb * (1.0 - t).ln();
        }
    }
    total
}

/// Expected-latent denominator sums for the general update: `denom[k] =
/// sum_i sum_{j <= min(s_ik, v_i)} q_ij`.
fn general_denominators(
    d: &Dataset,
    stats: &SuffStats,
    theta: &[f64],
    denom: &mut [f64],
    suffix: &mut Vec<f64>,
    prefix_q: &mut Vec<f64>,
) {
    denom.iter_mut().for_each(|v| *v = 0.0);
    for (i, r) in d.rankings.iter().enumerate() {
        let v = stats.stage_count(i);
        suffix_log_complements(r, theta, suffix);
        prefix_q.clear();
        prefix_q.push(0.0);
        for j in 1..=v {
            let rate = one_minus_exp(suffix[stats.stage_start(i, j)]);
            prefix_q.push(prefix_q[j - 1] + 1.0 / rate);
        }
        for (idx, &k) in r.entities().iter().enumerate() {
            let s = r.buckets()[idx] as usize;
            denom[k] += prefix_q[s.min(v)];
        }
    }
}

fn update_theta(
    prior: &PriorSpec,
    w: &[u64],
    denom: &[f64],
    theta: &mut [f64],
    degenerate: &mut Vec<usize>,
) -> f64 {
    let mut sq_change = 0.0;
    for k in 0..theta.len() {
        let num = prior.a()[k] + w[k] as f64 - 1.0;
        let complement_weight = prior.b()[k] + denom[k] - w[k] as f64 - 1.0;
        let new = if num <= 0.0 {
            if !degenerate.contains(&k) {
                degenerate.push(k);
            }
            DEGENERATE_FLOOR
        } else if complement_weight <= 0.0 {
            1.0
        } else {
            num / (num + complement_weight)
        };
        let delta = new - theta[k];
        sq_change += delta * delta;
        theta[k] = new;
    }
    sq_change / theta.len() as f64
}

/// EM on arbitrary rankings. `init` must be strictly inside (0, 1)^K.
pub fn em_fit_general(
    d: &Dataset,
    prior: &PriorSpec,
    cfg: &EmConfig,
    init: &[f64],
) -> Result<EmResult> {
    cfg.validate()?;
    let k = d.num_entities();
    check_init(k, prior, init)?;
    let stats = compute_suffstats(d);
    let mut theta = init.to_vec();
    let mut denom = vec![0.0; k];
    let (mut suffix, mut prefix) = (Vec::new(), Vec::new());
    let mut degenerate = Vec::new();
    let mut trace = vec![log_posterior(d, prior, &theta)?];
    let mut iterations_used = 0;
    let mut converged = false;
    for _ in 0..cfg.max_iterations {
        general_denominators(d, &stats, &theta, &mut denom, &mut suffix, &mut prefix);
        let msd = update_theta(prior, &stats.w, &denom, &mut theta, &mut degenerate);
        iterations_used += 1;
        trace.push(log_posterior(d, prior, &theta)?);
        if msd < cfg.tolerance {
            converged = true;
            break;
        }
    }
    degenerate.sort_unstable();
    Ok(EmResult {
        theta_hat: theta,
        iterations_used,
        log_posterior_trace: trace,
        converged,
        degenerate,
    })
}

/// EM on paired-comparison sufficient statistics; same fixed point as
/// [`em_fit_general`] on the equivalent dataset.
pub fn em_fit_paired(
    ps: &PairedStats,
    prior: &PriorSpec,
    cfg: &EmConfig,
    init: &[f64],
) -> Result<EmResult> {
    cfg.validate()?;
    let k = ps.num_entities();
    check_init(k, prior, init)?;
    let mut theta = init.to_vec();
    let mut denom = vec![0.0; k];
    let mut degenerate = Vec::new();
    let mut trace = vec![paired_log_posterior(ps, prior, &theta)?];
    let mut iterations_used = 0;
    let mut converged = false;
    for _ in 0..cfg.max_iterations {
        denom.iter_mut().for_each(|v| *v = 0.0);
        for &(i, j, n) in &ps.pairs {
            let q = n as f64 / (theta[i] + theta[j] - theta[i] * theta[j]);
            denom[i] += q;
            denom[j] += q;
        }
        let msd = update_theta(prior, &ps.win_tie, &denom, &mut theta, &mut degenerate);
        iterations_used += 1;
        trace.push(paired_log_posterior(ps, prior, &theta)?);
        if msd < cfg.tolerance {
            converged = true;
            break;
        }
    }
    degenerate.sort_unstable();
    Ok(EmResult {
        theta_hat: theta,
        iterations_used,
        log_posterior_trace: trace,
        converged,
        degenerate,
    })
}

/// Dispatches on `cfg.variant`; the paired variant requires paired data.
pub fn em_fit(d: &Dataset, prior: &PriorSpec, cfg: &EmConfig, init: &[f64]) -> Result<EmResult> {
    match cfg.variant {
        EmVariant::General => em_fit_general(d, prior, cfg, init),
        EmVariant::Paired => em_fit_paired(&PairedStats::from_dataset(d)?, prior, cfg, init),
    }
}

fn check_init(k: usize, prior: &PriorSpec, init: &[f64]) -> Result<()> {
    if prior.len() != k {
        return Err(GplError::DimensionMismatch {
            expected: k,
            got: prior.len(),
        });
    }
    if init.len() != k {
        return Err(GplError::DimensionMismatch {
            expected: k,
            got: init.len(),
        });
    }
    for (idx, &t) in init.iter().enumerate() {
        if !(t > 0.0 && t < 1.0) {
            return Err(GplError::InvalidParameter(format!(
                "init[{idx}] = {t} outside the open interval (0, 1)"
            )));
        }
    }
    Ok(())
}
