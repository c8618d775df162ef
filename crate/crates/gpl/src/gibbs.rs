//! Data-augmented Gibbs samplers for the posterior over success rates.
//!
//! Both samplers alternate two exact conditional draws. The general sampler
//! augments each counted stage of each ranking with the stage's minimum
//! latent value `Z_ij ~ Geometric(1 - prod_{l in R_ij} (1 - theta_l))`; given
//! those, every `theta_k` is conditionally `Beta(a_k + w_k, b_k + zeta_k -
//! w_k)` where `zeta_k` sums the `z_ij` of stages whose risk set contains
//! `k`. The paired sampler aggregates per unordered pair instead: with
//! `n_ij` comparisons between `i` and `j`, their latent total is negative
//! binomial with `n_ij` successes at rate `1 - (1-theta_i)(1-theta_j)`, and
//! `xi_i` sums the totals over the entity's pairs. Both target the same
//! posterior on paired data.
//!
//! Chains are deterministic given the seed: chain `c` draws from the
//! substream `(seed, CHAIN_STREAM_BASE + c)` and chains never share state,
//! so results do not depend on thread count or scheduling.

use rand::Rng;
use rayon::prelude::*;

use crate::data::{compute_suffstats, Dataset, SuffStats};
use crate::error::{GplError, Result};
use crate::model::suffix_log_complements;
use crate::numeric::one_minus_exp;
use crate::sampling::{
    sample_beta, sample_geometric, sample_negative_binomial, substream, CHAIN_STREAM_BASE,
};

/// Independent Beta(a_k, b_k) priors, one pair per entity.
#[derive(Clone, Debug, PartialEq)]
pub struct PriorSpec {
    a: Vec<f64>,
    b: Vec<f64>,
}

impl PriorSpec {
    /// Beta(1, 1) for every entity; the MAP under this prior is the MLE.
    pub fn uniform(k: usize) -> Self {
        PriorSpec {
            a: vec![1.0; k],
            b: vec![1.0; k],
        }
    }

    /// The same Beta(a, b) for every entity.
    pub fn constant(k: usize, a: f64, b: f64) -> Result<Self> {
        Self::per_entity(vec![a; k], vec![b; k])
    }

    pub fn per_entity(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.len() != b.len() {
            return Err(GplError::DimensionMismatch {
                expected: a.len(),
                got: b.len(),
            });
        }
        for (idx, (&ak, &bk)) in a.iter().zip(&b).enumerate() {
            if !(ak > 0.0 && ak.is_finite() && bk > 0.0 && bk.is_finite()) {
                return Err(GplError::InvalidParameter(format!(
                    "prior for entity {idx} must be positive and finite, got ({ak}, {bk})"
                )));
            }
        }
        Ok(PriorSpec { a, b })
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SamplerKind {
    General,
    PairedNegBin,
}

impl SamplerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SamplerKind::General => "general",
            SamplerKind::PairedNegBin => "paired-negbin",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "general" => Ok(SamplerKind::General),
            "paired" | "paired-negbin" => Ok(SamplerKind::PairedNegBin),
            other => Err(GplError::InvalidParameter(format!(
                "unknown sampler '{other}' (expected 'general' or 'paired')"
            ))),
        }
    }
}

impl std::fmt::Display for SamplerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GibbsConfig {
    /// Retained draws per chain, after burn-in.
    pub iterations: usize,
    /// Leading draws discarded from each chain.
    pub burnin: usize,
    pub chains: usize,
    pub seed: u64,
    pub sampler: SamplerKind,
}

impl Default for GibbsConfig {
    fn default() -> Self {
        GibbsConfig {
            iterations: 10_000,
            burnin: 10,
            chains: 4,
            seed: 1,
            sampler: SamplerKind::General,
        }
    }
}

impl GibbsConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(GplError::InvalidParameter("iterations must be >= 1".into()));
        }
        if self.chains == 0 {
            return Err(GplError::InvalidParameter("chains must be >= 1".into()));
        }
        Ok(())
    }
}

/// Retained draws from every chain, chain-major: draw `t` of chain `c` is
/// row `c * iterations + t`, each row holding one theta per entity.
#[derive(Clone, Debug)]
pub struct PosteriorSamples {
    labels: Vec<String>,
    draws: Vec<f64>,
    pub config: GibbsConfig,
    pub prior: PriorSpec,
}

impl PosteriorSamples {
    pub fn from_parts(
        labels: Vec<String>,
        draws: Vec<f64>,
        config: GibbsConfig,
        prior: PriorSpec,
    ) -> Result<Self> {
        config.validate()?;
        let k = labels.len();
        let expected = config.chains * config.iterations * k;
        if draws.len() != expected {
            return Err(GplError::DimensionMismatch {
                expected,
                got: draws.len(),
            });
        }
        if prior.len() != k {
            return Err(GplError::DimensionMismatch {
                expected: k,
                got: prior.len(),
            });
        }
        for &v in &draws {
            if !(v > 0.0 && v <= 1.0) {
                return Err(GplError::InvalidParameter(format!(
                    "stored draw {v} outside (0, 1]"
                )));
            }
        }
        Ok(PosteriorSamples {
            labels,
            draws,
            config,
            prior,
        })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn num_entities(&self) -> usize {
        self.labels.len()
    }

    pub fn num_chains(&self) -> usize {
        self.config.chains
    }

    pub fn draws_per_chain(&self) -> usize {
        self.config.iterations
    }

    pub fn total_draws(&self) -> usize {
        self.config.chains * self.config.iterations
    }

    /// Draw `t` across the concatenated chains.
    pub fn draw(&self, t: usize) -> &[f64] {
        let k = self.num_entities();
        &self.draws[t * k..(t + 1) * k]
    }

    pub fn draws_iter(&self) -> impl Iterator<Item = &[f64]> {
        self.draws.chunks_exact(self.num_entities().max(1))
    }

    /// The theta for entity `k` at retained iteration `t` of chain `c`.
    pub fn value(&self, c: usize, t: usize, k: usize) -> f64 {
        self.draws[(c * self.config.iterations + t) * self.num_entities() + k]
    }

    pub fn entity_means(&self) -> Vec<f64> {
        let k = self.num_entities();
        let mut means = vec![0.0; k];
        for row in self.draws_iter() {
            for (m, &v) in means.iter_mut().zip(row) {
                *m += v;
            }
        }
        let n = self.total_draws() as f64;
        for m in &mut means {
            *m /= n;
        }
        means
    }
}

/// The augmentation drawn by one sampler step.
#[derive(Clone, Debug)]
pub enum LatentState {
    /// `z[i][j-1]` is the stage-`j` minimum for ranking `i`, one value per
    /// counted stage.
    General { z: Vec<Vec<u64>> },
    /// Per-pair latent totals aligned with `pairs`; each total is the sum of
    /// `n_ij` geometric draws, so `z >= n_ij`.
    Paired {
        pairs: Vec<(usize, usize, u64)>,
        z: Vec<u64>,
    },
}

/// Pairwise sufficient statistics: comparison counts per unordered pair,
/// per-entity counted-stage wins (a win or tie contributes 1), and
/// per-entity strict losses.
#[derive(Clone, Debug)]
pub struct PairedStats {
    /// `(i, j, n_ij)` with `i < j`, only pairs that were compared.
    pub pairs: Vec<(usize, usize, u64)>,
    pub win_tie: Vec<u64>,
    pub losses: Vec<u64>,
    k: usize,
}

impl PairedStats {
    pub fn from_dataset(d: &Dataset) -> Result<Self> {
        if !d.all_pairs() {
            return Err(GplError::IncompatibleData(
                "paired sampler requires every ranking to compare exactly two entities".into(),
            ));
        }
        let k = d.num_entities();
        let mut counts = std::collections::BTreeMap::new();
        for r in &d.rankings {
            let (mut i, mut j) = (r.entities()[0], r.entities()[1]);
            if i > j {
                std::mem::swap(&mut i, &mut j);
            }
            *counts.entry((i, j)).or_insert(0u64) += 1;
        }
        let pairs = counts.into_iter().map(|((i, j), n)| (i, j, n)).collect();
        let stats = compute_suffstats(d);
        Ok(PairedStats {
            pairs,
            win_tie: stats.w,
            losses: stats.d,
            k,
        })
    }

    pub fn num_entities(&self) -> usize {
        self.k
    }
}

/// Draws every `theta_k ~ Beta(a_k + w_k, b_k + totals_k - w_k)`, the shared
/// final phase of both samplers. `totals` is zeta (general) or xi (paired).
pub fn update_theta_given_latents<R: Rng + ?Sized>(
    prior: &PriorSpec,
    w: &[u64],
    totals: &[f64],
    theta: &mut [f64],
    rng: &mut R,
) -> Result<()> {
    for k in 0..theta.len() {
        debug_assert!(totals[k] >= w[k] as f64);
        theta[k] = sample_beta(
            rng,
            prior.a()[k] + w[k] as f64,
            prior.b()[k] + totals[k] - w[k] as f64,
        )?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn step_general<R: Rng + ?Sized>(
    d: &Dataset,
    stats: &SuffStats,
    prior: &PriorSpec,
    theta: &mut [f64],
    zeta: &mut [f64],
    suffix: &mut Vec<f64>,
    prefix_z: &mut Vec<f64>,
    mut keep: Option<&mut Vec<Vec<u64>>>,
    rng: &mut R,
) -> Result<()> {
    zeta.iter_mut().for_each(|z| *z = 0.0);
    for (i, r) in d.rankings.iter().enumerate() {
        let v = stats.stage_count(i);
        suffix_log_complements(r, theta, suffix);
        prefix_z.clear();
        prefix_z.push(0.0);
        let mut kept_stage = keep.as_deref_mut();
        if let Some(ks) = kept_stage.as_deref_mut() {
            ks[i].clear();
        }
        for j in 1..=v {
            let rate = one_minus_exp(suffix[stats.stage_start(i, j)]);
            let z = sample_geometric(rng, rate)?;
            if let Some(ks) = kept_stage.as_deref_mut() {
                ks[i].push(z);
            }
            prefix_z.push(prefix_z[j - 1] + z as f64);
        }
        for (idx, &k) in r.entities().iter().enumerate() {
            let s = r.buckets()[idx] as usize;
            zeta[k] += prefix_z[s.min(v)];
        }
    }
    update_theta_given_latents(prior, &stats.w, zeta, theta, rng)
}

fn step_paired<R: Rng + ?Sized>(
    ps: &PairedStats,
    prior: &PriorSpec,
    theta: &mut [f64],
    xi: &mut [f64],
    mut keep: Option<&mut Vec<u64>>,
    rng: &mut R,
) -> Result<()> {
    xi.iter_mut().for_each(|z| *z = 0.0);
    if let Some(ks) = keep.as_deref_mut() {
        ks.clear();
    }
    for &(i, j, n) in &ps.pairs {
        let rate = theta[i] + theta[j] - theta[i] * theta[j];
        let z = sample_negative_binomial(rng, n, rate)?;
        if let Some(ks) = keep.as_deref_mut() {
            ks.push(z);
        }
        xi[i] += z as f64;
        xi[j] += z as f64;
    }
    update_theta_given_latents(prior, &ps.win_tie, xi, theta, rng)
}

/// One sweep of the general sampler: stage latents given `theta`, then
/// `theta` given the latents. Returns the new `theta` and the drawn latents.
pub fn gibbs_step_general<R: Rng + ?Sized>(
    d: &Dataset,
    stats: &SuffStats,
    prior: &PriorSpec,
    theta: &[f64],
    rng: &mut R,
) -> Result<(Vec<f64>, LatentState)> {
    let k = d.num_entities();
    check_dims(k, prior, theta)?;
    let mut theta = theta.to_vec();
    let mut zeta = vec![0.0; k];
    let mut z = vec![Vec::new(); d.rankings.len()];
    let (mut suffix, mut prefix) = (Vec::new(), Vec::new());
    step_general(
        d,
        stats,
        prior,
        &mut theta,
        &mut zeta,
        &mut suffix,
        &mut prefix,
        Some(&mut z),
        rng,
    )?;
    Ok((theta, LatentState::General { z }))
}

/// One sweep of the paired sampler: per-pair negative binomial totals given
/// `theta`, then `theta` given the totals.
pub fn gibbs_step_paired<R: Rng + ?Sized>(
    ps: &PairedStats,
    prior: &PriorSpec,
    theta: &[f64],
    rng: &mut R,
) -> Result<(Vec<f64>, LatentState)> {
    check_dims(ps.k, prior, theta)?;
    let mut theta = theta.to_vec();
    let mut xi = vec![0.0; ps.k];
    let mut z = Vec::with_capacity(ps.pairs.len());
    step_paired(ps, prior, &mut theta, &mut xi, Some(&mut z), rng)?;
    Ok((
        theta,
        LatentState::Paired {
            pairs: ps.pairs.clone(),
            z,
        },
    ))
}

fn check_dims(k: usize, prior: &PriorSpec, theta: &[f64]) -> Result<()> {
    if prior.len() != k {
        return Err(GplError::DimensionMismatch {
            expected: k,
            got: prior.len(),
        });
    }
    if theta.len() != k {
        return Err(GplError::DimensionMismatch {
            expected: k,
            got: theta.len(),
        });
    }
    crate::model::validate_theta(theta, k)
}

/// The per-entity latent totals implied by a state: zeta for the general
/// sampler, xi for the paired sampler. These are the Beta update's second
/// ingredient, useful for verifying conjugacy with frozen latents.
pub fn latent_totals(d: &Dataset, stats: &SuffStats, state: &LatentState) -> Result<Vec<f64>> {
    let mut totals = vec![0.0; d.num_entities()];
    match state {
        LatentState::General { z } => {
            if z.len() != d.rankings.len() {
                return Err(GplError::DimensionMismatch {
                    expected: d.rankings.len(),
                    got: z.len(),
                });
            }
            for (i, r) in d.rankings.iter().enumerate() {
                let v = stats.stage_count(i);
                let mut prefix = vec![0.0; v + 1];
                for j in 1..=v {
                    prefix[j] = prefix[j - 1] + z[i][j - 1] as f64;
                }
                for (idx, &k) in r.entities().iter().enumerate() {
                    let s = r.buckets()[idx] as usize;
                    totals[k] += prefix[s.min(v)];
                }
            }
        }
        LatentState::Paired { pairs, z } => {
            for (&(i, j, _), &zij) in pairs.iter().zip(z) {
                totals[i] += zij as f64;
                totals[j] += zij as f64;
            }
        }
    }
    Ok(totals)
}

/// Runs `cfg.chains` independent chains and concatenates their retained
/// draws. Each chain starts from its own prior draw and advances
/// `cfg.burnin + cfg.iterations` sweeps on the substream keyed by
/// `(cfg.seed, chain index)`, so the result is identical for a given seed
/// regardless of how chains are scheduled.
pub fn run_chains(d: &Dataset, prior: &PriorSpec, cfg: &GibbsConfig) -> Result<PosteriorSamples> {
    cfg.validate()?;
    let k = d.num_entities();
    if prior.len() != k {
        return Err(GplError::DimensionMismatch {
            expected: k,
            got: prior.len(),
        });
    }
    let stats = compute_suffstats(d);
    let paired = match cfg.sampler {
        SamplerKind::General => None,
        SamplerKind::PairedNegBin => Some(PairedStats::from_dataset(d)?),
    };

    let chains: Result<Vec<Vec<f64>>> = (0..cfg.chains)
        .into_par_iter()
        .map(|c| {
            let mut rng = substream(cfg.seed, CHAIN_STREAM_BASE + c as u64);
            let mut theta = vec![0.0; k];
            for (i, t) in theta.iter_mut().enumerate() {
                *t = sample_beta(&mut rng, prior.a()[i], prior.b()[i])?;
            }
            let mut totals = vec![0.0; k];
            let (mut suffix, mut prefix) = (Vec::new(), Vec::new());
            let mut retained = Vec::with_capacity(cfg.iterations * k);
            for t in 0..cfg.burnin + cfg.iterations {
                match &paired {
                    None => step_general(
                        d,
                        &stats,
                        prior,
                        &mut theta,
                        &mut totals,
                        &mut suffix,
                        &mut prefix,
                        None,
                        &mut rng,
                    )?,
                    Some(ps) => step_paired(ps, prior, &mut theta, &mut totals, None, &mut rng)?,
                }
                if t >= cfg.burnin {
                    retained.extend_from_slice(&theta);
                }
            }
            Ok(retained)
        })
        .collect();

    let mut draws = Vec::with_capacity(cfg.chains * cfg.iterations * k);
    for chain in chains? {
        draws.extend(chain);
    }
    PosteriorSamples::from_parts(
        d.entities.labels().to_vec(),
        draws,
        cfg.clone(),
        prior.clone(),
    )
}
