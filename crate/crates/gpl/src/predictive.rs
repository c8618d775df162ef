//! Generative simulation: single events, tournaments with play-off
//! tie-breaking, and posterior-predictive summaries.
//!
//! An event draws one geometric latent per field member and groups equal
//! values into tied buckets; the standard model ranks small values best,
//! the reverse model large values. Tournament winners re-simulate among
//! the tied leaders until one remains, up to a play-off cap with a flagged
//! uniform fallback. Posterior-predictive routines consume retained draws
//! cyclically (simulation `t` uses draw `t mod N`) and give every
//! simulation its own RNG substream, so totals are deterministic for a
//! given seed no matter how the work is scheduled.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;

use crate::data::{Direction, Ranking};
use crate::error::{GplError, Result};
use crate::gibbs::PosteriorSamples;
use crate::model::validate_theta;
use crate::sampling::{sample_geometric, substream, SIM_STREAM_BASE};

/// One simulated event: the realized bucket order over the field and the
/// latent draws behind it (aligned with the field order used to simulate).
#[derive(Clone, Debug)]
pub struct SimulatedEvent {
    pub ranking: Ranking,
    pub latent_values: Vec<u64>,
}

impl SimulatedEvent {
    /// Number of tied groups in the realized order.
    pub fn bucket_count(&self) -> u32 {
        self.ranking.buckets().last().copied().unwrap_or(0)
    }
}

/// Result of one tournament: the winner, how many play-off rounds it took,
/// and whether the play-off cap forced a uniform tie-break.
#[derive(Clone, Copy, Debug)]
pub struct TournamentOutcome {
    pub winner: usize,
    pub playoff_rounds: u32,
    pub uniform_fallback: bool,
}

/// Posterior-predictive win frequencies, aligned with the queried field.
#[derive(Clone, Debug)]
pub struct PredictiveWinProbs {
    pub probs: Vec<f64>,
    pub n_sims: u64,
    /// Tournaments decided by the capped uniform fallback.
    pub uniform_fallbacks: u64,
}

/// Posterior-predictive distribution of the number of tied groups.
#[derive(Clone, Debug)]
pub struct BucketCountDist {
    pub counts: BTreeMap<u32, u64>,
    pub n_sims: u64,
}

impl BucketCountDist {
    /// Predictive probability of observing exactly `observed` buckets;
    /// zero (not an error) outside the simulated support.
    pub fn probability(&self, observed: u32) -> f64 {
        *self.counts.get(&observed).unwrap_or(&0) as f64 / self.n_sims as f64
    }
}

/// Draws `W_k ~ Geometric(theta_k)` for every field member and returns the
/// realized bucket order: ascending latents for the standard model,
/// descending for the reverse. Entities with equal draws share a bucket;
/// within a bucket they are listed by ascending id for a canonical layout.
pub fn simulate_event<R: Rng + ?Sized>(
    theta: &[f64],
    field: &[usize],
    direction: Direction,
    rng: &mut R,
) -> Result<SimulatedEvent> {
    validate_simulation_field(field, theta)?;
    let latent_values: Result<Vec<u64>> = field
        .iter()
        .map(|&k| sample_geometric(rng, theta[k]))
        .collect();
    let latent_values = latent_values?;

    let mut order: Vec<usize> = (0..field.len()).collect();
    order.sort_by(|&x, &y| {
        let primary = match direction {
            Direction::Standard => latent_values[x].cmp(&latent_values[y]),
            Direction::Reverse => latent_values[y].cmp(&latent_values[x]),
        };
        primary.then(field[x].cmp(&field[y]))
    });

    let mut y = Vec::with_capacity(field.len());
    let mut s = Vec::with_capacity(field.len());
    let mut bucket = 0u32;
    let mut prev: Option<u64> = None;
    for &pos in &order {
        let w = latent_values[pos];
        if prev != Some(w) {
            bucket += 1;
            prev = Some(w);
        }
        y.push(field[pos]);
        s.push(bucket);
    }
    let n = y.len();
    Ok(SimulatedEvent {
        ranking: Ranking::new(y, s, n)?,
        latent_values,
    })
}

/// Simulates until a sole leader emerges: if the best bucket is shared, a
/// new event is simulated among the tied entities, up to `max_playoffs`
/// rounds; a persistent tie is then broken uniformly at random and flagged.
pub fn simulate_tournament_winner<R: Rng + ?Sized>(
    theta: &[f64],
    field: &[usize],
    direction: Direction,
    rng: &mut R,
    max_playoffs: u32,
) -> Result<TournamentOutcome> {
    validate_simulation_field(field, theta)?;
    let mut contenders = field.to_vec();
    let mut events = 0u32;
    while contenders.len() > 1 {
        if events > max_playoffs {
            // the initial event plus max_playoffs play-offs have all tied
            let winner = contenders[rng.gen_range(0..contenders.len())];
            return Ok(TournamentOutcome {
                winner,
                playoff_rounds: max_playoffs,
                uniform_fallback: true,
            });
        }
        let ev = simulate_event(theta, &contenders, direction, rng)?;
        contenders = ev
            .ranking
            .entities()
            .iter()
            .zip(ev.ranking.buckets())
            .take_while(|&(_, &s)| s == 1)
            .map(|(&k, _)| k)
            .collect();
        events += 1;
    }
    Ok(TournamentOutcome {
        winner: contenders[0],
        playoff_rounds: events.saturating_sub(1),
        uniform_fallback: false,
    })
}

pub const DEFAULT_MAX_PLAYOFFS: u32 = 100;

/// Tournament win frequencies under the posterior: simulation `t` runs one
/// tournament at draw `t mod N` on substream `(seed, t)`.
pub fn predictive_win_probs(
    samples: &PosteriorSamples,
    field: &[usize],
    direction: Direction,
    n_sims: u64,
    seed: u64,
) -> Result<PredictiveWinProbs> {
    validate_predictive(samples, field, n_sims)?;
    let index: std::collections::HashMap<usize, usize> =
        field.iter().enumerate().map(|(i, &k)| (k, i)).collect();
    let total = samples.total_draws() as u64;
    let (wins, fallbacks) = (0..n_sims)
        .into_par_iter()
        .map(|t| -> Result<(usize, bool)> {
            let theta = samples.draw((t % total) as usize);
            let mut rng = substream(seed, SIM_STREAM_BASE + t);
            let out = simulate_tournament_winner(
                theta,
                field,
                direction,
                &mut rng,
                DEFAULT_MAX_PLAYOFFS,
            )?;
            Ok((index[&out.winner], out.uniform_fallback))
        })
        .try_fold(
            || (vec![0u64; field.len()], 0u64),
            |(mut wins, mut fb), r| -> Result<(Vec<u64>, u64)> {
                let (slot, fallback) = r?;
                wins[slot] += 1;
                fb += fallback as u64;
                Ok((wins, fb))
            },
        )
        .try_reduce(
            || (vec![0u64; field.len()], 0u64),
            |(mut wa, fa), (wb, fb)| {
                for (x, y) in wa.iter_mut().zip(wb) {
                    *x += y;
                }
                Ok((wa, fa + fb))
            },
        )?;
    Ok(PredictiveWinProbs {
        probs: wins.iter().map(|&w| w as f64 / n_sims as f64).collect(),
        n_sims,
        uniform_fallbacks: fallbacks,
    })
}

/// Histogram of the bucket count of one simulated event per posterior draw,
/// consumed cyclically like [`predictive_win_probs`].
pub fn predictive_bucket_counts(
    samples: &PosteriorSamples,
    field: &[usize],
    direction: Direction,
    n_sims: u64,
    seed: u64,
) -> Result<BucketCountDist> {
    validate_predictive(samples, field, n_sims)?;
    let total = samples.total_draws() as u64;
    let counts = (0..n_sims)
        .into_par_iter()
        .map(|t| -> Result<u32> {
            let theta = samples.draw((t % total) as usize);
            let mut rng = substream(seed, SIM_STREAM_BASE + t);
            Ok(simulate_event(theta, field, direction, &mut rng)?.bucket_count())
        })
        .try_fold(
            BTreeMap::new,
            |mut acc: BTreeMap<u32, u64>, r| -> Result<BTreeMap<u32, u64>> {
                *acc.entry(r?).or_insert(0) += 1;
                Ok(acc)
            },
        )
        .try_reduce(BTreeMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_insert(0) += v;
            }
            Ok(a)
        })?;
    Ok(BucketCountDist { counts, n_sims })
}

fn validate_simulation_field(field: &[usize], theta: &[f64]) -> Result<()> {
    if field.is_empty() {
        return Err(GplError::InvalidParameter(
            "simulation field must be non-empty".into(),
        ));
    }
    let mut seen = std::collections::HashSet::new();
    for &k in field {
        if k >= theta.len() {
            return Err(GplError::InvalidParameter(format!(
                "entity id {k} out of range (have {})",
                theta.len()
            )));
        }
        if !seen.insert(k) {
            return Err(GplError::InvalidParameter(format!(
                "entity id {k} repeated in field"
            )));
        }
    }
    validate_theta(theta, theta.len())
}

fn validate_predictive(samples: &PosteriorSamples, field: &[usize], n_sims: u64) -> Result<()> {
    if n_sims == 0 {
        return Err(GplError::InvalidParameter("n_sims must be >= 1".into()));
    }
    if samples.total_draws() == 0 {
        return Err(GplError::InvalidParameter("no posterior draws".into()));
    }
    if field.is_empty() {
        return Err(GplError::InvalidParameter(
            "simulation field must be non-empty".into(),
        ));
    }
    for &k in field {
        if k >= samples.num_entities() {
            return Err(GplError::InvalidParameter(format!(
                "entity id {k} out of range (have {})",
                samples.num_entities()
            )));
        }
    }
    Ok(())
}
