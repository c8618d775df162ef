//! Deterministic random number generation.
//!
//! Everything stochastic in this crate draws from a ChaCha12 generator keyed
//! by a user-visible seed. Independent components (Gibbs chains, predictive
//! simulations) get their own stream id, so results are reproducible for a
//! given seed regardless of thread count or evaluation order.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Gamma, Open01};

use crate::error::{GplError, Result};

/// Stream ids `1..=num_chains` are reserved for Gibbs chains.
pub const CHAIN_STREAM_BASE: u64 = 1;
/// Predictive simulation `t` uses stream `SIM_STREAM_BASE + t`.
pub const SIM_STREAM_BASE: u64 = 1 << 32;

/// A ChaCha12 generator on an independent substream of the given seed.
pub fn substream(seed: u64, stream: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// One draw from Geometric(rate) on `{1, 2, ...}` by inverting the CDF:
/// `ceil(ln U / ln(1 - rate))` with `U ~ Uniform(0, 1)` open. A rate of 1
/// always returns 1.
pub fn sample_geometric<R: Rng + ?Sized>(rng: &mut R, rate: f64) -> Result<u64> {
    if !(rate > 0.0 && rate <= 1.0) {
        return Err(GplError::InvalidParameter(format!(
            "geometric rate {rate} outside (0, 1]"
        )));
    }
    if rate == 1.0 {
        return Ok(1);
    }
    let u: f64 = Open01.sample(rng);
    let draw = (u.ln() / (-rate).ln_1p()).ceil();
    Ok((draw as u64).max(1))
}

/// Sum of `count` independent Geometric(rate) draws, the negative binomial
/// total number of trials through the `count`-th success.
pub fn sample_negative_binomial<R: Rng + ?Sized>(
    rng: &mut R,
    count: u64,
    rate: f64,
) -> Result<u64> {
    let mut total = 0u64;
    for _ in 0..count {
        total += sample_geometric(rng, rate)?;
    }
    Ok(total)
}

/// One draw from Beta(a, b) as `X / (X + Y)` with independent Gamma(a, 1)
/// and Gamma(b, 1) draws, nudged into the open interval (0, 1) so the result
/// is always a usable success rate.
pub fn sample_beta<R: Rng + ?Sized>(rng: &mut R, a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && a.is_finite() && b > 0.0 && b.is_finite()) {
        return Err(GplError::InvalidParameter(format!(
            "beta shapes ({a}, {b}) must be positive and finite"
        )));
    }
    let ga = Gamma::new(a, 1.0)
        .map_err(|e| GplError::InvalidParameter(format!("beta shape a = {a}: {e}")))?;
    let gb = Gamma::new(b, 1.0)
        .map_err(|e| GplError::InvalidParameter(format!("beta shape b = {b}: {e}")))?;
    let x: f64 = ga.sample(rng);
    let y: f64 = gb.sample(rng);
    let v = x / (x + y);
    Ok(v.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0))
}
