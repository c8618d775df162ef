//! Geometric Plackett-Luce (GPL) models for rank-ordered data with ties.
//!
//! Entities are ordered by independent geometric latent variables: entity `k`
//! draws `W_k ~ Geometric(theta_k)` on `{1, 2, ...}` and smaller values rank
//! better. Equal draws produce ties, so the model handles tied and truncated
//! (top-m) rankings without ad hoc tie-breaking. Under the reverse variant
//! the largest draw wins, which fits settings where the strongest signal is
//! at the bottom of the ranking.
//!
//! The crate provides:
//!
//! - parsing and validation of ranking data with ties and truncation
//!   ([`data`]),
//! - exact log-likelihoods for GPL, tie-free Plackett-Luce, and the Davidson
//!   paired model ([`model`]),
//! - Bayesian fitting by Gibbs sampling with geometric/negative-binomial data
//!   augmentation ([`gibbs`]) and MAP/MLE fitting by EM ([`em`]),
//! - posterior summaries, convergence diagnostics, and ranking aggregation
//!   ([`posterior`]),
//! - generative posterior-predictive simulation with play-off tie-breaking
//!   ([`predictive`]),
//! - file formats for samples, summaries, theta vectors, and run configs
//!   ([`io`]).
//!
//! All randomized operations take an explicit seed and produce identical
//! results on every run; parallelism never changes output.

pub mod data;
pub mod em;
pub mod error;
pub mod gibbs;
pub mod io;
pub mod model;
mod numeric;
pub mod posterior;
pub mod predictive;
pub mod sampling;

pub use data::{
    compute_suffstats, ordered_bell, reverse_dataset, Dataset, Direction, EntityTable, Ranking,
    SuffStats,
};
pub use error::{GplError, Result};
