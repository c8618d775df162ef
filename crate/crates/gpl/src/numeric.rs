//! Log-domain helpers for products of complements.
//!
//! Products like `prod_k (1 - theta_k)` underflow long before the quantities
//! they feed into become ill-defined, so they are carried as sums of
//! `ln(1 - theta)` and only exponentiated inside `1 - exp(.)` expressions.

/// `ln(1 - theta)` computed as `ln_1p(-theta)`. Exact `-inf` for theta = 1.
#[inline]
pub(crate) fn ln_1m(theta: f64) -> f64 {
    (-theta).ln_1p()
}

/// `1 - exp(s)` for `s <= 0` without cancellation near `s = 0`.
#[inline]
pub(crate) fn one_minus_exp(s: f64) -> f64 {
    -s.exp_m1()
}

/// `ln(1 - exp(s))` for `s < 0`, stable both for `s` near 0 and `s` very
/// negative. Returns `-inf` for `s = 0` and `0.0` for `s = -inf`.
#[inline]
pub(crate) fn ln_one_minus_exp(s: f64) -> f64 {
    if s > -std::f64::consts::LN_2 {
        (-s.exp_m1()).ln()
    } else {
        (-s.exp()).ln_1p()
    }
}
