//! Special functions and quadrature used by the closed-form expressions.
//!
//! Everything here is pure and allocation-light. Quantities that span many
//! orders of magnitude (quadrature weights, `t^α / Γ(α+1)`, `K_ν` at small
//! arguments) are available in log form so that callers can combine them
//! with [`log_sum_exp`] instead of multiplying raw values.

mod bessel;
mod gamma;
mod integrate;
mod quadrature;

pub use bessel::{bessel_k_scaled, ln_bessel_k};
pub use gamma::{ln_gamma, ln_reg_lower_gamma, reg_lower_gamma};
pub use integrate::{integrate_adaptive, integrate_semi_infinite};
pub use quadrature::{QuadratureRule, MAX_ORDER};

use crate::error::{Error, Result};

/// `ln Σ exp(t_i)` without overflow or underflow.
///
/// Entries equal to `-inf` are allowed and contribute nothing; if every
/// entry is `-inf` the result is `-inf`.
pub fn log_sum_exp(terms: &[f64]) -> Result<f64> {
    if terms.is_empty() {
        return Err(Error::invalid("log_sum_exp of an empty slice"));
    }
    Ok(log_sum_exp_iter(terms.iter().copied()))
}

/// Iterator form of [`log_sum_exp`]. Returns `-inf` for an empty iterator.
pub(crate) fn log_sum_exp_iter<I>(terms: I) -> f64
where
    I: IntoIterator<Item = f64>,
    I::IntoIter: Clone,
{
    let iter = terms.into_iter();
    let max = iter.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY || max.is_nan() {
        return max;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    let sum: f64 = iter.map(|t| (t - max).exp()).sum();
    max + sum.ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn log_sum_exp_basic() {
        let v = log_sum_exp(&[0.0, 0.0]).unwrap();
        assert!((v - 2f64.ln()).abs() < 1e-15);
        let v = log_sum_exp(&[-1000.0, -1000.0]).unwrap();
        assert!((v - (-1000.0 + 2f64.ln())).abs() < 1e-12);
        assert!(log_sum_exp(&[]).is_err());
        assert_eq!(
            log_sum_exp(&[f64::NEG_INFINITY, f64::NEG_INFINITY]).unwrap(),
            f64::NEG_INFINITY
        );
        assert_eq!(log_sum_exp(&[f64::NEG_INFINITY, 1.5]).unwrap(), 1.5);
    }

    #[test]
    fn log_sum_exp_matches_naive_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let terms: Vec<f64> = (0..50).map(|_| rng.random_range(-20.0..20.0)).collect();
        let naive = terms.iter().map(|t| t.exp()).sum::<f64>().ln();
        let stable = log_sum_exp(&terms).unwrap();
        assert!((naive - stable).abs() <= 1e-12 * naive.abs().max(1.0));
    }

    proptest! {
        #[test]
        fn log_sum_exp_shift_invariant(terms in prop::collection::vec(-50.0f64..50.0, 1..40), shift in -700.0f64..700.0) {
            let base = log_sum_exp(&terms).unwrap();
            let shifted: Vec<f64> = terms.iter().map(|t| t + shift).collect();
            let moved = log_sum_exp(&shifted).unwrap();
            prop_assert!((moved - base - shift).abs() < 1e-9 * (1.0 + shift.abs()));
        }
    }
}
