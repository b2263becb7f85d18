//! Thin wrappers around the normal and chi-square distributions.

use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

pub fn normal_cdf(z: f64) -> f64 {
    Normal::standard().cdf(z)
}

/// Inverse of the standard normal CDF.
pub fn normal_quantile(p: f64) -> f64 {
    debug_assert!((0.0..1.0).contains(&p) && p > 0.0);
    Normal::standard().inverse_cdf(p)
}

/// Upper-tail probability of a chi-square distribution.
pub fn chi_square_sf(x: f64, df: f64) -> f64 {
    debug_assert!(df > 0.0);
    if x <= 0.0 {
        return 1.0;
    }
    1.0 - ChiSquared::new(df).expect("positive df").cdf(x)
}
