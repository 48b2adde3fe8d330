//! Closed-form constants of the fractional Dirichlet form.
//!
//! Everything here is a deterministic function of the stability index
//! `alpha`, the ambient dimension `d`, and (for the truncation constant) a
//! radius `R`. Gamma factors are combined in log space and exponentiated
//! once at the end, which keeps dimensions up to 10^4 inside f64 range
//! wherever the final value itself is representable.

use crate::error::{Error, Result};
use statrs::function::gamma::ln_gamma;

/// Stability index of an isotropic alpha-stable process.
///
/// Valid range is the open interval (0, 2). Values within 1e-9 of 2 are
/// rejected: the constants involve Gamma(1 - alpha/2), whose pole at
/// alpha = 2 makes evaluations in that sliver meaningless in f64.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StableIndex(f64);

/// Distance from 2 below which a stability index is rejected.
pub const ALPHA_POLE_MARGIN: f64 = 1e-9;

impl StableIndex {
    /// Validates `alpha` into the open interval (0, 2 - 1e-9].
    pub fn new(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha <= 0.0 || alpha >= 2.0 - ALPHA_POLE_MARGIN {
            return Err(Error::Domain(format!(
                "stability index must lie in (0, 2) and at least 1e-9 below 2, got {alpha}"
            )));
        }
        Ok(StableIndex(alpha))
    }

    /// The validated index value.
    pub fn get(self) -> f64 {
        self.0
    }
}

/// Ambient dimension, a positive integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dimension(u32);

impl Dimension {
    /// Validates `d >= 1`.
    pub fn new(d: u32) -> Result<Self> {
        if d == 0 {
            return Err(Error::Domain("dimension must be at least 1".into()));
        }
        Ok(Dimension(d))
    }

    /// The dimension as an integer.
    pub fn get(self) -> u32 {
        self.0
    }

    /// The dimension as a float, for formulas.
    pub fn as_f64(self) -> f64 {
        f64::from(self.0)
    }
}

/// Natural log of the normalizing constant of the fractional form.
pub fn ln_c_alpha_d(alpha: StableIndex, d: Dimension) -> f64 {
    let a = alpha.get();
    let dd = d.as_f64();
    a.ln() + (a - 1.0) * std::f64::consts::LN_2 - 0.5 * dd * std::f64::consts::PI.ln()
        + ln_gamma(0.5 * (a + dd))
        - ln_gamma(1.0 - 0.5 * a)
}

/// Normalizing constant of the fractional Dirichlet form,
/// `alpha * 2^(alpha-1) * pi^(-d/2) * Gamma((alpha+d)/2) / Gamma(1-alpha/2)`.
pub fn c_alpha_d(alpha: StableIndex, d: Dimension) -> f64 {
    ln_c_alpha_d(alpha, d).exp()
}

/// Surface area of the unit sphere in `R^d`, `2 pi^(d/2) / Gamma(d/2)`.
pub fn sphere_area(d: Dimension) -> f64 {
    let dd = d.as_f64();
    (std::f64::consts::LN_2 + 0.5 * dd * std::f64::consts::PI.ln() - ln_gamma(0.5 * dd)).exp()
}

/// Truncation constant
/// `4 (2-alpha) d Gamma(d/2) Gamma(1-alpha/2) / (alpha 2^alpha R^(2-alpha) Gamma((d+alpha)/2))`
/// for truncation radius `R > 0`.
pub fn k_alpha_d(alpha: StableIndex, d: Dimension, radius: f64) -> Result<f64> {
    if !radius.is_finite() || radius <= 0.0 {
        return Err(Error::Domain(format!(
            "truncation radius must be positive and finite, got {radius}"
        )));
    }
    let a = alpha.get();
    let dd = d.as_f64();
    let ln_k = (4.0f64).ln() + (2.0 - a).ln() + dd.ln() + ln_gamma(0.5 * dd)
        + ln_gamma(1.0 - 0.5 * a)
        - a.ln()
        - a * std::f64::consts::LN_2
        - (2.0 - a) * radius.ln()
        - ln_gamma(0.5 * (dd + a));
    Ok(ln_k.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    // Reference values frozen from a 40-digit gamma-function evaluation of
    // the same closed forms.
    const C_1_1: f64 = 0.318_309_886_183_790_67;
    const C_15_2: f64 = 0.171_167_129_690_552_34;
    const C_15_1: f64 = 0.299_206_710_301_074_51;
    const K_15_2_1: f64 = 3.719_287_537_966_583_6;
    const K_15_1_1: f64 = 3.342_171_032_841_334_0;

    fn idx(a: f64) -> StableIndex {
        StableIndex::new(a).unwrap()
    }

    fn dim(d: u32) -> Dimension {
        Dimension::new(d).unwrap()
    }

    #[test]
    fn c_alpha_d_matches_frozen_references() {
        assert_relative_eq!(c_alpha_d(idx(1.0), dim(1)), C_1_1, max_relative = 1e-12);
        assert_relative_eq!(c_alpha_d(idx(1.5), dim(2)), C_15_2, max_relative = 1e-12);
        assert_relative_eq!(c_alpha_d(idx(1.5), dim(1)), C_15_1, max_relative = 1e-12);
    }

    #[test]
    fn c_1_1_is_one_over_pi() {
        assert_relative_eq!(
            c_alpha_d(idx(1.0), dim(1)),
            1.0 / std::f64::consts::PI,
            max_relative = 1e-13
        );
    }

    #[test]
    fn k_alpha_d_matches_frozen_references() {
        assert_relative_eq!(
            k_alpha_d(idx(1.5), dim(2), 1.0).unwrap(),
            K_15_2_1,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            k_alpha_d(idx(1.5), dim(1), 1.0).unwrap(),
            K_15_1_1,
            max_relative = 1e-12
        );
    }

    #[test]
    fn sphere_areas_match_closed_forms() {
        assert_relative_eq!(sphere_area(dim(1)), 2.0, max_relative = 1e-14);
        assert_relative_eq!(
            sphere_area(dim(2)),
            2.0 * std::f64::consts::PI,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            sphere_area(dim(3)),
            4.0 * std::f64::consts::PI,
            max_relative = 1e-14
        );
    }

    #[test]
    fn near_two_limit_tracks_gaussian_slope() {
        // As alpha -> 2 the constant behaves like (2-alpha) pi^(-d/2) d Gamma(d/2).
        let a = idx(1.999);
        for (d, expected_ratio) in [(1, 0.999_077_43), (3, 0.998_744_40), (10, 0.998_243_64)] {
            let dd = dim(d);
            let limit = (2.0 - a.get())
                * std::f64::consts::PI.powf(-0.5 * dd.as_f64())
                * dd.as_f64()
                * ln_gamma(0.5 * dd.as_f64()).exp();
            let ratio = c_alpha_d(a, dd) / limit;
            assert_relative_eq!(ratio, expected_ratio, max_relative = 1e-6);
        }
    }

    #[test]
    fn k_survives_large_dimensions() {
        // Direct Gamma(d/2) would overflow past d ~ 340; the log route must not.
        let k = k_alpha_d(idx(1.5), dim(10_000), 1.0).unwrap();
        assert!(k.is_finite() && k > 0.0);
        // K grows like d^(1-alpha/2); at alpha=1.5, d=1e4 it is still modest.
        assert!(k < 1e3, "k = {k}");
    }

    #[test]
    fn dimension_doubling_ratio_approaches_power_law() {
        let a = idx(1.5);
        let k64 = k_alpha_d(a, dim(64), 1.0).unwrap();
        let k128 = k_alpha_d(a, dim(128), 1.0).unwrap();
        let target = 2.0f64.powf(1.0 - 0.5 * a.get());
        assert_relative_eq!(k128 / k64, target, max_relative = 0.05);
    }

    #[test]
    fn rejects_indices_at_or_near_two() {
        assert!(StableIndex::new(2.0).is_err());
        assert!(StableIndex::new(2.0 - 1e-10).is_err());
        assert!(StableIndex::new(0.0).is_err());
        assert!(StableIndex::new(-1.0).is_err());
        assert!(StableIndex::new(f64::NAN).is_err());
        assert!(StableIndex::new(1.999).is_ok());
    }

    #[test]
    fn rejects_zero_dimension_and_bad_radius() {
        assert!(Dimension::new(0).is_err());
        assert!(k_alpha_d(idx(1.5), dim(2), 0.0).is_err());
        assert!(k_alpha_d(idx(1.5), dim(2), -1.0).is_err());
        assert!(k_alpha_d(idx(1.5), dim(2), f64::INFINITY).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn constants_are_positive_on_domain(a in 0.05f64..1.99, d in 1u32..200) {
            let alpha = idx(a);
            let dd = dim(d);
            prop_assert!(c_alpha_d(alpha, dd) > 0.0);
            prop_assert!(sphere_area(dd) > 0.0);
            prop_assert!(k_alpha_d(alpha, dd, 1.0).unwrap() > 0.0);
        }

        #[test]
        fn k_decreases_in_radius(a in 0.05f64..1.99, d in 1u32..50, r in 0.1f64..10.0) {
            let alpha = idx(a);
            let dd = dim(d);
            let k1 = k_alpha_d(alpha, dd, r).unwrap();
            let k2 = k_alpha_d(alpha, dd, r * 1.5).unwrap();
            prop_assert!(k2 < k1);
        }

        #[test]
        fn k_scales_as_stated_power_of_radius(a in 0.05f64..1.99, r in 0.1f64..10.0) {
            let alpha = idx(a);
            let dd = dim(2);
            let k1 = k_alpha_d(alpha, dd, 1.0).unwrap();
            let kr = k_alpha_d(alpha, dd, r).unwrap();
            let expected = k1 * r.powf(alpha.get() - 2.0);
            prop_assert!((kr - expected).abs() <= 1e-10 * expected.abs());
        }
    }
}
