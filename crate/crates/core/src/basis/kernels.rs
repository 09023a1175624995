//! Covariance kernels generating the functional-ANOVA decomposition.
//!
//! `k1` is the main-effect covariance on [0,1]; two-way and higher
//! interactions use products of `k1` values. `kd` is the sum-to-zero
//! covariance over the levels of an unordered categorical variable.

use crate::error::{CoreError, Result};

/// Bernoulli polynomial of order 1, 2, or 4.
pub fn bernoulli(order: u32, u: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&u) {
        return Err(CoreError::invalid(format!(
            "bernoulli argument {u} outside [0,1]"
        )));
    }
    match order {
        1 => Ok(u - 0.5),
        2 => Ok(u * u - u + 1.0 / 6.0),
        4 => Ok(u * u * (u * u - 2.0 * u + 1.0) - 1.0 / 30.0),
        other => Err(CoreError::invalid(format!(
            "unsupported Bernoulli order {other}; only 1, 2, 4 are used"
        ))),
    }
}

#[inline]
pub(crate) fn b1(u: f64) -> f64 {
    u - 0.5
}

#[inline]
pub(crate) fn b2(u: f64) -> f64 {
    u * u - u + 1.0 / 6.0
}

#[inline]
pub(crate) fn b4(u: f64) -> f64 {
    u * u * (u * u - 2.0 * u + 1.0) - 1.0 / 30.0
}

fn check_unit(name: &str, u: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&u) {
        return Err(CoreError::invalid(format!(
            "{name} = {u} outside [0,1]"
        )));
    }
    Ok(())
}

/// Main-effect covariance B1(u)B1(u') + B2(u)B2(u') - B4(|u-u'|)/24.
pub fn k1(u: f64, v: f64) -> Result<f64> {
    check_unit("u", u)?;
    check_unit("u'", v)?;
    Ok(k1_unchecked(u, v))
}

#[inline]
pub(crate) fn k1_unchecked(u: f64, v: f64) -> f64 {
    b1(u) * b1(v) + b2(u) * b2(v) - b4((u - v).abs()) / 24.0
}

/// Two-way interaction covariance: product of main-effect covariances.
pub fn k2(pair: (f64, f64), other: (f64, f64)) -> Result<f64> {
    Ok(k1(pair.0, other.0)? * k1(pair.1, other.1)?)
}

/// Categorical main-effect covariance over levels 1..=g, with every row
/// of the implied g x g matrix summing to zero.
pub fn kd(u: usize, v: usize, g: usize) -> Result<f64> {
    if g < 2 {
        return Err(CoreError::invalid(format!(
            "categorical covariance needs at least 2 levels, got {g}"
        )));
    }
    for (name, level) in [("u", u), ("u'", v)] {
        if level < 1 || level > g {
            return Err(CoreError::invalid(format!(
                "level {name} = {level} outside 1..={g}"
            )));
        }
    }
    let g = g as f64;
    Ok(if u == v { (g - 1.0) / g } else { -1.0 / g })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn bernoulli_values() {
        assert_abs_diff_eq!(bernoulli(1, 0.5).unwrap(), 0.0);
        assert_abs_diff_eq!(bernoulli(2, 0.0).unwrap(), 1.0 / 6.0, epsilon = 1e-15);
        assert_abs_diff_eq!(bernoulli(4, 0.0).unwrap(), -1.0 / 30.0, epsilon = 1e-15);
        // B4(u) = u^4 - 2u^3 + u^2 - 1/30
        assert_abs_diff_eq!(
            bernoulli(4, 0.4).unwrap(),
            0.4f64.powi(4) - 2.0 * 0.4f64.powi(3) + 0.16 - 1.0 / 30.0,
            epsilon = 1e-15
        );
        assert!(bernoulli(3, 0.5).is_err());
        assert!(bernoulli(1, 1.5).is_err());
    }

    #[test]
    fn k1_values() {
        assert_abs_diff_eq!(
            k1(0.0, 0.0).unwrap(),
            0.25 + 1.0 / 36.0 + 1.0 / 720.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(k1(0.3, 0.7).unwrap(), -0.0391333, epsilon = 1e-7);
        assert!(k1(-0.1, 0.5).is_err());
    }

    #[test]
    fn k2_values() {
        let c = k1(0.0, 0.0).unwrap();
        assert_abs_diff_eq!(k2((0.0, 0.0), (0.0, 0.0)).unwrap(), c * c, epsilon = 1e-12);
        let d = k1(0.3, 0.7).unwrap();
        assert_abs_diff_eq!(
            k2((0.3, 0.3), (0.7, 0.7)).unwrap(),
            d * d,
            epsilon = 1e-12
        );
    }

    #[test]
    fn kd_values_and_row_sums() {
        assert_abs_diff_eq!(kd(1, 1, 3).unwrap(), 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(kd(1, 2, 3).unwrap(), -1.0 / 3.0, epsilon = 1e-15);
        for u in 1..=5 {
            let row_sum: f64 = (1..=5).map(|v| kd(u, v, 5).unwrap()).sum();
            assert_abs_diff_eq!(row_sum, 0.0, epsilon = 1e-15);
        }
        assert!(kd(0, 1, 3).is_err());
        assert!(kd(1, 4, 3).is_err());
        assert!(kd(1, 1, 1).is_err());
    }

    proptest! {
        #[test]
        fn k1_symmetric(a in 0.0..=1.0f64, b in 0.0..=1.0f64) {
            prop_assert_eq!(k1(a, b).unwrap(), k1(b, a).unwrap());
        }

        #[test]
        fn k1_diag_positive(a in 0.0..=1.0f64) {
            prop_assert!(k1(a, a).unwrap() > 0.0);
        }

        #[test]
        fn k2_is_product(a in 0.0..=1.0f64, b in 0.0..=1.0f64,
                         c in 0.0..=1.0f64, d in 0.0..=1.0f64) {
            let lhs = k2((a, b), (c, d)).unwrap();
            let rhs = k1(a, c).unwrap() * k1(b, d).unwrap();
            prop_assert!((lhs - rhs).abs() < 1e-14);
        }
    }
}
