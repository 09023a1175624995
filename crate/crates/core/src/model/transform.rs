use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// Per-output variance-stabilizing transform. All sampling happens on the
/// transformed scale; every reported quantity is inverse-transformed back
/// to original units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputTransform {
    #[default]
    Identity,
    Sqrt,
    Log,
    Logit,
}

impl OutputTransform {
    pub fn apply(self, y: f64) -> Result<f64> {
        match self {
            OutputTransform::Identity => Ok(y),
            OutputTransform::Sqrt => {
                if y < 0.0 {
                    Err(CoreError::invalid(format!(
                        "sqrt transform needs nonnegative data, got {y}"
                    )))
                } else {
                    Ok(y.sqrt())
                }
            }
            OutputTransform::Log => {
                if y <= 0.0 {
                    Err(CoreError::invalid(format!(
                        "log transform needs positive data, got {y}"
                    )))
                } else {
                    Ok(y.ln())
                }
            }
            OutputTransform::Logit => {
                if y <= 0.0 || y >= 1.0 {
                    Err(CoreError::invalid(format!(
                        "logit transform needs data strictly in (0,1), got {y}"
                    )))
                } else {
                    Ok((y / (1.0 - y)).ln())
                }
            }
        }
    }

    pub fn invert(self, z: f64) -> f64 {
        match self {
            OutputTransform::Identity => z,
            OutputTransform::Sqrt => z * z,
            OutputTransform::Log => z.exp(),
            OutputTransform::Logit => 1.0 / (1.0 + (-z).exp()),
        }
    }
}

/// Apply per-output transforms to a full output vector.
pub fn apply_transforms(y: &[f64], transforms: &[OutputTransform]) -> Result<Vec<f64>> {
    if y.len() != transforms.len() {
        return Err(CoreError::invalid(format!(
            "output vector length {} does not match {} transforms",
            y.len(),
            transforms.len()
        )));
    }
    y.iter()
        .zip(transforms)
        .map(|(&v, t)| t.apply(v))
        .collect()
}

pub fn invert_transforms(z: &[f64], transforms: &[OutputTransform]) -> Vec<f64> {
    z.iter()
        .zip(transforms)
        .map(|(&v, t)| t.invert(v))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn basic_values() {
        assert_abs_diff_eq!(OutputTransform::Sqrt.apply(0.09).unwrap(), 0.3, epsilon = 1e-12);
        assert_abs_diff_eq!(OutputTransform::Logit.apply(0.5).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn domain_violations() {
        assert!(OutputTransform::Sqrt.apply(-0.1).is_err());
        assert!(OutputTransform::Log.apply(0.0).is_err());
        assert!(OutputTransform::Logit.apply(1.0).is_err());
    }

    proptest! {
        #[test]
        fn round_trip(y in 0.001..0.999f64) {
            for t in [OutputTransform::Identity, OutputTransform::Sqrt,
                      OutputTransform::Log, OutputTransform::Logit] {
                let z = t.apply(y).unwrap();
                prop_assert!((t.invert(z) - y).abs() < 1e-12);
            }
        }
    }
}
