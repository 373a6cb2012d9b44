//! Activation functions and their derivatives.
//!
//! Only ReLU has an exact-zero plateau on the negative half-line, so only
//! ReLU units are eligible for dead-neuron detection and stripping. GELU is
//! strictly negative for negative inputs and LeakyReLU passes a scaled
//! input through, so neither can go silent the way a rectifier can.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Supported activation functions.
///
/// `LeakyReLU` carries its negative-side slope, which must lie in `(0, 1)`;
/// use [`ActivationKind::leaky_relu`] to construct a validated value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActivationKind {
    Relu,
    LeakyRelu(f64),
    Gelu,
    Identity,
}

/// Standard normal CDF via the complementary error function. The erfc form
/// keeps precision in the far negative tail instead of rounding to zero.
fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal density.
fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

impl ActivationKind {
    /// Validated LeakyReLU constructor; slope must be in `(0, 1)`.
    pub fn leaky_relu(slope: f64) -> Result<Self> {
        if !(slope > 0.0 && slope < 1.0) {
            return Err(Error::Config(format!(
                "leaky_relu slope must lie in (0, 1), got {slope}"
            )));
        }
        Ok(ActivationKind::LeakyRelu(slope))
    }

    /// Applies the activation to a scalar.
    pub fn apply(self, x: f64) -> f64 {
        match self {
            ActivationKind::Relu => {
                if x > 0.0 {
                    x
                } else {
                    0.0
                }
            }
            ActivationKind::LeakyRelu(slope) => {
                if x > 0.0 {
                    x
                } else {
                    slope * x
                }
            }
            ActivationKind::Gelu => x * normal_cdf(x),
            ActivationKind::Identity => x,
        }
    }

    /// Derivative of the activation at `x`.
    ///
    /// The ReLU subgradient at exactly 0 is defined as 0 so that a neuron
    /// sitting on the boundary contributes no update, making
    /// "dead implies zero gradient" exact.
    pub fn derivative(self, x: f64) -> f64 {
        match self {
            ActivationKind::Relu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            ActivationKind::LeakyRelu(slope) => {
                if x > 0.0 {
                    1.0
                } else {
                    slope
                }
            }
            ActivationKind::Gelu => normal_cdf(x) + x * normal_pdf(x),
            ActivationKind::Identity => 1.0,
        }
    }

    /// Whether units using this activation can be classified dead. Only the
    /// exact-zero plateau of ReLU admits the zero-output, zero-gradient
    /// state.
    pub fn supports_dead_detection(self) -> bool {
        matches!(self, ActivationKind::Relu)
    }

    pub fn validate(self) -> Result<()> {
        if let ActivationKind::LeakyRelu(slope) = self {
            if !(slope > 0.0 && slope < 1.0) {
                return Err(Error::Config(format!(
                    "leaky_relu slope must lie in (0, 1), got {slope}"
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Test-only erf oracle, independent of libm: Maclaurin series
    /// erf(x) = 2/sqrt(pi) * sum (-1)^n x^(2n+1) / (n! (2n+1)), which
    /// converges rapidly for the |x| <= 3 range exercised here.
    fn erf_series(x: f64) -> f64 {
        let mut term = x;
        let mut sum = x;
        for n in 1..200 {
            let nf = n as f64;
            term *= -x * x / nf;
            let contrib = term / (2.0 * nf + 1.0);
            sum += contrib;
            if contrib.abs() < 1e-18 {
                break;
            }
        }
        sum * 2.0 / std::f64::consts::PI.sqrt()
    }

    fn central_diff(kind: ActivationKind, x: f64, h: f64) -> f64 {
        (kind.apply(x + h) - kind.apply(x - h)) / (2.0 * h)
    }

    #[test]
    fn relu_values() {
        assert_eq!(ActivationKind::Relu.apply(-2.0), 0.0);
        assert_eq!(ActivationKind::Relu.apply(3.5), 3.5);
        assert_eq!(ActivationKind::Relu.apply(0.0), 0.0);
    }

    #[test]
    fn relu_derivative_values() {
        assert_eq!(ActivationKind::Relu.derivative(-1.0), 0.0);
        assert_eq!(ActivationKind::Relu.derivative(2.0), 1.0);
        assert_eq!(ActivationKind::Relu.derivative(0.0), 0.0);
    }

    #[test]
    fn gelu_at_zero() {
        assert_eq!(ActivationKind::Gelu.apply(0.0), 0.0);
    }

    #[test]
    fn gelu_matches_erf_oracle_at_one() {
        let expected = 1.0 * 0.5 * (1.0 + erf_series(1.0 / std::f64::consts::SQRT_2));
        let got = ActivationKind::Gelu.apply(1.0);
        assert!((got - expected).abs() < 1e-14, "got {got}, want {expected}");
        // Frozen value from the oracle above.
        assert!((got - 0.8413447460685429).abs() < 1e-15);
    }

    #[test]
    fn gelu_derivative_matches_finite_difference() {
        for &x in &[-1.0, 0.5, 2.0] {
            let fd = central_diff(ActivationKind::Gelu, x, 1e-6);
            let an = ActivationKind::Gelu.derivative(x);
            assert!((fd - an).abs() < 1e-7, "x={x}: fd={fd}, analytic={an}");
        }
    }

    #[test]
    fn leaky_relu_slope_validation() {
        assert!(ActivationKind::leaky_relu(0.01).is_ok());
        assert!(ActivationKind::leaky_relu(0.0).is_err());
        assert!(ActivationKind::leaky_relu(1.0).is_err());
        assert!(ActivationKind::leaky_relu(-0.5).is_err());
    }

    proptest! {
        #[test]
        fn relu_nonnegative_and_zero_iff_nonpositive(x in -50.0f64..50.0) {
            let y = ActivationKind::Relu.apply(x);
            prop_assert!(y >= 0.0);
            prop_assert_eq!(y == 0.0, x <= 0.0);
        }

        #[test]
        fn gelu_has_no_zero_plateau(x in -30.0f64..-1e-9) {
            // Strictly negative on the negative half-line: GELU never goes
            // exactly silent, which is why detection is ReLU-only.
            prop_assert!(ActivationKind::Gelu.apply(x) < 0.0);
        }

        #[test]
        fn derivatives_match_finite_difference(x in -6.0f64..6.0, kind_idx in 0usize..4) {
            let kind = match kind_idx {
                0 => ActivationKind::Relu,
                1 => ActivationKind::LeakyRelu(0.01),
                2 => ActivationKind::Gelu,
                _ => ActivationKind::Identity,
            };
            // Exclude the ReLU/LeakyReLU kink where the derivative jumps.
            let kinked = matches!(kind, ActivationKind::Relu | ActivationKind::LeakyRelu(_));
            prop_assume!(!kinked || x.abs() > 1e-4);
            let fd = central_diff(kind, x, 1e-6);
            let an = kind.derivative(x);
            prop_assert!((fd - an).abs() < 1e-7, "kind={kind:?} x={x}: fd={fd} analytic={an}");
        }
    }
}
