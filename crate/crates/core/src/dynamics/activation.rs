use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Slack accepted on the `[0, 1]` domain by [`Activation::eval`].
const DOMAIN_SLACK: f64 = 1e-9;

/// Activation applied componentwise after each normalization.
///
/// Every variant fixes 0 and 1 and is strictly increasing on `[0, 1]`.
/// `Power` is convex; `Sigmoid` is convex on `[0, 1/2]`, concave on
/// `[1/2, 1]` and passes through `(1/2, 1/2)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Activation {
    Identity,
    /// `k1 (y + t)^a + k2` with `k1 = 1 / ((1 + t)^a - t^a)` and `k2 = -k1 t^a`.
    Power {
        a: f64,
        t: f64,
    },
    /// Logistic of steepness `a`, recentred on 1/2 and rescaled to fix 0 and 1.
    Sigmoid {
        a: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    Identity,
    Power,
    Sigmoid,
}

/// An [`Activation`] with its normalizing constants resolved.
#[derive(Clone, Copy, Debug)]
pub struct CompiledActivation {
    kind: Kind,
    a: f64,
    t: f64,
    scale: f64,
    offset: f64,
}

impl CompiledActivation {
    #[inline]
    pub fn value(&self, y: f64) -> f64 {
        if y == 0.0 || y == 1.0 {
            return y;
        }
        let v = match self.kind {
            Kind::Identity => return y,
            Kind::Power => self.scale * (y + self.t).powf(self.a) + self.offset,
            Kind::Sigmoid => self.scale * (logistic(self.a, y - 0.5) - 0.5) + 0.5,
        };
        v.clamp(0.0, 1.0)
    }

    #[inline]
    pub fn derivative(&self, y: f64) -> f64 {
        match self.kind {
            Kind::Identity => 1.0,
            Kind::Power => self.scale * self.a * (y + self.t).powf(self.a - 1.0),
            Kind::Sigmoid => {
                let s = logistic(self.a, y - 0.5);
                self.scale * self.a * s * (1.0 - s)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EvalMode {
    Value,
    Derivative,
}

fn logistic(a: f64, z: f64) -> f64 {
    1.0 / (1.0 + (-a * z).exp())
}

impl Activation {
    pub fn power(a: f64, t: f64) -> Result<Self> {
        if !(a.is_finite() && a > 1.0) {
            return Err(invalid(format!("power exponent must exceed 1, got {a}")));
        }
        if !(t.is_finite() && t >= 0.0) {
            return Err(invalid(format!("power shift must be nonnegative, got {t}")));
        }
        Ok(Activation::Power { a, t })
    }

    pub fn sigmoid(a: f64) -> Result<Self> {
        if !(a.is_finite() && a > 0.0) {
            return Err(invalid(format!("sigmoid steepness must be positive, got {a}")));
        }
        Ok(Activation::Sigmoid { a })
    }

    /// `(k1, k2)` of the power variant.
    pub fn power_coefficients(a: f64, t: f64) -> (f64, f64) {
        let ta = t.powf(a);
        let k1 = 1.0 / ((1.0 + t).powf(a) - ta);
        (k1, -(k1 * ta))
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, Activation::Identity)
    }

    /// `h(y)` for `y` in `[0, 1]`, without domain checks. Endpoints map exactly
    /// onto themselves and the result is clamped to `[0, 1]`.
    #[inline]
    pub fn value(&self, y: f64) -> f64 {
        self.compile().value(y)
    }

    /// Analytic `h'(y)`.
    #[inline]
    pub fn derivative(&self, y: f64) -> f64 {
        self.compile().derivative(y)
    }

    /// Precomputes the rescaling constants for use in inner loops.
    pub fn compile(&self) -> CompiledActivation {
        match *self {
            Activation::Identity => CompiledActivation {
                kind: Kind::Identity,
                a: 1.0,
                t: 0.0,
                scale: 1.0,
                offset: 0.0,
            },
            Activation::Power { a, t } => {
                let (k1, k2) = Self::power_coefficients(a, t);
                CompiledActivation {
                    kind: Kind::Power,
                    a,
                    t,
                    scale: k1,
                    offset: k2,
                }
            }
            Activation::Sigmoid { a } => CompiledActivation {
                kind: Kind::Sigmoid,
                a,
                t: 0.0,
                scale: 0.5 / (logistic(a, 0.5) - 0.5),
                offset: 0.0,
            },
        }
    }

    /// Checked evaluation on `[0, 1]`.
    pub fn eval(&self, y: f64, mode: EvalMode) -> Result<f64> {
        if !(-DOMAIN_SLACK..=1.0 + DOMAIN_SLACK).contains(&y) {
            return Err(invalid(format!("activation argument {y} outside [0, 1]")));
        }
        let y = y.clamp(0.0, 1.0);
        Ok(match mode {
            EvalMode::Value => self.value(y),
            EvalMode::Derivative => self.derivative(y),
        })
    }
}

impl Default for Activation {
    fn default() -> Self {
        Activation::Power { a: 2.0, t: 0.01 }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Activation::Identity => write!(f, "identity"),
            Activation::Power { a, t } => write!(f, "power:{a},{t}"),
            Activation::Sigmoid { a } => write!(f, "sigmoid:{a}"),
        }
    }
}

/// Parses `identity`, `power:a,t` (or `power:a`, shift 0) and `sigmoid:a`.
impl FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, args) = s.split_once(':').unwrap_or((s, ""));
        let nums = args
            .split(',')
            .filter(|p| !p.trim().is_empty())
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|_| invalid(format!("bad activation parameter `{p}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        match (name.to_ascii_lowercase().as_str(), nums.as_slice()) {
            ("identity", []) => Ok(Activation::Identity),
            ("power", [a]) => Activation::power(*a, 0.0),
            ("power", [a, t]) => Activation::power(*a, *t),
            ("sigmoid", [a]) => Activation::sigmoid(*a),
            _ => Err(invalid(format!(
                "unknown activation `{s}` (expected identity | power:a,t | sigmoid:a)"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn central_difference(h: &Activation, y: f64) -> f64 {
        let step = 1e-6;
        (h.value(y + step) - h.value(y - step)) / (2.0 * step)
    }

    #[test]
    fn power_square() {
        let h = Activation::power(2.0, 0.0).unwrap();
        assert!((h.eval(0.5, EvalMode::Value).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn sigmoid_midpoint() {
        for a in [0.1, 1.0, 5.0, 20.0] {
            let h = Activation::sigmoid(a).unwrap();
            assert!((h.value(0.5) - 0.5).abs() < 1e-12, "a = {a}");
        }
    }

    #[test]
    fn shifted_power_slope_at_zero() {
        let h = Activation::power(2.0, 0.01).unwrap();
        // k1 * 2 * t with k1 = 1 / (1.01^2 - 0.01^2)
        let expected = 2.0 * 0.01 / (1.01f64.powi(2) - 0.01f64.powi(2));
        let got = h.eval(0.0, EvalMode::Derivative).unwrap();
        assert!((got - expected).abs() < 1e-15);
        assert!((got - 0.02 / 1.02).abs() < 1e-15);
        let fd = (h.value(1e-6) - h.value(0.0)) / 1e-6;
        assert!((fd - got).abs() < 1e-5);
    }

    #[test]
    fn endpoints_and_monotonicity() {
        let all = [
            Activation::Identity,
            Activation::power(1.2, 0.0).unwrap(),
            Activation::power(2.0, 0.01).unwrap(),
            Activation::power(3.0, 0.5).unwrap(),
            Activation::sigmoid(1.0).unwrap(),
            Activation::sigmoid(8.0).unwrap(),
        ];
        for h in all {
            assert_eq!(h.value(0.0), 0.0);
            assert_eq!(h.value(1.0), 1.0);
            let mut prev = 0.0;
            for k in 1..=1000 {
                let v = h.value(k as f64 / 1000.0);
                assert!(v > prev, "{h} not increasing at {k}");
                prev = v;
            }
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let all = [
            Activation::Identity,
            Activation::power(1.5, 0.0).unwrap(),
            Activation::power(2.0, 0.01).unwrap(),
            Activation::sigmoid(5.0).unwrap(),
        ];
        for h in all {
            for k in 1..20 {
                let y = k as f64 / 20.0;
                let rel = (h.derivative(y) - central_difference(&h, y)).abs() / h.derivative(y).abs().max(1e-3);
                assert!(rel < 1e-6, "{h} at {y}: {rel}");
            }
        }
    }

    #[test]
    fn domain_checks() {
        let h = Activation::Identity;
        assert!(h.eval(1.5, EvalMode::Value).is_err());
        assert!(h.eval(-0.1, EvalMode::Value).is_err());
        assert!(h.eval(1.0 + 1e-10, EvalMode::Value).is_ok());
        assert!(Activation::power(1.0, 0.0).is_err());
        assert!(Activation::power(2.0, -1.0).is_err());
        assert!(Activation::sigmoid(0.0).is_err());
    }

    #[test]
    fn parsing() {
        assert_eq!("identity".parse::<Activation>().unwrap(), Activation::Identity);
        assert_eq!(
            "power:2,0.01".parse::<Activation>().unwrap(),
            Activation::Power { a: 2.0, t: 0.01 }
        );
        assert_eq!(
            "power:1.5".parse::<Activation>().unwrap(),
            Activation::Power { a: 1.5, t: 0.0 }
        );
        assert_eq!(
            "sigmoid:5".parse::<Activation>().unwrap(),
            Activation::Sigmoid { a: 5.0 }
        );
        assert!("tanh:1".parse::<Activation>().is_err());
        assert!("power:0.5".parse::<Activation>().is_err());
        let h = Activation::Power { a: 2.0, t: 0.01 };
        assert_eq!(h.to_string().parse::<Activation>().unwrap(), h);
    }
}
