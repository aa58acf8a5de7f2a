//! Scalar potential curves with analytic first and second derivatives.
//!
//! Every matrix element of a diabatic model is one of these forms (or a sum
//! of them), so derivative evaluation never falls back to finite differences.

use serde::{Deserialize, Serialize};

/// A real-valued curve V(x) with closed-form derivatives and asymptotes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum Curve {
    Zero,
    Constant {
        value: f64,
    },
    /// amplitude * exp(-alpha (x - center)^2)
    Gaussian {
        amplitude: f64,
        alpha: f64,
        #[serde(default)]
        center: f64,
    },
    /// amplitude * sech^2(a (x - center)), the Eckart barrier
    Sech2 {
        amplitude: f64,
        a: f64,
        #[serde(default)]
        center: f64,
    },
    /// left + (right - left) * (1 + tanh(beta (x - center))) / 2
    TanhStep {
        left: f64,
        right: f64,
        beta: f64,
        #[serde(default)]
        center: f64,
    },
    Sum {
        terms: Vec<Curve>,
    },
}

fn sech2(u: f64) -> f64 {
    let c = u.cosh();
    1.0 / (c * c)
}

impl Curve {
    pub fn value(&self, x: f64) -> f64 {
        match self {
            Curve::Zero => 0.0,
            Curve::Constant { value } => *value,
            Curve::Gaussian {
                amplitude,
                alpha,
                center,
            } => {
                let u = x - center;
                amplitude * (-alpha * u * u).exp()
            }
            Curve::Sech2 {
                amplitude,
                a,
                center,
            } => amplitude * sech2(a * (x - center)),
            Curve::TanhStep {
                left,
                right,
                beta,
                center,
            } => 0.5 * (left + right) + 0.5 * (right - left) * (beta * (x - center)).tanh(),
            Curve::Sum { terms } => terms.iter().map(|t| t.value(x)).sum(),
        }
    }

    pub fn deriv(&self, x: f64) -> f64 {
        match self {
            Curve::Zero | Curve::Constant { .. } => 0.0,
            Curve::Gaussian {
                amplitude,
                alpha,
                center,
            } => {
                let u = x - center;
                -2.0 * alpha * u * amplitude * (-alpha * u * u).exp()
            }
            Curve::Sech2 {
                amplitude,
                a,
                center,
            } => {
                let u = a * (x - center);
                -2.0 * a * amplitude * sech2(u) * u.tanh()
            }
            Curve::TanhStep {
                left,
                right,
                beta,
                center,
            } => 0.5 * (right - left) * beta * sech2(beta * (x - center)),
            Curve::Sum { terms } => terms.iter().map(|t| t.deriv(x)).sum(),
        }
    }

    pub fn deriv2(&self, x: f64) -> f64 {
        match self {
            Curve::Zero | Curve::Constant { .. } => 0.0,
            Curve::Gaussian {
                amplitude,
                alpha,
                center,
            } => {
                let u = x - center;
                (4.0 * alpha * alpha * u * u - 2.0 * alpha) * amplitude * (-alpha * u * u).exp()
            }
            Curve::Sech2 {
                amplitude,
                a,
                center,
            } => {
                // d2/du2 sech^2(u) = 2 sech^2(u) (2 - 3 sech^2(u))
                let s = sech2(a * (x - center));
                2.0 * a * a * amplitude * s * (2.0 - 3.0 * s)
            }
            Curve::TanhStep {
                left,
                right,
                beta,
                center,
            } => {
                let u = beta * (x - center);
                -(right - left) * beta * beta * sech2(u) * u.tanh()
            }
            Curve::Sum { terms } => terms.iter().map(|t| t.deriv2(x)).sum(),
        }
    }

    pub fn left_asymptote(&self) -> f64 {
        match self {
            Curve::Zero | Curve::Gaussian { .. } | Curve::Sech2 { .. } => 0.0,
            Curve::Constant { value } => *value,
            Curve::TanhStep { left, .. } => *left,
            Curve::Sum { terms } => terms.iter().map(|t| t.left_asymptote()).sum(),
        }
    }

    pub fn right_asymptote(&self) -> f64 {
        match self {
            Curve::Zero | Curve::Gaussian { .. } | Curve::Sech2 { .. } => 0.0,
            Curve::Constant { value } => *value,
            Curve::TanhStep { right, .. } => *right,
            Curve::Sum { terms } => terms.iter().map(|t| t.right_asymptote()).sum(),
        }
    }

    /// Rescale all energy-like parameters (amplitudes, plateau values) by
    /// `factor`, leaving length scales untouched. Used for cm^-1 inputs.
    pub fn scale_energy(&self, factor: f64) -> Curve {
        match self {
            Curve::Zero => Curve::Zero,
            Curve::Constant { value } => Curve::Constant {
                value: value * factor,
            },
            Curve::Gaussian {
                amplitude,
                alpha,
                center,
            } => Curve::Gaussian {
                amplitude: amplitude * factor,
                alpha: *alpha,
                center: *center,
            },
            Curve::Sech2 {
                amplitude,
                a,
                center,
            } => Curve::Sech2 {
                amplitude: amplitude * factor,
                a: *a,
                center: *center,
            },
            Curve::TanhStep {
                left,
                right,
                beta,
                center,
            } => Curve::TanhStep {
                left: left * factor,
                right: right * factor,
                beta: *beta,
                center: *center,
            },
            Curve::Sum { terms } => Curve::Sum {
                terms: terms.iter().map(|t| t.scale_energy(factor)).collect(),
            },
        }
    }

    /// True when the curve is structurally the zero function.
    pub fn is_zero(&self) -> bool {
        match self {
            Curve::Zero => true,
            Curve::Constant { value } => *value == 0.0,
            Curve::Sum { terms } => terms.iter().all(|t| t.is_zero()),
            _ => false,
        }
    }
}
