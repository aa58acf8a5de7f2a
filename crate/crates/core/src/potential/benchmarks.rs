//! Built-in benchmark systems and their published run parameters.
//!
//! Barrier heights, ramp rises, couplings, and the Tully model parameters are
//! taken as given. The Eckart widths and the ramp steepness are not published
//! anywhere with full precision, so they were calibrated once against the
//! closed-form transmission values quoted for these systems (root search on
//! the shape parameter, see [`super::analytic`]); the calibrated digits are
//! frozen here.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use super::forms::Curve;
use super::model::{DiabaticModel, EffectivePolicy, ModelBuilder, ScatteringProblem};
use crate::error::Error;
use crate::units::cm_to_hartree;

/// Eckart A barrier height, hartree.
pub const ECKART_A_HEIGHT: f64 = 0.001823;
/// Eckart A width, calibrated so the analytic transmission at E = V0 equals
/// 0.716641936131 for m = 2000.
pub const ECKART_A_WIDTH: f64 = 3.000_383_211_091_239_7;
/// Eckart B barrier height, hartree.
pub const ECKART_B_HEIGHT: f64 = 0.011;
/// Eckart B width, calibrated against the deep-tunneling transmissions
/// 1.559e-5 (E = 0.4 V0) and 9.920e-10 (E = 0.1 V0).
pub const ECKART_B_WIDTH: f64 = 1.364_001_173_162_058_2;
/// Rise of the uphill ramp, hartree.
pub const RAMP_RISE: f64 = 0.001823;
/// Ramp steepness, calibrated so the analytic step reflection at
/// E = 0.0023 equals 0.023901 for m = 2000.
pub const RAMP_BETA: f64 = 2.498_342_505_617_759_8;
/// Half the center-to-center separation of the double barrier, bohr.
pub const DOUBLE_BARRIER_HALF_SEPARATION: f64 = 1.0;
/// Peak of the pure-coupling Gaussian, in wavenumbers.
pub const COUPLING_PEAK_CM: f64 = 150.0;

/// Optional overrides for the shape parameters that are free by construction.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ShapeParams {
    /// Eckart width `a` in 1/bohr (both Eckart systems and the barrier ramp).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eckart_width: Option<f64>,
    /// Ramp steepness `beta` in 1/bohr.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ramp_beta: Option<f64>,
    /// Half separation of the double barrier, bohr.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_separation: Option<f64>,
}

/// Reference run parameters for a benchmark: energy, grid size, window,
/// stepping, and stopping time as used for the published probabilities.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RunDefaults {
    pub energy: f64,
    pub n: usize,
    pub x_left: f64,
    pub x_right: f64,
    /// Fixed-step runs take `steps_per_shift` RK4 steps per shift time.
    pub steps_per_shift: u32,
    pub t_max: f64,
    /// Adaptive runs use this Cash-Karp tolerance instead of fixed steps.
    pub eps: Option<f64>,
    /// Whether the phase-modified (symmetric) equations apply.
    pub phase_modified: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Benchmark {
    EckartA,
    EckartB,
    UphillRamp,
    BarrierRamp,
    DoubleBarrier,
    PureCoupling,
    Tully1,
    Tully2,
}

impl Benchmark {
    pub const ALL: [Benchmark; 8] = [
        Benchmark::EckartA,
        Benchmark::EckartB,
        Benchmark::UphillRamp,
        Benchmark::BarrierRamp,
        Benchmark::DoubleBarrier,
        Benchmark::PureCoupling,
        Benchmark::Tully1,
        Benchmark::Tully2,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Benchmark::EckartA => "eckart_a",
            Benchmark::EckartB => "eckart_b",
            Benchmark::UphillRamp => "uphill_ramp",
            Benchmark::BarrierRamp => "barrier_ramp",
            Benchmark::DoubleBarrier => "double_barrier",
            Benchmark::PureCoupling => "pure_coupling",
            Benchmark::Tully1 => "tully1",
            Benchmark::Tully2 => "tully2",
        }
    }

    pub fn model(&self) -> DiabaticModel {
        self.model_with(ShapeParams::default())
    }

    pub fn model_with(&self, p: ShapeParams) -> DiabaticModel {
        let eckart = |height: f64, width: f64, center: f64| Curve::Sech2 {
            amplitude: height,
            a: p.eckart_width.unwrap_or(width),
            center,
        };
        let ramp = Curve::TanhStep {
            left: 0.0,
            right: RAMP_RISE,
            beta: p.ramp_beta.unwrap_or(RAMP_BETA),
            center: 0.0,
        };
        // all built-in models satisfy the invariants by construction
        let built: crate::error::Result<DiabaticModel> = match self {
            Benchmark::EckartA => DiabaticModel::single(
                eckart(ECKART_A_HEIGHT, ECKART_A_WIDTH, 0.0),
                EffectivePolicy::Zero,
            ),
            Benchmark::EckartB => DiabaticModel::single(
                eckart(ECKART_B_HEIGHT, ECKART_B_WIDTH, 0.0),
                EffectivePolicy::Zero,
            ),
            Benchmark::UphillRamp => DiabaticModel::single(ramp, EffectivePolicy::Diagonal),
            Benchmark::BarrierRamp => DiabaticModel::single(
                Curve::Sum {
                    terms: vec![eckart(ECKART_A_HEIGHT, ECKART_A_WIDTH, 0.0), ramp.clone()],
                },
                EffectivePolicy::Bridge {
                    beta: p.ramp_beta.unwrap_or(RAMP_BETA),
                    center: 0.0,
                },
            ),
            Benchmark::DoubleBarrier => {
                let d = p.half_separation.unwrap_or(DOUBLE_BARRIER_HALF_SEPARATION);
                DiabaticModel::single(
                    Curve::Sum {
                        terms: vec![
                            eckart(ECKART_A_HEIGHT, ECKART_A_WIDTH, -d),
                            eckart(ECKART_A_HEIGHT, ECKART_A_WIDTH, d),
                        ],
                    },
                    EffectivePolicy::Zero,
                )
            }
            Benchmark::PureCoupling => ModelBuilder::new(2)
                .term(
                    0,
                    1,
                    Curve::Gaussian {
                        amplitude: cm_to_hartree(COUPLING_PEAK_CM),
                        alpha: 1.0,
                        center: 0.0,
                    },
                )
                .effective(EffectivePolicy::Zero),
            Benchmark::Tully1 => ModelBuilder::new(2)
                .term(
                    0,
                    0,
                    Curve::TanhStep {
                        left: -0.01,
                        right: 0.01,
                        beta: 1.2,
                        center: 0.0,
                    },
                )
                .term(
                    1,
                    1,
                    Curve::TanhStep {
                        left: 0.01,
                        right: -0.01,
                        beta: 1.2,
                        center: 0.0,
                    },
                )
                .term(
                    0,
                    1,
                    Curve::Gaussian {
                        amplitude: 0.005,
                        alpha: 1.0,
                        center: 0.0,
                    },
                )
                .effective(EffectivePolicy::Diagonal),
            Benchmark::Tully2 => ModelBuilder::new(2)
                .term(
                    1,
                    1,
                    Curve::Sum {
                        terms: vec![
                            Curve::Gaussian {
                                amplitude: -0.10,
                                alpha: 0.28,
                                center: 0.0,
                            },
                            Curve::Constant { value: 0.05 },
                        ],
                    },
                )
                .term(
                    0,
                    1,
                    Curve::Gaussian {
                        amplitude: 0.015,
                        alpha: 0.06,
                        center: 0.0,
                    },
                )
                .effective(EffectivePolicy::Diagonal),
        };
        built.expect("built-in benchmark construction cannot fail")
    }

    /// The run parameters used for this system's published probabilities.
    pub fn defaults(&self) -> RunDefaults {
        match self {
            Benchmark::EckartA => RunDefaults {
                energy: ECKART_A_HEIGHT,
                n: 20,
                x_left: -2.0,
                x_right: 2.0,
                steps_per_shift: 1,
                t_max: 3899.0,
                eps: None,
                phase_modified: true,
            },
            Benchmark::EckartB => RunDefaults {
                energy: ECKART_B_HEIGHT,
                n: 25,
                x_left: -2.6,
                x_right: 2.1,
                steps_per_shift: 3,
                t_max: 2893.0,
                eps: None,
                phase_modified: true,
            },
            Benchmark::UphillRamp => RunDefaults {
                energy: 0.0023,
                n: 19,
                x_left: -1.5,
                x_right: 2.2,
                steps_per_shift: 2,
                t_max: 5792.0,
                eps: None,
                phase_modified: false,
            },
            Benchmark::BarrierRamp => RunDefaults {
                energy: 0.0023,
                n: 15,
                x_left: -1.5,
                x_right: 2.0,
                steps_per_shift: 2,
                t_max: 7000.0,
                eps: None,
                phase_modified: false,
            },
            Benchmark::DoubleBarrier => RunDefaults {
                energy: 0.0014,
                n: 20,
                x_left: -2.2,
                x_right: 2.2,
                steps_per_shift: 1,
                t_max: 39143.0,
                eps: None,
                phase_modified: true,
            },
            Benchmark::PureCoupling => RunDefaults {
                energy: cm_to_hartree(100.0),
                n: 61,
                x_left: -3.0,
                x_right: 3.0,
                steps_per_shift: 1,
                t_max: 50_000.0,
                eps: Some(1e-6),
                phase_modified: true,
            },
            Benchmark::Tully1 => RunDefaults {
                energy: 0.11,
                n: 50,
                x_left: -3.0,
                x_right: 3.0,
                steps_per_shift: 1,
                t_max: 1000.0,
                eps: Some(1e-6),
                phase_modified: false,
            },
            Benchmark::Tully2 => RunDefaults {
                energy: (-2.0f64).exp(),
                n: 300,
                x_left: -8.0,
                x_right: 8.0,
                steps_per_shift: 1,
                t_max: 2000.0,
                eps: Some(1e-4),
                phase_modified: false,
            },
        }
    }

    /// Problem at the default energy and window.
    pub fn problem(&self) -> ScatteringProblem {
        let d = self.defaults();
        ScatteringProblem::new(self.model(), d.energy, d.x_left, d.x_right)
    }
}

impl fmt::Display for Benchmark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Benchmark {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let key = s.to_ascii_lowercase().replace('-', "_");
        Benchmark::ALL
            .iter()
            .copied()
            .find(|b| b.name() == key)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown benchmark {s:?}; expected one of {}",
                    Benchmark::ALL.map(|b| b.name()).join(", ")
                ))
            })
    }
}
