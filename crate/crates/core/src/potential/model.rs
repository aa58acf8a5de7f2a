//! Diabatic model assembly and the scattering problem container.

use serde::Serialize;

use super::forms::Curve;
use crate::error::{Error, Result};

fn tri_len(f: usize) -> usize {
    f * (f + 1) / 2
}

fn tri_index(f: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * (2 * f - i + 1) / 2 + (j - i)
}

/// Symmetric f x f matrix of potential curves plus the effective potentials
/// that generate each surface's trajectories. Surfaces are indexed from 0.
#[derive(Debug, Clone, Serialize)]
pub struct DiabaticModel {
    f: usize,
    terms: Vec<Curve>,
    v_eff: Vec<Curve>,
}

/// How the effective potentials are derived from the diagonal curves.
#[derive(Debug, Clone, PartialEq)]
pub enum EffectivePolicy {
    /// V_eff_i = 0. Valid only when every diagonal curve decays to zero on
    /// both sides; trajectories are then uniform.
    Zero,
    /// V_eff_i = V_ii. Valid for monotonic or well-shaped diagonals.
    Diagonal,
    /// V_eff_i is a tanh step between the two diagonal asymptotes, for
    /// barrier-shaped diagonals where following V_ii would create a turning
    /// point.
    Bridge { beta: f64, center: f64 },
    /// Caller-supplied curves, one per surface.
    Explicit(Vec<Curve>),
}

pub struct ModelBuilder {
    f: usize,
    terms: Vec<Curve>,
}

impl ModelBuilder {
    pub fn new(f: usize) -> Self {
        Self {
            f,
            terms: vec![Curve::Zero; tri_len(f)],
        }
    }

    /// Set V_ij (and V_ji) to the given curve. Indices are 0-based.
    pub fn term(mut self, i: usize, j: usize, curve: Curve) -> Self {
        assert!(i < self.f && j < self.f, "surface index out of range");
        self.terms[tri_index(self.f, i, j)] = curve;
        self
    }

    pub fn effective(self, policy: EffectivePolicy) -> Result<DiabaticModel> {
        if self.f == 0 {
            return Err(Error::Config("model needs at least one surface".into()));
        }
        let diag =
            |i: usize| -> &Curve { &self.terms[tri_index(self.f, i, i)] };
        let v_eff: Vec<Curve> = match policy {
            EffectivePolicy::Zero => {
                for i in 0..self.f {
                    let d = diag(i);
                    if d.left_asymptote() != 0.0 || d.right_asymptote() != 0.0 {
                        return Err(Error::Config(format!(
                            "zero effective-potential policy needs zero asymptotes on surface {}",
                            i + 1
                        )));
                    }
                }
                vec![Curve::Zero; self.f]
            }
            EffectivePolicy::Diagonal => (0..self.f).map(|i| diag(i).clone()).collect(),
            EffectivePolicy::Bridge { beta, center } => (0..self.f)
                .map(|i| {
                    let d = diag(i);
                    let (l, r) = (d.left_asymptote(), d.right_asymptote());
                    if l == r {
                        Curve::Constant { value: l }
                    } else {
                        Curve::TanhStep {
                            left: l,
                            right: r,
                            beta,
                            center,
                        }
                    }
                })
                .collect(),
            EffectivePolicy::Explicit(curves) => {
                if curves.len() != self.f {
                    return Err(Error::Config(format!(
                        "expected {} effective potentials, got {}",
                        self.f,
                        curves.len()
                    )));
                }
                curves
            }
        };
        Ok(DiabaticModel {
            f: self.f,
            terms: self.terms,
            v_eff,
        })
    }
}

impl DiabaticModel {
    pub fn builder(f: usize) -> ModelBuilder {
        ModelBuilder::new(f)
    }

    /// Single-surface model from one potential curve.
    pub fn single(v: Curve, policy: EffectivePolicy) -> Result<Self> {
        ModelBuilder::new(1).term(0, 0, v).effective(policy)
    }

    pub fn surfaces(&self) -> usize {
        self.f
    }

    pub fn value(&self, i: usize, j: usize, x: f64) -> f64 {
        self.terms[tri_index(self.f, i, j)].value(x)
    }

    pub fn term(&self, i: usize, j: usize) -> &Curve {
        &self.terms[tri_index(self.f, i, j)]
    }

    pub fn diagonal(&self, i: usize) -> &Curve {
        self.term(i, i)
    }

    pub fn v_eff(&self, i: usize) -> &Curve {
        &self.v_eff[i]
    }

    /// Left asymptote of V_ii.
    pub fn v_left(&self, i: usize) -> f64 {
        self.diagonal(i).left_asymptote()
    }

    /// Right asymptote of V_ii.
    pub fn v_right(&self, i: usize) -> f64 {
        self.diagonal(i).right_asymptote()
    }

    /// True when all diagonal asymptotes vanish and every effective potential
    /// is identically zero, the precondition for the symmetric equations.
    pub fn symmetric_zero(&self) -> bool {
        (0..self.f).all(|i| {
            self.v_left(i) == 0.0 && self.v_right(i) == 0.0 && self.v_eff[i].is_zero()
        })
    }

    /// True when any off-diagonal term is nonzero.
    pub fn has_coupling(&self) -> bool {
        (0..self.f).any(|i| ((i + 1)..self.f).any(|j| !self.term(i, j).is_zero()))
    }
}

/// A model together with the scattering energy, particle mass, and the grid
/// window. Everything downstream reads its parameters from here.
#[derive(Debug, Clone, Serialize)]
pub struct ScatteringProblem {
    pub model: DiabaticModel,
    /// Total energy in hartree.
    pub energy: f64,
    /// Particle mass in electron masses.
    pub mass: f64,
    pub hbar: f64,
    pub x_left: f64,
    pub x_right: f64,
}

impl ScatteringProblem {
    pub fn new(model: DiabaticModel, energy: f64, x_left: f64, x_right: f64) -> Self {
        Self {
            model,
            energy,
            mass: crate::units::DEFAULT_MASS,
            hbar: 1.0,
            x_left,
            x_right,
        }
    }

    pub fn with_mass(mut self, mass: f64) -> Self {
        self.mass = mass;
        self
    }

    /// Trajectory speed sqrt(2 [E - V_eff_i(x)] / m) for surface i at x.
    pub fn velocity(&self, i: usize, x: f64) -> Result<f64> {
        let gap = self.energy - self.model.v_eff(i).value(x);
        if gap <= 0.0 {
            return Err(Error::TurningPoint {
                surface: i + 1,
                x,
                margin: gap,
            });
        }
        Ok((2.0 * gap / self.mass).sqrt())
    }

    /// Asymptotic speed on the left, from the diagonal asymptote.
    pub fn v_asym_left(&self, i: usize) -> Result<f64> {
        self.asym_speed(i, self.model.v_left(i))
    }

    /// Asymptotic speed on the right.
    pub fn v_asym_right(&self, i: usize) -> Result<f64> {
        self.asym_speed(i, self.model.v_right(i))
    }

    fn asym_speed(&self, i: usize, asymptote: f64) -> Result<f64> {
        let gap = self.energy - asymptote;
        if gap <= 0.0 {
            return Err(Error::ClosedChannel {
                surface: i + 1,
                energy: self.energy,
                asymptote,
            });
        }
        Ok((2.0 * gap / self.mass).sqrt())
    }

    /// Check the admissibility conditions and report measured residuals.
    pub fn validate(&self, tol: f64) -> ValidationReport {
        let f = self.model.surfaces();
        let samples = 801;
        let xs: Vec<f64> = (0..samples)
            .map(|k| {
                self.x_left + (self.x_right - self.x_left) * k as f64 / (samples - 1) as f64
            })
            .collect();

        let mut checks = Vec::new();

        // off-diagonal couplings must have decayed at the window edges
        let mut edge_coupling: f64 = 0.0;
        for i in 0..f {
            for j in (i + 1)..f {
                edge_coupling = edge_coupling
                    .max(self.model.value(i, j, self.x_left).abs())
                    .max(self.model.value(i, j, self.x_right).abs());
            }
        }
        checks.push(CheckItem {
            name: "edge_coupling_decay".into(),
            measured: edge_coupling,
            threshold: tol,
            passed: edge_coupling < tol,
        });

        // effective potentials must match the diagonals at the edges
        let mut edge_mismatch: f64 = 0.0;
        for i in 0..f {
            for &x in [self.x_left, self.x_right].iter() {
                edge_mismatch = edge_mismatch
                    .max((self.model.value(i, i, x) - self.model.v_eff(i).value(x)).abs());
            }
        }
        checks.push(CheckItem {
            name: "effective_matches_diagonal_at_edges".into(),
            measured: edge_mismatch,
            threshold: tol,
            passed: edge_mismatch < tol,
        });

        // no turning points: E - V_eff_i > 0 across the window
        let mut min_gap = f64::INFINITY;
        for i in 0..f {
            for &x in &xs {
                min_gap = min_gap.min(self.energy - self.model.v_eff(i).value(x));
            }
        }
        checks.push(CheckItem {
            name: "no_turning_points".into(),
            measured: min_gap,
            threshold: 0.0,
            passed: min_gap > 0.0,
        });

        // effective potentials stay below the larger diagonal asymptote
        let mut excess: f64 = f64::NEG_INFINITY;
        for i in 0..f {
            let cap = self.model.v_left(i).max(self.model.v_right(i));
            for &x in &xs {
                excess = excess.max(self.model.v_eff(i).value(x) - cap);
            }
        }
        checks.push(CheckItem {
            name: "effective_below_asymptote_cap".into(),
            measured: excess,
            threshold: 1e-12,
            passed: excess <= 1e-12,
        });

        // incident channel must be open
        let incident_gap = self.energy - self.model.v_left(0);
        checks.push(CheckItem {
            name: "incident_channel_open".into(),
            measured: incident_gap,
            threshold: 0.0,
            passed: incident_gap > 0.0,
        });

        ValidationReport { checks }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckItem {
    pub name: String,
    pub measured: f64,
    pub threshold: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<CheckItem>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&CheckItem> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::Benchmark;

    #[test]
    fn matrix_is_symmetric() {
        let m = Benchmark::Tully1.model();
        for k in 0..100 {
            let x = -5.0 + 0.1 * k as f64;
            for i in 0..2 {
                for j in 0..2 {
                    assert_eq!(m.value(i, j, x), m.value(j, i, x));
                }
            }
        }
    }

    #[test]
    fn tully1_validation_passes_at_high_energy() {
        let p = ScatteringProblem::new(Benchmark::Tully1.model(), 0.11, -3.0, 3.0);
        let report = p.validate(1e-6);
        assert!(report.passed(), "failures: {:?}", report.failures());
        // min(E - V_eff) is attained at the right edge of surface 1
        let gap = report
            .checks
            .iter()
            .find(|c| c.name == "no_turning_points")
            .unwrap()
            .measured;
        assert!((gap - 0.10).abs() < 1e-4);
    }

    #[test]
    fn tully1_fails_below_right_asymptote() {
        let p = ScatteringProblem::new(Benchmark::Tully1.model(), 0.005, -3.0, 3.0);
        let report = p.validate(1e-6);
        assert!(!report.passed());
        assert!(!report
            .checks
            .iter()
            .find(|c| c.name == "no_turning_points")
            .unwrap()
            .passed);
    }

    #[test]
    fn pure_coupling_edge_magnitude() {
        let p = ScatteringProblem::new(
            Benchmark::PureCoupling.model(),
            crate::units::cm_to_hartree(100.0),
            -3.0,
            3.0,
        );
        let report = p.validate(1e-6);
        let edge = report
            .checks
            .iter()
            .find(|c| c.name == "edge_coupling_decay")
            .unwrap()
            .measured;
        let expected = crate::units::cm_to_hartree(150.0) * (-9.0f64).exp();
        assert!((edge - expected).abs() < 1e-12 * expected.max(1.0));
    }

    #[test]
    fn velocities() {
        let p = ScatteringProblem::new(
            Benchmark::PureCoupling.model(),
            crate::units::cm_to_hartree(100.0),
            -3.0,
            3.0,
        );
        // uniform trajectories: v = sqrt(2E/m) everywhere
        let v = p.velocity(0, 0.7).unwrap();
        assert!((v - 6.750_063_150_01e-4).abs() < 1e-12);
        assert_eq!(v, p.velocity(1, -2.0).unwrap());

        let t1 = ScatteringProblem::new(Benchmark::Tully1.model(), 0.11, -3.0, 3.0);
        assert!((t1.v_asym_right(0).unwrap() - 0.01).abs() < 1e-15);
        assert!((t1.v_asym_left(0).unwrap() - (2.0 * 0.12 / 2000.0f64).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn turning_point_and_closed_channel_errors() {
        let t1 = ScatteringProblem::new(Benchmark::Tully1.model(), 0.005, -3.0, 3.0);
        assert!(matches!(
            t1.velocity(0, 3.0),
            Err(Error::TurningPoint { surface: 1, .. })
        ));
        assert!(matches!(
            t1.v_asym_right(0),
            Err(Error::ClosedChannel { surface: 1, .. })
        ));
    }

    #[test]
    fn bridge_policy_spans_asymptotes() {
        let m = Benchmark::BarrierRamp.model();
        let ve = m.v_eff(0);
        assert!((ve.left_asymptote() - 0.0).abs() < 1e-18);
        assert!((ve.right_asymptote() - 0.001823).abs() < 1e-18);
        // the bridge is monotonic, the full diagonal is not
        assert!(ve.value(0.0) < 0.001823);
        assert!(m.value(0, 0, 0.0) > m.v_eff(0).value(0.0));
    }

    #[test]
    fn zero_policy_rejects_asymmetric_model() {
        let err = ModelBuilder::new(1)
            .term(
                0,
                0,
                Curve::TanhStep {
                    left: 0.0,
                    right: 0.001823,
                    beta: 2.5,
                    center: 0.0,
                },
            )
            .effective(EffectivePolicy::Zero);
        assert!(err.is_err());
    }
}
