//! Text-config representation of a diabatic model.
//!
//! Models are described in TOML: a surface count, a list of `[[term]]` tables
//! giving the matrix entries by 1-based indices, and an `[effective]` table
//! naming the effective-potential policy. Energies are hartree unless a term
//! sets `unit = "cm-1"`.

use serde::{Deserialize, Serialize};

use super::forms::Curve;
use super::model::{DiabaticModel, EffectivePolicy, ModelBuilder};
use crate::error::{Error, Result};
use crate::units::CM_PER_HARTREE;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum EnergyUnit {
    #[default]
    #[serde(rename = "hartree")]
    Hartree,
    #[serde(rename = "cm-1")]
    Wavenumber,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermSpec {
    /// 1-based surface indices.
    pub i: usize,
    pub j: usize,
    #[serde(default, skip_serializing_if = "is_default_unit")]
    pub unit: EnergyUnit,
    #[serde(flatten)]
    pub curve: Curve,
}

fn is_default_unit(u: &EnergyUnit) -> bool {
    *u == EnergyUnit::Hartree
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum EffectiveSpec {
    Zero,
    Diagonal,
    Bridge {
        beta: f64,
        #[serde(default)]
        center: f64,
    },
    /// Curves in hartree, one per surface.
    Explicit { curves: Vec<Curve> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub surfaces: usize,
    #[serde(rename = "term")]
    pub terms: Vec<TermSpec>,
    pub effective: EffectiveSpec,
}

impl ModelSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("model config: {e}")))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("model spec serializes")
    }

    pub fn build(&self) -> Result<DiabaticModel> {
        if self.surfaces == 0 {
            return Err(Error::Config("surfaces must be at least 1".into()));
        }
        let mut builder = ModelBuilder::new(self.surfaces);
        let mut seen = std::collections::HashSet::new();
        for term in &self.terms {
            if term.i == 0 || term.j == 0 || term.i > self.surfaces || term.j > self.surfaces {
                return Err(Error::Config(format!(
                    "term indices ({}, {}) out of range for {} surfaces",
                    term.i, term.j, self.surfaces
                )));
            }
            let key = (term.i.min(term.j), term.i.max(term.j));
            if !seen.insert(key) {
                return Err(Error::Config(format!(
                    "duplicate term for indices ({}, {})",
                    key.0, key.1
                )));
            }
            let curve = match term.unit {
                EnergyUnit::Hartree => term.curve.clone(),
                EnergyUnit::Wavenumber => term.curve.scale_energy(1.0 / CM_PER_HARTREE),
            };
            builder = builder.term(term.i - 1, term.j - 1, curve);
        }
        let policy = match &self.effective {
            EffectiveSpec::Zero => EffectivePolicy::Zero,
            EffectiveSpec::Diagonal => EffectivePolicy::Diagonal,
            EffectiveSpec::Bridge { beta, center } => EffectivePolicy::Bridge {
                beta: *beta,
                center: *center,
            },
            EffectiveSpec::Explicit { curves } => EffectivePolicy::Explicit(curves.clone()),
        };
        builder.effective(policy)
    }
}
