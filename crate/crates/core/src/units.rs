//! Atomic units throughout: energies in hartree, lengths in bohr, hbar = 1.

/// Wavenumbers per hartree.
pub const CM_PER_HARTREE: f64 = 219_474.631_363_2;

/// Default particle mass used by all built-in benchmarks, in electron masses.
pub const DEFAULT_MASS: f64 = 2000.0;

pub fn cm_to_hartree(e_cm: f64) -> f64 {
    e_cm / CM_PER_HARTREE
}

pub fn hartree_to_cm(e_hartree: f64) -> f64 {
    e_hartree * CM_PER_HARTREE
}
