//! Fluxes, probabilities, coupling rates, and phase diagnostics.
