//! Independent dense-grid coupled-channel reference solver.
