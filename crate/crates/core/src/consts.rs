//! Physical constants used throughout the crate (SI units).

/// Reduced Planck constant, J·s (CODATA 2018).
pub const HBAR: f64 = 1.054571817e-34;

/// Boltzmann constant, J/K (exact since the 2019 SI redefinition).
pub const BOLTZMANN: f64 = 1.380649e-23;
