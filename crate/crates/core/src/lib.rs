//! Optical transmittance of ultra-diluted ("smeared") gas.
//!
//! A gas particle between collisions is a free quantum particle: its position
//! density `|Ψ|²` is an isotropic Gaussian whose standard deviation grows with
//! time. When the spread at the mean free time becomes comparable to the size
//! of the detector, the probability that a photon is scattered out of the
//! source-detector path by any single particle drops below the classical
//! all-or-nothing value, and the measured transmittance rises and becomes
//! detector-size dependent.
//!
//! The crate provides:
//!
//! * [`wavepacket`]: the spreading law `σ(t)`, its expectation over an
//!   exponential free-time distribution, and 1-D Gaussian interval masses;
//! * [`geometry`]: detector shapes, the circumscribed-square half-side,
//!   the source-detector axis decomposition, and the detectability tunnel;
//! * [`scattering`]: per-particle scattering probabilities: the erf closed
//!   forms and an adaptive-quadrature path for arbitrary shapes;
//! * [`gascloud`]: species data, kinetic helpers (number density, mean free
//!   time), and seeded uniform cloud sampling;
//! * [`transmittance`]: the N-particle product, its circumscribed-square
//!   bound, and the classical local-particle baseline;
//! * [`harness`]: detector-size sweeps, paired-detector ratio experiments,
//!   plain-text configuration, and CSV emission.

// frozen test oracles keep their high-precision digits
#![cfg_attr(test, allow(clippy::excessive_precision))]

pub mod consts;
pub mod erf;
pub mod error;
pub mod gascloud;
pub mod geometry;
pub mod harness;
pub mod quad;
pub mod scattering;
pub mod transmittance;
pub mod wavepacket;

pub use error::{Error, Result};
