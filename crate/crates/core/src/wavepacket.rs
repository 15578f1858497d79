//! Free-particle Gaussian wave-packet spreading.
//!
//! Between collisions a gas particle evolves as a free minimum-uncertainty
//! Gaussian packet: the per-axis standard deviation of `|Ψ|²` grows as
//!
//! ```text
//! σ(t) = σ0 · sqrt(1 + (ħ t / (2 m σ0²))²)
//! ```
//!
//! Only `|Ψ|²` is ever represented (real, isotropic, per-axis σ); the
//! complex phase plays no role in any transmittance expression here.

use crate::consts::HBAR;
use crate::erf::{erf, erfc};
use crate::error::{require_finite, require_non_negative, require_positive, Error, Result};
use crate::quad::{integrate_1d, QuadOptions};

/// Mass and initial spread of a particle's Gaussian `|Ψ|²`.
#[derive(Clone, Copy, Debug)]
pub struct WavePacketSpec {
    /// Particle mass, kg.
    pub mass_kg: f64,
    /// Per-axis standard deviation of `|Ψ|²` at t = 0, m. For a gas molecule
    /// this is the re-localization width after a collision; it is an input,
    /// not a derived quantity.
    pub sigma0_m: f64,
    /// Reduced Planck constant, J·s. Defaults to the CODATA value; tests can
    /// scale it to probe limits.
    pub hbar: f64,
}

impl WavePacketSpec {
    pub fn new(mass_kg: f64, sigma0_m: f64) -> Result<Self> {
        Self::with_hbar(mass_kg, sigma0_m, HBAR)
    }

    pub fn with_hbar(mass_kg: f64, sigma0_m: f64, hbar: f64) -> Result<Self> {
        require_positive("mass", mass_kg)?;
        require_positive("sigma0", sigma0_m)?;
        require_positive("hbar", hbar)?;
        Ok(WavePacketSpec {
            mass_kg,
            sigma0_m,
            hbar,
        })
    }

    fn validate(&self) -> Result<()> {
        require_positive("mass", self.mass_kg)?;
        require_positive("sigma0", self.sigma0_m)?;
        require_positive("hbar", self.hbar)?;
        Ok(())
    }

    /// Time scale of the spreading crossover: `σ(t0) = σ0·√2`.
    pub fn spreading_time_s(&self) -> f64 {
        2.0 * self.mass_kg * self.sigma0_m * self.sigma0_m / self.hbar
    }
}

/// How the effective spread at the mean free time is interpreted.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpreadMode {
    /// `σ(t̄)`: the spreading law evaluated at the mean free time.
    AtMeanTime,
    /// `E[σ(t)]` with `t ~ Exp(t̄)`: the expectation of the spread over the
    /// exponential free-time distribution.
    ExpectedOverExponential,
}

/// Per-axis standard deviation of `|Ψ|²` after free evolution for `t`.
pub fn sigma_spread(spec: &WavePacketSpec, t_s: f64) -> Result<f64> {
    spec.validate()?;
    require_non_negative("time", t_s)?;
    let rate = spec.hbar / (2.0 * spec.mass_kg * spec.sigma0_m * spec.sigma0_m);
    let r = rate * t_s;
    Ok(spec.sigma0_m * (1.0 + r * r).sqrt())
}

/// Effective spread at the mean free time `t̄` under the chosen mode.
///
/// `ExpectedOverExponential` evaluates `∫₀^∞ σ(t) e^(-t/t̄)/t̄ dt` by adaptive
/// quadrature after the substitution `t = t̄·u/(1-u)`, to a relative error of
/// 1e-9. The result is never below `σ0`.
pub fn expected_sigma(spec: &WavePacketSpec, t_bar_s: f64, mode: SpreadMode) -> Result<f64> {
    spec.validate()?;
    require_positive("mean free time", t_bar_s)?;
    match mode {
        SpreadMode::AtMeanTime => sigma_spread(spec, t_bar_s),
        SpreadMode::ExpectedOverExponential => {
            let sigma0 = spec.sigma0_m;
            let rate = spec.hbar / (2.0 * spec.mass_kg * sigma0 * sigma0);
            // integrand in x = t/t̄ units: sigma(t̄ x) e^(-x), then x = u/(1-u)
            let f = move |u: f64| {
                let one_minus = 1.0 - u;
                if one_minus <= 0.0 {
                    return 0.0;
                }
                let x = u / one_minus;
                if !x.is_finite() || x > 745.0 {
                    return 0.0; // e^(-x) underflows; the tail is gone
                }
                let r = rate * t_bar_s * x;
                let sigma = sigma0 * (1.0 + r * r).sqrt();
                sigma * (-x).exp() / (one_minus * one_minus)
            };
            // resolve the crossover from flat to linear spreading at
            // x ~ t0/t̄ with a geometric ladder of breakpoints
            let x0 = spec.spreading_time_s() / t_bar_s;
            let mut breakpoints = vec![0.5, 0.8, 0.95];
            let mut v = x0;
            while v < 0.5 && v > 0.0 {
                breakpoints.push(v / (1.0 + v)); // u corresponding to x = v
                v *= 3.0;
            }
            let res = integrate_1d(f, (0.0, 1.0), &breakpoints, &QuadOptions::relative(1e-9))
                .map_err(|nc| Error::QuadratureDidNotConverge {
                    context: format!(
                        "expected spread over exponential free time (t_bar = {t_bar_s:e} s)"
                    ),
                    error_estimate: nc.error_estimate,
                    tolerance: nc.tolerance,
                })?;
            Ok(res.value.max(sigma0))
        }
    }
}

/// Probability mass of a 1-D Gaussian `N(center_offset, sigma²)` inside the
/// window `[-half_width, half_width]`:
///
/// ```text
/// F(u, r, σ) = ½ [erf((u+r)/(√2 σ)) - erf((u-r)/(√2 σ))]
/// ```
///
/// Even in `u`, nonincreasing in `|u|`, nondecreasing in `r`, always in
/// `[0, 1]`. For `|u| > r` the complementary form `½[erfc((u-r)/(√2σ)) -
/// erfc((u+r)/(√2σ))]` is used, which avoids the cancellation of two
/// near-unit erf values far from the window.
pub fn gaussian_mass_1d(center_offset: f64, half_width: f64, sigma: f64) -> Result<f64> {
    require_finite("center offset", center_offset)?;
    require_non_negative("half width", half_width)?;
    require_positive("sigma", sigma)?;
    let u = center_offset.abs();
    let a = std::f64::consts::SQRT_2 * sigma;
    let lo = (u - half_width) / a;
    let hi = (u + half_width) / a;
    let mass = if lo <= 0.0 {
        0.5 * (erf(hi) - erf(lo))
    } else {
        0.5 * (erfc(lo) - erfc(hi))
    };
    Ok(mass.clamp(0.0, 1.0))
}
