//! Per-particle scattering probability.
//!
//! A particle whose `|Ψ|²` has per-axis spread σ scatters a passing photon
//! with probability `G` times the transverse probability mass inside the
//! detectability tunnel. Three routes are provided:
//!
//! * [`p_scatter_eq3`]: the closed form in the scalar axis distance `o`,
//!   `G·F(o, r_T, σ)²`, the factor appearing in the transmittance bound;
//! * [`p_scatter_exact_square`]: the per-axis product `G·F(ox)·F(oy)`,
//!   exact for a square detector of half-side `r_T`;
//! * [`p_scatter_quadrature`]: `G` times the numerically integrated
//!   transverse mass over the actual detector cross-section, for any shape.
//!
//! The along-axis factor of the tunnel integral is taken as 1: the packet is
//! assumed fully contained between source and detector, so only the
//! transverse mass matters.

use crate::error::{require_non_negative, require_positive, Error, Result};
use crate::geometry::{DetectorShape, Point3, SetupGeometry};
use crate::quad::{integrate_1d, integrate_2d, QuadOptions};
use crate::wavepacket::gaussian_mass_1d;

/// Scale and spread entering every scattering probability.
#[derive(Clone, Copy, Debug)]
pub struct ScatterParams {
    /// Dimensionless probability scale of the optical setup; constant for a
    /// given setup and an opaque input here. Since `P <= G` must itself be a
    /// probability, `G` lies in `[0, 1]`.
    pub g_coefficient: f64,
    /// Effective per-axis spread of `|Ψ|²` at the mean free time, m.
    pub sigma_m: f64,
}

impl ScatterParams {
    pub fn new(g_coefficient: f64, sigma_m: f64) -> Result<Self> {
        let p = ScatterParams {
            g_coefficient,
            sigma_m,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.g_coefficient.is_finite() || !(0.0..=1.0).contains(&self.g_coefficient) {
            return Err(Error::domain(format!(
                "g coefficient must be in [0, 1], got {}",
                self.g_coefficient
            )));
        }
        require_positive("sigma", self.sigma_m)?;
        Ok(())
    }
}

/// Which route computes the per-particle probability.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ScatterMethod {
    /// Closed form in the scalar axis distance, with `r_T` the circumscribed
    /// half-side.
    Eq3Bound,
    /// Per-axis closed form, exact for a square detector of half-side `r_T`.
    ExactSquare,
    /// Adaptive quadrature over the actual cross-section to the given
    /// absolute tolerance.
    Quadrature { abs_tol: f64 },
}

impl ScatterMethod {
    pub fn validate(&self) -> Result<()> {
        if let ScatterMethod::Quadrature { abs_tol } = self {
            require_positive("quadrature tolerance", *abs_tol)?;
        }
        Ok(())
    }
}

/// `G·F(o, r_T, σ)²` where `F` is the 1-D Gaussian window mass. Algebraically
/// equal to `(G/4)·[erf((o-r_T)/(√2σ)) - erf((o+r_T)/(√2σ))]²`, but computed
/// through [`gaussian_mass_1d`] which keeps precision far from the window.
pub fn p_scatter_eq3(params: &ScatterParams, o_m: f64, r_t_m: f64) -> Result<f64> {
    params.validate()?;
    require_non_negative("axis distance", o_m)?;
    require_positive("r_T", r_t_m)?;
    let f = gaussian_mass_1d(o_m, r_t_m, params.sigma_m)?;
    Ok(params.g_coefficient * f * f)
}

/// `G·F(ox)·F(oy)`: the exact scattering probability for a square detector
/// of half-side `r_T` at transverse offsets `(ox, oy)`.
pub fn p_scatter_exact_square(
    params: &ScatterParams,
    ox_m: f64,
    oy_m: f64,
    r_t_m: f64,
) -> Result<f64> {
    params.validate()?;
    require_positive("r_T", r_t_m)?;
    let fx = gaussian_mass_1d(ox_m, r_t_m, params.sigma_m)?;
    let fy = gaussian_mass_1d(oy_m, r_t_m, params.sigma_m)?;
    Ok(params.g_coefficient * fx * fy)
}

/// Transverse `|Ψ|²` mass over an arbitrary detector cross-section by
/// adaptive Gauss-Kronrod quadrature, to absolute tolerance `abs_tol`.
///
/// Rectangles (and squares) integrate the product density over the exact
/// bounds in 2-D. Disks reduce the inner axis to a closed-form chord mass
/// and integrate the remaining smooth 1-D profile in the angle variable.
/// Breakpoints at geometrically growing distances from the offset center
/// keep the Gaussian bump visible to the panel rules at any σ-to-detector
/// ratio.
pub fn gaussian_mass_over_shape(
    shape: &DetectorShape,
    ox_m: f64,
    oy_m: f64,
    sigma_m: f64,
    abs_tol: f64,
) -> Result<f64> {
    shape.validate()?;
    require_positive("sigma", sigma_m)?;
    require_positive("quadrature tolerance", abs_tol)?;
    if !ox_m.is_finite() || !oy_m.is_finite() {
        return Err(Error::domain("offsets must be finite"));
    }
    let sigma = sigma_m;
    let norm1d = 1.0 / (sigma * (2.0 * std::f64::consts::PI).sqrt());
    let density = move |d: f64| {
        let u = d / sigma;
        (-0.5 * u * u).exp() * norm1d
    };
    let mass = match *shape {
        DetectorShape::Square { .. } | DetectorShape::Rect { .. } => {
            let (hx, hy) = shape.half_extents();
            let f = move |x: f64, y: f64| density(x - ox_m) * density(y - oy_m);
            let bx = bump_ladder(ox_m, sigma, 2.0 * hx);
            let by = bump_ladder(oy_m, sigma, 2.0 * hy);
            integrate_2d(
                f,
                (-hx, hx, -hy, hy),
                &bx,
                &by,
                &QuadOptions::absolute(abs_tol),
            )
            .map_err(|nc| Error::QuadratureDidNotConverge {
                context: format!("detector mass over rect {hx:e} x {hy:e} m, sigma {sigma:e} m"),
                error_estimate: nc.error_estimate,
                tolerance: nc.tolerance,
            })?
            .value
        }
        DetectorShape::Disk { radius_m: r } => {
            // x = r sin(th): mass = ∫ density(x-ox) · F(oy, chord(x), σ) dx
            // with chord = r cos(th); the substitution makes the endpoints
            // smooth.
            let f = move |th: f64| {
                let (sin_th, cos_th) = th.sin_cos();
                let chord = r * cos_th;
                let fy = gaussian_mass_1d(oy_m, chord.max(0.0), sigma)
                    .expect("validated inputs");
                density(r * sin_th - ox_m) * fy * chord
            };
            let half_pi = std::f64::consts::FRAC_PI_2;
            let mut breakpoints = Vec::new();
            for u in bump_ladder(ox_m, sigma, 2.0 * r) {
                if u.abs() < r {
                    breakpoints.push((u / r).asin());
                }
            }
            let mut d = 0.0;
            loop {
                for v in [oy_m.abs() - d, oy_m.abs() + d] {
                    if v > 0.0 && v < r {
                        let th = (v / r).acos();
                        breakpoints.push(th);
                        breakpoints.push(-th);
                    }
                }
                d = if d == 0.0 { sigma } else { d * 3.0 };
                if d >= 2.0 * r {
                    break;
                }
            }
            integrate_1d(
                f,
                (-half_pi, half_pi),
                &breakpoints,
                &QuadOptions::absolute(abs_tol),
            )
            .map_err(|nc| Error::QuadratureDidNotConverge {
                context: format!("detector mass over disk r {r:e} m, sigma {sigma:e} m"),
                error_estimate: nc.error_estimate,
                tolerance: nc.tolerance,
            })?
            .value
        }
    };
    Ok(mass.clamp(0.0, 1.0))
}

/// Breakpoints at `center ± σ·3^k` until they leave a domain of width
/// `span`; [`crate::quad`] drops any that fall outside the actual bounds.
fn bump_ladder(center: f64, sigma: f64, span: f64) -> Vec<f64> {
    let mut pts = vec![center];
    let mut d = sigma;
    while d < span && d.is_finite() {
        pts.push(center - d);
        pts.push(center + d);
        d *= 3.0;
    }
    pts
}

/// `G` times the transverse mass over the detector cross-section of `setup`,
/// for the particle at `particle_position`.
pub fn p_scatter_quadrature(
    params: &ScatterParams,
    setup: &SetupGeometry,
    particle_position: Point3,
    abs_tol: f64,
) -> Result<f64> {
    params.validate()?;
    setup.validate()?;
    let off = setup.transverse_offset(particle_position);
    let mass = gaussian_mass_over_shape(
        &setup.detector_shape,
        off.ox,
        off.oy,
        params.sigma_m,
        abs_tol,
    )?;
    Ok(params.g_coefficient * mass)
}
