//! The N-particle transmittance product and its baselines.
//!
//! Scattering events on distinct particles are independent, so the cloud
//! transmittance is the product of per-particle survival factors
//! `TR = Π (1 - P_n)`. The canonical reduction order is ascending particle
//! index; per-particle probabilities may be evaluated in parallel (they are
//! pure), but the product itself is always taken sequentially so a fixed
//! cloud gives a fixed TR regardless of worker count.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gascloud::GasCloud;
use crate::geometry::SetupGeometry;
use crate::scattering::{
    p_scatter_eq3, p_scatter_exact_square, p_scatter_quadrature, ScatterMethod, ScatterParams,
};

/// Evaluate per-particle probabilities in parallel above this cloud size.
const PARALLEL_THRESHOLD: usize = 8192;

/// How a [`TransmittanceResult`] was produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TransmittanceMethod {
    Eq3Bound,
    ExactSquare,
    Quadrature,
    Classical,
}

impl std::fmt::Display for TransmittanceMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TransmittanceMethod::Eq3Bound => "eq3",
            TransmittanceMethod::ExactSquare => "exact-square",
            TransmittanceMethod::Quadrature => "quadrature",
            TransmittanceMethod::Classical => "classical",
        })
    }
}

#[derive(Clone, Debug)]
pub struct TransmittanceResult {
    /// `Π (1 - p)` over `per_particle_p` in index order. Zero with the
    /// `underflow` flag set when the true product is below the smallest
    /// positive normal double.
    pub tr: f64,
    pub per_particle_p: Vec<f64>,
    pub method: TransmittanceMethod,
    pub n_particles: usize,
    /// Particles inside the detectability tunnel (boundary inclusive).
    pub n_inside_tunnel: usize,
    /// Set when the product underflowed; `tr` is then reported as 0 rather
    /// than a denormal.
    pub underflow: bool,
}

/// Sequential product of `(1 - p)` in index order, with underflow detection.
fn survival_product(ps: &[f64]) -> (f64, bool) {
    let mut tr = 1.0f64;
    let mut any_certain = false;
    for &p in ps {
        tr *= 1.0 - p;
        if p >= 1.0 {
            any_certain = true;
        }
    }
    if tr > 0.0 && tr < f64::MIN_POSITIVE {
        (0.0, true)
    } else if tr == 0.0 && !any_certain {
        // positive factors only; reaching exact zero means underflow
        (0.0, true)
    } else {
        (tr, false)
    }
}

fn collect_probabilities(
    cloud: &GasCloud,
    eval: impl Fn(usize) -> Result<f64> + Sync,
) -> Result<Vec<f64>> {
    let n = cloud.len();
    let results: Vec<Result<f64>> = if n >= PARALLEL_THRESHOLD {
        (0..n).into_par_iter().map(&eval).collect()
    } else {
        (0..n).map(&eval).collect()
    };
    let mut ps = Vec::with_capacity(n);
    for (index, r) in results.into_iter().enumerate() {
        match r {
            Ok(p) => ps.push(p),
            Err(e) => return Err(e.at_particle(index)),
        }
    }
    Ok(ps)
}

fn assemble(
    cloud: &GasCloud,
    setup: &SetupGeometry,
    ps: Vec<f64>,
    method: TransmittanceMethod,
) -> TransmittanceResult {
    let tunnel = setup.tunnel();
    let n_inside_tunnel = cloud
        .particles
        .iter()
        .filter(|p| tunnel.contains(**p))
        .count();
    let (tr, underflow) = survival_product(&ps);
    TransmittanceResult {
        tr,
        n_particles: cloud.len(),
        n_inside_tunnel,
        per_particle_p: ps,
        method,
        underflow,
    }
}

/// `TR = Π (1 - P_n)` with `P_n` computed by the selected scattering method
/// from each particle's transverse offsets.
pub fn transmittance(
    cloud: &GasCloud,
    setup: &SetupGeometry,
    params: &ScatterParams,
    method: ScatterMethod,
) -> Result<TransmittanceResult> {
    params.validate()?;
    setup.validate()?;
    method.validate()?;
    let r_t = setup.detector_shape.circumscribed_half_side();
    let ps = match method {
        ScatterMethod::Eq3Bound => collect_probabilities(cloud, |i| {
            let off = setup.transverse_offset(cloud.particles[i]);
            p_scatter_eq3(params, off.o, r_t)
        })?,
        ScatterMethod::ExactSquare => collect_probabilities(cloud, |i| {
            let off = setup.transverse_offset(cloud.particles[i]);
            p_scatter_exact_square(params, off.ox, off.oy, r_t)
        })?,
        ScatterMethod::Quadrature { abs_tol } => collect_probabilities(cloud, |i| {
            p_scatter_quadrature(params, setup, cloud.particles[i], abs_tol)
        })?,
    };
    let label = match method {
        ScatterMethod::Eq3Bound => TransmittanceMethod::Eq3Bound,
        ScatterMethod::ExactSquare => TransmittanceMethod::ExactSquare,
        ScatterMethod::Quadrature { .. } => TransmittanceMethod::Quadrature,
    };
    Ok(assemble(cloud, setup, ps, label))
}

/// The closed-form transmittance bound evaluated literally: scalar axis
/// distances `o_n` against an explicit circumscribed half-side `r_T`
/// (independent of the detector shape held by `setup`, which only supplies
/// the axis and the tunnel for the inside count).
pub fn transmittance_bound(
    cloud: &GasCloud,
    setup: &SetupGeometry,
    r_t_m: f64,
    params: &ScatterParams,
) -> Result<TransmittanceResult> {
    params.validate()?;
    setup.validate()?;
    let ps = collect_probabilities(cloud, |i| {
        let off = setup.transverse_offset(cloud.particles[i]);
        p_scatter_eq3(params, off.o, r_t_m)
    })?;
    Ok(assemble(cloud, setup, ps, TransmittanceMethod::Eq3Bound))
}

/// Local-particle baseline: every particle inside the detectability tunnel
/// scatters with probability `g`, every particle outside with probability 0,
/// so `TR = (1-g)^N_in`. This is the classical (Beer-Lambert) limit the
/// smeared model reduces to when σ is small against the detector.
pub fn classical_transmittance(
    cloud: &GasCloud,
    setup: &SetupGeometry,
    g: f64,
) -> Result<TransmittanceResult> {
    setup.validate()?;
    if !g.is_finite() || !(0.0..=1.0).contains(&g) {
        return Err(Error::domain(format!("g must be in [0, 1], got {g}")));
    }
    let tunnel = setup.tunnel();
    let ps: Vec<f64> = cloud
        .particles
        .iter()
        .map(|p| if tunnel.contains(*p) { g } else { 0.0 })
        .collect();
    Ok(assemble(cloud, setup, ps, TransmittanceMethod::Classical))
}
