//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the domain of the operation (non-positive
    /// length, probability outside [0, 1], NaN, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// An adaptive quadrature ran out of its panel budget before the error
    /// estimate dropped below the requested tolerance. Reported distinctly
    /// from domain errors so callers can tell a bad input from a hard
    /// integral.
    #[error(
        "quadrature did not converge: {context} (error estimate {error_estimate:e}, \
         requested tolerance {tolerance:e})"
    )]
    QuadratureDidNotConverge {
        context: String,
        error_estimate: f64,
        tolerance: f64,
    },

    /// The cloud spec implies more particles than the configured cap.
    #[error("cloud too large: {particles:.3e} particles exceeds cap {cap}")]
    CloudTooLarge { particles: f64, cap: u64 },

    /// The large-detector transmittance underflowed to zero, so the
    /// paired-detector ratio is undefined.
    #[error("ratio undefined: transmittance of the large detector underflowed at repeat {repeat}")]
    RatioUndefined { repeat: u32 },

    /// A scattering error, with the index of the offending particle attached.
    #[error("particle {index}: {source}")]
    Particle {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    /// A sweep aborted, with the offending (size, repeat) identified.
    #[error("sweep point size={size_m:e} m repeat={repeat}: {source}")]
    SweepPoint {
        size_m: f64,
        repeat: u32,
        #[source]
        source: Box<Error>,
    },

    /// Cloud sampling for a sweep repeat failed (before any size was run).
    #[error("sweep repeat {repeat}: {source}")]
    SweepRepeat {
        repeat: u32,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn at_particle(self, index: usize) -> Self {
        Error::Particle {
            index,
            source: Box::new(self),
        }
    }
}

/// Rejects NaN and infinities with a named-argument domain error.
pub(crate) fn require_finite(name: &str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Domain(format!("{name} must be finite, got {value}")))
    }
}

/// Rejects anything that is not a strictly positive finite number.
pub(crate) fn require_positive(name: &str, value: f64) -> Result<f64> {
    require_finite(name, value)?;
    if value > 0.0 {
        Ok(value)
    } else {
        Err(Error::Domain(format!("{name} must be > 0, got {value}")))
    }
}

/// Rejects negative, NaN, or infinite values; zero is allowed.
pub(crate) fn require_non_negative(name: &str, value: f64) -> Result<f64> {
    require_finite(name, value)?;
    if value >= 0.0 {
        Ok(value)
    } else {
        Err(Error::Domain(format!("{name} must be >= 0, got {value}")))
    }
}
