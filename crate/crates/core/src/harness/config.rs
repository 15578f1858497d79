//! Flat key-value scenario configuration.
//!
//! # Grammar
//!
//! ```text
//! file     := line*
//! line     := blank | comment | entry
//! comment  := '#' .*
//! entry    := key '=' value
//! key      := section '.' name        (lowercase, dotted)
//! value    := scalar | word | scalar+ (whitespace-separated)
//! ```
//!
//! Every key has a documented default; an empty file is the default
//! water-vapor scenario. Unknown and duplicated keys are errors that name
//! the key and line: there are no silent fallbacks.
//!
//! # Keys and defaults
//!
//! | key | default | meaning |
//! |-----|---------|---------|
//! | `species.name` | `water` | label recorded in outputs |
//! | `species.mass_kg` | `2.99e-26` | particle mass |
//! | `species.collision_cross_section_m2` | `1e-18` | kinetic cross-section |
//! | `species.sigma0_m` | `1e-10` | post-collision packet width |
//! | `cloud.pressure_pa` | `1.0` | gas pressure (1e-2 mbar) |
//! | `cloud.temperature_k` | `296.0` | gas temperature |
//! | `cloud.box_min_m` | `-5e-4 -5e-4 0.04999999995` | box corner (x y z) |
//! | `cloud.box_max_m` | `5e-4 5e-4 0.05000000005` | box corner (x y z) |
//! | `cloud.seed` | `1` | cloud sampling seed |
//! | `cloud.max_particles` | `100000000` | refusal cap on N |
//! | `spread.mode` | `expected-over-exponential` | or `at-mean-time` |
//! | `spread.sigma_m` | unset | explicit σ override |
//! | `spread.t_bar_s` | unset | explicit mean-free-time override |
//! | `setup.source_m` | `0 0 0` | source position (x y z) |
//! | `setup.detector_center_m` | `0 0 0.1` | detector center (x y z) |
//! | `setup.detector_shape` | `square 1e-4` | `square h`, `disk r`, `rect hx hy` |
//! | `scatter.g` | `1e-3` | the G coefficient |
//! | `scatter.method` | `exact-square` | `eq3`, `exact-square`, `quadrature` |
//! | `scatter.quadrature_tol` | `1e-10` | absolute tolerance of the quadrature method |
//! | `sweep.sizes_m` | `1e-6 2e-6 5e-6 1e-5 2e-5 5e-5 1e-4` | detector half-sides |
//! | `sweep.repeats` | `8` | clouds per size |
//! | `sweep.base_seed` | `1` | seed of repeat 0 |
//! | `ratio.small_m` | `1e-6` | small detector half-side |
//! | `ratio.large_m` | `1e-4` | large detector half-side |
//! | `ratio.repeats` | `32` | paired repeats |
//!
//! The default cloud is a thin 1 mm x 1 mm slab (0.1 nm thick) halfway
//! between source and detector. Only transverse offsets and the particle
//! count enter the model, so the slab stands in for a full tunnel at a
//! particle count a laptop can sweep; at 1 Pa and 296 K it holds ~24,000
//! molecules.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use crate::gascloud::{BoundingBox, CloudSpec, GasSpecies, DEFAULT_PARTICLE_CAP};
use crate::geometry::{DetectorShape, Point3, SetupGeometry};
use crate::scattering::ScatterMethod;
use crate::wavepacket::SpreadMode;

use super::{RatioSpec, ScenarioConfig, SweepSpec};

/// A syntactic or semantic problem in a configuration file.
#[derive(Debug)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub key: Option<String>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error")?;
        if let Some(line) = self.line {
            write!(f, " at line {line}")?;
        }
        if let Some(key) = &self.key {
            write!(f, " (key `{key}`)")?;
        }
        write!(f, ": {}", self.message)
    }
}

impl std::error::Error for ConfigError {}

impl ConfigError {
    fn at(line: usize, key: impl Into<Option<String>>, message: impl Into<String>) -> Self {
        ConfigError {
            line: Some(line),
            key: key.into(),
            message: message.into(),
        }
    }
}

const KNOWN_KEYS: &[&str] = &[
    "species.name",
    "species.mass_kg",
    "species.collision_cross_section_m2",
    "species.sigma0_m",
    "cloud.pressure_pa",
    "cloud.temperature_k",
    "cloud.box_min_m",
    "cloud.box_max_m",
    "cloud.seed",
    "cloud.max_particles",
    "spread.mode",
    "spread.sigma_m",
    "spread.t_bar_s",
    "setup.source_m",
    "setup.detector_center_m",
    "setup.detector_shape",
    "scatter.g",
    "scatter.method",
    "scatter.quadrature_tol",
    "sweep.sizes_m",
    "sweep.repeats",
    "sweep.base_seed",
    "ratio.small_m",
    "ratio.large_m",
    "ratio.repeats",
];

struct Entry<'a> {
    line: usize,
    key: &'a str,
    value: &'a str,
}

/// Parses configuration text into a scenario, applying defaults for every
/// key that is absent.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let mut entries: Vec<Entry> = Vec::new();
    let mut seen: BTreeSet<&str> = BTreeSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let t = raw.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let Some((key_part, value_part)) = t.split_once('=') else {
            return Err(ConfigError::at(
                line,
                None,
                format!("expected `key = value`, got `{t}`"),
            ));
        };
        let key = key_part.trim();
        let value = value_part.trim();
        if !KNOWN_KEYS.contains(&key) {
            return Err(ConfigError::at(
                line,
                Some(key.to_owned()),
                "unknown key",
            ));
        }
        if !seen.insert(KNOWN_KEYS[KNOWN_KEYS.iter().position(|k| *k == key).unwrap()]) {
            return Err(ConfigError::at(
                line,
                Some(key.to_owned()),
                "duplicate key",
            ));
        }
        if value.is_empty() {
            return Err(ConfigError::at(line, Some(key.to_owned()), "empty value"));
        }
        entries.push(Entry { line, key, value });
    }

    let get = |key: &str| entries.iter().find(|e| e.key == key);

    let f64_at = |e: &Entry| -> Result<f64, ConfigError> {
        e.value.parse::<f64>().map_err(|err| {
            ConfigError::at(e.line, Some(e.key.to_owned()), format!("not a number: {err}"))
        })
    };
    let u64_at = |e: &Entry| -> Result<u64, ConfigError> {
        e.value.parse::<u64>().map_err(|err| {
            ConfigError::at(
                e.line,
                Some(e.key.to_owned()),
                format!("not an unsigned integer: {err}"),
            )
        })
    };
    let u32_at = |e: &Entry| -> Result<u32, ConfigError> {
        e.value.parse::<u32>().map_err(|err| {
            ConfigError::at(
                e.line,
                Some(e.key.to_owned()),
                format!("not an unsigned integer: {err}"),
            )
        })
    };
    let floats_at = |e: &Entry| -> Result<Vec<f64>, ConfigError> {
        e.value
            .split_whitespace()
            .map(|w| {
                w.parse::<f64>().map_err(|err| {
                    ConfigError::at(
                        e.line,
                        Some(e.key.to_owned()),
                        format!("not a number: `{w}` ({err})"),
                    )
                })
            })
            .collect()
    };
    let point_at = |e: &Entry| -> Result<Point3, ConfigError> {
        let v = floats_at(e)?;
        if v.len() != 3 {
            return Err(ConfigError::at(
                e.line,
                Some(e.key.to_owned()),
                format!("expected 3 numbers (x y z), got {}", v.len()),
            ));
        }
        Ok(Point3::new(v[0], v[1], v[2]))
    };

    let opt_f64 = |key: &str| -> Result<Option<f64>, ConfigError> {
        get(key).map(&f64_at).transpose()
    };
    let f64_or = |key: &str, default: f64| -> Result<f64, ConfigError> {
        Ok(opt_f64(key)?.unwrap_or(default))
    };
    let u64_or = |key: &str, default: u64| -> Result<u64, ConfigError> {
        Ok(get(key).map(&u64_at).transpose()?.unwrap_or(default))
    };
    let u32_or = |key: &str, default: u32| -> Result<u32, ConfigError> {
        Ok(get(key).map(&u32_at).transpose()?.unwrap_or(default))
    };
    let point_or = |key: &str, default: Point3| -> Result<Point3, ConfigError> {
        Ok(get(key).map(&point_at).transpose()?.unwrap_or(default))
    };

    let species = GasSpecies {
        name: get("species.name")
            .map(|e| e.value.to_owned())
            .unwrap_or_else(|| "water".to_owned()),
        mass_kg: f64_or("species.mass_kg", 2.99e-26)?,
        collision_cross_section_m2: f64_or("species.collision_cross_section_m2", 1e-18)?,
        sigma0_m: f64_or("species.sigma0_m", 1e-10)?,
    };

    let box_min = point_or("cloud.box_min_m", Point3::new(-5e-4, -5e-4, 0.04999999995))?;
    let box_max = point_or("cloud.box_max_m", Point3::new(5e-4, 5e-4, 0.05000000005))?;
    let bounding_box = BoundingBox::new(box_min, box_max).map_err(|e| ConfigError {
        line: None,
        key: Some("cloud.box_min_m".to_owned()),
        message: e.to_string(),
    })?;

    let cloud = CloudSpec {
        species,
        pressure_pa: f64_or("cloud.pressure_pa", 1.0)?,
        temperature_k: f64_or("cloud.temperature_k", 296.0)?,
        bounding_box,
        seed: u64_or("cloud.seed", 1)?,
        max_particles: u64_or("cloud.max_particles", DEFAULT_PARTICLE_CAP)?,
    };

    let spread_mode = match get("spread.mode") {
        None => SpreadMode::ExpectedOverExponential,
        Some(e) => match e.value {
            "at-mean-time" => SpreadMode::AtMeanTime,
            "expected-over-exponential" => SpreadMode::ExpectedOverExponential,
            other => {
                return Err(ConfigError::at(
                    e.line,
                    Some(e.key.to_owned()),
                    format!(
                        "unknown spread mode `{other}` \
                         (expected `at-mean-time` or `expected-over-exponential`)"
                    ),
                ))
            }
        },
    };

    let detector_shape = match get("setup.detector_shape") {
        None => DetectorShape::Square { half_side_m: 1e-4 },
        Some(e) => {
            let words: Vec<&str> = e.value.split_whitespace().collect();
            let bad = |msg: String| ConfigError::at(e.line, Some(e.key.to_owned()), msg);
            let num = |w: &str| {
                w.parse::<f64>()
                    .map_err(|err| bad(format!("not a number: `{w}` ({err})")))
            };
            match words.as_slice() {
                ["square", h] => DetectorShape::Square {
                    half_side_m: num(h)?,
                },
                ["disk", r] => DetectorShape::Disk { radius_m: num(r)? },
                ["rect", hx, hy] => DetectorShape::Rect {
                    half_x_m: num(hx)?,
                    half_y_m: num(hy)?,
                },
                _ => {
                    return Err(bad(format!(
                        "expected `square <half_side>`, `disk <radius>` or \
                         `rect <half_x> <half_y>`, got `{}`",
                        e.value
                    )))
                }
            }
        }
    };

    let setup = SetupGeometry::new(
        point_or("setup.source_m", Point3::new(0.0, 0.0, 0.0))?,
        point_or("setup.detector_center_m", Point3::new(0.0, 0.0, 0.1))?,
        detector_shape,
    )
    .map_err(|e| ConfigError {
        line: None,
        key: Some("setup.source_m".to_owned()),
        message: e.to_string(),
    })?;

    let method = match get("scatter.method") {
        None => ScatterMethod::ExactSquare,
        Some(e) => match e.value {
            "eq3" => ScatterMethod::Eq3Bound,
            "exact-square" => ScatterMethod::ExactSquare,
            "quadrature" => ScatterMethod::Quadrature {
                abs_tol: f64_or("scatter.quadrature_tol", 1e-10)?,
            },
            other => {
                return Err(ConfigError::at(
                    e.line,
                    Some(e.key.to_owned()),
                    format!(
                        "unknown method `{other}` \
                         (expected `eq3`, `exact-square` or `quadrature`)"
                    ),
                ))
            }
        },
    };

    let sizes_m = match get("sweep.sizes_m") {
        None => vec![1e-6, 2e-6, 5e-6, 1e-5, 2e-5, 5e-5, 1e-4],
        Some(e) => {
            let v = floats_at(e)?;
            if v.is_empty() {
                return Err(ConfigError::at(
                    e.line,
                    Some(e.key.to_owned()),
                    "needs at least one size",
                ));
            }
            v
        }
    };

    let config = ScenarioConfig {
        cloud,
        setup,
        g_coefficient: f64_or("scatter.g", 1e-3)?,
        spread_mode,
        method,
        sigma_override_m: opt_f64("spread.sigma_m")?,
        t_bar_override_s: opt_f64("spread.t_bar_s")?,
        sweep: SweepSpec {
            sizes_m,
            repeats: u32_or("sweep.repeats", 8)?,
            base_seed: u64_or("sweep.base_seed", 1)?,
        },
        ratio: RatioSpec {
            small_m: f64_or("ratio.small_m", 1e-6)?,
            large_m: f64_or("ratio.large_m", 1e-4)?,
            repeats: u32_or("ratio.repeats", 32)?,
        },
    };
    Ok(config)
}

/// Reads and parses a configuration file.
pub fn load_config(path: impl AsRef<Path>) -> Result<ScenarioConfig, ConfigError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
        line: None,
        key: None,
        message: format!("cannot read {}: {e}", path.display()),
    })?;
    parse_config(&text)
}
