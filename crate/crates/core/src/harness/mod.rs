//! Experiment orchestration: scenario resolution, detector-size sweeps, and
//! paired-detector ratio experiments with seed statistics.
//!
//! A scenario couples a cloud spec, a setup, the scattering scale `G`, and a
//! spread source (kinetic helpers or an explicit override). Sweeps reuse the
//! same per-repeat cloud at every detector size: the curves are paired, and
//! each CSV row logs the cloud hash so the pairing is checkable after the
//! fact. All randomness flows from `base_seed + repeat`, so identical
//! configurations produce byte-identical output files.

pub mod config;
pub mod csv;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gascloud::{mean_free_time, sample_cloud, CloudSpec, GasCloud};
use crate::geometry::SetupGeometry;
use crate::scattering::{ScatterMethod, ScatterParams};
use crate::transmittance::{transmittance, TransmittanceResult};
use crate::wavepacket::{expected_sigma, SpreadMode, WavePacketSpec};

pub use config::{load_config, parse_config, ConfigError};

/// Everything needed to evaluate one scenario.
#[derive(Clone, Debug)]
pub struct ScenarioConfig {
    pub cloud: CloudSpec,
    pub setup: SetupGeometry,
    pub g_coefficient: f64,
    pub spread_mode: SpreadMode,
    pub method: ScatterMethod,
    /// Use this spread directly instead of deriving it from the cloud state.
    pub sigma_override_m: Option<f64>,
    /// Use this mean free time instead of the kinetic-theory value.
    pub t_bar_override_s: Option<f64>,
    pub sweep: SweepSpec,
    pub ratio: RatioSpec,
}

/// Detector sizes and seeding of a sweep.
#[derive(Clone, Debug)]
pub struct SweepSpec {
    /// Circumscribed half-sides (or disk radii), strictly increasing, m.
    pub sizes_m: Vec<f64>,
    pub repeats: u32,
    pub base_seed: u64,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.sizes_m.is_empty() {
            return Err(Error::domain("sweep needs at least one detector size"));
        }
        for w in self.sizes_m.windows(2) {
            let increasing = w[1] > w[0];
            if !increasing {
                return Err(Error::domain(format!(
                    "sweep sizes must be strictly increasing, got {} after {}",
                    w[1], w[0]
                )));
            }
        }
        for &s in &self.sizes_m {
            if !(s.is_finite() && s > 0.0) {
                return Err(Error::domain(format!("sweep size must be > 0, got {s}")));
            }
        }
        if self.repeats == 0 {
            return Err(Error::domain("sweep repeats must be >= 1"));
        }
        Ok(())
    }
}

/// Default sizes for the paired-detector ratio experiment.
#[derive(Clone, Copy, Debug)]
pub struct RatioSpec {
    pub small_m: f64,
    pub large_m: f64,
    pub repeats: u32,
}

/// The spread actually used by a scenario, with its provenance.
#[derive(Clone, Copy, Debug)]
pub struct SpreadResolution {
    pub sigma_m: f64,
    /// Mean free time behind the spread; absent when σ was given directly.
    pub t_bar_s: Option<f64>,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        self.cloud.validate()?;
        self.setup.validate()?;
        self.method.validate()?;
        if !self.g_coefficient.is_finite() || !(0.0..=1.0).contains(&self.g_coefficient) {
            return Err(Error::domain(format!(
                "g coefficient must be in [0, 1], got {}",
                self.g_coefficient
            )));
        }
        if self.sigma_override_m.is_some() && self.t_bar_override_s.is_some() {
            return Err(Error::domain(
                "sigma and mean-free-time overrides are mutually exclusive; \
                 set spread.sigma_m or spread.t_bar_s, not both",
            ));
        }
        if let Some(s) = self.sigma_override_m {
            if !(s.is_finite() && s > 0.0) {
                return Err(Error::domain(format!("sigma override must be > 0, got {s}")));
            }
        }
        if let Some(t) = self.t_bar_override_s {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::domain(format!(
                    "mean-free-time override must be > 0, got {t}"
                )));
            }
        }
        self.sweep.validate()?;
        if !(self.ratio.small_m > 0.0 && self.ratio.large_m > 0.0) {
            return Err(Error::domain("ratio detector sizes must be > 0"));
        }
        Ok(())
    }

    /// Resolves the effective spread: an explicit σ wins; otherwise σ is the
    /// expected spread at the mean free time (overridden or kinetic).
    pub fn effective_spread(&self) -> Result<SpreadResolution> {
        if let Some(sigma_m) = self.sigma_override_m {
            return Ok(SpreadResolution {
                sigma_m,
                t_bar_s: None,
            });
        }
        let t_bar_s = match self.t_bar_override_s {
            Some(t) => t,
            None => mean_free_time(
                &self.cloud.species,
                self.cloud.pressure_pa,
                self.cloud.temperature_k,
            )?,
        };
        let packet = WavePacketSpec::new(self.cloud.species.mass_kg, self.cloud.species.sigma0_m)?;
        let sigma_m = expected_sigma(&packet, t_bar_s, self.spread_mode)?;
        Ok(SpreadResolution {
            sigma_m,
            t_bar_s: Some(t_bar_s),
        })
    }

    pub fn scatter_params(&self) -> Result<ScatterParams> {
        let spread = self.effective_spread()?;
        ScatterParams::new(self.g_coefficient, spread.sigma_m)
    }
}

/// One scenario evaluated once, with the resolved spread attached.
#[derive(Clone, Debug)]
pub struct ScenarioOutcome {
    pub result: TransmittanceResult,
    pub spread: SpreadResolution,
    pub seed: u64,
}

/// Samples the scenario's cloud and computes its transmittance with the
/// configured method. Backs the `transmit` CLI subcommand.
pub fn run_scenario(config: &ScenarioConfig) -> Result<ScenarioOutcome> {
    config.validate()?;
    let spread = config.effective_spread()?;
    let params = ScatterParams::new(config.g_coefficient, spread.sigma_m)?;
    let cloud = sample_cloud(&config.cloud)?;
    let result = transmittance(&cloud, &config.setup, &params, config.method)?;
    Ok(ScenarioOutcome {
        result,
        spread,
        seed: config.cloud.seed,
    })
}

/// One (size, repeat) evaluation of a sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub size_m: f64,
    pub repeat: u32,
    pub seed: u64,
    pub tr: f64,
    pub n_inside: u64,
    pub cloud_hash: String,
}

/// Per-size aggregate over repeats.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepAggregate {
    pub size_m: f64,
    pub mean_tr: f64,
    pub stdev_tr: f64,
    /// Mean tunnel-inside count (in-memory only; not part of the CSV schema).
    pub mean_n_inside: f64,
}

/// Sweep output: per-(size, repeat) rows in canonical order plus per-size
/// aggregates.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepTable {
    pub base_seed: u64,
    pub rows: Vec<SweepRow>,
    pub aggregates: Vec<SweepAggregate>,
}

/// Sample mean and sample standard deviation (N-1); stdev is 0 for a single
/// observation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Stats {
    pub mean: f64,
    pub stdev: f64,
}

pub(crate) fn stats(xs: &[f64]) -> Stats {
    let n = xs.len();
    if n == 0 {
        return Stats {
            mean: f64::NAN,
            stdev: f64::NAN,
        };
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    let stdev = if n > 1 {
        let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
        (ss / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    Stats { mean, stdev }
}

fn sampled_repeat(config: &ScenarioConfig, base_seed: u64, repeat: u32) -> Result<GasCloud> {
    let mut spec = config.cloud.clone();
    spec.seed = base_seed.wrapping_add(repeat as u64);
    sample_cloud(&spec).map_err(|e| Error::SweepRepeat {
        repeat,
        source: Box::new(e),
    })
}

fn size_setup(config: &ScenarioConfig, size_m: f64) -> Result<SetupGeometry> {
    config
        .setup
        .with_shape(config.setup.detector_shape.scaled_to(size_m)?)
}

/// Runs the detector-size sweep: for each repeat `r` one cloud is sampled
/// with seed `base_seed + r` and reused at every size, then TR is aggregated
/// per size. Repeats run concurrently; rows come back in (size, repeat)
/// order regardless of worker count.
pub fn run_sweep(config: &ScenarioConfig, sweep: &SweepSpec) -> Result<SweepTable> {
    config.validate()?;
    sweep.validate()?;
    let params = config.scatter_params()?;

    struct RepeatOutcome {
        seed: u64,
        hash: String,
        per_size: Vec<(f64, u64)>, // (tr, n_inside) per size index
    }

    let run_repeat = |repeat: u32| -> Result<RepeatOutcome> {
        let cloud = sampled_repeat(config, sweep.base_seed, repeat)?;
        let hash = cloud.position_hash();
        let mut per_size = Vec::with_capacity(sweep.sizes_m.len());
        for &size_m in &sweep.sizes_m {
            let setup = size_setup(config, size_m)?;
            let r = transmittance(&cloud, &setup, &params, config.method).map_err(|e| {
                Error::SweepPoint {
                    size_m,
                    repeat,
                    source: Box::new(e),
                }
            })?;
            per_size.push((r.tr, r.n_inside_tunnel as u64));
        }
        Ok(RepeatOutcome {
            seed: sweep.base_seed.wrapping_add(repeat as u64),
            hash,
            per_size,
        })
    };

    let outcomes: Vec<Result<RepeatOutcome>> =
        (0..sweep.repeats).into_par_iter().map(run_repeat).collect();
    let mut repeats = Vec::with_capacity(outcomes.len());
    for o in outcomes {
        repeats.push(o?);
    }

    let mut rows = Vec::with_capacity(sweep.sizes_m.len() * repeats.len());
    let mut aggregates = Vec::with_capacity(sweep.sizes_m.len());
    for (si, &size_m) in sweep.sizes_m.iter().enumerate() {
        let mut trs = Vec::with_capacity(repeats.len());
        let mut inside = Vec::with_capacity(repeats.len());
        for (repeat, outcome) in repeats.iter().enumerate() {
            let (tr, n_inside) = outcome.per_size[si];
            rows.push(SweepRow {
                size_m,
                repeat: repeat as u32,
                seed: outcome.seed,
                tr,
                n_inside,
                cloud_hash: outcome.hash.clone(),
            });
            trs.push(tr);
            inside.push(n_inside as f64);
        }
        let s = stats(&trs);
        aggregates.push(SweepAggregate {
            size_m,
            mean_tr: s.mean,
            stdev_tr: s.stdev,
            mean_n_inside: stats(&inside).mean,
        });
    }
    Ok(SweepTable {
        base_seed: sweep.base_seed,
        rows,
        aggregates,
    })
}

/// One repeat of the paired-detector comparison.
#[derive(Clone, Debug, PartialEq)]
pub struct RatioRow {
    pub repeat: u32,
    pub seed: u64,
    pub tr_small: f64,
    pub tr_large: f64,
    pub ratio: f64,
}

/// Seed statistics of the paired-detector transmittance ratio.
#[derive(Clone, Debug)]
pub struct RatioReport {
    pub small_m: f64,
    pub large_m: f64,
    pub repeats: u32,
    pub base_seed: u64,
    pub per_repeat: Vec<RatioRow>,
    pub tr_small: Stats,
    pub tr_large: Stats,
    pub ratio: Stats,
    /// `(mean(ratio) - 1) / (stdev(ratio)/√repeats)`; `None` when fewer than
    /// two repeats or the ratio variance is zero (degenerate, e.g. equal
    /// detector sizes).
    pub z_score: Option<f64>,
}

impl RatioReport {
    pub fn is_degenerate(&self) -> bool {
        self.z_score.is_none()
    }
}

/// Paired per-seed comparison `TR(small)/TR(large)`. The same cloud is used
/// for both detectors at each repeat.
pub fn run_ratio(
    config: &ScenarioConfig,
    small_m: f64,
    large_m: f64,
    repeats: u32,
    base_seed: u64,
) -> Result<RatioReport> {
    config.validate()?;
    if !(small_m > 0.0 && small_m.is_finite() && large_m > 0.0 && large_m.is_finite()) {
        return Err(Error::domain("ratio detector sizes must be positive"));
    }
    if small_m > large_m {
        return Err(Error::domain(format!(
            "small detector ({small_m} m) must not exceed large detector ({large_m} m)"
        )));
    }
    if repeats == 0 {
        return Err(Error::domain("ratio needs at least one repeat"));
    }
    let params = config.scatter_params()?;
    let setup_small = size_setup(config, small_m)?;
    let setup_large = size_setup(config, large_m)?;

    let run_repeat = |repeat: u32| -> Result<RatioRow> {
        let cloud = sampled_repeat(config, base_seed, repeat)?;
        let small = transmittance(&cloud, &setup_small, &params, config.method)?;
        let large = transmittance(&cloud, &setup_large, &params, config.method)?;
        if large.underflow || large.tr == 0.0 {
            return Err(Error::RatioUndefined { repeat });
        }
        Ok(RatioRow {
            repeat,
            seed: base_seed.wrapping_add(repeat as u64),
            tr_small: small.tr,
            tr_large: large.tr,
            ratio: small.tr / large.tr,
        })
    };

    let outcomes: Vec<Result<RatioRow>> = (0..repeats).into_par_iter().map(run_repeat).collect();
    let mut per_repeat = Vec::with_capacity(outcomes.len());
    for o in outcomes {
        per_repeat.push(o?);
    }

    let tr_small = stats(&per_repeat.iter().map(|r| r.tr_small).collect::<Vec<_>>());
    let tr_large = stats(&per_repeat.iter().map(|r| r.tr_large).collect::<Vec<_>>());
    let ratio = stats(&per_repeat.iter().map(|r| r.ratio).collect::<Vec<_>>());
    let z_score = if repeats >= 2 && ratio.stdev > 0.0 {
        Some((ratio.mean - 1.0) / (ratio.stdev / (repeats as f64).sqrt()))
    } else {
        None
    };
    Ok(RatioReport {
        small_m,
        large_m,
        repeats,
        base_seed,
        per_repeat,
        tr_small,
        tr_large,
        ratio,
        z_score,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gascloud::sample_cloud;

    fn fast_config() -> ScenarioConfig {
        // the default scenario shrunk to ~600 particles for unit tests
        let mut c = config::parse_config("").unwrap();
        c.cloud.bounding_box = crate::gascloud::BoundingBox::new(
            crate::geometry::Point3::new(-2.5e-4, -2.5e-4, 0.0499999999),
            crate::geometry::Point3::new(2.5e-4, 2.5e-4, 0.0500000001),
        )
        .unwrap();
        c
    }

    #[test]
    fn spread_resolution_prefers_explicit_sigma() {
        let mut c = fast_config();
        c.sigma_override_m = Some(3e-5);
        let s = c.effective_spread().unwrap();
        assert_eq!(s.sigma_m, 3e-5);
        assert!(s.t_bar_s.is_none());
    }

    #[test]
    fn spread_resolution_uses_kinetics_by_default() {
        let c = fast_config();
        let s = c.effective_spread().unwrap();
        let t = s.t_bar_s.unwrap();
        assert!((t / 4.8982171668398372e-6 - 1.0).abs() <= 1e-12);
        // the spread is deep in the linear regime, close to sigma(t̄)
        assert!((s.sigma_m / 8.6379962838533883e-5 - 1.0).abs() <= 1e-6);
    }

    #[test]
    fn both_overrides_rejected() {
        let mut c = fast_config();
        c.sigma_override_m = Some(1e-5);
        c.t_bar_override_s = Some(1e-6);
        assert!(c.validate().is_err());
    }

    #[test]
    fn sweep_spec_validation() {
        let ok = SweepSpec {
            sizes_m: vec![1e-6, 2e-6],
            repeats: 2,
            base_seed: 1,
        };
        assert!(ok.validate().is_ok());
        assert!(SweepSpec {
            sizes_m: vec![2e-6, 1e-6],
            repeats: 2,
            base_seed: 1
        }
        .validate()
        .is_err());
        assert!(SweepSpec {
            sizes_m: vec![],
            repeats: 2,
            base_seed: 1
        }
        .validate()
        .is_err());
        assert!(SweepSpec {
            sizes_m: vec![1e-6],
            repeats: 0,
            base_seed: 1
        }
        .validate()
        .is_err());
    }

    #[test]
    fn degenerate_sweep_equals_direct_call() {
        let mut c = fast_config();
        c.sigma_override_m = Some(5e-5);
        let sweep = SweepSpec {
            sizes_m: vec![2e-5],
            repeats: 1,
            base_seed: 9,
        };
        let table = run_sweep(&c, &sweep).unwrap();
        assert_eq!(table.rows.len(), 1);
        assert_eq!(table.aggregates.len(), 1);
        // direct evaluation with the same seed and size
        let mut spec = c.cloud.clone();
        spec.seed = 9;
        let cloud = sample_cloud(&spec).unwrap();
        let setup = size_setup(&c, 2e-5).unwrap();
        let direct = transmittance(&cloud, &setup, &c.scatter_params().unwrap(), c.method)
            .unwrap()
            .tr;
        assert_eq!(table.rows[0].tr.to_bits(), direct.to_bits());
        assert_eq!(table.aggregates[0].mean_tr.to_bits(), direct.to_bits());
        assert_eq!(table.aggregates[0].stdev_tr, 0.0);
    }

    #[test]
    fn sweep_rows_in_canonical_order_with_paired_hashes() {
        let c = fast_config();
        let sweep = SweepSpec {
            sizes_m: vec![1e-6, 1e-5, 1e-4],
            repeats: 3,
            base_seed: 100,
        };
        let table = run_sweep(&c, &sweep).unwrap();
        assert_eq!(table.rows.len(), 9);
        let mut i = 0;
        for (si, &size) in sweep.sizes_m.iter().enumerate() {
            for repeat in 0..3u32 {
                let row = &table.rows[i];
                assert_eq!(row.size_m, size);
                assert_eq!(row.repeat, repeat);
                assert_eq!(row.seed, 100 + repeat as u64);
                // the same cloud must appear at every size of this repeat
                let first = &table.rows[repeat as usize];
                assert_eq!(row.cloud_hash, first.cloud_hash, "size index {si}");
                i += 1;
            }
        }
        // distinct repeats use distinct clouds
        assert_ne!(table.rows[0].cloud_hash, table.rows[1].cloud_hash);
    }

    #[test]
    fn sweep_tr_strictly_decreasing_in_size_per_seed() {
        let c = fast_config();
        let sweep = SweepSpec {
            sizes_m: vec![1e-6, 2e-6, 5e-6, 1e-5, 2e-5, 5e-5, 1e-4],
            repeats: 2,
            base_seed: 5,
        };
        let table = run_sweep(&c, &sweep).unwrap();
        for repeat in 0..2u32 {
            let trs: Vec<f64> = table
                .rows
                .iter()
                .filter(|r| r.repeat == repeat)
                .map(|r| r.tr)
                .collect();
            for w in trs.windows(2) {
                assert!(w[1] < w[0], "TR must strictly decrease with size");
            }
        }
    }

    #[test]
    fn sweep_deterministic() {
        let c = fast_config();
        let sweep = SweepSpec {
            sizes_m: vec![1e-6, 1e-4],
            repeats: 4,
            base_seed: 77,
        };
        let a = run_sweep(&c, &sweep).unwrap();
        let b = run_sweep(&c, &sweep).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn ratio_identical_sizes_is_degenerate() {
        let c = fast_config();
        let report = run_ratio(&c, 1e-5, 1e-5, 4, 3).unwrap();
        assert!(report.is_degenerate());
        for row in &report.per_repeat {
            assert_eq!(row.ratio, 1.0);
        }
        assert_eq!(report.ratio.mean, 1.0);
        assert_eq!(report.ratio.stdev, 0.0);
    }

    #[test]
    fn ratio_mean_at_least_one() {
        let c = fast_config();
        let report = run_ratio(&c, 1e-6, 1e-4, 6, 11).unwrap();
        assert!(report.ratio.mean >= 1.0);
        for row in &report.per_repeat {
            assert!(row.ratio >= 1.0, "per-seed monotonicity implies ratio >= 1");
        }
        assert!(report.z_score.is_some());
    }

    #[test]
    fn ratio_classical_localized_limit() {
        // σ → 0 against both detectors: every particle is effectively local,
        // so the paired ratio collapses to the classical count difference
        // (1-G)^(N_small - N_large)
        let mut c = fast_config();
        c.sigma_override_m = Some(1e-9);
        c.g_coefficient = 0.01;
        let small = 3e-5;
        let large = 2e-4;
        let report = run_ratio(&c, small, large, 2, 21).unwrap();
        for row in &report.per_repeat {
            let mut spec = c.cloud.clone();
            spec.seed = row.seed;
            let cloud = sample_cloud(&spec).unwrap();
            let count = |half: f64| {
                cloud
                    .particles
                    .iter()
                    .filter(|p| {
                        let off = c.setup.transverse_offset(**p);
                        off.ox.abs() <= half && off.oy.abs() <= half
                    })
                    .count() as i64
            };
            let expected = (1.0 - c.g_coefficient).powi((count(small) - count(large)) as i32);
            assert!(
                (row.ratio / expected - 1.0).abs() <= 1e-6,
                "ratio {} vs classical {expected}",
                row.ratio
            );
        }
    }

    #[test]
    fn ratio_rejects_inverted_sizes() {
        let c = fast_config();
        assert!(run_ratio(&c, 1e-4, 1e-6, 2, 1).is_err());
        assert!(run_ratio(&c, 1e-6, 1e-4, 0, 1).is_err());
    }

    #[test]
    fn sweep_propagates_cloud_errors_with_repeat() {
        let mut c = fast_config();
        c.cloud.max_particles = 1;
        let sweep = SweepSpec {
            sizes_m: vec![1e-5],
            repeats: 2,
            base_seed: 0,
        };
        match run_sweep(&c, &sweep) {
            Err(Error::SweepRepeat { repeat: 0, source }) => {
                assert!(matches!(*source, Error::CloudTooLarge { .. }));
            }
            other => panic!("expected SweepRepeat, got {other:?}"),
        }
    }
}
