//! Gas species constants, kinetic-theory helpers, and seeded cloud sampling.

use std::io::{self, BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use sha2::{Digest, Sha256};

use crate::consts::BOLTZMANN;
use crate::error::{require_positive, Error, Result};
use crate::geometry::Point3;

/// Name of the deterministic generator used by [`sample_cloud`], recorded in
/// every output file alongside the seed. ChaCha is counter-based, so the
/// stream for a given seed is fixed across platforms and versions.
pub const RNG_ALGORITHM: &str = "chacha12";

/// Default refusal threshold for the sampled particle count.
pub const DEFAULT_PARTICLE_CAP: u64 = 100_000_000;

/// Constants of one gas species.
#[derive(Clone, Debug)]
pub struct GasSpecies {
    pub name: String,
    pub mass_kg: f64,
    /// Collision cross-section entering the mean free time, m².
    pub collision_cross_section_m2: f64,
    /// Post-collision re-localization width of `|Ψ|²`, m. An input: the
    /// model does not predict it.
    pub sigma0_m: f64,
}

impl GasSpecies {
    pub fn new(
        name: impl Into<String>,
        mass_kg: f64,
        collision_cross_section_m2: f64,
        sigma0_m: f64,
    ) -> Result<Self> {
        let s = GasSpecies {
            name: name.into(),
            mass_kg,
            collision_cross_section_m2,
            sigma0_m,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("species mass", self.mass_kg)?;
        require_positive("collision cross-section", self.collision_cross_section_m2)?;
        require_positive("sigma0", self.sigma0_m)?;
        Ok(())
    }

    /// The default scenario species: a water molecule with a coarse
    /// geometric cross-section and an ångström-scale re-localization width.
    pub fn water_vapor() -> GasSpecies {
        GasSpecies {
            name: "water".to_owned(),
            mass_kg: 2.99e-26,
            collision_cross_section_m2: 1e-18,
            sigma0_m: 1e-10,
        }
    }
}

/// Axis-aligned box, inclusive on all faces.
#[derive(Clone, Copy, Debug)]
pub struct BoundingBox {
    pub min: Point3,
    pub max: Point3,
}

impl BoundingBox {
    pub fn new(min: Point3, max: Point3) -> Result<Self> {
        let b = BoundingBox { min, max };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        for (lo, hi, name) in [
            (self.min.x, self.max.x, "x"),
            (self.min.y, self.max.y, "y"),
            (self.min.z, self.max.z, "z"),
        ] {
            if !lo.is_finite() || !hi.is_finite() || lo >= hi {
                return Err(Error::domain(format!(
                    "bounding box {name} extent invalid: [{lo}, {hi}]"
                )));
            }
        }
        Ok(())
    }

    pub fn volume_m3(&self) -> f64 {
        (self.max.x - self.min.x) * (self.max.y - self.min.y) * (self.max.z - self.min.z)
    }

    pub fn contains(&self, p: Point3) -> bool {
        p.x >= self.min.x
            && p.x <= self.max.x
            && p.y >= self.min.y
            && p.y <= self.max.y
            && p.z >= self.min.z
            && p.z <= self.max.z
    }
}

/// Generative parameters of a cloud: species, thermodynamic state, box,
/// and the seed that makes sampling reproducible.
#[derive(Clone, Debug)]
pub struct CloudSpec {
    pub species: GasSpecies,
    pub pressure_pa: f64,
    pub temperature_k: f64,
    pub bounding_box: BoundingBox,
    pub seed: u64,
    /// Refuse to sample more than this many particles.
    pub max_particles: u64,
}

impl CloudSpec {
    pub fn validate(&self) -> Result<()> {
        self.species.validate()?;
        require_positive("pressure", self.pressure_pa)?;
        require_positive("temperature", self.temperature_k)?;
        self.bounding_box.validate()?;
        Ok(())
    }
}

/// A sampled cloud: immutable particle positions plus the kinetic state
/// needed downstream.
#[derive(Clone, Debug)]
pub struct GasCloud {
    pub particles: Vec<Point3>,
    pub species: GasSpecies,
    /// Mean free time of the species at the sampling conditions, s.
    pub t_bar_s: f64,
}

/// Ideal-gas number density `n = p / (k_B T)`, m⁻³.
pub fn number_density(pressure_pa: f64, temperature_k: f64) -> Result<f64> {
    require_positive("pressure", pressure_pa)?;
    require_positive("temperature", temperature_k)?;
    Ok(pressure_pa / (BOLTZMANN * temperature_k))
}

/// Kinetic-theory mean free time `t̄ = 1 / (√2 n σ_c v̄)` with the mean
/// speed `v̄ = sqrt(8 k_B T / (π m))`.
pub fn mean_free_time(species: &GasSpecies, pressure_pa: f64, temperature_k: f64) -> Result<f64> {
    species.validate()?;
    let n = number_density(pressure_pa, temperature_k)?;
    let v_mean = (8.0 * BOLTZMANN * temperature_k / (std::f64::consts::PI * species.mass_kg)).sqrt();
    let t_bar = 1.0
        / (std::f64::consts::SQRT_2 * n * species.collision_cross_section_m2 * v_mean);
    if !t_bar.is_finite() || t_bar <= 0.0 {
        return Err(Error::domain(format!(
            "mean free time is not a positive finite number: {t_bar}"
        )));
    }
    Ok(t_bar)
}

/// Draws `N = round(n·V)` positions i.i.d. uniformly in the box from a
/// ChaCha12 stream seeded with `spec.seed`. Each particle consumes three
/// uniform doubles in x, y, z order, so a given seed yields the same cloud
/// bit for bit on every platform.
pub fn sample_cloud(spec: &CloudSpec) -> Result<GasCloud> {
    spec.validate()?;
    let n = number_density(spec.pressure_pa, spec.temperature_k)?;
    let expected = n * spec.bounding_box.volume_m3();
    let count = expected.round();
    // comparing in the accepting direction sends a NaN count to the error
    let within_cap = count <= spec.max_particles as f64;
    if !within_cap {
        return Err(Error::CloudTooLarge {
            particles: expected,
            cap: spec.max_particles,
        });
    }
    let count = count as u64;
    let t_bar_s = mean_free_time(&spec.species, spec.pressure_pa, spec.temperature_k)?;
    let mut rng = ChaCha12Rng::seed_from_u64(spec.seed);
    let b = &spec.bounding_box;
    let mut particles = Vec::with_capacity(count as usize);
    for _ in 0..count {
        let x = uniform_in(&mut rng, b.min.x, b.max.x);
        let y = uniform_in(&mut rng, b.min.y, b.max.y);
        let z = uniform_in(&mut rng, b.min.z, b.max.z);
        particles.push(Point3::new(x, y, z));
    }
    Ok(GasCloud {
        particles,
        species: spec.species.clone(),
        t_bar_s,
    })
}

fn uniform_in(rng: &mut ChaCha12Rng, lo: f64, hi: f64) -> f64 {
    // clamp guards the half-ulp case where lo + width rounds past hi
    (lo + (hi - lo) * rng.gen::<f64>()).clamp(lo, hi)
}

impl GasCloud {
    /// Builds a cloud from explicit positions (controlled test scenarios,
    /// re-loaded dumps).
    pub fn from_positions(particles: Vec<Point3>, species: GasSpecies, t_bar_s: f64) -> Self {
        GasCloud {
            particles,
            species,
            t_bar_s,
        }
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    /// SHA-256 over the little-endian bytes of all coordinates in particle
    /// order, truncated to 16 hex digits. Logged per sweep row so paired
    /// seeding is checkable from the CSV alone.
    pub fn position_hash(&self) -> String {
        let mut hasher = Sha256::new();
        for p in &self.particles {
            hasher.update(p.x.to_le_bytes());
            hasher.update(p.y.to_le_bytes());
            hasher.update(p.z.to_le_bytes());
        }
        let digest = hasher.finalize();
        let mut s = String::with_capacity(16);
        for byte in &digest[..8] {
            s.push_str(&format!("{byte:02x}"));
        }
        s
    }

    /// Cloud dump: `# rng=... seed=...` comment, `x_m,y_m,z_m` header, one
    /// particle per row at 17 significant digits (enough to round-trip f64).
    pub fn write_positions_csv(&self, mut w: impl Write, seed: Option<u64>) -> io::Result<()> {
        match seed {
            Some(s) => writeln!(w, "# rng={RNG_ALGORITHM} seed={s}")?,
            None => writeln!(w, "# rng={RNG_ALGORITHM} seed=none")?,
        }
        writeln!(w, "x_m,y_m,z_m")?;
        for p in &self.particles {
            writeln!(w, "{:.16e},{:.16e},{:.16e}", p.x, p.y, p.z)?;
        }
        Ok(())
    }
}

/// Reads a cloud dump written by [`GasCloud::write_positions_csv`], skipping
/// `#` comments and the header row.
pub fn read_positions_csv(r: impl BufRead) -> Result<Vec<Point3>> {
    let mut out = Vec::new();
    for (lineno, line) in r.lines().enumerate() {
        let line = line.map_err(|e| Error::domain(format!("read error: {e}")))?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') || t == "x_m,y_m,z_m" {
            continue;
        }
        let fields: Vec<&str> = t.split(',').collect();
        if fields.len() != 3 {
            return Err(Error::domain(format!(
                "cloud CSV line {}: expected 3 fields, got {}",
                lineno + 1,
                fields.len()
            )));
        }
        let parse = |s: &str| -> Result<f64> {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::domain(format!("cloud CSV line {}: {e}", lineno + 1)))
        };
        out.push(Point3::new(
            parse(fields[0])?,
            parse(fields[1])?,
            parse(fields[2])?,
        ));
    }
    Ok(out)
}
