//! CSV emission and re-loading of harness outputs.
//!
//! Numbers are written in Rust's shortest round-trip decimal form, so
//! reloading a table reproduces every f64 bit for bit. Each file starts with
//! a `#` comment recording the generator algorithm and seed.

use std::io::{self, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::gascloud::RNG_ALGORITHM;

use super::{RatioReport, Stats, SweepAggregate, SweepRow, SweepTable};

const SWEEP_ROW_HEADER: &str = "size_m,repeat,seed,tr,n_inside,cloud_hash";
const SWEEP_AGG_HEADER: &str = "size_m,mean_tr,stdev_tr";

impl SweepTable {
    pub fn to_csv_string(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!(
            "# rng={RNG_ALGORITHM} base_seed={}\n",
            self.base_seed
        ));
        s.push_str(SWEEP_ROW_HEADER);
        s.push('\n');
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.size_m, r.repeat, r.seed, r.tr, r.n_inside, r.cloud_hash
            ));
        }
        s.push_str(SWEEP_AGG_HEADER);
        s.push('\n');
        for a in &self.aggregates {
            s.push_str(&format!("{},{},{}\n", a.size_m, a.mean_tr, a.stdev_tr));
        }
        s
    }

    pub fn write_csv(&self, mut w: impl Write) -> io::Result<()> {
        w.write_all(self.to_csv_string().as_bytes())
    }

    /// Parses a sweep CSV back into a table. The in-memory `mean_n_inside`
    /// is recomputed from the rows (it is not part of the file schema).
    pub fn from_csv_str(text: &str) -> Result<SweepTable> {
        let mut base_seed = 0u64;
        let mut rows: Vec<SweepRow> = Vec::new();
        let mut aggregates: Vec<SweepAggregate> = Vec::new();
        let mut in_aggregates = false;
        let mut seen_row_header = false;
        for (i, line) in text.lines().enumerate() {
            let lineno = i + 1;
            let t = line.trim();
            if t.is_empty() {
                continue;
            }
            if t.starts_with('#') {
                if let Some(seed) = t.split("base_seed=").nth(1) {
                    base_seed = seed.trim().parse::<u64>().map_err(|e| {
                        Error::domain(format!("sweep CSV line {lineno}: bad base_seed: {e}"))
                    })?;
                }
                continue;
            }
            if t == SWEEP_ROW_HEADER {
                seen_row_header = true;
                continue;
            }
            if t == SWEEP_AGG_HEADER {
                in_aggregates = true;
                continue;
            }
            let fields: Vec<&str> = t.split(',').collect();
            let num = |s: &str| -> Result<f64> {
                s.parse::<f64>()
                    .map_err(|e| Error::domain(format!("sweep CSV line {lineno}: {e}")))
            };
            if in_aggregates {
                if fields.len() != 3 {
                    return Err(Error::domain(format!(
                        "sweep CSV line {lineno}: expected 3 aggregate fields, got {}",
                        fields.len()
                    )));
                }
                aggregates.push(SweepAggregate {
                    size_m: num(fields[0])?,
                    mean_tr: num(fields[1])?,
                    stdev_tr: num(fields[2])?,
                    mean_n_inside: f64::NAN,
                });
            } else {
                if !seen_row_header {
                    return Err(Error::domain(format!(
                        "sweep CSV line {lineno}: data before header"
                    )));
                }
                if fields.len() != 6 {
                    return Err(Error::domain(format!(
                        "sweep CSV line {lineno}: expected 6 fields, got {}",
                        fields.len()
                    )));
                }
                let int = |s: &str| -> Result<u64> {
                    s.parse::<u64>()
                        .map_err(|e| Error::domain(format!("sweep CSV line {lineno}: {e}")))
                };
                rows.push(SweepRow {
                    size_m: num(fields[0])?,
                    repeat: int(fields[1])? as u32,
                    seed: int(fields[2])?,
                    tr: num(fields[3])?,
                    n_inside: int(fields[4])?,
                    cloud_hash: fields[5].to_owned(),
                });
            }
        }
        // restore the in-memory aggregate field from the rows
        for a in &mut aggregates {
            let inside: Vec<f64> = rows
                .iter()
                .filter(|r| r.size_m == a.size_m)
                .map(|r| r.n_inside as f64)
                .collect();
            a.mean_n_inside = super::stats(&inside).mean;
        }
        Ok(SweepTable {
            base_seed,
            rows,
            aggregates,
        })
    }
}

/// Writes a table to a file, creating parent directories if needed.
pub fn emit_csv(table: &SweepTable, path: impl AsRef<Path>) -> io::Result<()> {
    let path = path.as_ref();
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    let mut f = std::fs::File::create(path)?;
    table.write_csv(&mut f)
}

fn stat_row(name: &str, s: Stats) -> String {
    format!("{name},{},{}\n", s.mean, s.stdev)
}

impl RatioReport {
    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "# rng={RNG_ALGORITHM} base_seed={} small_m={} large_m={} repeats={}\n",
            self.base_seed, self.small_m, self.large_m, self.repeats
        ));
        out.push_str("repeat,seed,tr_small,tr_large,ratio\n");
        for r in &self.per_repeat {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.repeat, r.seed, r.tr_small, r.tr_large, r.ratio
            ));
        }
        out.push_str("metric,mean,stdev\n");
        out.push_str(&stat_row("tr_small", self.tr_small));
        out.push_str(&stat_row("tr_large", self.tr_large));
        out.push_str(&stat_row("ratio", self.ratio));
        match self.z_score {
            Some(z) => out.push_str(&format!("z_score,{z},\n")),
            None => out.push_str("z_score,degenerate,\n"),
        }
        out
    }

    pub fn write_csv(&self, mut w: impl Write) -> io::Result<()> {
        w.write_all(self.to_csv_string().as_bytes())
    }

    /// Short human-readable summary for the terminal.
    pub fn summary(&self) -> String {
        let z = match self.z_score {
            Some(z) => format!("{z:.3}"),
            None => "degenerate (zero variance or single repeat)".to_owned(),
        };
        format!(
            "paired detectors {:.3e} m vs {:.3e} m over {} repeats (base seed {})\n\
             tr_small: mean {:.9} stdev {:.3e}\n\
             tr_large: mean {:.9} stdev {:.3e}\n\
             ratio:    mean {:.9} stdev {:.3e}\n\
             z-score of mean(ratio) vs 1: {z}",
            self.small_m,
            self.large_m,
            self.repeats,
            self.base_seed,
            self.tr_small.mean,
            self.tr_small.stdev,
            self.tr_large.mean,
            self.tr_large.stdev,
            self.ratio.mean,
            self.ratio.stdev,
        )
    }
}
