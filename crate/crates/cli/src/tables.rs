//! Columnar output tables: the reliability band table, parameter
//! summaries, and atomic file writes.

use std::path::Path;

use sysrel::mcmc::{Chain, ParamVector};

use crate::{CliError, CliResult};

/// Posterior reliability bands on an abscissa grid: per row the grid
/// point, posterior mean, and central-interval endpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct BandTable {
    pub abscissa_name: String,
    pub rows: Vec<BandRow>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandRow {
    pub t: f64,
    pub mean: f64,
    pub lower: f64,
    pub upper: f64,
}

impl BandTable {
    pub fn validate(&self) -> CliResult<()> {
        for w in self.rows.windows(2) {
            if w[1].t <= w[0].t {
                return Err(CliError::Validation(format!(
                    "band abscissa not strictly increasing at {}",
                    w[1].t
                )));
            }
        }
        for r in &self.rows {
            if !(r.lower <= r.mean && r.mean <= r.upper) {
                return Err(CliError::Validation(format!(
                    "band ordering violated at t={}: ({}, {}, {})",
                    r.t, r.lower, r.mean, r.upper
                )));
            }
        }
        Ok(())
    }

    /// Emits the table; floats use Rust's shortest round-trip formatting,
    /// so `parse(emit(x)) = x`.
    pub fn emit(&self) -> String {
        let mut out = format!("{},mean,lower,upper\n", self.abscissa_name);
        for r in &self.rows {
            out.push_str(&format!("{},{},{},{}\n", r.t, r.mean, r.lower, r.upper));
        }
        out
    }

    pub fn parse(text: &str) -> CliResult<BandTable> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| CliError::Parse("empty band table".into()))?;
        let cols: Vec<&str> = header.split(',').collect();
        if cols.len() != 4 || cols[1] != "mean" || cols[2] != "lower" || cols[3] != "upper" {
            return Err(CliError::Parse(format!("bad band table header `{header}`")));
        }
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 4 {
                return Err(CliError::Parse(format!("band table line {}: expected 4 fields", i + 2)));
            }
            let num = |s: &str| {
                s.parse::<f64>().map_err(|_| {
                    CliError::Parse(format!("band table line {}: `{s}` is not a number", i + 2))
                })
            };
            rows.push(BandRow { t: num(f[0])?, mean: num(f[1])?, lower: num(f[2])?, upper: num(f[3])? });
        }
        let table = BandTable { abscissa_name: cols[0].to_string(), rows };
        table.validate()?;
        Ok(table)
    }

    /// Builds the band table from a chain and a reliability function of
    /// (draw, grid point).
    pub fn from_chain(
        chain: &Chain,
        f: impl Fn(&ParamVector, f64) -> f64,
        grid: &[f64],
        level: f64,
        abscissa_name: &str,
    ) -> CliResult<BandTable> {
        if grid.is_empty() {
            return Err(CliError::Validation("empty band grid".into()));
        }
        let tail = 0.5 * (1.0 - level);
        let mut rows = Vec::with_capacity(grid.len());
        for &t in grid {
            let (mean, qs) = chain
                .summarize(|pv| f(pv, t), &[tail, 1.0 - tail])
                .map_err(|e| CliError::Runtime(format!("band summary at t={t}: {e}")))?;
            // with a degenerate posterior the quantiles can straddle the
            // mean only through float noise; clamp to keep the row invariant
            rows.push(BandRow { t, mean, lower: qs[0].min(mean), upper: qs[1].max(mean) });
        }
        let table = BandTable { abscissa_name: abscissa_name.to_string(), rows };
        table.validate()?;
        Ok(table)
    }
}

/// Per-parameter posterior summary: mean and central-interval endpoints.
pub fn summary_table(chain: &Chain, level: f64) -> CliResult<String> {
    let tail = 0.5 * (1.0 - level);
    let mut out = String::from("parameter,mean,lower,upper\n");
    for (i, name) in chain.names.iter().enumerate() {
        let (mean, qs) = chain
            .summarize(|pv| pv.value(i), &[tail, 1.0 - tail])
            .map_err(|e| CliError::Runtime(format!("summary for `{name}`: {e}")))?;
        out.push_str(&format!("{name},{mean},{},{}\n", qs[0], qs[1]));
    }
    Ok(out)
}

/// Writes a file atomically: the content lands in a sibling temporary
/// file which is then renamed over the target.
pub fn write_atomic(path: &Path, content: &str) -> CliResult<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", dir.display())))?;
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, content)
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", tmp.display())))?;
    std::fs::rename(&tmp, path)
        .map_err(|e| CliError::Runtime(format!("cannot rename to {}: {e}", path.display())))?;
    Ok(())
}

/// Evenly spaced band grid from config-style parameters.
pub fn linspace(start: f64, stop: f64, points: usize) -> CliResult<Vec<f64>> {
    if points < 1 || stop <= start {
        return Err(CliError::Validation(format!(
            "bad band grid: start {start}, stop {stop}, points {points}"
        )));
    }
    if points == 1 {
        return Ok(vec![start]);
    }
    let h = (stop - start) / (points - 1) as f64;
    Ok((0..points).map(|i| start + i as f64 * h).collect())
}
