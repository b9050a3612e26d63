//! Comma-separated dataset ingestion with a mandatory header row and
//! line-precise diagnostics. Schemas are documented in FORMATS.md.

use std::path::Path;

use sysrel::system::{BinomialAgeData, LifetimeData, PartialSystemTest};

use crate::{CliError, CliResult};

/// One parsed CSV file: header names plus rows of raw fields, each tagged
/// with its 1-based line number.
pub struct Csv {
    pub path: String,
    pub header: Vec<String>,
    pub rows: Vec<(usize, Vec<String>)>,
}

impl Csv {
    pub fn load(path: &Path, columns: &[&str]) -> CliResult<Csv> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Parse(format!("cannot read {}: {e}", path.display())))?;
        Csv::parse(&path.display().to_string(), &text, columns)
    }

    pub fn parse(path: &str, text: &str, columns: &[&str]) -> CliResult<Csv> {
        let mut lines = text.lines().enumerate();
        let header = loop {
            match lines.next() {
                None => return Err(CliError::Parse(format!("{path}: no records"))),
                Some((_, l)) if l.trim().is_empty() => continue,
                Some((_, l)) => break l,
            }
        };
        let names: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();
        for &want in columns {
            if !names.iter().any(|n| n == want) {
                return Err(CliError::Parse(format!(
                    "{path}:1: missing column `{want}` (header: {header})"
                )));
            }
        }
        let mut rows = Vec::new();
        for (i, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<String> = line.split(',').map(|s| s.trim().to_string()).collect();
            if fields.len() != names.len() {
                return Err(CliError::Parse(format!(
                    "{path}:{}: expected {} fields, got {}",
                    i + 1,
                    names.len(),
                    fields.len()
                )));
            }
            rows.push((i + 1, fields));
        }
        if rows.is_empty() {
            return Err(CliError::Parse(format!("{path}: no records")));
        }
        Ok(Csv { path: path.to_string(), header: names, rows })
    }

    pub fn col(&self, name: &str) -> usize {
        self.header.iter().position(|n| n == name).expect("column checked at load")
    }

    pub fn f64_at(&self, line: usize, fields: &[String], col: usize) -> CliResult<f64> {
        fields[col].parse::<f64>().map_err(|_| {
            CliError::Parse(format!(
                "{}:{line}: column `{}`: `{}` is not a number",
                self.path, self.header[col], fields[col]
            ))
        })
    }

    pub fn u64_at(&self, line: usize, fields: &[String], col: usize) -> CliResult<u64> {
        fields[col].parse::<u64>().map_err(|_| {
            CliError::Parse(format!(
                "{}:{line}: column `{}`: `{}` is not a nonnegative integer",
                self.path, self.header[col], fields[col]
            ))
        })
    }
}

/// `age,trials,successes` rows.
pub fn parse_binomial_age(path: &Path) -> CliResult<BinomialAgeData> {
    let csv = Csv::load(path, &["age", "trials", "successes"])?;
    let (ca, ct, cs) = (csv.col("age"), csv.col("trials"), csv.col("successes"));
    let mut rows = Vec::new();
    for (line, f) in &csv.rows {
        let age = csv.f64_at(*line, f, ca)?;
        let trials = csv.u64_at(*line, f, ct)?;
        let successes = csv.u64_at(*line, f, cs)?;
        if successes > trials {
            return Err(CliError::Validation(format!(
                "{}:{line}: successes ({successes}) exceeds trials ({trials})",
                csv.path
            )));
        }
        rows.push((age, trials, successes));
    }
    Ok(BinomialAgeData { rows })
}

/// `time,censored` rows; censored is 0 (observed) or 1 (right-censored).
pub fn parse_lifetimes(path: &Path) -> CliResult<LifetimeData> {
    let csv = Csv::load(path, &["time", "censored"])?;
    let (ct, cc) = (csv.col("time"), csv.col("censored"));
    let mut data = LifetimeData { observed: vec![], censored: vec![] };
    for (line, f) in &csv.rows {
        let time = csv.f64_at(*line, f, ct)?;
        if time <= 0.0 {
            return Err(CliError::Validation(format!(
                "{}:{line}: nonpositive lifetime {time}",
                csv.path
            )));
        }
        match csv.u64_at(*line, f, cc)? {
            0 => data.observed.push(time),
            1 => data.censored.push(time),
            other => {
                return Err(CliError::Validation(format!(
                    "{}:{line}: censored flag must be 0 or 1, got {other}",
                    csv.path
                )))
            }
        }
    }
    Ok(data)
}

/// `age,value` degradation measurements.
pub fn parse_degradation(path: &Path) -> CliResult<Vec<(f64, f64)>> {
    let csv = Csv::load(path, &["age", "value"])?;
    let (ca, cv) = (csv.col("age"), csv.col("value"));
    csv.rows
        .iter()
        .map(|(line, f)| Ok((csv.f64_at(*line, f, ca)?, csv.f64_at(*line, f, cv)?)))
        .collect()
}

/// `kind,age,value` rows with kind in {failure, survivor, degradation};
/// `value` is the degradation measurement and must be empty otherwise.
pub fn parse_degfail(path: &Path) -> CliResult<sysrel::component::DegFailData> {
    let csv = Csv::load(path, &["kind", "age", "value"])?;
    let (ck, ca, cv) = (csv.col("kind"), csv.col("age"), csv.col("value"));
    let mut data = sysrel::component::DegFailData {
        failures: vec![],
        survivors: vec![],
        degradation: vec![],
    };
    for (line, f) in &csv.rows {
        let age = csv.f64_at(*line, f, ca)?;
        match f[ck].as_str() {
            "failure" => data.failures.push(age),
            "survivor" => data.survivors.push(age),
            "degradation" => data.degradation.push((age, csv.f64_at(*line, f, cv)?)),
            other => {
                return Err(CliError::Validation(format!(
                    "{}:{line}: unknown kind `{other}` (want failure, survivor or degradation)",
                    csv.path
                )))
            }
        }
    }
    Ok(data)
}

/// `component,trials,successes` rows: one per component, in order.
pub fn parse_component_counts(path: &Path) -> CliResult<Vec<(u64, u64)>> {
    let csv = Csv::load(path, &["component", "trials", "successes"])?;
    let (cc, ct, cs) = (csv.col("component"), csv.col("trials"), csv.col("successes"));
    let mut out = Vec::new();
    for (line, f) in &csv.rows {
        let idx = csv.u64_at(*line, f, cc)? as usize;
        if idx != out.len() + 1 {
            return Err(CliError::Validation(format!(
                "{}:{line}: components must be numbered consecutively from 1, got {idx}",
                csv.path
            )));
        }
        let trials = csv.u64_at(*line, f, ct)?;
        let successes = csv.u64_at(*line, f, cs)?;
        if successes > trials {
            return Err(CliError::Validation(format!(
                "{}:{line}: successes ({successes}) exceeds trials ({trials})",
                csv.path
            )));
        }
        out.push((trials, successes));
    }
    Ok(out)
}

fn parse_index_set(
    csv: &Csv,
    line: usize,
    raw: &str,
    n_components: usize,
) -> CliResult<Vec<usize>> {
    if raw.is_empty() {
        return Ok(vec![]);
    }
    raw.split('|')
        .map(|s| {
            let k: usize = s.trim().parse().map_err(|_| {
                CliError::Parse(format!(
                    "{}:{line}: `{s}` is not a component number",
                    csv.path
                ))
            })?;
            if k == 0 || k > n_components {
                return Err(CliError::Validation(format!(
                    "{}:{line}: component {k} out of range 1..{n_components}",
                    csv.path
                )));
            }
            Ok(k - 1)
        })
        .collect()
}

/// `known_working,known_failed,some_failed` rows: `|`-separated 1-based
/// component numbers, empty for an empty set.
pub fn parse_partial_tests(
    path: &Path,
    n_components: usize,
) -> CliResult<Vec<PartialSystemTest>> {
    let csv = Csv::load(path, &["known_working", "known_failed", "some_failed"])?;
    let (cw, cf, cs) =
        (csv.col("known_working"), csv.col("known_failed"), csv.col("some_failed"));
    let mut tests = Vec::new();
    for (line, f) in &csv.rows {
        let t = PartialSystemTest {
            known_working: parse_index_set(&csv, *line, &f[cw], n_components)?,
            known_failed: parse_index_set(&csv, *line, &f[cf], n_components)?,
            some_failed: parse_index_set(&csv, *line, &f[cs], n_components)?,
            age: 0.0,
        };
        t.validate().map_err(|e| {
            CliError::Validation(format!("{}:{line}: {e}", csv.path))
        })?;
        tests.push(t);
    }
    Ok(tests)
}

/// `computer,interval,count` rows on a dense (computer, interval) grid.
pub fn parse_nhpp_counts(path: &Path) -> CliResult<Vec<Vec<u64>>> {
    let csv = Csv::load(path, &["computer", "interval", "count"])?;
    let (cc, ci, cn) = (csv.col("computer"), csv.col("interval"), csv.col("count"));
    let mut grid: Vec<Vec<Option<u64>>> = Vec::new();
    for (line, f) in &csv.rows {
        let computer = csv.u64_at(*line, f, cc)? as usize;
        let interval = csv.u64_at(*line, f, ci)? as usize;
        let count = csv.u64_at(*line, f, cn)?;
        if computer == 0 || interval == 0 {
            return Err(CliError::Validation(format!(
                "{}:{line}: computers and intervals are numbered from 1",
                csv.path
            )));
        }
        while grid.len() < computer {
            grid.push(vec![]);
        }
        let row = &mut grid[computer - 1];
        while row.len() < interval {
            row.push(None);
        }
        if row[interval - 1].replace(count).is_some() {
            return Err(CliError::Validation(format!(
                "{}:{line}: duplicate cell (computer {computer}, interval {interval})",
                csv.path
            )));
        }
    }
    grid.into_iter()
        .enumerate()
        .map(|(i, row)| {
            row.into_iter()
                .enumerate()
                .map(|(j, c)| {
                    c.ok_or_else(|| {
                        CliError::Validation(format!(
                            "{}: missing cell (computer {}, interval {})",
                            path.display(),
                            i + 1,
                            j + 1
                        ))
                    })
                })
                .collect()
        })
        .collect()
}

/// `component,time` rows; component is 1..3 or `system`.
pub fn parse_weibull_series(path: &Path) -> CliResult<([Vec<f64>; 3], Vec<f64>)> {
    let csv = Csv::load(path, &["component", "time"])?;
    let (cc, ct) = (csv.col("component"), csv.col("time"));
    let mut comp: [Vec<f64>; 3] = [vec![], vec![], vec![]];
    let mut system = Vec::new();
    for (line, f) in &csv.rows {
        let time = csv.f64_at(*line, f, ct)?;
        if time <= 0.0 {
            return Err(CliError::Validation(format!(
                "{}:{line}: nonpositive lifetime {time}",
                csv.path
            )));
        }
        match f[cc].as_str() {
            "1" => comp[0].push(time),
            "2" => comp[1].push(time),
            "3" => comp[2].push(time),
            "system" => system.push(time),
            other => {
                return Err(CliError::Validation(format!(
                    "{}:{line}: component must be 1, 2, 3 or system, got `{other}`",
                    csv.path
                )))
            }
        }
    }
    Ok((comp, system))
}

/// `size,conv_n,conv_y,rand_n,rand_y` rows, one per lot.
pub fn parse_lots(path: &Path) -> CliResult<sysrel::component::LotData> {
    let csv = Csv::load(path, &["size", "conv_n", "conv_y", "rand_n", "rand_y"])?;
    let cols: Vec<usize> =
        ["size", "conv_n", "conv_y", "rand_n", "rand_y"].iter().map(|c| csv.col(c)).collect();
    let mut lots = Vec::new();
    for (line, f) in &csv.rows {
        let v: Vec<u64> =
            cols.iter().map(|&c| csv.u64_at(*line, f, c)).collect::<CliResult<_>>()?;
        let lot = sysrel::component::Lot {
            size: v[0],
            conv_n: v[1],
            conv_y: v[2],
            rand_n: v[3],
            rand_y: v[4],
        };
        lot.validate()
            .map_err(|e| CliError::Validation(format!("{}:{line}: {e}", csv.path)))?;
        lots.push(lot);
    }
    Ok(sysrel::component::LotData { lots })
}

/// `kind,age,spec,value` rows: `pass`/`fail` outcomes (spec and value
/// empty) or `spec` measurements (1-based spec number plus value).
pub fn parse_surrogate(
    path: &Path,
    n_specs: usize,
) -> CliResult<sysrel::component::SurrogateQAData> {
    let csv = Csv::load(path, &["kind", "age", "spec", "value"])?;
    let (ck, ca, cs, cv) = (csv.col("kind"), csv.col("age"), csv.col("spec"), csv.col("value"));
    let mut data = sysrel::component::SurrogateQAData { pass_fail: vec![], specs: vec![] };
    for (line, f) in &csv.rows {
        let age = csv.f64_at(*line, f, ca)?;
        match f[ck].as_str() {
            "pass" => data.pass_fail.push((age, 1)),
            "fail" => data.pass_fail.push((age, 0)),
            "spec" => {
                let idx = csv.u64_at(*line, f, cs)? as usize;
                if idx == 0 || idx > n_specs {
                    return Err(CliError::Validation(format!(
                        "{}:{line}: spec {idx} out of range 1..{n_specs}",
                        csv.path
                    )));
                }
                data.specs.push((age, idx - 1, csv.f64_at(*line, f, cv)?));
            }
            other => {
                return Err(CliError::Validation(format!(
                    "{}:{line}: unknown kind `{other}` (want pass, fail or spec)",
                    csv.path
                )))
            }
        }
    }
    Ok(data)
}
