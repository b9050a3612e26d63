//! Flat key-value configuration files with dotted section keys.
//!
//! Grammar (documented in FORMATS.md): one `key = value` pair per line,
//! `#` starts a comment, blank lines ignored. Keys are dotted paths such
//! as `mcmc.burn_in`. Values are free text; typed accessors parse on
//! demand and report the key and file position on failure.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::{CliError, CliResult};

#[derive(Debug, Clone)]
pub struct Config {
    values: BTreeMap<String, (String, usize)>,
    /// Directory of the config file; relative dataset paths resolve
    /// against it.
    pub base_dir: PathBuf,
    pub path: PathBuf,
}

impl Config {
    pub fn parse(path: &Path, text: &str) -> CliResult<Config> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Parse(format!(
                    "{}:{}: expected `key = value`, got `{line}`",
                    path.display(),
                    i + 1
                ))
            })?;
            let key = key.trim().to_string();
            if key.is_empty() {
                return Err(CliError::Parse(format!(
                    "{}:{}: empty key",
                    path.display(),
                    i + 1
                )));
            }
            values.insert(key, (value.trim().to_string(), i + 1));
        }
        Ok(Config {
            values,
            base_dir: path.parent().unwrap_or(Path::new(".")).to_path_buf(),
            path: path.to_path_buf(),
        })
    }

    pub fn load(path: &Path) -> CliResult<Config> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Parse(format!("cannot read config {}: {e}", path.display()))
        })?;
        Config::parse(path, &text)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|(v, _)| v.as_str())
    }

    pub fn require(&self, key: &str) -> CliResult<&str> {
        self.raw(key).ok_or_else(|| {
            CliError::Validation(format!(
                "{}: missing required key `{key}`",
                self.path.display()
            ))
        })
    }

    fn typed<T: std::str::FromStr>(&self, key: &str, kind: &str) -> CliResult<Option<T>> {
        match self.values.get(key) {
            None => Ok(None),
            Some((v, line)) => v.parse::<T>().map(Some).map_err(|_| {
                CliError::Parse(format!(
                    "{}:{line}: key `{key}`: `{v}` is not {kind}",
                    self.path.display()
                ))
            }),
        }
    }

    pub fn f64_or(&self, key: &str, default: f64) -> CliResult<f64> {
        Ok(self.typed::<f64>(key, "a number")?.unwrap_or(default))
    }

    pub fn u64_or(&self, key: &str, default: u64) -> CliResult<u64> {
        Ok(self.typed::<u64>(key, "a nonnegative integer")?.unwrap_or(default))
    }

    pub fn usize_or(&self, key: &str, default: usize) -> CliResult<usize> {
        Ok(self.typed::<usize>(key, "a nonnegative integer")?.unwrap_or(default))
    }

    pub fn require_f64(&self, key: &str) -> CliResult<f64> {
        self.require(key)?;
        Ok(self.typed::<f64>(key, "a number")?.expect("key present"))
    }

    /// A dataset path, resolved relative to the config file's directory.
    pub fn data_path(&self, key: &str) -> CliResult<PathBuf> {
        let raw = self.require(key)?;
        let p = Path::new(raw);
        Ok(if p.is_absolute() { p.to_path_buf() } else { self.base_dir.join(p) })
    }

    /// Comma-separated list of numbers.
    pub fn f64_list(&self, key: &str) -> CliResult<Option<Vec<f64>>> {
        let Some((v, line)) = self.values.get(key) else { return Ok(None) };
        v.split(',')
            .map(|s| {
                s.trim().parse::<f64>().map_err(|_| {
                    CliError::Parse(format!(
                        "{}:{line}: key `{key}`: `{}` is not a number",
                        self.path.display(),
                        s.trim()
                    ))
                })
            })
            .collect::<CliResult<Vec<f64>>>()
            .map(Some)
    }

    pub fn u64_list(&self, key: &str) -> CliResult<Option<Vec<u64>>> {
        let Some((v, line)) = self.values.get(key) else { return Ok(None) };
        v.split(',')
            .map(|s| {
                s.trim().parse::<u64>().map_err(|_| {
                    CliError::Parse(format!(
                        "{}:{line}: key `{key}`: `{}` is not a nonnegative integer",
                        self.path.display(),
                        s.trim()
                    ))
                })
            })
            .collect::<CliResult<Vec<u64>>>()
            .map(Some)
    }
}
