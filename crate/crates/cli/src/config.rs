//! Run settings. Values are layered: built-in defaults, then a `key = value`
//! file, then command-line flags.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use tracemg::lfa::OmegaRange;
use tracemg::{CycleType, Method, SmootherKind};

use crate::CliError;

/// Damping: one value or a grid to search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Damping {
    Fixed(f64),
    Range(OmegaRange),
}

impl FromStr for Damping {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |p: &str| p.trim().parse::<f64>().map_err(|_| invalid("omega", s));
        let damping = match parts.as_slice() {
            [w] => Damping::Fixed(num(w)?),
            [lo, hi] => Damping::Range(OmegaRange {
                lo: num(lo)?,
                hi: num(hi)?,
                ..OmegaRange::default()
            }),
            [lo, hi, step] => Damping::Range(OmegaRange {
                lo: num(lo)?,
                hi: num(hi)?,
                step: num(step)?,
            }),
            _ => return Err(invalid("omega", s)),
        };
        match damping {
            Damping::Fixed(w) if !(0.0..2.0).contains(&w) => Err(CliError::Validation(format!(
                "omega must lie in [0, 2), got {w}"
            ))),
            Damping::Range(r) => {
                r.validate()?;
                Ok(damping)
            }
            _ => Ok(damping),
        }
    }
}

/// Configuration set measured by `measure`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Every smoother for every method and degree at one mesh size.
    Smoothers,
    /// Element patches for CG and EDG, vertex patches for HDG, over mesh sizes.
    MeshSizes,
}

impl FromStr for Preset {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "smoothers" | "table3" => Ok(Preset::Smoothers),
            "mesh-sizes" | "table4" => Ok(Preset::MeshSizes),
            _ => Err(invalid("preset", s)),
        }
    }
}

/// Operator written by `stencil-dump`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DumpOperator {
    Trace,
    SmootherInverse,
    Lower,
    Coarse,
    Prolongation,
    Identity,
    /// The assembled Dirichlet trace matrix in MatrixMarket format.
    Matrix,
}

impl FromStr for DumpOperator {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "k" | "trace" => Ok(DumpOperator::Trace),
            "minv" | "smoother" => Ok(DumpOperator::SmootherInverse),
            "lower" => Ok(DumpOperator::Lower),
            "coarse" => Ok(DumpOperator::Coarse),
            "p" | "prolongation" => Ok(DumpOperator::Prolongation),
            "identity" => Ok(DumpOperator::Identity),
            "matrix" | "mtx" => Ok(DumpOperator::Matrix),
            _ => Err(invalid("operator", s)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub method: Option<Method>,
    pub degree: Option<usize>,
    pub smoother: Option<SmootherKind>,
    pub nu1: Option<usize>,
    pub nu2: Option<usize>,
    pub omega: Option<Damping>,
    pub n: Option<Vec<usize>>,
    pub levels: Option<Vec<usize>>,
    pub cycle: CycleType,
    pub seed: u64,
    pub seeds: usize,
    pub samples: usize,
    pub out: Option<PathBuf>,
    pub large: bool,
    pub table1: Option<PathBuf>,
    pub preset: Preset,
    pub operator: DumpOperator,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            method: None,
            degree: None,
            smoother: None,
            nu1: None,
            nu2: None,
            omega: None,
            n: None,
            levels: None,
            cycle: CycleType::V,
            seed: 0,
            seeds: 3,
            samples: 32,
            out: None,
            large: false,
            table1: None,
            preset: Preset::Smoothers,
            operator: DumpOperator::Trace,
        }
    }
}

fn invalid(key: &str, value: &str) -> CliError {
    CliError::Validation(format!("invalid value '{value}' for {key}"))
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value.trim().parse().map_err(|_| invalid(key, value))
}

fn parse_list(key: &str, value: &str) -> Result<Vec<usize>, CliError> {
    let list: Vec<usize> = value
        .split(',')
        .map(|v| parse(key, v))
        .collect::<Result<_, _>>()?;
    if list.is_empty() {
        return Err(invalid(key, value));
    }
    Ok(list)
}

fn parse_bool(key: &str, value: &str) -> Result<bool, CliError> {
    match value.trim() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(invalid(key, value)),
    }
}

impl Settings {
    /// Set one key from its textual value.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let v = value.trim();
        match key {
            "method" => self.method = Some(v.parse()?),
            "degree" | "k" => {
                let k: usize = parse(key, v)?;
                if !(1..=3).contains(&k) {
                    return Err(CliError::Validation(format!(
                        "degree must be 1, 2 or 3, got {k}"
                    )));
                }
                self.degree = Some(k);
            }
            "smoother" => self.smoother = Some(v.parse()?),
            "nu1" => self.nu1 = Some(parse(key, v)?),
            "nu2" => self.nu2 = Some(parse(key, v)?),
            "omega" => self.omega = Some(v.parse()?),
            "n" => {
                let n = parse_list(key, v)?;
                if let Some(bad) = n.iter().find(|&&m| m < 2 || !m.is_power_of_two()) {
                    return Err(CliError::Validation(format!(
                        "mesh size must be a power of two >= 2, got {bad}"
                    )));
                }
                self.n = Some(n);
            }
            "levels" => {
                let l = parse_list(key, v)?;
                if l.iter().any(|&m| m < 2) {
                    return Err(CliError::Validation("levels must be at least 2".into()));
                }
                self.levels = Some(l);
            }
            "cycle" => self.cycle = v.parse()?,
            "seed" => self.seed = parse(key, v)?,
            "seeds" => {
                self.seeds = parse(key, v)?;
                if self.seeds == 0 {
                    return Err(CliError::Validation("need at least one seed".into()));
                }
            }
            "samples" => {
                self.samples = parse(key, v)?;
                if self.samples == 0 {
                    return Err(CliError::Validation(
                        "need at least one frequency sample".into(),
                    ));
                }
            }
            "out" => self.out = Some(PathBuf::from(v)),
            "large" => self.large = parse_bool(key, v)?,
            "table1" => self.table1 = Some(PathBuf::from(v)),
            "preset" => self.preset = v.parse()?,
            "operator" => self.operator = v.parse()?,
            _ => return Err(CliError::Validation(format!("unknown setting '{key}'"))),
        }
        Ok(())
    }

    pub fn apply_all<'a>(
        &mut self,
        pairs: impl IntoIterator<Item = (&'a str, &'a str)>,
    ) -> Result<(), CliError> {
        for (k, v) in pairs {
            self.apply(k, v)?;
        }
        Ok(())
    }

    /// Defaults, then `file` (if any), then `flags`.
    pub fn layered(
        file: Option<&Path>,
        flags: &BTreeMap<String, String>,
    ) -> Result<Self, CliError> {
        let mut s = Settings::default();
        if let Some(path) = file {
            let text = fs::read_to_string(path).map_err(|e| {
                CliError::Validation(format!("cannot read config {}: {e}", path.display()))
            })?;
            let pairs = parse_config(&text)?;
            s.apply_all(pairs.iter().map(|(k, v)| (k.as_str(), v.as_str())))?;
        }
        s.apply_all(flags.iter().map(|(k, v)| (k.as_str(), v.as_str())))?;
        Ok(s)
    }
}

/// Parse `key = value` lines; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            CliError::Validation(format!("config line {}: expected 'key = value'", i + 1))
        })?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}
