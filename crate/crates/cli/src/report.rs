//! CSV rows and number formatting.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use tracemg::{Method, SmootherKind};

use crate::CliError;

pub const HEADER: [&str; 8] = [
    "method", "k", "smoother", "nu1", "nu2", "omega", "rho", "source",
];
pub const MEASURE_EXTRA: [&str; 6] = ["n", "levels", "seeds", "rho_geo", "iterations", "status"];

/// Six significant digits, trailing zeros removed.
pub fn sig6(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..6).contains(&exp) {
        let fixed = format!("{:.*}", (5 - exp).max(0) as usize, x);
        trim_zeros(&fixed)
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Source {
    Lfa,
    MeasuredTg,
    MeasuredMg,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Source::Lfa => "lfa",
            Source::MeasuredTg => "measured-tg",
            Source::MeasuredMg => "measured-mg",
        })
    }
}

impl FromStr for Source {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "lfa" => Ok(Source::Lfa),
            "measured-tg" => Ok(Source::MeasuredTg),
            "measured-mg" => Ok(Source::MeasuredMg),
            _ => Err(CliError::Validation(format!("unknown source '{s}'"))),
        }
    }
}

/// Extra columns of a measured row.
#[derive(Debug, Clone, PartialEq)]
pub struct Measured {
    pub n: usize,
    pub levels: usize,
    pub seeds: Vec<u64>,
    pub rho_geo: f64,
    pub iterations: usize,
    pub status: Status,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Converged,
    Oscillating,
    Stalled,
    Diverged,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Converged => "converged",
            Status::Oscillating => "oscillating",
            Status::Stalled => "stalled",
            Status::Diverged => "diverged",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub method: Method,
    pub k: usize,
    pub smoother: SmootherKind,
    pub nu1: usize,
    pub nu2: usize,
    pub omega: f64,
    pub rho: f64,
    pub source: Source,
    pub measured: Option<Measured>,
}

impl Row {
    fn fields(&self) -> Vec<String> {
        let mut f = vec![
            self.method.to_string(),
            self.k.to_string(),
            self.smoother.to_string(),
            self.nu1.to_string(),
            self.nu2.to_string(),
            sig6(self.omega),
            sig6(self.rho),
            self.source.to_string(),
        ];
        if let Some(m) = &self.measured {
            let seeds: Vec<String> = m.seeds.iter().map(u64::to_string).collect();
            f.extend([
                m.n.to_string(),
                m.levels.to_string(),
                seeds.join(";"),
                sig6(m.rho_geo),
                m.iterations.to_string(),
                m.status.to_string(),
            ]);
        }
        f
    }
}

/// Write rows with a header. Measured rows carry the extra columns.
pub fn write_csv<W: Write>(w: W, rows: &[Row]) -> Result<(), CliError> {
    let mut out = csv::Writer::from_writer(w);
    let mut header: Vec<&str> = HEADER.to_vec();
    if rows.iter().any(|r| r.measured.is_some()) {
        header.extend(MEASURE_EXTRA);
    }
    out.write_record(&header).map_err(io_error)?;
    for r in rows {
        out.write_record(r.fields()).map_err(io_error)?;
    }
    out.flush()?;
    Ok(())
}

fn io_error(e: csv::Error) -> CliError {
    CliError::Io(e.to_string())
}

/// Key of a table cell.
pub type CellKey = (Method, usize, SmootherKind);

/// Damping per cell from `nu1 = 1, nu2 = 0` LFA rows of a CSV.
pub fn read_omegas<R: Read>(r: R) -> Result<BTreeMap<CellKey, f64>, CliError> {
    let mut reader = csv::Reader::from_reader(r);
    let headers = reader.headers().map_err(io_error)?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Validation(format!("CSV lacks column '{name}'")))
    };
    let (cm, ck, cs, c1, c2, cw, csrc) = (
        col("method")?,
        col("k")?,
        col("smoother")?,
        col("nu1")?,
        col("nu2")?,
        col("omega")?,
        col("source")?,
    );
    let mut out = BTreeMap::new();
    for rec in reader.records() {
        let rec = rec.map_err(io_error)?;
        let bad = || {
            CliError::Validation(format!(
                "malformed CSV row: {}",
                rec.iter().collect::<Vec<_>>().join(",")
            ))
        };
        if &rec[csrc] != "lfa" || &rec[c1] != "1" || &rec[c2] != "0" {
            continue;
        }
        let method: Method = rec[cm].parse().map_err(|_| bad())?;
        let k: usize = rec[ck].parse().map_err(|_| bad())?;
        let smoother: SmootherKind = rec[cs].parse().map_err(|_| bad())?;
        let omega: f64 = rec[cw].parse().map_err(|_| bad())?;
        out.insert((method, k, smoother), omega);
    }
    Ok(out)
}
