use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use tracemg_cli::config::{Damping, Settings};
use tracemg_cli::report::{self, CellKey};
use tracemg_cli::{runs, CliError};

#[derive(Parser)]
#[command(
    name = "tracemg",
    version,
    about = "Multigrid and local Fourier analysis for trace discretizations of the Poisson problem"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimal damping and LFA two-grid factor for one pre-sweep.
    Table1(Flags),
    /// LFA two-grid factors for several sweep counts at the table1 dampings.
    Table2(Flags),
    /// Measured two-grid and multigrid convergence factors.
    Measure(Flags),
    /// Write operator stencils as `<alpha> <beta> <2*k1> <2*k2> <value>` lines.
    StencilDump(Flags),
    /// LFA two-grid factor over a damping grid.
    SweepOmega(Flags),
    /// Run the built-in consistency checks.
    Verify(Flags),
}

#[derive(Args, Default)]
struct Flags {
    /// cg, edg or hdg
    #[arg(long)]
    method: Option<String>,
    /// Polynomial degree 1..=3
    #[arg(long, short = 'k')]
    degree: Option<String>,
    /// vw, ew, jac, ltvw, ltew or gs
    #[arg(long)]
    smoother: Option<String>,
    #[arg(long)]
    nu1: Option<String>,
    #[arg(long)]
    nu2: Option<String>,
    /// A value, or lo:hi[:step] for a search grid
    #[arg(long, allow_hyphen_values = true)]
    omega: Option<String>,
    /// Mesh sizes, comma separated
    #[arg(long)]
    n: Option<String>,
    /// Level counts, comma separated
    #[arg(long)]
    levels: Option<String>,
    /// V, W or F
    #[arg(long)]
    cycle: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Number of consecutive seeds averaged per measurement
    #[arg(long)]
    seeds: Option<String>,
    /// Frequency samples per axis
    #[arg(long)]
    samples: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// `key = value` settings file; flags take precedence
    #[arg(long)]
    config: Option<PathBuf>,
    /// Include the largest mesh in mesh-size studies
    #[arg(long)]
    large: bool,
    /// CSV from a previous table1 run
    #[arg(long)]
    table1: Option<PathBuf>,
    /// smoothers or mesh-sizes
    #[arg(long)]
    preset: Option<String>,
    /// trace, minv, lower, coarse, prolongation, identity or matrix
    #[arg(long)]
    operator: Option<String>,
}

impl Flags {
    fn settings(&self) -> Result<Settings, CliError> {
        let mut map = BTreeMap::new();
        let text = [
            ("method", &self.method),
            ("degree", &self.degree),
            ("smoother", &self.smoother),
            ("nu1", &self.nu1),
            ("nu2", &self.nu2),
            ("omega", &self.omega),
            ("n", &self.n),
            ("levels", &self.levels),
            ("cycle", &self.cycle),
            ("seed", &self.seed),
            ("seeds", &self.seeds),
            ("samples", &self.samples),
            ("preset", &self.preset),
            ("operator", &self.operator),
        ];
        for (key, value) in text {
            if let Some(v) = value {
                map.insert(key.to_string(), v.clone());
            }
        }
        for (key, value) in [("out", &self.out), ("table1", &self.table1)] {
            if let Some(p) = value {
                map.insert(key.to_string(), p.display().to_string());
            }
        }
        if self.large {
            map.insert("large".into(), "true".into());
        }
        Settings::layered(self.config.as_deref(), &map)
    }
}

fn output(s: &Settings) -> Result<Box<dyn Write>, CliError> {
    Ok(match &s.out {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn load_omegas(path: &Path) -> Result<BTreeMap<CellKey, f64>, CliError> {
    let file = File::open(path).map_err(|e| {
        CliError::Validation(format!(
            "cannot read {}: {e}; run `tracemg table1 --out {}` first",
            path.display(),
            path.display()
        ))
    })?;
    report::read_omegas(file)
}

fn run(command: Command) -> Result<bool, CliError> {
    match command {
        Command::Table1(f) => {
            let s = f.settings()?;
            report::write_csv(output(&s)?, &runs::table1(&s)?)?;
        }
        Command::Table2(f) => {
            let s = f.settings()?;
            let omegas = match s.omega {
                Some(Damping::Fixed(_)) => BTreeMap::new(),
                _ => load_omegas(s.table1.as_deref().unwrap_or(Path::new("table1.csv")))?,
            };
            report::write_csv(output(&s)?, &runs::table2(&s, &omegas)?)?;
        }
        Command::Measure(f) => {
            let s = f.settings()?;
            let omegas = match &s.table1 {
                Some(p) => load_omegas(p)?,
                None => BTreeMap::new(),
            };
            report::write_csv(output(&s)?, &runs::measure(&s, &omegas)?)?;
        }
        Command::StencilDump(f) => {
            let s = f.settings()?;
            let mut w = output(&s)?;
            runs::stencil_dump(&s, &mut w)?;
            w.flush()?;
        }
        Command::SweepOmega(f) => {
            let s = f.settings()?;
            report::write_csv(output(&s)?, &runs::sweep_omega(&s)?)?;
        }
        Command::Verify(f) => {
            let s = f.settings()?;
            let checks = runs::verify(&s)?;
            let mut w = output(&s)?;
            for c in &checks {
                writeln!(w, "{c}")?;
            }
            w.flush()?;
            return Ok(checks.iter().all(|c| c.passed()));
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
