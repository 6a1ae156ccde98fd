//! Runners behind the subcommands. Each returns rows in a fixed order.

use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;

use tracemg::discretization::{assemble_trace_system, default_penalty, PoissonProblem};
use tracemg::lfa::{self, LfaConfig, LfaModel, OmegaRange, SmoothingStencil, StencilSet};
use tracemg::mesh::{build_dof_map, BoundaryMode, DofMap, MeshLevel};
use tracemg::multigrid::{measure_rho, ConvergenceReport, MeasureOptions};
use tracemg::verify::Check;
use tracemg::{CycleType, Method, MgConfig, MgHierarchy, SmootherKind, VankaFlavor};

use crate::config::{Damping, DumpOperator, Preset, Settings};
use crate::report::{CellKey, Measured, Row, Source, Status};
use crate::CliError;

/// Damping used for single-vertex Jacobi on `Q1`, where vertex patches,
/// their lower-triangular variant and point Jacobi coincide.
pub const Q1_JACOBI_OMEGA: f64 = 0.89;

/// Smoothers reported with several sweep counts.
pub const SWEEP_SMOOTHERS: [SmootherKind; 4] = [
    SmootherKind::GaussSeidel,
    SmootherKind::Vanka(VankaFlavor::VertexWise),
    SmootherKind::Vanka(VankaFlavor::ElementWise),
    SmootherKind::Vanka(VankaFlavor::LtElementWise),
];

pub const SWEEPS: [(usize, usize); 3] = [(1, 1), (1, 2), (2, 2)];

/// Mesh sizes of the mesh-independence study; 256 only with `--large`.
pub const MESH_SIZES: [usize; 3] = [32, 64, 128];

/// Method rows: CG, EDG and HDG per degree, with EDG omitted at `k = 1`
/// where it coincides with CG.
pub fn method_rows(s: &Settings) -> Vec<(Method, usize)> {
    let mut out = Vec::new();
    for k in 1..=3 {
        if s.degree.is_some_and(|d| d != k) {
            continue;
        }
        for m in [Method::Cg, Method::Edg, Method::Hdg] {
            if s.method.is_some_and(|x| x != m) {
                continue;
            }
            if m == Method::Edg && k == 1 && s.method != Some(Method::Edg) {
                continue;
            }
            out.push((m, k));
        }
    }
    out
}

fn cells(s: &Settings, smoothers: &[SmootherKind]) -> Vec<CellKey> {
    method_rows(s)
        .into_iter()
        .flat_map(|(m, k)| smoothers.iter().map(move |&sm| (m, k, sm)))
        .filter(|&(_, _, sm)| s.smoother.is_none_or(|x| x == sm))
        .collect()
}

/// The damping fixed in advance for a cell, if any.
pub fn fixed_omega(method: Method, k: usize, smoother: SmootherKind) -> Option<f64> {
    let jacobi_like = matches!(
        smoother,
        SmootherKind::Jacobi
            | SmootherKind::Vanka(VankaFlavor::VertexWise)
            | SmootherKind::Vanka(VankaFlavor::LtVertexWise)
    );
    (k == 1 && method != Method::Hdg && jacobi_like).then_some(Q1_JACOBI_OMEGA)
}

fn lfa_config(s: &Settings, nu1: usize, nu2: usize) -> LfaConfig {
    LfaConfig {
        samples: s.samples,
        nu1,
        nu2,
        ..LfaConfig::default()
    }
}

/// Damping and `rho_asp` for one cell: the fixed damping if the settings or
/// the cell prescribe one, otherwise the optimum over the grid.
pub fn lfa_cell(s: &Settings, cell: CellKey, nu1: usize, nu2: usize) -> Result<Row, CliError> {
    let (method, k, smoother) = cell;
    let model = LfaModel::new(method, k, smoother)?;
    let prepared = model.prepared(&lfa_config(s, nu1, nu2))?;
    let (omega, rho) = match (s.omega, fixed_omega(method, k, smoother)) {
        (Some(Damping::Fixed(w)), _) => (w, prepared.rho_asp(w)?.rho),
        (Some(Damping::Range(r)), _) => {
            let o = prepared.optimize(r)?;
            (o.omega, o.rho)
        }
        (None, Some(w)) => (w, prepared.rho_asp(w)?.rho),
        (None, None) => {
            let o = prepared.optimize(OmegaRange::default())?;
            (o.omega, o.rho)
        }
    };
    Ok(Row {
        method,
        k,
        smoother,
        nu1,
        nu2,
        omega,
        rho,
        source: Source::Lfa,
        measured: None,
    })
}

/// Optimal damping and `rho_asp` with one pre-sweep for every selected cell.
pub fn table1(s: &Settings) -> Result<Vec<Row>, CliError> {
    let (nu1, nu2) = (s.nu1.unwrap_or(1), s.nu2.unwrap_or(0));
    cells(s, &SmootherKind::ALL)
        .into_par_iter()
        .map(|c| lfa_cell(s, c, nu1, nu2))
        .collect()
}

/// `rho_asp` for several sweep counts at the dampings of a `table1` run.
pub fn table2(s: &Settings, omegas: &BTreeMap<CellKey, f64>) -> Result<Vec<Row>, CliError> {
    let sweeps: Vec<(usize, usize)> = match (s.nu1, s.nu2) {
        (None, None) => SWEEPS.to_vec(),
        (a, b) => vec![(a.unwrap_or(1), b.unwrap_or(0))],
    };
    let selected = cells(s, &SWEEP_SMOOTHERS);
    let mut jobs = Vec::new();
    for cell in selected {
        let omega = match s.omega {
            Some(Damping::Fixed(w)) => w,
            Some(Damping::Range(_)) => {
                return Err(CliError::Validation("table2 takes a single damping value, not a range".into()))
            }
            None => *omegas.get(&cell).ok_or_else(|| {
                CliError::Validation(format!(
                    "no damping for {} k={} {} in the table1 results; run `tracemg table1 --out <file>` \
                     and pass it with --table1 <file>",
                    cell.0, cell.1, cell.2
                ))
            })?,
        };
        jobs.push((cell, omega));
    }
    let rows: Vec<Vec<Row>> = jobs
        .into_par_iter()
        .map(|((method, k, smoother), omega)| {
            let model = LfaModel::new(method, k, smoother)?;
            sweeps
                .iter()
                .map(|&(nu1, nu2)| {
                    let rho = model
                        .prepared(&lfa_config(s, nu1, nu2))?
                        .rho_asp(omega)?
                        .rho;
                    Ok(Row {
                        method,
                        k,
                        smoother,
                        nu1,
                        nu2,
                        omega,
                        rho,
                        source: Source::Lfa,
                        measured: None,
                    })
                })
                .collect::<Result<Vec<_>, CliError>>()
        })
        .collect::<Result<_, _>>()?;
    Ok(rows.into_iter().flatten().collect())
}

/// `rho_asp` along a damping grid for one cell.
pub fn sweep_omega(s: &Settings) -> Result<Vec<Row>, CliError> {
    let (method, k, smoother) = single_cell(s)?;
    let range = match s.omega {
        Some(Damping::Range(r)) => r,
        Some(Damping::Fixed(w)) => OmegaRange {
            lo: w,
            hi: w,
            step: 1.0,
        },
        None => OmegaRange::default(),
    };
    let (nu1, nu2) = (s.nu1.unwrap_or(1), s.nu2.unwrap_or(0));
    let prepared = LfaModel::new(method, k, smoother)?.prepared(&lfa_config(s, nu1, nu2))?;
    let omegas = range.values();
    let rhos = prepared.rho_curve(&omegas)?;
    Ok(omegas
        .into_iter()
        .zip(rhos)
        .map(|(omega, rho)| Row {
            method,
            k,
            smoother,
            nu1,
            nu2,
            omega,
            rho,
            source: Source::Lfa,
            measured: None,
        })
        .collect())
}

fn single_cell(s: &Settings) -> Result<CellKey, CliError> {
    let need = |what: &str| CliError::Validation(format!("--{what} is required"));
    Ok((
        s.method.ok_or_else(|| need("method"))?,
        s.degree.ok_or_else(|| need("degree"))?,
        s.smoother.ok_or_else(|| need("smoother"))?,
    ))
}

/// One measured configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasureJob {
    pub cell: CellKey,
    pub omega: f64,
    pub n: usize,
    pub levels: usize,
    pub nu1: usize,
    pub nu2: usize,
    pub cycle: CycleType,
}

fn status_of(reports: &[ConvergenceReport]) -> Status {
    if reports.iter().any(|r| r.diverged) {
        Status::Diverged
    } else if reports.iter().any(|r| r.oscillating) {
        Status::Oscillating
    } else if reports.iter().all(|r| r.converged) {
        Status::Converged
    } else {
        Status::Stalled
    }
}

/// Seed-averaged measured factors of one configuration.
pub fn measure_job(job: &MeasureJob, seeds: &[u64]) -> Result<Row, CliError> {
    let (method, k, smoother) = job.cell;
    let dofs = build_dof_map(MeshLevel::new(job.n, BoundaryMode::Dirichlet)?, method, k)?;
    let sys = assemble_trace_system(&dofs, &PoissonProblem::homogeneous(), default_penalty(k))?;
    let config = MgConfig {
        smoother,
        omega: job.omega,
        nu1: job.nu1,
        nu2: job.nu2,
        cycle: job.cycle,
        levels: job.levels,
    };
    let hier = MgHierarchy::new(sys, config)?;
    let opts = MeasureOptions::default();
    let reports: Vec<ConvergenceReport> = seeds
        .iter()
        .map(|&seed| measure_rho(&hier, seed, &opts))
        .collect::<Result<_, _>>()?;
    let mean = |f: fn(&ConvergenceReport) -> f64| {
        reports.iter().map(f).sum::<f64>() / reports.len() as f64
    };
    Ok(Row {
        method,
        k,
        smoother,
        nu1: job.nu1,
        nu2: job.nu2,
        omega: job.omega,
        rho: mean(|r| r.rho_last),
        source: if job.levels == 2 {
            Source::MeasuredTg
        } else {
            Source::MeasuredMg
        },
        measured: Some(Measured {
            n: job.n,
            levels: job.levels,
            seeds: seeds.to_vec(),
            rho_geo: mean(|r| r.rho_geo),
            iterations: reports.iter().map(|r| r.iterations).max().unwrap_or(0),
            status: status_of(&reports),
        }),
    })
}

/// Configurations selected by the settings; dampings come from `--omega`,
/// then from `omegas`, then from a fresh LFA search.
pub fn measure_jobs(
    s: &Settings,
    omegas: &BTreeMap<CellKey, f64>,
) -> Result<Vec<MeasureJob>, CliError> {
    let selected: Vec<CellKey> = match s.preset {
        Preset::Smoothers => cells(s, &SmootherKind::ALL),
        Preset::MeshSizes => method_rows(s)
            .into_iter()
            .map(|(m, k)| {
                let flavor = if m == Method::Hdg {
                    VankaFlavor::VertexWise
                } else {
                    VankaFlavor::ElementWise
                };
                (m, k, SmootherKind::Vanka(flavor))
            })
            .filter(|&(_, _, sm)| s.smoother.is_none_or(|x| x == sm))
            .collect(),
    };
    let sizes = s.n.clone().unwrap_or_else(|| match s.preset {
        Preset::Smoothers => vec![64],
        Preset::MeshSizes => {
            let mut v = MESH_SIZES.to_vec();
            if s.large {
                v.push(256);
            }
            v
        }
    });
    let levels = s.levels.clone().unwrap_or_else(|| vec![2, 5]);
    let (nu1, nu2) = (s.nu1.unwrap_or(1), s.nu2.unwrap_or(0));
    let resolved: Vec<(CellKey, f64)> = selected
        .into_par_iter()
        .map(|cell| {
            let omega = match s.omega {
                Some(Damping::Fixed(w)) => w,
                _ => match omegas.get(&cell) {
                    Some(&w) => w,
                    None => lfa_cell(s, cell, 1, 0)?.omega,
                },
            };
            Ok((cell, omega))
        })
        .collect::<Result<_, CliError>>()?;
    let mut jobs = Vec::new();
    for (cell, omega) in resolved {
        for &n in &sizes {
            for &l in &levels {
                if n >> (l - 1) < 1 {
                    return Err(CliError::Validation(format!(
                        "{l} levels do not fit a {n}x{n} mesh"
                    )));
                }
                jobs.push(MeasureJob {
                    cell,
                    omega,
                    n,
                    levels: l,
                    nu1,
                    nu2,
                    cycle: s.cycle,
                });
            }
        }
    }
    Ok(jobs)
}

pub fn seeds(s: &Settings) -> Vec<u64> {
    (0..s.seeds as u64).map(|i| s.seed + i).collect()
}

pub fn measure(s: &Settings, omegas: &BTreeMap<CellKey, f64>) -> Result<Vec<Row>, CliError> {
    let seeds = seeds(s);
    measure_jobs(s, omegas)?
        .par_iter()
        .map(|job| measure_job(job, &seeds))
        .collect()
}

/// Stencil set of the requested operator on the periodic stencil mesh.
pub fn stencils(
    s: &Settings,
    operator: DumpOperator,
) -> Result<Vec<(String, StencilSet)>, CliError> {
    let method = s.method.unwrap_or(Method::Hdg);
    let k = s.degree.unwrap_or(1);
    let smoother = s
        .smoother
        .unwrap_or(SmootherKind::Vanka(VankaFlavor::VertexWise));
    let out = match operator {
        DumpOperator::Trace => vec![(String::new(), lfa::operator_stencils(method, k)?)],
        DumpOperator::Identity => {
            let level = MeshLevel::new(lfa::STENCIL_MESH, BoundaryMode::Periodic)?;
            let dofs = DofMap::new(level, method, k, Default::default())?;
            vec![(String::new(), StencilSet::identity(dofs.counts()))]
        }
        DumpOperator::SmootherInverse | DumpOperator::Lower => {
            let kind = if operator == DumpOperator::Lower {
                SmootherKind::GaussSeidel
            } else {
                smoother
            };
            match LfaModel::new(method, k, kind)?.smoothing {
                SmoothingStencil::Inverse(st) | SmoothingStencil::Lower(st) => {
                    vec![(String::new(), st)]
                }
            }
        }
        DumpOperator::Coarse => vec![(String::new(), LfaModel::new(method, k, smoother)?.coarse)],
        DumpOperator::Prolongation => {
            let p = LfaModel::new(method, k, smoother)?.prolongation;
            p.parity
                .into_iter()
                .enumerate()
                .map(|(i, st)| (format!("parity {} {}", i % 2, i / 2), st))
                .collect()
        }
        DumpOperator::Matrix => {
            return Err(CliError::Validation(
                "the assembled matrix has no stencil form".into(),
            ));
        }
    };
    Ok(out)
}

/// Write the stencil dump, or the assembled matrix for `operator = matrix`.
pub fn stencil_dump<W: Write>(s: &Settings, mut w: W) -> Result<(), CliError> {
    if s.operator == DumpOperator::Matrix {
        let method = s.method.unwrap_or(Method::Hdg);
        let k = s.degree.unwrap_or(1);
        let n = s.n.as_ref().map_or(4, |v| v[0]);
        let dofs = build_dof_map(MeshLevel::new(n, BoundaryMode::Dirichlet)?, method, k)?;
        let sys = assemble_trace_system(&dofs, &PoissonProblem::homogeneous(), default_penalty(k))?;
        sys.write_matrix_market(&mut w)?;
        return Ok(());
    }
    for (title, st) in stencils(s, s.operator)? {
        if !title.is_empty() {
            writeln!(w, "# {title}")?;
        }
        st.write_dump(&mut w)?;
    }
    Ok(())
}

pub fn verify(s: &Settings) -> Result<Vec<Check>, CliError> {
    Ok(tracemg::verify::run_all(s.seed)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_rows_skip_duplicate_edg() {
        let rows = method_rows(&Settings::default());
        assert_eq!(rows.len(), 8);
        assert_eq!(rows[0], (Method::Cg, 1));
        assert_eq!(rows[1], (Method::Hdg, 1));
        let only = Settings {
            method: Some(Method::Edg),
            degree: Some(1),
            ..Settings::default()
        };
        assert_eq!(method_rows(&only), vec![(Method::Edg, 1)]);
    }

    #[test]
    fn fixed_damping_cells() {
        assert_eq!(
            fixed_omega(Method::Cg, 1, SmootherKind::Jacobi),
            Some(Q1_JACOBI_OMEGA)
        );
        assert_eq!(
            fixed_omega(Method::Cg, 1, SmootherKind::Vanka(VankaFlavor::ElementWise)),
            None
        );
        assert_eq!(fixed_omega(Method::Hdg, 1, SmootherKind::Jacobi), None);
        assert_eq!(fixed_omega(Method::Cg, 2, SmootherKind::Jacobi), None);
    }

    #[test]
    fn q1_jacobi_cell() {
        let s = Settings {
            method: Some(Method::Cg),
            degree: Some(1),
            smoother: Some(SmootherKind::Jacobi),
            ..Settings::default()
        };
        let rows = table1(&s).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].omega, 0.89);
        assert!((rows[0].rho - 0.333).abs() < 0.005, "{}", rows[0].rho);
    }

    #[test]
    fn zero_damping_gives_unit_factor() {
        let s = Settings {
            method: Some(Method::Cg),
            degree: Some(2),
            omega: Some(Damping::Fixed(0.0)),
            samples: 4,
            ..Settings::default()
        };
        for row in table1(&s).unwrap() {
            assert!((row.rho - 1.0).abs() < 1e-10, "{row:?}");
        }
    }

    #[test]
    fn no_sweeps_give_projection() {
        let s = Settings {
            method: Some(Method::Hdg),
            degree: Some(1),
            smoother: Some(SmootherKind::Vanka(VankaFlavor::VertexWise)),
            nu1: Some(0),
            nu2: Some(0),
            omega: Some(Damping::Fixed(0.96)),
            samples: 4,
            ..Settings::default()
        };
        let rows = table2(&s, &BTreeMap::new()).unwrap();
        assert_eq!(rows.len(), 1);
        assert!((rows[0].rho - 1.0).abs() < 1e-10);
    }

    #[test]
    fn table2_requires_dampings() {
        let s = Settings {
            method: Some(Method::Cg),
            degree: Some(1),
            ..Settings::default()
        };
        assert!(matches!(
            table2(&s, &BTreeMap::new()),
            Err(CliError::Validation(_))
        ));
    }

    #[test]
    fn identity_dump_is_delta() {
        let s = Settings {
            method: Some(Method::Cg),
            degree: Some(2),
            operator: DumpOperator::Identity,
            ..Settings::default()
        };
        let mut buf = Vec::new();
        stencil_dump(&s, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "N1 N1 0 0 1\nX1 X1 0 0 1\nY1 Y1 0 0 1\nC1 C1 0 0 1\n");
    }

    #[test]
    fn zero_initial_guess_converges_immediately() {
        let job = MeasureJob {
            cell: (Method::Cg, 1, SmootherKind::Jacobi),
            omega: 0.89,
            n: 8,
            levels: 2,
            nu1: 1,
            nu2: 0,
            cycle: CycleType::V,
        };
        let row = measure_job(&job, &[0]).unwrap();
        assert!(row.rho < 0.4);
        let dofs = build_dof_map(
            MeshLevel::new(8, BoundaryMode::Dirichlet).unwrap(),
            Method::Cg,
            1,
        )
        .unwrap();
        let sys = assemble_trace_system(&dofs, &PoissonProblem::homogeneous(), default_penalty(1))
            .unwrap();
        let hier =
            MgHierarchy::new(sys, MgConfig::two_grid(SmootherKind::Jacobi, 0.89, 1, 0)).unwrap();
        let r = tracemg::multigrid::measure_from(
            &hier,
            vec![0.0; hier.finest().len()],
            &MeasureOptions::default(),
        )
        .unwrap();
        assert_eq!(r.iterations, 0);
    }
}
