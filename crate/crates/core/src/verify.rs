//! Property suites that cross-check the discretization, the smoothers, the
//! transfers and the Fourier analysis against independent oracles.
//!
//! Each suite returns a [`Check`] with the worst defect it saw and the
//! tolerance it was held to, so callers can print a one-line verdict.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::discretization::{
    assemble_block_system, assemble_trace_system, default_penalty, reconstruct_interior,
    PoissonProblem, TraceSystem,
};
use crate::error::Result;
use crate::lfa::oracle::{aliasing_defect, mode_defect, PeriodicPair};
use crate::lfa::{operator_stencils, LfaConfig, LfaModel, STENCIL_MESH};
use crate::linalg::{lu_solve, sparse_direct_solve, CMatrix};
use crate::mesh::{build_dof_map, BoundaryMode, DofMap, MeshLevel, Method};
use crate::multigrid::{MgConfig, MgHierarchy};
use crate::smoothers::{build_vanka_patches, SmootherKind, VankaFlavor};
use crate::transfer::{build_transfer, galerkin_coarse};

pub const DEGREES: [usize; 3] = [1, 2, 3];

/// Outcome of one property suite.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub worst: f64,
    pub tolerance: f64,
    pub cases: usize,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.worst.is_finite() && self.worst <= self.tolerance
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: worst {:.3e} (tol {:.0e}, {} cases)",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.worst,
            self.tolerance,
            self.cases
        )
    }
}

struct Tally {
    worst: f64,
    cases: usize,
}

impl Tally {
    fn new() -> Self {
        Self {
            worst: 0.0,
            cases: 0,
        }
    }

    fn add(&mut self, defect: f64) {
        self.cases += 1;
        if defect.is_nan() || defect > self.worst {
            self.worst = if defect.is_nan() {
                f64::INFINITY
            } else {
                defect
            };
        }
    }

    fn finish(self, name: &'static str, tolerance: f64) -> Check {
        Check {
            name,
            worst: self.worst,
            tolerance,
            cases: self.cases,
        }
    }
}

fn system(
    n: usize,
    boundary: BoundaryMode,
    method: Method,
    k: usize,
    problem: &PoissonProblem,
) -> Result<TraceSystem> {
    let dofs = build_dof_map(MeshLevel::new(n, boundary)?, method, k)?;
    assemble_trace_system(&dofs, problem, default_penalty(k))
}

fn random_complex(n: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    (0..n)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect()
}

fn random_real(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Every lattice frequency of a periodic 16² mesh, ten random coefficient
/// vectors each: `K Ψξ = Ψ(K̃ξ)`.
pub fn fourier_mode_oracle(seed: u64) -> Result<Check> {
    let n = 16;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = Tally::new();
    for method in Method::ALL {
        for k in DEGREES {
            let stencils = operator_stencils(method, k)?;
            let sys = system(
                n,
                BoundaryMode::Periodic,
                method,
                k,
                &PoissonProblem::homogeneous(),
            )?;
            for m2 in 0..n {
                for m1 in 0..n {
                    let theta = [
                        2.0 * PI * m1 as f64 / n as f64,
                        2.0 * PI * m2 as f64 / n as f64,
                    ];
                    for _ in 0..10 {
                        let xi = random_complex(sys.dofs.r(), &mut rng);
                        tally.add(mode_defect(&sys.dofs, &stencils, theta, &xi, |v| {
                            sys.matrix.matvec(v)
                        }));
                    }
                }
            }
        }
    }
    Ok(tally.finish("fourier-mode oracle", 1e-10))
}

/// `K̃(θ + 2πη) = D_η K̃(θ) D_η` at random frequencies.
pub fn aliasing_identity(seed: u64, samples: usize) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = Tally::new();
    let stencils: Vec<_> = Method::ALL
        .into_iter()
        .flat_map(|m| DEGREES.into_iter().map(move |k| (m, k)))
        .map(|(m, k)| operator_stencils(m, k))
        .collect::<Result<_>>()?;
    for _ in 0..samples {
        let theta = [rng.gen_range(-PI..PI), rng.gen_range(-PI..PI)];
        for s in &stencils {
            tally.add(aliasing_defect(s, theta));
        }
    }
    Ok(tally.finish("aliasing sign identity", 1e-12))
}

/// `vᵀ K_H v = (Pv)ᵀ K_h (Pv)` on a Dirichlet 8² → 4² pair, relative to `vᵀ K_H v`.
pub fn energy_identity(seed: u64, samples: usize) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = Tally::new();
    for method in Method::ALL {
        for k in DEGREES {
            let fine = system(
                8,
                BoundaryMode::Dirichlet,
                method,
                k,
                &PoissonProblem::homogeneous(),
            )?;
            let coarse_dofs = DofMap::new(
                fine.dofs.level().coarsen()?,
                method,
                k,
                fine.dofs.slot_order(),
            )?;
            let transfer = build_transfer(&fine, &coarse_dofs)?;
            let coarse = galerkin_coarse(&fine, &transfer, &coarse_dofs)?;
            for _ in 0..samples {
                let v = random_real(coarse.len(), &mut rng);
                let pv = transfer.p.matvec(&v);
                let coarse_energy = dot(&v, &coarse.matrix.matvec(&v));
                let fine_energy = dot(&pv, &fine.matrix.matvec(&pv));
                tally.add((coarse_energy - fine_energy).abs() / coarse_energy.abs().max(1.0));
            }
        }
    }
    Ok(tally.finish("prolongation energy identity", 1e-10))
}

/// The condensed trace solve and the full block solve agree on a 4² mesh,
/// both on the trace and on the recovered interior.
pub fn schur_equivalence() -> Result<Check> {
    let problem = PoissonProblem::manufactured_sine();
    let mut tally = Tally::new();
    for method in Method::ALL {
        for k in DEGREES {
            let sys = system(4, BoundaryMode::Dirichlet, method, k, &problem)?;
            let ubar = sparse_direct_solve(&sys.matrix, &sys.rhs)?;
            let block = assemble_block_system(&sys.dofs, &problem, default_penalty(k))?;
            let full = lu_solve(&block.matrix.to_dense(), &block.rhs)?;
            let scale = full.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
            let tail = &full[block.num_interior..];
            let mut worst = ubar
                .iter()
                .zip(tail)
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            if method != Method::Cg {
                let interior = reconstruct_interior(&ubar, &sys)?;
                worst = interior
                    .iter()
                    .flatten()
                    .zip(&full[..block.num_interior])
                    .fold(worst, |m, (a, b)| m.max((a - b).abs()));
            }
            tally.add(worst / scale);
        }
    }
    Ok(tally.finish("static condensation equivalence", 1e-10))
}

/// `Σ V_iᵀ W_i V_i = I` for every patch flavor, method and degree, on both
/// boundary modes.
pub fn partition_of_unity() -> Result<Check> {
    let flavors = [
        VankaFlavor::VertexWise,
        VankaFlavor::ElementWise,
        VankaFlavor::LtVertexWise,
        VankaFlavor::LtElementWise,
    ];
    let mut tally = Tally::new();
    for boundary in [BoundaryMode::Dirichlet, BoundaryMode::Periodic] {
        for method in Method::ALL {
            for k in DEGREES {
                let sys = system(4, boundary, method, k, &PoissonProblem::homogeneous())?;
                for flavor in flavors {
                    let sums = build_vanka_patches(&sys, flavor)?.weight_sums(sys.len());
                    tally.add(sums.iter().fold(0.0f64, |m, s| m.max((s - 1.0).abs())));
                }
            }
        }
    }
    Ok(tally.finish("vanka partition of unity", 1e-14))
}

fn idempotency_defect(e: &CMatrix) -> f64 {
    e.matmul(e).sub(e).max_abs() / e.max_abs().max(1.0)
}

/// Without smoothing the two-grid symbol is a projection at every sampled frequency.
pub fn symbol_projection(samples: usize) -> Result<Check> {
    let cfg = LfaConfig {
        samples,
        ..LfaConfig::default()
    };
    let mut tally = Tally::new();
    for method in Method::ALL {
        for k in DEGREES {
            let model = LfaModel::new(method, k, SmootherKind::Jacobi)?;
            for theta in cfg.thetas() {
                tally.add(idempotency_defect(
                    &model.two_grid_symbol(theta, 1.0, 0, 0)?,
                ));
            }
        }
    }
    Ok(tally.finish("coarse correction projection (symbol)", 1e-10))
}

/// The assembled two-grid error operator without smoothing is idempotent on
/// a Dirichlet 4² mesh.
pub fn operator_projection() -> Result<Check> {
    let mut tally = Tally::new();
    for method in Method::ALL {
        for k in DEGREES {
            let sys = system(
                4,
                BoundaryMode::Dirichlet,
                method,
                k,
                &PoissonProblem::homogeneous(),
            )?;
            let hier = MgHierarchy::new(sys, MgConfig::two_grid(SmootherKind::Jacobi, 1.0, 0, 0))?;
            let e = hier.error_operator()?.to_complex();
            tally.add(idempotency_defect(&e));
        }
    }
    Ok(tally.finish("coarse correction projection (4x4 mesh)", 1e-10))
}

/// Two-grid cycles on a periodic 16² → 8² pair applied to harmonic modes
/// reproduce the two-grid symbol.
pub fn two_grid_oracle(seed: u64) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = Tally::new();
    let n = 2 * STENCIL_MESH;
    let thetas = [
        [2.0 * PI * 2.0 / 16.0, -2.0 * PI * 3.0 / 16.0],
        [-2.0 * PI / 16.0, 2.0 * PI * 3.0 / 16.0],
    ];
    for method in Method::ALL {
        for k in [1, 2] {
            for kind in [
                SmootherKind::Vanka(VankaFlavor::VertexWise),
                SmootherKind::Vanka(VankaFlavor::LtElementWise),
            ] {
                let model = LfaModel::new(method, k, kind)?;
                let pair = PeriodicPair::new(&model, n, 0.9)?;
                for theta in thetas {
                    let xi = random_complex(4 * model.r(), &mut rng);
                    let xc = random_complex(model.r(), &mut rng);
                    tally.add(pair.prolongation_defect(&model, theta, &xc));
                    tally.add(pair.restriction_defect(&model, theta, &xi));
                    tally.add(pair.two_grid_defect(&model, theta, 0.9, 1, 1, &xi)?);
                }
            }
        }
    }
    Ok(tally.finish("finite two-level symbol oracle", 1e-8))
}

/// All suites with their default sample counts.
pub fn run_all(seed: u64) -> Result<Vec<Check>> {
    Ok(vec![
        fourier_mode_oracle(seed)?,
        aliasing_identity(seed, 20)?,
        energy_identity(seed, 20)?,
        schur_equivalence()?,
        partition_of_unity()?,
        symbol_projection(8)?,
        operator_projection()?,
        two_grid_oracle(seed)?,
    ])
}
