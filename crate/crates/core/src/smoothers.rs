//! Relaxation: additive Vanka (vertex and element patches, exact or
//! lower-triangular local solves), damped point Jacobi and damped forward
//! Gauss-Seidel. Every smoother has the form `x ← x + ω M^{-1} (b - K x)`.

use std::fmt;
use std::str::FromStr;

use crate::discretization::TraceSystem;
use crate::error::{Error, Result};
use crate::linalg::{lu::lower_solve, CsrMatrix, LuFactor, RMatrix};
use crate::mesh::{BoundaryMode, DofKind, DofMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VankaFlavor {
    VertexWise,
    ElementWise,
    LtVertexWise,
    LtElementWise,
}

impl VankaFlavor {
    pub fn is_lower_triangular(self) -> bool {
        matches!(self, VankaFlavor::LtVertexWise | VankaFlavor::LtElementWise)
    }

    pub fn is_vertex(self) -> bool {
        matches!(self, VankaFlavor::VertexWise | VankaFlavor::LtVertexWise)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SmootherKind {
    Vanka(VankaFlavor),
    Jacobi,
    GaussSeidel,
}

impl SmootherKind {
    /// Column order used by the reports.
    pub const ALL: [SmootherKind; 6] = [
        SmootherKind::Vanka(VankaFlavor::VertexWise),
        SmootherKind::Vanka(VankaFlavor::ElementWise),
        SmootherKind::Jacobi,
        SmootherKind::Vanka(VankaFlavor::LtVertexWise),
        SmootherKind::Vanka(VankaFlavor::LtElementWise),
        SmootherKind::GaussSeidel,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SmootherKind::Vanka(VankaFlavor::VertexWise) => "vw",
            SmootherKind::Vanka(VankaFlavor::ElementWise) => "ew",
            SmootherKind::Vanka(VankaFlavor::LtVertexWise) => "ltvw",
            SmootherKind::Vanka(VankaFlavor::LtElementWise) => "ltew",
            SmootherKind::Jacobi => "jac",
            SmootherKind::GaussSeidel => "gs",
        }
    }
}

impl fmt::Display for SmootherKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SmootherKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        Self::ALL
            .into_iter()
            .find(|k| k.name() == lower)
            .ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "unknown smoother '{s}' (vw, ew, jac, ltvw, ltew, gs)"
                ))
            })
    }
}

#[derive(Debug, Clone)]
enum LocalSolve {
    Lu(LuFactor<f64>),
    Lower(RMatrix),
}

#[derive(Debug, Clone)]
pub struct Patch {
    pub dofs: Vec<usize>,
    pub weights: Vec<f64>,
    solve: LocalSolve,
}

impl Patch {
    fn apply(&self, r: &[f64]) -> Vec<f64> {
        match &self.solve {
            LocalSolve::Lu(lu) => lu.solve(r),
            LocalSolve::Lower(l) => lower_solve(l, r),
        }
    }
}

#[derive(Debug, Clone)]
pub struct VankaPatchSet {
    pub flavor: VankaFlavor,
    pub patches: Vec<Patch>,
}

/// Unknowns of a patch with their unwrapped lattice coordinates.
type Members = Vec<(DofKind, usize, i64, i64)>;

fn vertex_members(dofs: &DofMap, v1: i64, v2: i64) -> Members {
    let c = dofs.counts();
    let mut m = Vec::new();
    let mut push_all = |kind: DofKind, a: i64, b: i64| {
        for s in 0..c[kind.rank()] {
            m.push((kind, s, a, b));
        }
    };
    push_all(DofKind::N, v1, v2);
    push_all(DofKind::X, v1 - 1, v2);
    push_all(DofKind::X, v1, v2);
    push_all(DofKind::Y, v1, v2 - 1);
    push_all(DofKind::Y, v1, v2);
    for (a, b) in [(v1 - 1, v2 - 1), (v1, v2 - 1), (v1 - 1, v2), (v1, v2)] {
        push_all(DofKind::C, a, b);
    }
    m
}

fn element_members(dofs: &DofMap, c1: i64, c2: i64) -> Members {
    let c = dofs.counts();
    let mut m = Vec::new();
    let mut push_all = |kind: DofKind, a: i64, b: i64| {
        for s in 0..c[kind.rank()] {
            m.push((kind, s, a, b));
        }
    };
    for (a, b) in [(c1, c2), (c1 + 1, c2), (c1, c2 + 1), (c1 + 1, c2 + 1)] {
        push_all(DofKind::N, a, b);
    }
    push_all(DofKind::X, c1, c2);
    push_all(DofKind::X, c1, c2 + 1);
    push_all(DofKind::Y, c1, c2);
    push_all(DofKind::Y, c1 + 1, c2);
    push_all(DofKind::C, c1, c2);
    m
}

/// Global indices of a patch, ordered by the translation-invariant order key
/// of their unwrapped coordinates; eliminated unknowns are dropped.
fn resolve(dofs: &DofMap, members: Members) -> Vec<usize> {
    let mut keyed: Vec<_> = members
        .into_iter()
        .filter_map(|(kind, s, a, b)| {
            dofs.dof(kind, s, a, b)
                .map(|g| (dofs.order_key(kind, s, a, b), g))
        })
        .collect();
    keyed.sort_unstable();
    let mut out: Vec<usize> = Vec::with_capacity(keyed.len());
    for (_, g) in keyed {
        if !out.contains(&g) {
            out.push(g);
        }
    }
    out
}

/// Index lists of all patches of a flavor, before weighting.
pub fn patch_index_sets(dofs: &DofMap, flavor: VankaFlavor) -> Vec<Vec<usize>> {
    let level = dofs.level();
    let n = level.n as i64;
    let upper = match (level.boundary, flavor.is_vertex()) {
        (BoundaryMode::Periodic, _) | (BoundaryMode::Dirichlet, false) => n,
        (BoundaryMode::Dirichlet, true) => n + 1,
    };
    let mut sets = Vec::new();
    for b in 0..upper {
        for a in 0..upper {
            let members = if flavor.is_vertex() {
                vertex_members(dofs, a, b)
            } else {
                element_members(dofs, a, b)
            };
            let set = resolve(dofs, members);
            if !set.is_empty() {
                sets.push(set);
            }
        }
    }
    sets
}

pub fn build_vanka_patches(system: &TraceSystem, flavor: VankaFlavor) -> Result<VankaPatchSet> {
    let sets = patch_index_sets(&system.dofs, flavor);
    let mut multiplicity = vec![0usize; system.len()];
    for s in &sets {
        for &g in s {
            multiplicity[g] += 1;
        }
    }
    if let Some(g) = multiplicity.iter().position(|&m| m == 0) {
        return Err(Error::Numerical(format!(
            "unknown {g} is not covered by any patch"
        )));
    }
    let mut patches = Vec::with_capacity(sets.len());
    for dofs in sets {
        let local = system.matrix.select_dense(&dofs, &dofs);
        let solve = if flavor.is_lower_triangular() {
            if (0..local.rows()).any(|i| local[(i, i)] == 0.0) {
                return Err(Error::Singular {
                    step: 0,
                    pivot: 0.0,
                });
            }
            LocalSolve::Lower(local)
        } else {
            LocalSolve::Lu(LuFactor::new(&local)?)
        };
        let weights = dofs.iter().map(|&g| 1.0 / multiplicity[g] as f64).collect();
        patches.push(Patch {
            dofs,
            weights,
            solve,
        });
    }
    Ok(VankaPatchSet { flavor, patches })
}

impl VankaPatchSet {
    /// `Σ V_i^T W_i K_i^{-1} V_i r`, patches taken in the given order.
    pub fn apply_in_order(&self, r: &[f64], order: impl Iterator<Item = usize>) -> Vec<f64> {
        let mut z = vec![0.0; r.len()];
        let mut local = Vec::new();
        for p in order {
            let patch = &self.patches[p];
            local.clear();
            local.extend(patch.dofs.iter().map(|&g| r[g]));
            let y = patch.apply(&local);
            for ((&g, &w), yi) in patch.dofs.iter().zip(&patch.weights).zip(y) {
                z[g] += w * yi;
            }
        }
        z
    }

    pub fn apply(&self, r: &[f64]) -> Vec<f64> {
        self.apply_in_order(r, 0..self.patches.len())
    }

    /// `Σ_i V_i^T W_i V_i` as a per-unknown sum.
    pub fn weight_sums(&self, ndof: usize) -> Vec<f64> {
        let mut s = vec![0.0; ndof];
        for p in &self.patches {
            for (&g, &w) in p.dofs.iter().zip(&p.weights) {
                s[g] += w;
            }
        }
        s
    }
}

/// A relaxation operator bound to one level.
#[derive(Debug, Clone)]
pub struct Smoother {
    pub kind: SmootherKind,
    pub omega: f64,
    vanka: Option<VankaPatchSet>,
    diag: Vec<f64>,
}

impl Smoother {
    pub fn new(system: &TraceSystem, kind: SmootherKind, omega: f64) -> Result<Self> {
        if !omega.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "damping must be finite, got {omega}"
            )));
        }
        let diag = system.matrix.diagonal();
        if matches!(kind, SmootherKind::Jacobi | SmootherKind::GaussSeidel) {
            if let Some(i) = diag.iter().position(|&d| d == 0.0) {
                return Err(Error::Singular {
                    step: i,
                    pivot: 0.0,
                });
            }
        }
        let vanka = match kind {
            SmootherKind::Vanka(flavor) => Some(build_vanka_patches(system, flavor)?),
            _ => None,
        };
        Ok(Self {
            kind,
            omega,
            vanka,
            diag,
        })
    }

    pub fn patches(&self) -> Option<&VankaPatchSet> {
        self.vanka.as_ref()
    }

    pub fn with_omega(&self, omega: f64) -> Self {
        Self {
            omega,
            ..self.clone()
        }
    }

    /// `M^{-1} r`.
    pub fn apply_inverse(&self, k: &CsrMatrix, r: &[f64]) -> Vec<f64> {
        match self.kind {
            SmootherKind::Vanka(_) => self.vanka.as_ref().expect("patches built").apply(r),
            SmootherKind::Jacobi => r.iter().zip(&self.diag).map(|(ri, d)| ri / d).collect(),
            SmootherKind::GaussSeidel => {
                let mut z = r.to_vec();
                for i in 0..z.len() {
                    let (cols, vals) = k.row(i);
                    let mut s = z[i];
                    for (&j, &v) in cols.iter().zip(vals) {
                        if j >= i {
                            break;
                        }
                        s -= v * z[j];
                    }
                    z[i] = s / self.diag[i];
                }
                z
            }
        }
    }

    /// One sweep `x + ω M^{-1} (b - K x)`.
    pub fn apply_sweep(&self, k: &CsrMatrix, x: &[f64], b: &[f64]) -> Result<Vec<f64>> {
        if x.len() != k.nrows() || b.len() != k.nrows() {
            return Err(Error::DimensionMismatch {
                expected: k.nrows(),
                actual: x.len().min(b.len()),
            });
        }
        Ok(self.sweep(k, x, b))
    }

    pub(crate) fn sweep(&self, k: &CsrMatrix, x: &[f64], b: &[f64]) -> Vec<f64> {
        let r = k.residual(x, b);
        let z = self.apply_inverse(k, &r);
        x.iter()
            .zip(z)
            .map(|(xi, zi)| xi + self.omega * zi)
            .collect()
    }

    /// Dense `S = I - ω M^{-1} K`, formed column by column.
    pub fn error_propagation_matrix(&self, k: &CsrMatrix) -> Result<RMatrix> {
        let n = k.nrows();
        if n > MAX_DENSE {
            return Err(Error::InvalidArgument(format!(
                "dense operator of dimension {n} exceeds {MAX_DENSE}"
            )));
        }
        let zero = vec![0.0; n];
        let mut s = RMatrix::zeros(n, n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            let col = self.sweep(k, &e, &zero);
            for i in 0..n {
                s[(i, j)] = col[i];
            }
            e[j] = 0.0;
        }
        Ok(s)
    }
}

/// Largest system for which dense operators are formed.
pub const MAX_DENSE: usize = 5000;
