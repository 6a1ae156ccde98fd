//! Interior-penalty HDG/EDG and continuous Galerkin discretizations of
//! `-Δu = f` with homogeneous Dirichlet data, element-wise static
//! condensation, and assembly of the trace system `K ū = f`.
//!
//! Element-local numbering: the interior basis index is `j (k + 1) + i` for
//! the tensor equispaced node `(i, j)`; facet unknowns are grouped by face
//! (bottom, top, left, right) with nodes in increasing coordinate order.

use std::fmt;
use std::io::{self, Write};
use std::sync::Arc;

use crate::basis::{gauss_legendre, Lagrange1d};
use crate::error::{Error, Result};
use crate::linalg::{CsrMatrix, LuFactor, RMatrix, TripletBuilder};
use crate::mesh::{DofMap, Method};

/// Default interior penalty `α = 6 k²`.
pub fn default_penalty(k: usize) -> f64 {
    6.0 * (k * k) as f64
}

type Field = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// `-Δu = f` on the unit square with `u = 0` on the boundary.
#[derive(Clone)]
pub struct PoissonProblem {
    source: Option<Field>,
    exact: Option<Field>,
}

impl fmt::Debug for PoissonProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PoissonProblem")
            .field("homogeneous", &self.source.is_none())
            .field("has_exact", &self.exact.is_some())
            .finish()
    }
}

impl PoissonProblem {
    /// `f = 0`.
    pub fn homogeneous() -> Self {
        Self {
            source: None,
            exact: None,
        }
    }

    pub fn new(source: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            source: Some(Arc::new(source)),
            exact: None,
        }
    }

    pub fn with_exact(mut self, exact: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        self.exact = Some(Arc::new(exact));
        self
    }

    /// `u = sin(πx) sin(πy)`, `f = 2π² u`.
    pub fn manufactured_sine() -> Self {
        use std::f64::consts::PI;
        Self::new(|x, y| 2.0 * PI * PI * (PI * x).sin() * (PI * y).sin())
            .with_exact(|x, y| (PI * x).sin() * (PI * y).sin())
    }

    pub fn is_homogeneous(&self) -> bool {
        self.source.is_none()
    }

    pub fn source(&self, x: f64, y: f64) -> f64 {
        self.source.as_ref().map_or(0.0, |f| f(x, y))
    }

    pub fn exact(&self, x: f64, y: f64) -> Option<f64> {
        self.exact.as_ref().map(|u| u(x, y))
    }
}

/// Blocks of the element bilinear form: `a` interior-interior, `b`
/// facet (test) by interior (trial), `c` facet-facet.
#[derive(Debug, Clone)]
pub struct ElementMatrices {
    pub a: RMatrix,
    pub b: RMatrix,
    pub c: RMatrix,
}

impl ElementMatrices {
    /// `C - B A^{-1} B^T`.
    pub fn condensed(&self) -> Result<RMatrix> {
        let lu = LuFactor::new(&self.a).map_err(|_| Error::SingularElement(0, 0))?;
        Ok(self
            .c
            .sub(&self.b.matmul(&lu.solve_matrix(&self.b.transpose()))))
    }
}

/// Tabulated 1D basis data on `[0, 1]` for an element of width `h`.
struct Tables {
    n1: usize,
    weights: Vec<f64>,
    /// `phi[q][i]`
    phi: Vec<Vec<f64>>,
    /// physical derivative `dphi[q][i]`
    dphi: Vec<Vec<f64>>,
    /// values and physical derivatives at `t = 0` and `t = 1`
    end_val: [Vec<f64>; 2],
    end_der: [Vec<f64>; 2],
}

impl Tables {
    fn new(k: usize, h: f64, npts: usize) -> Self {
        let basis = Lagrange1d::equispaced(k);
        let (pts, weights) = gauss_legendre(npts);
        let phi = pts.iter().map(|&t| basis.eval(t)).collect();
        let dphi = pts
            .iter()
            .map(|&t| basis.deriv(t).into_iter().map(|d| d / h).collect())
            .collect();
        let scaled = |t: f64| {
            basis
                .deriv(t)
                .into_iter()
                .map(|d| d / h)
                .collect::<Vec<_>>()
        };
        Self {
            n1: k + 1,
            weights,
            phi,
            dphi,
            end_val: [basis.eval(0.0), basis.eval(1.0)],
            end_der: [scaled(0.0), scaled(1.0)],
        }
    }

    /// 1D mass and stiffness matrices on an interval of length `h`.
    fn mass_stiffness(&self, h: f64) -> (RMatrix, RMatrix) {
        let n1 = self.n1;
        let mut m = RMatrix::zeros(n1, n1);
        let mut s = RMatrix::zeros(n1, n1);
        for (q, &w) in self.weights.iter().enumerate() {
            for i in 0..n1 {
                for j in 0..n1 {
                    m[(i, j)] += h * w * self.phi[q][i] * self.phi[q][j];
                    s[(i, j)] += h * w * self.dphi[q][i] * self.dphi[q][j];
                }
            }
        }
        (m, s)
    }
}

/// `S ⊗ M + M ⊗ S` on the tensor basis, index `j n1 + i`.
fn tensor_laplacian(m: &RMatrix, s: &RMatrix) -> RMatrix {
    let n1 = m.rows();
    RMatrix::from_fn(n1 * n1, n1 * n1, |a, b| {
        let (ia, ja, ib, jb) = (a % n1, a / n1, b % n1, b / n1);
        s[(ia, ib)] * m[(ja, jb)] + m[(ia, ib)] * s[(ja, jb)]
    })
}

/// Element matrices of the interior-penalty form
/// `(∇w,∇v) + ⟨α/h (w-w̄), v-v̄⟩ - ⟨w-w̄, ∇v·n⟩ - ⟨v-v̄, ∇w·n⟩` on a square of side `h`.
pub fn local_bilinear(method: Method, k: usize, h: f64, alpha: f64) -> Result<ElementMatrices> {
    if method == Method::Cg {
        return Err(Error::InvalidArgument(
            "CG has no facet unknowns; use element_stiffness".into(),
        ));
    }
    if k < 1 {
        return Err(Error::InvalidArgument(format!(
            "polynomial degree must be >= 1, got {k}"
        )));
    }
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "mesh width must be positive, got {h}"
        )));
    }
    if !(alpha > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "penalty must be positive, got {alpha}"
        )));
    }
    let t = Tables::new(k, h, k + 2);
    let n1 = t.n1;
    let ni = n1 * n1;
    let nf = 4 * n1;
    let tau = alpha / h;
    let (m1, s1) = t.mass_stiffness(h);
    let mut a = tensor_laplacian(&m1, &s1);
    let mut b = RMatrix::zeros(nf, ni);
    let mut c = RMatrix::zeros(nf, nf);
    let nq = t.weights.len();
    let mut u = vec![vec![0.0; nq]; ni];
    let mut dn = vec![vec![0.0; nq]; ni];
    for face in 0..4 {
        // side: 0 -> coordinate 0, 1 -> coordinate 1; outward normal sign accordingly
        let side = face % 2;
        let sign = if side == 0 { -1.0 } else { 1.0 };
        let horizontal = face < 2;
        for ia in 0..n1 {
            for ja in 0..n1 {
                let idx = ja * n1 + ia;
                for q in 0..nq {
                    if horizontal {
                        u[idx][q] = t.phi[q][ia] * t.end_val[side][ja];
                        dn[idx][q] = sign * t.phi[q][ia] * t.end_der[side][ja];
                    } else {
                        u[idx][q] = t.end_val[side][ia] * t.phi[q][ja];
                        dn[idx][q] = sign * t.end_der[side][ia] * t.phi[q][ja];
                    }
                }
            }
        }
        let ww: Vec<f64> = t.weights.iter().map(|w| w * h).collect();
        for p in 0..ni {
            for r in 0..ni {
                let mut s = 0.0;
                for q in 0..nq {
                    s +=
                        ww[q] * (tau * u[p][q] * u[r][q] - u[p][q] * dn[r][q] - dn[p][q] * u[r][q]);
                }
                a[(p, r)] += s;
            }
        }
        for i in 0..n1 {
            let row = face * n1 + i;
            for p in 0..ni {
                let mut s = 0.0;
                for q in 0..nq {
                    s += ww[q] * t.phi[q][i] * (dn[p][q] - tau * u[p][q]);
                }
                b[(row, p)] = s;
            }
            for j in 0..n1 {
                let s: f64 = (0..nq).map(|q| ww[q] * t.phi[q][i] * t.phi[q][j]).sum();
                c[(row, face * n1 + j)] = tau * s;
            }
        }
    }
    Ok(ElementMatrices { a, b, c })
}

/// `Q^k` stiffness matrix of a square of side `h` on the tensor equispaced nodal basis.
pub fn element_stiffness(k: usize, h: f64) -> Result<RMatrix> {
    if k < 1 || !(h > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "invalid element (k = {k}, h = {h})"
        )));
    }
    let t = Tables::new(k, h, k + 2);
    let (m, s) = t.mass_stiffness(h);
    Ok(tensor_laplacian(&m, &s))
}

/// `∫_K f φ_a` on cell `(c1, c2)` for every interior basis function.
pub fn element_load(problem: &PoissonProblem, k: usize, h: f64, c1: usize, c2: usize) -> Vec<f64> {
    let n1 = k + 1;
    let mut out = vec![0.0; n1 * n1];
    if problem.is_homogeneous() {
        return out;
    }
    let t = Tables::new(k, h, k + 3);
    let pts = gauss_legendre(k + 3).0;
    let (x0, y0) = (c1 as f64 * h, c2 as f64 * h);
    for (qy, &wy) in t.weights.iter().enumerate() {
        for (qx, &wx) in t.weights.iter().enumerate() {
            let fv = problem.source(x0 + pts[qx] * h, y0 + pts[qy] * h) * wx * wy * h * h;
            for j in 0..n1 {
                for i in 0..n1 {
                    out[j * n1 + i] += fv * t.phi[qx][i] * t.phi[qy][j];
                }
            }
        }
    }
    out
}

/// Per-element data needed to recover interior unknowns from a trace.
#[derive(Debug, Clone)]
pub struct LocalSolver {
    pub elem: ElementMatrices,
    a_lu: LuFactor<f64>,
    loads: Vec<Vec<f64>>,
}

impl LocalSolver {
    /// `A^{-1} (G1 - B^T ū)` for one cell given its local trace.
    pub fn interior(&self, cell: usize, local_trace: &[f64]) -> Vec<f64> {
        let bt = self.elem.b.transpose();
        let mut rhs = bt.matvec(local_trace);
        for (r, g) in rhs.iter_mut().zip(&self.loads[cell]) {
            *r = g - *r;
        }
        self.a_lu.solve(&rhs)
    }
}

/// Condensed system over a [`DofMap`].
#[derive(Debug, Clone)]
pub struct TraceSystem {
    pub dofs: DofMap,
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    pub penalty: f64,
    local: Option<Arc<LocalSolver>>,
}

impl TraceSystem {
    /// Wrap an operator (for example a Galerkin coarse operator) with zero right-hand side.
    pub fn from_matrix(dofs: DofMap, matrix: CsrMatrix, penalty: f64) -> Result<Self> {
        if matrix.nrows() != dofs.len() || matrix.ncols() != dofs.len() {
            return Err(Error::DimensionMismatch {
                expected: dofs.len(),
                actual: matrix.nrows(),
            });
        }
        let rhs = vec![0.0; dofs.len()];
        Ok(Self {
            dofs,
            matrix,
            rhs,
            penalty,
            local: None,
        })
    }

    pub fn len(&self) -> usize {
        self.dofs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dofs.is_empty()
    }

    pub fn method(&self) -> Method {
        self.dofs.method()
    }

    pub fn degree(&self) -> usize {
        self.dofs.degree()
    }

    pub fn local_solver(&self) -> Option<&LocalSolver> {
        self.local.as_deref()
    }

    pub fn write_matrix_market<W: Write>(&self, w: W) -> io::Result<()> {
        self.matrix.write_matrix_market(w, true)
    }
}

fn gather(map: &[Option<usize>], x: &[f64]) -> Vec<f64> {
    map.iter().map(|d| d.map_or(0.0, |i| x[i])).collect()
}

/// Element-local operator scattered by [`DofMap::element_dofs`]: the
/// condensed facet matrix for HDG/EDG, the stiffness matrix for CG.
pub fn local_operator(method: Method, k: usize, h: f64, alpha: f64) -> Result<RMatrix> {
    match method {
        Method::Cg => element_stiffness(k, h),
        _ => local_bilinear(method, k, h, alpha)?.condensed(),
    }
}

/// Assemble `K ū = f` element by element.
pub fn assemble_trace_system(
    dofs: &DofMap,
    problem: &PoissonProblem,
    alpha: f64,
) -> Result<TraceSystem> {
    let level = *dofs.level();
    let (k, h, n) = (dofs.degree(), level.h, level.n);
    let method = dofs.method();
    let ndof = dofs.len();
    let (kloc, local) = match method {
        Method::Cg => (element_stiffness(k, h)?, None),
        _ => {
            let elem = local_bilinear(method, k, h, alpha)?;
            let a_lu = LuFactor::new(&elem.a).map_err(|_| Error::SingularElement(0, 0))?;
            let kloc = elem
                .c
                .sub(&elem.b.matmul(&a_lu.solve_matrix(&elem.b.transpose())));
            let loads = (0..n * n)
                .map(|c| element_load(problem, k, h, c % n, c / n))
                .collect();
            (kloc, Some(Arc::new(LocalSolver { elem, a_lu, loads })))
        }
    };
    let m = kloc.rows();
    let mut builder = TripletBuilder::with_capacity(ndof, ndof, n * n * m * m);
    let mut rhs = vec![0.0; ndof];
    for c2 in 0..n {
        for c1 in 0..n {
            let map = dofs.element_dofs(c1, c2);
            for (p, dp) in map.iter().enumerate() {
                let Some(i) = *dp else { continue };
                for (q, dq) in map.iter().enumerate() {
                    if let Some(j) = *dq {
                        let v = kloc[(p, q)];
                        if v != 0.0 {
                            builder.push(i, j, v);
                        }
                    }
                }
            }
            if problem.is_homogeneous() {
                continue;
            }
            let floc = match &local {
                None => element_load(problem, k, h, c1, c2),
                Some(ls) => {
                    let z = ls.a_lu.solve(&ls.loads[c2 * n + c1]);
                    ls.elem.b.matvec(&z).into_iter().map(|v| -v).collect()
                }
            };
            for (dp, v) in map.iter().zip(floc) {
                if let Some(i) = *dp {
                    rhs[i] += v;
                }
            }
        }
    }
    Ok(TraceSystem {
        dofs: dofs.clone(),
        matrix: builder.build(),
        rhs,
        penalty: alpha,
        local,
    })
}

/// Interior coefficients per cell (index `c2 n + c1`), each on the tensor
/// basis. For CG these are the nodal values gathered from `trace`.
pub fn reconstruct_interior(trace: &[f64], system: &TraceSystem) -> Result<Vec<Vec<f64>>> {
    if trace.len() != system.len() {
        return Err(Error::DimensionMismatch {
            expected: system.len(),
            actual: trace.len(),
        });
    }
    let n = system.dofs.level().n;
    let mut out = Vec::with_capacity(n * n);
    for c2 in 0..n {
        for c1 in 0..n {
            let local = gather(&system.dofs.element_dofs(c1, c2), trace);
            out.push(match system.local_solver() {
                None => local,
                Some(ls) => ls.interior(c2 * n + c1, &local),
            });
        }
    }
    Ok(out)
}

/// Broken `L2` error of a cell-wise tensor field against the exact solution.
pub fn l2_error(system: &TraceSystem, cells: &[Vec<f64>], problem: &PoissonProblem) -> Result<f64> {
    let level = system.dofs.level();
    let (n, h, k) = (level.n, level.h, system.degree());
    if cells.len() != n * n {
        return Err(Error::DimensionMismatch {
            expected: n * n,
            actual: cells.len(),
        });
    }
    let t = Tables::new(k, h, k + 4);
    let pts = gauss_legendre(k + 4).0;
    let n1 = k + 1;
    let mut err = 0.0;
    for c2 in 0..n {
        for c1 in 0..n {
            let coef = &cells[c2 * n + c1];
            for (qy, &wy) in t.weights.iter().enumerate() {
                for (qx, &wx) in t.weights.iter().enumerate() {
                    let mut uh = 0.0;
                    for j in 0..n1 {
                        for i in 0..n1 {
                            uh += coef[j * n1 + i] * t.phi[qx][i] * t.phi[qy][j];
                        }
                    }
                    let (x, y) = ((c1 as f64 + pts[qx]) * h, (c2 as f64 + pts[qy]) * h);
                    let u = problem.exact(x, y).ok_or_else(|| {
                        Error::InvalidArgument("problem has no exact solution".into())
                    })?;
                    err += wx * wy * h * h * (u - uh) * (u - uh);
                }
            }
        }
    }
    Ok(err.sqrt())
}

/// Uncondensed system with interior unknowns first (cell-major, `(k + 1)²`
/// per cell) followed by the trace unknowns. For CG it is the trace system.
#[derive(Debug, Clone)]
pub struct BlockSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    pub num_interior: usize,
}

pub fn assemble_block_system(
    dofs: &DofMap,
    problem: &PoissonProblem,
    alpha: f64,
) -> Result<BlockSystem> {
    let level = *dofs.level();
    let (k, h, n) = (dofs.degree(), level.h, level.n);
    if dofs.method() == Method::Cg {
        let sys = assemble_trace_system(dofs, problem, alpha)?;
        return Ok(BlockSystem {
            matrix: sys.matrix,
            rhs: sys.rhs,
            num_interior: 0,
        });
    }
    let elem = local_bilinear(dofs.method(), k, h, alpha)?;
    let ni = (k + 1) * (k + 1);
    let nint = n * n * ni;
    let total = nint + dofs.len();
    let mut builder = TripletBuilder::new(total, total);
    let mut rhs = vec![0.0; total];
    for c2 in 0..n {
        for c1 in 0..n {
            let base = (c2 * n + c1) * ni;
            let map = dofs.element_dofs(c1, c2);
            for p in 0..ni {
                for q in 0..ni {
                    builder.push(base + p, base + q, elem.a[(p, q)]);
                }
            }
            for (f, df) in map.iter().enumerate() {
                let Some(g) = *df else { continue };
                for p in 0..ni {
                    builder.push(nint + g, base + p, elem.b[(f, p)]);
                    builder.push(base + p, nint + g, elem.b[(f, p)]);
                }
                for (f2, df2) in map.iter().enumerate() {
                    if let Some(g2) = *df2 {
                        builder.push(nint + g, nint + g2, elem.c[(f, f2)]);
                    }
                }
            }
            for (p, v) in element_load(problem, k, h, c1, c2).into_iter().enumerate() {
                rhs[base + p] = v;
            }
        }
    }
    Ok(BlockSystem {
        matrix: builder.build(),
        rhs,
        num_interior: nint,
    })
}
