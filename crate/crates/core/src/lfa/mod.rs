//! Local Fourier analysis of the two-grid method.
//!
//! All symbols come from stencils read off periodic assemblies of the real
//! operators: the trace matrix, the smoother's `M^{-1}` (or the lower part of
//! the trace stencil for Gauss-Seidel) and the prolongation. Fourier modes
//! are `exp(i theta . x / h)` sampled at the positions of each subgrid.

pub mod oracle;
pub mod stencil;

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::discretization::{assemble_trace_system, default_penalty, PoissonProblem, TraceSystem};
use crate::error::{Error, Result};
use crate::linalg::{spectral_radius, CMatrix, LuFactor};
use crate::mesh::{BoundaryMode, DofKind, DofMap, MeshLevel, Method, SlotOrder};
use crate::smoothers::{Smoother, SmootherKind};
use crate::transfer::{build_transfer, galerkin_coarse};

pub use stencil::{
    component_label, extract_prolongation, extract_stencils, Offset2, ProlongationStencils,
    StencilSet,
};

/// Harmonic shifts `eta`; harmonic `eta` has frequency `theta + pi eta`.
pub const HARMONICS: [(i64, i64); 4] = [(0, 0), (1, 0), (0, 1), (1, 1)];

/// Fine periodic mesh used for operator and smoother stencils.
pub const STENCIL_MESH: usize = 8;

/// Frequency sampling and sweep counts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LfaConfig {
    /// Samples per direction.
    pub samples: usize,
    /// Distance of the sampled box from `±pi/2`.
    pub epsilon: f64,
    pub nu1: usize,
    pub nu2: usize,
}

impl Default for LfaConfig {
    fn default() -> Self {
        Self {
            samples: 32,
            epsilon: PI / 64.0,
            nu1: 1,
            nu2: 0,
        }
    }
}

impl LfaConfig {
    pub fn with_sweeps(nu1: usize, nu2: usize) -> Self {
        Self {
            nu1,
            nu2,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::InvalidArgument(
                "need at least one frequency sample".into(),
            ));
        }
        if !(self.epsilon > 0.0 && self.epsilon < PI / 2.0) {
            return Err(Error::InvalidArgument(format!(
                "epsilon must lie in (0, pi/2), got {}",
                self.epsilon
            )));
        }
        Ok(())
    }

    /// Sample coordinates along one axis.
    pub fn axis(&self) -> Vec<f64> {
        let (lo, hi) = (-PI / 2.0 + self.epsilon, PI / 2.0 - self.epsilon);
        if self.samples == 1 {
            return vec![0.5 * (lo + hi)];
        }
        let step = (hi - lo) / (self.samples - 1) as f64;
        (0..self.samples).map(|j| lo + j as f64 * step).collect()
    }

    /// Sampled frequencies, row-major with `theta_2` as the row.
    pub fn thetas(&self) -> Vec<[f64; 2]> {
        let axis = self.axis();
        axis.iter()
            .flat_map(|&t2| axis.iter().map(move |&t1| [t1, t2]))
            .collect()
    }
}

/// Smoother in symbol form.
#[derive(Debug, Clone, PartialEq)]
pub enum SmoothingStencil {
    /// Stencils of `M^{-1}` (Vanka, Jacobi).
    Inverse(StencilSet),
    /// Stencils of the lower part `L + D` of the operator (Gauss-Seidel).
    Lower(StencilSet),
}

/// Stencils describing one two-grid configuration.
#[derive(Debug, Clone)]
pub struct LfaModel {
    pub method: Method,
    pub degree: usize,
    pub smoother: SmootherKind,
    pub operator: StencilSet,
    pub smoothing: SmoothingStencil,
    pub prolongation: ProlongationStencils,
    /// Galerkin coarse operator, offsets in coarse half mesh widths.
    pub coarse: StencilSet,
}

fn periodic_system(n: usize, method: Method, k: usize, order: SlotOrder) -> Result<TraceSystem> {
    let dofs = DofMap::new(MeshLevel::new(n, BoundaryMode::Periodic)?, method, k, order)?;
    assemble_trace_system(&dofs, &PoissonProblem::homogeneous(), default_penalty(k))
}

/// Trace-operator stencils of a method on the default numbering.
pub fn operator_stencils(method: Method, k: usize) -> Result<StencilSet> {
    let sys = periodic_system(STENCIL_MESH, method, k, SlotOrder::default())?;
    extract_stencils(&sys.dofs, |v| sys.matrix.matvec(v))
}

/// Lower part of a stencil set: sources ordered at or before the target in
/// the global numbering, evaluated on the infinite lattice.
pub fn lower_part(dofs: &DofMap, s: &StencilSet) -> StencilSet {
    s.split(|a, b, (d1, d2)| {
        let (ka, sa) = dofs.component_kind(a);
        let (kb, sb) = dofs.component_kind(b);
        let (oa, ob) = (ka.half_offset(), kb.half_offset());
        let (q1, q2) = (oa.0 + d1 - ob.0, oa.1 + d2 - ob.1);
        dofs.order_key(kb, sb, q1.div_euclid(2), q2.div_euclid(2)) <= dofs.order_key(ka, sa, 0, 0)
    })
    .0
}

impl LfaModel {
    pub fn new(method: Method, k: usize, smoother: SmootherKind) -> Result<Self> {
        Self::with_order(method, k, smoother, SlotOrder::default())
    }

    pub fn with_order(
        method: Method,
        k: usize,
        smoother: SmootherKind,
        order: SlotOrder,
    ) -> Result<Self> {
        let sys = periodic_system(STENCIL_MESH, method, k, order)?;
        let operator = extract_stencils(&sys.dofs, |v| sys.matrix.matvec(v))?;
        let smoothing = match smoother {
            SmootherKind::GaussSeidel => SmoothingStencil::Lower(lower_part(&sys.dofs, &operator)),
            _ => {
                let sm = Smoother::new(&sys, smoother, 1.0)?;
                SmoothingStencil::Inverse(extract_stencils(&sys.dofs, |v| {
                    sm.apply_inverse(&sys.matrix, v)
                })?)
            }
        };
        let fine = periodic_system(2 * STENCIL_MESH, method, k, order)?;
        let transfer = build_transfer(&fine, &sys.dofs)?;
        let prolongation = extract_prolongation(&fine.dofs, &sys.dofs, |v| transfer.p.matvec(v))?;
        let coarse_sys = galerkin_coarse(&fine, &transfer, &sys.dofs)?;
        let coarse = extract_stencils(&coarse_sys.dofs, |v| coarse_sys.matrix.matvec(v))?;
        Ok(Self {
            method,
            degree: k,
            smoother,
            operator,
            smoothing,
            prolongation,
            coarse,
        })
    }

    /// Unknowns per cell.
    pub fn r(&self) -> usize {
        self.operator.nrows()
    }

    pub fn counts(&self) -> [usize; 4] {
        self.operator.row_counts()
    }

    /// `K~(theta)`.
    pub fn symbol(&self, theta: [f64; 2]) -> CMatrix {
        self.operator.symbol(theta)
    }

    /// `M~^{-1}(theta) K~(theta)`.
    pub fn preconditioned_symbol(&self, theta: [f64; 2]) -> Result<CMatrix> {
        let k = self.symbol(theta);
        match &self.smoothing {
            SmoothingStencil::Inverse(m) => Ok(m.symbol(theta).matmul(&k)),
            SmoothingStencil::Lower(l) => Ok(LuFactor::new(&l.symbol(theta))?.solve_matrix(&k)),
        }
    }

    /// `S~(theta, omega) = I - omega M~^{-1} K~`.
    pub fn smoother_symbol(&self, theta: [f64; 2], omega: f64) -> Result<CMatrix> {
        let mk = self.preconditioned_symbol(theta)?;
        Ok(CMatrix::identity(self.r()).sub(&mk.scale(Complex64::new(omega, 0.0))))
    }

    /// `P~(theta)`: `4r x r`, block `eta` maps coarse coefficients at `2 theta`
    /// to fine harmonic `theta + pi eta`.
    pub fn prolongation_symbol(&self, theta: [f64; 2]) -> CMatrix {
        let counts = self.prolongation.fine_counts();
        let (rf, rc) = (
            self.prolongation.parity[0].nrows(),
            self.prolongation.parity[0].ncols(),
        );
        let parity: Vec<CMatrix> = self
            .prolongation
            .parity
            .iter()
            .map(|s| s.symbol(theta))
            .collect();
        let mut out = CMatrix::zeros(4 * rf, rc);
        let mut comp_offset = Vec::with_capacity(rf);
        for kind in DofKind::ALL {
            for _ in 0..counts[kind.rank()] {
                comp_offset.push(kind.half_offset());
            }
        }
        for (h, &(e1, e2)) in HARMONICS.iter().enumerate() {
            for (a, &(o1, o2)) in comp_offset.iter().enumerate() {
                let phase = Complex64::from_polar(0.25, -0.5 * PI * (e1 * o1 + e2 * o2) as f64);
                for b in 0..rc {
                    let mut s = Complex64::new(0.0, 0.0);
                    for (p, m) in parity.iter().enumerate() {
                        let sign = if (e1 * (p as i64 % 2) + e2 * (p as i64 / 2)) % 2 == 0 {
                            1.0
                        } else {
                            -1.0
                        };
                        s += m[(a, b)] * sign;
                    }
                    out[(h * rf + a, b)] = phase * s;
                }
            }
        }
        out
    }

    /// `R~(theta) = 4 P~(theta)^H`, the symbol of `P^T` acting on the four
    /// fine harmonics.
    pub fn restriction_symbol(&self, theta: [f64; 2]) -> CMatrix {
        self.prolongation_symbol(theta)
            .adjoint()
            .scale(Complex64::new(4.0, 0.0))
    }

    /// Symbol of the extracted Galerkin coarse operator at coarse frequency `2 theta`.
    pub fn coarse_symbol(&self, theta: [f64; 2]) -> CMatrix {
        self.coarse.symbol([2.0 * theta[0], 2.0 * theta[1]])
    }

    /// Block-diagonal harmonic operator symbol `K^(theta)`.
    pub fn harmonic_symbol(&self, theta: [f64; 2]) -> CMatrix {
        block_diag(&harmonics(theta).map(|t| self.symbol(t)))
    }

    /// Per-frequency data independent of the damping.
    pub fn prepare(&self, theta: [f64; 2]) -> Result<HarmonicBlocks> {
        let r = self.r();
        let freqs = harmonics(theta);
        let mut k_blocks = Vec::with_capacity(4);
        let mut mk_blocks = Vec::with_capacity(4);
        for t in freqs {
            k_blocks.push(self.symbol(t));
            mk_blocks.push(self.preconditioned_symbol(t)?);
        }
        let khat = block_diag(&k_blocks);
        let p = self.prolongation_symbol(theta);
        let rk = self.restriction_symbol(theta).matmul(&khat);
        let kc = self.coarse_symbol(theta);
        let lu = LuFactor::new(&kc).map_err(|_| {
            Error::Numerical(format!(
                "coarse symbol singular at theta = ({:.6}, {:.6})",
                theta[0], theta[1]
            ))
        })?;
        let cgc = CMatrix::identity(4 * r).sub(&p.matmul(&lu.solve_matrix(&rk)));
        Ok(HarmonicBlocks {
            theta,
            mk: mk_blocks,
            cgc,
        })
    }

    /// Two-grid error symbol `S^nu2 (I - P K_H^{-1} R K) S^nu1` on the harmonic space.
    pub fn two_grid_symbol(
        &self,
        theta: [f64; 2],
        omega: f64,
        nu1: usize,
        nu2: usize,
    ) -> Result<CMatrix> {
        Ok(self.prepare(theta)?.two_grid(omega, nu1, nu2))
    }

    /// Sampled sup of the two-grid spectral radius.
    pub fn rho_asp(&self, cfg: &LfaConfig, omega: f64) -> Result<RhoAsp> {
        self.prepared(cfg)?.rho_asp(omega)
    }

    /// Precompute every sampled frequency.
    pub fn prepared(&self, cfg: &LfaConfig) -> Result<PreparedLfa> {
        cfg.validate()?;
        let blocks = cfg
            .thetas()
            .into_iter()
            .map(|t| self.prepare(t))
            .collect::<Result<Vec<_>>>()?;
        Ok(PreparedLfa {
            samples: cfg.samples,
            nu1: cfg.nu1,
            nu2: cfg.nu2,
            blocks,
        })
    }

    /// Brute-force search of the damping minimizing [`LfaModel::rho_asp`].
    pub fn optimize_omega(&self, cfg: &LfaConfig, range: OmegaRange) -> Result<OmegaOptimum> {
        self.prepared(cfg)?.optimize(range)
    }
}

/// The four harmonic frequencies of `theta`.
pub fn harmonics(theta: [f64; 2]) -> [[f64; 2]; 4] {
    HARMONICS.map(|(e1, e2)| [theta[0] + PI * e1 as f64, theta[1] + PI * e2 as f64])
}

fn block_diag(blocks: &[CMatrix]) -> CMatrix {
    let r = blocks[0].rows();
    let n = r * blocks.len();
    let mut out = CMatrix::zeros(n, n);
    for (h, b) in blocks.iter().enumerate() {
        for i in 0..r {
            for j in 0..r {
                out[(h * r + i, h * r + j)] = b[(i, j)];
            }
        }
    }
    out
}

/// Damping-independent pieces of the two-grid symbol at one frequency.
#[derive(Debug, Clone)]
pub struct HarmonicBlocks {
    pub theta: [f64; 2],
    /// `M~^{-1} K~` per harmonic.
    pub mk: Vec<CMatrix>,
    /// Coarse-grid correction `I - P~ K~_H^{-1} R~ K^`.
    pub cgc: CMatrix,
}

impl HarmonicBlocks {
    fn smoother_blocks(&self, omega: f64) -> Vec<CMatrix> {
        let w = Complex64::new(omega, 0.0);
        self.mk
            .iter()
            .map(|m| CMatrix::identity(m.rows()).sub(&m.scale(w)))
            .collect()
    }

    pub fn two_grid(&self, omega: f64, nu1: usize, nu2: usize) -> CMatrix {
        let s = self.smoother_blocks(omega);
        let mut e = self.cgc.clone();
        for _ in 0..nu1 {
            e = right_block_mul(&e, &s);
        }
        for _ in 0..nu2 {
            e = left_block_mul(&s, &e);
        }
        e
    }
}

/// `A * blockdiag(S)`.
fn right_block_mul(a: &CMatrix, s: &[CMatrix]) -> CMatrix {
    let r = s[0].rows();
    let n = a.rows();
    let mut out = CMatrix::zeros(n, a.cols());
    for i in 0..n {
        for (h, sb) in s.iter().enumerate() {
            for k in 0..r {
                let v = a[(i, h * r + k)];
                if v == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..r {
                    out[(i, h * r + j)] += v * sb[(k, j)];
                }
            }
        }
    }
    out
}

/// `blockdiag(S) * A`.
fn left_block_mul(s: &[CMatrix], a: &CMatrix) -> CMatrix {
    let r = s[0].rows();
    let mut out = CMatrix::zeros(a.rows(), a.cols());
    for (h, sb) in s.iter().enumerate() {
        for i in 0..r {
            for k in 0..r {
                let v = sb[(i, k)];
                if v == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..a.cols() {
                    let x = a[(h * r + k, j)];
                    out[(h * r + i, j)] += v * x;
                }
            }
        }
    }
    out
}

/// Sampled convergence factor and the frequency attaining it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhoAsp {
    pub rho: f64,
    pub theta: [f64; 2],
}

/// Grid of damping values `lo, lo + step, ..., hi`. The default grid uses
/// even hundredths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmegaRange {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl Default for OmegaRange {
    fn default() -> Self {
        Self {
            lo: 0.5,
            hi: 1.6,
            step: 0.02,
        }
    }
}

impl OmegaRange {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0) || !(self.lo > 0.0) || !(self.hi < 2.0) || self.lo > self.hi {
            return Err(Error::InvalidArgument(format!(
                "damping range must satisfy 0 < lo <= hi < 2 with step > 0, got [{}, {}] step {}",
                self.lo, self.hi, self.step
            )));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let n = ((self.hi - self.lo) / self.step + 1e-9).floor() as usize;
        (0..=n)
            .map(|i| round_to_step(self.lo + i as f64 * self.step, self.step))
            .collect()
    }
}

fn round_to_step(x: f64, step: f64) -> f64 {
    let digits = (-step.log10()).ceil().max(0.0) as i32 + 2;
    let f = 10f64.powi(digits);
    (x * f).round() / f
}

/// Result of the damping search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmegaOptimum {
    pub omega: f64,
    pub rho: f64,
    pub theta: [f64; 2],
}

/// Two-grid symbols prepared on every sampled frequency.
#[derive(Debug, Clone)]
pub struct PreparedLfa {
    samples: usize,
    pub nu1: usize,
    pub nu2: usize,
    pub blocks: Vec<HarmonicBlocks>,
}

impl PreparedLfa {
    /// Spectral radius at sample `i`.
    pub fn rho_at(&self, i: usize, omega: f64) -> Result<f64> {
        spectral_radius(&self.blocks[i].two_grid(omega, self.nu1, self.nu2))
    }

    /// Max over all samples; the first maximizer in scan order wins ties.
    pub fn rho_asp(&self, omega: f64) -> Result<RhoAsp> {
        let mut best = RhoAsp {
            rho: f64::NEG_INFINITY,
            theta: [0.0, 0.0],
        };
        for (i, b) in self.blocks.iter().enumerate() {
            let rho = self.rho_at(i, omega)?;
            if rho > best.rho {
                best = RhoAsp {
                    rho,
                    theta: b.theta,
                };
            }
        }
        Ok(best)
    }

    /// Spectral radius on every sample, row-major.
    pub fn rho_map(&self, omega: f64) -> Result<Vec<f64>> {
        (0..self.blocks.len())
            .map(|i| self.rho_at(i, omega))
            .collect()
    }

    /// Sample index of `-theta`. Real stencils make the spectral radius
    /// even in `theta`, so only one of each pair needs to be visited.
    fn mirror(&self, i: usize) -> usize {
        let s = self.samples;
        let (j1, j2) = (i % s, i / s);
        (s - 1 - j2) * s + (s - 1 - j1)
    }

    /// `max_theta rho`, abandoning the scan once a value reaches `bound`.
    fn rho_bounded(&self, omega: f64, first: usize, bound: f64) -> Result<(f64, usize)> {
        let mut best = (f64::NEG_INFINITY, first);
        let order = std::iter::once(first).chain((0..self.blocks.len()).filter(|&i| i != first));
        for i in order {
            let m = self.mirror(i);
            if m < i || m == first {
                continue;
            }
            let rho = self.rho_at(i, omega)?;
            if rho > best.0 {
                best = (rho, i);
                if rho >= bound {
                    break;
                }
            }
        }
        Ok(best)
    }

    /// Sampled curve `rho_asp(omega)`.
    pub fn rho_curve(&self, omegas: &[f64]) -> Result<Vec<f64>> {
        omegas
            .iter()
            .map(|&w| self.rho_bounded(w, 0, f64::INFINITY).map(|(r, _)| r))
            .collect()
    }

    /// Smallest damping on the grid attaining the minimal `rho_asp`.
    pub fn optimize(&self, range: OmegaRange) -> Result<OmegaOptimum> {
        range.validate()?;
        let mut best_rho = f64::INFINITY;
        let mut best_omega = range.lo;
        let mut hot = 0;
        for w in range.values() {
            let (rho, at) = self.rho_bounded(w, hot, best_rho)?;
            hot = at;
            if rho < best_rho {
                best_rho = rho;
                best_omega = w;
            }
        }
        let full = self.rho_asp(best_omega)?;
        Ok(OmegaOptimum {
            omega: best_omega,
            rho: full.rho,
            theta: full.theta,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smoothers::VankaFlavor;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn axis_is_symmetric_and_excludes_zero() {
        let cfg = LfaConfig::default();
        let a = cfg.axis();
        assert_eq!(a.len(), 32);
        assert!(close(a[0], -PI / 2.0 + PI / 64.0, 1e-15));
        for j in 0..32 {
            assert!(close(a[j], -a[31 - j], 1e-14));
            assert!(a[j].abs() > 1e-3);
        }
    }

    #[test]
    fn omega_grid() {
        let v = OmegaRange::default().values();
        assert_eq!(v.len(), 56);
        assert_eq!(v[0], 0.5);
        assert_eq!(v[23], 0.96);
        assert_eq!(v[55], 1.6);
        let fine = OmegaRange {
            step: 0.01,
            ..Default::default()
        }
        .values();
        assert_eq!(fine.len(), 111);
        assert_eq!(fine[46], 0.96);
        assert!(OmegaRange {
            lo: 0.5,
            hi: 2.5,
            step: 0.1
        }
        .validate()
        .is_err());
    }

    #[test]
    fn hdg_k1_symbol_at_zero_is_singular() {
        let s = operator_stencils(Method::Hdg, 1).unwrap();
        let k0 = s.symbol([0.0, 0.0]);
        assert!(close(k0[(0, 0)].re, 13.0 / 6.0, 1e-13));
        // constant facet vector is a null vector
        let ones = vec![Complex64::new(1.0, 0.0); 4];
        assert!(k0.matvec(&ones).iter().all(|v| v.norm() < 1e-12));
    }

    #[test]
    fn symbols_are_hermitian() {
        for method in Method::ALL {
            let s = operator_stencils(method, 2).unwrap();
            let k = s.symbol([0.3, -1.1]);
            assert!(k.sub(&k.adjoint()).max_abs() < 1e-12);
        }
    }

    #[test]
    fn zero_damping_gives_projection() {
        let m = LfaModel::new(Method::Cg, 1, SmootherKind::Jacobi).unwrap();
        let theta = [0.4, -0.9];
        let s = m.smoother_symbol(theta, 0.0).unwrap();
        assert!(s.sub(&CMatrix::identity(1)).max_abs() == 0.0);
        let e = m.two_grid_symbol(theta, 0.5, 0, 0).unwrap();
        assert!(e.matmul(&e).sub(&e).max_abs() < 1e-10);
        let rho = m
            .rho_asp(
                &LfaConfig {
                    samples: 8,
                    ..Default::default()
                },
                0.0,
            )
            .unwrap();
        assert!(close(rho.rho, 1.0, 1e-10));
    }

    #[test]
    fn galerkin_symbol_matches_coarse_stencils() {
        for method in Method::ALL {
            let m = LfaModel::new(method, 2, SmootherKind::Jacobi).unwrap();
            let theta = [0.7, -0.2];
            let galerkin = m
                .restriction_symbol(theta)
                .matmul(&m.harmonic_symbol(theta))
                .matmul(&m.prolongation_symbol(theta));
            let kc = m.coarse_symbol(theta);
            assert!(
                galerkin.sub(&kc).max_abs() < 1e-10 * kc.max_abs(),
                "{method}"
            );
        }
    }

    #[test]
    fn rho_is_even_in_theta() {
        let m = LfaModel::new(
            Method::Hdg,
            1,
            SmootherKind::Vanka(VankaFlavor::LtVertexWise),
        )
        .unwrap();
        for theta in [[0.3, 1.2], [-1.4, 0.05], [0.9, -0.6]] {
            let a = spectral_radius(&m.two_grid_symbol(theta, 1.1, 1, 0).unwrap()).unwrap();
            let b = spectral_radius(
                &m.two_grid_symbol([-theta[0], -theta[1]], 1.1, 1, 0)
                    .unwrap(),
            )
            .unwrap();
            assert!(close(a, b, 1e-10), "{a} vs {b}");
        }
    }

    #[test]
    fn cg_q1_jacobi_factor() {
        let m = LfaModel::new(Method::Cg, 1, SmootherKind::Jacobi).unwrap();
        let rho = m.rho_asp(&LfaConfig::default(), 0.89).unwrap();
        assert!(close(rho.rho, 0.333, 0.0015), "{}", rho.rho);
    }

    #[test]
    fn bounded_search_agrees_with_full_scan() {
        let m = LfaModel::new(
            Method::Edg,
            2,
            SmootherKind::Vanka(VankaFlavor::ElementWise),
        )
        .unwrap();
        let cfg = LfaConfig {
            samples: 10,
            ..Default::default()
        };
        let prep = m.prepared(&cfg).unwrap();
        let range = OmegaRange {
            lo: 0.8,
            hi: 1.1,
            step: 0.05,
        };
        let opt = prep.optimize(range).unwrap();
        let scan: Vec<f64> = range
            .values()
            .iter()
            .map(|&w| prep.rho_asp(w).unwrap().rho)
            .collect();
        let min = scan.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(close(opt.rho, min, 1e-12));
        assert!(scan.iter().all(|&r| opt.rho <= r + 1e-12));
    }
}
