//! Finite-grid Fourier-mode checks of the symbols.
//!
//! On a periodic mesh of `n` cells, frequencies `2 pi m / n` give exactly
//! periodic modes, so a translation-invariant operator applied to a sampled
//! mode must return the mode multiplied by its symbol.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{harmonics, LfaModel, StencilSet, HARMONICS};
use crate::discretization::{assemble_trace_system, default_penalty, PoissonProblem};
use crate::error::{Error, Result};
use crate::mesh::{BoundaryMode, DofMap, MeshLevel, SlotOrder};
use crate::smoothers::{Smoother, SmootherKind};
use crate::transfer::build_transfer;

/// `Psi xi`: component `c` of `xi` times `exp(i theta . x / h)` at every unknown.
pub fn fourier_mode(dofs: &DofMap, theta: [f64; 2], xi: &[Complex64]) -> Vec<Complex64> {
    (0..dofs.len())
        .map(|i| {
            let (p1, p2) = dofs.position2(i);
            xi[dofs.component_of(i)]
                * Complex64::from_polar(1.0, 0.5 * (theta[0] * p1 as f64 + theta[1] * p2 as f64))
        })
        .collect()
}

/// Sum of the four harmonic modes of `theta`; `xi` has length `4 r`.
pub fn harmonic_mode(dofs: &DofMap, theta: [f64; 2], xi: &[Complex64]) -> Vec<Complex64> {
    let r = dofs.r();
    let mut out = vec![Complex64::new(0.0, 0.0); dofs.len()];
    for (h, t) in harmonics(theta).into_iter().enumerate() {
        for (o, v) in out
            .iter_mut()
            .zip(fourier_mode(dofs, t, &xi[h * r..(h + 1) * r]))
        {
            *o += v;
        }
    }
    out
}

/// Apply a real operator to a complex vector.
pub fn apply_complex(mut apply: impl FnMut(&[f64]) -> Vec<f64>, v: &[Complex64]) -> Vec<Complex64> {
    let re: Vec<f64> = v.iter().map(|z| z.re).collect();
    let im: Vec<f64> = v.iter().map(|z| z.im).collect();
    apply(&re)
        .into_iter()
        .zip(apply(&im))
        .map(|(a, b)| Complex64::new(a, b))
        .collect()
}

/// Frequencies `2 pi (m1, m2) / n` inside the low box `[-pi/2, pi/2)^2`, excluding zero.
pub fn low_lattice_frequencies(n: usize) -> Vec<[f64; 2]> {
    let q = n as i64 / 4;
    let mut out = Vec::new();
    for m2 in -q..q {
        for m1 in -q..q {
            if m1 == 0 && m2 == 0 {
                continue;
            }
            out.push([
                2.0 * PI * m1 as f64 / n as f64,
                2.0 * PI * m2 as f64 / n as f64,
            ]);
        }
    }
    out
}

fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).norm()))
}

fn max_abs(a: &[Complex64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.norm()))
}

/// `max |A Psi xi - Psi (S~ xi)|`, relative to `max |Psi (S~ xi)|` (or 1).
pub fn mode_defect(
    dofs: &DofMap,
    stencils: &StencilSet,
    theta: [f64; 2],
    xi: &[Complex64],
    apply: impl FnMut(&[f64]) -> Vec<f64>,
) -> f64 {
    let lhs = apply_complex(apply, &fourier_mode(dofs, theta, xi));
    let rhs = fourier_mode(dofs, theta, &stencils.symbol(theta).matvec(xi));
    max_diff(&lhs, &rhs) / max_abs(&rhs).max(1.0)
}

/// Finite two-level pair on a periodic `n -> n/2` mesh matching a model.
pub struct PeriodicPair {
    pub fine: crate::discretization::TraceSystem,
    pub coarse: DofMap,
    pub transfer: crate::transfer::LevelTransfer,
    pub smoother: Option<Smoother>,
}

impl PeriodicPair {
    pub fn new(model: &LfaModel, n: usize, omega: f64) -> Result<Self> {
        let (method, k) = (model.method, model.degree);
        let fine_dofs = DofMap::new(
            MeshLevel::new(n, BoundaryMode::Periodic)?,
            method,
            k,
            SlotOrder::default(),
        )?;
        let fine = assemble_trace_system(
            &fine_dofs,
            &PoissonProblem::homogeneous(),
            default_penalty(k),
        )?;
        let coarse = DofMap::new(
            MeshLevel::new(n / 2, BoundaryMode::Periodic)?,
            method,
            k,
            SlotOrder::default(),
        )?;
        let transfer = build_transfer(&fine, &coarse)?;
        let smoother = match model.smoother {
            SmootherKind::GaussSeidel => None,
            kind => Some(Smoother::new(&fine, kind, omega)?),
        };
        Ok(Self {
            fine,
            coarse,
            transfer,
            smoother,
        })
    }

    /// `max |P Psi_H xi - sum_eta Psi_eta (P~_eta xi)|` for coarse modes at `2 theta`.
    pub fn prolongation_defect(&self, model: &LfaModel, theta: [f64; 2], xi: &[Complex64]) -> f64 {
        let coarse_mode = fourier_mode(&self.coarse, [2.0 * theta[0], 2.0 * theta[1]], xi);
        let lhs = apply_complex(|v| self.transfer.p.matvec(v), &coarse_mode);
        let rhs = harmonic_mode(
            &self.fine.dofs,
            theta,
            &model.prolongation_symbol(theta).matvec(xi),
        );
        max_diff(&lhs, &rhs) / max_abs(&rhs).max(1.0)
    }

    /// Same for the restriction applied to a sum of fine harmonics.
    pub fn restriction_defect(&self, model: &LfaModel, theta: [f64; 2], xi: &[Complex64]) -> f64 {
        let lhs = apply_complex(
            |v| self.transfer.r.matvec(v),
            &harmonic_mode(&self.fine.dofs, theta, xi),
        );
        let rhs = fourier_mode(
            &self.coarse,
            [2.0 * theta[0], 2.0 * theta[1]],
            &model.restriction_symbol(theta).matvec(xi),
        );
        max_diff(&lhs, &rhs) / max_abs(&rhs).max(1.0)
    }

    /// Finite two-grid cycle applied to a harmonic mode, compared with the
    /// two-grid symbol. The coarse solve acts on the exact coarse mode.
    pub fn two_grid_defect(
        &self,
        model: &LfaModel,
        theta: [f64; 2],
        omega: f64,
        nu1: usize,
        nu2: usize,
        xi: &[Complex64],
    ) -> Result<f64> {
        let sm = self
            .smoother
            .as_ref()
            .ok_or_else(|| {
                Error::InvalidArgument("lexicographic sweeps are not translation invariant".into())
            })?
            .with_omega(omega);
        let k = &self.fine.matrix;
        let zero = vec![0.0; k.nrows()];
        let mut u = harmonic_mode(&self.fine.dofs, theta, xi);
        for _ in 0..nu1 {
            u = apply_complex(|v| sm.sweep(k, v, &zero), &u);
        }
        let rc = apply_complex(|v| self.transfer.r.matvec(&k.matvec(v)), &u);
        let theta_c = [2.0 * theta[0], 2.0 * theta[1]];
        let rho = coarse_coefficients(&self.coarse, theta_c, &rc)?;
        let zeta = crate::linalg::LuFactor::new(&model.coarse_symbol(theta))?.solve(&rho);
        let corr = apply_complex(
            |v| self.transfer.p.matvec(v),
            &fourier_mode(&self.coarse, theta_c, &zeta),
        );
        for (a, b) in u.iter_mut().zip(corr) {
            *a -= b;
        }
        for _ in 0..nu2 {
            u = apply_complex(|v| sm.sweep(k, v, &zero), &u);
        }
        let rhs = harmonic_mode(
            &self.fine.dofs,
            theta,
            &model.two_grid_symbol(theta, omega, nu1, nu2)?.matvec(xi),
        );
        Ok(max_diff(&u, &rhs) / max_abs(&rhs).max(1.0))
    }
}

/// Coefficients of a vector that is a single Fourier mode; errors if it is not.
fn coarse_coefficients(dofs: &DofMap, theta: [f64; 2], v: &[Complex64]) -> Result<Vec<Complex64>> {
    let r = dofs.r();
    let mut xi = vec![Complex64::new(0.0, 0.0); r];
    let mut seen = vec![false; r];
    for i in 0..dofs.len() {
        let c = dofs.component_of(i);
        if !seen[c] {
            let (p1, p2) = dofs.position2(i);
            xi[c] = v[i]
                * Complex64::from_polar(1.0, -0.5 * (theta[0] * p1 as f64 + theta[1] * p2 as f64));
            seen[c] = true;
        }
    }
    let back = fourier_mode(dofs, theta, &xi);
    let defect = max_diff(&back, v) / max_abs(v).max(1.0);
    if defect > 1e-9 {
        return Err(Error::Numerical(format!(
            "restricted residual is not a single coarse mode (defect {defect:e})"
        )));
    }
    Ok(xi)
}

/// Sign matrix diagonal for the aliasing identity `K~(theta + 2 pi eta) = D K~(theta) D`.
pub fn aliasing_signs(counts: [usize; 4], eta: (i64, i64)) -> Vec<f64> {
    let mut d = Vec::new();
    for kind in crate::mesh::DofKind::ALL {
        let (o1, o2) = kind.half_offset();
        let s = if (eta.0 * o1 + eta.1 * o2) % 2 == 0 {
            1.0
        } else {
            -1.0
        };
        d.extend(std::iter::repeat_n(s, counts[kind.rank()]));
    }
    d
}

/// `max |K~(theta + 2 pi eta) - D K~(theta) D|` over all four `eta`.
pub fn aliasing_defect(stencils: &StencilSet, theta: [f64; 2]) -> f64 {
    let base = stencils.symbol(theta);
    let mut worst: f64 = 0.0;
    for eta in HARMONICS {
        let shifted = stencils.symbol([
            theta[0] + 2.0 * PI * eta.0 as f64,
            theta[1] + 2.0 * PI * eta.1 as f64,
        ]);
        let d = aliasing_signs(stencils.row_counts(), eta);
        for i in 0..base.rows() {
            for j in 0..base.cols() {
                worst = worst.max((shifted[(i, j)] - base[(i, j)] * (d[i] * d[j])).norm());
            }
        }
    }
    worst
}
