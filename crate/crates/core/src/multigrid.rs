//! Geometric multigrid on a hierarchy of Galerkin trace operators.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::discretization::TraceSystem;
use crate::error::{Error, Result};
use crate::linalg::sparse::norm2;
use crate::linalg::{RMatrix, SparseCholesky};
use crate::mesh::DofMap;
use crate::smoothers::{Smoother, SmootherKind, MAX_DENSE};
use crate::transfer::{build_transfer, galerkin_coarse, LevelTransfer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CycleType {
    V,
    W,
    F,
}

impl fmt::Display for CycleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CycleType::V => "v",
            CycleType::W => "w",
            CycleType::F => "f",
        })
    }
}

impl FromStr for CycleType {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "v" => Ok(CycleType::V),
            "w" => Ok(CycleType::W),
            "f" => Ok(CycleType::F),
            _ => Err(Error::InvalidArgument(format!(
                "unknown cycle '{s}' (v, w, f)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MgConfig {
    pub smoother: SmootherKind,
    pub omega: f64,
    pub nu1: usize,
    pub nu2: usize,
    pub cycle: CycleType,
    /// Number of levels including the finest; 2 is the two-grid method.
    pub levels: usize,
}

impl MgConfig {
    pub fn two_grid(smoother: SmootherKind, omega: f64, nu1: usize, nu2: usize) -> Self {
        Self {
            smoother,
            omega,
            nu1,
            nu2,
            cycle: CycleType::V,
            levels: 2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Level {
    pub system: TraceSystem,
    pub smoother: Option<Smoother>,
    pub transfer: Option<LevelTransfer>,
}

#[derive(Debug, Clone)]
pub struct MgHierarchy {
    pub config: MgConfig,
    pub levels: Vec<Level>,
    coarse: SparseCholesky,
}

#[derive(Clone, Copy)]
enum Mode {
    V,
    W,
    F,
}

impl MgHierarchy {
    pub fn new(fine: TraceSystem, config: MgConfig) -> Result<Self> {
        if config.levels < 2 {
            return Err(Error::InvalidArgument(
                "multigrid needs at least two levels".into(),
            ));
        }
        crate::mesh::build_hierarchy(
            fine.dofs.level().n,
            config.levels,
            fine.dofs.level().boundary,
        )?;
        let mut levels = Vec::with_capacity(config.levels);
        let mut current = fine;
        for _ in 0..config.levels - 1 {
            let d = &current.dofs;
            let coarse_dofs =
                DofMap::new(d.level().coarsen()?, d.method(), d.degree(), d.slot_order())?;
            let transfer = build_transfer(&current, &coarse_dofs)?;
            let next = galerkin_coarse(&current, &transfer, &coarse_dofs)?;
            let smoother = Smoother::new(&current, config.smoother, config.omega)?;
            levels.push(Level {
                system: current,
                smoother: Some(smoother),
                transfer: Some(transfer),
            });
            current = next;
        }
        let coarse = SparseCholesky::new(&current.matrix)?;
        levels.push(Level {
            system: current,
            smoother: None,
            transfer: None,
        });
        Ok(Self {
            config,
            levels,
            coarse,
        })
    }

    pub fn finest(&self) -> &TraceSystem {
        &self.levels[0].system
    }

    /// One cycle on the finest level.
    pub fn cycle(&self, x: &[f64], b: &[f64]) -> Result<Vec<f64>> {
        let n = self.finest().len();
        if x.len() != n || b.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: x.len().min(b.len()),
            });
        }
        let mode = match self.config.cycle {
            CycleType::V => Mode::V,
            CycleType::W => Mode::W,
            CycleType::F => Mode::F,
        };
        Ok(self.recurse(0, x.to_vec(), b, mode))
    }

    fn recurse(&self, l: usize, mut x: Vec<f64>, b: &[f64], mode: Mode) -> Vec<f64> {
        if l + 1 == self.levels.len() {
            return self.coarse.solve(b);
        }
        let level = &self.levels[l];
        let k = &level.system.matrix;
        let sm = level
            .smoother
            .as_ref()
            .expect("smoother on non-coarsest level");
        let tr = level
            .transfer
            .as_ref()
            .expect("transfer on non-coarsest level");
        for _ in 0..self.config.nu1 {
            x = sm.sweep(k, &x, b);
        }
        let rc = tr.r.matvec(&k.residual(&x, b));
        let zero = vec![0.0; rc.len()];
        let ec = if l + 2 == self.levels.len() {
            self.coarse.solve(&rc)
        } else {
            match mode {
                Mode::V => self.recurse(l + 1, zero, &rc, Mode::V),
                Mode::W => {
                    let e = self.recurse(l + 1, zero, &rc, Mode::W);
                    self.recurse(l + 1, e, &rc, Mode::W)
                }
                Mode::F => {
                    let e = self.recurse(l + 1, zero, &rc, Mode::F);
                    self.recurse(l + 1, e, &rc, Mode::V)
                }
            }
        };
        for (xi, ei) in x.iter_mut().zip(tr.p.matvec(&ec)) {
            *xi += ei;
        }
        for _ in 0..self.config.nu2 {
            x = sm.sweep(k, &x, b);
        }
        x
    }

    /// Dense error propagation operator of one cycle, by column probes.
    pub fn error_operator(&self) -> Result<RMatrix> {
        let n = self.finest().len();
        if n > MAX_DENSE {
            return Err(Error::InvalidArgument(format!(
                "dense operator of dimension {n} exceeds {MAX_DENSE}"
            )));
        }
        let zero = vec![0.0; n];
        let mut e = RMatrix::zeros(n, n);
        let mut u = vec![0.0; n];
        for j in 0..n {
            u[j] = 1.0;
            let col = self.cycle(&u, &zero)?;
            for i in 0..n {
                e[(i, j)] = col[i];
            }
            u[j] = 0.0;
        }
        Ok(e)
    }
}

/// Stopping rules for [`measure_rho`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasureOptions {
    pub max_iterations: usize,
    /// Stop once `‖d_j‖ / ‖d_0‖` falls below this (0 disables it).
    pub rel_tol: f64,
    /// Stop once `‖d_j‖₂` falls below this. With a zero right-hand side
    /// there is no round-off floor, so the default of 1e-16 is reachable.
    pub abs_tol: f64,
    /// Consecutive growth steps that count as divergence.
    pub divergence_window: usize,
    /// Ratios in `(stagnation_ratio, 1]` for `stagnation_window` consecutive
    /// steps stop the iteration.
    pub stagnation_ratio: f64,
    pub stagnation_window: usize,
}

impl Default for MeasureOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            rel_tol: 0.0,
            abs_tol: 1e-16,
            divergence_window: 10,
            stagnation_ratio: 0.999,
            stagnation_window: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub residual_history: Vec<f64>,
    pub rho_last: f64,
    pub rho_geo: f64,
    pub iterations: usize,
    pub converged: bool,
    pub diverged: bool,
    /// Late residual ratios disagree by more than 10 %.
    pub oscillating: bool,
}

impl ConvergenceReport {
    fn from_history(history: Vec<f64>, converged: bool, diverged: bool) -> Self {
        let j = history.len() - 1;
        if j == 0 || history[0] == 0.0 {
            return Self {
                residual_history: history,
                rho_last: 0.0,
                rho_geo: 0.0,
                iterations: 0,
                converged: true,
                diverged: false,
                oscillating: false,
            };
        }
        let ratio = |i: usize| {
            if history[i - 1] > 0.0 {
                history[i] / history[i - 1]
            } else {
                0.0
            }
        };
        let rho_last = ratio(j);
        let rho_geo = (history[j] / history[0]).powf(1.0 / j as f64);
        let tail: Vec<f64> = (j.saturating_sub(3).max(1)..=j).map(ratio).collect();
        let hi = tail.iter().cloned().fold(0.0, f64::max);
        let lo = tail.iter().cloned().fold(f64::INFINITY, f64::min);
        let oscillating = tail.len() > 1 && hi - lo > 0.1 * hi;
        Self {
            residual_history: history,
            rho_last,
            rho_geo,
            iterations: j,
            converged,
            diverged,
            oscillating,
        }
    }
}

/// Random initial guess with entries uniform on `[0, 100]`.
pub fn random_initial_guess(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(0.0..=100.0)).collect()
}

/// Iterate on `K x = 0` from `x0` and record residual norms.
pub fn measure_from(
    hier: &MgHierarchy,
    x0: Vec<f64>,
    opts: &MeasureOptions,
) -> Result<ConvergenceReport> {
    let k = &hier.finest().matrix;
    let b = vec![0.0; x0.len()];
    let mut x = x0;
    let mut history = vec![norm2(&k.residual(&x, &b))];
    let mut growth = 0;
    let mut stalled = 0;
    let d0 = history[0];
    if d0 == 0.0 {
        return Ok(ConvergenceReport::from_history(history, true, false));
    }
    loop {
        let j = history.len() - 1;
        let dj = history[j];
        if dj < opts.abs_tol || dj / d0 < opts.rel_tol {
            return Ok(ConvergenceReport::from_history(history, true, false));
        }
        if !dj.is_finite() || growth >= opts.divergence_window {
            return Ok(ConvergenceReport::from_history(history, false, true));
        }
        if j >= opts.max_iterations || stalled >= opts.stagnation_window {
            return Ok(ConvergenceReport::from_history(history, false, false));
        }
        x = hier.cycle(&x, &b)?;
        let d = norm2(&k.residual(&x, &b));
        growth = if d > dj { growth + 1 } else { 0 };
        let ratio = d / dj;
        stalled = if ratio > opts.stagnation_ratio && ratio <= 1.0 {
            stalled + 1
        } else {
            0
        };
        history.push(d);
    }
}

/// Measured convergence factor of the homogeneous problem from a seeded random start.
pub fn measure_rho(
    hier: &MgHierarchy,
    seed: u64,
    opts: &MeasureOptions,
) -> Result<ConvergenceReport> {
    measure_from(hier, random_initial_guess(hier.finest().len(), seed), opts)
}
