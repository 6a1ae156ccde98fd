//! Geometric multigrid laboratory for hybridized (HDG), embedded (EDG) and
//! continuous (CG) Galerkin discretizations of the Poisson problem on
//! uniform Cartesian grids.
//!
//! The crate assembles the statically condensed trace systems, solves them
//! with geometric multigrid using additive Vanka, Jacobi or Gauss-Seidel
//! relaxation and Dirichlet-to-Neumann prolongation, and predicts two-grid
//! convergence factors with a local Fourier analysis built on stencils
//! extracted from periodic assemblies.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod basis;
pub mod discretization;
pub mod error;
pub mod lfa;
pub mod linalg;
pub mod mesh;
pub mod multigrid;
pub mod smoothers;
pub mod transfer;
pub mod verify;

pub use discretization::{PoissonProblem, TraceSystem};
pub use error::{Error, Result};
pub use mesh::{BoundaryMode, DofKind, DofMap, MeshLevel, Method};
pub use multigrid::{ConvergenceReport, CycleType, MgConfig, MgHierarchy};
pub use smoothers::{Smoother, SmootherKind, VankaFlavor};
