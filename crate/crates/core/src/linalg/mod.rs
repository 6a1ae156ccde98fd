//! Dense and sparse numeric kernels.

pub mod cholesky;
pub mod dense;
pub mod eig;
pub mod lu;
pub mod sparse;

pub use cholesky::{sparse_direct_solve, SparseCholesky};
pub use dense::{CMatrix, DenseMatrix, RMatrix, Scalar};
pub use eig::{eigenvalues, spectral_radius};
pub use lu::{lu_solve, LuFactor};
pub use sparse::{CsrMatrix, TripletBuilder};

/// Anything that can be applied to a real vector.
pub trait LinearOperator {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    fn apply(&self, x: &[f64]) -> Vec<f64>;
}

impl LinearOperator for CsrMatrix {
    fn nrows(&self) -> usize {
        CsrMatrix::nrows(self)
    }
    fn ncols(&self) -> usize {
        CsrMatrix::ncols(self)
    }
    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.matvec(x)
    }
}

impl LinearOperator for RMatrix {
    fn nrows(&self) -> usize {
        self.rows()
    }
    fn ncols(&self) -> usize {
        self.cols()
    }
    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.matvec(x)
    }
}
