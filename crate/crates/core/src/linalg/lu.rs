use super::dense::{DenseMatrix, Scalar};
use crate::error::{Error, Result};

/// LU factorization with partial pivoting, `P A = L U`.
#[derive(Debug, Clone)]
pub struct LuFactor<T> {
    lu: DenseMatrix<T>,
    perm: Vec<usize>,
}

/// Relative pivot threshold below which a matrix is declared singular.
pub const PIVOT_TOL: f64 = 1e-14;

impl<T: Scalar> LuFactor<T> {
    pub fn new(a: &DenseMatrix<T>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::DimensionMismatch {
                expected: a.rows(),
                actual: a.cols(),
            });
        }
        let n = a.rows();
        let scale = a.max_abs();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, lu[(i, k)].modulus()))
                .fold((k, -1.0), |best, c| if c.1 > best.1 { c } else { best });
            if !(pmax > PIVOT_TOL * scale) {
                return Err(Error::Singular {
                    step: k,
                    pivot: pmax,
                });
            }
            if p != k {
                perm.swap(p, k);
                for j in 0..n {
                    let t = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = t;
                }
            }
            let piv = lu[(k, k)];
            for i in k + 1..n {
                let f = lu[(i, k)] / piv;
                lu[(i, k)] = f;
                if f == T::zero() {
                    continue;
                }
                for j in k + 1..n {
                    let u = lu[(k, j)];
                    lu[(i, j)] -= f * u;
                }
            }
        }
        Ok(Self { lu, perm })
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        self.substitute(&mut x);
        x
    }

    fn substitute(&self, x: &mut [T]) {
        let n = self.dim();
        for i in 0..n {
            let row = self.lu.row(i);
            let mut s = x[i];
            for j in 0..i {
                s -= row[j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let row = self.lu.row(i);
            let mut s = x[i];
            for j in i + 1..n {
                s -= row[j] * x[j];
            }
            x[i] = s / row[i];
        }
    }

    /// Solve for every column of `b`.
    pub fn solve_matrix(&self, b: &DenseMatrix<T>) -> DenseMatrix<T> {
        let n = self.dim();
        assert_eq!(b.rows(), n);
        let mut out = DenseMatrix::zeros(n, b.cols());
        let mut col = vec![T::zero(); n];
        for j in 0..b.cols() {
            for i in 0..n {
                col[i] = b[(self.perm[i], j)];
            }
            self.substitute(&mut col);
            for i in 0..n {
                out[(i, j)] = col[i];
            }
        }
        out
    }

    pub fn inverse(&self) -> DenseMatrix<T> {
        self.solve_matrix(&DenseMatrix::identity(self.dim()))
    }
}

/// Solve `A x = b` by LU with partial pivoting.
pub fn lu_solve<T: Scalar>(a: &DenseMatrix<T>, b: &[T]) -> Result<Vec<T>> {
    if b.len() != a.rows() {
        return Err(Error::DimensionMismatch {
            expected: a.rows(),
            actual: b.len(),
        });
    }
    Ok(LuFactor::new(a)?.solve(b))
}

/// Forward substitution with the lower triangle (diagonal included) of `a`.
pub fn lower_solve(a: &DenseMatrix<f64>, b: &[f64]) -> Vec<f64> {
    let n = a.rows();
    let mut x = b.to_vec();
    for i in 0..n {
        let row = a.row(i);
        let mut s = x[i];
        for j in 0..i {
            s -= row[j] * x[j];
        }
        x[i] = s / row[i];
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dense::{CMatrix, RMatrix};
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_solve() {
        let b = vec![3.0, -1.0, 2.5];
        assert_eq!(lu_solve(&RMatrix::identity(3), &b).unwrap(), b);
    }

    #[test]
    fn complex_two_by_two() {
        let c = |x: f64| Complex64::new(x, 0.0);
        let a = CMatrix::from_vec(2, 2, vec![c(2.), c(1.), c(1.), c(2.)]);
        let x = lu_solve(&a, &[c(3.), c(3.)]).unwrap();
        for v in x {
            assert!((v - c(1.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn random_multiply_back() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 20;
        let a = RMatrix::from_fn(n, n, |i, j| {
            rng.gen_range(-1.0..1.0) + if i == j { 4.0 } else { 0.0 }
        });
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x = lu_solve(&a, &b).unwrap();
        let ax = a.matvec(&x);
        let xn = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let bn = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (l, r) in ax.iter().zip(&b) {
            assert!((l - r).abs() <= 1e-10 * (a.max_abs() * xn + bn));
        }
    }

    #[test]
    fn singular_is_reported() {
        let a = RMatrix::from_vec(2, 2, vec![1.0, 2.0, 2.0, 4.0]);
        assert!(matches!(LuFactor::new(&a), Err(Error::Singular { .. })));
    }
}
