//! Sparse direct solver for symmetric positive definite systems:
//! reverse Cuthill-McKee reordering followed by an envelope (skyline)
//! Cholesky factorization. Used for the coarsest multigrid level.

use std::collections::VecDeque;

use super::sparse::CsrMatrix;
use crate::error::{Error, Result};

/// Reverse Cuthill-McKee permutation of a structurally symmetric pattern.
/// `perm[new] = old`.
pub fn reverse_cuthill_mckee(a: &CsrMatrix) -> Vec<usize> {
    let n = a.nrows();
    let degree: Vec<usize> = (0..n).map(|i| a.row(i).0.len()).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let bfs = |start: usize, visited: &mut Vec<bool>, out: &mut Vec<usize>| -> usize {
        // returns the last node reached (a far node)
        let mut queue = VecDeque::new();
        queue.push_back(start);
        visited[start] = true;
        let mut last = start;
        let mut nbrs = Vec::new();
        while let Some(v) = queue.pop_front() {
            out.push(v);
            last = v;
            nbrs.clear();
            nbrs.extend(a.row(v).0.iter().copied().filter(|&u| !visited[u]));
            nbrs.sort_by_key(|&u| (degree[u], u));
            for &u in &nbrs {
                visited[u] = true;
                queue.push_back(u);
            }
        }
        last
    };
    for seed in 0..n {
        if visited[seed] {
            continue;
        }
        // pick a pseudo-peripheral start inside this component
        let mut start = seed;
        for _ in 0..2 {
            let mut scratch_vis = visited.clone();
            let mut scratch = Vec::new();
            let far = bfs(start, &mut scratch_vis, &mut scratch);
            if far == start {
                break;
            }
            start = far;
        }
        bfs(start, &mut visited, &mut order);
    }
    order.reverse();
    order
}

/// Envelope Cholesky factor `P A P^T = L L^T`.
#[derive(Debug, Clone)]
pub struct SparseCholesky {
    perm: Vec<usize>,
    first: Vec<usize>,
    offset: Vec<usize>,
    values: Vec<f64>,
}

impl SparseCholesky {
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::DimensionMismatch {
                expected: a.nrows(),
                actual: a.ncols(),
            });
        }
        let n = a.nrows();
        let perm = reverse_cuthill_mckee(a);
        let mut inv = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut first: Vec<usize> = (0..n).collect();
        for old in 0..n {
            let i = inv[old];
            for &oj in a.row(old).0 {
                let j = inv[oj];
                if j < i && j < first[i] {
                    first[i] = j;
                }
            }
        }
        let mut offset = vec![0usize; n + 1];
        for i in 0..n {
            offset[i + 1] = offset[i] + (i - first[i] + 1);
        }
        let mut values = vec![0.0; offset[n]];
        for old in 0..n {
            let i = inv[old];
            let (cols, vals) = a.row(old);
            for (&oj, &v) in cols.iter().zip(vals) {
                let j = inv[oj];
                if j <= i {
                    values[offset[i] + j - first[i]] = v;
                }
            }
        }
        let scale = a.max_abs();
        for i in 0..n {
            let fi = first[i];
            let ri = offset[i];
            for j in fi..i {
                let fj = first[j];
                let rj = offset[j];
                let k0 = fi.max(fj);
                let mut s = values[ri + j - fi];
                let li = &values[ri + k0 - fi..ri + j - fi];
                let lj = &values[rj + k0 - fj..rj + j - fj];
                for (x, y) in li.iter().zip(lj) {
                    s -= x * y;
                }
                values[ri + j - fi] = s / values[rj + j - fj];
            }
            let mut d = values[ri + i - fi];
            for x in &values[ri..ri + i - fi] {
                d -= x * x;
            }
            if !(d > 1e-14 * scale) {
                return Err(Error::NotPositiveDefinite {
                    row: perm[i],
                    pivot: d,
                });
            }
            values[ri + i - fi] = d.sqrt();
        }
        Ok(Self {
            perm,
            first,
            offset,
            values,
        })
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    /// Number of stored factor entries.
    pub fn envelope_size(&self) -> usize {
        self.values.len()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        assert_eq!(b.len(), n);
        let mut y: Vec<f64> = self.perm.iter().map(|&o| b[o]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.values[self.offset[i]..self.offset[i + 1]];
            let mut s = y[i];
            for (x, yk) in row[..i - fi].iter().zip(&y[fi..i]) {
                s -= x * yk;
            }
            y[i] = s / row[i - fi];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let row = &self.values[self.offset[i]..self.offset[i + 1]];
            let xi = y[i] / row[i - fi];
            y[i] = xi;
            for (yk, l) in y[fi..i].iter_mut().zip(&row[..i - fi]) {
                *yk -= l * xi;
            }
        }
        let mut x = vec![0.0; n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }
}

/// Solve an SPD sparse system directly.
pub fn sparse_direct_solve(a: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>> {
    if b.len() != a.nrows() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            actual: b.len(),
        });
    }
    Ok(SparseCholesky::new(a)?.solve(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::lu::lu_solve;
    use crate::linalg::sparse::TripletBuilder;

    fn laplace_2d(m: usize) -> CsrMatrix {
        let mut b = TripletBuilder::new(m * m, m * m);
        for j in 0..m {
            for i in 0..m {
                let r = j * m + i;
                b.push(r, r, 4.0);
                if i > 0 {
                    b.push(r, r - 1, -1.0);
                }
                if i + 1 < m {
                    b.push(r, r + 1, -1.0);
                }
                if j > 0 {
                    b.push(r, r - m, -1.0);
                }
                if j + 1 < m {
                    b.push(r, r + m, -1.0);
                }
            }
        }
        b.build()
    }

    #[test]
    fn tridiagonal_by_hand() {
        let mut t = TripletBuilder::new(3, 3);
        for (i, j, v) in [
            (0, 0, 2.),
            (0, 1, -1.),
            (1, 0, -1.),
            (1, 1, 2.),
            (1, 2, -1.),
            (2, 1, -1.),
            (2, 2, 2.),
        ] {
            t.push(i, j, v);
        }
        let x = sparse_direct_solve(&t.build(), &[0., 0., 4.]).unwrap();
        for (a, b) in x.iter().zip([1., 2., 3.]) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let a = laplace_2d(5);
        assert!(sparse_direct_solve(&a, &[0.0; 25])
            .unwrap()
            .iter()
            .all(|&v| v == 0.0));
    }

    #[test]
    fn matches_dense_lu() {
        let a = laplace_2d(9);
        let b: Vec<f64> = (0..81).map(|i| ((i * 7) % 11) as f64 - 5.0).collect();
        let x = sparse_direct_solve(&a, &b).unwrap();
        let y = lu_solve(&a.to_dense(), &b).unwrap();
        for (p, q) in x.iter().zip(&y) {
            assert!((p - q).abs() < 1e-10);
        }
    }

    #[test]
    fn rcm_is_permutation_with_small_envelope() {
        let a = laplace_2d(12);
        let mut p = reverse_cuthill_mckee(&a);
        let f = SparseCholesky::new(&a).unwrap();
        assert!(f.envelope_size() < 144 * 20);
        p.sort_unstable();
        assert_eq!(p, (0..144).collect::<Vec<_>>());
    }

    #[test]
    fn indefinite_rejected() {
        let mut t = TripletBuilder::new(2, 2);
        t.push(0, 0, 1.0);
        t.push(0, 1, 2.0);
        t.push(1, 0, 2.0);
        t.push(1, 1, 1.0);
        assert!(matches!(
            SparseCholesky::new(&t.build()),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }
}
