//! Eigenvalues of small dense complex matrices: Householder reduction to
//! upper Hessenberg form followed by single-shift complex QR with Wilkinson
//! shifts and deflation.

use num_complex::Complex64;

use super::dense::CMatrix;
use crate::error::{Error, Result};

/// Total QR sweep budget per unit of dimension, as in LAPACK's `zlahqr`.
const SWEEPS_PER_ROW: usize = 30;

/// Reduce a square matrix to upper Hessenberg form by unitary similarity.
pub fn hessenberg(a: &CMatrix) -> CMatrix {
    let n = a.rows();
    let mut h = a.clone();
    if n < 3 {
        return h;
    }
    let mut v = vec![Complex64::new(0.0, 0.0); n];
    for k in 0..n - 2 {
        let norm: f64 = (k + 1..n).map(|i| h[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        let tail: f64 = (k + 2..n).map(|i| h[(i, k)].norm_sqr()).sum();
        if norm == 0.0 || tail == 0.0 {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let phase = if x0.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        let alpha = -phase * norm;
        for i in k + 1..n {
            v[i] = h[(i, k)];
        }
        v[k + 1] -= alpha;
        let vnorm: f64 = (k + 1..n).map(|i| v[i].norm_sqr()).sum::<f64>().sqrt();
        for i in k + 1..n {
            v[i] /= vnorm;
        }
        // H <- (I - 2 v v^H) H
        for j in k..n {
            let mut s = Complex64::new(0.0, 0.0);
            for i in k + 1..n {
                s += v[i].conj() * h[(i, j)];
            }
            s *= 2.0;
            for i in k + 1..n {
                let vi = v[i];
                h[(i, j)] -= vi * s;
            }
        }
        // H <- H (I - 2 v v^H)
        for i in 0..n {
            let mut s = Complex64::new(0.0, 0.0);
            for j in k + 1..n {
                s += h[(i, j)] * v[j];
            }
            s *= 2.0;
            for j in k + 1..n {
                let vj = v[j].conj();
                h[(i, j)] -= s * vj;
            }
        }
        for i in k + 2..n {
            h[(i, k)] = Complex64::new(0.0, 0.0);
        }
    }
    h
}

/// Eigenvalue of the 2x2 block `[[a, b], [c, d]]` closest to `d`.
fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let tr_half = (a + d) * 0.5;
    let det = a * d - b * c;
    let disc = (tr_half * tr_half - det).sqrt();
    let l1 = tr_half + disc;
    let l2 = tr_half - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// All eigenvalues of a square complex matrix, in no particular order.
pub fn eigenvalues(a: &CMatrix) -> Result<Vec<Complex64>> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            expected: a.rows(),
            actual: a.cols(),
        });
    }
    let n = a.rows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut h = hessenberg(a);
    let mut eig = vec![Complex64::new(0.0, 0.0); n];
    let scale = h.max_abs();
    let tiny = f64::MIN_POSITIVE.max(scale * 1e-300);
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    let mut rot = vec![(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)); n];
    loop {
        if hi == 0 {
            eig[0] = h[(0, 0)];
            break;
        }
        // look for a negligible subdiagonal entry
        let mut l = hi;
        while l > 0 {
            let s = h[(l - 1, l - 1)].norm() + h[(l, l)].norm();
            let sub = h[(l, l - 1)].norm();
            if sub <= f64::EPSILON * s || sub <= f64::EPSILON * scale || sub <= tiny {
                h[(l, l - 1)] = Complex64::new(0.0, 0.0);
                break;
            }
            l -= 1;
        }
        if l == hi {
            eig[hi] = h[(hi, hi)];
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if total > SWEEPS_PER_ROW * n.max(10) {
            return Err(Error::NoConvergence(total));
        }
        let mu = if iter.is_multiple_of(10) {
            // exceptional shift to break cycles
            h[(hi, hi)] + Complex64::new(h[(hi, hi - 1)].norm(), 0.0) * 0.75
        } else {
            wilkinson_shift(
                h[(hi - 1, hi - 1)],
                h[(hi - 1, hi)],
                h[(hi, hi - 1)],
                h[(hi, hi)],
            )
        };
        for i in l..=hi {
            h[(i, i)] -= mu;
        }
        // QR by Givens rotations on the active block
        for k in l..hi {
            let x = h[(k, k)];
            let y = h[(k + 1, k)];
            let r = (x.norm_sqr() + y.norm_sqr()).sqrt();
            let (c, s) = if r == 0.0 {
                (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))
            } else {
                (x / r, y / r)
            };
            rot[k] = (c, s);
            for j in k..=hi {
                let a = h[(k, j)];
                let b = h[(k + 1, j)];
                h[(k, j)] = c.conj() * a + s.conj() * b;
                h[(k + 1, j)] = -s * a + c * b;
            }
        }
        for k in l..hi {
            let (c, s) = rot[k];
            let top = (k + 2).min(hi);
            for i in l..=top {
                let a = h[(i, k)];
                let b = h[(i, k + 1)];
                h[(i, k)] = a * c + b * s;
                h[(i, k + 1)] = -a * s.conj() + b * c.conj();
            }
        }
        for i in l..=hi {
            h[(i, i)] += mu;
        }
    }
    Ok(eig)
}

/// Largest eigenvalue modulus.
pub fn spectral_radius(a: &CMatrix) -> Result<f64> {
    Ok(eigenvalues(a)?.iter().fold(0.0, |m, l| m.max(l.norm())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn random(n: usize, seed: u64) -> CMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        CMatrix::from_fn(n, n, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        })
    }

    /// Dominant eigenvalue modulus by plain power iteration.
    fn power_radius(a: &CMatrix) -> f64 {
        let n = a.rows();
        let mut x: Vec<Complex64> = (0..n)
            .map(|i| Complex64::new(1.0, i as f64 * 0.1))
            .collect();
        let mut est = 0.0;
        for _ in 0..20000 {
            let y = a.matvec(&x);
            let ny: f64 = y.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            let nx: f64 = x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            est = ny / nx;
            x = y.into_iter().map(|v| v / ny).collect();
        }
        est
    }

    #[test]
    fn diagonal_and_nilpotent() {
        let d = CMatrix::from_vec(2, 2, vec![c(0.5), c(0.0), c(0.0), c(-0.9)]);
        assert!((spectral_radius(&d).unwrap() - 0.9).abs() < 1e-15);
        let z = CMatrix::from_vec(2, 2, vec![c(0.0), c(1.0), c(0.0), c(0.0)]);
        assert_eq!(spectral_radius(&z).unwrap(), 0.0);
        assert_eq!(spectral_radius(&CMatrix::zeros(4, 4)).unwrap(), 0.0);
    }

    #[test]
    fn matches_power_iteration() {
        for seed in 0..5 {
            let a = random(8, seed);
            let rho = spectral_radius(&a).unwrap();
            assert!((rho - power_radius(&a)).abs() < 1e-6, "seed {seed}");
        }
    }

    #[test]
    fn eigenvalues_make_shifted_matrix_singular() {
        let a = random(12, 42);
        let eigs = eigenvalues(&a).unwrap();
        // sum of eigenvalues equals the trace
        let tr = (0..12).fold(c(0.0), |s, i| s + a[(i, i)]);
        let se = eigs.iter().fold(c(0.0), |s, &l| s + l);
        assert!((tr - se).norm() < 1e-10);
        for &l in &eigs {
            let shifted =
                CMatrix::from_fn(12, 12, |i, j| a[(i, j)] - if i == j { l } else { c(0.0) });
            let h = hessenberg(&shifted);
            // the determinant of a near-singular Hessenberg matrix is tiny
            let lu = crate::linalg::lu::LuFactor::new(&h);
            if let Ok(f) = lu {
                let x = f.solve(&[c(1.0); 12]);
                let nx = x.iter().map(|v| v.norm()).fold(0.0, f64::max);
                assert!(nx > 1e8, "eigenvalue {l} does not make A - lI singular");
            }
        }
    }

    #[test]
    fn hessenberg_preserves_spectrum_moments() {
        let a = random(9, 3);
        let h = hessenberg(&a);
        for i in 2..9 {
            for j in 0..i - 1 {
                assert_eq!(h[(i, j)].norm(), 0.0);
            }
        }
        let a2 = a.matmul(&a);
        let h2 = h.matmul(&h);
        let t1 = (0..9).fold(c(0.0), |s, i| s + a2[(i, i)]);
        let t2 = (0..9).fold(c(0.0), |s, i| s + h2[(i, i)]);
        assert!((t1 - t2).norm() < 1e-12);
    }
}
