//! One-dimensional quadrature rules and Lagrange bases on the unit interval.
//!
//! Everything here lives on `[0, 1]`; tensor products of these rules give
//! the element and face integrals used by the discretization.

use std::f64::consts::PI;

/// Value and derivative of the Legendre polynomial `P_n` at `x`.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p0, mut p1) = (1.0, x);
    for j in 2..=n {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let dp = if (1.0 - x * x).abs() < 1e-300 {
        // endpoint limit
        let nf = n as f64;
        x.powi(n as i32 + 1) * nf * (nf + 1.0) / 2.0
    } else {
        n as f64 * (p0 - x * p1) / (1.0 - x * x)
    };
    (p1, dp)
}

/// Gauss-Legendre rule with `npts` points mapped to `[0, 1]`.
///
/// Weights sum to one. Exact for polynomials of degree `2 * npts - 1`.
pub fn gauss_legendre(npts: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(npts >= 1);
    let mut x = vec![0.0; npts];
    let mut w = vec![0.0; npts];
    for i in 0..npts {
        let mut z = (PI * (i as f64 + 0.75) / (npts as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(npts, z);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(npts, z);
        // ascending order on [0, 1]
        let j = npts - 1 - i;
        x[j] = 0.5 * (z + 1.0);
        w[j] = 1.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

/// Gauss-Lobatto nodes (`npts >= 2`) on `[0, 1]`, ascending, endpoints included.
pub fn gauss_lobatto_nodes(npts: usize) -> Vec<f64> {
    assert!(npts >= 2);
    let n = npts - 1;
    let mut nodes = vec![0.0; npts];
    nodes[n] = 1.0;
    // interior nodes are the roots of P'_n
    for i in 1..n {
        let mut z = -(PI * i as f64 / n as f64).cos();
        for _ in 0..100 {
            // derivative of P'_n via the Legendre ODE:
            // (1 - z^2) P_n'' = 2 z P_n' - n (n + 1) P_n
            let (p, dp) = legendre(n, z);
            let ddp = (2.0 * z * dp - (n * (n + 1)) as f64 * p) / (1.0 - z * z);
            let dz = dp / ddp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = 0.5 * (z + 1.0);
    }
    nodes
}

/// Nodal Lagrange basis on `[0, 1]`.
#[derive(Debug, Clone)]
pub struct Lagrange1d {
    nodes: Vec<f64>,
    denom: Vec<f64>,
}

impl Lagrange1d {
    pub fn new(nodes: Vec<f64>) -> Self {
        let denom = (0..nodes.len())
            .map(|i| {
                nodes
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, &xj)| nodes[i] - xj)
                    .product()
            })
            .collect();
        Self { nodes, denom }
    }

    /// Degree-`k` basis on Gauss-Lobatto nodes.
    pub fn lobatto(k: usize) -> Self {
        Self::new(gauss_lobatto_nodes(k + 1))
    }

    /// Degree-`k` basis on equally spaced nodes, the nodal basis used by
    /// every discretization in this crate.
    pub fn equispaced(k: usize) -> Self {
        assert!(k >= 1);
        Self::new((0..=k).map(|i| i as f64 / k as f64).collect())
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn eval(&self, t: f64) -> Vec<f64> {
        (0..self.len())
            .map(|i| {
                let num: f64 = self
                    .nodes
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, &xj)| t - xj)
                    .product();
                num / self.denom[i]
            })
            .collect()
    }

    pub fn deriv(&self, t: f64) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut s = 0.0;
                for m in 0..n {
                    if m == i {
                        continue;
                    }
                    let mut term = 1.0;
                    for j in 0..n {
                        if j != i && j != m {
                            term *= t - self.nodes[j];
                        }
                    }
                    s += term;
                }
                s / self.denom[i]
            })
            .collect()
    }
}
