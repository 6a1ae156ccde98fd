//! Grid transfer between a mesh and its uniform refinement.
//!
//! HDG and EDG use the Dirichlet-to-Neumann prolongation: coarse traces are
//! projected onto the fine faces lying on coarse-element boundaries (`B`)
//! and extended harmonically into the fine faces interior to coarse
//! elements (`I`). CG uses nested interpolation. Restriction is the
//! transpose and coarse operators are Galerkin products.

use std::collections::BTreeSet;

use crate::basis::Lagrange1d;
use crate::discretization::TraceSystem;
use crate::error::{Error, Result};
use crate::linalg::{CsrMatrix, LuFactor, RMatrix, TripletBuilder};
use crate::mesh::{DofKind, DofMap, Method, Orientation};

/// Fine unknowns split by their position relative to the coarse mesh.
#[derive(Debug, Clone)]
pub struct FaceSplit {
    /// `true` for unknowns on fine faces that lie on coarse-element boundaries.
    pub on_boundary: Vec<bool>,
    /// Interior unknowns grouped per coarse cell (`c2 n_H + c1`).
    pub interior_by_cell: Vec<Vec<usize>>,
}

impl FaceSplit {
    pub fn new(fine: &DofMap) -> Self {
        let nc = fine.level().n / 2;
        let mut on_boundary = vec![true; fine.len()];
        let mut interior_by_cell = vec![Vec::new(); nc * nc];
        for (g, e) in fine.entries().iter().enumerate() {
            let (k1, k2) = e.cell;
            let interior = match e.kind {
                DofKind::N => k1 % 2 == 1 && k2 % 2 == 1,
                DofKind::X => k2 % 2 == 1,
                DofKind::Y => k1 % 2 == 1,
                DofKind::C => true,
            };
            if interior {
                on_boundary[g] = false;
                interior_by_cell[(k2 / 2) * nc + k1 / 2].push(g);
            }
        }
        Self {
            on_boundary,
            interior_by_cell,
        }
    }

    pub fn boundary(&self) -> Vec<usize> {
        (0..self.on_boundary.len())
            .filter(|&g| self.on_boundary[g])
            .collect()
    }

    pub fn interior(&self) -> Vec<usize> {
        (0..self.on_boundary.len())
            .filter(|&g| !self.on_boundary[g])
            .collect()
    }
}

fn check_pair(fine: &DofMap, coarse: &DofMap) -> Result<()> {
    let (f, c) = (fine.level(), coarse.level());
    if f.n != 2 * c.n || f.boundary != c.boundary {
        return Err(Error::InvalidArgument(format!(
            "level with n = {} is not the uniform refinement of n = {}",
            f.n, c.n
        )));
    }
    if fine.method() != coarse.method()
        || fine.degree() != coarse.degree()
        || fine.slot_order() != coarse.slot_order()
    {
        return Err(Error::InvalidArgument(
            "fine and coarse unknowns use different discretizations".into(),
        ));
    }
    Ok(())
}

/// Projection of coarse traces onto the fine `B` faces. Rows of `I`
/// unknowns are empty.
///
/// The fine facet space restricted to a child face contains the coarse
/// polynomial, so the `L2` projection reduces to evaluating the coarse trace
/// at the fine facet nodes.
pub fn build_pb(fine: &DofMap, coarse: &DofMap) -> Result<CsrMatrix> {
    check_pair(fine, coarse)?;
    if fine.method() == Method::Cg {
        return Err(Error::InvalidArgument(
            "CG uses nested interpolation".into(),
        ));
    }
    let k = fine.degree();
    let basis = Lagrange1d::equispaced(k);
    let nodes = basis.nodes().to_vec();
    let nc = coarse.level().n as i64;
    let mut done = vec![false; fine.len()];
    let mut b = TripletBuilder::new(fine.len(), coarse.len());
    for orient in [Orientation::Horizontal, Orientation::Vertical] {
        for e2 in 0..=nc {
            for e1 in 0..=nc {
                let coarse_nodes: Vec<Option<usize>> = (0..=k)
                    .map(|j| coarse.face_node(orient, e1, e2, j))
                    .collect();
                for child in 0..2i64 {
                    let (f1, f2) = match orient {
                        Orientation::Horizontal => (2 * e1 + child, 2 * e2),
                        Orientation::Vertical => (2 * e1, 2 * e2 + child),
                    };
                    for (i, &t) in nodes.iter().enumerate() {
                        let Some(g) = fine.face_node(orient, f1, f2, i) else {
                            continue;
                        };
                        if done[g] {
                            continue;
                        }
                        done[g] = true;
                        let w = basis.eval((child as f64 + t) / 2.0);
                        for (cj, wj) in coarse_nodes.iter().zip(w) {
                            if let Some(c) = *cj {
                                if wj.abs() > 1e-15 {
                                    b.push(g, c, wj);
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(b.build())
}

/// Nested `Q^k` interpolation for CG.
pub fn build_cg_interpolation(fine: &DofMap, coarse: &DofMap) -> Result<CsrMatrix> {
    check_pair(fine, coarse)?;
    let k = fine.degree();
    let basis = Lagrange1d::equispaced(k);
    let nodes = basis.nodes().to_vec();
    let nf = fine.level().n;
    let n1 = k + 1;
    let mut done = vec![false; fine.len()];
    let mut b = TripletBuilder::new(fine.len(), coarse.len());
    for c2 in 0..nf {
        for c1 in 0..nf {
            let fmap = fine.element_dofs(c1, c2);
            let cmap = coarse.element_dofs(c1 / 2, c2 / 2);
            for j in 0..n1 {
                for i in 0..n1 {
                    let Some(g) = fmap[j * n1 + i] else { continue };
                    if done[g] {
                        continue;
                    }
                    done[g] = true;
                    let wx = basis.eval(((c1 % 2) as f64 + nodes[i]) / 2.0);
                    let wy = basis.eval(((c2 % 2) as f64 + nodes[j]) / 2.0);
                    for (q, cq) in cmap.iter().enumerate() {
                        if let Some(c) = *cq {
                            let w = wx[q % n1] * wy[q / n1];
                            if w.abs() > 1e-15 {
                                b.push(g, c, w);
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(b.build())
}

/// Prolongation and restriction between two consecutive levels.
#[derive(Debug, Clone)]
pub struct LevelTransfer {
    pub p: CsrMatrix,
    pub r: CsrMatrix,
    pub split: Option<FaceSplit>,
    pub pb: Option<CsrMatrix>,
}

/// `P = [-K_II^{-1} K_IB P_B; P_B]`, computed coarse cell by coarse cell.
pub fn build_dtn_prolongation(
    fine: &TraceSystem,
    split: FaceSplit,
    pb: CsrMatrix,
) -> Result<LevelTransfer> {
    let k = &fine.matrix;
    let ncoarse = pb.ncols();
    let mut b = TripletBuilder::new(fine.len(), ncoarse);
    for g in 0..fine.len() {
        if split.on_boundary[g] {
            let (cols, vals) = pb.row(g);
            for (&c, &v) in cols.iter().zip(vals) {
                b.push(g, c, v);
            }
        }
    }
    let nc = fine.dofs.level().n / 2;
    for (cell, interior) in split.interior_by_cell.iter().enumerate() {
        if interior.is_empty() {
            continue;
        }
        let bcols: Vec<usize> = interior
            .iter()
            .flat_map(|&i| k.row(i).0.iter().copied())
            .filter(|&j| split.on_boundary[j])
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let ccols: Vec<usize> = bcols
            .iter()
            .flat_map(|&j| pb.row(j).0.iter().copied())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let kii = k.select_dense(interior, interior);
        let kib = k.select_dense(interior, &bcols);
        let pbl = pb.select_dense(&bcols, &ccols);
        let lu = LuFactor::new(&kii).map_err(|_| Error::SingularElement(cell % nc, cell / nc))?;
        let rhs: RMatrix = kib.matmul(&pbl);
        let x = lu.solve_matrix(&rhs);
        for (a, &g) in interior.iter().enumerate() {
            for (c, &col) in ccols.iter().enumerate() {
                let v = -x[(a, c)];
                if v != 0.0 {
                    b.push(g, col, v);
                }
            }
        }
    }
    let p = b.build();
    let r = p.transpose();
    Ok(LevelTransfer {
        p,
        r,
        split: Some(split),
        pb: Some(pb),
    })
}

/// Transfer for any method: DtN for HDG/EDG, interpolation for CG.
pub fn build_transfer(fine: &TraceSystem, coarse: &DofMap) -> Result<LevelTransfer> {
    match fine.method() {
        Method::Cg => {
            let p = build_cg_interpolation(&fine.dofs, coarse)?;
            let r = p.transpose();
            Ok(LevelTransfer {
                p,
                r,
                split: None,
                pb: None,
            })
        }
        _ => {
            let pb = build_pb(&fine.dofs, coarse)?;
            build_dtn_prolongation(fine, FaceSplit::new(&fine.dofs), pb)
        }
    }
}

/// `K_H = R K_h P`, symmetrized.
pub fn galerkin_coarse(
    fine: &TraceSystem,
    transfer: &LevelTransfer,
    coarse: &DofMap,
) -> Result<TraceSystem> {
    if transfer.p.nrows() != fine.len() || transfer.p.ncols() != coarse.len() {
        return Err(Error::DimensionMismatch {
            expected: coarse.len(),
            actual: transfer.p.ncols(),
        });
    }
    let kh = transfer.r.matmul(&fine.matrix.matmul(&transfer.p));
    let kt = kh.transpose();
    let mut b = TripletBuilder::with_capacity(kh.nrows(), kh.ncols(), 2 * kh.nnz());
    for i in 0..kh.nrows() {
        for (m, half) in [(&kh, 0.5), (&kt, 0.5)] {
            let (cols, vals) = m.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                b.push(i, j, half * v);
            }
        }
    }
    TraceSystem::from_matrix(coarse.clone(), b.build(), fine.penalty)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::gauss_legendre;
    use crate::discretization::{assemble_trace_system, default_penalty, PoissonProblem};
    use crate::linalg::sparse::dot;
    use crate::mesh::{build_dof_map, BoundaryMode, MeshLevel};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pair(n: usize, method: Method, k: usize, boundary: BoundaryMode) -> (TraceSystem, DofMap) {
        let fine = MeshLevel::new(n, boundary).unwrap();
        let dofs = build_dof_map(fine, method, k).unwrap();
        let sys = assemble_trace_system(&dofs, &PoissonProblem::homogeneous(), default_penalty(k))
            .unwrap();
        let coarse = build_dof_map(fine.coarsen().unwrap(), method, k).unwrap();
        (sys, coarse)
    }

    fn random_vec(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    #[test]
    fn rejects_mismatched_levels() {
        let a = build_dof_map(
            MeshLevel::new(8, BoundaryMode::Dirichlet).unwrap(),
            Method::Hdg,
            1,
        )
        .unwrap();
        let b = build_dof_map(
            MeshLevel::new(2, BoundaryMode::Dirichlet).unwrap(),
            Method::Hdg,
            1,
        )
        .unwrap();
        assert!(build_pb(&a, &b).is_err());
    }

    #[test]
    fn constants_are_preserved() {
        for method in Method::ALL {
            for k in 1..=3 {
                let (fine, coarse) = pair(8, method, k, BoundaryMode::Periodic);
                let t = build_transfer(&fine, &coarse).unwrap();
                let y = t.p.matvec(&vec![1.0; coarse.len()]);
                assert!(y.iter().all(|v| (v - 1.0).abs() < 1e-11), "{method} k={k}");
                if let Some(pb) = &t.pb {
                    let split = t.split.as_ref().unwrap();
                    let z = pb.matvec(&vec![1.0; coarse.len()]);
                    for g in split.boundary() {
                        assert!((z[g] - 1.0).abs() < 1e-13);
                    }
                }
            }
        }
    }

    /// Face-wise `L2` projection with an explicit mass matrix.
    #[test]
    fn pb_matches_mass_matrix_projection() {
        for k in 1..=3 {
            let basis = Lagrange1d::equispaced(k);
            let (q, w) = gauss_legendre(k + 2);
            let coarse_vals = random_vec(k + 1, k as u64);
            let coarse_at = |s: f64| {
                basis
                    .eval(s)
                    .iter()
                    .zip(&coarse_vals)
                    .map(|(a, b)| a * b)
                    .sum::<f64>()
            };
            for child in 0..2 {
                let m = RMatrix::from_fn(k + 1, k + 1, |i, j| {
                    q.iter()
                        .zip(&w)
                        .map(|(&t, &wt)| wt * basis.eval(t)[i] * basis.eval(t)[j])
                        .sum()
                });
                let rhs: Vec<f64> = (0..=k)
                    .map(|i| {
                        q.iter()
                            .zip(&w)
                            .map(|(&t, &wt)| {
                                wt * basis.eval(t)[i] * coarse_at((child as f64 + t) / 2.0)
                            })
                            .sum()
                    })
                    .collect();
                let proj = crate::linalg::lu_solve(&m, &rhs).unwrap();
                for (i, &t) in basis.nodes().iter().enumerate() {
                    assert!((proj[i] - coarse_at((child as f64 + t) / 2.0)).abs() < 1e-12);
                }
            }
            // and the assembled operator on an actual face
            let (fine, coarse) = pair(4, Method::Hdg, k, BoundaryMode::Periodic);
            let pb = build_pb(&fine.dofs, &coarse).unwrap();
            let v = random_vec(coarse.len(), 40 + k as u64);
            let fv = pb.matvec(&v);
            let cvals: Vec<f64> = (0..=k)
                .map(|j| v[coarse.face_node(Orientation::Horizontal, 1, 1, j).unwrap()])
                .collect();
            for child in 0..2 {
                for (i, &t) in basis.nodes().iter().enumerate() {
                    let g = fine
                        .dofs
                        .face_node(Orientation::Horizontal, 2 + child, 2, i)
                        .unwrap();
                    let s = (child as f64 + t) / 2.0;
                    let expect: f64 = basis.eval(s).iter().zip(&cvals).map(|(a, b)| a * b).sum();
                    assert!((fv[g] - expect).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn interior_rows_match_global_schur_oracle() {
        for method in [Method::Hdg, Method::Edg] {
            for k in 1..=3 {
                let (fine, coarse) = pair(4, method, k, BoundaryMode::Dirichlet);
                let t = build_transfer(&fine, &coarse).unwrap();
                let split = t.split.as_ref().unwrap();
                let (ib, bb) = (split.interior(), split.boundary());
                let kd = fine.matrix.to_dense();
                let pbd = t.pb.as_ref().unwrap().to_dense();
                let all: Vec<usize> = (0..coarse.len()).collect();
                let kii = kd.select(&ib, &ib);
                let kib = kd.select(&ib, &bb);
                let oracle = LuFactor::new(&kii)
                    .unwrap()
                    .solve_matrix(&kib.matmul(&pbd.select(&bb, &all)))
                    .scale(-1.0);
                let pd = t.p.to_dense().select(&ib, &all);
                assert!(pd.sub(&oracle).max_abs() < 1e-10, "{method} k={k}");
            }
        }
    }

    #[test]
    fn prolongation_is_local() {
        for method in Method::ALL {
            let (fine, coarse) = pair(8, method, 2, BoundaryMode::Dirichlet);
            let t = build_transfer(&fine, &coarse).unwrap();
            let nc = coarse.level().n;
            for g in 0..fine.len() {
                let (x, y) = fine.dofs.position2(g);
                // coarse cells whose closure contains the fine unknown (units of 4 half fine widths)
                let mut allowed = BTreeSet::new();
                for c2 in 0..nc as i64 {
                    for c1 in 0..nc as i64 {
                        if (4 * c1..=4 * c1 + 4).contains(&x) && (4 * c2..=4 * c2 + 4).contains(&y)
                        {
                            allowed.extend(
                                coarse
                                    .element_dofs(c1 as usize, c2 as usize)
                                    .into_iter()
                                    .flatten(),
                            );
                        }
                    }
                }
                for &c in t.p.row(g).0 {
                    assert!(
                        allowed.contains(&c),
                        "{method}: fine {g} couples to coarse {c}"
                    );
                }
            }
        }
    }

    #[test]
    fn galerkin_matches_dense_triple_product() {
        for method in Method::ALL {
            let (fine, coarse) = pair(8, method, 2, BoundaryMode::Dirichlet);
            let t = build_transfer(&fine, &coarse).unwrap();
            let kh = galerkin_coarse(&fine, &t, &coarse).unwrap();
            let pd = t.p.to_dense();
            let oracle = pd.transpose().matmul(&fine.matrix.to_dense()).matmul(&pd);
            assert!(
                kh.matrix.to_dense().sub(&oracle).max_abs() < 1e-10 * oracle.max_abs().max(1.0)
            );
            assert!(kh.matrix.symmetry_defect() <= 1e-12 * kh.matrix.max_abs());
            assert_eq!(t.r, t.p.transpose());
        }
    }

    #[test]
    fn energy_identity_and_kernel() {
        for method in Method::ALL {
            for k in 1..=3 {
                let (fine, coarse) = pair(8, method, k, BoundaryMode::Dirichlet);
                let t = build_transfer(&fine, &coarse).unwrap();
                let kh = galerkin_coarse(&fine, &t, &coarse).unwrap();
                for seed in 0..5 {
                    let v = random_vec(coarse.len(), seed);
                    let pv = t.p.matvec(&v);
                    let e_f = dot(&pv, &fine.matrix.matvec(&pv));
                    let e_c = dot(&v, &kh.matrix.matvec(&v));
                    assert!((e_f - e_c).abs() <= 1e-10 * e_f.abs());
                }
                let (pf, pc) = pair(8, method, k, BoundaryMode::Periodic);
                let pt = build_transfer(&pf, &pc).unwrap();
                let pk = galerkin_coarse(&pf, &pt, &pc).unwrap();
                let r = pk.matrix.matvec(&vec![1.0; pc.len()]);
                assert!(r.iter().all(|v| v.abs() < 1e-10), "{method} k={k}");
            }
        }
    }

    #[test]
    fn coarse_grid_correction_is_projection() {
        for method in Method::ALL {
            let (fine, coarse) = pair(4, method, 2, BoundaryMode::Dirichlet);
            let t = build_transfer(&fine, &coarse).unwrap();
            let kh = galerkin_coarse(&fine, &t, &coarse).unwrap();
            let kd = fine.matrix.to_dense();
            let pd = t.p.to_dense();
            let khinv = LuFactor::new(&kh.matrix.to_dense()).unwrap().inverse();
            let cgc = RMatrix::identity(fine.len())
                .sub(&pd.matmul(&khinv).matmul(&pd.transpose()).matmul(&kd));
            assert!(cgc.matmul(&cgc).sub(&cgc).max_abs() < 1e-10);
        }
    }
}
