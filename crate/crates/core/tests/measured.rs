use tracemg::discretization::{assemble_trace_system, default_penalty};
use tracemg::mesh::build_dof_map;
use tracemg::multigrid::{measure_rho, MeasureOptions};
use tracemg::{
    BoundaryMode, CycleType, MeshLevel, Method, MgConfig, MgHierarchy, PoissonProblem,
    SmootherKind, VankaFlavor,
};

fn hierarchy(n: usize, method: Method, k: usize, config: MgConfig) -> MgHierarchy {
    let dofs = build_dof_map(
        MeshLevel::new(n, BoundaryMode::Dirichlet).unwrap(),
        method,
        k,
    )
    .unwrap();
    let sys =
        assemble_trace_system(&dofs, &PoissonProblem::homogeneous(), default_penalty(k)).unwrap();
    MgHierarchy::new(sys, config).unwrap()
}

#[test]
fn hdg_k1_vertex_patch_two_grid() {
    let vw = SmootherKind::Vanka(VankaFlavor::VertexWise);
    let h = hierarchy(32, Method::Hdg, 1, MgConfig::two_grid(vw, 0.96, 1, 0));
    let r = measure_rho(&h, 0, &MeasureOptions::default()).unwrap();
    assert!(r.converged);
    assert!((r.rho_last - 0.396).abs() < 0.02, "{}", r.rho_last);
}

#[test]
fn v_cycle_converges_for_every_method() {
    for method in Method::ALL {
        let flavor = if method == Method::Hdg {
            VankaFlavor::VertexWise
        } else {
            VankaFlavor::ElementWise
        };
        let smoother = SmootherKind::Vanka(flavor);
        let config = MgConfig {
            smoother,
            omega: 0.96,
            nu1: 1,
            nu2: 1,
            cycle: CycleType::V,
            levels: 3,
        };
        let h = hierarchy(16, method, 2, config);
        let r = measure_rho(&h, 1, &MeasureOptions::default()).unwrap();
        assert!(r.converged && r.rho_last < 0.4, "{method}: {r:?}");
    }
}

#[test]
fn seeds_are_reproducible() {
    let h = hierarchy(
        8,
        Method::Cg,
        1,
        MgConfig::two_grid(SmootherKind::Jacobi, 0.89, 1, 0),
    );
    let a = measure_rho(&h, 7, &MeasureOptions::default()).unwrap();
    let b = measure_rho(&h, 7, &MeasureOptions::default()).unwrap();
    assert_eq!(a.residual_history, b.residual_history);
}

#[test]
fn too_many_levels_are_rejected() {
    let dofs = build_dof_map(
        MeshLevel::new(4, BoundaryMode::Dirichlet).unwrap(),
        Method::Cg,
        1,
    )
    .unwrap();
    let sys =
        assemble_trace_system(&dofs, &PoissonProblem::homogeneous(), default_penalty(1)).unwrap();
    let config = MgConfig {
        levels: 5,
        ..MgConfig::two_grid(SmootherKind::Jacobi, 0.89, 1, 0)
    };
    assert!(MgHierarchy::new(sys, config).is_err());
}
