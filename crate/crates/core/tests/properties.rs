use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tracemg::discretization::{assemble_trace_system, default_penalty};
use tracemg::lfa::operator_stencils;
use tracemg::lfa::oracle::aliasing_defect;
use tracemg::mesh::build_dof_map;
use tracemg::smoothers::build_vanka_patches;
use tracemg::{
    BoundaryMode, MeshLevel, Method, PoissonProblem, Smoother, SmootherKind, TraceSystem,
    VankaFlavor,
};

fn method() -> impl Strategy<Value = Method> {
    prop::sample::select(Method::ALL.to_vec())
}

fn flavor() -> impl Strategy<Value = VankaFlavor> {
    prop::sample::select(vec![
        VankaFlavor::VertexWise,
        VankaFlavor::ElementWise,
        VankaFlavor::LtVertexWise,
        VankaFlavor::LtElementWise,
    ])
}

fn smoother() -> impl Strategy<Value = SmootherKind> {
    prop::sample::select(SmootherKind::ALL.to_vec())
}

fn boundary() -> impl Strategy<Value = BoundaryMode> {
    prop::sample::select(vec![BoundaryMode::Dirichlet, BoundaryMode::Periodic])
}

fn system(n: usize, boundary: BoundaryMode, method: Method, k: usize) -> TraceSystem {
    let dofs = build_dof_map(MeshLevel::new(n, boundary).unwrap(), method, k).unwrap();
    assemble_trace_system(&dofs, &PoissonProblem::homogeneous(), default_penalty(k)).unwrap()
}

fn theta() -> impl Strategy<Value = [f64; 2]> {
    [
        -std::f64::consts::PI..std::f64::consts::PI,
        -std::f64::consts::PI..std::f64::consts::PI,
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn vanka_weights_partition_unity(
        m in method(), k in 1usize..=3, f in flavor(), b in boundary(), n in prop::sample::select(vec![2usize, 4]),
    ) {
        let sys = system(n, b, m, k);
        let patches = build_vanka_patches(&sys, f).unwrap();
        for s in patches.weight_sums(sys.len()) {
            prop_assert!((s - 1.0).abs() <= 1e-14);
        }
    }

    #[test]
    fn zero_damping_is_identity(m in method(), k in 1usize..=2, s in smoother(), seed in any::<u64>()) {
        let sys = system(4, BoundaryMode::Dirichlet, m, k);
        let sm = Smoother::new(&sys, s, 0.0).unwrap();
        let x = tracemg::multigrid::random_initial_guess(sys.len(), seed);
        let b = tracemg::multigrid::random_initial_guess(sys.len(), seed ^ 1);
        prop_assert_eq!(sm.apply_sweep(&sys.matrix, &x, &b).unwrap(), x);
    }

    #[test]
    fn symbols_are_hermitian(m in method(), k in 1usize..=3, t in theta()) {
        let sym = operator_stencils(m, k).unwrap().symbol(t);
        for i in 0..sym.rows() {
            for j in 0..sym.cols() {
                prop_assert!((sym[(i, j)] - sym[(j, i)].conj()).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn symbols_satisfy_aliasing_identity(m in method(), k in 1usize..=3, t in theta()) {
        let s = operator_stencils(m, k).unwrap();
        prop_assert!(aliasing_defect(&s, t) < 1e-12);
    }

    #[test]
    fn sweep_matches_dense_error_operator(
        m in method(), k in 1usize..=2, s in smoother(), omega in 0.5f64..1.5, seed in any::<u64>(),
    ) {
        let sys = system(4, BoundaryMode::Dirichlet, m, k);
        let sm = Smoother::new(&sys, s, omega).unwrap();
        let dense = sm.error_propagation_matrix(&sys.matrix).unwrap();
        let e = tracemg::multigrid::random_initial_guess(sys.len(), seed);
        let zero = vec![0.0; sys.len()];
        let swept = sm.apply_sweep(&sys.matrix, &e, &zero).unwrap();
        let expected = dense.matvec(&e);
        let scale = e.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        for (a, b) in swept.iter().zip(expected) {
            prop_assert!((a - b).abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn additive_patches_ignore_order(
        m in method(), k in 1usize..=3, f in prop::sample::select(vec![VankaFlavor::VertexWise, VankaFlavor::ElementWise]),
        perm_seed in any::<u64>(),
    ) {
        let sys = system(4, BoundaryMode::Dirichlet, m, k);
        let patches = build_vanka_patches(&sys, f).unwrap();
        let r = tracemg::multigrid::random_initial_guess(sys.len(), perm_seed);
        let count = patches.patches.len();
        let mut order: Vec<usize> = (0..count).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(perm_seed));
        let a = patches.apply(&r);
        let b = patches.apply_in_order(&r, order.into_iter());
        let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (x, y) in a.iter().zip(b) {
            prop_assert!((x - y).abs() <= 1e-12 * scale.max(1.0));
        }
    }
}
