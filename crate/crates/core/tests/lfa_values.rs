use tracemg::lfa::{LfaConfig, LfaModel, OmegaRange};
use tracemg::{Method, SmootherKind, VankaFlavor};

const VW: SmootherKind = SmootherKind::Vanka(VankaFlavor::VertexWise);

fn rho(method: Method, k: usize, s: SmootherKind, omega: f64, nu1: usize, nu2: usize) -> f64 {
    let cfg = LfaConfig::with_sweeps(nu1, nu2);
    LfaModel::new(method, k, s)
        .unwrap()
        .prepared(&cfg)
        .unwrap()
        .rho_asp(omega)
        .unwrap()
        .rho
}

#[test]
fn q1_jacobi() {
    assert!((rho(Method::Cg, 1, SmootherKind::Jacobi, 0.89, 1, 0) - 0.333).abs() < 0.005);
}

#[test]
fn hdg_k1_vertex_patches() {
    assert!((rho(Method::Hdg, 1, VW, 0.96, 1, 0) - 0.403).abs() < 0.005);
}

#[test]
fn cg_k2_vertex_patches() {
    assert!((rho(Method::Cg, 2, VW, 1.0, 1, 0) - 0.208).abs() < 0.005);
}

#[test]
fn q1_gauss_seidel_two_sweeps() {
    assert!((rho(Method::Cg, 1, SmootherKind::GaussSeidel, 1.02, 1, 1) - 0.079).abs() < 0.005);
}

#[test]
fn edg_coincides_with_cg_at_k1() {
    for s in [
        VW,
        SmootherKind::Vanka(VankaFlavor::ElementWise),
        SmootherKind::Jacobi,
    ] {
        let a = rho(Method::Cg, 1, s, 0.9, 1, 0);
        let b = rho(Method::Edg, 1, s, 0.9, 1, 0);
        assert!((a - b).abs() < 1e-10, "{s}: {a} vs {b}");
    }
}

#[test]
fn no_smoothing_leaves_projection() {
    for method in Method::ALL {
        let r = rho(method, 2, VW, 0.9, 0, 0);
        assert!((r - 1.0).abs() < 1e-10, "{method}: {r}");
    }
}

#[test]
fn optimum_lies_on_the_grid_and_is_minimal() {
    let cfg = LfaConfig {
        samples: 16,
        ..LfaConfig::default()
    };
    let p = LfaModel::new(Method::Hdg, 1, VW)
        .unwrap()
        .prepared(&cfg)
        .unwrap();
    let range = OmegaRange {
        lo: 0.8,
        hi: 1.1,
        step: 0.02,
    };
    let best = p.optimize(range).unwrap();
    let curve = p.rho_curve(&range.values()).unwrap();
    let min = curve.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!((best.rho - min).abs() < 1e-12);
    assert!(range.values().contains(&best.omega));
}

#[test]
fn invalid_inputs_are_rejected() {
    assert!(LfaModel::new(Method::Cg, 0, VW).is_err());
    assert!(OmegaRange {
        lo: 1.2,
        hi: 0.8,
        step: 0.02
    }
    .validate()
    .is_err());
    assert!(OmegaRange {
        lo: 0.8,
        hi: 1.2,
        step: 0.0
    }
    .validate()
    .is_err());
}
