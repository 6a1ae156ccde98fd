//! WebAssembly bindings behind `www/index.html`.
//!
//! Every export takes plain numbers and strings and returns flat arrays, so
//! the page needs no glue beyond the generated module.

use tracemg::lfa::{operator_stencils, LfaConfig, LfaModel, OmegaRange, PreparedLfa};
use tracemg::{Method, SmootherKind};
use wasm_bindgen::prelude::*;

fn prepare(
    method: &str,
    k: usize,
    smoother: &str,
    samples: usize,
    nu1: usize,
    nu2: usize,
) -> Result<PreparedLfa, String> {
    let method: Method = method.parse().map_err(|e: tracemg::Error| e.to_string())?;
    let smoother: SmootherKind = smoother
        .parse()
        .map_err(|e: tracemg::Error| e.to_string())?;
    let cfg = LfaConfig {
        samples,
        nu1,
        nu2,
        ..LfaConfig::default()
    };
    LfaModel::new(method, k, smoother)
        .and_then(|m| m.prepared(&cfg))
        .map_err(|e| e.to_string())
}

/// `rho_asp` along `lo..=hi`, returned as interleaved `[omega, rho, ...]`.
#[allow(clippy::too_many_arguments)]
#[wasm_bindgen]
pub fn rho_vs_omega(
    method: &str,
    k: usize,
    smoother: &str,
    lo: f64,
    hi: f64,
    step: f64,
    samples: usize,
    nu1: usize,
    nu2: usize,
) -> Result<Vec<f64>, String> {
    let range = OmegaRange { lo, hi, step };
    range.validate().map_err(|e| e.to_string())?;
    let p = prepare(method, k, smoother, samples, nu1, nu2)?;
    let omegas = range.values();
    let rhos = p.rho_curve(&omegas).map_err(|e| e.to_string())?;
    Ok(omegas
        .into_iter()
        .zip(rhos)
        .flat_map(|(w, r)| [w, r])
        .collect())
}

/// Two-grid spectral radius on a `samples x samples` frequency grid over
/// `[-pi/2, pi/2)^2`, row-major with `theta_2` as the row.
#[wasm_bindgen]
pub fn spectral_map(
    method: &str,
    k: usize,
    smoother: &str,
    omega: f64,
    samples: usize,
    nu1: usize,
    nu2: usize,
) -> Result<Vec<f64>, String> {
    prepare(method, k, smoother, samples, nu1, nu2)?
        .rho_map(omega)
        .map_err(|e| e.to_string())
}

/// Operator stencils as `<target> <source> <2*k1> <2*k2> <value>` lines.
#[wasm_bindgen]
pub fn stencil_dump(method: &str, k: usize) -> Result<String, String> {
    let method: Method = method.parse().map_err(|e: tracemg::Error| e.to_string())?;
    let s = operator_stencils(method, k).map_err(|e| e.to_string())?;
    let mut out = Vec::new();
    s.write_dump(&mut out).map_err(|e| e.to_string())?;
    String::from_utf8(out).map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curve_is_interleaved() {
        let c = rho_vs_omega("hdg", 1, "vw", 0.9, 1.0, 0.05, 8, 1, 0).unwrap();
        assert_eq!(c.len(), 6);
        assert_eq!(c[0], 0.9);
        assert!(c.iter().skip(1).step_by(2).all(|&r| r > 0.0 && r < 1.0));
    }

    #[test]
    fn map_has_one_value_per_frequency() {
        let m = spectral_map("cg", 1, "jac", 0.89, 6, 1, 0).unwrap();
        assert_eq!(m.len(), 36);
        let max = m.iter().cloned().fold(0.0, f64::max);
        assert!((max - 0.333).abs() < 0.02, "{max}");
    }

    #[test]
    fn dump_lists_q1_stencil() {
        let d = stencil_dump("cg", 1).unwrap();
        assert_eq!(d.lines().count(), 9);
    }

    #[test]
    fn bad_input_is_an_error() {
        assert!(rho_vs_omega("dg", 1, "vw", 0.9, 1.0, 0.05, 4, 1, 0).is_err());
        assert!(spectral_map("cg", 0, "vw", 0.9, 4, 1, 0).is_err());
        assert!(stencil_dump("cg", 0).is_err());
    }
}
