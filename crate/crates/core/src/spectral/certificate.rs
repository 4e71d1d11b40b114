use std::collections::BTreeMap;

use crate::error::{domain, Error, Result};
use crate::operators::OperatorSet;
use crate::spectral::gaps::{kinetic_macroscopic_gap, microscopic_gap};
use crate::spectral::norms::{auxiliary_norms, AuxiliaryNorms, PowerOptions};
use crate::spectral::optimize::golden_section_max;

/// Decay certificate `‖f(t)‖ ≤ C e^{-λt} ‖f(0)‖`.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct RateCertificate {
    pub lambda_m: f64,
    #[serde(rename = "lambda_M")]
    pub lambda_big_m: f64,
    #[serde(rename = "C_M")]
    pub c_m: f64,
    pub eps_star: f64,
    pub delta_star: f64,
    pub kappa: f64,
    pub lambda: f64,
    #[serde(rename = "C")]
    pub prefactor: f64,
    pub provenance: BTreeMap<String, String>,
}

/// Coercivity of the entropy dissipation for given `(ε, δ)`.
pub fn kappa(lambda_m: f64, lambda_big_m: f64, c_m: f64, eps: f64, delta: f64) -> f64 {
    let first = lambda_m - eps * (1.0 + c_m) * (1.0 + 1.0 / (2.0 * delta));
    let second = eps * (lambda_big_m / (1.0 + lambda_big_m) - (1.0 + c_m) * delta / 2.0);
    first.min(second)
}

/// Maximizes `κ(ε, δ)` by nested golden-section search, `δ` outside and `ε` inside.
pub fn rate_from_constants(lambda_m: f64, lambda_big_m: f64, c_m: f64) -> Result<RateCertificate> {
    const ORIGIN: &str = "spectral::rate_from_constants";
    if !(lambda_m > 0.0 && lambda_big_m > 0.0 && c_m >= 0.0) || ![lambda_m, lambda_big_m, c_m].iter().all(|x| x.is_finite()) {
        return Err(domain(
            ORIGIN,
            format!("constants must be positive and finite (λ_m = {lambda_m}, λ_M = {lambda_big_m}, C_M = {c_m})"),
        ));
    }
    let tol = 1e-10;
    let delta_max = 2.0 * lambda_big_m / ((1.0 + lambda_big_m) * (1.0 + c_m));
    let eps_max = 1.0 - 1e-9;
    let best_eps = |delta: f64| golden_section_max(|e| kappa(lambda_m, lambda_big_m, c_m, e, delta), 0.0, eps_max, tol);
    let (delta_star, _) = golden_section_max(|d| best_eps(d).1, 0.0, delta_max, tol * delta_max);
    let (eps_star, kappa_star) = best_eps(delta_star);
    if !(kappa_star > 0.0 && eps_star > 0.0) {
        return Err(Error::Certificate { origin: ORIGIN, msg: format!("no positive κ found (best {kappa_star:.3e})") });
    }
    let mut provenance = BTreeMap::new();
    provenance.insert("eps_delta".into(), "nested golden-section maximization of κ".into());
    Ok(RateCertificate {
        lambda_m,
        lambda_big_m,
        c_m,
        eps_star,
        delta_star,
        kappa: kappa_star,
        lambda: kappa_star / (1.0 + eps_star),
        prefactor: ((1.0 + eps_star) / (1.0 - eps_star)).sqrt(),
        provenance,
    })
}

/// Computes all three constants from the assembled operators and certifies the rate.
pub fn certify(ops: &OperatorSet, power: PowerOptions) -> Result<(RateCertificate, AuxiliaryNorms)> {
    let lambda_m = microscopic_gap(&ops.collision)?;
    let lambda_big_m = kinetic_macroscopic_gap(ops)?;
    let norms = auxiliary_norms(ops, power)?;
    let mut cert = rate_from_constants(lambda_m, lambda_big_m, norms.c_m)?;
    cert.provenance.insert("lambda_m".into(), format!("dense eigensolve of -L on the complement of local equilibria ({})", ops.collision.kind));
    cert.provenance.insert("lambda_M".into(), "|y|² λ₂(BᵀB) of the discrete transport of local equilibria".into());
    cert.provenance.insert(
        "C_M".into(),
        format!("power iteration: ‖AT(1-Π)‖ = {:.6e}, ‖AL‖ = {:.6e}", norms.at_perp, norms.al),
    );
    Ok((cert, norms))
}
