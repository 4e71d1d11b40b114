use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{numerical, Result};
use crate::operators::OperatorSet;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for PowerOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 10_000, seed: 7 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct AuxiliaryNorms {
    /// `‖AT(1-Π)‖`
    pub at_perp: f64,
    /// `‖AL‖`
    pub al: f64,
    pub c_m: f64,
    pub iterations: [usize; 2],
}

/// Largest eigenvalue of a symmetric positive semidefinite action by power
/// iteration on the Rayleigh quotient.
pub fn power_iteration(
    apply: impl Fn(&[f64]) -> Vec<f64>,
    n: usize,
    options: PowerOptions,
    origin: &'static str,
) -> Result<(f64, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    normalize(&mut x);
    let mut history = Vec::new();
    let mut previous = f64::NAN;
    for it in 1..=options.max_iter {
        let mut y = apply(&x);
        let rq: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        history.push(rq);
        let norm = normalize(&mut y);
        if norm == 0.0 {
            return Ok((0.0, it));
        }
        if (rq - previous).abs() <= options.tol * rq.abs() {
            return Ok((rq, it));
        }
        previous = rq;
        x = y;
    }
    let tail: Vec<String> = history.iter().rev().take(5).map(|v| format!("{v:.12e}")).collect();
    Err(numerical(
        origin,
        format!("power iteration did not converge in {} steps; last Rayleigh quotients {}", options.max_iter, tail.join(", ")),
    ))
}

fn normalize(x: &mut [f64]) -> f64 {
    let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if n > 0.0 {
        x.iter_mut().for_each(|v| *v /= n);
    }
    n
}

/// Operator norms of `AT(1-Π)` and `AL` and their sum `C_M`.
///
/// Both operators map into the local equilibria, so their norms are the
/// square roots of the largest eigenvalues of `XXᵀ` restricted to the
/// `n_x`-dimensional coefficient space:
/// `S Bᵀ Yᵀ T(1-Π)Tᵀ Y B S` for the first and `|Lᵀy|² S BᵀB S` for the second.
pub fn auxiliary_norms(ops: &OperatorSet, options: PowerOptions) -> Result<AuxiliaryNorms> {
    const ORIGIN: &str = "spectral::auxiliary_norms";
    let aux = &ops.aux;
    let n = ops.n_x();
    let at_perp_gram = |c: &[f64]| -> Vec<f64> {
        let h = aux.extend_flux(&aux.apply_b(&aux.solve_s(c)));
        let th: Vec<f64> = ops.apply_t(&h).iter().map(|x| -x).collect();
        let perp = ops.project_perp(&th);
        let back = ops.apply_t(&perp);
        aux.solve_s(&aux.apply_bt(&aux.flux_moment(&back)))
    };
    let (lam1, it1) = power_iteration(at_perp_gram, n, options, ORIGIN)?;

    let y = nalgebra::DVector::from_column_slice(&aux.y);
    let z_norm = (ops.collision.matrix.transpose() * y).norm();
    let sbbs = |c: &[f64]| -> Vec<f64> {
        let s = aux.solve_s(c);
        aux.solve_s(&aux.apply_bt(&aux.apply_b(&s)))
    };
    let (lam2, it2) = power_iteration(sbbs, n, options, ORIGIN)?;
    let at_perp = lam1.max(0.0).sqrt();
    let al = z_norm * lam2.max(0.0).sqrt();
    Ok(AuxiliaryNorms { at_perp, al, c_m: at_perp + al, iterations: [it1, it2] })
}
