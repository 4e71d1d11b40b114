use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::equilibria::WeightSet;

/// Constant of the improved Poincaré inequality,
/// `κ = λ_M (1 - c2) / (λ_M + c1)`.
pub fn improved_poincare_constant(lambda_big_m: f64, c1: f64, c2: f64) -> f64 {
    lambda_big_m * (1.0 - c2) / (lambda_big_m + c1)
}

/// `(‖∇u‖₁², ‖u ∇w1/w0‖₀²)` with face differences and geometric-mean face weights.
pub fn improved_poincare_terms(weights: &WeightSet, u: &[f64]) -> (f64, f64) {
    let n = u.len();
    let dx = weights.dx;
    let w1sq: Vec<f64> = weights.w1.iter().map(|w| w * w).collect();
    let mut lhs = 0.0;
    for i in 0..n - 1 {
        lhs += (w1sq[i] * w1sq[i + 1]).sqrt() * ((u[i + 1] - u[i]) / dx).powi(2) * dx;
    }
    let ratio = weights.drift_ratio();
    let rhs = dx * (0..n).map(|i| (u[i] * ratio[i] * weights.w0[i]).powi(2)).sum::<f64>();
    (lhs, rhs)
}

/// Removes the `ρ_F`-weighted mean of `u`.
pub fn remove_weighted_mean(u: &mut [f64], rho: &[f64]) {
    let total: f64 = rho.iter().sum();
    let mean = u.iter().zip(rho).map(|(a, r)| a * r).sum::<f64>() / total;
    u.iter_mut().for_each(|x| *x -= mean);
}

/// Solves `w0² u - ∂x(w1² ∂x u) = w0² u_f` with no-flux ends.
pub fn solve_weighted_elliptic(weights: &WeightSet, u_f: &[f64]) -> Vec<f64> {
    let n = u_f.len();
    let dx2 = weights.dx * weights.dx;
    let w0sq: Vec<f64> = weights.w0.iter().map(|w| w * w).collect();
    let w1sq: Vec<f64> = weights.w1.iter().map(|w| w * w).collect();
    let face: Vec<f64> = (0..n - 1).map(|i| (w1sq[i] * w1sq[i + 1]).sqrt() / dx2).collect();
    let mut diag = w0sq.clone();
    for i in 0..n - 1 {
        diag[i] += face[i];
        diag[i + 1] += face[i];
    }
    let rhs: Vec<f64> = (0..n).map(|i| w0sq[i] * u_f[i]).collect();
    thomas(&diag, &face.iter().map(|f| -f).collect::<Vec<_>>(), &rhs)
}

/// Symmetric tridiagonal solve.
pub fn thomas(diag: &[f64], off: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut m = diag[0];
    c[0] = if n > 1 { off[0] / m } else { 0.0 };
    d[0] = rhs[0] / m;
    for i in 1..n {
        m = diag[i] - off[i - 1] * c[i - 1];
        if i + 1 < n {
            c[i] = off[i] / m;
        }
        d[i] = (rhs[i] - off[i - 1] * d[i - 1]) / m;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

/// Largest observed `‖∂x² u‖₂ / ‖u_f‖₀` over `samples` seeded random
/// right-hand sides, each smoothed by one pass of the elliptic solve so that
/// the ratio reflects the operator rather than grid-scale noise.
pub fn elliptic_regularity_constant(weights: &WeightSet, samples: usize, seed: u64) -> f64 {
    let n = weights.x.len();
    let dx = weights.dx;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let noise: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let u_f = solve_weighted_elliptic(weights, &noise);
        let u = solve_weighted_elliptic(weights, &u_f);
        let mut num = 0.0;
        for i in 1..n - 1 {
            let d2 = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / (dx * dx);
            num += (d2 * weights.w2[i]).powi(2) * dx;
        }
        let den = weights.norm_sq(&u_f, 0);
        if den > 0.0 {
            worst = worst.max((num / den).sqrt());
        }
    }
    worst
}
