//! Two-velocity Cattaneo model reduced to Fourier modes:
//! `dU_k/dt + T_k U_k = L U_k` with `U_k = (u_k, v_k)`.

use nalgebra::{Complex, Matrix2, Vector2};
use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::simulator::fit::{fit_decay_rate, DecayFit};

/// Largest `dt · |λ|` accepted by the classical Runge–Kutta step on the
/// imaginary axis (its stability limit is `2√2`).
pub const RK4_STABILITY: f64 = 2.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeState {
    pub k: i64,
    pub u: f64,
    pub v: f64,
    pub t: f64,
}

/// `(T_k, L)` with `T_k = [[0, -k], [k, 0]]` and `L = diag(0, -1)`.
pub fn mode_matrices(k: i64) -> (Matrix2<f64>, Matrix2<f64>) {
    let k = k as f64;
    (Matrix2::new(0.0, -k, k, 0.0), Matrix2::new(0.0, 0.0, 0.0, -1.0))
}

/// Closed-form eigenvalues of `L - T_k`.
pub fn mode_spectrum(k: i64) -> [Complex<f64>; 2] {
    if k == 0 {
        return [Complex::new(0.0, 0.0), Complex::new(-1.0, 0.0)];
    }
    let k = k as f64;
    let w = (4.0 * k * k - 1.0).sqrt() / 2.0;
    [Complex::new(-0.5, w), Complex::new(-0.5, -w)]
}

/// Eigenvalues of `L - T_k` from a general eigensolver, ordered by imaginary part descending.
pub fn computed_mode_spectrum(k: i64) -> [Complex<f64>; 2] {
    let (t, l) = mode_matrices(k);
    let ev = (l - t).complex_eigenvalues();
    let mut out = [ev[0], ev[1]];
    out.sort_by(|a, b| b.im.total_cmp(&a.im).then(b.re.total_cmp(&a.re)));
    out
}

fn check_eps(eps: f64, origin: &'static str) -> Result<()> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(domain(origin, format!("ε = {eps} must lie in (0, 1)")))
    }
}

/// `H_k = ½|U|² + ε k/(1+k²) u v`
pub fn toy_entropy(k: i64, u: [f64; 2], eps: f64) -> Result<f64> {
    check_eps(eps, "toy::toy_entropy")?;
    let kf = k as f64;
    Ok(0.5 * (u[0] * u[0] + u[1] * u[1]) + eps * kf / (1.0 + kf * kf) * u[0] * u[1])
}

/// `-dH_k/dt = ε k²/(1+k²) u² + (1 - ε k²/(1+k²)) v² + ε k/(1+k²) u v`
pub fn toy_dissipation(k: i64, u: [f64; 2], eps: f64) -> f64 {
    let kf = k as f64;
    let a = kf * kf / (1.0 + kf * kf);
    let b = kf / (1.0 + kf * kf);
    eps * a * u[0] * u[0] + (1.0 - eps * a) * u[1] * u[1] + eps * b * u[0] * u[1]
}

/// Upper end `8λ²/(8λ²+1)` of the admissible ε interval.
pub fn toy_eps_bound(lam: f64) -> f64 {
    8.0 * lam * lam / (8.0 * lam * lam + 1.0)
}

/// `κ = min{ε(1-λ²)/2, 1 - ε - ε/(8λ²)}`
pub fn toy_kappa(eps: f64, lam: f64) -> Result<f64> {
    const ORIGIN: &str = "toy::toy_kappa";
    if !(lam > 0.0 && lam < 1.0) {
        return Err(domain(ORIGIN, format!("λ = {lam} must lie in (0, 1)")));
    }
    let bound = toy_eps_bound(lam);
    if !(eps > 0.0 && eps < bound) {
        return Err(domain(ORIGIN, format!("ε = {eps} must lie in (0, 8λ²/(8λ²+1)) = (0, {bound})")));
    }
    Ok((eps * (1.0 - lam * lam) / 2.0).min(1.0 - eps - eps / (8.0 * lam * lam)))
}

/// Largest `κ/(1+ε)` over admissible `(ε, λ)`, by nested golden-section search.
pub fn toy_best_rate() -> (f64, f64, f64) {
    use crate::spectral::optimize::golden_section_max;
    let inner = |lam: f64| {
        golden_section_max(
            |e| toy_kappa(e, lam).map(|k| k / (1.0 + e)).unwrap_or(f64::NEG_INFINITY),
            1e-12,
            toy_eps_bound(lam) * (1.0 - 1e-12),
            1e-12,
        )
    };
    let (lam, rate) = golden_section_max(|l| inner(l).1, 1e-6, 1.0 - 1e-6, 1e-12);
    (inner(lam).0, lam, rate)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeSeries {
    pub k: i64,
    pub t: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub norm: Vec<f64>,
    pub entropy: Vec<f64>,
}

impl ModeSeries {
    /// Envelope decay rate of `|U_k|` on the second half of the run.
    pub fn fitted_rate(&self) -> Result<DecayFit> {
        fit_decay_rate(&self.t, &self.norm, None)
    }
}

fn rk4_step(m: &Matrix2<f64>, x: Vector2<f64>, dt: f64) -> Vector2<f64> {
    let k1 = m * x;
    let k2 = m * (x + k1 * (dt / 2.0));
    let k3 = m * (x + k2 * (dt / 2.0));
    let k4 = m * (x + k3 * dt);
    x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0)
}

/// Integrates one mode with the classical Runge–Kutta method, recording
/// every `stride`-th step.
pub fn evolve_mode(k: i64, eps: f64, t_end: f64, dt: f64, stride: usize, initial: [f64; 2]) -> Result<ModeSeries> {
    const ORIGIN: &str = "toy::evolve_toy";
    check_eps(eps, ORIGIN)?;
    if !(dt > 0.0 && t_end > 0.0) {
        return Err(domain(ORIGIN, "dt and t_end must be positive"));
    }
    let rho = (k as f64).abs().max(1.0);
    if dt * rho > RK4_STABILITY {
        return Err(domain(ORIGIN, format!("dt = {dt} exceeds the stability bound {:.3e} for k = {k}", RK4_STABILITY / rho)));
    }
    let (t_k, l) = mode_matrices(k);
    let m = l - t_k;
    let steps = (t_end / dt).round() as usize;
    let stride = stride.max(1);
    let mut x = Vector2::new(initial[0], initial[1]);
    let mut series = ModeSeries { k, t: vec![], u: vec![], v: vec![], norm: vec![], entropy: vec![] };
    let record = |n: usize, x: &Vector2<f64>, s: &mut ModeSeries| -> Result<()> {
        s.t.push(n as f64 * dt);
        s.u.push(x[0]);
        s.v.push(x[1]);
        s.norm.push(x.norm());
        s.entropy.push(toy_entropy(k, [x[0], x[1]], eps)?);
        Ok(())
    };
    record(0, &x, &mut series)?;
    for n in 1..=steps {
        let next = rk4_step(&m, x, dt);
        if !(next.norm() <= x.norm() * (1.0 + 1e-12)) {
            return Err(Error::Divergence { origin: ORIGIN, t: n as f64 * dt, last_valid: vec![x[0], x[1]] });
        }
        x = next;
        if n % stride == 0 || n == steps {
            record(n, &x, &mut series)?;
        }
    }
    Ok(series)
}

/// Evolves modes `k = 0..=k_max` concurrently from `initial(k)`.
pub fn evolve_toy(
    k_max: i64,
    eps: f64,
    t_end: f64,
    dt: f64,
    stride: usize,
    initial: impl Fn(i64) -> [f64; 2] + Sync,
) -> Result<Vec<ModeSeries>> {
    (0..=k_max).into_par_iter().map(|k| evolve_mode(k, eps, t_end, dt, stride, initial(k))).collect()
}

/// Exact solution `exp(t(L - T_k)) U` through the eigen-decomposition of the 2×2 matrix.
pub fn exact_mode(k: i64, t: f64, initial: [f64; 2]) -> [f64; 2] {
    let (t_k, l) = mode_matrices(k);
    let m = l - t_k;
    if k == 0 {
        return [initial[0], initial[1] * (-t).exp()];
    }
    // m² + m + k² = 0, so exp(tm) = e^{-t/2}(cos(ωt) I + sin(ωt)/ω (m + I/2)).
    let w = (4.0 * (k * k) as f64 - 1.0).sqrt() / 2.0;
    let x = Vector2::new(initial[0], initial[1]);
    let shifted = (m + Matrix2::identity() * 0.5) * x;
    let y = ((w * t).cos() * x + (w * t).sin() / w * shifted) * (-0.5 * t).exp();
    [y[0], y[1]]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mode_matrices_are_skew() {
        let (t0, _) = mode_matrices(0);
        assert_eq!(t0, Matrix2::zeros());
        let (t1, l) = mode_matrices(1);
        assert_eq!(t1, Matrix2::new(0.0, -1.0, 1.0, 0.0));
        assert_eq!(l, Matrix2::new(0.0, 0.0, 0.0, -1.0));
        for k in -5..=5 {
            let (t, _) = mode_matrices(k);
            assert_eq!(t + t.transpose(), Matrix2::zeros());
        }
    }

    #[test]
    fn spectrum_formula() {
        let s = mode_spectrum(1);
        assert!((s[0].im - 3f64.sqrt() / 2.0).abs() < 1e-15 && s[0].re == -0.5);
        let c = computed_mode_spectrum(0);
        assert!((c[0].re - 0.0).abs() < 1e-15 && (c[1].re + 1.0).abs() < 1e-15);
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(toy_entropy(3, [1.0, 0.0], 0.7).unwrap(), 0.5);
        assert!((toy_entropy(1, [1.0, 1.0], 0.4).unwrap() - 1.2).abs() < 1e-15);
        assert!((toy_entropy(1, [1.0, -1.0], 0.4).unwrap() - 0.8).abs() < 1e-15);
        assert!(toy_entropy(1, [1.0, 1.0], 1.0).is_err());
    }

    #[test]
    fn kappa_example_and_domain() {
        assert!((toy_kappa(0.4, 0.5).unwrap() - 0.15).abs() < 1e-15);
        let err = toy_kappa(0.7, 0.5).unwrap_err().to_string();
        assert!(err.contains("8λ²/(8λ²+1)"), "{err}");
    }

    #[test]
    fn zero_mode_decouples() {
        let s = evolve_mode(0, 0.5, 5.0, 1e-3, 100, [1.0, 1.0]).unwrap();
        for (i, t) in s.t.iter().enumerate() {
            assert!((s.u[i] - 1.0).abs() < 1e-15);
            assert!((s.v[i] - (-t).exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn integrator_matches_matrix_exponential() {
        let s = evolve_mode(1, 0.5, 10.0, 1e-3, 1, [0.3, -1.2]).unwrap();
        let worst = s
            .t
            .iter()
            .enumerate()
            .map(|(i, &t)| {
                let e = exact_mode(1, t, [0.3, -1.2]);
                (s.u[i] - e[0]).abs().max((s.v[i] - e[1]).abs())
            })
            .fold(0.0, f64::max);
        assert!(worst < 1e-8, "{worst}");
    }

    #[test]
    fn stability_bound_is_enforced() {
        assert!(evolve_mode(100, 0.5, 1.0, 0.1, 1, [1.0, 0.0]).is_err());
    }

    #[test]
    fn best_certified_rate_is_below_one_fifth() {
        let (_, _, rate) = toy_best_rate();
        assert!(rate < 0.2 && rate > 0.1, "{rate}");
    }
}
