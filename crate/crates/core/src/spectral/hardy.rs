use crate::error::{domain, Result};
use crate::spectral::tridiagonal::generalized_eigenvalue;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HardyOptions {
    /// Number of radial elements.
    pub n: usize,
    /// First positive node; nodes are geometric from here to `r_max`.
    pub r_min: f64,
    pub r_max: f64,
    /// `c` in the weights `(c(1 + r²))^α`, `(c(1 + r²))^{α-1}`.
    pub weight_scale: f64,
}

impl Default for HardyOptions {
    fn default() -> Self {
        Self { n: 2000, r_min: 1e-3, r_max: 1e7, weight_scale: 1.0 }
    }
}

/// Critical exponent `α* = -(d-2)/2`.
pub fn critical_alpha(d: usize) -> f64 {
    -(d as f64 - 2.0) / 2.0
}

/// Smallest eigenvalue of the radial problem
/// `-r^{1-d} ∂r(r^{d-1} (1+r²)^α ∂r u) = λ (1+r²)^{α-1} u`.
///
/// Linear elements on a grid that is geometric away from the origin. For
/// `α > α*` the far end is Dirichlet and the first eigenvalue is returned;
/// for `α < α*` the weight is integrable, the far end is natural and the
/// second eigenvalue (first on mean-zero functions) is returned.
pub fn hardy_poincare_constant(alpha: f64, d: usize, options: HardyOptions) -> Result<f64> {
    const ORIGIN: &str = "spectral::hardy_poincare_constant";
    if d < 3 {
        return Err(domain(ORIGIN, format!("radial dimension {d} must be at least 3")));
    }
    let a_star = critical_alpha(d);
    if (alpha - a_star).abs() < 1e-12 {
        return Err(domain(ORIGIN, format!("α = {alpha} is the degenerate exponent α* = {a_star}")));
    }
    let HardyOptions { n, r_min, r_max, weight_scale: c } = options;
    if !(n >= 8 && r_min > 0.0 && r_max > r_min) {
        return Err(domain(ORIGIN, "need n ≥ 8 and 0 < r_min < r_max"));
    }
    let mut r = vec![0.0];
    let ratio = (r_max / r_min).powf(1.0 / (n - 1) as f64);
    r.extend((0..n).map(|k| r_min * ratio.powi(k as i32)));
    let dm1 = d as i32 - 1;
    let stiff = |s: f64| s.powi(dm1) * (c * (1.0 + s * s)).powf(alpha);
    let weight = |s: f64| s.powi(dm1) * (c * (1.0 + s * s)).powf(alpha - 1.0);

    let nodes = r.len();
    let mut diag = vec![0.0; nodes];
    let mut off = vec![0.0; nodes - 1];
    let mut mass = vec![0.0; nodes];
    for e in 0..nodes - 1 {
        let (a, b) = (r[e], r[e + 1]);
        let h = b - a;
        let mid = 0.5 * (a + b);
        let k = (stiff(a) + 4.0 * stiff(mid) + stiff(b)) / (6.0 * h);
        diag[e] += k;
        diag[e + 1] += k;
        off[e] = -k;
        // Lumped mass with the Simpson rule on each half element.
        let q1 = 0.5 * (a + mid);
        let q2 = 0.5 * (mid + b);
        mass[e] += h / 12.0 * (weight(a) + 4.0 * weight(q1) + weight(mid));
        mass[e + 1] += h / 12.0 * (weight(mid) + 4.0 * weight(q2) + weight(b));
    }
    if alpha > a_star {
        diag.pop();
        off.pop();
        mass.pop();
        Ok(generalized_eigenvalue(&diag, &off, &mass, 0, 1e-13))
    } else {
        Ok(generalized_eigenvalue(&diag, &off, &mass, 1, 1e-13))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_exponent_is_rejected() {
        assert!(hardy_poincare_constant(-0.5, 3, HardyOptions::default()).is_err());
        assert!(hardy_poincare_constant(1.0, 2, HardyOptions::default()).is_err());
    }

    #[test]
    fn positive_and_stable_under_refinement() {
        let coarse = hardy_poincare_constant(1.0, 3, HardyOptions { n: 800, ..Default::default() }).unwrap();
        let fine = hardy_poincare_constant(1.0, 3, HardyOptions { n: 1600, ..Default::default() }).unwrap();
        assert!(coarse > 0.0 && fine > 0.0);
        assert!((coarse - fine).abs() < 1e-2 * fine, "{coarse} {fine}");
    }

    #[test]
    fn weight_scale_multiplies_eigenvalue() {
        // Numerator and denominator weights scale by c^α and c^{α-1}.
        let base = hardy_poincare_constant(1.0, 3, HardyOptions { n: 400, ..Default::default() }).unwrap();
        let scaled =
            hardy_poincare_constant(1.0, 3, HardyOptions { n: 400, weight_scale: 3.0, ..Default::default() }).unwrap();
        assert!((scaled / base - 3.0).abs() < 1e-9);
    }

    #[test]
    fn poincare_branch_below_critical_exponent() {
        let c = hardy_poincare_constant(-2.0, 3, HardyOptions { n: 800, ..Default::default() }).unwrap();
        assert!(c > 0.0);
    }
}
