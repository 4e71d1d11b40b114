/// Number of eigenvalues below `x` of the pencil `K - λ M`, with `K`
/// symmetric tridiagonal and `M` positive diagonal (Sturm count on the
/// `LDLᵀ` factorization of `K - xM`).
pub fn count_below(diag: &[f64], off: &[f64], mass: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut d = 1.0;
    for i in 0..diag.len() {
        let coupling = if i > 0 { off[i - 1] * off[i - 1] / d } else { 0.0 };
        d = diag[i] - x * mass[i] - coupling;
        if d == 0.0 {
            d = -f64::EPSILON * (diag[i].abs() + x.abs() * mass[i]).max(f64::MIN_POSITIVE);
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// Gershgorin interval of `M^{-1/2} K M^{-1/2}`.
pub fn gershgorin(diag: &[f64], off: &[f64], mass: &[f64]) -> (f64, f64) {
    let n = diag.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let mut r = 0.0;
        if i > 0 {
            r += off[i - 1].abs() / (mass[i] * mass[i - 1]).sqrt();
        }
        if i + 1 < n {
            r += off[i].abs() / (mass[i] * mass[i + 1]).sqrt();
        }
        let c = diag[i] / mass[i];
        lo = lo.min(c - r);
        hi = hi.max(c + r);
    }
    (lo, hi)
}

/// `k`-th smallest (0-based) generalized eigenvalue of `K u = λ M u` by
/// bisection to relative width `rel_tol`.
pub fn generalized_eigenvalue(diag: &[f64], off: &[f64], mass: &[f64], k: usize, rel_tol: f64) -> f64 {
    let (mut lo, mut hi) = gershgorin(diag, off, mass);
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if count_below(diag, off, mass, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= rel_tol * mid.abs() || hi - lo <= f64::MIN_POSITIVE {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// `k`-th smallest eigenvalue of a symmetric tridiagonal matrix.
pub fn tridiagonal_eigenvalue(diag: &[f64], off: &[f64], k: usize) -> f64 {
    generalized_eigenvalue(diag, off, &vec![1.0; diag.len()], k, 1e-15)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn discrete_laplacian_spectrum() {
        let n = 50;
        let diag = vec![2.0; n];
        let off = vec![-1.0; n - 1];
        for k in [0, 1, 7, 49] {
            let exact = 2.0 - 2.0 * (std::f64::consts::PI * (k + 1) as f64 / (n + 1) as f64).cos();
            assert!((tridiagonal_eigenvalue(&diag, &off, k) - exact).abs() < 1e-13);
        }
    }

    #[test]
    fn generalized_problem_matches_scaled_form() {
        let diag = [3.0, 4.0, 5.0, 2.0];
        let off = [-1.0, 0.5, -2.0];
        let mass: [f64; 4] = [1.0, 2.0, 0.5, 4.0];
        let mut dense = nalgebra::DMatrix::zeros(4, 4);
        for i in 0..4 {
            dense[(i, i)] = diag[i] / mass[i];
            if i < 3 {
                let v = off[i] / (mass[i] * mass[i + 1]).sqrt();
                dense[(i, i + 1)] = v;
                dense[(i + 1, i)] = v;
            }
        }
        let mut eig: Vec<f64> = dense.symmetric_eigenvalues().iter().copied().collect();
        eig.sort_by(f64::total_cmp);
        for (k, e) in eig.iter().enumerate() {
            assert!((generalized_eigenvalue(&diag, &off, &mass, k, 1e-15) - e).abs() < 1e-12);
        }
    }
}
