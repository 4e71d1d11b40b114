use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::equilibria::{GibbsState, Potential};
use crate::error::{numerical, structure, Result};
use crate::operators::grid::Axis;
use crate::operators::{Collision, OperatorSet};
use crate::spectral::tridiagonal::generalized_eigenvalue;

/// Smallest eigenvalue of `-L` on the complement of the local equilibria.
///
/// The collision matrix is the same at every x node, so one eigensolve
/// covers the minimum over x. Non-symmetric kernels are handled through the
/// symmetric part, which is what enters `-⟨Lf, f⟩`.
pub fn microscopic_gap(collision: &Collision) -> Result<f64> {
    let n = collision.n_v();
    let l = &collision.matrix;
    let sym = (l + l.transpose()) * -0.5;
    let full = sym.clone().symmetric_eigenvalues();
    let scale = full.amax().max(1.0);
    if full.min() < -1e-10 * scale {
        return Err(structure(
            "spectral::microscopic_gap",
            format!("collision operator is indefinite (eigenvalue {:.3e})", -full.min()),
        ));
    }
    // Householder reflection sending q̂ to a coordinate axis.
    let q = &collision.q_hat;
    let p = q.iamax();
    let mut u = q.clone();
    u[p] += q[p].signum();
    let h = DMatrix::identity(n, n) - (&u * u.transpose()) * (2.0 / u.norm_squared());
    let rotated = &h * sym * &h;
    let keep: Vec<usize> = (0..n).filter(|&i| i != p).collect();
    let restricted = DMatrix::from_fn(n - 1, n - 1, |a, b| rotated[(keep[a], keep[b])]);
    Ok(restricted.symmetric_eigenvalues().min())
}

/// Tridiagonal pencil of the weighted Poincaré problem
/// `-∂x(m_F ∂x u) = λ ρ_F u` with no-flux ends and geometric-mean face
/// coefficients: `(diag, off, mass)`.
pub fn poincare_pencil(rho: &[f64], m: &[f64], dx: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let n = rho.len();
    let face: Vec<f64> = (0..n - 1).map(|i| (m[i] * m[i + 1]).sqrt() / (dx * dx)).collect();
    let mut diag = vec![0.0; n];
    for i in 0..n - 1 {
        diag[i] += face[i];
        diag[i + 1] += face[i];
    }
    let off = face.iter().map(|f| -f).collect();
    (diag, off, rho.to_vec())
}

/// Smallest nonzero eigenvalue of `-∂x(m_F ∂x u) = λ ρ_F u`, the discrete
/// weighted Poincaré constant on `ρ_F`-mean-zero functions.
pub fn macroscopic_gap(gibbs: &GibbsState) -> Result<f64> {
    weighted_poincare_gap(&gibbs.rho, &gibbs.m, gibbs.grid.x.spacing)
}

pub fn weighted_poincare_gap(rho: &[f64], m: &[f64], dx: f64) -> Result<f64> {
    if rho.iter().chain(m).any(|x| !(*x > 0.0)) {
        return Err(numerical("spectral::macroscopic_gap", "moments must be positive"));
    }
    let (diag, off, mass) = poincare_pencil(rho, m, dx);
    let gap = generalized_eigenvalue(&diag, &off, &mass, 1, 1e-14);
    if !gap.is_finite() {
        return Err(numerical("spectral::macroscopic_gap", "bisection did not converge"));
    }
    Ok(gap)
}

/// Macroscopic constant of the assembled kinetic operators:
/// `min ‖TΠf‖² / ‖Πf‖²` over `Πf` orthogonal to the global equilibrium,
/// equal to `|y|² λ₂(BᵀB)` in coefficient space.
pub fn kinetic_macroscopic_gap(ops: &OperatorSet) -> Result<f64> {
    let btb = ops.aux.btb_matrix();
    let mut eig: Vec<f64> = SymmetricEigen::new(btb).eigenvalues.iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    if eig.len() < 2 || !(eig[1] > 0.0) {
        return Err(numerical("spectral::macroscopic_gap", "no positive macroscopic eigenvalue"));
    }
    Ok(ops.aux.y_norm_sq * eig[1])
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SchrodingerGap {
    pub gap: f64,
    /// `‖(-Δ + ¼|V'|² - ½V'') e^{-V/2}‖ / ‖e^{-V/2}‖` with the analytic potential.
    pub ground_residual: f64,
}

/// Gap above the zero ground state of `-Δ + ¼|V'|² - ½ΔV` on the nodes of `axis`.
///
/// The discrete potential is `(Δ_h ψ)/ψ` with `ψ = e^{-V/2}`, so that `ψ` is
/// an exact discrete ground state; its distance to the analytic potential is
/// reported as the ground-state residual and must stay below `tol`.
pub fn schrodinger_gap(potential: &Potential, axis: &Axis, tol: f64) -> Result<SchrodingerGap> {
    const ORIGIN: &str = "spectral::schrodinger_gap";
    let x = &axis.nodes;
    let n = x.len();
    let h2 = axis.spacing * axis.spacing;
    let v = potential.values(x);
    let vmin = v.iter().cloned().fold(f64::INFINITY, f64::min);
    let psi: Vec<f64> = v.iter().map(|v| (-(v - vmin) / 2.0).exp()).collect();
    let mut diag = vec![0.0; n];
    let mut residual = 0.0;
    let mut norm = 0.0;
    for i in 0..n {
        let left = if i > 0 { psi[i - 1] } else { 0.0 };
        let right = if i + 1 < n { psi[i + 1] } else { 0.0 };
        let w_disc = (left - 2.0 * psi[i] + right) / (h2 * psi[i]);
        diag[i] = 2.0 / h2 + w_disc;
        let g = potential.gradient(x[i]);
        let w_an = 0.25 * g * g - 0.5 * potential.laplacian(x[i]);
        residual += ((w_an - w_disc) * psi[i]).powi(2);
        norm += psi[i] * psi[i];
    }
    let ground_residual = (residual / norm).sqrt();
    if !(ground_residual <= tol) {
        return Err(numerical(
            ORIGIN,
            format!("ground-state residual {ground_residual:.3e} exceeds {tol:.1e}; refine the grid"),
        ));
    }
    let off = vec![-1.0 / h2; n - 1];
    let gap = generalized_eigenvalue(&diag, &off, &vec![1.0; n], 1, 1e-14);
    Ok(SchrodingerGap { gap, ground_residual })
}

/// Dense eigenvalues of `M^{-1/2} K M^{-1/2}` for a tridiagonal pencil, ascending.
pub fn dense_pencil_eigenvalues(diag: &[f64], off: &[f64], mass: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let s = DVector::from_iterator(n, mass.iter().map(|m| 1.0 / m.sqrt()));
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        a[(i, i)] = diag[i] * s[i] * s[i];
        if i + 1 < n {
            let val = off[i] * s[i] * s[i + 1];
            a[(i, i + 1)] = val;
            a[(i + 1, i)] = val;
        }
    }
    let mut eig: Vec<f64> = a.symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    eig
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibria::{build_gibbs_state, maxwellian_v_half_width, EnergyProfile, GibbsOptions};
    use crate::operators::{CollisionKind, PhaseGrid};

    fn gibbs(p: &Potential, n_x: usize, x_half: f64, n_v: usize) -> GibbsState {
        let grid = PhaseGrid::new(n_x, x_half, n_v, maxwellian_v_half_width(1e-16)).unwrap();
        build_gibbs_state(EnergyProfile::maxwellian(), p, &grid, GibbsOptions::default()).unwrap()
    }

    #[test]
    fn bgk_gap_is_one() {
        let g = gibbs(&Potential::quadratic(1.0), 16, 9.0, 32);
        let ops = OperatorSet::assemble(&g, CollisionKind::Bgk).unwrap();
        assert!((microscopic_gap(&ops.collision).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ornstein_uhlenbeck_gap_in_x() {
        // Hermite oracle: the first nonzero eigenvalue of -∂x² + x∂x is 1.
        let g = gibbs(&Potential::quadratic(1.0), 400, 9.0, 32);
        let gap = macroscopic_gap(&g).unwrap();
        assert!((gap - 1.0).abs() < 1e-3, "{gap}");
    }

    #[test]
    fn harmonic_oscillator_gaps() {
        let axis = Axis::new(600, 10.0).unwrap();
        let g1 = schrodinger_gap(&Potential::quadratic(1.0), &axis, 1e-2).unwrap();
        assert!((g1.gap - 1.0).abs() < 1e-3, "{g1:?}");
        // V = x²: ¼|V'|² - ½V'' = x² - 1, frequency 2, gap 2.
        let g2 = schrodinger_gap(&Potential::quadratic(2.0), &axis, 1e-2).unwrap();
        assert!((g2.gap - 2.0).abs() < 2e-3, "{g2:?}");
    }

    #[test]
    fn doubling_m_doubles_gap() {
        let g = gibbs(&Potential::power_law(1.0), 60, 6.0, 16);
        let m2: Vec<f64> = g.m.iter().map(|m| 2.0 * m).collect();
        let a = macroscopic_gap(&g).unwrap();
        let b = weighted_poincare_gap(&g.rho, &m2, g.grid.x.spacing).unwrap();
        assert!((b / a - 2.0).abs() < 1e-12);
    }

    #[test]
    fn bisection_matches_dense_pencil() {
        let g = gibbs(&Potential::power_law(1.5), 40, 4.0, 16);
        let (d, o, m) = poincare_pencil(&g.rho, &g.m, g.grid.x.spacing);
        let dense = dense_pencil_eigenvalues(&d, &o, &m);
        let gap = macroscopic_gap(&g).unwrap();
        assert!((gap - dense[1]).abs() < 1e-9 * dense[1]);
    }
}
