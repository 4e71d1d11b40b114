use nalgebra::{DMatrix, DVector};

use crate::equilibria::Potential;
use crate::error::{structure, Result};
use crate::operators::OperatorSet;

/// Macroscopic coefficients of the drift-diffusion limit.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct DiffusionCoefficient {
    /// `ρ_F σ = -∫ v J(vF) dv` per x node.
    pub rho_sigma: Vec<f64>,
    pub sigma: Vec<f64>,
    /// `γ` from `γ ∇V = -∇(ρ_F σ) / ρ_F`; NaN where `∇V` vanishes.
    pub gamma: Vec<f64>,
}

/// Solves `L g = v√𝔐` on the complement of the local equilibria through
/// the bordered system `[[L, q̂], [q̂ᵀ, 0]]`, once for all x nodes.
pub fn velocity_corrector(ops: &OperatorSet) -> Result<Vec<f64>> {
    let n = ops.n_v();
    let l = &ops.collision.matrix;
    let q = &ops.collision.q_hat;
    let mut bordered = DMatrix::zeros(n + 1, n + 1);
    bordered.view_mut((0, 0), (n, n)).copy_from(l);
    for j in 0..n {
        bordered[(j, n)] = q[j];
        bordered[(n, j)] = q[j];
    }
    let mut rhs = DVector::zeros(n + 1);
    for j in 0..n {
        rhs[j] = ops.grid.v.nodes[j] * ops.maxwellian[j].sqrt();
    }
    let sol = bordered
        .lu()
        .solve(&rhs)
        .ok_or_else(|| structure("spectral::diffusion_coefficient", "collision operator is singular on (1-Π)"))?;
    if sol.iter().any(|x| !x.is_finite()) {
        return Err(structure("spectral::diffusion_coefficient", "restricted solve produced non-finite values"));
    }
    Ok(sol.rows(0, n).iter().copied().collect())
}

pub fn diffusion_coefficient(ops: &OperatorSet, potential: &Potential) -> Result<DiffusionCoefficient> {
    let g = velocity_corrector(ops)?;
    let v = &ops.grid.v.nodes;
    let dv = ops.grid.v.spacing;
    let moment: f64 = -dv * (0..ops.n_v()).map(|j| v[j] * ops.maxwellian[j].sqrt() * g[j]).sum::<f64>();
    let rho_sigma: Vec<f64> = ops.rho.iter().map(|r| r * moment).collect();
    let sigma: Vec<f64> = rho_sigma.iter().zip(&ops.rho).map(|(a, r)| a / r).collect();
    let grad = ops.grid.x.gradient(&rho_sigma);
    let vprime = potential.gradients(&ops.grid.x.nodes);
    let scale = vprime.iter().fold(0.0_f64, |a, b| a.max(b.abs()));
    let gamma = (0..ops.n_x())
        .map(|i| {
            if vprime[i].abs() <= 1e-8 * scale {
                f64::NAN
            } else {
                -grad[i] / (ops.rho[i] * vprime[i])
            }
        })
        .collect();
    Ok(DiffusionCoefficient { rho_sigma, sigma, gamma })
}
