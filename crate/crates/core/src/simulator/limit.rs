use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{domain, numerical, Result};
use crate::operators::OperatorSet;
use crate::simulator::{initial_state_from_symmetric, Scenario};
use crate::spectral::diffusion::DiffusionCoefficient;
use crate::spectral::gaps::poincare_pencil;
use crate::spectral::regularity::thomas;

/// Spatial discretization of `∂t ρ = ∂x[ρ_F σ ∂x(ρ/ρ_F)]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum LimitStencil {
    /// Three-point flux form in `u = ρ/ρ_F` with geometric-mean faces.
    Compact,
    /// `∂t c = -σ BᵀB c` on the coefficients of local equilibria, the
    /// operator the kinetic discretization converges to.
    KineticConsistent,
}

#[derive(Debug, Clone, Default, PartialEq, serde::Serialize)]
pub struct DensitySeries {
    pub t: Vec<f64>,
    pub rho: Vec<Vec<f64>>,
    pub mass: Vec<f64>,
}

impl DensitySeries {
    /// `‖ρ(t)‖_{L²(dx/ρ_F)}` per sample.
    pub fn norms(&self, rho_f: &[f64], dx: f64) -> Vec<f64> {
        self.rho.iter().map(|r| weighted_norm(r, rho_f, dx)).collect()
    }
}

fn weighted_norm(r: &[f64], rho_f: &[f64], dx: f64) -> f64 {
    (dx * r.iter().zip(rho_f).map(|(a, w)| a * a / w).sum::<f64>()).sqrt()
}

/// Crank–Nicolson integration of the drift-diffusion equation from `rho0`,
/// sampled every `stride` steps.
pub fn drift_diffusion_solve(
    ops: &OperatorSet,
    coeff: &DiffusionCoefficient,
    rho0: &[f64],
    t_end: f64,
    dt: f64,
    stride: usize,
    stencil: LimitStencil,
) -> Result<DensitySeries> {
    const ORIGIN: &str = "simulator::drift_diffusion_solve";
    let n = ops.n_x();
    if rho0.len() != n {
        return Err(domain(ORIGIN, format!("initial density has {} nodes, grid has {n}", rho0.len())));
    }
    if !(dt > 0.0 && t_end > 0.0) {
        return Err(domain(ORIGIN, "dt and t_end must be positive"));
    }
    let dx = ops.grid.x.spacing;
    let rho_f = &ops.rho;
    let steps = (t_end / dt).round().max(1.0) as usize;
    let stride = stride.max(1);
    let mut out = DensitySeries::default();
    let push = |out: &mut DensitySeries, t: f64, rho: Vec<f64>| {
        out.t.push(t);
        out.mass.push(dx * rho.iter().sum::<f64>());
        out.rho.push(rho);
    };
    match stencil {
        LimitStencil::Compact => {
            let (kd, ko, mass) = poincare_pencil(rho_f, &coeff.rho_sigma, dx);
            let diag: Vec<f64> = (0..n).map(|i| mass[i] + 0.5 * dt * kd[i]).collect();
            let off: Vec<f64> = ko.iter().map(|o| 0.5 * dt * o).collect();
            let mut u: Vec<f64> = rho0.iter().zip(rho_f).map(|(r, w)| r / w).collect();
            push(&mut out, 0.0, rho0.to_vec());
            for s in 1..=steps {
                let rhs: Vec<f64> = (0..n)
                    .map(|i| {
                        let mut k = kd[i] * u[i];
                        if i > 0 {
                            k += ko[i - 1] * u[i - 1];
                        }
                        if i + 1 < n {
                            k += ko[i] * u[i + 1];
                        }
                        mass[i] * u[i] - 0.5 * dt * k
                    })
                    .collect();
                u = thomas(&diag, &off, &rhs);
                if u.iter().any(|x| !x.is_finite()) {
                    return Err(numerical(ORIGIN, "non-finite density"));
                }
                if s % stride == 0 || s == steps {
                    push(&mut out, s as f64 * dt, u.iter().zip(rho_f).map(|(a, w)| a * w).collect());
                }
            }
        }
        LimitStencil::KineticConsistent => {
            let sigma = coeff.sigma.iter().sum::<f64>() / n as f64;
            let scale = ops.grid.v.spacing.sqrt();
            let p: Vec<f64> = rho_f.iter().map(|r| r.sqrt()).collect();
            let k = ops.aux.btb_matrix() * sigma;
            let id = DMatrix::<f64>::identity(n, n);
            let lhs = (&id + &k * (0.5 * dt)).lu();
            let rhs_op = &id - &k * (0.5 * dt);
            let mut c = DVector::from_iterator(n, (0..n).map(|i| rho0[i] / (p[i] * scale)));
            push(&mut out, 0.0, rho0.to_vec());
            for s in 1..=steps {
                c = lhs.solve(&(&rhs_op * &c)).ok_or_else(|| numerical(ORIGIN, "singular Crank–Nicolson system"))?;
                if s % stride == 0 || s == steps {
                    push(&mut out, s as f64 * dt, (0..n).map(|i| p[i] * c[i] * scale).collect());
                }
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct LimitRow {
    pub eps: f64,
    /// `sup_t ‖ρ_{f^ε} - ρ⁰‖_{L²(dx/ρ_F)}`
    pub error: f64,
    /// Error ratio to the previous (larger) ε.
    pub ratio: Option<f64>,
    /// `log(ratio) / log(ε_prev/ε)`
    pub order: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct LimitTable {
    pub rows: Vec<LimitRow>,
    pub sigma: f64,
}

/// Compares rescaled kinetic runs with the drift-diffusion solution for each
/// `ε` in `eps_list`, sampling every `sample_dt` up to `base.t_end`.
///
/// The kinetic step is `dt = κ ε²`, rounded so that it divides `sample_dt`.
pub fn diffusion_limit_check(base: &Scenario, eps_list: &[f64], kappa: f64, sample_dt: f64) -> Result<LimitTable> {
    const ORIGIN: &str = "simulator::diffusion_limit_check";
    if eps_list.is_empty() || eps_list.iter().any(|e| !(*e > 0.0 && *e < 1.0)) {
        return Err(domain(ORIGIN, "each ε must lie in (0, 1)"));
    }
    if !eps_list.windows(2).all(|w| w[1] < w[0]) {
        return Err(domain(ORIGIN, "ε list must be decreasing"));
    }
    let ops = base.operators()?;
    let coeff = crate::spectral::diffusion_coefficient(&ops, &base.potential)?;
    let h0 = limit_initial_state(&ops);
    let rho0 = super::density_of(&ops, &h0);
    let samples = (base.t_end / sample_dt).round() as usize;
    let limit_dt = sample_dt / 50.0;
    let reference = drift_diffusion_solve(
        &ops,
        &coeff,
        &rho0,
        samples as f64 * sample_dt,
        limit_dt,
        50,
        LimitStencil::KineticConsistent,
    )?;
    let dx = ops.grid.x.spacing;
    let errors: Vec<f64> = eps_list
        .par_iter()
        .map(|&eps| -> Result<f64> {
            let per_sample = (sample_dt / (kappa * eps * eps)).ceil() as usize;
            let mut sc = base.clone();
            sc.scaling = eps;
            sc.dt = Some(sample_dt / per_sample as f64);
            sc.stride = per_sample;
            sc.t_end = samples as f64 * sample_dt;
            sc.eps = Some(0.0);
            sc.entropy_tol = None;
            sc.store_densities = true;
            let ts = super::integrate_from(&sc, &ops, initial_state_from_symmetric(&ops, &h0), 0.0)?;
            if ts.densities.len() != reference.rho.len() {
                return Err(numerical(ORIGIN, "kinetic and limit samples are misaligned"));
            }
            Ok(ts
                .densities
                .iter()
                .zip(&reference.rho)
                .map(|(a, b)| {
                    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
                    weighted_norm(&d, &ops.rho, dx)
                })
                .fold(0.0, f64::max))
        })
        .collect::<Result<_>>()?;
    let rows = (0..eps_list.len())
        .map(|k| {
            let (ratio, order) = if k == 0 {
                (None, None)
            } else {
                let r = errors[k - 1] / errors[k];
                (Some(r), Some(r.ln() / (eps_list[k - 1] / eps_list[k]).ln()))
            };
            LimitRow { eps: eps_list[k], error: errors[k], ratio, order }
        })
        .collect();
    Ok(LimitTable { rows, sigma: coeff.sigma.iter().sum::<f64>() / ops.n_x() as f64 })
}

/// Zero-mass local equilibrium `c ⊗ q̂` plus a flux component `c ⊗ y`,
/// with `c = √ρ_F φ` and `φ` odd.
fn limit_initial_state(ops: &OperatorSet) -> Vec<f64> {
    let x_half = ops.grid.x.half_width;
    let c: Vec<f64> = ops
        .grid
        .x
        .nodes
        .iter()
        .zip(&ops.rho)
        .map(|(&x, r)| r.sqrt() * (x / x_half) * 4.0)
        .collect();
    let eq = ops.aux.extend(&c);
    let fl = ops.aux.extend_flux(&c);
    eq.iter().zip(&fl).map(|(a, b)| a + b).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibria::Potential;
    use crate::operators::CollisionKind;
    use crate::simulator::fit_decay_rate;
    use crate::spectral::{diffusion_coefficient, weighted_poincare_gap};

    fn setup() -> (OperatorSet, DiffusionCoefficient) {
        let s = Scenario::new(CollisionKind::Bgk, Potential::power_law(1.0), 64, 32);
        let ops = s.operators().unwrap();
        let coeff = diffusion_coefficient(&ops, &s.potential).unwrap();
        (ops, coeff)
    }

    #[test]
    fn equilibrium_is_stationary() {
        let (ops, coeff) = setup();
        for stencil in [LimitStencil::Compact, LimitStencil::KineticConsistent] {
            let out = drift_diffusion_solve(&ops, &coeff, &ops.rho, 1.0, 0.01, 10, stencil).unwrap();
            let last = out.rho.last().unwrap();
            let dev = last.iter().zip(&ops.rho).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(dev < 1e-12, "{stencil:?}: {dev}");
        }
    }

    #[test]
    fn compact_decays_at_the_poincare_gap() {
        let (ops, coeff) = setup();
        let dx = ops.grid.x.spacing;
        let gap = weighted_poincare_gap(&ops.rho, &coeff.rho_sigma, dx).unwrap();
        let rho0: Vec<f64> = ops.grid.x.nodes.iter().zip(&ops.rho).map(|(x, r)| x * r).collect();
        let out = drift_diffusion_solve(&ops, &coeff, &rho0, 6.0, 1e-3, 20, LimitStencil::Compact).unwrap();
        assert!(out.mass.iter().all(|m| m.abs() < 1e-14));
        let fit = fit_decay_rate(&out.t, &out.norms(&ops.rho, dx), None).unwrap();
        assert!((fit.rate - gap).abs() < 0.05 * gap, "{} vs {gap}", fit.rate);
    }
}
