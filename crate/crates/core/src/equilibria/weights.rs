use crate::equilibria::gibbs::GibbsState;
use crate::equilibria::potential::Potential;
use crate::error::{domain, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum WeightVariant {
    /// `W = sqrt(1 + |∇w1|²/w0²)`
    Standard,
    /// `W = (1 + |x|²)^{(β-1)/2}`
    FastDiffusion,
}

/// Weight functions of the elliptic regularity framework:
/// `w0² = ρ_F`, `w1² = m_F`, `w2² = m_F²/ρ_F`.
#[derive(Debug, Clone)]
pub struct WeightSet {
    pub x: Vec<f64>,
    pub dx: f64,
    pub rho: Vec<f64>,
    pub w0: Vec<f64>,
    pub w1: Vec<f64>,
    pub w2: Vec<f64>,
    pub big_w: Vec<f64>,
    pub variant: WeightVariant,
}

/// Constants witnessing the framework conditions on the discrete domain.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct FrameworkConstants {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    /// `None` when `w1/w0` is constant and the condition holds for any `c4`.
    pub c4: Option<f64>,
    /// `‖W‖₀² = ∫ W² ρ_F dx`
    pub w_norm_sq: f64,
}

pub fn build_weights(gibbs: &GibbsState, potential: &Potential, variant: WeightVariant) -> Result<WeightSet> {
    const ORIGIN: &str = "equilibria::build_weights";
    let n = gibbs.n_x();
    for i in 0..n {
        if !(gibbs.rho[i] > 0.0 && gibbs.m[i] > 0.0) {
            return Err(Error::DegenerateWeight { origin: ORIGIN, node: i });
        }
    }
    let w0: Vec<f64> = gibbs.rho.iter().map(|r| r.sqrt()).collect();
    let w1: Vec<f64> = gibbs.m.iter().map(|m| m.sqrt()).collect();
    let w2: Vec<f64> = gibbs.m.iter().zip(&w0).map(|(m, w)| m / w).collect();
    let axis = &gibbs.grid.x;
    let big_w = match variant {
        WeightVariant::Standard => {
            let grad_w1 = axis.gradient(&w1);
            grad_w1.iter().zip(&w0).map(|(g, w)| (1.0 + (g / w).powi(2)).sqrt()).collect()
        }
        WeightVariant::FastDiffusion => {
            let beta = potential
                .beta()
                .ok_or_else(|| domain(ORIGIN, "fast-diffusion weights need a power-law potential"))?;
            axis.nodes.iter().map(|x| (1.0 + x * x).powf(0.5 * (beta - 1.0))).collect()
        }
    };
    Ok(WeightSet {
        x: axis.nodes.clone(),
        dx: axis.spacing,
        rho: gibbs.rho.clone(),
        w0,
        w1,
        w2,
        big_w,
        variant,
    })
}

impl WeightSet {
    fn gradient(&self, values: &[f64]) -> Vec<f64> {
        let n = values.len();
        let h = self.dx;
        let mut out = vec![0.0; n];
        out[0] = (values[1] - values[0]) / h;
        out[n - 1] = (values[n - 1] - values[n - 2]) / h;
        for i in 1..n - 1 {
            out[i] = (values[i + 1] - values[i - 1]) / (2.0 * h);
        }
        out
    }

    fn second_difference(&self, values: &[f64]) -> Vec<f64> {
        let n = values.len();
        let h2 = self.dx * self.dx;
        let mut out = vec![0.0; n];
        for i in 1..n - 1 {
            out[i] = (values[i + 1] - 2.0 * values[i] + values[i - 1]) / h2;
        }
        out[0] = out[1];
        out[n - 1] = out[n - 2];
        out
    }

    /// `max |w2 w0 - w1²| / max w1²`
    pub fn identity_residual(&self) -> f64 {
        let mut num: f64 = 0.0;
        let mut den: f64 = 0.0;
        for i in 0..self.w0.len() {
            num = num.max((self.w2[i] * self.w0[i] - self.w1[i] * self.w1[i]).abs());
            den = den.max(self.w1[i] * self.w1[i]);
        }
        num / den
    }

    /// `‖u‖_k² = ∫ u² w_k² dx` for `k = 0, 1, 2`.
    pub fn norm_sq(&self, u: &[f64], k: usize) -> f64 {
        let w = match k {
            0 => &self.w0,
            1 => &self.w1,
            _ => &self.w2,
        };
        self.dx * u.iter().zip(w).map(|(u, w)| (u * w).powi(2)).sum::<f64>()
    }

    /// `|∇w1| / w0` per node.
    pub fn drift_ratio(&self) -> Vec<f64> {
        self.gradient(&self.w1).iter().zip(&self.w0).map(|(g, w)| g.abs() / w).collect()
    }

    pub fn framework_constants(&self) -> FrameworkConstants {
        let n = self.w0.len();
        let grad_w1 = self.gradient(&self.w1);
        let log_w1: Vec<f64> = self.w1.iter().map(|w| w.ln()).collect();
        let lap_log_w1 = self.second_difference(&log_w1);
        // -w1² Δ log w1 ≤ c1 w0² + c2 |∇w1|², divided through by w0².
        let a: Vec<f64> = (0..n).map(|i| -self.w1[i].powi(2) * lap_log_w1[i] / self.w0[i].powi(2)).collect();
        let g: Vec<f64> = (0..n).map(|i| (grad_w1[i] / self.w0[i]).powi(2)).collect();
        let (c1, c2) = fit_affine_bound(&a, &g, 1.0 - 1e-9);

        let grad_big_w = self.gradient(&self.big_w);
        let ratio: Vec<f64> = self.w1.iter().zip(&self.w0).map(|(a, b)| a / b).collect();
        let drift = self.drift_ratio();
        let c3 = (0..n)
            .map(|i| ratio[i] * grad_big_w[i].abs() / (1.0 + drift[i]))
            .fold(0.0, f64::max);

        let grad_ratio = self.gradient(&ratio);
        let ratio_scale = ratio.iter().cloned().fold(0.0, f64::max);
        let c4 = if grad_ratio.iter().all(|g| g.abs() <= 1e-9 * ratio_scale) {
            None
        } else {
            let drift_scale = drift.iter().cloned().fold(0.0, f64::max);
            Some(
                (0..n)
                    .filter(|&i| drift[i] > 1e-9 * drift_scale)
                    .map(|i| grad_ratio[i].abs() / drift[i])
                    .fold(0.0, f64::max),
            )
        };
        let w_norm_sq = self.dx * (0..n).map(|i| self.big_w[i].powi(2) * self.rho[i]).sum::<f64>();
        FrameworkConstants { c1, c2, c3, c4, w_norm_sq }
    }
}

/// Smallest `(c1, c2)` in the sense of minimal `c1 + c2` such that
/// `a_i ≤ c1 + c2 g_i` at every node, with `c1 ≥ 0` and `0 ≤ c2 ≤ c2_max`.
///
/// The two-variable linear program is solved through its value function
/// `c2 ↦ max(0, max_i(a_i - c2 g_i)) + c2`, which is convex and piecewise
/// linear, so golden-section search finds the minimum.
pub fn fit_affine_bound(a: &[f64], g: &[f64], c2_max: f64) -> (f64, f64) {
    let c1_of = |c2: f64| a.iter().zip(g).map(|(a, g)| a - c2 * g).fold(0.0, f64::max);
    let objective = |c2: f64| c1_of(c2) + c2;
    let c2 = crate::spectral::optimize::golden_section_min(objective, 0.0, c2_max, 1e-13);
    let c2 = if objective(0.0) <= objective(c2) { 0.0 } else { c2 };
    (c1_of(c2), c2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibria::gibbs::{build_gibbs_state, maxwellian_v_half_width, suggest_x_half_width, GibbsOptions};
    use crate::equilibria::profile::EnergyProfile;
    use crate::operators::grid::PhaseGrid;

    fn maxwell(p: &Potential, n_x: usize) -> GibbsState {
        let x_half = suggest_x_half_width(EnergyProfile::maxwellian(), p, 1e-13).unwrap();
        let grid = PhaseGrid::new(n_x, x_half, 48, maxwellian_v_half_width(1e-14)).unwrap();
        build_gibbs_state(EnergyProfile::maxwellian(), p, &grid, GibbsOptions::default()).unwrap()
    }

    #[test]
    fn weight_identity_holds() {
        let p = Potential::power_law(1.5);
        let w = build_weights(&maxwell(&p, 64), &p, WeightVariant::Standard).unwrap();
        assert!(w.identity_residual() <= 1e-12);
    }

    #[test]
    fn maxwellian_ratio_is_constant() {
        let p = Potential::power_law(1.0);
        let w = build_weights(&maxwell(&p, 64), &p, WeightVariant::Standard).unwrap();
        assert_eq!(w.framework_constants().c4, None);
    }

    #[test]
    fn standard_weight_matches_symbolic_gradient() {
        // w1 ∝ w0 ∝ e^{-V/2}, so |∇w1|/w0 = |V'|/2.
        let p = Potential::power_law(1.0);
        let w = build_weights(&maxwell(&p, 801), &p, WeightVariant::Standard).unwrap();
        let n = w.x.len();
        for i in 1..n - 1 {
            let exact = 1.0 + p.gradient(w.x[i]).powi(2) / 4.0;
            let rel = (w.big_w[i].powi(2) - exact).abs() / exact;
            assert!(rel < 2e-3, "node {i}: {rel}");
        }
    }

    #[test]
    fn fast_diffusion_weight_with_unit_beta_is_one() {
        let p = Potential::power_law(1.0);
        let w = build_weights(&maxwell(&p, 32), &p, WeightVariant::FastDiffusion).unwrap();
        assert!(w.big_w.iter().all(|&x| x == 1.0));
    }

    #[test]
    fn affine_fit_is_feasible_and_tight() {
        let a = [1.0, 1.5, 4.0, 0.5];
        let g = [0.0, 1.0, 4.0, 9.0];
        let (c1, c2) = fit_affine_bound(&a, &g, 0.999);
        for i in 0..4 {
            assert!(a[i] <= c1 + c2 * g[i] + 1e-9);
        }
        // c1 + c2 is minimal where the constraints of nodes 0 and 2 cross: c1 = 1, c2 = 0.75.
        assert!((c1 - 1.0).abs() < 1e-9 && (c2 - 0.75).abs() < 1e-9, "{c1} {c2}");
    }
}
