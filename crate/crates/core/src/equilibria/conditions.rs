use std::collections::BTreeMap;

use crate::equilibria::gibbs::{suggest_x_half_width, DEFAULT_TAIL_CUTOFF};
use crate::equilibria::potential::Potential;
use crate::equilibria::profile::{EnergyProfile, ProfileKind};
use crate::equilibria::weights::{fit_affine_bound, WeightSet};

/// Relative level below which the outer infimum of the gap-at-infinity check counts as vanishing.
pub const GAP_AT_INFINITY_FLOOR: f64 = 1e-6;

/// Verdict on one hypothesis.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ConditionResult {
    pub name: String,
    /// `None` when the condition is not evaluated numerically.
    pub passed: Option<bool>,
    pub witness: BTreeMap<String, f64>,
    pub note: String,
}

impl ConditionResult {
    fn new(name: &str, passed: Option<bool>, note: impl Into<String>) -> Self {
        Self { name: name.to_string(), passed, witness: BTreeMap::new(), note: note.into() }
    }

    fn with(mut self, key: &str, value: f64) -> Self {
        self.witness.insert(key.to_string(), value);
        self
    }
}

#[derive(Debug, Clone, Default, PartialEq, serde::Serialize)]
pub struct ConditionReport {
    pub results: Vec<ConditionResult>,
}

impl ConditionReport {
    pub fn get(&self, name: &str) -> Option<&ConditionResult> {
        self.results.iter().find(|r| r.name == name)
    }

    /// First condition that was evaluated and failed.
    pub fn first_failure(&self) -> Option<&ConditionResult> {
        self.results.iter().find(|r| r.passed == Some(false))
    }

    pub fn all_passed(&self) -> bool {
        self.first_failure().is_none()
    }

    pub fn witness(&self, name: &str, key: &str) -> Option<f64> {
        self.get(name).and_then(|r| r.witness.get(key).copied())
    }
}

/// Checks the hypotheses that apply to `(potential, profile)` on `[-x_half, x_half]`.
///
/// Potential-level conditions are sampled on a dense auxiliary grid. When
/// `weights` is given, the weight conditions are added with their
/// fitted constants.
pub fn check_conditions(
    potential: &Potential,
    profile: EnergyProfile,
    x_half: f64,
    weights: Option<&WeightSet>,
) -> ConditionReport {
    let mut report = ConditionReport::default();
    let n = 4001;
    let xs: Vec<f64> = (0..n).map(|k| -x_half + 2.0 * x_half * k as f64 / (n - 1) as f64).collect();
    let grad = potential.gradients(&xs);
    let lap = potential.laplacians(&xs);

    match profile.kind {
        ProfileKind::Maxwellian => {
            report.results.push(gibbs_integrable(potential, profile));
            report.results.push(gap_at_infinity(&xs, &grad, &lap, x_half));
            report.results.push(laplacian_bound(&grad, &lap));
        }
        ProfileKind::Polytropic { m } => {
            report.results.push(polytropic_integrable(potential, profile, m));
            report.results.push(fast_diffusion_gap(potential, profile, m));
            report.results.push(ConditionResult::new(
                "admissible_beta0",
                None,
                "existence of an admissible beta0 is not evaluated numerically",
            ));
        }
    }
    if let Some(w) = weights {
        report.results.extend(weight_conditions(w, potential, profile));
    }
    report
}

fn gibbs_integrable(potential: &Potential, profile: EnergyProfile) -> ConditionResult {
    match suggest_x_half_width(profile, potential, DEFAULT_TAIL_CUTOFF) {
        Ok(x) => ConditionResult::new("gibbs_integrable", Some(true), "e^{-V} decays below the tail cutoff").with("decay_half_width", x),
        Err(e) => ConditionResult::new("gibbs_integrable", Some(false), e.to_string()),
    }
}

fn gap_at_infinity(xs: &[f64], grad: &[f64], lap: &[f64], x_half: f64) -> ConditionResult {
    let q: Vec<f64> = grad.iter().zip(lap).map(|(g, l)| g * g - 2.0 * l).collect();
    let scale = q.iter().fold(1.0_f64, |a, b| a.max(b.abs()));
    let outer = q
        .iter()
        .zip(xs)
        .filter(|(_, x)| x.abs() >= 0.8 * x_half)
        .map(|(q, _)| *q)
        .fold(f64::INFINITY, f64::min);
    let passed = outer > GAP_AT_INFINITY_FLOOR * scale;
    let note = if passed {
        "|∇V|² - 2ΔV stays positive near infinity"
    } else {
        "|∇V|² - 2ΔV is not bounded away from zero near infinity"
    };
    ConditionResult::new("gap_at_infinity", Some(passed), note)
        .with("outer_infimum", outer)
        .with("scale", scale)
}

fn laplacian_bound(grad: &[f64], lap: &[f64]) -> ConditionResult {
    let a = lap.to_vec();
    let g: Vec<f64> = grad.iter().map(|g| 0.5 * g * g).collect();
    let (c1, c2) = fit_affine_bound(&a, &g, 1.0 - 1e-9);
    let c3 = grad
        .iter()
        .zip(lap)
        .map(|(g, l)| l.abs() / (1.0 + g.abs()))
        .fold(0.0, f64::max);
    let passed = c1.is_finite() && c2 < 1.0 && c3.is_finite();
    ConditionResult::new("laplacian_bound", Some(passed), "fitted on the sampled domain")
        .with("c1", c1)
        .with("c2", c2)
        .with("c3", c3)
}

fn polytropic_integrable(potential: &Potential, profile: EnergyProfile, m: f64) -> ConditionResult {
    let d = profile.d as f64;
    let threshold = d * (1.0 - m) / (2.0 * (2.0 - m));
    match potential.beta() {
        Some(beta) => ConditionResult::new("polytropic_integrable", Some(beta > threshold), "beta > d(1-m)/(2(2-m))")
            .with("beta", beta)
            .with("threshold", threshold),
        None => ConditionResult::new("polytropic_integrable", None, "needs a power-law potential"),
    }
}

fn fast_diffusion_gap(potential: &Potential, profile: EnergyProfile, m: f64) -> ConditionResult {
    let d = profile.d as f64;
    let Some(beta) = potential.beta() else {
        return ConditionResult::new("fast_diffusion_gap", None, "needs a power-law potential");
    };
    let excluded = if profile.d == 2 { f64::NAN } else { (d - 4.0) / (d - 2.0) };
    let passed = profile.d >= 3 && beta >= 1.0 && (m - excluded).abs() > 1e-12;
    ConditionResult::new("fast_diffusion_gap", Some(passed), "d ≥ 3, beta ≥ 1, m ≠ (d-4)/(d-2)")
        .with("beta", beta)
        .with("excluded_m", excluded)
}

fn weight_conditions(w: &WeightSet, potential: &Potential, profile: EnergyProfile) -> Vec<ConditionResult> {
    let c = w.framework_constants();
    let mut out = vec![
        ConditionResult::new("weight_log_laplacian", Some(c.c1.is_finite() && c.c2 < 1.0), "-w1²Δlog w1 ≤ c1 w0² + c2|∇w1|²")
            .with("c1", c.c1)
            .with("c2", c.c2),
        ConditionResult::new("weight_gradient_ratio", Some(c.c3.is_finite()), "(w1/w0)|∇W| ≤ c3(1 + |∇w1|/w0)").with("c3", c.c3),
    ];
    out.push(match c.c4 {
        None => ConditionResult::new("weight_quotient_gradient", Some(true), "w1/w0 is constant; holds for any c4").with("c4", 0.0),
        Some(c4) => ConditionResult::new("weight_quotient_gradient", Some(c4.is_finite()), "|∇(w1/w0)| ≤ c4 |∇w1|/w0").with("c4", c4),
    });
    let mut weight_norm = ConditionResult::new("weight_norm", Some(c.w_norm_sq.is_finite()), "‖W‖₀ < ∞").with("w_norm_sq", c.w_norm_sq);
    if profile.is_maxwellian() {
        // ∫|∇V|² e^{-V} = ∫ΔV e^{-V} after integration by parts.
        let grad = potential.gradients(&w.x);
        let lap = potential.laplacians(&w.x);
        let lhs = w.dx * grad.iter().zip(&w.rho).map(|(g, r)| g * g * r).sum::<f64>();
        let rhs = w.dx * lap.iter().zip(&w.rho).map(|(l, r)| l * r).sum::<f64>();
        weight_norm = weight_norm.with("grad_sq_moment", lhs).with("laplacian_moment", rhs);
    }
    out.push(weight_norm);
    out
}
