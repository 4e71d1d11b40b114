use crate::equilibria::potential::Potential;
use crate::equilibria::profile::{sphere_area, EnergyProfile, ProfileKind};
use crate::error::{domain, Error, Result};
use crate::operators::grid::{Axis, PhaseGrid};

/// Default relative tail level that defines the truncated domain.
pub const DEFAULT_TAIL_CUTOFF: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GibbsOptions {
    /// Required decay `ρ_F(±X) / max ρ_F`.
    pub tail_cutoff: f64,
    /// Relative velocity-truncation error above which moments fail in strict mode.
    pub truncation_threshold: f64,
    pub strict: bool,
}

impl Default for GibbsOptions {
    fn default() -> Self {
        Self { tail_cutoff: DEFAULT_TAIL_CUTOFF, truncation_threshold: 1e-8, strict: false }
    }
}

/// Per-x velocity moments of the Gibbs state.
#[derive(Debug, Clone, PartialEq)]
pub struct Moments {
    pub rho: Vec<f64>,
    pub m: Vec<f64>,
    pub big_m: Vec<f64>,
    /// Largest relative tail estimate across nodes for each moment.
    pub truncation: [f64; 3],
}

/// Global equilibrium `F = Γ(|v|²/2 + V)` on the phase grid, normalized to
/// unit mass.
#[derive(Debug, Clone)]
pub struct GibbsState {
    pub grid: PhaseGrid,
    pub profile: EnergyProfile,
    pub potential: Potential,
    pub values: Vec<f64>,
    /// Mass of the unnormalized profile on the truncated domain.
    pub z: f64,
    pub rho: Vec<f64>,
    pub m: Vec<f64>,
    pub big_m: Vec<f64>,
    /// `(ρ(x), 𝔐(v))` with `F = ρ(x) 𝔐(v)` when the state separates.
    pub factors: Option<(Vec<f64>, Vec<f64>)>,
    pub warnings: Vec<String>,
}

impl GibbsState {
    pub fn n_x(&self) -> usize {
        self.grid.n_x()
    }

    pub fn n_v(&self) -> usize {
        self.grid.n_v()
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    /// `√F` on the grid; the symmetrized unknown is `h = f / √F`.
    pub fn sqrt_values(&self) -> Vec<f64> {
        self.values.iter().map(|f| f.sqrt()).collect()
    }

    pub fn total_mass(&self) -> f64 {
        self.grid.cell() * self.values.iter().sum::<f64>()
    }

    pub fn is_separable(&self) -> bool {
        self.factors.is_some()
    }
}

/// Quadrature weights of the velocity axis for a `d`-dimensional isotropic
/// integral: `∫_{R^d} g(|v|) dv = ½ ω_d ∫_R |v|^{d-1} g(|v|) dv`.
pub fn velocity_weights(axis: &Axis, d: usize) -> Vec<f64> {
    if d == 1 {
        return vec![axis.spacing; axis.len()];
    }
    let half_area = 0.5 * sphere_area(d);
    axis.nodes
        .iter()
        .map(|v| half_area * v.abs().powi(d as i32 - 1) * axis.spacing)
        .collect()
}

/// Velocity moments `ρ = ∫F`, `m = (1/d)∫|v|²F`, `M = ∫|v|⁴F` per x node.
///
/// Values are rows of `n_v` entries. The truncated velocity tails are
/// estimated from the local algebraic decay of the integrand at the last
/// node and added back.
pub fn compute_moments(values: &[f64], grid: &PhaseGrid, d: usize) -> Moments {
    let n_v = grid.n_v();
    let weights = velocity_weights(&grid.v, d);
    let tail_scale = if d == 1 { 2.0 } else { sphere_area(d) };
    let v = &grid.v.nodes;
    let mut rho = Vec::with_capacity(grid.n_x());
    let mut m = Vec::with_capacity(grid.n_x());
    let mut big_m = Vec::with_capacity(grid.n_x());
    let mut truncation = [0.0f64; 3];
    for row in values.chunks(n_v) {
        let mut sums = [0.0; 3];
        for j in 0..n_v {
            let v2 = v[j] * v[j];
            let w = weights[j] * row[j];
            sums[0] += w;
            sums[1] += w * v2;
            sums[2] += w * v2 * v2;
        }
        for (k, power) in [0i32, 2, 4].into_iter().enumerate() {
            let tail = tail_estimate(row, v, grid.v.spacing, d as i32 - 1 + power) * tail_scale;
            let total = sums[k] + tail;
            if tail.is_infinite() {
                truncation[k] = f64::INFINITY;
            } else if total > 0.0 {
                truncation[k] = truncation[k].max((tail / total).abs());
            }
            sums[k] = total;
        }
        rho.push(sums[0]);
        m.push(sums[1] / d as f64);
        big_m.push(sums[2]);
    }
    Moments { rho, m, big_m, truncation }
}

/// Tail `∫_{v_last}^∞ |v|^power F dv` beyond the last velocity node, minus
/// the half cell the trapezoid rule already credits to it.
fn tail_estimate(row: &[f64], v: &[f64], dv: f64, power: i32) -> f64 {
    let n = row.len();
    let (v1, v0) = (v[n - 1], v[n - 2]);
    let g1 = v1.abs().powi(power) * row[n - 1];
    let g0 = v0.abs().powi(power) * row[n - 2];
    if g1 == 0.0 {
        return 0.0;
    }
    if g0 <= 0.0 || g1 < 0.0 {
        return 0.0;
    }
    let p = -(g1 / g0).ln() / (v1 / v0).ln();
    if p <= 1.0 {
        return f64::INFINITY;
    }
    g1 * (v1 / (p - 1.0) - 0.5 * dv)
}

/// `(∫Γ, (1/d)∫|v|²Γ, ∫|v|⁴Γ)` of `Γ(|v|²/2 + w)` over `R^d`, by the
/// exp-sinh rule in the radius; infinite where the moment diverges.
pub fn radial_moments(profile: EnergyProfile, w: f64) -> [f64; 3] {
    use std::f64::consts::FRAC_PI_2;
    let d = profile.d;
    let area = sphere_area(d);
    let p = profile.polytropic_exponent();
    let h = 1.0 / 64.0;
    let n = (4.5 / h) as i32;
    let mut out = [0.0; 3];
    for (k, power) in [0i32, 2, 4].into_iter().enumerate() {
        let a = d as i32 - 1 + power;
        if let Some(p) = p {
            if 2.0 * p - a as f64 <= 1.0 {
                out[k] = f64::INFINITY;
                continue;
            }
        }
        let mut sum = 0.0;
        for j in -n..=n {
            let t = j as f64 * h;
            let r = (FRAC_PI_2 * t.sinh()).exp();
            let jac = r * FRAC_PI_2 * t.cosh();
            sum += r.powi(a) * profile.gamma(0.5 * r * r + w) * jac;
        }
        out[k] = area * h * sum;
    }
    out[1] /= d as f64;
    out
}

/// Builds the normalized Gibbs state on `grid`.
pub fn build_gibbs_state(
    profile: EnergyProfile,
    potential: &Potential,
    grid: &PhaseGrid,
    options: GibbsOptions,
) -> Result<GibbsState> {
    const ORIGIN: &str = "equilibria::build_gibbs_state";
    potential.validate_on(&grid.x.nodes)?;
    let vx = potential.values(&grid.x.nodes);
    let n_x = grid.n_x();
    let n_v = grid.n_v();

    let (mut values, factors) = match profile.kind {
        ProfileKind::Maxwellian => {
            let vmin = vx.iter().cloned().fold(f64::INFINITY, f64::min);
            let rho_raw: Vec<f64> = vx.iter().map(|&v| (-(v - vmin)).exp()).collect();
            let m_raw: Vec<f64> = if profile.d == 1 {
                grid.v.nodes.iter().map(|&v| (-0.5 * v * v).exp()).collect()
            } else {
                return Err(domain(ORIGIN, "Maxwellian states are built with one velocity dimension"));
            };
            let rho_mass = grid.x.integrate(&rho_raw);
            let m_mass = grid.v.integrate(&m_raw);
            let rho: Vec<f64> = rho_raw.iter().map(|r| r / rho_mass).collect();
            let maxw: Vec<f64> = m_raw.iter().map(|r| r / m_mass).collect();
            let mut values = Vec::with_capacity(n_x * n_v);
            for &r in &rho {
                values.extend(maxw.iter().map(|&mv| r * mv));
            }
            (values, Some((rho, maxw)))
        }
        ProfileKind::Polytropic { .. } => {
            let mu = potential.mu_infinity();
            let mut values = Vec::with_capacity(n_x * n_v);
            for &v_pot in &vx {
                for &v in &grid.v.nodes {
                    let s = 0.5 * v * v + v_pot - mu;
                    if !(s > 0.0) {
                        return Err(domain(
                            ORIGIN,
                            format!("energy argument |v|²/2 + V - μ∞ = {s} is not positive"),
                        ));
                    }
                    values.push(profile.gamma(s));
                }
            }
            (values, None)
        }
    };

    let mut raw = compute_moments(&values, grid, profile.d);
    if !profile.is_maxwellian() {
        let mu = potential.mu_infinity();
        for (i, &v_pot) in vx.iter().enumerate() {
            raw.rho[i] = radial_moments(profile, v_pot - mu)[0];
        }
    }
    let z = grid.x.integrate(&raw.rho);
    if !(z.is_finite() && z > 0.0) {
        return Err(Error::Confinement {
            origin: ORIGIN,
            condition: "confinement",
            msg: format!("profile mass {z} is not finite and positive"),
        });
    }
    let peak = (0..n_x).fold(0, |best, i| if raw.rho[i] > raw.rho[best] { i } else { best });
    let x_peak = if potential.value(0.0) <= potential.value(grid.x.nodes[peak]) { 0.0 } else { grid.x.nodes[peak] };
    let edge = relative_density(profile, potential, grid.x.half_width, x_peak)
        .max(relative_density(profile, potential, -grid.x.half_width, x_peak));
    if edge > options.tail_cutoff {
        let condition = if profile.is_maxwellian() { "gibbs_integrable" } else { "polytropic_integrable" };
        return Err(Error::Confinement {
            origin: ORIGIN,
            condition,
            msg: format!(
                "ρ_F at the domain edge is {edge:.3e} of its maximum (cutoff {:.1e}); enlarge X or the potential is not confining",
                options.tail_cutoff
            ),
        });
    }
    if factors.is_none() {
        for f in values.iter_mut() {
            *f /= z;
        }
    }
    let mut moments = compute_moments(&values, grid, profile.d);
    if let ProfileKind::Polytropic { .. } = profile.kind {
        let mu = potential.mu_infinity();
        for (i, &v_pot) in vx.iter().enumerate() {
            let r = radial_moments(profile, v_pot - mu);
            for (k, target) in [&mut moments.rho, &mut moments.m, &mut moments.big_m].into_iter().enumerate() {
                if r[k].is_finite() {
                    target[i] = r[k] / z;
                }
            }
        }
    }
    let z = if profile.is_maxwellian() {
        let vmin = vx.iter().cloned().fold(f64::INFINITY, f64::min);
        let xm: f64 = grid.x.integrate(&vx.iter().map(|&v| (-(v - vmin)).exp()).collect::<Vec<_>>());
        let vm: f64 = grid.v.integrate(&grid.v.nodes.iter().map(|&v| (-0.5 * v * v).exp()).collect::<Vec<_>>());
        xm * vm * (-vmin).exp()
    } else {
        z
    };

    let mut warnings = Vec::new();
    for (k, name) in ["rho_F", "m_F", "M_F"].into_iter().enumerate() {
        let est = moments.truncation[k];
        if est > options.truncation_threshold {
            if options.strict {
                return Err(Error::Truncation {
                    origin: "equilibria::compute_moments",
                    moment: name,
                    estimate: est,
                    threshold: options.truncation_threshold,
                });
            }
            warnings.push(format!("velocity truncation of {name}: relative tail {est:.3e}"));
        }
    }

    Ok(GibbsState {
        grid: grid.clone(),
        profile,
        potential: potential.clone(),
        values,
        z,
        rho: moments.rho,
        m: moments.m,
        big_m: moments.big_m,
        factors,
        warnings,
    })
}

/// `ρ_F(x) / ρ_F(x_ref)` from the scaling of the velocity integral.
fn relative_density(profile: EnergyProfile, potential: &Potential, x: f64, x_ref: f64) -> f64 {
    let (v, v_ref) = (potential.value(x), potential.value(x_ref));
    match profile.kind {
        ProfileKind::Maxwellian => (-(v - v_ref)).exp(),
        ProfileKind::Polytropic { m } => {
            let mu = potential.mu_infinity();
            ((v - mu) / (v_ref - mu)).powf(-1.0 - 1.0 / (1.0 - m))
        }
    }
}

/// Smallest half width `X` with `ρ_F(±X)/ρ_F(0) ≤ cutoff`, searched by
/// doubling then bisection along the positive axis.
pub fn suggest_x_half_width(profile: EnergyProfile, potential: &Potential, cutoff: f64) -> Result<f64> {
    const ORIGIN: &str = "equilibria::suggest_x_half_width";
    let decay = |x: f64| relative_density(profile, potential, x, 0.0);
    let mut hi = 1.0;
    while decay(hi) > cutoff {
        hi *= 2.0;
        if hi > 1e8 {
            let condition = if profile.is_maxwellian() { "gibbs_integrable" } else { "polytropic_integrable" };
            return Err(Error::Confinement {
                origin: ORIGIN,
                condition,
                msg: format!("density does not decay to {cutoff:.1e} within |x| < 1e8"),
            });
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if decay(mid) > cutoff {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// Velocity half width for the Maxwellian so that `𝔐(V_max)/𝔐(0) = cutoff`.
pub fn maxwellian_v_half_width(cutoff: f64) -> f64 {
    (2.0 * (1.0 / cutoff).ln()).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn maxwell_state(potential: Potential, n: usize) -> GibbsState {
        let x_half = suggest_x_half_width(EnergyProfile::maxwellian(), &potential, 1e-13).unwrap();
        let grid = PhaseGrid::new(n, x_half, n, maxwellian_v_half_width(1e-14)).unwrap();
        build_gibbs_state(EnergyProfile::maxwellian(), &potential, &grid, GibbsOptions::default()).unwrap()
    }

    #[test]
    fn gaussian_state_value_at_origin() {
        let g = maxwell_state(Potential::quadratic(1.0), 101);
        let c = g.n_x() / 2;
        assert!((g.at(c, g.n_v() / 2) - 1.0 / (2.0 * std::f64::consts::PI)).abs() < 1e-10);
        assert!((g.total_mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn maxwellian_density_is_normalized_exponential() {
        let p = Potential::power_law(1.0);
        let g = maxwell_state(p.clone(), 64);
        let norm: f64 = g.grid.x.integrate(&g.grid.x.nodes.iter().map(|&x| (-p.value(x)).exp()).collect::<Vec<_>>());
        for (i, &x) in g.grid.x.nodes.iter().enumerate() {
            let expected = (-p.value(x)).exp() / norm;
            assert!((g.rho[i] - expected).abs() <= 1e-12 * expected.max(1e-300) + 1e-300);
        }
    }

    #[test]
    fn maxwellian_moments() {
        let g = maxwell_state(Potential::power_law(1.5), 64);
        for i in 0..g.n_x() {
            assert!((g.m[i] / g.rho[i] - 1.0).abs() < 1e-12);
            assert!((g.big_m[i] / g.rho[i] - 3.0).abs() < 1e-11);
        }
    }

    #[test]
    fn isotropy_in_velocity() {
        let g = maxwell_state(Potential::power_law(1.0), 40);
        for i in 0..g.n_x() {
            for j in 0..g.n_v() {
                assert_eq!(g.at(i, j), g.at(i, g.n_v() - 1 - j));
            }
        }
    }

    #[test]
    fn zero_rows_have_zero_moments() {
        let grid = PhaseGrid::new(8, 1.0, 16, 5.0).unwrap();
        let values = vec![0.0; grid.size()];
        let m = compute_moments(&values, &grid, 3);
        assert!(m.rho.iter().chain(&m.m).chain(&m.big_m).all(|&x| x == 0.0));
    }

    #[test]
    fn radial_moments_match_beta_integrals() {
        // ∫_0^∞ r^{b-1} (r²/2 + w)^{-p} dr = 2^{b/2-1} w^{b/2-p} B(b/2, p - b/2)
        let profile = EnergyProfile::polytropic(0.5, 3).unwrap();
        let w = 2.5;
        let m = radial_moments(profile, w);
        // p = 4.5; b = 3: Γ(1.5)Γ(3)/Γ(4.5); b = 5: Γ(2.5)Γ(2)/Γ(4.5); b = 7: Γ(3.5)Γ(1)/Γ(4.5)
        let sp = std::f64::consts::PI.sqrt();
        let g45 = 11.631728396567448;
        let beta = [0.5 * sp * 2.0 / g45, 0.75 * sp / g45, 1.875 * sp / g45];
        let area = 4.0 * std::f64::consts::PI;
        for (k, b) in [3.0f64, 5.0, 7.0].into_iter().enumerate() {
            let mut exact = area * 2f64.powf(b / 2.0 - 1.0) * w.powf(b / 2.0 - 4.5) * beta[k];
            if k == 1 {
                exact /= 3.0;
            }
            assert!((m[k] - exact).abs() < 1e-12 * exact, "{k}: {} vs {exact}", m[k]);
        }
        let divergent = radial_moments(EnergyProfile::polytropic(0.0, 3).unwrap(), 1.0);
        assert!(divergent[2].is_infinite() && divergent[0].is_finite());
    }

    #[test]
    fn polytropic_requires_positive_energy() {
        let grid = PhaseGrid::new(16, 2.0, 16, 5.0).unwrap();
        let xs: Vec<f64> = (0..41).map(|k| -4.0 + 0.2 * k as f64).collect();
        let vs = xs.iter().map(|x| x * x - 1.0).collect();
        let p = Potential::tabulated(xs, vs).unwrap();
        let err = build_gibbs_state(EnergyProfile::polytropic(0.5, 3).unwrap(), &p, &grid, GibbsOptions::default());
        assert!(matches!(err, Err(Error::Domain { .. })));
    }

    #[test]
    fn insufficient_domain_is_a_confinement_failure() {
        let grid = PhaseGrid::new(16, 2.0, 16, 8.0).unwrap();
        let err = build_gibbs_state(EnergyProfile::maxwellian(), &Potential::power_law(1.0), &grid, GibbsOptions::default());
        assert!(matches!(err, Err(Error::Confinement { condition: "gibbs_integrable", .. })));
    }

    #[test]
    fn logarithmic_growth_is_not_confining_at_desk_scale() {
        let err = suggest_x_half_width(EnergyProfile::maxwellian(), &Potential::logarithmic(0.4), 1e-12);
        assert!(matches!(err, Err(Error::Confinement { .. })));
    }

    #[test]
    fn divergent_fourth_moment_is_flagged_in_strict_mode() {
        // m = 0, d = 3: ∫|v|^4 F dv diverges logarithmically.
        let grid = PhaseGrid::new(16, 2.0, 4000, 200.0).unwrap();
        let profile = EnergyProfile::polytropic(0.0, 3).unwrap();
        let p = Potential::power_law(1.0);
        let strict = GibbsOptions { strict: true, tail_cutoff: 1.0, truncation_threshold: 1e-2 };
        let err = build_gibbs_state(profile, &p, &grid, strict);
        assert!(matches!(err, Err(Error::Truncation { moment: "M_F", .. })), "{err:?}");
        let lax = build_gibbs_state(profile, &p, &grid, GibbsOptions { strict: false, ..strict }).unwrap();
        assert!(!lax.warnings.is_empty());
    }
}
