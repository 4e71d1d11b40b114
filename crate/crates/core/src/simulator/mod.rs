//! Time integration of `∂t f = (L - T) f`, diagnostics, decay-rate fitting and
//! the drift-diffusion limit.

pub mod fit;
pub mod limit;

use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::equilibria::{
    build_gibbs_state, maxwellian_v_half_width, suggest_x_half_width, EnergyProfile, GibbsOptions, GibbsState,
    Potential,
};
use crate::error::{domain, Error, Result};
use crate::operators::auxiliary::dot;
use crate::operators::{CollisionKind, OperatorSet, PhaseGrid};
use crate::spectral::{certify, PowerOptions};

pub use fit::{fit_decay_rate, DecayFit};
pub use limit::{diffusion_limit_check, drift_diffusion_solve, DensitySeries, LimitRow, LimitStencil, LimitTable};

/// Largest `dt · ‖T‖` accepted for the explicit Runge–Kutta transport step.
pub const TRANSPORT_STABILITY: f64 = 2.0 * std::f64::consts::SQRT_2;

#[derive(Debug, Clone, PartialEq)]
pub enum InitialDatum {
    /// Seeded uniform values of `f/√F`, with the mass projection removed.
    RandomZeroMass { seed: u64 },
    /// `f = φ(x) F` with `φ(x) = x`, minus its mass.
    LocalEquilibriumPerturbation,
    /// `f = φ(x)(1 + v) F` with a smooth bump `φ`, minus its mass.
    Smooth,
    /// Values of `f` on the grid, row-major with velocity fastest.
    Tabulated(Vec<f64>),
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub collision: CollisionKind,
    pub potential: Potential,
    pub profile: EnergyProfile,
    pub n_x: usize,
    pub n_v: usize,
    /// Defaults to the width at which `ρ_F` falls to `1e-12` of its peak.
    pub x_half: Option<f64>,
    pub v_half: Option<f64>,
    /// Entropy parameter; `None` takes `eps_star` from the certificate.
    pub eps: Option<f64>,
    pub initial: InitialDatum,
    pub t_end: f64,
    /// `None` picks 90% of the transport stability bound.
    pub dt: Option<f64>,
    pub stride: usize,
    /// Parabolic scaling `ε_p`: integrates `ε_p² ∂t f + ε_p T f = L f`.
    pub scaling: f64,
    /// Relative tolerance on increases of `H` between steps; `None` disables the check.
    pub entropy_tol: Option<f64>,
    pub store_densities: bool,
}

impl Scenario {
    pub fn new(collision: CollisionKind, potential: Potential, n_x: usize, n_v: usize) -> Self {
        Self {
            collision,
            potential,
            profile: EnergyProfile::maxwellian(),
            n_x,
            n_v,
            x_half: None,
            v_half: None,
            eps: None,
            initial: InitialDatum::RandomZeroMass { seed: 1 },
            t_end: 20.0,
            dt: None,
            stride: 10,
            scaling: 1.0,
            entropy_tol: Some(1e-9),
            store_densities: false,
        }
    }

    pub fn grid(&self) -> Result<PhaseGrid> {
        let x_half = match self.x_half {
            Some(x) => x,
            None => suggest_x_half_width(self.profile, &self.potential, 1e-12)?,
        };
        PhaseGrid::new(self.n_x, x_half, self.n_v, self.v_half.unwrap_or_else(|| maxwellian_v_half_width(1e-16)))
    }

    pub fn gibbs(&self) -> Result<GibbsState> {
        build_gibbs_state(self.profile, &self.potential, &self.grid()?, GibbsOptions::default())
    }

    pub fn operators(&self) -> Result<OperatorSet> {
        OperatorSet::assemble(&self.gibbs()?, self.collision.clone())
    }
}

/// Diagnostics sampled along a trajectory.
#[derive(Debug, Clone, Default, PartialEq, serde::Serialize)]
pub struct TimeSeries {
    pub t: Vec<f64>,
    pub mass: Vec<f64>,
    pub norm: Vec<f64>,
    pub entropy: Vec<f64>,
    pub dissipation: Vec<f64>,
    pub norm_pi: Vec<f64>,
    pub norm_perp: Vec<f64>,
    /// `ρ_f(x)` per sample when requested.
    pub densities: Vec<Vec<f64>>,
    pub eps: f64,
    pub dt: f64,
    /// Largest increase of `H` over one step relative to `H`.
    pub max_entropy_increase: f64,
    /// `f/√F` at the final time.
    pub final_state: Vec<f64>,
}

pub const CSV_HEADER: &str = "t,mass,norm,H,D,norm_pi,norm_perp";

impl TimeSeries {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn fit_rate(&self) -> Result<DecayFit> {
        fit_decay_rate(&self.t, &self.norm, None)
    }

    /// Largest `|M(t) - M(0)|` divided by the elapsed time.
    pub fn mass_drift_rate(&self) -> f64 {
        (1..self.len())
            .map(|k| (self.mass[k] - self.mass[0]).abs() / (self.t[k] - self.t[0]))
            .fold(0.0, f64::max)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let io = |source| Error::Io { origin: "simulator::TimeSeries", source };
        let mut out = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
        writeln!(out, "{CSV_HEADER}").map_err(io)?;
        for k in 0..self.len() {
            writeln!(
                out,
                "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
                self.t[k],
                self.mass[k],
                self.norm[k],
                self.entropy[k],
                self.dissipation[k],
                self.norm_pi[k],
                self.norm_perp[k]
            )
            .map_err(io)?;
        }
        out.flush().map_err(io)
    }
}

/// Strang splitting: exact collision half steps around a classical
/// Runge–Kutta transport step.
pub struct Stepper<'a> {
    ops: &'a OperatorSet,
    dt: f64,
    transport_scale: f64,
    half_collision: DMatrix<f64>,
    buf: [Vec<f64>; 5],
}

impl<'a> Stepper<'a> {
    pub fn new(ops: &'a OperatorSet, dt: f64, scaling: f64) -> Result<Self> {
        const ORIGIN: &str = "simulator::integrate";
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(domain(ORIGIN, format!("dt = {dt} must be positive")));
        }
        if !(scaling > 0.0 && scaling <= 1.0) {
            return Err(domain(ORIGIN, format!("parabolic scaling {scaling} must lie in (0, 1]")));
        }
        let transport_scale = 1.0 / scaling;
        let bound = ops.transport.norm_bound() * transport_scale;
        if dt * bound > TRANSPORT_STABILITY {
            return Err(domain(
                ORIGIN,
                format!("dt = {dt} exceeds the transport stability bound {:.4e}", TRANSPORT_STABILITY / bound),
            ));
        }
        let tau = 0.5 * dt / (scaling * scaling);
        let half_collision = collision_flow(&ops.collision.matrix, tau);
        let n = ops.size();
        Ok(Self { ops, dt, transport_scale, half_collision, buf: std::array::from_fn(|_| vec![0.0; n]) })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn collide(&mut self, h: &mut [f64]) {
        let n_v = self.ops.n_v();
        let m = &self.half_collision;
        let tmp = &mut self.buf[4][..n_v];
        for row in h.chunks_mut(n_v) {
            for r in 0..n_v {
                let mut s = 0.0;
                for c in 0..n_v {
                    s += m[(r, c)] * row[c];
                }
                tmp[r] = s;
            }
            row.copy_from_slice(tmp);
        }
    }

    fn transport(&mut self, h: &mut [f64]) {
        let c = -self.dt * self.transport_scale;
        let t = &self.ops.transport;
        let [k1, k2, k3, stage, k4] = &mut self.buf;
        t.apply(h, k1);
        for i in 0..h.len() {
            stage[i] = h[i] + 0.5 * c * k1[i];
        }
        t.apply(stage, k2);
        for i in 0..h.len() {
            stage[i] = h[i] + 0.5 * c * k2[i];
        }
        t.apply(stage, k3);
        for i in 0..h.len() {
            stage[i] = h[i] + c * k3[i];
        }
        t.apply(stage, k4);
        for i in 0..h.len() {
            h[i] += c / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }

    /// Advances `h = f/√F` by one step.
    pub fn step(&mut self, h: &mut [f64]) {
        self.collide(h);
        self.transport(h);
        self.collide(h);
    }
}

/// `exp(τL)` of the velocity block.
fn collision_flow(l: &DMatrix<f64>, tau: f64) -> DMatrix<f64> {
    let sym = (l - l.transpose()).amax() <= 1e-13 * l.amax();
    if sym {
        let eig = l.clone().symmetric_eigen();
        let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|x| (tau * x).exp()));
        &eig.eigenvectors * d * eig.eigenvectors.transpose()
    } else {
        (l * tau).exp()
    }
}

/// `f/√F` of the initial datum, with zero mass.
pub fn initial_state(datum: &InitialDatum, ops: &OperatorSet) -> Result<Vec<f64>> {
    const ORIGIN: &str = "simulator::Scenario";
    let g = &ops.grid;
    let mut h: Vec<f64> = match datum {
        InitialDatum::RandomZeroMass { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            (0..ops.size()).map(|_| rng.gen_range(-1.0..1.0)).collect()
        }
        InitialDatum::LocalEquilibriumPerturbation => {
            let mut h = Vec::with_capacity(ops.size());
            for (i, &x) in g.x.nodes.iter().enumerate() {
                h.extend(ops.sqrt_f[i * g.n_v()..(i + 1) * g.n_v()].iter().map(|s| x * s));
            }
            h
        }
        InitialDatum::Smooth => {
            let w = g.x.half_width / 3.0;
            let mut h = Vec::with_capacity(ops.size());
            for (i, &x) in g.x.nodes.iter().enumerate() {
                let phi = (1.0 + x / w) * (-(x / w).powi(2)).exp();
                for (j, &v) in g.v.nodes.iter().enumerate() {
                    h.push(phi * (1.0 + v) * ops.sqrt_f[i * g.n_v() + j]);
                }
            }
            h
        }
        InitialDatum::Tabulated(f) => {
            if f.len() != ops.size() {
                return Err(domain(ORIGIN, format!("tabulated datum has {} values, grid has {}", f.len(), ops.size())));
            }
            if f.iter().any(|x| !x.is_finite()) {
                return Err(domain(ORIGIN, "tabulated datum contains non-finite values"));
            }
            ops.to_symmetric(f)
        }
    };
    remove_mass(&mut h, ops);
    Ok(h)
}

/// `InitialDatum::Tabulated` for a state given as `f/√F`.
pub fn initial_state_from_symmetric(ops: &OperatorSet, h: &[f64]) -> Vec<f64> {
    let mut h = h.to_vec();
    remove_mass(&mut h, ops);
    h
}

/// Subtracts the component along `√F`.
pub fn remove_mass(h: &mut [f64], ops: &OperatorSet) {
    let s = &ops.sqrt_f;
    let c = dot(h, s) / dot(s, s);
    for (a, b) in h.iter_mut().zip(s) {
        *a -= c * b;
    }
}

/// Per-x density `ρ_f = ∫ f dv` of `h = f/√F`.
pub fn density_of(ops: &OperatorSet, h: &[f64]) -> Vec<f64> {
    let n_v = ops.n_v();
    let dv = ops.grid.v.spacing;
    h.chunks(n_v).zip(ops.sqrt_f.chunks(n_v)).map(|(a, b)| dv * dot(a, b)).collect()
}

fn resolve_eps(scenario: &Scenario, ops: &OperatorSet) -> Result<f64> {
    match scenario.eps {
        Some(e) => Ok(e),
        None => Ok(certify(ops, PowerOptions::default())?.0.eps_star),
    }
}

pub fn stable_dt(ops: &OperatorSet, scaling: f64) -> f64 {
    0.9 * TRANSPORT_STABILITY * scaling / ops.transport.norm_bound()
}

/// Integrates the scenario from its initial datum.
pub fn integrate(scenario: &Scenario, ops: &OperatorSet) -> Result<TimeSeries> {
    let h0 = initial_state(&scenario.initial, ops)?;
    integrate_from(scenario, ops, h0, 0.0)
}

/// Integrates from `h0 = f/√F` at time `t0` up to `scenario.t_end`.
pub fn integrate_from(scenario: &Scenario, ops: &OperatorSet, h0: Vec<f64>, t0: f64) -> Result<TimeSeries> {
    const ORIGIN: &str = "simulator::integrate";
    if h0.len() != ops.size() {
        return Err(domain(ORIGIN, "state does not match the grid"));
    }
    if !(scenario.t_end > t0) {
        return Err(domain(ORIGIN, format!("t_end = {} must exceed the start time {t0}", scenario.t_end)));
    }
    let eps = resolve_eps(scenario, ops)?;
    let dt = scenario.dt.unwrap_or_else(|| stable_dt(ops, scenario.scaling));
    let mut stepper = Stepper::new(ops, dt, scenario.scaling)?;
    let steps = ((scenario.t_end - t0) / dt).round().max(1.0) as usize;
    let stride = scenario.stride.max(1);

    let mut series = TimeSeries { eps, dt, ..Default::default() };
    let mut h = h0;
    let record = |series: &mut TimeSeries, h: &[f64], t: f64| -> Result<()> {
        let pi = ops.project(h);
        let perp: Vec<f64> = h.iter().zip(&pi).map(|(a, b)| a - b).collect();
        series.t.push(t);
        series.mass.push(ops.mass(h));
        series.norm.push(ops.norm(h));
        series.entropy.push(ops.modified_entropy(h, eps)?);
        series.dissipation.push(ops.entropy_dissipation(h, eps)?.total);
        series.norm_pi.push(ops.norm(&pi));
        series.norm_perp.push(ops.norm(&perp));
        if scenario.store_densities {
            series.densities.push(density_of(ops, h));
        }
        Ok(())
    };
    record(&mut series, &h, t0)?;
    let mut entropy = ops.modified_entropy(&h, eps)?;
    let mut last = h.clone();
    for n in 1..=steps {
        let t = t0 + n as f64 * dt;
        last.copy_from_slice(&h);
        stepper.step(&mut h);
        if h.iter().any(|x| !x.is_finite()) {
            return Err(Error::Divergence { origin: ORIGIN, t, last_valid: ops.from_symmetric(&last) });
        }
        if let Some(tol) = scenario.entropy_tol {
            let next = ops.modified_entropy(&h, eps)?;
            let increase = (next - entropy) / entropy.abs().max(f64::MIN_POSITIVE);
            series.max_entropy_increase = series.max_entropy_increase.max(increase);
            if increase > tol {
                return Err(Error::EntropyIncrease { origin: ORIGIN, t, increase: next - entropy });
            }
            entropy = next;
        }
        if n % stride == 0 || n == steps {
            record(&mut series, &h, t)?;
        }
    }
    series.final_state = h;
    Ok(series)
}

/// `|(H(f_Δ) - H(f_0))/Δ + D(f_{Δ/2})|` for one step of size `Δ` from `h0`.
pub fn entropy_identity_defect(ops: &OperatorSet, h0: &[f64], eps: f64, delta: f64) -> Result<f64> {
    let mut full = h0.to_vec();
    Stepper::new(ops, delta, 1.0)?.step(&mut full);
    let mut half = h0.to_vec();
    Stepper::new(ops, delta / 2.0, 1.0)?.step(&mut half);
    let dh = (ops.modified_entropy(&full, eps)? - ops.modified_entropy(h0, eps)?) / delta;
    Ok((dh + ops.entropy_dissipation(&half, eps)?.total).abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(kind: CollisionKind) -> (Scenario, OperatorSet) {
        let mut s = Scenario::new(kind, Potential::power_law(1.0), 32, 24);
        s.t_end = 2.0;
        s.stride = 5;
        let ops = s.operators().unwrap();
        (s, ops)
    }

    #[test]
    fn zero_datum_stays_zero() {
        let (mut s, ops) = small(CollisionKind::Bgk);
        s.initial = InitialDatum::Tabulated(vec![0.0; ops.size()]);
        s.eps = Some(0.1);
        let ts = integrate(&s, &ops).unwrap();
        assert!(ts.norm.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn random_datum_has_zero_mass_and_decays() {
        let (s, ops) = small(CollisionKind::FokkerPlanck);
        let ts = integrate(&s, &ops).unwrap();
        assert!(ts.mass[0].abs() < 1e-14);
        assert!(ts.mass_drift_rate() < 1e-11);
        assert!(ts.norm.last().unwrap() < &ts.norm[0]);
        assert!(ts.entropy.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9)));
    }

    #[test]
    fn semigroup_is_bitwise() {
        let (mut s, ops) = small(CollisionKind::Bgk);
        s.eps = Some(0.05);
        s.dt = Some(0.01);
        let h0 = initial_state(&s.initial, &ops).unwrap();
        let whole = integrate_from(&s, &ops, h0.clone(), 0.0).unwrap();
        let mut first = s.clone();
        first.t_end = 1.0;
        let a = integrate_from(&first, &ops, h0, 0.0).unwrap();
        let b = integrate_from(&s, &ops, a.final_state, 1.0).unwrap();
        assert_eq!(whole.final_state, b.final_state);
    }

    #[test]
    fn unstable_step_is_rejected() {
        let (mut s, ops) = small(CollisionKind::Bgk);
        s.dt = Some(10.0);
        assert!(matches!(integrate(&s, &ops), Err(Error::Domain { .. })));
    }

    #[test]
    fn collision_flow_matches_series() {
        let (_, ops) = small(CollisionKind::FokkerPlanck);
        let l = &ops.collision.matrix;
        let e = collision_flow(l, 1e-3);
        let approx = DMatrix::identity(l.nrows(), l.nrows()) + l * 1e-3 + l * l * 5e-7;
        assert!((e - approx).amax() < 1e-6);
    }
}
