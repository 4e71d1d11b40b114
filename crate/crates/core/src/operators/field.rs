use crate::equilibria::GibbsState;
use crate::error::{domain, Result};
use crate::operators::grid::PhaseGrid;

/// Distribution values on the phase grid with optionally cached moments.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub values: Vec<f64>,
    rho: Option<Vec<f64>>,
    flux: Option<Vec<f64>>,
}

impl Field {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values, rho: None, flux: None }
    }

    /// Field with density and flux cached from quadrature.
    pub fn with_moments(values: Vec<f64>, grid: &PhaseGrid) -> Self {
        let rho = density(&values, grid);
        let flux = flux(&values, grid);
        Self { values, rho: Some(rho), flux: Some(flux) }
    }

    pub fn cached_density(&self) -> Option<&[f64]> {
        self.rho.as_deref()
    }

    pub fn cached_flux(&self) -> Option<&[f64]> {
        self.flux.as_deref()
    }
}

/// `ρ_f(x_i) = Σ_j f_ij Δv`
pub fn density(values: &[f64], grid: &PhaseGrid) -> Vec<f64> {
    values.chunks(grid.n_v()).map(|row| grid.v.integrate(row)).collect()
}

/// `j_f(x_i) = Σ_j v_j f_ij Δv`
pub fn flux(values: &[f64], grid: &PhaseGrid) -> Vec<f64> {
    let v = &grid.v.nodes;
    values
        .chunks(grid.n_v())
        .map(|row| grid.v.spacing * row.iter().zip(v).map(|(f, v)| f * v).sum::<f64>())
        .collect()
}

/// `⟨f, g⟩ = ∬ f g / F dv dx` by grid quadrature.
pub fn mu_inner(f: &[f64], g: &[f64], gibbs: &GibbsState) -> Result<f64> {
    let mut acc = 0.0;
    for ((a, b), big_f) in f.iter().zip(g).zip(&gibbs.values) {
        let prod = a * b;
        if prod == 0.0 {
            continue;
        }
        if !(*big_f > 0.0) {
            return Err(domain("operators::mu_inner", "field is supported where F vanishes"));
        }
        acc += prod / big_f;
    }
    Ok(acc * gibbs.grid.cell())
}

pub fn mu_norm(f: &[f64], gibbs: &GibbsState) -> Result<f64> {
    mu_inner(f, f, gibbs).map(f64::sqrt)
}

/// `Πf = (ρ_f / ρ_F) F`
pub fn project_pi(f: &[f64], gibbs: &GibbsState) -> Vec<f64> {
    let grid = &gibbs.grid;
    let rho_f = density(f, grid);
    let rho_big = density(&gibbs.values, grid);
    let n_v = grid.n_v();
    let mut out = Vec::with_capacity(f.len());
    for i in 0..grid.n_x() {
        let ratio = rho_f[i] / rho_big[i];
        out.extend(gibbs.values[i * n_v..(i + 1) * n_v].iter().map(|big_f| ratio * big_f));
    }
    out
}
