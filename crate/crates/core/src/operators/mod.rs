//! Discrete transport, collision, projection, auxiliary operator and the
//! modified entropy.
//!
//! Everything acts on the symmetrized unknown `h = f / √F`, for which the
//! weighted inner product is the plain grid inner product.

pub mod auxiliary;
pub mod collision;
pub mod field;
pub mod grid;
pub mod transport;

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::equilibria::GibbsState;
use crate::error::{domain, Error, Result};

pub use auxiliary::Auxiliary;
pub use collision::{Collision, CollisionKind, ScatteringKernel};
pub use field::{density, flux, mu_inner, mu_norm, project_pi, Field};
pub use grid::{Axis, Boundary, PhaseGrid};
pub use transport::{tail_weights, Transport};

use auxiliary::dot;

/// Terms of the entropy dissipation `D[f]`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Dissipation {
    /// `-⟨Lf, f⟩`
    pub microscopic: f64,
    /// `ε⟨ATΠf, f⟩`
    pub macroscopic: f64,
    /// `ε⟨AT(1-Π)f, f⟩`
    pub transport_perp: f64,
    /// `-ε⟨TAf, f⟩`
    pub transport_aux: f64,
    /// `-ε⟨ALf, f⟩`
    pub collision_aux: f64,
    pub total: f64,
}

/// Assembled operators for a separable Maxwellian state.
#[derive(Debug, Clone)]
pub struct OperatorSet {
    pub grid: PhaseGrid,
    pub rho: Vec<f64>,
    pub maxwellian: Vec<f64>,
    pub sqrt_f: Vec<f64>,
    pub transport: Transport,
    pub collision: Collision,
    pub aux: Auxiliary,
}

fn factors<'a>(gibbs: &'a GibbsState, origin: &'static str) -> Result<(&'a [f64], &'a [f64])> {
    match &gibbs.factors {
        Some((rho, maxw)) => Ok((rho, maxw)),
        None => Err(domain(origin, "kinetic operators need a separable Maxwellian state")),
    }
}

pub fn assemble_transport(gibbs: &GibbsState) -> Result<Transport> {
    let (rho, maxw) = factors(gibbs, "operators::assemble_transport")?;
    let g = &gibbs.grid;
    Transport::assemble(rho, g.x.spacing, &g.v.nodes, maxw, g.v.spacing)
}

pub fn assemble_collision(kind: CollisionKind, gibbs: &GibbsState) -> Result<Collision> {
    let (_, maxw) = factors(gibbs, "operators::assemble_collision")?;
    let g = &gibbs.grid;
    Collision::assemble(kind, &g.v.nodes, maxw, g.v.spacing)
}

impl OperatorSet {
    pub fn assemble(gibbs: &GibbsState, kind: CollisionKind) -> Result<Self> {
        let (rho, maxw) = factors(gibbs, "operators::OperatorSet")?;
        let transport = assemble_transport(gibbs)?;
        let collision = assemble_collision(kind, gibbs)?;
        let q_hat: Vec<f64> = collision.q_hat.iter().copied().collect();
        let aux = Auxiliary::assemble(&transport.b, gibbs.grid.x.spacing, &gibbs.grid.v.nodes, &q_hat)?;
        let mut sqrt_f = Vec::with_capacity(gibbs.grid.size());
        for r in rho {
            sqrt_f.extend(maxw.iter().map(|m| (r * m).sqrt()));
        }
        Ok(Self {
            grid: gibbs.grid.clone(),
            rho: rho.to_vec(),
            maxwellian: maxw.to_vec(),
            sqrt_f,
            transport,
            collision,
            aux,
        })
    }

    pub fn n_x(&self) -> usize {
        self.grid.n_x()
    }

    pub fn n_v(&self) -> usize {
        self.grid.n_v()
    }

    pub fn size(&self) -> usize {
        self.grid.size()
    }

    pub fn to_symmetric(&self, f: &[f64]) -> Vec<f64> {
        f.iter().zip(&self.sqrt_f).map(|(f, s)| f / s).collect()
    }

    pub fn from_symmetric(&self, h: &[f64]) -> Vec<f64> {
        h.iter().zip(&self.sqrt_f).map(|(h, s)| h * s).collect()
    }

    /// Weighted inner product in symmetrized coordinates.
    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        self.grid.cell() * dot(a, b)
    }

    pub fn norm(&self, a: &[f64]) -> f64 {
        self.inner(a, a).sqrt()
    }

    pub fn apply_t(&self, h: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; h.len()];
        self.transport.apply(h, &mut out);
        out
    }

    pub fn apply_l(&self, h: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; h.len()];
        self.collision.apply(h, &mut out);
        out
    }

    pub fn project(&self, h: &[f64]) -> Vec<f64> {
        self.aux.extend(&self.aux.restrict(h))
    }

    pub fn project_perp(&self, h: &[f64]) -> Vec<f64> {
        let p = self.project(h);
        h.iter().zip(&p).map(|(a, b)| a - b).collect()
    }

    pub fn apply_a(&self, h: &[f64]) -> Vec<f64> {
        self.aux.apply(h)
    }

    pub fn apply_a_transpose(&self, h: &[f64]) -> Vec<f64> {
        self.aux.apply_transpose(h)
    }

    /// `h = √F` scaled by the unit-mass normalization: the global equilibrium.
    pub fn equilibrium(&self) -> Vec<f64> {
        self.sqrt_f.clone()
    }

    /// Mass `∬ f` of the field with symmetrized values `h`.
    pub fn mass(&self, h: &[f64]) -> f64 {
        self.inner(h, &self.sqrt_f)
    }

    /// Largest local mass defect `|∫ Lf dv|` over x nodes.
    pub fn local_mass_defect(&self, h: &[f64]) -> f64 {
        let lh = self.apply_l(h);
        let n_v = self.n_v();
        lh.chunks(n_v)
            .zip(self.sqrt_f.chunks(n_v))
            .map(|(row, s)| (self.grid.v.spacing * dot(row, s)).abs())
            .fold(0.0, f64::max)
    }

    /// `H[f] = ½‖f‖² + ε⟨Af, f⟩`
    pub fn modified_entropy(&self, h: &[f64], eps: f64) -> Result<f64> {
        check_eps(eps, "operators::modified_entropy")?;
        let mut value = 0.5 * self.inner(h, h);
        if eps > 0.0 {
            value += eps * self.inner(&self.apply_a(h), h);
        }
        Ok(value)
    }

    /// Entropy dissipation `D[f]` with its five terms.
    pub fn entropy_dissipation(&self, h: &[f64], eps: f64) -> Result<Dissipation> {
        check_eps(eps, "operators::entropy_dissipation")?;
        let lh = self.apply_l(h);
        let microscopic = -self.inner(&lh, h);
        let pi = self.project(h);
        let perp: Vec<f64> = h.iter().zip(&pi).map(|(a, b)| a - b).collect();
        let macroscopic = eps * self.inner(&self.apply_a(&self.apply_t(&pi)), h);
        let transport_perp = eps * self.inner(&self.apply_a(&self.apply_t(&perp)), h);
        let transport_aux = -eps * self.inner(&self.apply_t(&self.apply_a(h)), h);
        let collision_aux = -eps * self.inner(&self.apply_a(&lh), h);
        Ok(Dissipation {
            microscopic,
            macroscopic,
            transport_perp,
            transport_aux,
            collision_aux,
            total: microscopic + macroscopic + transport_perp + transport_aux + collision_aux,
        })
    }

    /// Writes `transport.coo` and `collision.coo` with one `row col value`
    /// line per nonzero of the symmetrized matrices.
    pub fn export_sparse(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        let io = |source| Error::Io { origin: "operators::export_sparse", source };
        std::fs::create_dir_all(dir).map_err(io)?;
        let n_v = self.n_v();
        let mut collision = Vec::new();
        for i in 0..self.n_x() {
            for r in 0..n_v {
                for c in 0..n_v {
                    let val = self.collision.matrix[(r, c)];
                    if val != 0.0 {
                        collision.push((i * n_v + r, i * n_v + c, val));
                    }
                }
            }
        }
        let mut written = Vec::new();
        for (name, entries) in [("transport.coo", self.transport.triplets()), ("collision.coo", collision)] {
            let path = dir.join(name);
            let mut file = std::io::BufWriter::new(std::fs::File::create(&path).map_err(io)?);
            writeln!(file, "# {} {}", self.size(), self.size()).map_err(io)?;
            for (r, c, v) in entries {
                writeln!(file, "{r} {c} {v:.17e}").map_err(io)?;
            }
            file.flush().map_err(io)?;
            written.push(path);
        }
        Ok(written)
    }
}

fn check_eps(eps: f64, origin: &'static str) -> Result<()> {
    if (0.0..1.0).contains(&eps) {
        Ok(())
    } else {
        Err(domain(origin, format!("ε = {eps} must lie in [0, 1)")))
    }
}

/// `Af` for a field given by its values `f`.
pub fn apply_a(f: &Field, ops: &OperatorSet) -> Field {
    Field::new(ops.from_symmetric(&ops.apply_a(&ops.to_symmetric(&f.values))))
}

pub fn modified_entropy(f: &Field, ops: &OperatorSet, eps: f64) -> Result<f64> {
    ops.modified_entropy(&ops.to_symmetric(&f.values), eps)
}

pub fn entropy_dissipation(f: &Field, ops: &OperatorSet, eps: f64) -> Result<Dissipation> {
    ops.entropy_dissipation(&ops.to_symmetric(&f.values), eps)
}
