use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{numerical, Result};

/// Auxiliary operator `A = (1 + (TΠ)*(TΠ))⁻¹ (TΠ)*` reduced to the
/// coefficient space of local equilibria.
///
/// Writing `Πh = c ⊗ q̂`, the transport of a local equilibrium is
/// `TΠh = (Bc) ⊗ y` with `y = v q̂` and `Bc = D_x c + (b/2) c`. Hence
/// `A h = E S Bᵀ w` where `w_i = y · h_i`, `E c = c ⊗ q̂` and
/// `S = (1 + |y|² BᵀB)⁻¹`, a pentadiagonal SPD system factorized once.
#[derive(Debug, Clone)]
pub struct Auxiliary {
    pub n_x: usize,
    pub n_v: usize,
    pub dx: f64,
    pub half_b: Vec<f64>,
    pub y: Vec<f64>,
    pub y_norm_sq: f64,
    pub q_hat: Vec<f64>,
    chol: Cholesky<f64, Dyn>,
}

impl Auxiliary {
    pub fn assemble(b: &[f64], dx: f64, v: &[f64], q_hat: &[f64]) -> Result<Self> {
        let n_x = b.len();
        let y: Vec<f64> = v.iter().zip(q_hat).map(|(v, q)| v * q).collect();
        let y_norm_sq = y.iter().map(|x| x * x).sum();
        let half_b: Vec<f64> = b.iter().map(|b| 0.5 * b).collect();
        let bm = b_matrix(&half_b, dx);
        let system = DMatrix::identity(n_x, n_x) + bm.transpose() * bm * y_norm_sq;
        let chol = Cholesky::new(system).ok_or_else(|| {
            numerical("operators::apply_A", "elliptic system 1 + |y|²BᵀB is not positive definite")
        })?;
        Ok(Self { n_x, n_v: v.len(), dx, half_b, y, y_norm_sq, q_hat: q_hat.to_vec(), chol })
    }

    /// `Bc = D_x c + (b/2) c`; its kernel is spanned by `√ρ_F`.
    pub fn apply_b(&self, c: &[f64]) -> Vec<f64> {
        let n = self.n_x;
        let k = 0.5 / self.dx;
        (0..n)
            .map(|i| {
                let r = if i + 1 < n { c[i + 1] } else { 0.0 };
                let l = if i > 0 { c[i - 1] } else { 0.0 };
                (r - l) * k + self.half_b[i] * c[i]
            })
            .collect()
    }

    pub fn apply_bt(&self, r: &[f64]) -> Vec<f64> {
        let n = self.n_x;
        let k = 0.5 / self.dx;
        (0..n)
            .map(|i| {
                let right = if i + 1 < n { r[i + 1] } else { 0.0 };
                let left = if i > 0 { r[i - 1] } else { 0.0 };
                -(right - left) * k + self.half_b[i] * r[i]
            })
            .collect()
    }

    pub fn b_matrix(&self) -> DMatrix<f64> {
        b_matrix(&self.half_b, self.dx)
    }

    pub fn btb_matrix(&self) -> DMatrix<f64> {
        let b = self.b_matrix();
        b.transpose() * b
    }

    pub fn solve_s(&self, c: &[f64]) -> Vec<f64> {
        self.chol.solve(&DVector::from_column_slice(c)).iter().copied().collect()
    }

    /// `R h = (q̂ · h_i)_i`, the coefficients of `Πh`.
    pub fn restrict(&self, h: &[f64]) -> Vec<f64> {
        h.chunks(self.n_v).map(|row| dot(row, &self.q_hat)).collect()
    }

    /// `E c = c ⊗ q̂`
    pub fn extend(&self, c: &[f64]) -> Vec<f64> {
        tensor(c, &self.q_hat)
    }

    /// `(y · h_i)_i`, proportional to the flux `j_f`.
    pub fn flux_moment(&self, h: &[f64]) -> Vec<f64> {
        h.chunks(self.n_v).map(|row| dot(row, &self.y)).collect()
    }

    /// `c ⊗ y`
    pub fn extend_flux(&self, c: &[f64]) -> Vec<f64> {
        tensor(c, &self.y)
    }

    /// Coefficients `S Bᵀ w` of `Ah` in the basis of local equilibria.
    pub fn coefficients(&self, h: &[f64]) -> Vec<f64> {
        self.solve_s(&self.apply_bt(&self.flux_moment(h)))
    }

    pub fn apply(&self, h: &[f64]) -> Vec<f64> {
        self.extend(&self.coefficients(h))
    }

    /// `Aᵀ h = Y B S R h`
    pub fn apply_transpose(&self, h: &[f64]) -> Vec<f64> {
        self.extend_flux(&self.apply_b(&self.solve_s(&self.restrict(h))))
    }

    /// `T A h = (B S Bᵀ w) ⊗ y`, computed without a transport sweep.
    pub fn transport_of(&self, h: &[f64]) -> Vec<f64> {
        self.extend_flux(&self.apply_b(&self.coefficients(h)))
    }
}

fn b_matrix(half_b: &[f64], dx: f64) -> DMatrix<f64> {
    let n = half_b.len();
    let k = 0.5 / dx;
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = half_b[i];
        if i + 1 < n {
            m[(i, i + 1)] = k;
            m[(i + 1, i)] = -k;
        }
    }
    m
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn tensor(c: &[f64], w: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(c.len() * w.len());
    for &ci in c {
        out.extend(w.iter().map(|wj| ci * wj));
    }
    out
}
