use rayon::prelude::*;

use crate::error::{domain, Result};

/// Tail weights `W_{j+½} = Δv Σ_{i>j} v_i 𝔐_i` on the interior velocity faces.
///
/// For faces left of the origin the equivalent form `-Δv Σ_{i≤j} v_i 𝔐_i`
/// is summed so that no cancellation occurs.
pub fn tail_weights(v: &[f64], maxw: &[f64], dv: f64) -> Result<Vec<f64>> {
    let n = v.len();
    let mut w = vec![0.0; n - 1];
    let mut left = 0.0;
    for j in 0..n - 1 {
        left += v[j] * maxw[j];
        w[j] = -dv * left;
    }
    let mut right = 0.0;
    for j in (0..n - 1).rev() {
        right += v[j + 1] * maxw[j + 1];
        if 0.5 * (v[j] + v[j + 1]) >= 0.0 {
            w[j] = dv * right;
        }
    }
    if let Some(j) = w.iter().position(|&x| !(x > 0.0)) {
        return Err(domain("operators::tail_weights", format!("tail weight at face {j} is not positive")));
    }
    Ok(w)
}

/// Free transport `v ∂x - V' ∂v` acting on the symmetrized unknown.
///
/// `(Th)_{ij} = v_j (D_x h)_{ij} - b_i (D̃ h)_{ij}` where `D_x` is the centered
/// difference with zero extension and `D̃` is the antisymmetric three-point
/// velocity stencil built from the tail weights. Both parts are antisymmetric
/// and `T √F = 0` holds exactly.
#[derive(Debug, Clone)]
pub struct Transport {
    pub n_x: usize,
    pub n_v: usize,
    pub dx: f64,
    pub v: Vec<f64>,
    /// Discrete force `-2 (D_x p)_i / p_i ≈ V'(x_i)`.
    pub b: Vec<f64>,
    /// Off-diagonal entries of `D̃`: `(D̃g)_j = d_j g_{j+1} - d_{j-1} g_{j-1}`.
    pub face: Vec<f64>,
}

impl Transport {
    pub fn assemble(x_rho: &[f64], dx: f64, v: &[f64], maxw: &[f64], dv: f64) -> Result<Self> {
        let p: Vec<f64> = x_rho.iter().map(|r| r.sqrt()).collect();
        let q: Vec<f64> = maxw.iter().map(|m| m.sqrt()).collect();
        let n_x = p.len();
        let mut b = vec![0.0; n_x];
        for i in 0..n_x {
            let right = if i + 1 < n_x { p[i + 1] } else { 0.0 };
            let left = if i > 0 { p[i - 1] } else { 0.0 };
            b[i] = -(right - left) / (dx * p[i]);
        }
        let w = tail_weights(v, maxw, dv)?;
        let face = (0..v.len() - 1).map(|j| w[j] / (2.0 * dv * q[j] * q[j + 1])).collect();
        Ok(Self { n_x, n_v: v.len(), dx, v: v.to_vec(), b, face })
    }

    pub fn apply(&self, h: &[f64], out: &mut [f64]) {
        let (n_x, n_v) = (self.n_x, self.n_v);
        let inv2dx = 0.5 / self.dx;
        out.par_chunks_mut(n_v).enumerate().for_each(|(i, row)| {
            let here = &h[i * n_v..(i + 1) * n_v];
            let right: &[f64] = if i + 1 < n_x { &h[(i + 1) * n_v..(i + 2) * n_v] } else { &[] };
            let left: &[f64] = if i > 0 { &h[(i - 1) * n_v..i * n_v] } else { &[] };
            let bi = self.b[i];
            for j in 0..n_v {
                let r = right.get(j).copied().unwrap_or(0.0);
                let l = left.get(j).copied().unwrap_or(0.0);
                let up = if j + 1 < n_v { self.face[j] * here[j + 1] } else { 0.0 };
                let down = if j > 0 { self.face[j - 1] * here[j - 1] } else { 0.0 };
                row[j] = self.v[j] * (r - l) * inv2dx - bi * (up - down);
            }
        });
    }

    /// Gershgorin bound on the spectral norm.
    pub fn norm_bound(&self) -> f64 {
        let vmax = self.v.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        let bmax = self.b.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        let fmax = self.face.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        vmax / self.dx + 2.0 * bmax * fmax
    }

    /// Nonzero entries `(row, col, value)` of the matrix.
    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        let (n_x, n_v) = (self.n_x, self.n_v);
        let mut out = Vec::new();
        for i in 0..n_x {
            for j in 0..n_v {
                let row = i * n_v + j;
                let c = self.v[j] * 0.5 / self.dx;
                if i + 1 < n_x && c != 0.0 {
                    out.push((row, row + n_v, c));
                }
                if i > 0 && c != 0.0 {
                    out.push((row, row - n_v, -c));
                }
                if j + 1 < n_v {
                    out.push((row, row + 1, -self.b[i] * self.face[j]));
                }
                if j > 0 {
                    out.push((row, row - 1, self.b[i] * self.face[j - 1]));
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (Transport, Vec<f64>) {
        let n_x = 12;
        let n_v = 10;
        let dx = 0.4;
        let dv = 0.9;
        let x: Vec<f64> = (0..n_x).map(|i| (i as f64 - 5.5) * dx).collect();
        let v: Vec<f64> = (0..n_v).map(|j| (j as f64 - 4.5) * dv).collect();
        let rho: Vec<f64> = x.iter().map(|x| (-x * x * x * x / 4.0).exp()).collect();
        let m: Vec<f64> = v.iter().map(|v| (-v * v / 2.0).exp()).collect();
        let t = Transport::assemble(&rho, dx, &v, &m, dv).unwrap();
        let mut sqrt_f = Vec::new();
        for r in &rho {
            for mm in &m {
                sqrt_f.push((r * mm).sqrt());
            }
        }
        (t, sqrt_f)
    }

    #[test]
    fn annihilates_square_root_of_equilibrium() {
        let (t, s) = setup();
        let mut out = vec![0.0; s.len()];
        t.apply(&s, &mut out);
        assert!(out.iter().all(|x| x.abs() < 1e-13));
    }

    #[test]
    fn matrix_is_antisymmetric_and_matches_action() {
        let (t, s) = setup();
        let n = s.len();
        let mut dense = vec![0.0; n * n];
        for (r, c, val) in t.triplets() {
            dense[r * n + c] += val;
        }
        for r in 0..n {
            for c in 0..n {
                assert!((dense[r * n + c] + dense[c * n + r]).abs() < 1e-14);
            }
        }
        let mut out = vec![0.0; n];
        t.apply(&s, &mut out);
        for r in 0..n {
            let row: f64 = (0..n).map(|c| dense[r * n + c] * s[c]).sum();
            assert!((row - out[r]).abs() < 1e-13);
        }
    }

    #[test]
    fn tail_weights_positive_and_consistent() {
        let v: Vec<f64> = (0..9).map(|j| (j as f64 - 4.0) * 0.5).collect();
        let m: Vec<f64> = v.iter().map(|v| (-v * v / 2.0).exp()).collect();
        let w = tail_weights(&v, &m, 0.5).unwrap();
        for j in 1..8 {
            assert!(((w[j] - w[j - 1]) + 0.5 * v[j] * m[j]).abs() < 1e-15);
        }
        for j in 0..4 {
            assert!((w[j] - w[7 - j]).abs() < 1e-15);
        }
    }
}
