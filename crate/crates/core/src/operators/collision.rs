use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::operators::transport::tail_weights;

/// Transition kernel `k(v* → v)` for linear scattering.
#[derive(Clone)]
pub struct ScatteringKernel {
    pub name: String,
    func: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
}

impl ScatteringKernel {
    pub fn new(name: impl Into<String>, func: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self { name: name.into(), func: Arc::new(func) }
    }

    /// Redistribution onto the Maxwellian, `k(v* → v) = 𝔐(v)`.
    pub fn maxwellian() -> Self {
        Self::new("maxwell", |_, v| (-0.5 * v * v).exp() / (2.0 * std::f64::consts::PI).sqrt())
    }

    /// `k(v* → v) = 𝔐(v)(1 + a tanh v tanh v*)`, nonnegative for `|a| ≤ 1`.
    pub fn tanh_correlated(a: f64) -> Self {
        Self::new(format!("tanh,a={a}"), move |vs, v| {
            (-0.5 * v * v).exp() / (2.0 * std::f64::consts::PI).sqrt() * (1.0 + a * v.tanh() * vs.tanh())
        })
    }

    pub fn eval(&self, v_star: f64, v: f64) -> f64 {
        (self.func)(v_star, v)
    }
}

impl fmt::Debug for ScatteringKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScatteringKernel({})", self.name)
    }
}

#[derive(Debug, Clone)]
pub enum CollisionKind {
    Bgk,
    FokkerPlanck,
    Scattering(ScatteringKernel),
}

impl CollisionKind {
    pub fn tag(&self) -> &'static str {
        match self {
            CollisionKind::Bgk => "bgk",
            CollisionKind::FokkerPlanck => "fokker_planck",
            CollisionKind::Scattering(_) => "scattering",
        }
    }
}

impl fmt::Display for CollisionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CollisionKind::Scattering(k) => write!(f, "scattering:{}", k.name),
            other => f.write_str(other.tag()),
        }
    }
}

impl FromStr for CollisionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "bgk" => return Ok(CollisionKind::Bgk),
            "fp" | "fokker_planck" | "fokker-planck" => return Ok(CollisionKind::FokkerPlanck),
            "scattering" | "scattering:maxwell" => return Ok(CollisionKind::Scattering(ScatteringKernel::maxwellian())),
            _ => {}
        }
        if let Some(rest) = s.strip_prefix("scattering:tanh") {
            let a = rest
                .trim_start_matches(',')
                .strip_prefix("a=")
                .map(|a| a.parse::<f64>())
                .unwrap_or(Ok(0.5))
                .map_err(|e| domain("operators::CollisionKind", format!("bad coefficient in '{s}': {e}")))?;
            return Ok(CollisionKind::Scattering(ScatteringKernel::tanh_correlated(a)));
        }
        Err(domain(
            "operators::CollisionKind",
            format!("unknown collision '{s}' (expected bgk, fp, scattering:maxwell or scattering:tanh,a=..)"),
        ))
    }
}

/// Collision operator in symmetrized velocity coordinates. It acts as the
/// same `n_v × n_v` matrix at every x node.
#[derive(Debug, Clone)]
pub struct Collision {
    pub kind: CollisionKind,
    pub matrix: DMatrix<f64>,
    /// Unit vector `√𝔐 / |√𝔐|` spanning the local equilibria.
    pub q_hat: DVector<f64>,
    /// Row scaling applied to the scattering gain, 1 for the other kinds.
    pub gain_scaling: Vec<f64>,
}

impl Collision {
    pub fn assemble(kind: CollisionKind, v: &[f64], maxw: &[f64], dv: f64) -> Result<Self> {
        let n = v.len();
        let q: Vec<f64> = maxw.iter().map(|m| m.sqrt()).collect();
        let qn = q.iter().map(|x| x * x).sum::<f64>().sqrt();
        let q_hat = DVector::from_iterator(n, q.iter().map(|x| x / qn));
        let mut gain_scaling = vec![1.0; n];
        let matrix = match &kind {
            CollisionKind::Bgk => &q_hat * q_hat.transpose() - DMatrix::identity(n, n),
            CollisionKind::FokkerPlanck => {
                let w = tail_weights(v, maxw, dv)?;
                let mut l = DMatrix::zeros(n, n);
                let dv2 = dv * dv;
                for j in 0..n - 1 {
                    let off = w[j] / (dv2 * q[j] * q[j + 1]);
                    l[(j, j + 1)] = off;
                    l[(j + 1, j)] = off;
                    l[(j, j)] -= w[j] / (dv2 * q[j] * q[j]);
                    l[(j + 1, j + 1)] -= w[j] / (dv2 * q[j + 1] * q[j + 1]);
                }
                l
            }
            CollisionKind::Scattering(kernel) => {
                let (l_f, s) = scattering_matrix(kernel, v, maxw, dv)?;
                gain_scaling = s;
                DMatrix::from_fn(n, n, |j, i| l_f[(j, i)] * q[i] / q[j])
            }
        };
        Ok(Self { kind, matrix, q_hat, gain_scaling })
    }

    pub fn n_v(&self) -> usize {
        self.q_hat.len()
    }

    pub fn apply(&self, h: &[f64], out: &mut [f64]) {
        let n_v = self.n_v();
        out.par_chunks_mut(n_v).zip(h.par_chunks(n_v)).for_each(|(o, x)| {
            for (j, oj) in o.iter_mut().enumerate() {
                let mut acc = 0.0;
                for (i, xi) in x.iter().enumerate() {
                    acc += self.matrix[(j, i)] * xi;
                }
                *oj = acc;
            }
        });
    }

    /// Whether the matrix is symmetric to `tol` relative to its largest entry.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        let scale = self.matrix.amax();
        (&self.matrix - self.matrix.transpose()).amax() <= tol * scale
    }
}

/// Scattering operator on `f` values: gain rows rescaled so that `L𝔐 = 0`,
/// loss equal to the column sums of the rescaled gain.
fn scattering_matrix(kernel: &ScatteringKernel, v: &[f64], maxw: &[f64], dv: f64) -> Result<(DMatrix<f64>, Vec<f64>)> {
    const ORIGIN: &str = "operators::assemble_collision";
    let n = v.len();
    let g = DMatrix::from_fn(n, n, |j, i| kernel.eval(v[i], v[j]) * dv);
    if let Some(bad) = g.iter().find(|x| !(**x >= 0.0)) {
        return Err(domain(ORIGIN, format!("scattering kernel has a negative or undefined entry {bad}")));
    }
    let m = DVector::from_column_slice(maxw);
    let gm = &g * &m;
    // Positive null vector of diag(c) - Gᵀ with c = (G𝔐)/𝔐.
    let mut k = -g.transpose();
    for j in 0..n {
        k[(j, j)] += gm[j] / maxw[j];
    }
    // The equations are dependent; the one at the peak of 𝔐 is replaced by
    // the normalization Σ 𝔐_j s_j = Σ 𝔐_j.
    let peak = m.imax();
    let mut rhs = DVector::zeros(n);
    for i in 0..n {
        k[(peak, i)] = maxw[i];
    }
    rhs[peak] = maxw.iter().sum::<f64>();
    let s = k
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::KernelConsistency { origin: ORIGIN, residual: f64::INFINITY })?;
    if s.iter().any(|x| !(*x > 0.0)) {
        return Err(Error::KernelConsistency { origin: ORIGIN, residual: f64::NAN });
    }
    let mut l = DMatrix::from_fn(n, n, |j, i| s[j] * g[(j, i)]);
    for i in 0..n {
        let loss: f64 = l.column(i).sum();
        l[(i, i)] -= loss;
    }
    let residual = (&l * &m).amax();
    let scale = l.amax() * m.amax();
    if !(residual <= 1e-10 * scale) {
        return Err(Error::KernelConsistency { origin: ORIGIN, residual: residual / scale });
    }
    Ok((l, s.iter().copied().collect()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn velocity(n: usize, vmax: f64) -> (Vec<f64>, Vec<f64>, f64) {
        let dv = 2.0 * vmax / (n as f64 + 1.0);
        let v: Vec<f64> = (0..n).map(|j| (j as f64 + 1.0 - (n as f64 + 1.0) / 2.0) * dv).collect();
        let raw: Vec<f64> = v.iter().map(|v| (-v * v / 2.0).exp()).collect();
        let z: f64 = raw.iter().sum::<f64>() * dv;
        (v, raw.iter().map(|m| m / z).collect(), dv)
    }

    #[test]
    fn fokker_planck_identities() {
        let (v, m, dv) = velocity(40, 8.0);
        let c = Collision::assemble(CollisionKind::FokkerPlanck, &v, &m, dv).unwrap();
        let q = DVector::from_iterator(40, m.iter().map(|x| x.sqrt()));
        let vq = DVector::from_iterator(40, (0..40).map(|j| v[j] * q[j]));
        assert!((&c.matrix * &q).amax() < 1e-12);
        assert!((&c.matrix * &vq + &vq).amax() < 1e-12);
        assert!(c.is_symmetric(1e-15));
    }

    #[test]
    fn maxwellian_scattering_equals_bgk() {
        let (v, m, dv) = velocity(32, 8.0);
        let bgk = Collision::assemble(CollisionKind::Bgk, &v, &m, dv).unwrap();
        let sc = Collision::assemble(CollisionKind::Scattering(ScatteringKernel::maxwellian()), &v, &m, dv).unwrap();
        let diff = (&bgk.matrix - &sc.matrix).amax();
        assert!(diff < 1e-12, "{diff}");
    }

    #[test]
    fn negative_kernel_is_rejected() {
        let (v, m, dv) = velocity(16, 6.0);
        let k = ScatteringKernel::new("neg", |vs, v| v - vs);
        let err = Collision::assemble(CollisionKind::Scattering(k), &v, &m, dv).unwrap_err();
        assert!(matches!(err, Error::Domain { .. }));
    }

    #[test]
    fn inconsistent_kernel_is_corrected() {
        // Without the row scaling this kernel does not preserve 𝔐.
        let (v, m, dv) = velocity(24, 7.0);
        let k = ScatteringKernel::new("skew", |vs, v| (-0.5 * (v - 0.3 * vs).powi(2)).exp());
        let c = Collision::assemble(CollisionKind::Scattering(k), &v, &m, dv).unwrap();
        let q = DVector::from_iterator(24, m.iter().map(|x| x.sqrt()));
        assert!((&c.matrix * &q).amax() < 1e-10 * c.matrix.amax());
        assert!((c.matrix.transpose() * &q).amax() < 1e-12 * c.matrix.amax());
        assert!(c.gain_scaling.iter().any(|s| (s - 1.0).abs() > 1e-3));
    }

    #[test]
    fn parse_kinds() {
        assert!(matches!("bgk".parse::<CollisionKind>().unwrap(), CollisionKind::Bgk));
        assert!(matches!("fp".parse::<CollisionKind>().unwrap(), CollisionKind::FokkerPlanck));
        let k: CollisionKind = "scattering:tanh,a=0.25".parse().unwrap();
        assert_eq!(k.to_string(), "scattering:tanh,a=0.25");
        assert!("nope".parse::<CollisionKind>().is_err());
    }
}
