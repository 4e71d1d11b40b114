use crate::error::{domain, Result};

/// Uniform symmetric axis on `[-half_width, half_width]`.
///
/// Only interior nodes are stored; the two end points carry the zero
/// boundary value, so the trapezoidal rule on the closed interval reduces to
/// `spacing * sum(values)` over the stored nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub half_width: f64,
    pub spacing: f64,
    pub nodes: Vec<f64>,
}

impl Axis {
    pub fn new(n: usize, half_width: f64) -> Result<Self> {
        if n < 8 {
            return Err(domain("operators::PhaseGrid", format!("need at least 8 nodes, got {n}")));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(domain("operators::PhaseGrid", format!("half width must be positive, got {half_width}")));
        }
        let spacing = 2.0 * half_width / (n as f64 + 1.0);
        // Mirror the left half so that nodes[i] == -nodes[n-1-i] bit for bit.
        let mut nodes = vec![0.0; n];
        for i in 0..n {
            let k = i as f64 + 1.0 - (n as f64 + 1.0) / 2.0;
            nodes[i] = k * spacing;
        }
        for i in 0..n / 2 {
            nodes[n - 1 - i] = -nodes[i];
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Ok(Self { half_width, spacing, nodes })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.spacing * values.iter().sum::<f64>()
    }

    /// Centered first difference with zero values outside the axis.
    pub fn centered_difference(&self, values: &[f64]) -> Vec<f64> {
        let n = values.len();
        let mut out = vec![0.0; n];
        for i in 0..n {
            let right = if i + 1 < n { values[i + 1] } else { 0.0 };
            let left = if i > 0 { values[i - 1] } else { 0.0 };
            out[i] = (right - left) / (2.0 * self.spacing);
        }
        out
    }

    /// Centered first difference using one-sided differences at the end
    /// nodes instead of the zero extension.
    pub fn gradient(&self, values: &[f64]) -> Vec<f64> {
        let n = values.len();
        let h = self.spacing;
        let mut out = vec![0.0; n];
        out[0] = (values[1] - values[0]) / h;
        out[n - 1] = (values[n - 1] - values[n - 2]) / h;
        for i in 1..n - 1 {
            out[i] = (values[i + 1] - values[i - 1]) / (2.0 * h);
        }
        out
    }
}

/// Position boundary treatment. Only decaying truncation is provided.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Boundary {
    TruncatedDecay,
}

/// Tensor grid in (x, v). Field values are stored row-major with the
/// velocity index fastest: `values[i * n_v + j] = f(x_i, v_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseGrid {
    pub x: Axis,
    pub v: Axis,
    pub x_boundary: Boundary,
    pub v_boundary: Boundary,
}

impl PhaseGrid {
    pub fn new(n_x: usize, x_half: f64, n_v: usize, v_half: f64) -> Result<Self> {
        Ok(Self {
            x: Axis::new(n_x, x_half)?,
            v: Axis::new(n_v, v_half)?,
            x_boundary: Boundary::TruncatedDecay,
            v_boundary: Boundary::TruncatedDecay,
        })
    }

    pub fn n_x(&self) -> usize {
        self.x.len()
    }

    pub fn n_v(&self) -> usize {
        self.v.len()
    }

    pub fn size(&self) -> usize {
        self.n_x() * self.n_v()
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.n_v() + j
    }

    /// Cell volume of the phase-space quadrature.
    pub fn cell(&self) -> f64 {
        self.x.spacing * self.v.spacing
    }
}
