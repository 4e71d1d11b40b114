use std::path::Path;
use std::str::FromStr;

use crate::error::{domain, Error, Result};

/// Confining potential in one space dimension.
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialKind {
    /// `V(x) = mu_infinity + (1 + x^2)^beta`
    PowerLaw { beta: f64, mu_infinity: f64 },
    /// `V(x) = stiffness * x^2 / 2`
    Quadratic { stiffness: f64 },
    /// `V(x) = strength * ln(1 + x^2)`; integrable for `strength > 1/2` but
    /// without a spectral gap.
    Logarithmic { strength: f64 },
    /// Two-column table `(x, V(x))`, monotone in x. Derivatives are taken by
    /// finite differences on the table and interpolated linearly.
    Tabulated { x: Vec<f64>, v: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    pub kind: PotentialKind,
}

impl Potential {
    pub fn power_law(beta: f64) -> Self {
        Self { kind: PotentialKind::PowerLaw { beta, mu_infinity: 0.0 } }
    }

    pub fn power_law_offset(beta: f64, mu_infinity: f64) -> Self {
        Self { kind: PotentialKind::PowerLaw { beta, mu_infinity } }
    }

    pub fn quadratic(stiffness: f64) -> Self {
        Self { kind: PotentialKind::Quadratic { stiffness } }
    }

    pub fn logarithmic(strength: f64) -> Self {
        Self { kind: PotentialKind::Logarithmic { strength } }
    }

    pub fn tabulated(x: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        const ORIGIN: &str = "equilibria::Potential";
        if x.len() != v.len() || x.len() < 3 {
            return Err(domain(ORIGIN, "table needs at least three (x, V) rows"));
        }
        if !x.windows(2).all(|w| w[1] > w[0]) {
            return Err(domain(ORIGIN, "table x column must be strictly increasing"));
        }
        if v.iter().any(|val| !val.is_finite()) {
            return Err(domain(ORIGIN, "table contains non-finite V"));
        }
        Ok(Self { kind: PotentialKind::Tabulated { x, v } })
    }

    /// Reads whitespace-separated `x V(x)` rows; `#` starts a comment.
    pub fn from_table_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| Error::Io { origin: "equilibria::Potential", source })?;
        let mut xs = Vec::new();
        let mut vs = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split_whitespace().collect();
            let parse = |s: &str| {
                s.parse::<f64>().map_err(|_| {
                    domain("equilibria::Potential", format!("line {}: bad number {s:?}", lineno + 1))
                })
            };
            if cols.len() != 2 {
                return Err(domain("equilibria::Potential", format!("line {}: expected two columns", lineno + 1)));
            }
            xs.push(parse(cols[0])?);
            vs.push(parse(cols[1])?);
        }
        Self::tabulated(xs, vs)
    }

    /// Exponent of the algebraic growth, if the potential is a power law.
    pub fn beta(&self) -> Option<f64> {
        match self.kind {
            PotentialKind::PowerLaw { beta, .. } => Some(beta),
            PotentialKind::Quadratic { .. } => Some(1.0),
            _ => None,
        }
    }

    pub fn mu_infinity(&self) -> f64 {
        match self.kind {
            PotentialKind::PowerLaw { mu_infinity, .. } => mu_infinity,
            _ => 0.0,
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        match &self.kind {
            PotentialKind::PowerLaw { beta, mu_infinity } => mu_infinity + (1.0 + x * x).powf(*beta),
            PotentialKind::Quadratic { stiffness } => 0.5 * stiffness * x * x,
            PotentialKind::Logarithmic { strength } => strength * (1.0 + x * x).ln(),
            PotentialKind::Tabulated { x: xs, v } => interpolate(xs, v, x),
        }
    }

    pub fn gradient(&self, x: f64) -> f64 {
        match &self.kind {
            PotentialKind::PowerLaw { beta, .. } => 2.0 * beta * x * (1.0 + x * x).powf(beta - 1.0),
            PotentialKind::Quadratic { stiffness } => stiffness * x,
            PotentialKind::Logarithmic { strength } => 2.0 * strength * x / (1.0 + x * x),
            PotentialKind::Tabulated { x: xs, v } => interpolate(xs, &table_derivative(xs, v), x),
        }
    }

    /// Second derivative; in one dimension both the Laplacian and the Hessian.
    pub fn laplacian(&self, x: f64) -> f64 {
        match &self.kind {
            PotentialKind::PowerLaw { beta, .. } => {
                let s = 1.0 + x * x;
                2.0 * beta * s.powf(beta - 1.0) + 4.0 * beta * (beta - 1.0) * x * x * s.powf(beta - 2.0)
            }
            PotentialKind::Quadratic { stiffness } => *stiffness,
            PotentialKind::Logarithmic { strength } => {
                let s = 1.0 + x * x;
                2.0 * strength * (1.0 - x * x) / (s * s)
            }
            PotentialKind::Tabulated { x: xs, v } => {
                let d1 = table_derivative(xs, v);
                interpolate(xs, &table_derivative(xs, &d1), x)
            }
        }
    }

    pub fn hessian(&self, x: f64) -> f64 {
        self.laplacian(x)
    }

    pub fn values(&self, nodes: &[f64]) -> Vec<f64> {
        nodes.iter().map(|&x| self.value(x)).collect()
    }

    pub fn gradients(&self, nodes: &[f64]) -> Vec<f64> {
        nodes.iter().map(|&x| self.gradient(x)).collect()
    }

    pub fn laplacians(&self, nodes: &[f64]) -> Vec<f64> {
        nodes.iter().map(|&x| self.laplacian(x)).collect()
    }

    /// Checks finiteness of V and its derivatives on the nodes.
    pub fn validate_on(&self, nodes: &[f64]) -> Result<()> {
        for &x in nodes {
            if !(self.value(x).is_finite() && self.gradient(x).is_finite() && self.laplacian(x).is_finite()) {
                return Err(domain("equilibria::Potential", format!("V not C^2-finite at x = {x}")));
            }
        }
        Ok(())
    }
}

fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let n = xs.len();
    if x <= xs[0] {
        let slope = (ys[1] - ys[0]) / (xs[1] - xs[0]);
        return ys[0] + slope * (x - xs[0]);
    }
    if x >= xs[n - 1] {
        let slope = (ys[n - 1] - ys[n - 2]) / (xs[n - 1] - xs[n - 2]);
        return ys[n - 1] + slope * (x - xs[n - 1]);
    }
    let k = xs.partition_point(|&t| t <= x) - 1;
    let w = (x - xs[k]) / (xs[k + 1] - xs[k]);
    ys[k] * (1.0 - w) + ys[k + 1] * w
}

fn table_derivative(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let mut d = vec![0.0; n];
    d[0] = (ys[1] - ys[0]) / (xs[1] - xs[0]);
    d[n - 1] = (ys[n - 1] - ys[n - 2]) / (xs[n - 1] - xs[n - 2]);
    for i in 1..n - 1 {
        d[i] = (ys[i + 1] - ys[i - 1]) / (xs[i + 1] - xs[i - 1]);
    }
    d
}

/// Parses `power:beta=1.5,mu=0`, `quadratic:k=1`, `log:s=1` or `table:PATH`.
impl FromStr for Potential {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        const ORIGIN: &str = "equilibria::Potential";
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        if kind.trim() == "table" {
            return Self::from_table_file(Path::new(rest.trim()));
        }
        let mut params = std::collections::BTreeMap::new();
        for item in rest.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| domain(ORIGIN, format!("expected key=value, got {item:?}")))?;
            let value: f64 = v
                .trim()
                .parse()
                .map_err(|_| domain(ORIGIN, format!("bad number in {item:?}")))?;
            params.insert(k.trim().to_string(), value);
        }
        let take = |params: &mut std::collections::BTreeMap<String, f64>, key: &str, default: Option<f64>| {
            params
                .remove(key)
                .or(default)
                .ok_or_else(|| domain(ORIGIN, format!("missing parameter {key:?} in {s:?}")))
        };
        let potential = match kind.trim() {
            "power" => {
                let beta = take(&mut params, "beta", None)?;
                let mu = take(&mut params, "mu", Some(0.0))?;
                if beta <= 0.0 {
                    return Err(domain(ORIGIN, "beta must be positive"));
                }
                Self::power_law_offset(beta, mu)
            }
            "quadratic" => Self::quadratic(take(&mut params, "k", Some(1.0))?),
            "log" => Self::logarithmic(take(&mut params, "s", Some(1.0))?),
            other => return Err(domain(ORIGIN, format!("unknown potential kind {other:?}"))),
        };
        if let Some(extra) = params.keys().next() {
            return Err(domain(ORIGIN, format!("unknown parameter {extra:?}")));
        }
        Ok(potential)
    }
}

impl std::fmt::Display for Potential {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.kind {
            PotentialKind::PowerLaw { beta, mu_infinity } => write!(f, "power:beta={beta},mu={mu_infinity}"),
            PotentialKind::Quadratic { stiffness } => write!(f, "quadratic:k={stiffness}"),
            PotentialKind::Logarithmic { strength } => write!(f, "log:s={strength}"),
            PotentialKind::Tabulated { x, .. } => write!(f, "table:{} rows", x.len()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd(p: &Potential, x: f64) -> (f64, f64) {
        let h = 1e-4;
        let d1 = (p.value(x + h) - p.value(x - h)) / (2.0 * h);
        let d2 = (p.value(x + h) - 2.0 * p.value(x) + p.value(x - h)) / (h * h);
        (d1, d2)
    }

    #[test]
    fn analytic_derivatives_match_finite_differences() {
        for p in [
            Potential::power_law(1.0),
            Potential::power_law(1.5),
            Potential::power_law(0.5),
            Potential::quadratic(2.0),
            Potential::logarithmic(1.0),
        ] {
            for &x in &[-2.3, -0.4, 0.0, 0.7, 3.1] {
                let (d1, d2) = fd(&p, x);
                assert!((p.gradient(x) - d1).abs() < 1e-6 * (1.0 + d1.abs()), "{p} grad at {x}");
                assert!((p.laplacian(x) - d2).abs() < 1e-4 * (1.0 + d2.abs()), "{p} lap at {x}");
            }
        }
    }

    #[test]
    fn power_law_offset_is_exact() {
        let p = Potential::power_law_offset(1.5, -0.25);
        for &x in &[-1.0, 0.0, 2.0] {
            assert_eq!(p.value(x) - (-0.25), (1.0 + x * x).powf(1.5));
        }
    }

    #[test]
    fn parses_specs() {
        assert_eq!("power:beta=1".parse::<Potential>().unwrap(), Potential::power_law(1.0));
        assert_eq!("quadratic:k=2".parse::<Potential>().unwrap(), Potential::quadratic(2.0));
        assert!("power:gamma=1".parse::<Potential>().is_err());
        assert!("power".parse::<Potential>().is_err());
        assert!("wobble:beta=1".parse::<Potential>().is_err());
    }

    #[test]
    fn tabulated_reproduces_quadratic() {
        let xs: Vec<f64> = (0..=400).map(|i| -4.0 + 0.02 * i as f64).collect();
        let vs: Vec<f64> = xs.iter().map(|x| 0.5 * x * x).collect();
        let p = Potential::tabulated(xs, vs).unwrap();
        assert!((p.value(1.01) - 0.5 * 1.01 * 1.01).abs() < 1e-4);
        assert!((p.gradient(1.0) - 1.0).abs() < 1e-8);
        assert!((p.laplacian(0.5) - 1.0).abs() < 1e-6);
        assert!(Potential::tabulated(vec![0.0, 1.0, 0.5], vec![0.0; 3]).is_err());
    }
}
