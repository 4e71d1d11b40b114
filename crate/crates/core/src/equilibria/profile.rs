use crate::error::{domain, Result};

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum ProfileKind {
    /// `Γ(s) = e^{-s}`
    Maxwellian,
    /// Linearized fast-diffusion Gibbs state `Γ(s) = s^{-d/2 - 1/(1-m) - 1}`, `m < 1`.
    Polytropic { m: f64 },
}

/// Energy profile Γ with the velocity dimension `d` used in its exponent and
/// in the velocity moments.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EnergyProfile {
    pub kind: ProfileKind,
    pub d: usize,
}

impl EnergyProfile {
    pub fn maxwellian() -> Self {
        Self { kind: ProfileKind::Maxwellian, d: 1 }
    }

    pub fn polytropic(m: f64, d: usize) -> Result<Self> {
        if !(m < 1.0) {
            return Err(domain("equilibria::EnergyProfile", format!("fast-diffusion parameter m = {m} must be < 1")));
        }
        if d == 0 {
            return Err(domain("equilibria::EnergyProfile", "dimension must be positive"));
        }
        Ok(Self { kind: ProfileKind::Polytropic { m }, d })
    }

    pub fn is_maxwellian(&self) -> bool {
        matches!(self.kind, ProfileKind::Maxwellian)
    }

    /// Exponent `p` in `Γ(s) = s^{-p}` for the polytropic profile.
    pub fn polytropic_exponent(&self) -> Option<f64> {
        match self.kind {
            ProfileKind::Polytropic { m } => Some(self.d as f64 / 2.0 + 1.0 / (1.0 - m) + 1.0),
            ProfileKind::Maxwellian => None,
        }
    }

    /// Γ(s); callers guarantee `s > 0` for the polytropic kind.
    pub fn gamma(&self, s: f64) -> f64 {
        match self.kind {
            ProfileKind::Maxwellian => (-s).exp(),
            ProfileKind::Polytropic { .. } => s.powf(-self.polytropic_exponent().unwrap()),
        }
    }

    pub fn gamma_prime(&self, s: f64) -> f64 {
        match self.kind {
            ProfileKind::Maxwellian => -(-s).exp(),
            ProfileKind::Polytropic { .. } => {
                let p = self.polytropic_exponent().unwrap();
                -p * s.powf(-p - 1.0)
            }
        }
    }
}

impl std::str::FromStr for EnergyProfile {
    type Err = crate::error::Error;

    /// `maxwellian` or `polytropic:m=0.5,d=3`.
    fn from_str(s: &str) -> Result<Self> {
        const ORIGIN: &str = "equilibria::EnergyProfile";
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        match kind.trim() {
            "maxwellian" => Ok(Self::maxwellian()),
            "polytropic" => {
                let mut m = None;
                let mut d = 3usize;
                for item in rest.split(',').map(str::trim).filter(|t| !t.is_empty()) {
                    match item.split_once('=') {
                        Some(("m", v)) => m = Some(v.trim().parse::<f64>().map_err(|_| domain(ORIGIN, "bad m"))?),
                        Some(("d", v)) => d = v.trim().parse::<usize>().map_err(|_| domain(ORIGIN, "bad d"))?,
                        _ => return Err(domain(ORIGIN, format!("unknown parameter {item:?}"))),
                    }
                }
                Self::polytropic(m.ok_or_else(|| domain(ORIGIN, "polytropic profile needs m"))?, d)
            }
            other => Err(domain(ORIGIN, format!("unknown profile {other:?}"))),
        }
    }
}

/// Closed-form exponents of `(ρ_F, m_F, M_F)` as powers of `V - μ_∞` for the
/// fast-diffusion Gibbs state.
pub fn fast_diffusion_exponents(m: f64, beta: f64, d: usize) -> Result<(f64, f64, f64)> {
    const ORIGIN: &str = "equilibria::fast_diffusion_exponents";
    if !(m < 1.0) {
        return Err(domain(ORIGIN, format!("m = {m} must be < 1")));
    }
    if !(beta > 0.0) || d == 0 {
        return Err(domain(ORIGIN, "beta must be positive and d >= 1"));
    }
    let q = 1.0 / (1.0 - m);
    Ok((-1.0 - q, -q, 1.0 - q))
}

/// Surface measure of the unit sphere in `R^d`.
pub fn sphere_area(d: usize) -> f64 {
    use std::f64::consts::PI;
    match d {
        0 => 0.0,
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 2.0 * PI * sphere_area(d - 2) / (d as f64 - 2.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponent_examples() {
        assert_eq!(fast_diffusion_exponents(0.0, 1.0, 3).unwrap(), (-2.0, -1.0, 0.0));
        assert_eq!(fast_diffusion_exponents(0.5, 1.0, 3).unwrap(), (-3.0, -2.0, -1.0));
        let (a, b, c) = fast_diffusion_exponents(-1e12, 1.0, 3).unwrap();
        assert!((a + 1.0).abs() < 1e-9 && b.abs() < 1e-9 && (c - 1.0).abs() < 1e-9);
        assert!(fast_diffusion_exponents(1.0, 1.0, 3).is_err());
        assert!(fast_diffusion_exponents(1.5, 1.0, 3).is_err());
    }

    #[test]
    fn sphere_areas() {
        use std::f64::consts::PI;
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-14);
        assert!((sphere_area(4) - 2.0 * PI * PI).abs() < 1e-13);
    }

    #[test]
    fn profiles_are_nonincreasing() {
        for p in [EnergyProfile::maxwellian(), EnergyProfile::polytropic(0.5, 3).unwrap()] {
            let mut last = f64::INFINITY;
            for k in 1..200 {
                let s = 0.05 * k as f64;
                let g = p.gamma(s);
                assert!(g >= 0.0 && g <= last);
                assert!(p.gamma_prime(s) <= 0.0);
                last = g;
            }
        }
        assert!(EnergyProfile::polytropic(1.0, 3).is_err());
    }

    #[test]
    fn parses() {
        let p: EnergyProfile = "polytropic:m=0.5,d=3".parse().unwrap();
        assert_eq!(p.polytropic_exponent(), Some(4.5));
        assert!("maxwellian".parse::<EnergyProfile>().unwrap().is_maxwellian());
    }
}
