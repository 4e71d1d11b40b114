use crate::error::{Error, Result};

const ORIGIN: &str = "simulator::fit_decay_rate";

/// Exponential rate fitted to a positive series.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct DecayFit {
    /// `λ` in `y ≈ C e^{-λt}`.
    pub rate: f64,
    pub r_squared: f64,
    /// Time window actually used.
    pub window: (f64, f64),
    pub samples: usize,
    /// Whether the fit went through local maxima of an oscillating series.
    pub envelope: bool,
}

fn fit_err(msg: impl Into<String>) -> Error {
    Error::Fit { origin: ORIGIN, msg: msg.into() }
}

/// Least-squares line through `(t, z)`: `(slope, intercept, r²)`.
fn least_squares(t: &[f64], z: &[f64]) -> (f64, f64, f64) {
    let n = t.len() as f64;
    let tm = t.iter().sum::<f64>() / n;
    let zm = z.iter().sum::<f64>() / n;
    let (mut stt, mut stz, mut szz) = (0.0, 0.0, 0.0);
    for (a, b) in t.iter().zip(z) {
        stt += (a - tm) * (a - tm);
        stz += (a - tm) * (b - zm);
        szz += (b - zm) * (b - zm);
    }
    let flat = szz <= 1e-28 * (1.0 + zm * zm);
    let slope = if stt > 0.0 && !flat { stz / stt } else { 0.0 };
    let intercept = zm - slope * tm;
    let r2 = if flat { 1.0 } else { (stz * stz / (stt * szz)).min(1.0) };
    (slope, intercept, r2)
}

fn local_maxima(z: &[f64]) -> Vec<usize> {
    (1..z.len().saturating_sub(1)).filter(|&i| z[i] >= z[i - 1] && z[i] > z[i + 1]).collect()
}

/// Fit through `log y` on the index set, following envelopes of oscillations.
fn fit_indices(t: &[f64], logy: &[f64], idx: &[usize]) -> DecayFit {
    let mut tt: Vec<f64> = idx.iter().map(|&i| t[i]).collect();
    let mut zz: Vec<f64> = idx.iter().map(|&i| logy[i]).collect();
    let window = (tt[0], tt[tt.len() - 1]);
    let mut envelope = false;
    let (mut slope, mut icpt, mut r2) = least_squares(&tt, &zz);
    for _ in 0..3 {
        let resid: Vec<f64> = tt.iter().zip(&zz).map(|(a, b)| b - (icpt + slope * a)).collect();
        let amplitude = resid.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            - resid.iter().cloned().fold(f64::INFINITY, f64::min);
        let peaks = local_maxima(&resid);
        if peaks.len() < 3 || amplitude <= 1e-8 {
            break;
        }
        // Maxima of the series itself trace the envelope.
        let tops = local_maxima(&zz);
        if tops.len() < 3 {
            break;
        }
        tt = tops.iter().map(|&i| tt[i]).collect();
        zz = tops.iter().map(|&i| zz[i]).collect();
        (slope, icpt, r2) = least_squares(&tt, &zz);
        envelope = true;
    }
    DecayFit { rate: -slope, r_squared: r2, window, samples: tt.len(), envelope }
}

/// Exponential decay rate of `values` sampled at `times`.
///
/// `window = None` uses the second half of the run and widens it to the last
/// three quarters, then to the whole run, while `r² < 0.999`.
pub fn fit_decay_rate(times: &[f64], values: &[f64], window: Option<(f64, f64)>) -> Result<DecayFit> {
    if times.len() != values.len() {
        return Err(fit_err("times and values differ in length"));
    }
    if times.is_empty() {
        return Err(fit_err("empty series"));
    }
    if !times.windows(2).all(|w| w[1] > w[0]) {
        return Err(fit_err("times must increase strictly"));
    }
    let peak = values.iter().cloned().fold(0.0, f64::max);
    let select = |a: f64, b: f64| -> Result<Vec<usize>> {
        let idx: Vec<usize> = (0..times.len()).filter(|&i| times[i] >= a && times[i] <= b).collect();
        if idx.len() < 20 {
            return Err(fit_err(format!("window [{a}, {b}] holds {} samples, need at least 20", idx.len())));
        }
        for &i in &idx {
            let y = values[i];
            if !(y > 0.0) || !y.is_finite() || y <= peak * 1e-15 {
                return Err(fit_err(format!("value {y:.3e} at t = {} is at the rounding floor", times[i])));
            }
        }
        Ok(idx)
    };
    let logy: Vec<f64> = values.iter().map(|y| y.ln()).collect();
    if let Some((a, b)) = window {
        return Ok(fit_indices(times, &logy, &select(a, b)?));
    }
    let (t0, t1) = (times[0], times[times.len() - 1]);
    let mut best: Option<DecayFit> = None;
    for frac in [0.5, 0.25, 0.0] {
        let fit = fit_indices(times, &logy, &select(t0 + frac * (t1 - t0), t1)?);
        if fit.r_squared >= 0.999 {
            return Ok(fit);
        }
        if best.map_or(true, |b| fit.r_squared > b.r_squared) {
            best = Some(fit);
        }
    }
    Ok(best.expect("at least one window was fitted"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, t_end: f64) -> Vec<f64> {
        (0..n).map(|i| t_end * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn exact_exponential() {
        let t = grid(400, 20.0);
        let y: Vec<f64> = t.iter().map(|t| 3.0 * (-0.5 * t).exp()).collect();
        let fit = fit_decay_rate(&t, &y, None).unwrap();
        assert!((fit.rate - 0.5).abs() < 1e-10 && !fit.envelope);
    }

    #[test]
    fn oscillating_envelope() {
        let t = grid(4001, 40.0);
        let y: Vec<f64> = t.iter().map(|t| (-t / 2.0).exp() * (3.0 * t).cos().abs() + 1e-300).collect();
        let fit = fit_decay_rate(&t, &y, None).unwrap();
        assert!(fit.envelope);
        assert!((fit.rate - 0.5).abs() < 0.005, "{fit:?}");
    }

    #[test]
    fn constant_series() {
        let t = grid(50, 1.0);
        let fit = fit_decay_rate(&t, &vec![2.0; 50], None).unwrap();
        assert_eq!(fit.rate, 0.0);
        assert_eq!(fit.r_squared, 1.0);
    }

    #[test]
    fn short_or_floored_windows_fail() {
        let t = grid(30, 1.0);
        assert!(fit_decay_rate(&t, &vec![1.0; 30], None).is_err());
        let t = grid(100, 100.0);
        let y: Vec<f64> = t.iter().map(|t| (-t).exp()).collect();
        assert!(matches!(fit_decay_rate(&t, &y, None), Err(Error::Fit { .. })));
    }
}
