//! Acceptance suite: one PASS/FAIL line per criterion.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use hypolab::equilibria::*;
use hypolab::operators::*;
use hypolab::simulator::*;
use hypolab::spectral::*;
use hypolab::toy;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn ops_for(kind: CollisionKind, beta: f64, nx: usize, nv: usize) -> OperatorSet {
    Scenario::new(kind, Potential::power_law(beta), nx, nv).operators().unwrap()
}

fn random_field(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn sci(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(", ")
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn c1_toy_spectrum() -> Outcome {
    let mut worst = 0.0f64;
    for k in 1..=16 {
        let computed = toy::computed_mode_spectrum(k);
        let w = (4.0 * (k * k) as f64 - 1.0).sqrt() / 2.0;
        for (z, im) in computed.iter().zip([w, -w]) {
            worst = worst.max((z.re + 0.5).abs()).max((z.im - im).abs());
        }
    }
    check(worst <= 1e-12, format!("max eigenvalue error {worst:.2e}"))
}

fn c2_toy_decay() -> Outcome {
    let modes = toy::evolve_toy(16, 0.4, 40.0, 1e-3, 10, |_| [1.0, 1.0]).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for m in modes.iter().filter(|m| m.k > 0) {
        let rate = m.fitted_rate().map_err(|e| e.to_string())?.rate;
        worst = worst.max((rate - 0.5).abs() / 0.5);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut best = 0.0f64;
    for _ in 0..100 {
        let lam = rng.gen_range(0.01..0.99);
        let eps = rng.gen_range(0.0..1.0) * toy::toy_eps_bound(lam);
        let kappa = toy::toy_kappa(eps.max(1e-9), lam).map_err(|e| e.to_string())?;
        best = best.max(kappa / (1.0 + eps));
    }
    check(
        worst <= 0.02 && best < 0.2,
        format!("max rate deviation {:.3}%, max κ/(1+ε) over 100 pairs {best:.4}", 100.0 * worst),
    )
}

fn c3_auxiliary_bounds() -> Outcome {
    let ops = ops_for(CollisionKind::Bgk, 1.0, 96, 96);
    let (a_ratio, ta_ratio) = (0..1000u64)
        .into_par_iter()
        .map(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let h = random_field(&mut rng, ops.size());
            let perp = ops.norm(&ops.project_perp(&h));
            let ah = ops.apply_a(&h);
            let tah = ops.apply_t(&ah);
            (ops.norm(&ah) / perp, ops.norm(&tah) / perp)
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1)));
    check(
        a_ratio <= 0.5 * (1.0 + 1e-8) && ta_ratio <= 1.0 + 1e-8,
        format!("max ‖Af‖/‖(1-Π)f‖ = {a_ratio:.6}, max ‖TAf‖/‖(1-Π)f‖ = {ta_ratio:.6}"),
    )
}

fn c4_pi_t_pi() -> Outcome {
    let mut worst = 0.0f64;
    for kind in [CollisionKind::Bgk, CollisionKind::FokkerPlanck, "scattering".parse().unwrap()] {
        let ops = ops_for(kind, 1.0, 96, 64);
        let n = ops.n_x();
        let mut pitpi = DMatrix::zeros(n, n);
        let mut tpi = 0.0;
        for k in 0..n {
            let mut c = vec![0.0; n];
            c[k] = 1.0;
            let th = ops.apply_t(&ops.aux.extend(&c));
            tpi += th.iter().map(|x| x * x).sum::<f64>();
            let col = ops.aux.restrict(&th);
            for i in 0..n {
                pitpi[(i, k)] = col[i];
            }
        }
        worst = worst.max(pitpi.norm() / tpi.sqrt());
    }
    check(worst <= 1e-10, format!("max ‖ΠTΠ‖/‖TΠ‖ (Frobenius) = {worst:.2e}"))
}

fn c5_constants() -> Outcome {
    let bgk = microscopic_gap(&ops_for(CollisionKind::Bgk, 1.0, 32, 64).collision).map_err(|e| e.to_string())?;
    let mut fp = Vec::new();
    for nv in [64, 128, 256] {
        let g = build_gibbs_state(
            EnergyProfile::maxwellian(),
            &Potential::power_law(1.0),
            &PhaseGrid::new(16, 6.0, nv, maxwellian_v_half_width(1e-16)).unwrap(),
            GibbsOptions { tail_cutoff: 1.0, ..Default::default() },
        )
        .map_err(|e| e.to_string())?;
        fp.push(microscopic_gap(&assemble_collision(CollisionKind::FokkerPlanck, &g).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?);
    }
    let converging = fp.windows(2).all(|w| (w[1] - 1.0).abs() <= (w[0] - 1.0).abs() + 1e-12);
    let p = Potential::power_law(1.0);
    let x_half = suggest_x_half_width(EnergyProfile::maxwellian(), &p, 1e-12).map_err(|e| e.to_string())?;
    let grid = PhaseGrid::new(512, x_half, 16, maxwellian_v_half_width(1e-16)).unwrap();
    let gibbs = build_gibbs_state(EnergyProfile::maxwellian(), &p, &grid, GibbsOptions::default()).map_err(|e| e.to_string())?;
    let macro_gap = macroscopic_gap(&gibbs).map_err(|e| e.to_string())?;
    let schr = schrodinger_gap(&p, &grid.x, 1e-2).map_err(|e| e.to_string())?.gap;
    let rel = (macro_gap - schr).abs() / macro_gap;
    check(
        (bgk - 1.0).abs() <= 1e-10 && (0.99..=1.001).contains(&fp[2]) && converging && rel <= 1e-6,
        format!("BGK {bgk:.12}, FP {:?}, macroscopic {macro_gap:.10} vs Schrödinger {schr:.10} (rel {rel:.1e})", fp),
    )
}

struct RunStats {
    label: String,
    certified: f64,
    observed: f64,
    drift: f64,
    max_increase: f64,
}

fn dominance_run(kind: CollisionKind, beta: f64, n: usize) -> Result<RunStats, String> {
    let mut s = Scenario::new(kind.clone(), Potential::power_law(beta), n, n);
    s.t_end = 20.0;
    s.entropy_tol = Some(1e-12);
    s.initial = InitialDatum::RandomZeroMass { seed: 11 };
    let ops = s.operators().map_err(|e| e.to_string())?;
    let (cert, _) = certify(&ops, PowerOptions::default()).map_err(|e| e.to_string())?;
    s.eps = Some(cert.eps_star);
    let ts = integrate(&s, &ops).map_err(|e| format!("{kind} β={beta}: {e}"))?;
    let fit = ts.fit_rate().map_err(|e| e.to_string())?;
    Ok(RunStats {
        label: format!("{kind} β={beta}"),
        certified: cert.lambda,
        observed: fit.rate,
        drift: ts.mass_drift_rate(),
        max_increase: ts.max_entropy_increase,
    })
}

fn c6_c8_dominance() -> (Outcome, Outcome) {
    let cases: Vec<(CollisionKind, f64, usize)> = vec![
        (CollisionKind::Bgk, 1.0, 128),
        (CollisionKind::FokkerPlanck, 1.0, 128),
        (CollisionKind::Bgk, 1.5, 128),
        (CollisionKind::FokkerPlanck, 1.5, 128),
        ("scattering".parse().unwrap(), 1.0, 64),
    ];
    let runs: Vec<Result<RunStats, String>> = cases.into_par_iter().map(|(k, b, n)| dominance_run(k, b, n)).collect();
    let mut dom = Vec::new();
    let mut mass = Vec::new();
    let (mut dom_ok, mut mass_ok) = (true, true);
    for (i, r) in runs.into_iter().enumerate() {
        match r {
            Ok(s) => {
                if i < 4 {
                    let ok = s.observed >= s.certified - 1e-6 && s.max_increase <= 1e-12;
                    dom_ok &= ok;
                    dom.push(format!("{}: λ_obs {:.4} ≥ λ {:.4}", s.label, s.observed, s.certified));
                }
                mass_ok &= s.drift <= 1e-11;
                mass.push(format!("{} {:.1e}", s.label, s.drift));
            }
            Err(e) => {
                dom_ok = false;
                mass_ok = false;
                dom.push(e);
            }
        }
    }
    (check(dom_ok, dom.join("; ")), check(mass_ok, format!("mass drift per unit time: {}", mass.join(", "))))
}

fn c7_entropy_identity() -> Outcome {
    let mut s = Scenario::new(CollisionKind::FokkerPlanck, Potential::power_law(1.0), 48, 32);
    s.initial = InitialDatum::Smooth;
    let ops = s.operators().map_err(|e| e.to_string())?;
    let h0 = initial_state(&s.initial, &ops).map_err(|e| e.to_string())?;
    let defects: Vec<f64> = (0..4)
        .map(|k| entropy_identity_defect(&ops, &h0, 0.1, 1e-2 / 2f64.powi(k)))
        .collect::<hypolab::Result<_>>()
        .map_err(|e| e.to_string())?;
    let orders: Vec<f64> = defects.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let min = orders.iter().cloned().fold(f64::INFINITY, f64::min);
    check(min >= 1.8, format!("defects {}, observed orders {orders:.3?}", sci(&defects)))
}

fn c9_limit() -> Outcome {
    let mut s = Scenario::new(CollisionKind::Bgk, Potential::power_law(1.0), 64, 32);
    s.t_end = 1.0;
    let table = diffusion_limit_check(&s, &[0.2, 0.1, 0.05], 0.02, 0.05).map_err(|e| e.to_string())?;
    let ratios: Vec<f64> = table.rows.iter().filter_map(|r| r.ratio).collect();
    let ok = ratios.len() == 2 && ratios.iter().all(|r| (1.5..=3.0).contains(r));
    let errors: Vec<f64> = table.rows.iter().map(|r| r.error).collect();
    check(ok, format!("errors {}, ratios {ratios:.3?}", sci(&errors)))
}

fn c10_fast_diffusion() -> Outcome {
    let m = 0.5;
    let profile = EnergyProfile::polytropic(m, 3).map_err(|e| e.to_string())?;
    let p = Potential::power_law(1.0);
    let grid = PhaseGrid::new(201, 40.0, 4001, 200.0).unwrap();
    let g = build_gibbs_state(profile, &p, &grid, GibbsOptions { tail_cutoff: 1.0, ..Default::default() })
        .map_err(|e| e.to_string())?;
    let w: Vec<f64> = grid.x.nodes.iter().map(|x| p.value(*x) - p.mu_infinity()).collect();
    let (a, b) = (150, 200);
    let slope = |y: &[f64]| (y[b] / y[a]).ln() / (w[b] / w[a]).ln();
    let exact = fast_diffusion_exponents(m, 1.0, 3).map_err(|e| e.to_string())?;
    let slopes = [slope(&g.rho), slope(&g.m), slope(&g.big_m)];
    let slope_ok = slopes.iter().zip([exact.0, exact.1, exact.2]).all(|(s, e)| (s - e).abs() <= 0.01 * e.abs().max(1.0));
    let ratio: Vec<f64> = (0..grid.n_x()).map(|i| g.big_m[i] * g.rho[i] / (g.m[i] * g.m[i])).collect();
    let (lo, hi) = ratio.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &r| (l.min(r), h.max(r)));
    let spread = (hi - lo) / hi;
    let a_star = critical_alpha(3);
    let sweep: Vec<f64> = (0..10)
        .map(|k| a_star + 1.5 * 0.5f64.powi(k))
        .map(|alpha| hardy_poincare_constant(alpha, 3, HardyOptions::default()))
        .collect::<hypolab::Result<_>>()
        .map_err(|e| e.to_string())?;
    let decreasing = sweep.windows(2).all(|w| w[1] < w[0]);
    let vanishing = sweep[9] < 0.02 * sweep[0];
    check(
        slope_ok && spread <= 1e-6 && sweep[0] > 0.0 && decreasing && vanishing,
        format!(
            "slopes {slopes:.4?} vs {exact:?}, ratio spread {spread:.1e}, Hardy–Poincaré α=1: {:.4}, α→α*: {:.2e}",
            sweep[0], sweep[9]
        ),
    )
}

fn c11_identities() -> Outcome {
    let fp = ops_for(CollisionKind::FokkerPlanck, 1.0, 64, 64);
    let bgk = ops_for(CollisionKind::Bgk, 1.0, 64, 64);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut al, mut la) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let h = random_field(&mut rng, fp.size());
        let ah = fp.apply_a(&h);
        let alh = fp.apply_a(&fp.apply_l(&h));
        let neg: Vec<f64> = ah.iter().map(|x| -x).collect();
        al = al.max(fp.norm(&sub(&alh, &neg)) / fp.norm(&ah));
        let lah = bgk.apply_l(&bgk.apply_a(&h));
        la = la.max(bgk.norm(&lah) / bgk.norm(&bgk.apply_a(&h)));
    }
    let coeff = diffusion_coefficient(&bgk, &Potential::power_law(1.0)).map_err(|e| e.to_string())?;
    // m_F = ∫ v² F dv per x node, summed directly from the equilibrium values.
    let v = &bgk.grid.v.nodes;
    let dv = bgk.grid.v.spacing;
    let n_v = bgk.n_v();
    let sigma_err = (0..bgk.n_x())
        .map(|i| {
            let m_f: f64 = (0..n_v).map(|j| dv * v[j] * v[j] * bgk.sqrt_f[i * n_v + j].powi(2)).sum();
            (coeff.rho_sigma[i] - m_f).abs() / m_f
        })
        .fold(0.0, f64::max);
    check(
        al <= 1e-10 && la <= 1e-10 && sigma_err <= 1e-10,
        format!("‖AL+A‖ rel {al:.1e}, ‖LA‖ rel {la:.1e}, ρ_Fσ vs m_F rel {sigma_err:.1e}"),
    )
}

fn run(id: &str, name: &str, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
    });
    report(id, name, outcome, start.elapsed())
}

fn report(id: &str, name: &str, outcome: Outcome, elapsed: Duration) -> bool {
    let (tag, detail, ok) = match outcome {
        Ok(d) => ("PASS", d, true),
        Err(d) => ("FAIL", d, false),
    };
    println!("criterion {id:>2} {name:<28} {tag} ({:.2}s) {detail}", elapsed.as_secs_f64());
    ok
}

fn main() {
    let mut ok = true;
    ok &= run("1", "toy spectrum", c1_toy_spectrum);
    ok &= run("2", "toy decay and κ bound", c2_toy_decay);
    ok &= run("3", "auxiliary operator bounds", c3_auxiliary_bounds);
    ok &= run("4", "ΠTΠ = 0", c4_pi_t_pi);
    ok &= run("5", "spectral constants", c5_constants);
    let start = Instant::now();
    let (dom, mass) = catch_unwind(c6_c8_dominance).unwrap_or_else(|_| (Err("panicked".into()), Err("panicked".into())));
    let elapsed = start.elapsed();
    ok &= report("6", "certificate dominance", dom, elapsed);
    ok &= run("7", "entropy identity order", c7_entropy_identity);
    ok &= report("8", "mass conservation", mass, elapsed);
    ok &= run("9", "diffusion limit", c9_limit);
    ok &= run("10", "fast-diffusion structure", c10_fast_diffusion);
    ok &= run("11", "operator identities", c11_identities);
    if !ok {
        println!("acceptance: FAILED");
        std::process::exit(1);
    }
    println!("acceptance: all criteria passed");
}
