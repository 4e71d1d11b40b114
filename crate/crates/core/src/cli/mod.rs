//! Command-line driver: configuration, pipelines, reports and manifests.

pub mod config;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::Parser;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::equilibria::{
    build_weights, check_conditions, suggest_x_half_width, ConditionReport, EnergyProfile, Potential, WeightVariant,
};
use crate::error::{Error, Result};
use crate::operators::{CollisionKind, OperatorSet};
use crate::simulator::{self, InitialDatum, Scenario, TimeSeries};
use crate::spectral::{self, PowerOptions, RateCertificate};
use crate::toy;

pub use config::{config_err, RunConfig, Subcommand, KEYS};

pub const ENV_OUT: &str = "HYPOLAB_OUT";
pub const MANIFEST: &str = "manifest.sha256";

pub mod exit {
    pub const OK: i32 = 0;
    pub const OTHER: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const CONDITION: i32 = 3;
    pub const DIVERGENCE: i32 = 4;
    pub const CERTIFICATE: i32 = 5;
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config { .. } => exit::CONFIG,
        Error::ConditionFailure { .. } | Error::Confinement { .. } => exit::CONDITION,
        Error::Divergence { .. } | Error::EntropyIncrease { .. } => exit::DIVERGENCE,
        Error::CertificateViolation { .. } => exit::CERTIFICATE,
        _ => exit::OTHER,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct ManifestEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Results of one run.
#[derive(Debug, Clone, Default, serde::Serialize)]
pub struct ReportBundle {
    pub command: String,
    pub conditions: Option<ConditionReport>,
    pub certificate: Option<RateCertificate>,
    pub fitted_rates: BTreeMap<String, f64>,
    /// Ordered `key: value` lines of the text report.
    pub values: Vec<(String, String)>,
    pub warnings: Vec<String>,
    #[serde(skip)]
    pub files: Vec<ManifestEntry>,
}

impl ReportBundle {
    fn put(&mut self, key: &str, value: impl ToString) {
        self.values.push((key.to_string(), value.to_string()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn text_report(&self) -> String {
        let mut s = String::new();
        let mut line = |k: &str, v: &str| {
            s.push_str(k);
            s.push_str(": ");
            s.push_str(v);
            s.push('\n');
        };
        line("command", &self.command);
        for (k, v) in &self.values {
            line(k, v);
        }
        if let Some(c) = &self.conditions {
            for r in &c.results {
                let verdict = match r.passed {
                    Some(true) => "pass",
                    Some(false) => "fail",
                    None => "not evaluated",
                };
                line(&format!("condition.{}", r.name), verdict);
            }
        }
        if let Some(c) = &self.certificate {
            for (k, v) in [
                ("lambda_m", c.lambda_m),
                ("lambda_M", c.lambda_big_m),
                ("C_M", c.c_m),
                ("eps_star", c.eps_star),
                ("delta_star", c.delta_star),
                ("kappa", c.kappa),
                ("lambda", c.lambda),
                ("C", c.prefactor),
            ] {
                line(&format!("certificate.{k}"), &format!("{v:.12e}"));
            }
        }
        for (k, v) in &self.fitted_rates {
            line(&format!("rate.{k}"), &format!("{v:.12e}"));
        }
        for w in &self.warnings {
            line("warning", w);
        }
        s
    }
}

#[derive(Parser, Debug)]
#[command(name = "hypolab", version, about = "Hypocoercive decay laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Subcommand, Debug)]
enum Command {
    /// Two-velocity toy model: per-mode dynamics and the κ bound
    Toy(Args),
    /// Rate certificate from λ_m, λ_M and C_M
    Certify(Args),
    /// Integrate the kinetic equation and compare with the certificate
    Simulate(Args),
    /// Parabolic-rescaling limit check
    Limit(Args),
    /// Spectral gaps, diffusion coefficients and Hardy–Poincaré constants
    Spectral(Args),
    /// Check confinement and weight conditions
    Conditions(Args),
}

#[derive(clap::Args, Debug, Default)]
struct Args {
    /// Flat key=value configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (default: $HYPOLAB_OUT or ./hypolab-out)
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Reject unknown keys and stop on failed conditions
    #[arg(long)]
    strict: bool,
    /// key=v1,v2,... run once per value
    #[arg(long)]
    sweep: Option<String>,
    /// key=value override, repeatable
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    collision: Option<String>,
    #[arg(long)]
    potential: Option<String>,
    #[arg(long)]
    profile: Option<String>,
    #[arg(long)]
    nx: Option<String>,
    #[arg(long)]
    nv: Option<String>,
    #[arg(long)]
    eps: Option<String>,
    #[arg(long = "t-end")]
    t_end: Option<String>,
    #[arg(long)]
    dt: Option<String>,
    #[arg(long)]
    initial: Option<String>,
    #[arg(long)]
    kmax: Option<String>,
    #[arg(long)]
    lam: Option<String>,
}

fn build_config(command: Subcommand, args: Args) -> Result<RunConfig> {
    let out = args
        .out
        .or_else(|| std::env::var_os(ENV_OUT).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("hypolab-out"));
    let mut c = RunConfig::new(command, out);
    c.strict = args.strict;
    if let Some(path) = &args.config {
        c.load_file(path)?;
    }
    let section = match command {
        Subcommand::Toy => "toy",
        Subcommand::Limit => "limit",
        _ => "scenario",
    };
    let aliases = [
        ("scenario.collision", args.collision),
        ("scenario.potential", args.potential),
        ("scenario.profile", args.profile),
        ("scenario.nx", args.nx),
        ("scenario.nv", args.nv),
        (if section == "toy" { "toy.eps" } else if section == "limit" { "limit.eps" } else { "scenario.eps" }, args.eps),
        (if section == "toy" { "toy.t_end" } else if section == "limit" { "limit.t_end" } else { "scenario.t_end" }, args.t_end),
        (if section == "toy" { "toy.dt" } else { "scenario.dt" }, args.dt),
        ("scenario.initial", args.initial),
        ("toy.kmax", args.kmax),
        ("toy.lam", args.lam),
    ];
    for (key, value) in aliases {
        if let Some(v) = value {
            c.set(key, &v)?;
        }
    }
    for item in &args.set {
        let (k, v) = item.split_once('=').ok_or_else(|| config_err(format!("--set {item:?} is not key=value")))?;
        c.set(k, v)?;
    }
    if let Some(seed) = args.seed {
        c.seed = seed;
    }
    if let Some(s) = &args.sweep {
        c.set_sweep(s)?;
    }
    Ok(c)
}

/// Parses arguments, runs, prints the report and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { exit::CONFIG } else { exit::OK };
        }
    };
    let (command, args) = match cli.command {
        Command::Toy(a) => (Subcommand::Toy, a),
        Command::Certify(a) => (Subcommand::Certify, a),
        Command::Simulate(a) => (Subcommand::Simulate, a),
        Command::Limit(a) => (Subcommand::Limit, a),
        Command::Spectral(a) => (Subcommand::Spectral, a),
        Command::Conditions(a) => (Subcommand::Conditions, a),
    };
    let result = build_config(command, args).and_then(|c| run(&c));
    match result {
        Ok(bundle) => {
            print!("{}", bundle.text_report());
            exit::OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn io_err(source: std::io::Error) -> Error {
    Error::Io { origin: "cli::run", source }
}

fn wrap_config(e: Error) -> Error {
    match e {
        Error::Domain { msg, .. } => config_err(msg),
        other => other,
    }
}

/// Executes the configured pipeline and writes its outputs.
pub fn run(config: &RunConfig) -> Result<ReportBundle> {
    if let Some((key, values)) = &config.sweep {
        return run_sweep(config, key, values);
    }
    std::fs::create_dir_all(&config.out).map_err(io_err)?;
    let mut bundle = ReportBundle { command: config.command.name().to_string(), ..Default::default() };
    bundle.warnings.extend(config.warnings.iter().cloned());
    bundle.put("seed", config.seed);
    for (k, v) in &config.values {
        bundle.put(&format!("config.{k}"), v);
    }
    let outcome = match config.command {
        Subcommand::Toy => run_toy(config, &mut bundle),
        Subcommand::Certify => run_certify(config, &mut bundle).map(|_| ()),
        Subcommand::Simulate => run_simulate(config, &mut bundle),
        Subcommand::Limit => run_limit(config, &mut bundle),
        Subcommand::Spectral => run_spectral(config, &mut bundle),
        Subcommand::Conditions => run_conditions(config, &mut bundle),
    };
    let deferred = match outcome {
        Ok(()) => None,
        Err(e @ Error::CertificateViolation { .. }) => Some(e),
        Err(e) => return Err(e),
    };
    finish(config, &mut bundle)?;
    match deferred {
        Some(e) => Err(e),
        None => Ok(bundle),
    }
}

fn run_sweep(config: &RunConfig, key: &str, values: &[String]) -> Result<ReportBundle> {
    std::fs::create_dir_all(&config.out).map_err(io_err)?;
    let results: Vec<Result<ReportBundle>> = values
        .par_iter()
        .map(|v| {
            let mut c = config.clone();
            c.sweep = None;
            c.set(key, v)?;
            c.out = config.out.join(format!("{key}={}", sanitize(v)));
            run(&c)
        })
        .collect();
    let mut bundle = ReportBundle { command: config.command.name().to_string(), ..Default::default() };
    bundle.put("sweep.key", key);
    let mut first_err = None;
    for (v, r) in values.iter().zip(results) {
        match r {
            Ok(b) => {
                bundle.put(&format!("sweep.{v}"), "ok");
                for (k, rate) in b.fitted_rates {
                    bundle.fitted_rates.insert(format!("{v}.{k}"), rate);
                }
                if let Some(c) = b.certificate {
                    bundle.put(&format!("sweep.{v}.lambda"), format!("{:.12e}", c.lambda));
                }
            }
            Err(e) => {
                bundle.put(&format!("sweep.{v}"), format!("error (exit {}): {e}", exit_code(&e)));
                first_err.get_or_insert(e);
            }
        }
    }
    finish(config, &mut bundle)?;
    match first_err {
        Some(e) => Err(e),
        None => Ok(bundle),
    }
}

fn sanitize(v: &str) -> String {
    v.chars().map(|c| if c.is_ascii_alphanumeric() || "._-=,".contains(c) { c } else { '_' }).collect()
}

/// Writes the text report, the summary and the manifest.
fn finish(config: &RunConfig, bundle: &mut ReportBundle) -> Result<()> {
    std::fs::write(config.out.join("report.txt"), bundle.text_report()).map_err(io_err)?;
    let summary = serde_json::json!({
        "command": bundle.command,
        "seed": config.seed,
        "strict": config.strict,
        "config": config.values,
        "values": bundle.values.iter().cloned().collect::<BTreeMap<_, _>>(),
        "conditions": bundle.conditions,
        "certificate": bundle.certificate,
        "fitted_rates": bundle.fitted_rates,
        "warnings": bundle.warnings,
    });
    let text = serde_json::to_string_pretty(&summary).map_err(|e| config_err(e.to_string()))?;
    std::fs::write(config.out.join("summary.json"), text + "\n").map_err(io_err)?;
    bundle.files = write_manifest(&config.out)?;
    Ok(())
}

/// Hashes every file below `dir` except the manifest itself and writes
/// `manifest.sha256` in `sha256sum` format.
pub fn write_manifest(dir: &Path) -> Result<Vec<ManifestEntry>> {
    let mut paths = Vec::new();
    collect_files(dir, dir, &mut paths)?;
    paths.sort();
    let mut entries = Vec::new();
    let mut text = String::new();
    for rel in paths {
        if rel == MANIFEST {
            continue;
        }
        let bytes = std::fs::read(dir.join(&rel)).map_err(io_err)?;
        let sha256 = hex::encode(Sha256::digest(&bytes));
        text.push_str(&format!("{sha256}  {rel}\n"));
        entries.push(ManifestEntry { path: rel, sha256, bytes: bytes.len() as u64 });
    }
    std::fs::write(dir.join(MANIFEST), text).map_err(io_err)?;
    Ok(entries)
}

fn collect_files(root: &Path, dir: &Path, out: &mut Vec<String>) -> Result<()> {
    for entry in std::fs::read_dir(dir).map_err(io_err)? {
        let path = entry.map_err(io_err)?.path();
        if path.is_dir() {
            collect_files(root, &path, out)?;
        } else {
            let rel = path.strip_prefix(root).expect("path below root");
            out.push(rel.to_string_lossy().replace('\\', "/"));
        }
    }
    Ok(())
}

/// Re-hashes the files listed in `dir/manifest.sha256`; returns mismatching paths.
pub fn verify_manifest(dir: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(dir.join(MANIFEST)).map_err(io_err)?;
    let mut bad = Vec::new();
    for line in text.lines() {
        let (hash, rel) = line.split_once("  ").ok_or_else(|| config_err(format!("bad manifest line {line:?}")))?;
        match std::fs::read(dir.join(rel)) {
            Ok(bytes) if hex::encode(Sha256::digest(&bytes)) == hash => {}
            _ => bad.push(rel.to_string()),
        }
    }
    Ok(bad)
}

pub fn scenario_from(config: &RunConfig) -> Result<Scenario> {
    let collision: CollisionKind = config.raw("scenario.collision").parse().map_err(wrap_config)?;
    let potential: Potential = config.raw("scenario.potential").parse().map_err(wrap_config)?;
    let profile: EnergyProfile = config.raw("scenario.profile").parse().map_err(wrap_config)?;
    let mut s = Scenario::new(collision, potential, config.usize("scenario.nx")?, config.usize("scenario.nv")?);
    s.profile = profile;
    s.x_half = config.optional_positive("scenario.x_half")?;
    s.v_half = config.optional_positive("scenario.v_half")?;
    s.eps = match config.optional_positive("scenario.eps")? {
        Some(e) if e >= 1.0 => return Err(config_err(format!("scenario.eps = {e} must be below 1"))),
        other => other,
    };
    s.t_end = config.positive("scenario.t_end")?;
    s.dt = config.optional_positive("scenario.dt")?;
    s.stride = config.usize("scenario.stride")?;
    s.store_densities = config.bool("scenario.densities")?;
    s.entropy_tol = Some(config.positive("tol.entropy")?);
    let initial = config.raw("scenario.initial");
    s.initial = match initial {
        "random" => InitialDatum::RandomZeroMass { seed: config.seed },
        "local" => InitialDatum::LocalEquilibriumPerturbation,
        "smooth" => InitialDatum::Smooth,
        other => match other.strip_prefix("table:") {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(io_err)?;
                let values = text
                    .split_whitespace()
                    .map(|t| t.parse::<f64>().map_err(|_| config_err(format!("bad value {t:?} in {path}"))))
                    .collect::<Result<Vec<_>>>()?;
                InitialDatum::Tabulated(values)
            }
            None => return Err(config_err(format!("scenario.initial = {other:?}: expected random, local, smooth or table:PATH"))),
        },
    };
    Ok(s)
}

fn conditions_for(config: &RunConfig, s: &Scenario, bundle: &mut ReportBundle) -> Result<()> {
    let x_half = match s.x_half {
        Some(x) => x,
        None => suggest_x_half_width(s.profile, &s.potential, 1e-12).unwrap_or(10.0),
    };
    let report = check_conditions(&s.potential, s.profile, x_half, None);
    let failure = report.first_failure().map(|r| r.name.clone());
    bundle.conditions = Some(report);
    if let Some(name) = failure {
        if config.strict {
            return Err(Error::ConditionFailure { origin: "cli::run", condition: name });
        }
        bundle.warnings.push(format!("condition {name} failed"));
    }
    Ok(())
}

fn power_options(config: &RunConfig) -> Result<PowerOptions> {
    Ok(PowerOptions { tol: config.positive("tol.power")?, ..PowerOptions::default() })
}

fn run_certify(config: &RunConfig, bundle: &mut ReportBundle) -> Result<(Scenario, OperatorSet, RateCertificate)> {
    let s = scenario_from(config)?;
    conditions_for(config, &s, bundle)?;
    let ops = s.operators()?;
    let (cert, norms) = spectral::certify(&ops, power_options(config)?)?;
    bundle.put("grid.x_half", format!("{:.12e}", ops.grid.x.half_width));
    bundle.put("grid.v_half", format!("{:.12e}", ops.grid.v.half_width));
    bundle.put("norm.AT_perp", format!("{:.12e}", norms.at_perp));
    bundle.put("norm.AL", format!("{:.12e}", norms.al));
    bundle.put("norm.iterations", format!("{},{}", norms.iterations[0], norms.iterations[1]));
    bundle.certificate = Some(cert.clone());
    Ok((s, ops, cert))
}

fn run_simulate(config: &RunConfig, bundle: &mut ReportBundle) -> Result<()> {
    let (mut s, ops, cert) = run_certify(config, bundle)?;
    if s.eps.is_none() {
        s.eps = Some(cert.eps_star);
    }
    let ts = simulator::integrate(&s, &ops)?;
    ts.write_csv(&config.out.join("series.csv"))?;
    write_columns(&config.out.join("norm.dat"), &ts.t, &ts.norm)?;
    if s.store_densities {
        for (k, rho) in ts.densities.iter().enumerate() {
            write_columns(&config.out.join(format!("density_{k:05}.dat")), &ops.grid.x.nodes, rho)?;
        }
    }
    bundle.put("simulate.eps", format!("{:.12e}", ts.eps));
    bundle.put("simulate.dt", format!("{:.12e}", ts.dt));
    bundle.put("simulate.mass_drift_rate", format!("{:.3e}", ts.mass_drift_rate()));
    bundle.put("simulate.max_entropy_increase", format!("{:.3e}", ts.max_entropy_increase));
    let fit = match ts.fit_rate() {
        Ok(fit) => fit,
        Err(Error::Fit { msg, .. }) => {
            bundle.warnings.push(format!("no decay rate fitted: {msg}"));
            return Ok(());
        }
        Err(e) => return Err(e),
    };
    bundle.put("simulate.fit_r_squared", format!("{:.6}", fit.r_squared));
    bundle.put("simulate.fit_window", format!("{:.6},{:.6}", fit.window.0, fit.window.1));
    bundle.fitted_rates.insert("norm".into(), fit.rate);
    let tol = config.positive("tol.rate")?;
    if fit.rate < cert.lambda - tol {
        return Err(Error::CertificateViolation { origin: "cli::run", observed: fit.rate, certified: cert.lambda });
    }
    Ok(())
}

fn toy_series(m: &toy::ModeSeries, eps: f64) -> TimeSeries {
    TimeSeries {
        t: m.t.clone(),
        mass: m.u.clone(),
        norm: m.norm.clone(),
        entropy: m.entropy.clone(),
        dissipation: m.u.iter().zip(&m.v).map(|(&u, &v)| toy::toy_dissipation(m.k, [u, v], eps)).collect(),
        norm_pi: m.u.iter().map(|u| u.abs()).collect(),
        norm_perp: m.v.iter().map(|v| v.abs()).collect(),
        eps,
        ..Default::default()
    }
}

fn run_toy(config: &RunConfig, bundle: &mut ReportBundle) -> Result<()> {
    let k_max = config.i64("toy.kmax")?;
    if k_max < 0 {
        return Err(config_err("toy.kmax must be nonnegative"));
    }
    let eps = config.positive("toy.eps")?;
    let lam = config.positive("toy.lam")?;
    let modes = toy::evolve_toy(
        k_max,
        eps,
        config.positive("toy.t_end")?,
        config.positive("toy.dt")?,
        config.usize("toy.stride")?,
        |_| [1.0, 1.0],
    )?;
    let mut ks = Vec::new();
    let mut rates = Vec::new();
    for m in &modes {
        toy_series(m, eps).write_csv(&config.out.join(format!("mode_{:03}.csv", m.k)))?;
        if m.k != 0 {
            let fit = m.fitted_rate()?;
            bundle.fitted_rates.insert(format!("k{:03}", m.k), fit.rate);
            ks.push(m.k as f64);
            rates.push(fit.rate);
        }
    }
    if !ks.is_empty() {
        write_columns(&config.out.join("toy_rates.dat"), &ks, &rates)?;
    }
    let kappa = toy::toy_kappa(eps, lam)?;
    let (best_eps, best_lam, best) = toy::toy_best_rate();
    bundle.put("toy.kappa", format!("{kappa:.12e}"));
    bundle.put("toy.certified_rate", format!("{:.12e}", kappa / (1.0 + eps)));
    bundle.put("toy.eps_bound", format!("{:.12e}", toy::toy_eps_bound(lam)));
    bundle.put("toy.best_certified_rate", format!("{best:.12e}"));
    bundle.put("toy.best_eps", format!("{best_eps:.12e}"));
    bundle.put("toy.best_lam", format!("{best_lam:.12e}"));
    bundle.put("toy.below_one_fifth", best < 0.2);
    bundle.put("toy.spectral_gap", "0.5");
    Ok(())
}

fn run_limit(config: &RunConfig, bundle: &mut ReportBundle) -> Result<()> {
    let mut s = scenario_from(config)?;
    s.n_x = config.usize("limit.nx")?;
    s.n_v = config.usize("limit.nv")?;
    s.t_end = config.positive("limit.t_end")?;
    let eps = config.list("limit.eps")?;
    let table = simulator::diffusion_limit_check(
        &s,
        &eps,
        config.positive("limit.kappa")?,
        config.positive("limit.sample_dt")?,
    )?;
    let mut text = String::from("# eps error ratio order\n");
    for r in &table.rows {
        text.push_str(&format!(
            "{:.6e} {:.12e} {} {}\n",
            r.eps,
            r.error,
            r.ratio.map_or("nan".into(), |x| format!("{x:.6}")),
            r.order.map_or("nan".into(), |x| format!("{x:.6}"))
        ));
        bundle.put(&format!("limit.error.{}", r.eps), format!("{:.12e}", r.error));
        if let Some(x) = r.ratio {
            bundle.put(&format!("limit.ratio.{}", r.eps), format!("{x:.6}"));
        }
    }
    bundle.put("limit.sigma", format!("{:.12e}", table.sigma));
    std::fs::write(config.out.join("limit.dat"), text).map_err(io_err)?;
    Ok(())
}

fn run_spectral(config: &RunConfig, bundle: &mut ReportBundle) -> Result<()> {
    let s = scenario_from(config)?;
    conditions_for(config, &s, bundle)?;
    let gibbs = s.gibbs()?;
    bundle.put("spectral.macroscopic_gap", format!("{:.12e}", spectral::macroscopic_gap(&gibbs)?));
    if gibbs.is_separable() {
        let ops = OperatorSet::assemble(&gibbs, s.collision.clone())?;
        bundle.put("spectral.microscopic_gap", format!("{:.12e}", spectral::microscopic_gap(&ops.collision)?));
        bundle.put("spectral.kinetic_macroscopic_gap", format!("{:.12e}", spectral::kinetic_macroscopic_gap(&ops)?));
        match spectral::schrodinger_gap(&s.potential, &gibbs.grid.x, 1e-2) {
            Ok(g) => {
                bundle.put("spectral.schrodinger_gap", format!("{:.12e}", g.gap));
                bundle.put("spectral.ground_residual", format!("{:.3e}", g.ground_residual));
            }
            Err(e) => bundle.warnings.push(e.to_string()),
        }
        let d = spectral::diffusion_coefficient(&ops, &s.potential)?;
        let sigma = d.sigma.iter().sum::<f64>() / d.sigma.len() as f64;
        bundle.put("spectral.sigma", format!("{sigma:.12e}"));
        write_columns(&config.out.join("rho_sigma.dat"), &ops.grid.x.nodes, &d.rho_sigma)?;
    }
    let alpha = config.f64("spectral.hardy_alpha")?;
    let d = config.usize("spectral.hardy_d")?;
    match spectral::hardy_poincare_constant(alpha, d, spectral::HardyOptions::default()) {
        Ok(c) => bundle.put("spectral.hardy_poincare", format!("{c:.12e}")),
        Err(e) => bundle.warnings.push(e.to_string()),
    }
    write_columns(&config.out.join("rho_f.dat"), &gibbs.grid.x.nodes, &gibbs.rho)?;
    Ok(())
}

fn run_conditions(config: &RunConfig, bundle: &mut ReportBundle) -> Result<()> {
    let s = scenario_from(config)?;
    conditions_for(config, &s, bundle)?;
    let variant = if s.profile.is_maxwellian() { WeightVariant::Standard } else { WeightVariant::FastDiffusion };
    let weights = s.gibbs().and_then(|g| build_weights(&g, &s.potential, variant));
    match weights {
        Ok(w) => {
            let x_half = w.x.iter().fold(0.0_f64, |a, b| a.max(b.abs()));
            let report = check_conditions(&s.potential, s.profile, x_half, Some(&w));
            let c = w.framework_constants();
            bundle.put("weights.identity_residual", format!("{:.3e}", w.identity_residual()));
            for (k, v) in [("c1", Some(c.c1)), ("c2", Some(c.c2)), ("c3", Some(c.c3)), ("c4", c.c4)] {
                bundle.put(&format!("weights.{k}"), v.map_or("n/a".into(), |x| format!("{x:.12e}")));
            }
            let failure = report.first_failure().map(|r| r.name.clone());
            bundle.conditions = Some(report);
            if let Some(name) = failure {
                if config.strict {
                    return Err(Error::ConditionFailure { origin: "cli::run", condition: name });
                }
                bundle.warnings.push(format!("condition {name} failed"));
            }
        }
        Err(e) => bundle.warnings.push(format!("weights unavailable: {e}")),
    }
    Ok(())
}

/// Two-column gnuplot data.
fn write_columns(path: &Path, a: &[f64], b: &[f64]) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path).map_err(io_err)?);
    for (x, y) in a.iter().zip(b) {
        writeln!(out, "{x:.17e} {y:.17e}").map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}
