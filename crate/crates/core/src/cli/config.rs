use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

const ORIGIN: &str = "cli::RunConfig";

pub fn config_err(msg: impl Into<String>) -> Error {
    Error::Config { origin: ORIGIN, msg: msg.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Subcommand {
    Toy,
    Certify,
    Simulate,
    Limit,
    Spectral,
    Conditions,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Self::Toy => "toy",
            Self::Certify => "certify",
            Self::Simulate => "simulate",
            Self::Limit => "limit",
            Self::Spectral => "spectral",
            Self::Conditions => "conditions",
        }
    }
}

/// Recognized keys with their defaults.
pub const KEYS: &[(&str, &str)] = &[
    ("scenario.collision", "bgk"),
    ("scenario.potential", "power:beta=1"),
    ("scenario.profile", "maxwellian"),
    ("scenario.nx", "128"),
    ("scenario.nv", "128"),
    ("scenario.x_half", "auto"),
    ("scenario.v_half", "auto"),
    ("scenario.eps", "auto"),
    ("scenario.initial", "random"),
    ("scenario.t_end", "20"),
    ("scenario.dt", "auto"),
    ("scenario.stride", "10"),
    ("scenario.densities", "false"),
    ("toy.kmax", "16"),
    ("toy.eps", "0.4"),
    ("toy.lam", "0.5"),
    ("toy.t_end", "40"),
    ("toy.dt", "0.001"),
    ("toy.stride", "10"),
    ("limit.eps", "0.2,0.1,0.05"),
    ("limit.kappa", "0.02"),
    ("limit.sample_dt", "0.05"),
    ("limit.t_end", "1"),
    ("limit.nx", "64"),
    ("limit.nv", "32"),
    ("spectral.hardy_alpha", "1"),
    ("spectral.hardy_d", "3"),
    ("tol.rate", "1e-6"),
    ("tol.entropy", "1e-9"),
    ("tol.power", "1e-10"),
];

/// Declarative run configuration: flat dotted keys over the defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Subcommand,
    pub values: BTreeMap<String, String>,
    pub out: PathBuf,
    pub seed: u64,
    pub strict: bool,
    pub sweep: Option<(String, Vec<String>)>,
    /// Unknown keys seen in non-strict mode.
    pub warnings: Vec<String>,
}

impl RunConfig {
    pub fn new(command: Subcommand, out: impl Into<PathBuf>) -> Self {
        Self {
            command,
            values: KEYS.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
            out: out.into(),
            seed: 1,
            strict: false,
            sweep: None,
            warnings: Vec::new(),
        }
    }

    /// Sets `key`; unknown keys fail in strict mode and are recorded otherwise.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim();
        if !KEYS.iter().any(|(k, _)| *k == key) {
            if self.strict {
                return Err(config_err(format!("unknown key {key:?}")));
            }
            self.warnings.push(format!("ignored unknown key {key:?}"));
            return Ok(());
        }
        self.values.insert(key.to_string(), value.trim().to_string());
        Ok(())
    }

    /// Reads `key=value` lines; `#` starts a comment.
    pub fn load_text(&mut self, text: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| config_err(format!("line {}: expected key=value, got {line:?}", n + 1)))?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn load_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { origin: ORIGIN, source })?;
        self.load_text(&text)
    }

    /// `key=v1,v2,...`
    pub fn set_sweep(&mut self, spec: &str) -> Result<()> {
        let (k, vs) = spec.split_once('=').ok_or_else(|| config_err(format!("sweep {spec:?} is not key=v1,v2")))?;
        let key = k.trim();
        if !KEYS.iter().any(|(name, _)| *name == key) {
            return Err(config_err(format!("unknown sweep key {key:?}")));
        }
        let values: Vec<String> = vs.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
        if values.is_empty() {
            return Err(config_err("sweep needs at least one value"));
        }
        self.sweep = Some((key.to_string(), values));
        Ok(())
    }

    pub fn raw(&self, key: &str) -> &str {
        self.values.get(key).map(String::as_str).unwrap_or("")
    }

    pub fn is_auto(&self, key: &str) -> bool {
        self.raw(key) == "auto"
    }

    pub fn f64(&self, key: &str) -> Result<f64> {
        let v: f64 = self.raw(key).parse().map_err(|_| config_err(format!("{key} = {:?} is not a number", self.raw(key))))?;
        if !v.is_finite() {
            return Err(config_err(format!("{key} must be finite")));
        }
        Ok(v)
    }

    pub fn positive(&self, key: &str) -> Result<f64> {
        let v = self.f64(key)?;
        if v <= 0.0 {
            return Err(config_err(format!("{key} = {v} must be positive")));
        }
        Ok(v)
    }

    pub fn optional_positive(&self, key: &str) -> Result<Option<f64>> {
        if self.is_auto(key) {
            Ok(None)
        } else {
            self.positive(key).map(Some)
        }
    }

    pub fn usize(&self, key: &str) -> Result<usize> {
        let v: usize = self.raw(key).parse().map_err(|_| config_err(format!("{key} = {:?} is not a count", self.raw(key))))?;
        if v == 0 {
            return Err(config_err(format!("{key} must be positive")));
        }
        Ok(v)
    }

    pub fn i64(&self, key: &str) -> Result<i64> {
        self.raw(key).parse().map_err(|_| config_err(format!("{key} = {:?} is not an integer", self.raw(key))))
    }

    pub fn bool(&self, key: &str) -> Result<bool> {
        match self.raw(key) {
            "true" | "1" | "yes" => Ok(true),
            "false" | "0" | "no" => Ok(false),
            other => Err(config_err(format!("{key} = {other:?} is not a boolean"))),
        }
    }

    pub fn list(&self, key: &str) -> Result<Vec<f64>> {
        self.raw(key)
            .split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|_| config_err(format!("{key}: bad entry {s:?}"))))
            .collect()
    }
}
