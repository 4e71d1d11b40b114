use thiserror::Error;

/// Errors raised by the laboratory. Every variant carries the `module::operation`
/// that produced it.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{origin}: domain error: {msg}")]
    Domain { origin: &'static str, msg: String },

    #[error("{origin}: confinement failure ({condition}): {msg}")]
    Confinement {
        origin: &'static str,
        condition: &'static str,
        msg: String,
    },

    #[error("{origin}: degenerate weight at node {node}")]
    DegenerateWeight { origin: &'static str, node: usize },

    #[error("{origin}: truncation error {estimate:.3e} exceeds {threshold:.1e} ({moment})")]
    Truncation {
        origin: &'static str,
        moment: &'static str,
        estimate: f64,
        threshold: f64,
    },

    #[error("{origin}: structure error: {msg}")]
    Structure { origin: &'static str, msg: String },

    #[error("{origin}: kernel consistency error: residual {residual:.3e}")]
    KernelConsistency { origin: &'static str, residual: f64 },

    #[error("{origin}: numerical error: {msg}")]
    Numerical { origin: &'static str, msg: String },

    #[error("{origin}: divergence at t = {t}")]
    Divergence { origin: &'static str, t: f64, last_valid: Vec<f64> },

    #[error("{origin}: modified entropy increased by {increase:.3e} at t = {t}")]
    EntropyIncrease { origin: &'static str, t: f64, increase: f64 },

    #[error("{origin}: certificate failure: {msg}")]
    Certificate { origin: &'static str, msg: String },

    #[error("{origin}: fit error: {msg}")]
    Fit { origin: &'static str, msg: String },

    #[error("{origin}: configuration error: {msg}")]
    Config { origin: &'static str, msg: String },

    #[error("{origin}: condition {condition} failed")]
    ConditionFailure { origin: &'static str, condition: String },

    #[error("{origin}: observed decay rate {observed:.6} below certified {certified:.6}")]
    CertificateViolation {
        origin: &'static str,
        observed: f64,
        certified: f64,
    },

    #[error("{origin}: io error: {source}")]
    Io {
        origin: &'static str,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(origin: &'static str, msg: impl Into<String>) -> Error {
    Error::Domain { origin, msg: msg.into() }
}

pub(crate) fn numerical(origin: &'static str, msg: impl Into<String>) -> Error {
    Error::Numerical { origin, msg: msg.into() }
}

pub(crate) fn structure(origin: &'static str, msg: impl Into<String>) -> Error {
    Error::Structure { origin, msg: msg.into() }
}
