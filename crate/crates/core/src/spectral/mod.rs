//! Spectral constants, rate certificates and diffusion coefficients.

pub mod certificate;
pub mod diffusion;
pub mod gaps;
pub mod hardy;
pub mod norms;
pub mod optimize;
pub mod regularity;
pub mod tridiagonal;

pub use certificate::{certify, kappa, rate_from_constants, RateCertificate};
pub use diffusion::{diffusion_coefficient, DiffusionCoefficient};
pub use gaps::{
    kinetic_macroscopic_gap, macroscopic_gap, microscopic_gap, schrodinger_gap, weighted_poincare_gap, SchrodingerGap,
};
pub use hardy::{critical_alpha, hardy_poincare_constant, HardyOptions};
pub use norms::{auxiliary_norms, AuxiliaryNorms, PowerOptions};
