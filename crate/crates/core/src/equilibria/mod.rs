//! Gibbs states, weight functions and hypothesis checks.

pub mod conditions;
pub mod gibbs;
pub mod potential;
pub mod profile;
pub mod weights;

pub use conditions::{check_conditions, ConditionReport, ConditionResult};
pub use gibbs::{
    build_gibbs_state, compute_moments, maxwellian_v_half_width, suggest_x_half_width, GibbsOptions, GibbsState,
    Moments,
};
pub use potential::{Potential, PotentialKind};
pub use profile::{fast_diffusion_exponents, EnergyProfile, ProfileKind};
pub use weights::{build_weights, FrameworkConstants, WeightSet, WeightVariant};
