//! Discrete Bogovskii operator on star-shaped domains and on finite unions of them.

mod checks;
mod domain;
mod operator;
mod split;

pub use checks::{
    boundary_decay, check_modular_bound, check_rearrangement_estimate, disk_density, disk_exact, divergence_residual,
    gradient_constant, indicator_density, random_densities, rearrangement_ratio, BoundaryDecay,
};
pub use domain::{Boundary, Bump, StarDomain};
pub use operator::{bogovskii_apply, bogovskii_field, bogovskii_fields, kernel, ray_weight, BogovskiiField, Quadrature, RayRule};
pub use split::{DecompositionMeasures, DomainDecomposition};
