//! Exact laws, quadrature divergences and bound calculators.

mod bounds;
mod gaussian;
mod quadrature;

pub use bounds::*;
pub use gaussian::{lmc_gaussian_trajectory, GaussianChain, GaussianLaw, GaussianTrajectory, GL_ORDER};
pub use quadrature::{
    quad_divergences, simpson, Divergences, GaussLegendre, SIMPSON_ABS_TOL, SIMPSON_MAX_DOUBLINGS,
    SIMPSON_REL_TOL,
};
