//! Exact Poisson means: geodesic classes, contractible loops, regular-graph
//! closed forms and closed geodesics on hyperbolic surfaces.

pub mod bessel;
pub mod hyperbolic;
pub mod quadrature;
pub mod regular;
pub mod rho;

pub use bessel::bessel_k;
pub use hyperbolic::{hyperbolic_class_mass, hyperbolic_class_mass_quadrature};
pub use regular::{regular_class_mass, regular_contractible_expectation, regular_rho_closed_form};
pub use rho::{
    contractible_mass, geodesic_class_mass, geodesic_class_mass_with, geodesic_total_mass, solve_rho, RhoTable,
};
