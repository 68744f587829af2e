//! Loops classified by the conjugacy class of their holonomy in a finite
//! group attached to the edges.

pub mod assignment;
pub mod group;
pub mod mass;

pub use assignment::{gauge_transform, tree_gauge, AssignmentSpec, EdgeAssignment, GaugeMap};
pub use group::{FiniteGroupSpec, Irrep};
pub use mass::{character_weighted_mass, extended_kernel, holonomy_class_mass, holonomy_class_masses};
