pub mod analytics;
pub mod error;
pub mod graph;
pub mod harness;
pub mod holonomy;
pub mod linalg;
pub mod loops;
pub mod wilson;

pub use error::{Error, Result};
pub use graph::{RootedSpanningTree, TransitionKernel, WeightedGraph};
pub use holonomy::{EdgeAssignment, FiniteGroupSpec};
pub use loops::{BasedLoop, GeodesicClass, UnbasedLoop};
