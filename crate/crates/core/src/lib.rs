//! Thick geodesic triangulations of hyperbolic space.
//!
//! The pipeline samples a maximal separated net on a patch of `H^n`,
//! builds its Delaunay triangulation, perturbs vertices dimension by
//! dimension until no sliver simplices remain, and certifies the result
//! against explicit quality bounds.

pub mod bounds;
pub mod certify;
pub mod delaunay;
pub mod error;
pub mod io;
pub mod kernel;
pub mod perturb;
pub mod quality;
pub mod sampler;
pub mod volume;

mod grid;
mod predicates;

pub use delaunay::{build_delaunay, is_delaunay, SimplexComplex};
pub use error::{GeomError, Result};
pub use kernel::{HPoint, Hyperplane, Sphere};
pub use quality::QualityParams;
pub use sampler::{genericity_jitter, sample_maximal_net, PatchDomain, PointSet};
