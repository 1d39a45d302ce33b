//! Combinatorics of triangulated marked surfaces with punctures: flips and
//! flip graphs, quivers with potential, and twist group presentations.

pub mod braid;
pub mod flipgraph;
pub mod quiver;
pub mod surface;
pub mod triangulation;

pub use surface::{SurfaceError, SurfaceSpec, Violation};
pub use triangulation::{Side, SignedTriangulation, TriError, Triangulation};
