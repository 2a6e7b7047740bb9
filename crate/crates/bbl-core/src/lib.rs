//! Numerical kernels for inequalities on planar convex bodies and
//! power-concave functions: power means and their explicit stability
//! constants, an exact convex-polygon kernel, Hausdorff/asymmetry
//! distances, supremal convolution with layer-cake machinery, and a
//! P1 finite-element torsion solver.
//!
//! Everything is plain `f64`; tolerances are stated per operation.
//! All public operations are pure functions of their arguments and
//! safe to call concurrently.

pub mod distance;
pub mod error;
pub mod geom;
mod lp;
pub mod means;
pub mod pconcave;
pub mod polygon;
mod quad;
pub mod torsion;

pub use error::{Error, Result};
pub use geom::Vec2;
pub use polygon::ConvexPolygon;
