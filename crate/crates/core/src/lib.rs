//! Conservative, high-order solution transfer between curved triangular meshes.
//!
//! Elements are Bézier triangles. A donor field is projected onto the
//! target mesh's discontinuous shape-function space by a Galerkin (L2)
//! projection whose right-hand side is integrated exactly over the curved
//! common refinement of the two meshes, using Green's theorem along the
//! boundaries of the element intersections.

pub mod curve;
pub mod curve_intersect;
pub mod error;
pub mod experiment;
pub mod generate;
pub mod io;
pub mod mesh;
pub mod net;
pub mod point;
pub mod poly;
pub mod polygon;
pub mod quadrature;
pub mod svg;
pub mod transfer;
pub mod tri_intersect;
pub mod triangle;

pub use curve::BezierCurve;
pub use error::{Error, Result};
pub use mesh::{CurvedMesh, DiscreteField};
pub use point::{BoundingBox, Point};
pub use polygon::CurvedPolygon;
pub use transfer::{transfer_field, TransferPlan};
pub use triangle::{BezierTriangle, StandardNodes};
