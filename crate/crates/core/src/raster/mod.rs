//! Pixel-exact rasterization of the shape vocabulary.

mod fill;
mod geometry;
mod mask;
mod polygon;
mod shape;

pub use fill::{fill_rings, fill_rings_mirrored};
pub use geometry::{Point, Rect};
pub use mask::Mask;
pub use polygon::{random_polygon, random_symmetric_polygon, PolygonSpec, Segment, MIN_POLYGON_PIXELS};
pub use shape::{rasterize, rotation_towards, ShapeInstance, ShapeKind, POINTER_APEX_DEG};
