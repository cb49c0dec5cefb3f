//! Procedural generation, verification and bookkeeping for a set of binary
//! visual-concept tasks (bilateral symmetry, per-object symmetry, counting,
//! shape-type counting and common fate), plus the half-face fusion pipeline.
//!
//! Every generator is a pure function of a [`SeededRng`] and a target label.
//! Labels are checked by the rule-based classifiers in [`oracles`], which
//! share only the raster substrate with the generators.

pub mod components;
pub mod dataset;
pub mod error;
pub mod face;
pub mod image;
pub mod oracles;
pub mod placement;
pub mod raster;
pub mod rng;
pub mod sample;
pub mod tasks;

pub use crate::error::{Error, Result};
pub use crate::image::GrayImage;
pub use crate::raster::{PolygonSpec, ShapeInstance, ShapeKind};
pub use crate::rng::SeededRng;
pub use crate::sample::{Label, Recipe, Sample, SampleMeta};
