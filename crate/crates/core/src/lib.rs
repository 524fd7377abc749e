//! Planar Steiner trees built from a self-similar binary tree.
//!
//! The crate has four layers:
//!
//! * [`geometry`]: points, segments, Fermat points, exact orientation tests.
//! * [`fractal`]: the binary tree embedding with edge ratio `λ`, its terminal
//!   set, lengths and embedding validation.
//! * [`solver`]: an exact Euclidean Steiner tree solver for up to ten
//!   terminals, searching the full topologies by branch and bound.
//! * [`verifier`]: numeric checks of the length bounds, symmetric
//!   constructions and truncated minimality of the fractal tree.

pub mod error;
pub mod fractal;
pub mod geometry;
pub mod solver;
pub mod verifier;

pub use error::{Error, Result};
pub use geometry::{Line, Point, Segment};
