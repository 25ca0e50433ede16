//! Largest-angle bisection of triangles.
//!
//! Repeatedly splitting every triangle by the bisector of its largest angle
//! keeps the smallest angle bounded below, drives the mesh to zero, and
//! (except for the isosceles right triangle) produces unboundedly many
//! similarity classes. This crate runs that refinement, alongside the
//! longest-edge and shortest-altitude procedures for comparison, and checks
//! those properties numerically and, where possible, exactly.
//!
//! - [`symbolic`]: dyadic angle forms, Jacobsthal numbers, closed forms.
//! - [`geometry`]: coordinates, bisection, aspect ratios.
//! - [`engine`]: uniform refinement and per-generation statistics.
//! - [`verify`]: the property-check suite.
//! - [`report`] and [`svg`]: file formats used by the command-line tool.

pub mod dyadic;
pub mod engine;
pub mod error;
pub mod geometry;
pub mod symbolic;
pub mod report;
pub mod svg;
pub mod verify;

pub use dyadic::DyadicRational;
pub use engine::{
    refine, rho_sequence, similarity_classes, track_upsilon, AngleMode, AngleValue, GenerationStats,
    InitialShape, Refinement, RefinementRun, Retention, SimilarityKey, UpsilonStep,
};
pub use error::{Error, Result};
pub use geometry::{
    aspect_ratio, bisect, bisector_to_longest_side_ratio, largest_angle_vertex, side_lengths, Point2,
    ProcedureKind, TriangleNode,
};
pub use symbolic::{
    distinct_theta_check, evaluate_angle_form, jacobsthal, upsilon_angles, AngleForm, BaseAngles,
};
