//! Numerical workbench for graphical self-shrinking surfaces in R⁴.
//!
//! The crate layers exact jet differentiation ([`jets`]) under a per-point
//! extrinsic geometry engine ([`geometry`]), constant 2-forms and their Hodge
//! stars ([`forms`]), the singular-value adapted frame of a graph
//! ([`adapted_frame`]), pointwise identity verifiers ([`identities`]), surface
//! quadrature ([`integrals`]) and a Levenberg–Marquardt solver for the
//! discrete self-shrinker equation on a grid ([`solver`]).

pub mod adapted_frame;
pub mod corpus;
pub mod error;
pub mod expr;
pub mod forms;
pub mod geometry;
pub mod identities;
pub mod integrals;
pub mod jets;
pub mod solver;

pub use adapted_frame::{AdaptedFrame, SingularDecomposition};
pub use error::{Error, Result};
pub use expr::Expr;
pub use forms::ParallelForm2;
pub use geometry::{Gauge, Immersion, LocalGeometry, PointFrame};
pub use identities::{ResidualReport, Rigidity};
pub use jets::{Coord, Jet3};
