//! Exact computer algebra for coordinate jets on affine curve charts
//! and canonical forms of Lie-algebra-valued connections.
//!
//! The crate is organized around five areas:
//!
//! - [`jetgroup`]: truncated power series over a pluggable coefficient
//!   ring and the group of invertible coordinate jets, with its
//!   semidirect and kernel structure.
//! - [`curve`]: localized polynomial charts, named coordinates, and the
//!   Taylor cocycles relating two coordinates.
//! - [`liealg`]: matrix realizations of simple Lie algebras with a
//!   principal triple, principal grading, and the canonical centralizer
//!   basis.
//! - [`oper`]: gauge transformations of connections, the oper
//!   condition, canonical representatives, the Schwarzian
//!   coordinate-change law, and the comparison of jet-side and
//!   group-side transition cocycles.
//! - [`io`]: file formats and canonical textual rendering used by the
//!   command-line front end.
//!
//! All arithmetic is exact over ℚ and rational-function fields; values
//! are immutable and operations are pure functions.

pub mod curve;
pub mod io;
pub mod liealg;
pub mod matrix;
pub mod oper;
pub mod jetgroup;
pub mod poly;
pub mod ring;

pub use curve::{Chart, ChartRing, CurveError, PointQ, RatFunc};
pub use jetgroup::{AutJet, GmPart, JetError, TruncSeries, UnipotentPart};
pub use liealg::{B2AdElement, GroupElement, LieError, LieRealization};
pub use matrix::Mat;
pub use oper::{
    CanonicalOper, CanonicalizeOptions, OperCheck, OperConnection, OperError, Orientation,
    TorsorReport,
};
pub use poly::Poly;
pub use ring::{QRing, Ring, RingError};
