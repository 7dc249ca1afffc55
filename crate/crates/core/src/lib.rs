//! Rotation averaging on SO(3) by lifting to the unit quaternion sphere.
//!
//! The averaging problem for a set of sample rotations is lifted to
//! `S³ ⊂ ℝ⁴` through the double covering map. Critical points of the lifted
//! cost are the zeros of the standard control vector field, which is built
//! from Gram determinants of the constraint and cost gradients on the ambient
//! Euclidean space. Zeros found on the sphere are pushed back to SO(3) and
//! checked against closed-form characterizations written directly in
//! rotations.
//!
//! # Modules
//!
//! - [`geometry`]: quaternion/rotation primitives, the covering map and its differential.
//! - [`control_field`]: Gramians, the control field `v0`, and the sphere-specialized tensor.
//! - [`cost`]: the chordal, geodesic, trace-sqrt and Lp-chordal cost models.
//! - [`solvers`]: dissipative flow, multistart, classification and an eigenvector oracle.
//! - [`poly`]: even polynomials and positive root isolation.
//! - [`sweep`]: the three-rotation x-axis example parameterized by an angle.
//! - [`check`]: randomized invariant suite used by `rotavg check`.
//! - [`cli`]: command implementations behind the `rotavg` binary.

pub mod check;
pub mod cli;
pub mod control_field;
pub mod cost;
pub mod error;
pub mod geometry;
pub mod poly;
pub mod solvers;
pub mod sweep;

pub use cost::{CostKind, CostModel, DomainGuard};
pub use error::{Error, Result};
pub use geometry::{RotationMatrix, SampleSet, SkewMatrix3, UnitQuaternion};
pub use solvers::{Classification, CriticalPoint, FlowConfig};
