//! Numerical laboratory for integral 2-varifolds represented as
//! multiplicity-weighted triangle meshes in ℝⁿ.
//!
//! The crate is organised bottom-up:
//!
//! * [`mesh`] holds [`DiscreteVarifold`], its measure services (mass, ball
//!   and half-space clipping, diameter) and file I/O.
//! * [`curvature`] computes the discrete first variation (mean curvature
//!   vector), angle-defect Gauss curvature and the Willmore energy.
//! * [`monotonicity`] measures density ratios and the monotonicity identity.
//! * [`moebius`] inverts a varifold about a point and checks the curvature
//!   transformation law.
//! * [`rigidity`] builds the comparison round sphere and its deviation metrics.
//! * [`bochner`] verifies the Bochner identity for conformal grid immersions.
//! * [`zoo`] generates every test surface deterministically.

pub mod bochner;
pub mod curvature;
pub mod error;
pub mod linalg;
pub mod mesh;
pub mod moebius;
pub mod monotonicity;
pub mod rigidity;
pub mod sum;
pub mod zoo;

pub use error::{Error, ErrorClass, Result};
pub use mesh::{DiscreteVarifold, VertexTag};
