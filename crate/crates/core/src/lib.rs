//! Numerical laboratory for logarithmic potentials, conformal metrics of
//! bounded integral curvature, and metric-independent gradient estimates on
//! flat tori and hyperbolic collars.
//!
//! The crate is organised by subsystem:
//!
//! - [`measure`]: signed Radon measures built from atoms and grid densities.
//! - [`potential`]: the planar logarithmic potential `I_μ`, its gradient and
//!   the scale-invariant functionals controlling it.
//! - [`disk`]: geodesic distance and ball areas of `e^{2u}|dx|²` on grids,
//!   plus the explicit area blow-up metric `e^{2x¹}`.
//! - [`torus`]: lattice normalisation, periodic spectral Poisson solves and
//!   ball gradient integrals on flat tori.
//! - [`collar`]: closed-form collar geometry of short hyperbolic geodesics.
//! - [`harness`]: config-driven experiment sweeps producing CSV rows.
//!
//! Data-parallel sweeps go through [`par`], which uses rayon when the
//! `parallel` feature is enabled and plain iterators otherwise. All
//! reductions are chunked in a fixed order so results are bit-identical
//! with and without the feature.

// `!(x > 0.0)` is how preconditions reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod collar;
pub mod disk;
pub mod error;
pub mod field;
pub mod geom;
pub mod harness;
pub mod measure;
pub mod par;
pub mod potential;
pub mod quadrature;
pub mod torus;

pub use error::{Error, Result};
pub use field::{GridField, ScalarField};
pub use geom::Vec2;
pub use measure::{Atom, DensityGrid, DomainTag, RegionSpec, SignedMeasure};
