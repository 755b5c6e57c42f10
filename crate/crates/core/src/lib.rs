//! Numerical laboratory for the angular-momentum decomposition of Dirac
//! fields coupled to electromagnetic fields.
//!
//! The crate builds localized Dirac spinor configurations on 3D grids,
//! constructs their Coulomb-gauge electromagnetic fields by free-space
//! spectral methods, and verifies by direct quadrature how the total
//! angular momentum splits into fermionic orbital, fermionic spin,
//! gauge (potential) and electromagnetic-field parts — in particular the
//! exact cancellation between the gauge term and the bound-field angular
//! momentum, and the coupling independence of the spin expectation.
//!
//! Layering, bottom up:
//! - [`grid`], [`field`], [`reduce`]: grids, field containers, and
//!   deterministic (thread-count independent) integration;
//! - [`stencil`], [`spectral`]: fourth-order derivatives and free-space
//!   (open boundary) spectral operators;
//! - [`helmholtz`]: longitudinal/transverse splitting with diagnostics;
//! - [`amf`]: the AMF1 on-disk field format;
//! - [`dirac`]: gamma algebra, densities, angular-momentum operators;
//! - [`scenario`]: the catalog of initial spinor configurations;
//! - [`emfield`]: bound/radiative electromagnetic field observables;
//! - [`gauge`]: gauge transformations and invariance scans;
//! - [`decompose`]: the angular-momentum/momentum/energy reports;
//! - [`scf`]: self-consistent coupling of spinor and self-fields.

pub mod amf;
pub mod decompose;
pub mod dirac;
pub mod emfield;
pub mod error;
pub mod field;
pub mod gauge;
pub mod grid;
pub mod helmholtz;
pub mod reduce;
pub mod scenario;
pub mod scf;
pub mod spectral;
pub mod stencil;

pub use error::{Error, Result};
pub use field::{ComplexScalarField, ScalarField, SpinorField, VectorField};
pub use grid::{Grid3, PhysicalParams, Scheme};
