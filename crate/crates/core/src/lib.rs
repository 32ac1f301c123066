//! Numerical engine for the Donaldson metric on the space of symplectic
//! 2-forms in a fixed cohomology class on the flat 4-torus.
//!
//! The crate evaluates the metric, its Levi-Civita connection, geodesics, the
//! Donaldson energy functional with its gradient flow and covariant Hessian,
//! and ships a residual-checked identity suite covering all of them.
//!
//! Layering, bottom up:
//!
//! * [`fields4`] — periodic grid, k-form/vector fields, exterior algebra and
//!   spectral differentiation;
//! * [`spectral_hodge`] — exact Hodge solvers for the flat background metric;
//! * [`rho_geometry`] — the pointwise geometry a symplectic form induces
//!   (the function u, the reflection R, the twisted stars, the metric g^rho);
//! * [`donaldson_metric`] — the inner product on exact 2-forms, the
//!   associated-vector-field elliptic solver and the Levi-Civita connection;
//! * [`energy`] — the energy functional, its gradient and covariant Hessian;
//! * [`hyperkahler`] — the flat hyperKahler triple and its specializations;
//! * [`dynamics`] — geodesic and gradient-flow time integration;
//! * [`checks`] — the seeded identity suite shared by tests and the CLI.
//!
//! Grid work is data-parallel behind the default `parallel` feature; all
//! reductions are chunked in a fixed order so results are bit-identical
//! regardless of thread count.

pub mod error;
pub(crate) mod mat4;
pub(crate) mod par;

pub mod fields4;
pub mod spectral_hodge;
pub mod rho_geometry;
pub mod donaldson_metric;
pub mod energy;
pub mod hyperkahler;
pub mod dynamics;
pub mod checks;

pub use error::{Error, Result};
pub use fields4::{Grid4, KForm, VectorField};
pub use rho_geometry::SymplecticState;
