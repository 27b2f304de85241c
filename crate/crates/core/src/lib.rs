//! Curvature algebra and linearized curvature operators for hypersurfaces of
//! the unit sphere and of hyperbolic space.
//!
//! The crate is organized around a small pipeline:
//!
//! * [`symfun`] — elementary symmetric functions of principal curvatures,
//!   higher-order mean curvatures, Newton transformations `P_k` and their
//!   trace identities.
//! * [`chart`] — local parametrizations of hypersurfaces sitting inside the
//!   sphere `S^{n+1}` (in `R^{n+2}`) or hyperbolic space `H^{n+1}` (in
//!   Lorentz–Minkowski space `R^{n+2}_1`), with frames, second fundamental
//!   form and Christoffel symbols.
//! * [`lkop`] — the operators `L_k f = tr(P_k ∘ Hess f)` evaluated two ways:
//!   numerically through the chart machinery, and through closed-form
//!   expressions for positions and Gauss maps.
//! * [`catalog`] — the model families (totally geodesic slices, umbilic caps
//!   and their hyperbolic analogues, standard Riemannian products) together
//!   with the constants `(A, b)` that satisfy `L_k x = A x + b` on each.
//! * [`verify`] — affine regression of `(A, b)` from sampled data, structural
//!   residual checks, and a classifier that names the family a sample set
//!   came from.
//! * [`cli`] — the `newtonlk` command-line front end with deterministic JSON
//!   reports.

pub mod catalog;
pub mod chart;
pub mod cli;
pub mod error;
pub mod lkop;
pub mod numdiff;
pub mod symfun;
pub mod tol;
pub mod util;
pub mod verify;

pub use error::{Error, Result};
