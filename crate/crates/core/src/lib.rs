//! Numerical laboratory for Krylov-subspace solvability of inverse linear
//! problems `A f = g` on truncated Hilbert spaces.
//!
//! The crate provides:
//!
//! * [`linop`] — complex vectors, operator kinds with derived adjoints,
//!   graph norms, and domain extensions;
//! * [`gallery`] — constructors for the worked operator/datum pairs, each
//!   bundled with machine-checkable facts;
//! * [`krylov`] — Krylov bases with full reorthogonalization and the
//!   structural diagnostics (projection distances, Krylov intersection,
//!   reducibility defects, escape indicator, graph-norm decay);
//! * [`cg`] — conjugate gradients with minimal-norm semantics plus the
//!   squared-operator drivers for symmetric-indefinite and skew-adjoint
//!   problems;
//! * [`spectral`] — atomic scalar spectral measures, functional calculus,
//!   growth series, and the polynomial isometry check;
//! * [`facts`] — the fact runner behind `reproduce-examples` and the
//!   diagnostics report assembly.
//!
//! All operations are pure functions of immutable inputs and safe to run
//! concurrently across experiments.

pub mod cg;
pub mod error;
pub mod facts;
pub mod gallery;
pub mod krylov;
pub mod linop;
pub mod quad;
pub mod spectral;

pub use error::{KrylovError, Result};
pub use linop::{DomainElement, HVector, OperatorSpec, SpaceId};
