//! Constructive decision procedures for two stochastic orders between
//! finitely supported measures on ℝᵈ:
//!
//! - the order induced by support functions (convex, positively
//!   1-homogeneous functions), decided by searching for a moment-preserving
//!   unnormalized kernel, and
//! - the convex order, decided by searching for a martingale coupling.
//!
//! Both checks return either a verified witness (a kernel) or a verified
//! separating function built from a Farkas certificate of the underlying
//! linear program. Alongside the decision procedures the crate provides the
//! explicit measure and kernel constructions that relate the two orders:
//! homogeneous marginals, the sphere kernels and their gluing, grid
//! coarsening, the barycentric cost, the half-space lift and the Wulff-shape
//! support function.
//!
//! All arithmetic is `f64`; every yes/no decision takes an explicit
//! tolerance (see [`Tolerances`]).

pub mod cli;
pub mod error;
pub mod geometry;
pub mod io;
pub mod kernels;
pub mod lp;
pub mod measures;
pub mod order;

pub use error::{Error, Result};
pub use geometry::{PolyhedralSupportFunction, SphericalFunctionSamples};
pub use kernels::DiscreteKernel;
pub use lp::{LinearProgram, LpOutcome};
pub use measures::{Atom, DiscreteMeasure, Norm, Point};
pub use order::{ConvexPolyhedralFunction, OrderVerdict, Witness};

/// Absolute tolerance on weights and relative tolerance on coordinates.
pub const DEFAULT_TOL: f64 = 1e-9;
/// Primal feasibility tolerance of the LP engine (after row scaling).
pub const DEFAULT_FEAS_TOL: f64 = 1e-8;
/// Minimum Farkas margin of an infeasibility certificate.
pub const DEFAULT_CERT_TOL: f64 = 1e-9;

/// Tolerance bundle threaded through the decision procedures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Weights at or below this are treated as zero; coordinates closer than
    /// this (relative) are treated as equal.
    pub tol: f64,
    pub feas_tol: f64,
    pub cert_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            feas_tol: DEFAULT_FEAS_TOL,
            cert_tol: DEFAULT_CERT_TOL,
        }
    }
}

impl Tolerances {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }

    pub fn lp(&self) -> lp::LpTolerances {
        lp::LpTolerances {
            feas_tol: self.feas_tol,
            cert_tol: self.cert_tol,
        }
    }
}
