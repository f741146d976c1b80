//! Symbolic-numeric toolkit for traveling waves of the KdV hierarchy.
//!
//! * [`special`]: elliptic integrals and Jacobi functions.
//! * [`symbolic`]: exact rational computer algebra over the sech/tanh and
//!   cn/sn/dn rings.
//! * [`catalog`]: KdV, KdV2 and KdV3 as exact term lists.
//! * [`ansatz`]: soliton, cnoidal and superposition ansätze and the
//!   coefficient conditions they produce.
//! * [`solver`]: parameter solving and consistency certificates.
//! * [`verify`]: pointwise residuals and period means on grids.
//! * [`evolve`]: periodic pseudo-spectral time integration.

pub mod ansatz;
pub mod catalog;
pub mod error;
pub mod evolve;
pub mod output;
pub mod solver;
pub mod special;
pub mod symbolic;
pub mod verify;

pub use error::{KdvError, Result};
