//! Point-cloud approximation of pullback and uniform attractors for
//! parameterized non-autonomous dynamical systems.
//!
//! A non-autonomous system is represented by a two-parameter solution
//! operator `S(t, s)` realized through adaptive Runge-Kutta integration of a
//! user-supplied vector field family `f(t, x; lambda)`. Compact sets are
//! represented by finite [`geometry::PointCloud`]s, and set convergence is
//! measured in the Hausdorff metric. On top of this the crate builds:
//!
//! - pullback attractor sections as the deep-start limit of `S(t, s)D`
//!   ([`attractors::pullback_section`]),
//! - uniform attractor approximations as windowed unions of shifted images
//!   ([`attractors::uniform_attractor`]),
//! - parameter sweeps with semicontinuity and equi-attraction diagnostics
//!   ([`continuity`]),
//! - concrete systems with explicit a priori bounds: the Lorenz family
//!   ([`systems::lorenz`]) and a periodic spectral Galerkin surrogate of the
//!   2D incompressible Navier-Stokes equations ([`systems::nse`]).
//!
//! The crate is `no_std` (with `alloc`); all operations are deterministic
//! pure functions so repeated runs produce bit-identical results. IO, file
//! formats and the command-line driver live in the companion `basin-cli`
//! crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

mod fp;

pub mod attractors;
pub mod continuity;
pub mod geometry;
pub mod ode;
pub mod process;
pub mod report;
pub mod sampling;
pub mod systems;

pub use geometry::{hausdorff, merge_dedup, semi_distance, DistancePair, PointCloud};
pub use ode::IntegratorConfig;
pub use process::{evolve, evolve_cloud, ParameterPoint, ProcessDef, VectorField};
