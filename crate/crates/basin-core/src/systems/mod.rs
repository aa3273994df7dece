//! Concrete families of non-autonomous systems: the Lorenz equations with
//! their explicit a priori bounds, closed-form scalar benchmarks, and a
//! periodic spectral Galerkin surrogate of the 2D Navier-Stokes equations.

pub mod forcing;
pub mod linear;
pub mod lorenz;
pub mod nse;
