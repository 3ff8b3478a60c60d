//! Random connection networks: isolated nodes, boundary and truncation
//! effects, and small components.
//!
//! - [`connfn`]: connection functions, their integral `C` and tail class.
//! - [`models`]: the dense, extended, square, torus and window frames.
//! - [`simulate`]: Poisson sampling, edge construction, component census and
//!   the torus-to-square coupling.
//! - [`quadrature`]: expected isolated-node counts and `E(ξ₂)`.
//! - [`experiments`]: sweeps, statistics and result files.
//!
//! The guide in `book/` walks through each of these with runnable examples.

pub mod connfn;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod models;
pub mod quad;
pub mod quadrature;
pub mod rng;
pub mod simulate;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/connection-functions.md")]
    mod connection_functions {}
    #[doc = include_str!("../../../book/src/models.md")]
    mod models {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/quadrature.md")]
    mod quadrature {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
