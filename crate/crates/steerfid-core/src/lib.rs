//! Estimation of the fidelity of separability for small multipartite
//! quantum states.
//!
//! The crate provides three mutually cross-checking pipelines:
//!
//! * a simulated variational steering algorithm ([`vqsa`]) that maximizes
//!   the acceptance probability of a swap-test protocol over steering
//!   unitaries and conditional local circuits,
//! * two semidefinite-programming benchmarks ([`sdp`]) built on extendible
//!   state relaxations and entanglement-breaking channel relaxations, with
//!   a dense interior-point solver,
//! * brute-force oracles ([`oracle`]) that search pure-state decompositions
//!   directly and report certified lower bounds.
//!
//! Supporting layers: dense complex linear algebra with labelled tensor
//! layouts ([`qcore`]), named test states and purifications ([`states`]),
//! and hardware-efficient parameterized circuits ([`circuits`]).
//!
//! The crate is `no_std` (with `alloc`); all randomness is explicit and
//! seeded, so every run is reproducible.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod circuits;
pub mod error;
pub mod oracle;
pub mod qcore;
mod randu;
pub mod sdp;
pub mod states;
pub mod vqsa;

pub use error::{Error, Result};
pub use qcore::{DensityMatrix, Layout, Matrix, PureState};
