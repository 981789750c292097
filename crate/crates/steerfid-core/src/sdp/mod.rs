//! Semidefinite programming layer: a problem container with equality
//! presolve, an interior-point solver, and the separability benchmarks
//! built on them.

mod benchmarks;
mod problem;
mod solver;

pub use benchmarks::{
    benchmark1, benchmark1_detailed, benchmark2, benchmark2_detailed, bound_gap1, fidelity_sdp,
    fidelity_sdp_detailed, MAX_EXTENSION_LEVEL, SUPPORT_TOL,
};
pub use problem::{BlockId, SdpProblem, MAX_SDP_DIM};
pub use solver::{SdpResiduals, SdpSolution, SdpStatus, SolveOptions};
