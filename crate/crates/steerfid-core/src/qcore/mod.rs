//! Dense complex linear algebra and quantum-information primitives.

pub mod eigh;
pub mod layout;
pub mod matrix;
pub mod ops;
pub mod state;

pub use eigh::{eigh, eigvalsh, EigenDecomposition};
pub use layout::Layout;
pub use matrix::{vec_inner, vec_norm, Matrix};
pub use ops::{
    embed_operator, fidelity_exact, partial_trace, partial_transpose, permutations,
    permute_subsystems, permute_vector, spectral_norm, sqrt_psd, swap_operator,
    symmetric_projector, symmetrize_permutations, tensor, NEG_EIG_CLIP,
};
pub use state::{DensityMatrix, PureState, STATE_TOL};
