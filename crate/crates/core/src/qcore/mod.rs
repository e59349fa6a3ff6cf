//! Quantum value types and the small dense linear algebra behind them.

pub mod json;
pub mod matrix;
pub mod povm;
pub mod random;
pub mod state;

pub use matrix::{
    c, eig_hermitian, identity, pinv_sqrt, trace_norm, trace_norm_hermitian, ComplexMatrix,
    HermitianEigen, C64, RANK_TOL,
};
pub use povm::{validate_povm, Povm, PovmElement, PovmReport, POVM_TOL};
pub use state::{
    from_bloch, purity, to_bloch, trace_norm_distance, DensityMatrix, Ensemble, PureState,
};

/// Largest Hilbert-space dimension accepted by state constructors.
pub const MAX_DIM: usize = 8;
