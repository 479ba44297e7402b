//! Dense complex matrix calculus for quantum-channel analysis: Choi matrices,
//! partial transposes, PPT and entanglement diagnostics, and numerical
//! factorization of channels through an intermediate dimension.
//!
//! Two scalar backends are supported throughout. Exact rational arithmetic
//! reproduces reference matrices bit-for-bit and makes structural identities
//! (Kronecker associativity, Choi/map roundtrips, composition) testable with
//! no tolerances. Float64 is used for spectra, singular values and the
//! factorization solver.

pub mod channel;
pub mod entanglement;
pub mod error;
pub mod heuristic;
pub mod io;
pub mod matrix;
pub mod sampling;
pub mod scalar;
pub mod spectra;
pub mod sqroot;
pub mod state;
pub mod witness;

pub use channel::{
    apply, channel_properties, choi_of_map, compose, map_of_choi, normalize_trace, ChannelProperties,
    ChoiMatrix, LinearMapTensor,
};
pub use entanglement::{
    eb_index, eb_test, pairing, ppt_test, ppt_test_matrix, realignment_test, schmidt_rank,
    EbIndexResult, EbVerdict, PptVerdict, RealignmentReport,
};
pub use error::{Error, Result};
pub use heuristic::{positivity_heuristic, HeuristicReport};
pub use matrix::{DenseMatrix, Subsystem};
pub use scalar::{parse_rational, Backend, CRat, Rat, C64};
pub use spectra::{hermitian_eigenvalues, is_psd, numerical_rank, singular_values, PsdCheck};
pub use sqroot::{
    composition_residual, solve_factorization, verify_solution, ConstraintFlags,
    FactorizationMode, FactorizationProblem, FactorizationSolution, ResidualReport, SolverConfig,
    VerificationReport,
};
pub use state::BipartiteState;
pub use witness::{Witness, WitnessClass};

/// Default absolute tolerance for positive-semidefiniteness checks on the
/// float64 backend.
pub const DEFAULT_PSD_TOL: f64 = 1e-9;
