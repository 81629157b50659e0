//! Exact diagonalization of short open Fermi-Hubbard chains (quantum-dot arrays)
//! and the pairwise correlations of their ground and thermal states.
//!
//! Each dot is a four-level system spanned by `|0>, |up>, |down>, |up down>`.
//! The pipeline is
//!
//! 1. [`fock`]: Fock basis and Hamiltonian assembly with Jordan-Wigner signs,
//! 2. [`spectral`]: dense diagonalization, degeneracy clusters, bands, level crossings,
//! 3. [`states`]: ground-projector and Gibbs density matrices, partial traces,
//! 4. [`measures`]: entropies, lower bound of concurrence, coherence, mutual information,
//! 5. [`sweep`]: parameter sweeps over `(U, kT)` and CSV output.
//!
//! Energies are measured in units of the hopping amplitude `t`.

pub mod error;
pub mod fock;
pub mod measures;
pub mod par;
pub mod spectral;
pub mod states;
pub mod sweep;

pub use error::{Error, Result};
pub use fock::{
    build_basis, build_hamiltonian, FockBasis, HermitianOperator, HubbardParams, Ladder, Spin,
};
pub use measures::{
    coherence, generalized_concurrence, lbc, local_entanglement, mutual_information, so_generators,
    von_neumann_entropy, CorrelationRecord, GeneratorSet, LbcResult,
};
pub use spectral::{cluster_degeneracies, count_bands, crossing_scan, diagonalize, Spectrum};
pub use states::{
    gibbs_state, ground_state_density, occupation_weights, partial_trace, reduced_thermal_state,
    DensityMatrix, ReducedState,
};

/// Complex scalar used for all operators.
pub type C64 = num_complex::Complex64;
