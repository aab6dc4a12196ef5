//! Target operators: Pauli sums, fermionic operators, the Jordan-Wigner map
//! and decompositions into fast-forwardable summands.

mod decompose;
mod evolution;
mod fermion;
mod givens;
mod io;
mod jw;
mod models;
mod pauli;

pub use decompose::{
    decompose_number_conserving, decompose_number_conserving_split, decompose_pauli,
    decompose_quadratic, low_rank_evolution, vacuum_eigenvalue, Entry, FactorSpec,
    HamiltonianDecomposition, LowRankFactors, Summand, SummandKind,
};
pub use evolution::{BasisChange, Compilation, DiagonalTerm, Evolution, EvolutionBlock};
pub use fermion::{FermionOperator, Ladder};
pub use givens::{diagonalize_quadratic, GivensBlock, GivensNetwork, QuadraticDiagonalization};
pub use io::{
    load_hamiltonian_file, load_low_rank_file, parse_hamiltonian, parse_low_rank, LoadedHamiltonian,
};
pub use jw::{jordan_wigner, JordanWigner};
pub use models::{
    build_hopping_chain, build_hopping_chain_with, build_next_nearest_chain, build_tfim, Boundary,
};
pub use pauli::{Pauli, PauliString, PauliSum};
